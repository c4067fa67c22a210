#include "dynsched/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dynsched/golden_section.hpp"

namespace dynsched {
namespace {

double sum_pow(std::span<const double> rs, double exponent) {
  double s = 0.0;
  for (double r : rs) s += std::pow(r, exponent);
  return s;
}

double task_count(Index n, KernelKind kernel) {
  const double nd = n;
  return kernel == KernelKind::outer ? nd * nd : nd * nd * nd;
}

int dims(KernelKind kernel) { return kernel == KernelKind::outer ? 2 : 3; }

}  // namespace

std::string_view to_string(VolumeModel model) { return model == VolumeModel::exact ? "exact" : "first-order"; }

AnalysisParams AnalysisParams::from_platform(const Platform& platform, Index n, KernelKind kernel) {
  return {platform.relative_speeds(), n, kernel};
}

AnalysisParams AnalysisParams::homogeneous(std::size_t p, Index n, KernelKind kernel) {
  if (p == 0) throw std::invalid_argument("need at least one worker");
  return {std::vector<double>(p, 1.0 / static_cast<double>(p)), n, kernel};
}

void AnalysisParams::validate() const {
  if (rs.empty()) throw std::invalid_argument("relative speeds are empty");
  if (n == 0) throw std::invalid_argument("n must be at least 1");
  double total = 0.0;
  for (double r : rs) {
    if (!(r > 0.0)) throw std::invalid_argument("relative speeds must be positive");
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("relative speeds must sum to one");
}

double lower_bound_outer(std::span<const double> rs, Index n) { return 2.0 * n * sum_pow(rs, 0.5); }

double lower_bound_matmul(std::span<const double> rs, Index n) {
  const double nd = n;
  return 3.0 * nd * nd * sum_pow(rs, 2.0 / 3.0);
}

double lower_bound(KernelKind kernel, std::span<const double> rs, Index n) {
  return kernel == KernelKind::outer ? lower_bound_outer(rs, n) : lower_bound_matmul(rs, n);
}

double lower_bound(const AnalysisParams& params) { return lower_bound(params.kernel, params.rs, params.n); }

double competition_exponent(double rs_k) {
  if (!(rs_k > 0.0 && rs_k <= 1.0)) throw std::domain_error("relative speed must lie in (0, 1]");
  return (1.0 - rs_k) / rs_k;
}

double g(double x, double alpha, KernelKind kernel) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("knowledge fraction must lie in [0, 1]");
  if (!(alpha >= 0.0)) throw std::domain_error("alpha must be nonnegative");
  if (alpha == 0.0) return 1.0;
  return std::pow(1.0 - std::pow(x, dims(kernel)), alpha);
}

double t_fraction(double x, double rs_k, Index n, KernelKind kernel) {
  const double alpha = competition_exponent(rs_k);
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("knowledge fraction must lie in [0, 1]");
  return task_count(n, kernel) * (1.0 - std::pow(1.0 - std::pow(x, dims(kernel)), alpha + 1.0));
}

double stolen_tasks(double x, double rs_k, Index n, KernelKind kernel) {
  const double alpha = competition_exponent(rs_k);
  const double xd = std::pow(x, dims(kernel));
  return task_count(n, kernel) * (xd + (std::pow(1.0 - xd, alpha + 1.0) - 1.0) / (alpha + 1.0));
}

double max_admissible_beta(std::span<const double> rs) {
  const double rs_max = *std::max_element(rs.begin(), rs.end());
  return 2.0 / rs_max;
}

double switch_fraction(double beta, double rs_k, KernelKind kernel) {
  const double radicand = beta * rs_k - 0.5 * beta * beta * rs_k * rs_k;
  // Round-off at the admissible edge.
  if (radicand < 0.0 && radicand > -1e-14) return 0.0;
  if (!(radicand >= 0.0 && radicand <= 1.0))
    throw std::domain_error("beta too large for this relative speed: switch radicand outside [0, 1]");
  return kernel == KernelKind::outer ? std::sqrt(radicand) : std::cbrt(radicand);
}

double phase2_cost_per_task(double x, KernelKind kernel) {
  if (kernel == KernelKind::outer) return 2.0 / (1.0 + x);
  return 3.0 * (1.0 + x) / (1.0 + x + x * x);
}

double phase1_volume_outer(double beta, std::span<const double> rs, Index n) {
  double v = 0.0;
  for (double r : rs) v += 2.0 * n * switch_fraction(beta, r, KernelKind::outer);
  return v;
}

double phase2_volume_outer(double beta, std::span<const double> rs, Index n) {
  double per_task = 0.0;
  for (double r : rs) per_task += r * phase2_cost_per_task(switch_fraction(beta, r, KernelKind::outer), KernelKind::outer);
  return std::exp(-beta) * task_count(n, KernelKind::outer) * per_task;
}

PhaseVolumes phase_volumes_matmul(double beta, std::span<const double> rs, Index n) {
  const double nd = n;
  PhaseVolumes v;
  double per_task = 0.0;
  for (double r : rs) {
    const double x = switch_fraction(beta, r, KernelKind::matmul);
    v.phase1 += 3.0 * nd * nd * x * x;
    per_task += r * phase2_cost_per_task(x, KernelKind::matmul);
  }
  v.phase2 = std::exp(-beta) * task_count(n, KernelKind::matmul) * per_task;
  return v;
}

PhaseVolumes phase_volumes_first_order(double beta, const AnalysisParams& params) {
  const double nd = params.n;
  const auto& rs = params.rs;
  PhaseVolumes v;
  if (params.kernel == KernelKind::outer) {
    // Per worker 2 n sqrt(beta rs)(1 - beta rs / 4); phase 2 costs 2 (1 - x) per task.
    for (double r : rs) v.phase1 += 2.0 * nd * std::sqrt(beta * r) * (1.0 - beta * r / 4.0);
    v.phase2 = 2.0 * std::exp(-beta) * nd * nd * (1.0 - std::sqrt(beta) * sum_pow(rs, 1.5));
  } else {
    const double s23 = sum_pow(rs, 2.0 / 3.0);
    const double s53 = sum_pow(rs, 5.0 / 3.0);
    v.phase1 = 3.0 * nd * nd * (std::pow(beta, 2.0 / 3.0) * s23 - std::pow(beta, 5.0 / 3.0) * s53);
    v.phase2 = 3.0 * std::exp(-beta) * nd * nd * nd * (1.0 - std::pow(beta, 2.0 / 3.0) * s53);
  }
  return v;
}

PhaseVolumes phase_volumes(double beta, const AnalysisParams& params, VolumeModel model) {
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
  if (model == VolumeModel::first_order) return phase_volumes_first_order(beta, params);
  if (params.kernel == KernelKind::outer)
    return {phase1_volume_outer(beta, params.rs, params.n), phase2_volume_outer(beta, params.rs, params.n)};
  return phase_volumes_matmul(beta, params.rs, params.n);
}

double objective(double beta, const AnalysisParams& params, VolumeModel model) {
  return phase_volumes(beta, params, model).total() / lower_bound(params);
}

BetaResult optimize_beta(const AnalysisParams& params, VolumeModel model, double lo, double hi, double tolerance) {
  params.validate();
  BetaResult result;
  const double admissible = max_admissible_beta(params.rs);
  if (hi > admissible) {
    hi = admissible;
    result.bracket_shrunk = true;
  }
  if (!(lo < hi)) throw std::domain_error("empty beta bracket");
  result.upper_bracket = hi;
  const auto best = golden_section_minimize([&](double b) { return objective(b, params, model); }, lo, hi, tolerance);
  result.beta = best.x;
  result.objective_value = best.value;
  result.phase1_fraction = 1.0 - std::exp(-best.x);
  return result;
}

double beta_homogeneous(std::size_t p, Index n, KernelKind kernel, VolumeModel model) {
  return optimize_beta(AnalysisParams::homogeneous(p, n, kernel), model).beta;
}

std::uint64_t phase_switch_threshold(double beta, std::uint64_t total) {
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
  return static_cast<std::uint64_t>(std::llround(std::exp(-beta) * static_cast<double>(total)));
}

}  // namespace dynsched
