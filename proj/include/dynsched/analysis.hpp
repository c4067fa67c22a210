#pragma once

// Mean-field model of the two-phase dynamic strategies.
//
// A worker that knows a fraction x of the indices of every dimension sees a
// fraction g(x) = (1 - x^d)^alpha of the tasks outside its known square (d = 2)
// or cube (d = 3) still unprocessed, where alpha = (1 - rs) / rs. Switching to
// random allocation when exp(-beta) of the tasks remain gives a communication
// volume whose ratio to the lower bound is minimized over beta.
//
// All quantities are in block units: n blocks per dimension, n^d tasks.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dynsched/kernel.hpp"
#include "dynsched/platform.hpp"

namespace dynsched {

struct AnalysisParams {
  std::vector<double> rs;  // relative speeds, summing to one
  Index n = 1;
  KernelKind kernel = KernelKind::outer;

  static AnalysisParams from_platform(const Platform& platform, Index n, KernelKind kernel);
  static AnalysisParams homogeneous(std::size_t p, Index n, KernelKind kernel);

  /// Throws std::invalid_argument on an empty or non-normalized rs vector.
  void validate() const;
};

/// Which closed forms produce the phase volumes.
///
/// `first_order` uses the small-rs expansions (the model the published
/// thresholds were computed from); `exact` evaluates the switch fraction and the
/// per-task phase-2 cost without expansion.
enum class VolumeModel { first_order, exact };

std::string_view to_string(VolumeModel model);

struct PhaseVolumes {
  double phase1 = 0.0;
  double phase2 = 0.0;
  double total() const noexcept { return phase1 + phase2; }
};

struct BetaResult {
  double beta = 0.0;
  double objective_value = 0.0;
  double phase1_fraction = 0.0;  // 1 - exp(-beta)
  double upper_bracket = 0.0;    // upper end of the search interval actually used
  bool bracket_shrunk = false;   // true when the admissible range cut the default bracket
};

// Lower bounds: speed-proportional squares (outer) or cubes (matmul).
double lower_bound_outer(std::span<const double> rs, Index n);
double lower_bound_matmul(std::span<const double> rs, Index n);
double lower_bound(const AnalysisParams& params);
double lower_bound(KernelKind kernel, std::span<const double> rs, Index n);

/// (1 - rs) / rs: aggregate speed of the competitors relative to the worker.
double competition_exponent(double rs_k);

/// Unprocessed fraction outside the known square/cube: (1 - x^d)^alpha.
double g(double x, double alpha, KernelKind kernel);

/// Elapsed time times total speed when the worker reaches knowledge x:
/// n^d (1 - (1 - x^d)^(alpha + 1)).
double t_fraction(double x, double rs_k, Index n, KernelKind kernel);

/// Tasks inside the known square/cube that competitors processed:
/// n^d (x^d + ((1 - x^d)^(alpha + 1) - 1) / (alpha + 1)).
double stolen_tasks(double x, double rs_k, Index n, KernelKind kernel);

/// Largest beta for which beta rs_k - beta^2 rs_k^2 / 2 >= 0 for every worker.
double max_admissible_beta(std::span<const double> rs);

/// Knowledge fraction at the phase switch: (beta rs - beta^2 rs^2 / 2)^(1/d).
/// Throws std::domain_error if the radicand leaves [0, 1].
double switch_fraction(double beta, double rs_k, KernelKind kernel);

/// Expected blocks fetched by a random phase-2 task for a worker that knows a
/// fraction x per dimension, the task being uniform outside the known region:
/// 2 / (1 + x) (outer), 3 (1 + x) / (1 + x + x^2) (matmul).
double phase2_cost_per_task(double x, KernelKind kernel);

// Exact volumes.
double phase1_volume_outer(double beta, std::span<const double> rs, Index n);
double phase2_volume_outer(double beta, std::span<const double> rs, Index n);
PhaseVolumes phase_volumes_matmul(double beta, std::span<const double> rs, Index n);

/// First-order volumes.
PhaseVolumes phase_volumes_first_order(double beta, const AnalysisParams& params);

PhaseVolumes phase_volumes(double beta, const AnalysisParams& params, VolumeModel model = VolumeModel::first_order);

/// Predicted total volume of the two-phase strategy divided by the lower bound.
double objective(double beta, const AnalysisParams& params, VolumeModel model = VolumeModel::first_order);

/// Golden-section minimization of `objective` over [0.1, 12] (clipped to the
/// admissible range) to an absolute tolerance of 1e-4 on beta.
BetaResult optimize_beta(const AnalysisParams& params, VolumeModel model = VolumeModel::first_order,
                         double lo = 0.1, double hi = 12.0, double tolerance = 1e-4);

/// optimize_beta on p equal-speed workers: needs only p and n.
double beta_homogeneous(std::size_t p, Index n, KernelKind kernel, VolumeModel model = VolumeModel::first_order);

/// round(exp(-beta) * total): number of remaining tasks that triggers phase 2.
std::uint64_t phase_switch_threshold(double beta, std::uint64_t total);

}  // namespace dynsched
