#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "dynsched/analysis.hpp"
#include "dynsched/golden_section.hpp"

using namespace dynsched;

namespace {

std::vector<double> heterogeneous_rs(std::size_t p, std::uint64_t seed) {
  return make_uniform_platform(p, 10, 100, seed).relative_speeds();
}

// Grid-scan argmin, independent of the golden-section path.
double scan_argmin(const AnalysisParams& params, double lo, double hi, double step) {
  double best = lo, best_value = INFINITY;
  for (double b = lo; b <= hi; b += step) {
    const double v = objective(b, params);
    if (v < best_value) {
      best_value = v;
      best = b;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("lower bounds") {
  const std::vector<double> one{1.0};
  CHECK(lower_bound_outer(one, 37) == doctest::Approx(74));
  CHECK(lower_bound_matmul(one, 7) == doctest::Approx(147));
  const auto hom4 = AnalysisParams::homogeneous(4, 100, KernelKind::outer);
  CHECK(lower_bound(hom4) == doctest::Approx(400));
  const auto hom8 = AnalysisParams::homogeneous(8, 10, KernelKind::matmul);
  CHECK(lower_bound(hom8) == doctest::Approx(600));
  const auto hom9 = AnalysisParams::homogeneous(9, 50, KernelKind::outer);
  CHECK(lower_bound(hom9) == doctest::Approx(2.0 * 50 * 3));
}

TEST_CASE("g boundary values") {
  for (auto k : {KernelKind::outer, KernelKind::matmul}) {
    CHECK(g(0.0, 3.5, k) == 1.0);
    CHECK(g(1.0, 3.5, k) == 0.0);
    for (double x : {0.0, 0.3, 0.9, 1.0}) CHECK(g(x, 0.0, k) == 1.0);
  }
  CHECK(g(0.5, 2.0, KernelKind::outer) == doctest::Approx(0.5625));
  CHECK(g(0.5, 2.0, KernelKind::matmul) == doctest::Approx(0.765625));
  CHECK_THROWS_AS(g(1.5, 1.0, KernelKind::outer), std::domain_error);
}

TEST_CASE("g solves its ODE: d ln g / dx = -d x^(d-1) alpha / (1 - x^d)") {
  const double h = 1e-6;
  for (auto k : {KernelKind::outer, KernelKind::matmul}) {
    const int d = k == KernelKind::outer ? 2 : 3;
    for (double alpha : {0.5, 4.0, 19.0}) {
      for (double x = 0.05; x <= 0.95 + 1e-12; x += 0.05) {
        const double fd = (std::log(g(x + h, alpha, k)) - std::log(g(x - h, alpha, k))) / (2 * h);
        const double rhs = -d * std::pow(x, d - 1) * alpha / (1 - std::pow(x, d));
        CHECK(std::abs(fd - rhs) <= 1e-6 * std::max(1.0, std::abs(rhs)));
      }
    }
  }
}

TEST_CASE("t_fraction boundary values") {
  for (auto k : {KernelKind::outer, KernelKind::matmul}) {
    const double total = k == KernelKind::outer ? 100.0 * 100 : 100.0 * 100 * 100;
    CHECK(t_fraction(0.0, 0.1, 100, k) == 0.0);
    CHECK(t_fraction(1.0, 0.1, 100, k) == doctest::Approx(total));
  }
  // One worker: it computes exactly its own square.
  for (double x : {0.1, 0.5, 0.8}) CHECK(t_fraction(x, 1.0, 50, KernelKind::outer) == doctest::Approx(2500 * x * x));
}

TEST_CASE("consistency: x^d n^d = stolen + t * rs") {
  for (auto k : {KernelKind::outer, KernelKind::matmul}) {
    const int d = k == KernelKind::outer ? 2 : 3;
    for (double rs : {0.01, 0.05, 0.3, 1.0}) {
      for (double x = 0.0; x <= 1.0; x += 0.1) {
        const double lhs = std::pow(x, d) * std::pow(60.0, d);
        const double rhs = stolen_tasks(x, rs, 60, k) + t_fraction(x, rs, 60, k) * rs;
        CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, lhs));
      }
    }
  }
}

TEST_CASE("switch time barely depends on the worker for small relative speeds") {
  for (auto k : {KernelKind::outer, KernelKind::matmul}) {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
      const auto rs = heterogeneous_rs(50, seed);
      for (double beta : {2.0, 4.0}) {
        double lo = INFINITY, hi = -INFINITY, sum = 0;
        for (double r : rs) {
          const double t = t_fraction(switch_fraction(beta, r, k), r, 100, k);
          lo = std::min(lo, t);
          hi = std::max(hi, t);
          sum += t;
        }
        CHECK((hi - lo) / (sum / rs.size()) <= 0.005);
      }
    }
  }
}

TEST_CASE("switch fraction") {
  CHECK(switch_fraction(0.0, 0.1, KernelKind::outer) == 0.0);
  CHECK(switch_fraction(2.0, 1.0, KernelKind::outer) == 0.0);
  CHECK(switch_fraction(1e-3, 1e-4, KernelKind::outer) == doctest::Approx(std::sqrt(1e-7)).epsilon(1e-6));
  CHECK(switch_fraction(1e-3, 1e-4, KernelKind::matmul) == doctest::Approx(std::cbrt(1e-7)).epsilon(1e-6));
  CHECK(switch_fraction(4.0, 0.05, KernelKind::outer) == doctest::Approx(std::sqrt(0.2 - 0.02)));
  CHECK_THROWS_AS(switch_fraction(5.0, 0.5, KernelKind::outer), std::domain_error);
  CHECK(max_admissible_beta(std::vector<double>{0.5, 0.25, 0.25}) == doctest::Approx(4.0));
}

TEST_CASE("phase volumes, outer, exact") {
  const auto hom = AnalysisParams::homogeneous(20, 100, KernelKind::outer);
  CHECK(phase1_volume_outer(0.0, hom.rs, 100) == 0.0);
  const double beta = 3.0, p = 20;
  CHECK(phase1_volume_outer(beta, hom.rs, 100) ==
        doctest::Approx(2.0 * 100 * p * std::sqrt(beta / p - beta * beta / (2 * p * p))));
  // Nobody knows anything: every phase-2 task costs two blocks.
  CHECK(phase2_volume_outer(0.0, hom.rs, 100) == doctest::Approx(2.0 * 100 * 100));
  CHECK(phase2_volume_outer(38.0, hom.rs, 100) < 1e-10);
}

TEST_CASE("phase-1 ratio tends to sqrt(beta) for small relative speeds") {
  const auto hom = AnalysisParams::homogeneous(10000, 100, KernelKind::outer);
  for (double beta : {1.0, 4.0, 9.0})
    CHECK(phase1_volume_outer(beta, hom.rs, 100) / lower_bound(hom) == doctest::Approx(std::sqrt(beta)).epsilon(1e-3));
}

TEST_CASE("exact volumes agree with their first-order expansions as relative speeds shrink") {
  for (auto k : {KernelKind::outer, KernelKind::matmul}) {
    double prev_gap = INFINITY;
    for (std::size_t p : {20, 200, 2000}) {
      const auto params = AnalysisParams::homogeneous(p, 100, k);
      const double beta = 3.0;
      const auto exact = phase_volumes(beta, params, VolumeModel::exact);
      const auto first = phase_volumes(beta, params, VolumeModel::first_order);
      const double gap2 = std::abs(exact.phase2 - first.phase2) / exact.phase2;
      CHECK(gap2 < prev_gap);
      prev_gap = gap2;
      if (p == 2000) {
        CHECK(gap2 < 0.005);
        // Phase 1: leading term agrees; the matmul display keeps a larger second-order term.
        CHECK(std::abs(exact.phase1 - first.phase1) / exact.phase1 < 0.01);
      }
    }
  }
}

TEST_CASE("phase volumes, matmul, exact") {
  const auto hom = AnalysisParams::homogeneous(10, 20, KernelKind::matmul);
  const auto v0 = phase_volumes_matmul(0.0, hom.rs, 20);
  CHECK(v0.phase1 == 0.0);
  CHECK(v0.phase2 == doctest::Approx(3.0 * 20 * 20 * 20));
  // Per-task phase-2 cost: 3 (1 - x^2) / (1 - x^3) written as 3 (1 + x) / (1 + x + x^2).
  for (double x : {0.1, 0.4, 0.7}) {
    CHECK(phase2_cost_per_task(x, KernelKind::matmul) == doctest::Approx(3 * (1 - x * x) / (1 - x * x * x)));
    CHECK(phase2_cost_per_task(x, KernelKind::outer) == doctest::Approx(2 * (1 - x) / (1 - x * x)));
  }
}

TEST_CASE("objective shape, outer, p = 20, n = 100") {
  const auto hom = AnalysisParams::homogeneous(20, 100, KernelKind::outer);
  const double mid = objective(4.17, hom);
  CHECK(objective(0.1, hom) > 5.0 * mid);
  CHECK(objective(12.0, hom) > mid);
  // Far beyond the optimum only the phase-1 term is left: sqrt(beta)(1 - beta rs / 4).
  CHECK(objective(12.0, hom) / (std::sqrt(12.0) * (1 - 12.0 / 80.0)) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("golden-section search") {
  const auto r = golden_section_minimize([](double x) { return (x - 2.0) * (x - 2.0) + 1.0; }, 0.0, 5.0, 1e-6);
  CHECK(r.x == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(r.value == doctest::Approx(1.0));
  CHECK_THROWS(golden_section_minimize([](double x) { return x; }, 1.0, 1.0, 1e-3));
}

TEST_CASE("optimize_beta agrees with a grid scan") {
  for (auto [k, p, n] : {std::tuple{KernelKind::outer, 20, 100}, std::tuple{KernelKind::matmul, 100, 40},
                         std::tuple{KernelKind::outer, 200, 300}}) {
    const auto params = AnalysisParams::homogeneous(p, n, k);
    CHECK(optimize_beta(params).beta == doctest::Approx(scan_argmin(params, 0.1, 12.0, 1e-3)).epsilon(1e-3));
  }
}

TEST_CASE("published thresholds") {
  const auto outer = optimize_beta(AnalysisParams::homogeneous(20, 100, KernelKind::outer));
  CHECK(std::abs(outer.beta - 4.17) <= 0.05);
  CHECK(std::abs(beta_homogeneous(20, 100, KernelKind::outer) - 4.1705) <= 0.005);
  CHECK(outer.phase1_fraction == doctest::Approx(1 - std::exp(-outer.beta)));
  CHECK_FALSE(outer.bracket_shrunk);

  const auto mat = optimize_beta(AnalysisParams::homogeneous(100, 40, KernelKind::matmul));
  CHECK(std::abs(mat.beta - 2.92) <= 0.05);

  for (std::uint64_t seed : {1ull, 7ull, 21ull}) {
    const auto het = AnalysisParams{heterogeneous_rs(20, seed), 100, KernelKind::outer};
    CHECK(std::abs(optimize_beta(het).beta - outer.beta) <= 0.05);
  }
}

TEST_CASE("homogeneous beta grows with n") {
  // Both ranges keep the argmin inside [0.1, 12].
  for (auto [k, n0, step] : {std::tuple{KernelKind::outer, 50u, 50u}, std::tuple{KernelKind::matmul, 10u, 5u}}) {
    double prev = 0.0;
    for (Index n = n0; n <= n0 + 19 * step; n += step) {
      const double b = beta_homogeneous(20, n, k);
      REQUIRE(b < 11.99);
      CHECK(b > prev);
      prev = b;
    }
  }
}

TEST_CASE("argmin is stable under bracket perturbation") {
  const auto params = AnalysisParams{heterogeneous_rs(20, 3), 100, KernelKind::outer};
  const double base = optimize_beta(params).beta;
  CHECK(optimize_beta(params, VolumeModel::first_order, 0.09, 13.2).beta == doctest::Approx(base).epsilon(2e-4));
  CHECK(optimize_beta(params, VolumeModel::first_order, 0.11, 10.8).beta == doctest::Approx(base).epsilon(2e-4));
}

TEST_CASE("bracket shrinks to the admissible range") {
  const auto r = optimize_beta(AnalysisParams::homogeneous(2, 100, KernelKind::outer), VolumeModel::exact);
  CHECK(r.bracket_shrunk);
  CHECK(r.upper_bracket == doctest::Approx(4.0));
  CHECK(r.beta <= 4.0);
}

TEST_CASE("objective is continuous on the bracket") {
  for (auto model : {VolumeModel::first_order, VolumeModel::exact}) {
    const auto params = AnalysisParams{heterogeneous_rs(20, 5), 100, KernelKind::outer};
    const double top = std::min(12.0, max_admissible_beta(params.rs));
    double prev = objective(0.1, params, model);
    for (double b = 0.1 + 1e-3; b < top; b += 1e-3) {
      const double v = objective(b, params, model);
      CHECK(std::abs(v - prev) < 0.05);
      prev = v;
    }
  }
}

TEST_CASE("params validation") {
  CHECK_THROWS_AS(AnalysisParams({{0.5, 0.4}, 10, KernelKind::outer}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(AnalysisParams({{}, 10, KernelKind::outer}).validate(), std::invalid_argument);
  CHECK_NOTHROW(AnalysisParams::homogeneous(7, 10, KernelKind::matmul).validate());
}
