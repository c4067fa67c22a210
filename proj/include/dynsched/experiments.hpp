#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dynsched/analysis.hpp"
#include "dynsched/kernel.hpp"
#include "dynsched/platform.hpp"
#include "dynsched/strategies.hpp"

namespace dynsched {

/// How worker speeds are drawn.
///
/// Text forms: `uniform:lo:hi`, `set:s1:s2:...`, `dyn:lo:hi:jitter`, plus the
/// named scenarios unif.1, unif.2, set.3, set.5, dyn.5 and dyn.20.
struct Scenario {
  enum class Kind { uniform, discrete, dynamic };

  Kind kind = Kind::uniform;
  double lo = 10.0;
  double hi = 100.0;
  std::vector<double> speed_set;
  double jitter = 0.0;
  std::string name;  // label written to tables

  static Scenario uniform(double lo, double hi);
  static Scenario discrete(std::vector<double> speeds);
  static Scenario dynamic(double lo, double hi, double jitter);
  static Scenario parse(std::string_view text);

  Platform make_platform(std::size_t p, std::uint64_t seed) const;
};

struct BetaSpec {
  enum class Kind { automatic, fixed, sweep };

  Kind kind = Kind::automatic;
  double value = 0.0;
  double lo = 0.0, hi = 0.0, step = 0.0;

  static BetaSpec parse(std::string_view text);
  std::vector<double> sweep_values() const;
};

struct ExperimentSpec {
  KernelKind kernel = KernelKind::outer;
  std::vector<Index> ns;
  std::vector<std::size_t> ps;
  std::vector<StrategyId> strategies;
  std::vector<Scenario> scenarios;
  BetaSpec beta;
  std::size_t replications = 10;
  std::uint64_t base_seed = 1;

  /// Throws std::invalid_argument when a list is empty or a strategy does not match the kernel.
  void validate() const;
};

struct ReplicationStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single run
  std::size_t count = 0;
  std::vector<double> per_run;

  static ReplicationStats from_runs(std::vector<double> runs);
};

struct SweepRow {
  KernelKind kernel = KernelKind::outer;
  Index n = 0;
  std::size_t p = 0;
  StrategyId strategy = StrategyId::random_outer;
  std::string scenario;
  std::optional<double> beta;  // two-phase strategies only
  ReplicationStats stats;
  std::optional<double> analysis_pred;
};

using SweepTable = std::vector<SweepRow>;

/// Seed of the platform draw for one replication of one grid point. Depends on
/// the grid point's content, never on its position, and not on the strategy.
std::uint64_t platform_seed(std::uint64_t base_seed, KernelKind kernel, Index n, std::size_t p,
                            const Scenario& scenario, std::size_t replication);

/// Runs every grid point `replications` times; `jobs` bounds concurrency.
/// A beta sweep uses one platform draw per (n, p, scenario), shared by all betas.
SweepTable run_sweep(const ExperimentSpec& spec, unsigned jobs = 1);

/// DynamicX2Phases on a single platform draw for each beta in `betas`.
SweepTable beta_sweep(KernelKind kernel, std::size_t p, Index n, const Scenario& scenario,
                      const std::vector<double>& betas, std::size_t replications, std::uint64_t seed,
                      unsigned jobs = 1);

/// Header kernel,n,p,strategy,scenario,beta,mean_norm_comm,stddev,replications,analysis_pred;
/// reals with 6 significant digits, absent values as empty fields.
void emit_csv(const SweepTable& table, std::ostream& out);
void emit_csv(const SweepTable& table, const std::string& path);
SweepTable parse_csv(std::istream& in);

/// Line plot: x from column `x_column` (n, p, beta or a categorical column),
/// one polyline per distinct value of `series_column`, plus an "analysis"
/// polyline when rows carry predictions.
void emit_svg_plot(const SweepTable& table, std::string_view x_column, std::string_view series_column,
                   std::ostream& out);
void emit_svg_plot(const SweepTable& table, std::string_view x_column, std::string_view series_column,
                   const std::string& path);

/// Named figure recipes.
std::vector<std::string> recipe_names();
ExperimentSpec recipe(std::string_view name);
/// Column used on the x axis when plotting a recipe.
std::string recipe_x_column(std::string_view name);

/// Flat `key = value` spec file (see README for the grammar).
ExperimentSpec parse_spec(std::istream& in);
ExperimentSpec parse_spec_file(const std::string& path);

}  // namespace dynsched
