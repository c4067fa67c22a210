#include "dynsched/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dynsched/engine.hpp"

namespace dynsched {
namespace {

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.emplace_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(std::string_view text) {
  const std::string s = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  if (used != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

std::uint64_t to_uint(std::string_view text) {
  const std::string s = trim(text);
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
    throw std::invalid_argument("not a nonnegative integer: '" + s + "'");
  return std::stoull(s);
}

std::string format_g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string join_reals(const std::vector<double>& values, char sep) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    out += format_g6(values[i]);
  }
  return out;
}

StrategyId two_phase_for(KernelKind kernel) {
  return kernel == KernelKind::outer ? StrategyId::dynamic_outer_2phases : StrategyId::dynamic_matrix_2phases;
}

/// Runs fn(i) for i in [0, count) on up to `jobs` threads. The first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn&& fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

struct GridPoint {
  Index n;
  std::size_t p;
  std::size_t scenario;
  StrategyId strategy;
  std::optional<double> beta;
  bool shared_platform;  // one platform draw for all replications
};

SweepTable run_grid(KernelKind kernel, const std::vector<GridPoint>& points, const std::vector<Scenario>& scenarios,
                    std::size_t replications, std::uint64_t base_seed, unsigned jobs) {
  struct RunOutput {
    double normalized = 0.0;
    double prediction = 0.0;
  };
  std::vector<RunOutput> outputs(points.size() * replications);

  parallel_for(outputs.size(), jobs, [&](std::size_t idx) {
    const GridPoint& g = points[idx / replications];
    const std::size_t r = idx % replications;
    const Scenario& scenario = scenarios[g.scenario];
    const auto pseed = platform_seed(base_seed, kernel, g.n, g.p, scenario, g.shared_platform ? 0 : r);
    SimConfig config;
    config.problem = {kernel, g.n};
    config.platform = scenario.make_platform(g.p, pseed);
    config.strategy = g.strategy;
    config.beta = g.beta;
    config.seed = derive_seed(pseed, {hash_tag(to_string(g.strategy)), r});
    SimResult result;
    try {
      result = run_simulation(config);
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string(e.what()) + " [strategy=" + std::string(to_string(g.strategy)) +
                               " n=" + std::to_string(g.n) + " p=" + std::to_string(g.p) +
                               " scenario=" + scenario.name + " replication=" + std::to_string(r) + "]");
    }
    outputs[idx].normalized = result.normalized_comm;
    if (g.beta) outputs[idx].prediction = objective(*g.beta, AnalysisParams::from_platform(config.platform, g.n, kernel));
  });

  SweepTable table;
  table.reserve(points.size());
  for (std::size_t gi = 0; gi < points.size(); ++gi) {
    const GridPoint& g = points[gi];
    std::vector<double> runs(replications);
    double prediction = 0.0;
    for (std::size_t r = 0; r < replications; ++r) {
      runs[r] = outputs[gi * replications + r].normalized;
      prediction += outputs[gi * replications + r].prediction;
    }
    SweepRow row;
    row.kernel = kernel;
    row.n = g.n;
    row.p = g.p;
    row.strategy = g.strategy;
    row.scenario = scenarios[g.scenario].name;
    row.beta = g.beta;
    row.stats = ReplicationStats::from_runs(std::move(runs));
    if (g.beta) row.analysis_pred = prediction / static_cast<double>(replications);
    table.push_back(std::move(row));
  }
  return table;
}

}  // namespace

// Scenario

Scenario Scenario::uniform(double lo, double hi) {
  if (!(lo > 0.0 && lo <= hi)) throw std::invalid_argument("uniform scenario needs 0 < lo <= hi");
  Scenario s;
  s.kind = Kind::uniform;
  s.lo = lo;
  s.hi = hi;
  s.name = "uniform:" + format_g6(lo) + ":" + format_g6(hi);
  return s;
}

Scenario Scenario::discrete(std::vector<double> speeds) {
  if (speeds.empty()) throw std::invalid_argument("discrete scenario needs at least one speed");
  for (double v : speeds)
    if (!(v > 0.0)) throw std::invalid_argument("discrete scenario speeds must be positive");
  Scenario s;
  s.kind = Kind::discrete;
  s.name = "set:" + join_reals(speeds, ':');
  s.speed_set = std::move(speeds);
  return s;
}

Scenario Scenario::dynamic(double lo, double hi, double jitter) {
  Scenario s = uniform(lo, hi);
  DriftPolicy::jitter(jitter);  // validates the range
  s.kind = Kind::dynamic;
  s.jitter = jitter;
  s.name = "dyn:" + format_g6(lo) + ":" + format_g6(hi) + ":" + format_g6(jitter);
  return s;
}

Scenario Scenario::parse(std::string_view text) {
  const std::string t = trim(text);
  auto named = [&](Scenario s) {
    s.name = t;
    return s;
  };
  if (t == "unif.1") return named(uniform(80, 120));
  if (t == "unif.2") return named(uniform(50, 150));
  if (t == "set.3") return named(discrete({80, 100, 150}));
  if (t == "set.5") return named(discrete({40, 80, 100, 150, 200}));
  if (t == "dyn.5") return named(dynamic(80, 120, 0.05));
  if (t == "dyn.20") return named(dynamic(80, 120, 0.20));

  const auto parts = split(t, ':');
  if (parts[0] == "uniform" && parts.size() == 3) return uniform(to_double(parts[1]), to_double(parts[2]));
  if (parts[0] == "dyn" && parts.size() == 4)
    return dynamic(to_double(parts[1]), to_double(parts[2]), to_double(parts[3]));
  if (parts[0] == "set" && parts.size() >= 2) {
    std::vector<double> speeds;
    for (std::size_t i = 1; i < parts.size(); ++i) speeds.push_back(to_double(parts[i]));
    return discrete(std::move(speeds));
  }
  throw std::invalid_argument("unknown scenario: '" + t + "'");
}

Platform Scenario::make_platform(std::size_t p, std::uint64_t seed) const {
  switch (kind) {
    case Kind::uniform:
      return make_uniform_platform(p, lo, hi, seed);
    case Kind::discrete:
      return make_discrete_platform(p, speed_set, seed);
    case Kind::dynamic:
      return make_uniform_platform(p, lo, hi, seed).with_drift(DriftPolicy::jitter(jitter));
  }
  throw std::logic_error("unhandled scenario kind");
}

// BetaSpec

BetaSpec BetaSpec::parse(std::string_view text) {
  const std::string t = trim(text);
  BetaSpec b;
  if (t == "auto") return b;
  if (t.rfind("sweep:", 0) == 0) {
    const auto parts = split(t, ':');
    if (parts.size() != 4) throw std::invalid_argument("beta sweep needs sweep:lo:hi:step");
    b.kind = Kind::sweep;
    b.lo = to_double(parts[1]);
    b.hi = to_double(parts[2]);
    b.step = to_double(parts[3]);
    if (!(b.lo > 0.0 && b.lo <= b.hi && b.step > 0.0)) throw std::invalid_argument("invalid beta sweep range");
    return b;
  }
  b.kind = Kind::fixed;
  b.value = to_double(t);
  if (!(b.value > 0.0)) throw std::invalid_argument("beta must be positive");
  return b;
}

std::vector<double> BetaSpec::sweep_values() const {
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

// ExperimentSpec

void ExperimentSpec::validate() const {
  if (ns.empty() || ps.empty() || strategies.empty() || scenarios.empty())
    throw std::invalid_argument("experiment needs nonempty n, p, strategy and scenario lists");
  if (replications < 1) throw std::invalid_argument("experiment needs at least one replication");
  for (auto n : ns)
    if (n == 0) throw std::invalid_argument("n must be at least 1");
  for (auto p : ps)
    if (p == 0) throw std::invalid_argument("p must be at least 1");
  for (auto s : strategies)
    if (kernel_of(s) != kernel)
      throw std::invalid_argument("strategy " + std::string(to_string(s)) + " does not match the kernel");
}

ReplicationStats ReplicationStats::from_runs(std::vector<double> runs) {
  ReplicationStats s;
  s.count = runs.size();
  if (runs.empty()) return s;
  s.mean = std::accumulate(runs.begin(), runs.end(), 0.0) / static_cast<double>(runs.size());
  if (runs.size() > 1) {
    double ss = 0.0;
    for (double v : runs) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(runs.size() - 1));
  }
  s.per_run = std::move(runs);
  return s;
}

std::uint64_t platform_seed(std::uint64_t base_seed, KernelKind kernel, Index n, std::size_t p,
                            const Scenario& scenario, std::size_t replication) {
  return derive_seed(base_seed, {hash_tag(to_string(kernel)), n, p, hash_tag(scenario.name), replication});
}

SweepTable run_sweep(const ExperimentSpec& spec, unsigned jobs) {
  spec.validate();
  const bool sweep = spec.beta.kind == BetaSpec::Kind::sweep;
  std::vector<GridPoint> points;
  for (Index n : spec.ns) {
    for (std::size_t p : spec.ps) {
      for (std::size_t sc = 0; sc < spec.scenarios.size(); ++sc) {
        for (StrategyId st : spec.strategies) {
          GridPoint g{n, p, sc, st, std::nullopt, sweep};
          if (!is_two_phase(st)) {
            points.push_back(g);
            continue;
          }
          switch (spec.beta.kind) {
            case BetaSpec::Kind::automatic:
              g.beta = beta_homogeneous(p, n, spec.kernel);
              points.push_back(g);
              break;
            case BetaSpec::Kind::fixed:
              g.beta = spec.beta.value;
              points.push_back(g);
              break;
            case BetaSpec::Kind::sweep:
              for (double b : spec.beta.sweep_values()) {
                g.beta = b;
                points.push_back(g);
              }
              break;
          }
        }
      }
    }
  }
  return run_grid(spec.kernel, points, spec.scenarios, spec.replications, spec.base_seed, jobs);
}

SweepTable beta_sweep(KernelKind kernel, std::size_t p, Index n, const Scenario& scenario,
                      const std::vector<double>& betas, std::size_t replications, std::uint64_t seed,
                      unsigned jobs) {
  if (betas.empty()) throw std::invalid_argument("beta sweep needs at least one beta");
  if (replications < 1) throw std::invalid_argument("beta sweep needs at least one replication");
  std::vector<GridPoint> points;
  for (double b : betas) points.push_back({n, p, 0, two_phase_for(kernel), b, true});
  return run_grid(kernel, points, {scenario}, replications, seed, jobs);
}

// CSV

void emit_csv(const SweepTable& table, std::ostream& out) {
  out << "kernel,n,p,strategy,scenario,beta,mean_norm_comm,stddev,replications,analysis_pred\n";
  for (const auto& r : table) {
    out << to_string(r.kernel) << ',' << r.n << ',' << r.p << ',' << to_string(r.strategy) << ',' << r.scenario
        << ',' << (r.beta ? format_g6(*r.beta) : "") << ',' << format_g6(r.stats.mean) << ','
        << format_g6(r.stats.stddev) << ',' << r.stats.count << ','
        << (r.analysis_pred ? format_g6(*r.analysis_pred) : "") << '\n';
  }
}

void emit_csv(const SweepTable& table, const std::string& path) {
  if (table.empty()) throw std::invalid_argument("refusing to write an empty table");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  emit_csv(table, out);
  if (!out) throw std::runtime_error("error while writing " + path);
}

SweepTable parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty CSV");
  if (trim(line) != "kernel,n,p,strategy,scenario,beta,mean_norm_comm,stddev,replications,analysis_pred")
    throw std::invalid_argument("unexpected CSV header");
  SweepTable table;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto f = split(line, ',');
    if (f.size() != 10) throw std::invalid_argument("CSV row needs 10 fields: " + line);
    SweepRow r;
    r.kernel = parse_kernel(f[0]);
    r.n = static_cast<Index>(to_uint(f[1]));
    r.p = to_uint(f[2]);
    r.strategy = parse_strategy(f[3]);
    r.scenario = f[4];
    if (!f[5].empty()) r.beta = to_double(f[5]);
    r.stats.mean = to_double(f[6]);
    r.stats.stddev = to_double(f[7]);
    r.stats.count = to_uint(f[8]);
    if (!f[9].empty()) r.analysis_pred = to_double(f[9]);
    table.push_back(std::move(r));
  }
  return table;
}

// Recipes

std::vector<std::string> recipe_names() {
  return {"fig2", "fig5", "fig6", "fig7", "fig8", "fig9", "fig-mat-40", "fig-mat-100", "fig-mat-beta"};
}

ExperimentSpec recipe(std::string_view name) {
  ExperimentSpec s;
  s.base_seed = 2013;
  s.replications = 10;
  s.scenarios = {Scenario::uniform(10, 100)};
  const std::vector<std::size_t> p_grid{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  const std::vector<StrategyId> outer_all{StrategyId::random_outer, StrategyId::sorted_outer,
                                          StrategyId::dynamic_outer, StrategyId::dynamic_outer_2phases};
  const std::vector<StrategyId> matrix_all{StrategyId::random_matrix, StrategyId::sorted_matrix,
                                           StrategyId::dynamic_matrix, StrategyId::dynamic_matrix_2phases};

  if (name == "fig2") {
    s.ns = {100};
    s.ps = p_grid;
    s.strategies = {StrategyId::random_outer, StrategyId::sorted_outer, StrategyId::dynamic_outer};
  } else if (name == "fig5" || name == "fig6") {
    s.ns = {name == "fig5" ? Index{100} : Index{1000}};
    s.ps = p_grid;
    s.strategies = outer_all;
  } else if (name == "fig7") {
    s.ns = {100};
    s.ps = {20};
    s.strategies = outer_all;
    s.beta = BetaSpec::parse("sweep:0.5:8:0.25");
  } else if (name == "fig8") {
    s.ns = {100};
    s.ps = {20};
    s.strategies = outer_all;
    s.replications = 50;
    s.scenarios.clear();
    for (int h = 0; h <= 90; h += 10) s.scenarios.push_back(Scenario::uniform(100 - h, 100 + h));
  } else if (name == "fig9") {
    s.ns = {100};
    s.ps = {20};
    s.strategies = outer_all;
    s.replications = 50;
    s.scenarios.clear();
    for (const char* sc : {"unif.1", "unif.2", "set.3", "set.5", "dyn.5", "dyn.20"})
      s.scenarios.push_back(Scenario::parse(sc));
  } else if (name == "fig-mat-40" || name == "fig-mat-100") {
    s.kernel = KernelKind::matmul;
    s.ns = {name == "fig-mat-40" ? Index{40} : Index{100}};
    s.ps = p_grid;
    s.strategies = matrix_all;
  } else if (name == "fig-mat-beta") {
    s.kernel = KernelKind::matmul;
    s.ns = {40};
    s.ps = {100};
    s.strategies = matrix_all;
    s.beta = BetaSpec::parse("sweep:0.5:6:0.25");
  } else {
    throw std::invalid_argument("unknown recipe: " + std::string(name));
  }
  return s;
}

std::string recipe_x_column(std::string_view name) {
  if (name == "fig7" || name == "fig-mat-beta") return "beta";
  if (name == "fig8" || name == "fig9") return "scenario";
  return "p";
}

// Spec files

ExperimentSpec parse_spec(std::istream& in) {
  ExperimentSpec s;
  bool have_kernel = false;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument("spec line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    try {
      if (key == "kernel") {
        s.kernel = parse_kernel(value);
        have_kernel = true;
      } else if (key == "n") {
        s.ns.clear();
        for (const auto& v : split(value, ',')) s.ns.push_back(static_cast<Index>(to_uint(v)));
      } else if (key == "p") {
        s.ps.clear();
        for (const auto& v : split(value, ',')) s.ps.push_back(to_uint(v));
      } else if (key == "strategies") {
        s.strategies.clear();
        for (const auto& v : split(value, ',')) s.strategies.push_back(parse_strategy(trim(v)));
      } else if (key == "scenarios" || key == "scenario") {
        s.scenarios.clear();
        for (const auto& v : split(value, ',')) s.scenarios.push_back(Scenario::parse(v));
      } else if (key == "beta") {
        s.beta = BetaSpec::parse(value);
      } else if (key == "replications") {
        s.replications = to_uint(value);
      } else if (key == "seed") {
        s.base_seed = to_uint(value);
      } else {
        fail("unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument& e) {
      if (std::string_view(e.what()).rfind("spec line", 0) == 0) throw;
      fail(e.what());
    }
  }
  if (!have_kernel) throw std::invalid_argument("spec is missing 'kernel'");
  if (s.scenarios.empty()) s.scenarios = {Scenario::uniform(10, 100)};
  s.validate();
  return s;
}

ExperimentSpec parse_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open spec file: " + path);
  return parse_spec(in);
}

}  // namespace dynsched
