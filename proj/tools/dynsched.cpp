// Command-line front end: simulate, analyze, optimize-beta, experiment.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dynsched/analysis.hpp"
#include "dynsched/engine.hpp"
#include "dynsched/experiments.hpp"

namespace {

using namespace dynsched;

constexpr int kUsageError = 1;
constexpr int kRuntimeFault = 2;

struct PlatformOptions {
  std::size_t p = 0;
  std::string speeds_file;
  std::vector<double> uniform;
  std::vector<double> set;
  double jitter = 0.0;
  std::uint64_t seed = 1;

  void add_to(CLI::App& app, bool with_jitter) {
    app.add_option("--p", p, "Number of workers");
    auto* file = app.add_option("--speeds-file", speeds_file, "File with one speed per line");
    auto* uni = app.add_option("--uniform", uniform, "Uniform speeds lo,hi")->delimiter(',')->expected(2);
    auto* st = app.add_option("--set", set, "Speeds drawn from a set a,b,c")->delimiter(',');
    file->excludes(uni)->excludes(st);
    uni->excludes(st);
    if (with_jitter) app.add_option("--jitter", jitter, "Per-task speed jitter in [0,1)");
    app.add_option("--seed", seed, "Random seed");
  }

  // Homogeneous unless a speed source is given.
  Platform build() const {
    const auto pseed = derive_seed(seed, {hash_tag("platform")});
    std::optional<Platform> platform;
    if (!speeds_file.empty()) {
      platform = read_speeds_file(speeds_file);
      if (p != 0 && p != platform->size())
        throw std::invalid_argument("--p disagrees with the number of speeds in --speeds-file");
    } else {
      if (p == 0) throw std::invalid_argument("--p is required unless --speeds-file is given");
      if (!uniform.empty()) {
        platform = make_uniform_platform(p, uniform[0], uniform[1], pseed);
      } else if (!set.empty()) {
        platform = make_discrete_platform(p, set, pseed);
      } else {
        platform = make_homogeneous_platform(p, 1.0);
      }
    }
    if (jitter != 0.0) platform = platform->with_drift(DriftPolicy::jitter(jitter));
    return *platform;
  }
};

VolumeModel parse_model(const std::string& s) {
  if (s == "first-order") return VolumeModel::first_order;
  if (s == "exact") return VolumeModel::exact;
  throw std::invalid_argument("unknown model: " + s);
}

std::string g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator and analytical model for data-aware dynamic scheduling of outer product and matrix "
               "multiplication"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run one simulation and print a result line");
  std::string kernel_text = "outer";
  std::uint32_t n = 0;
  std::string strategy_text;
  std::string beta_text = "auto";
  std::string trace_path;
  PlatformOptions sim_platform;
  sim->add_option("--kernel", kernel_text, "outer | matmul")->required();
  sim->add_option("--n", n, "Blocks per dimension")->required();
  sim->add_option("--strategy", strategy_text, "Strategy id, e.g. dynamic-outer-2p")->required();
  sim->add_option("--beta", beta_text, "Phase-switch parameter or 'auto'");
  sim->add_option("--trace", trace_path, "Write the knowledge-growth trace CSV here");
  sim_platform.add_to(*sim, true);

  // analyze
  auto* ana = app.add_subcommand("analyze", "Evaluate the analytical model at a given beta");
  std::string ana_kernel = "outer";
  std::uint32_t ana_n = 0;
  double ana_beta = 0.0;
  std::string ana_model = "first-order";
  PlatformOptions ana_platform;
  ana->add_option("--kernel", ana_kernel, "outer | matmul")->required();
  ana->add_option("--n", ana_n, "Blocks per dimension")->required();
  ana->add_option("--beta", ana_beta, "Phase-switch parameter")->required();
  ana->add_option("--model", ana_model, "first-order | exact");
  ana_platform.add_to(*ana, false);

  // optimize-beta
  auto* opt = app.add_subcommand("optimize-beta", "Find the beta minimizing predicted communication");
  std::string opt_kernel = "outer";
  std::uint32_t opt_n = 0;
  std::string opt_model = "first-order";
  PlatformOptions opt_platform;
  opt->add_option("--kernel", opt_kernel, "outer | matmul")->required();
  opt->add_option("--n", opt_n, "Blocks per dimension")->required();
  opt->add_option("--model", opt_model, "first-order | exact");
  opt_platform.add_to(*opt, false);

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run a sweep and write CSV (and SVG)");
  std::string recipe_name;
  std::string spec_path;
  std::string out_dir;
  unsigned jobs = 1;
  bool plot = false;
  auto* rec_opt = exp->add_option("--recipe", recipe_name, "Named figure recipe");
  auto* spec_opt = exp->add_option("--spec", spec_path, "Spec file");
  rec_opt->excludes(spec_opt);
  exp->add_option("--out", out_dir, "Output directory")->required();
  exp->add_option("--jobs", jobs, "Concurrent simulations");
  exp->add_flag("--plot", plot, "Also write an SVG plot");
  exp->add_flag_callback("--list", [] {
    for (const auto& r : recipe_names()) std::cout << r << '\n';
    std::exit(0);
  }, "List recipe names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*sim) {
      SimConfig config;
      config.problem = {parse_kernel(kernel_text), n};
      config.strategy = parse_strategy(strategy_text);
      config.platform = sim_platform.build();
      config.seed = sim_platform.seed;
      if (beta_text != "auto") config.beta = std::stod(beta_text);
      if (!trace_path.empty()) config.trace = TraceMode::knowledge_growth;
      const SimResult r = run_simulation(config);
      std::cout << "strategy=" << to_string(config.strategy) << " kernel=" << to_string(config.problem.kind)
                << " n=" << n << " p=" << config.platform.size() << " seed=" << config.seed
                << " total_comm=" << r.total_comm_blocks << " lower_bound=" << g6(r.lower_bound)
                << " normalized_comm=" << g6(r.normalized_comm) << " makespan=" << g6(r.makespan);
      if (r.beta) std::cout << " beta=" << g6(*r.beta) << " threshold=" << r.threshold;
      std::cout << '\n';
      if (!trace_path.empty()) {
        std::ofstream out(trace_path);
        if (!out) throw std::runtime_error("cannot write " + trace_path);
        write_trace_csv(out, r);
      }
    } else if (*ana) {
      const auto kernel = parse_kernel(ana_kernel);
      const auto params = AnalysisParams::from_platform(ana_platform.build(), ana_n, kernel);
      const auto model = parse_model(ana_model);
      const auto v = phase_volumes(ana_beta, params, model);
      std::cout << "objective=" << g6(objective(ana_beta, params, model)) << " phase1_volume=" << g6(v.phase1)
                << " phase2_volume=" << g6(v.phase2) << " lower_bound=" << g6(lower_bound(params))
                << " threshold=" << phase_switch_threshold(ana_beta, total_tasks({kernel, ana_n})) << '\n';
    } else if (*opt) {
      const auto kernel = parse_kernel(opt_kernel);
      const auto params = AnalysisParams::from_platform(opt_platform.build(), opt_n, kernel);
      const auto r = optimize_beta(params, parse_model(opt_model));
      if (r.bracket_shrunk) std::cerr << "warning: beta search limited to [0.1, " << g6(r.upper_bracket) << "]\n";
      std::cout << "beta=" << g6(r.beta) << " objective=" << g6(r.objective_value)
                << " phase1_fraction=" << g6(r.phase1_fraction) << '\n';
    } else if (*exp) {
      if (recipe_name.empty() && spec_path.empty()) throw std::invalid_argument("give --recipe or --spec");
      const ExperimentSpec spec = recipe_name.empty() ? parse_spec_file(spec_path) : recipe(recipe_name);
      const std::string stem = recipe_name.empty() ? std::filesystem::path(spec_path).stem().string() : recipe_name;
      std::filesystem::create_directories(out_dir);
      const auto table = run_sweep(spec, jobs);
      const auto csv = (std::filesystem::path(out_dir) / (stem + ".csv")).string();
      emit_csv(table, csv);
      std::cout << "wrote " << csv << " (" << table.size() << " rows)\n";
      if (plot) {
        const auto svg = (std::filesystem::path(out_dir) / (stem + ".svg")).string();
        std::string x = recipe_name.empty() ? (spec.beta.kind == BetaSpec::Kind::sweep ? "beta" : "p")
                                            : recipe_x_column(recipe_name);
        emit_svg_plot(table, x, "strategy", svg);
        std::cout << "wrote " << svg << '\n';
      }
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "fault: " << e.what() << '\n';
    return kRuntimeFault;
  }
  return 0;
}
