#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dynsched/experiments.hpp"

using namespace dynsched;

namespace {

ExperimentSpec small_spec() {
  ExperimentSpec s;
  s.kernel = KernelKind::outer;
  s.ns = {30};
  s.ps = {4, 6};
  s.strategies = {StrategyId::random_outer, StrategyId::dynamic_outer_2phases};
  s.scenarios = {Scenario::uniform(10, 100)};
  s.replications = 3;
  s.base_seed = 11;
  return s;
}

std::string csv_of(const SweepTable& t) {
  std::ostringstream out;
  emit_csv(t, out);
  return out.str();
}

std::size_t count(const std::string& s, const std::string& what) {
  std::size_t c = 0;
  for (auto pos = s.find(what); pos != std::string::npos; pos = s.find(what, pos + 1)) ++c;
  return c;
}

}  // namespace

TEST_CASE("scenario parsing") {
  CHECK(Scenario::parse("unif.1").lo == 80);
  CHECK(Scenario::parse("unif.2").hi == 150);
  CHECK(Scenario::parse("set.5").speed_set == std::vector<double>{40, 80, 100, 150, 200});
  CHECK(Scenario::parse("dyn.20").jitter == 0.2);
  CHECK(Scenario::parse("dyn.20").name == "dyn.20");
  CHECK(Scenario::parse("uniform:10:100").name == "uniform:10:100");
  CHECK(Scenario::parse("set:1:2:3").speed_set == std::vector<double>{1, 2, 3});
  CHECK(Scenario::parse("dyn:80:120:0.05").make_platform(5, 1).drift().active());
  CHECK_THROWS_AS(Scenario::parse("gaussian:1:2"), std::invalid_argument);
  CHECK_THROWS_AS(Scenario::parse("uniform:0:2"), std::invalid_argument);
}

TEST_CASE("beta spec parsing") {
  CHECK(BetaSpec::parse("auto").kind == BetaSpec::Kind::automatic);
  CHECK(BetaSpec::parse("4.17").value == 4.17);
  const auto s = BetaSpec::parse("sweep:1:2:0.25");
  CHECK(s.sweep_values() == std::vector<double>{1, 1.25, 1.5, 1.75, 2});
  CHECK_THROWS_AS(BetaSpec::parse("sweep:2:1:0.1"), std::invalid_argument);
  CHECK_THROWS_AS(BetaSpec::parse("-1"), std::invalid_argument);
}

TEST_CASE("one grid point, one replication") {
  auto s = small_spec();
  s.ps = {4};
  s.strategies = {StrategyId::dynamic_outer};
  s.replications = 1;
  const auto t = run_sweep(s);
  REQUIRE(t.size() == 1);
  CHECK(t[0].stats.stddev == 0.0);
  CHECK(t[0].stats.count == 1);
  CHECK_FALSE(t[0].analysis_pred.has_value());
  CHECK_FALSE(t[0].beta.has_value());
}

TEST_CASE("sweep rows: grid order, predictions only for two-phase") {
  const auto t = run_sweep(small_spec());
  REQUIRE(t.size() == 4);
  CHECK(t[0].p == 4);
  CHECK(t[0].strategy == StrategyId::random_outer);
  CHECK(t[1].strategy == StrategyId::dynamic_outer_2phases);
  CHECK(t[2].p == 6);
  for (const auto& r : t) {
    CHECK(r.stats.count == 3);
    CHECK(r.stats.per_run.size() == 3);
    CHECK(r.stats.mean > 0.0);
    CHECK(r.analysis_pred.has_value() == is_two_phase(r.strategy));
    CHECK(r.beta.has_value() == is_two_phase(r.strategy));
  }
}

TEST_CASE("sweep results do not depend on concurrency or on grid order") {
  auto spec = small_spec();
  const auto serial = run_sweep(spec, 1);
  CHECK(csv_of(run_sweep(spec, 4)) == csv_of(serial));

  auto permuted = spec;
  std::reverse(permuted.ps.begin(), permuted.ps.end());
  std::reverse(permuted.strategies.begin(), permuted.strategies.end());
  const auto other = run_sweep(permuted, 2);
  for (const auto& row : serial) {
    const auto it = std::find_if(other.begin(), other.end(),
                                 [&](const SweepRow& r) { return r.p == row.p && r.strategy == row.strategy; });
    REQUIRE(it != other.end());
    CHECK(it->stats.per_run == row.stats.per_run);
  }
}

TEST_CASE("platform seeds differ per replication and ignore the strategy") {
  const auto sc = Scenario::uniform(10, 100);
  CHECK(platform_seed(1, KernelKind::outer, 100, 20, sc, 0) != platform_seed(1, KernelKind::outer, 100, 20, sc, 1));
  CHECK(platform_seed(1, KernelKind::outer, 100, 20, sc, 0) != platform_seed(1, KernelKind::outer, 100, 21, sc, 0));
  CHECK(platform_seed(1, KernelKind::outer, 100, 20, sc, 0) == platform_seed(1, KernelKind::outer, 100, 20, sc, 0));
}

TEST_CASE("beta sweep shares one platform and reports predictions") {
  const auto t = beta_sweep(KernelKind::outer, 5, 30, Scenario::uniform(10, 100), {1.0, 3.0, 40.0}, 2, 9);
  REQUIRE(t.size() == 3);
  for (const auto& r : t) {
    CHECK(r.strategy == StrategyId::dynamic_outer_2phases);
    CHECK(r.analysis_pred.has_value());
  }
  CHECK(*t[0].beta == 1.0);
  CHECK_THROWS_AS(beta_sweep(KernelKind::outer, 5, 30, Scenario::uniform(10, 100), {}, 2, 9), std::invalid_argument);
}

TEST_CASE("csv layout") {
  SweepTable t(1);
  t[0].kernel = KernelKind::outer;
  t[0].n = 100;
  t[0].p = 20;
  t[0].strategy = StrategyId::random_outer;
  t[0].scenario = "uniform:10:100";
  t[0].stats = ReplicationStats::from_runs({1.0, 2.0, 3.0});
  const std::string csv = csv_of(t);
  CHECK(csv ==
        "kernel,n,p,strategy,scenario,beta,mean_norm_comm,stddev,replications,analysis_pred\n"
        "outer,100,20,random-outer,uniform:10:100,,2,1,3,\n");

  t[0].beta = 4.170542;
  t[0].analysis_pred = 2.1234567;
  CHECK(csv_of(t).find(",4.17054,2,1,3,2.12346\n") != std::string::npos);
}

TEST_CASE("csv round trip") {
  const auto t = run_sweep(small_spec());
  const std::string first = csv_of(t);
  std::istringstream in(first);
  const auto parsed = parse_csv(in);
  REQUIRE(parsed.size() == t.size());
  CHECK(csv_of(parsed) == first);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(parsed[i].strategy == t[i].strategy);
    CHECK(parsed[i].scenario == t[i].scenario);
    CHECK(parsed[i].stats.mean == doctest::Approx(t[i].stats.mean).epsilon(1e-5));
  }
  std::istringstream bad("kernel,n\n");
  CHECK_THROWS_AS(parse_csv(bad), std::invalid_argument);
}

TEST_CASE("csv files are byte-identical across reruns") {
  const auto dir = std::filesystem::temp_directory_path() / "dynsched_test_csv";
  std::filesystem::create_directories(dir);
  const auto a = (dir / "a.csv").string();
  const auto b = (dir / "b.csv").string();
  emit_csv(run_sweep(small_spec()), a);
  emit_csv(run_sweep(small_spec(), 3), b);
  std::ifstream fa(a), fb(b);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(count(sa.str(), "\n") == 5);
  CHECK_THROWS(emit_csv(SweepTable{}, (dir / "empty.csv").string()));
  CHECK_THROWS(emit_csv(run_sweep(small_spec()), (dir / "missing" / "x.csv").string()));
}

TEST_CASE("svg plot") {
  SUBCASE("single point: one marker") {
    auto s = small_spec();
    s.ps = {4};
    s.strategies = {StrategyId::dynamic_outer};
    s.replications = 1;
    std::ostringstream out;
    emit_svg_plot(run_sweep(s), "p", "strategy", out);
    const auto svg = out.str();
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(count(svg, "<polyline") == 1);
    CHECK(count(svg, "<circle") == 1);
  }
  SUBCASE("four strategies plus analysis: five polylines") {
    auto s = small_spec();
    s.strategies = {StrategyId::random_outer, StrategyId::sorted_outer, StrategyId::dynamic_outer,
                    StrategyId::dynamic_outer_2phases};
    std::ostringstream a, b;
    const auto t = run_sweep(s);
    emit_svg_plot(t, "p", "strategy", a);
    emit_svg_plot(t, "p", "strategy", b);
    CHECK(count(a.str(), "<polyline") == 5);
    CHECK(a.str().find(">analysis</text>") != std::string::npos);
    CHECK(a.str() == b.str());
  }
  SUBCASE("categorical x axis") {
    auto s = small_spec();
    s.ps = {4};
    s.scenarios = {Scenario::parse("unif.1"), Scenario::parse("set.3")};
    std::ostringstream out;
    emit_svg_plot(run_sweep(s), "scenario", "strategy", out);
    CHECK(out.str().find(">set.3</text>") != std::string::npos);
  }
  SUBCASE("unknown columns are rejected") {
    const auto t = run_sweep(small_spec());
    std::ostringstream out;
    CHECK_THROWS_AS(emit_svg_plot(t, "speed", "strategy", out), std::invalid_argument);
    CHECK_THROWS_AS(emit_svg_plot(t, "p", "colour", out), std::invalid_argument);
  }
}

TEST_CASE("svg axes cover the data with a 5% margin") {
  SweepTable t(2);
  for (int i = 0; i < 2; ++i) {
    t[i].p = i == 0 ? 10 : 110;
    t[i].strategy = StrategyId::random_outer;
    t[i].stats = ReplicationStats::from_runs({i == 0 ? 2.0 : 4.0});
  }
  std::ostringstream out;
  emit_svg_plot(t, "p", "strategy", out);
  // Plot area spans x in [70, 610] and y in [30, 440]; data sits 5% inside.
  const std::string svg = out.str();
  CHECK(svg.find("points=\"94.55,421.36 585.45,48.64\"") != std::string::npos);
}

TEST_CASE("recipes") {
  for (const auto& name : recipe_names()) {
    const auto spec = recipe(name);
    CHECK_NOTHROW(spec.validate());
  }
  CHECK(recipe("fig5").strategies.size() == 4);
  CHECK(recipe("fig9").scenarios.size() == 6);
  CHECK(recipe("fig-mat-40").kernel == KernelKind::matmul);
  CHECK(recipe("fig7").beta.kind == BetaSpec::Kind::sweep);
  CHECK(recipe_x_column("fig7") == "beta");
  CHECK_THROWS_AS(recipe("fig99"), std::invalid_argument);
}

TEST_CASE("spec file parsing") {
  std::istringstream in(
      "# comment\n"
      "kernel = matmul\n"
      "n = 10, 12\n"
      "p = 4\n"
      "strategies = random-matrix, dynamic-matrix-2p\n"
      "scenarios = unif.1, set:80:100\n"
      "beta = sweep:1:3:1\n"
      "replications = 2\n"
      "seed = 77\n");
  const auto s = parse_spec(in);
  CHECK(s.kernel == KernelKind::matmul);
  CHECK(s.ns == std::vector<Index>{10, 12});
  CHECK(s.ps == std::vector<std::size_t>{4});
  CHECK(s.strategies.size() == 2);
  CHECK(s.scenarios.size() == 2);
  CHECK(s.beta.sweep_values().size() == 3);
  CHECK(s.replications == 2);
  CHECK(s.base_seed == 77);

  std::istringstream mismatch("kernel = outer\nn = 10\np = 2\nstrategies = random-matrix\n");
  CHECK_THROWS_AS(parse_spec(mismatch), std::invalid_argument);
  std::istringstream unknown("kernel = outer\ncolour = red\n");
  CHECK_THROWS_AS(parse_spec(unknown), std::invalid_argument);
  std::istringstream zero_reps("kernel = outer\nn = 10\np = 2\nstrategies = random-outer\nreplications = 0\n");
  CHECK_THROWS_AS(parse_spec(zero_reps), std::invalid_argument);
}
