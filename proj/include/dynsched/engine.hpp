#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "dynsched/kernel.hpp"
#include "dynsched/platform.hpp"
#include "dynsched/strategies.hpp"

namespace dynsched {

enum class TraceMode { off, knowledge_growth };

struct SimConfig {
  Problem problem;
  Platform platform{std::vector<double>{1.0}};
  StrategyId strategy = StrategyId::dynamic_outer;
  // Two-phase strategies only; when absent, the homogeneous estimate is used.
  std::optional<double> beta;
  std::uint64_t seed = 0;
  TraceMode trace = TraceMode::off;
};

/// One data-aware allocation as seen by the receiving worker, just before it.
struct TraceSample {
  double event_time = 0.0;
  Index worker = 0;
  double x = 0.0;                     // |I| / n
  double unprocessed_fraction = 1.0;  // unprocessed share outside the known square/cube
};

struct WorkerOutcome {
  std::uint64_t blocks_received = 0;
  std::uint64_t tasks_done = 0;
  double finish_time = 0.0;
};

struct SimResult {
  std::vector<WorkerOutcome> per_worker;
  std::uint64_t total_comm_blocks = 0;
  double makespan = 0.0;
  double lower_bound = 0.0;
  double normalized_comm = 0.0;  // total_comm_blocks / lower_bound
  std::optional<double> beta;    // threshold parameter actually used
  std::uint64_t threshold = 0;   // remaining-task count that triggers phase 2
  std::uint64_t data_aware_tasks = 0;
  std::uint64_t allocations = 0;
  std::vector<TraceSample> trace;
};

/// Consecutive empty batches one worker may receive before the run is declared livelocked.
inline constexpr std::uint64_t kMaxConsecutiveEmptyBatches = 1000;

/// Event-driven master/worker run. The idle worker with the smallest clock
/// (smallest id on ties) requests work; its batch executes at 1/s per task and
/// transfers are overlapped with computation. Throws InvariantViolation on a
/// broken invariant and std::invalid_argument on a bad configuration.
SimResult run_simulation(const SimConfig& config);

struct GrowthPoint {
  double x = 0.0;
  double unprocessed_fraction = 1.0;
};

/// Knowledge-growth samples of one worker; empty when tracing was off.
std::vector<GrowthPoint> sample_knowledge_growth(const SimResult& result, Index worker);

/// CSV with header event_time,worker,x,unprocessed_fraction.
void write_trace_csv(std::ostream& out, const SimResult& result);

}  // namespace dynsched
