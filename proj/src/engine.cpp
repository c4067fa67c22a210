#include "dynsched/engine.hpp"

#include <algorithm>
#include <functional>
#include <iomanip>
#include <ostream>
#include <queue>
#include <string>
#include <utility>

#include "dynsched/analysis.hpp"

namespace dynsched {
namespace {

using Event = std::pair<double, Index>;  // (busy_until, worker)

std::string describe(const SimConfig& c) {
  return std::string(to_string(c.strategy)) + " kernel=" + std::string(to_string(c.problem.kind)) +
         " n=" + std::to_string(c.problem.n) + " p=" + std::to_string(c.platform.size()) +
         " seed=" + std::to_string(c.seed);
}

}  // namespace

SimResult run_simulation(const SimConfig& config) {
  const Problem& problem = config.problem;
  if (problem.n == 0) throw std::invalid_argument("n must be at least 1");
  if (kernel_of(config.strategy) != problem.kind)
    throw std::invalid_argument("strategy " + std::string(to_string(config.strategy)) + " does not match kernel " +
                                std::string(to_string(problem.kind)));

  const std::size_t p = config.platform.size();
  TaskLedger ledger(problem);
  std::vector<WorkerKnowledge> knowledge(p, WorkerKnowledge(problem));
  std::vector<double> speeds(config.platform.speeds().begin(), config.platform.speeds().end());

  SimResult result;
  result.per_worker.resize(p);
  result.lower_bound = lower_bound(problem.kind, config.platform.relative_speeds(), problem.n);

  if (is_two_phase(config.strategy)) {
    const double beta = config.beta ? *config.beta : beta_homogeneous(p, problem.n, problem.kind);
    result.beta = beta;
    result.threshold = phase_switch_threshold(beta, ledger.total());
  }

  const RandomStream root(config.seed);
  RandomStream strategy_rng = root.split("strategy");
  RandomStream drift_rng = root.split("drift");

  std::priority_queue<Event, std::vector<Event>, std::greater<>> idle;
  for (Index w = 0; w < p; ++w) idle.emplace(0.0, w);
  std::vector<std::uint64_t> empty_streak(p, 0);
  const double n = problem.n;
  const double total = static_cast<double>(ledger.total());
  double last_event = 0.0;

  while (ledger.remaining() > 0) {
    const auto [now, w] = idle.top();
    idle.pop();
    if (now < last_event) throw InvariantViolation("simulation clock went backwards");
    last_event = now;

    const MasterView view{problem, ledger, knowledge};
    Allocation alloc = allocate(config.strategy, view, w, strategy_rng, result.threshold);
    ++result.allocations;

    auto& known = knowledge[w];
    if (config.trace == TraceMode::knowledge_growth && alloc.data_aware) {
      // Every task inside the known square/cube is already processed, so the
      // remaining tasks all lie outside it.
      double inside = static_cast<double>(known.rows().size()) * static_cast<double>(known.cols().size());
      if (problem.kind == KernelKind::matmul) inside *= static_cast<double>(known.depth().size());
      const double outside = total - inside;
      const double fraction = outside > 0.0 ? static_cast<double>(ledger.remaining()) / outside : 0.0;
      result.trace.push_back({now, w, static_cast<double>(known.rows().size()) / n, fraction});
    }

    auto& outcome = result.per_worker[w];
    for (const auto& block : alloc.blocks) {
      if (!known.receive(block)) throw InvariantViolation("duplicate transfer in " + describe(config));
      ++outcome.blocks_received;
    }
    for (const auto& task : alloc.batch) {
      if (!known.can_execute(task))
        throw InvariantViolation("task allocated without its input blocks in " + describe(config));
      ledger.mark_processed(task);
    }

    if (alloc.batch.empty()) {
      if (++empty_streak[w] >= kMaxConsecutiveEmptyBatches)
        throw InvariantViolation("livelock: worker " + std::to_string(w) + " received " +
                                 std::to_string(kMaxConsecutiveEmptyBatches) + " empty batches in " +
                                 describe(config));
      idle.emplace(now, w);
      continue;
    }
    empty_streak[w] = 0;
    if (alloc.data_aware) result.data_aware_tasks += alloc.batch.size();

    double clock = now;
    for (std::size_t t = 0; t < alloc.batch.size(); ++t) {
      clock += 1.0 / speeds[w];
      apply_drift_in_place(speeds, config.platform.drift(), w, drift_rng);
    }
    outcome.tasks_done += alloc.batch.size();
    idle.emplace(clock, w);
  }

  while (!idle.empty()) {
    const auto [t, w] = idle.top();
    idle.pop();
    result.per_worker[w].finish_time = t;
    result.makespan = std::max(result.makespan, t);
  }
  for (const auto& o : result.per_worker) result.total_comm_blocks += o.blocks_received;
  result.normalized_comm = static_cast<double>(result.total_comm_blocks) / result.lower_bound;
  return result;
}

std::vector<GrowthPoint> sample_knowledge_growth(const SimResult& result, Index worker) {
  std::vector<GrowthPoint> out;
  for (const auto& s : result.trace)
    if (s.worker == worker) out.push_back({s.x, s.unprocessed_fraction});
  return out;
}

void write_trace_csv(std::ostream& out, const SimResult& result) {
  out << "event_time,worker,x,unprocessed_fraction\n";
  out << std::setprecision(10);
  for (const auto& s : result.trace)
    out << s.event_time << ',' << s.worker << ',' << s.x << ',' << s.unprocessed_fraction << '\n';
}

}  // namespace dynsched
