#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "dynsched/kernel.hpp"
#include "dynsched/random.hpp"

namespace dynsched {

enum class StrategyId {
  random_outer,
  sorted_outer,
  dynamic_outer,
  dynamic_outer_2phases,
  random_matrix,
  sorted_matrix,
  dynamic_matrix,
  dynamic_matrix_2phases,
};

/// CLI token, e.g. "dynamic-outer-2p".
std::string_view to_string(StrategyId id);
StrategyId parse_strategy(std::string_view text);
KernelKind kernel_of(StrategyId id);
bool is_two_phase(StrategyId id);
std::span<const StrategyId> all_strategies();

/// Blocks a worker holds, plus the index sets the data-aware strategies grow.
///
/// Index sets follow the master's view: for the outer product I and J are the
/// indices of the a- and b-blocks held. For matmul, I and K come from the
/// A-blocks held and J from the B-blocks held.
class WorkerKnowledge {
 public:
  explicit WorkerKnowledge(const Problem& problem);

  bool holds(const BlockId& block) const;
  /// Records a transfer; returns false if the block was already held.
  bool receive(const BlockId& block);

  const IndexSet& rows() const noexcept { return rows_; }
  const IndexSet& cols() const noexcept { return cols_; }
  const IndexSet& depth() const noexcept { return depth_; }

  bool can_execute(const TaskId& task) const;

 private:
  Problem problem_;
  IndexSet rows_;
  IndexSet cols_;
  IndexSet depth_;
  // Matmul only: one flag per n x n block of A, B, C.
  std::vector<std::uint8_t> held_a_, held_b_, held_c_;
};

/// Read-only master state a strategy decides from.
struct MasterView {
  const Problem& problem;
  const TaskLedger& ledger;
  std::span<const WorkerKnowledge> workers;
};

struct Allocation {
  std::vector<BlockId> blocks;  // transfers, only blocks the worker lacks
  std::vector<TaskId> batch;    // tasks to execute, in order
  bool data_aware = false;      // produced by a cross extension
};

Allocation allocate_random(const MasterView& view, std::size_t worker, RandomStream& rng);
Allocation allocate_sorted(const MasterView& view, std::size_t worker, RandomStream& rng);
Allocation allocate_dynamic_outer(const MasterView& view, std::size_t worker, RandomStream& rng);
Allocation allocate_dynamic_matrix(const MasterView& view, std::size_t worker, RandomStream& rng);

/// Data-aware allocation while more than `threshold` tasks remain, random afterwards.
Allocation allocate_two_phase(const MasterView& view, std::size_t worker, RandomStream& rng,
                              std::uint64_t threshold);

/// Dispatches on the strategy; `threshold` is only read by two-phase strategies.
Allocation allocate(StrategyId id, const MasterView& view, std::size_t worker, RandomStream& rng,
                    std::uint64_t threshold = 0);

}  // namespace dynsched
