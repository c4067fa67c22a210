#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dynsched/random.hpp"

namespace dynsched {

using Index = std::uint32_t;

/// Raised when a run breaks one of the simulator's hard invariants
/// (double processing, a task without its inputs, a duplicated transfer, livelock).
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class KernelKind { outer, matmul };

std::string_view to_string(KernelKind kind);
KernelKind parse_kernel(std::string_view text);

/// Block-level problem: n blocks per dimension.
struct Problem {
  KernelKind kind = KernelKind::outer;
  Index n = 1;

  /// 2 for the outer product, 3 for matrix multiplication.
  int dimensions() const noexcept { return kind == KernelKind::outer ? 2 : 3; }
  /// Number of input blocks of a task (a, b for outer; A, B, C for matmul).
  int inputs_per_task() const noexcept { return dimensions(); }
};

/// n^2 (outer) or n^3 (matmul).
std::uint64_t total_tasks(const Problem& problem);

/// T(i, j) for the outer product, T(i, j, k) for matmul; k stays zero for outer.
struct TaskId {
  Index i = 0;
  Index j = 0;
  Index k = 0;

  auto operator<=>(const TaskId&) const = default;
};

enum class BlockArray : std::uint8_t { A, B, C };

/// A block of A, B or C. For the outer product, A is vector a and B is vector b,
/// both addressed by `row` with `col` = 0.
struct BlockId {
  BlockArray array = BlockArray::A;
  Index row = 0;
  Index col = 0;

  auto operator<=>(const BlockId&) const = default;
};

std::uint64_t linear_index(const Problem& problem, const TaskId& task);
TaskId task_from_linear(const Problem& problem, std::uint64_t id);

/// Input blocks of a task: {a_i, b_j} or {A(i,k), B(k,j), C(i,j)}.
std::vector<BlockId> task_inputs(const Problem& problem, const TaskId& task);

/// Subset of [0, n) with O(1) insertion, membership and uniform draws from the complement.
class IndexSet {
 public:
  IndexSet() = default;
  explicit IndexSet(Index universe);

  Index universe() const noexcept { return static_cast<Index>(in_.size()); }
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  bool full() const noexcept { return complement_.empty(); }
  bool contains(Index i) const { return in_.at(i) != 0; }

  /// Returns false if already present.
  bool insert(Index i);

  /// Members in insertion order.
  std::span<const Index> members() const noexcept { return members_; }
  std::vector<Index> sorted_members() const;

  /// Uniform element outside the set; the set must not be full.
  Index draw_outside(RandomStream& rng) const;

 private:
  std::vector<std::uint8_t> in_;
  std::vector<Index> members_;
  std::vector<Index> complement_;
  std::vector<Index> complement_pos_;
};

/// Global record of processed tasks.
///
/// Unprocessed tasks are kept in a swap-remove pool, so a uniformly random
/// unprocessed task is an O(1) draw, and a cursor tracks the lexicographically
/// smallest unprocessed task.
class TaskLedger {
 public:
  explicit TaskLedger(const Problem& problem);

  const Problem& problem() const noexcept { return problem_; }
  std::uint64_t total() const noexcept { return processed_.size(); }
  std::uint64_t remaining() const noexcept { return pool_.size(); }
  bool is_processed(const TaskId& task) const { return processed_.at(linear_index(problem_, task)) != 0; }

  /// Throws InvariantViolation if the task was already processed.
  void mark_processed(const TaskId& task);

  /// Uniform draw among unprocessed tasks; requires remaining() > 0.
  TaskId random_unprocessed(RandomStream& rng) const;
  /// Lexicographically smallest unprocessed task; requires remaining() > 0.
  TaskId first_unprocessed() const;

 private:
  Problem problem_;
  std::vector<std::uint8_t> processed_;
  std::vector<std::uint32_t> pool_;
  std::vector<std::uint32_t> pool_pos_;
  std::uint64_t cursor_ = 0;
};

/// Unprocessed tasks of the outer-product cross opened by adding row `i` to I and
/// column `j` to J. Either new index may be absent (half cross). Row tasks come
/// first, then column tasks, each in increasing index order.
std::vector<TaskId> tasks_for_cross_outer(const IndexSet& rows, const IndexSet& cols, std::optional<Index> i,
                                          std::optional<Index> j, const TaskLedger& ledger);

/// Unprocessed tasks of (I+i) x (J+j) x (K+k) outside I x J x K, in lexicographic
/// order. Absent indices leave their dimension unchanged.
std::vector<TaskId> tasks_for_cross_matmul(const IndexSet& rows, const IndexSet& cols, const IndexSet& depth,
                                           std::optional<Index> i, std::optional<Index> j, std::optional<Index> k,
                                           const TaskLedger& ledger);

}  // namespace dynsched
