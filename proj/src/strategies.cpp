#include "dynsched/strategies.hpp"

#include <array>
#include <optional>
#include <stdexcept>
#include <string>

namespace dynsched {
namespace {

struct StrategyName {
  StrategyId id;
  std::string_view token;
};

constexpr std::array<StrategyName, 8> kNames{{
    {StrategyId::random_outer, "random-outer"},
    {StrategyId::sorted_outer, "sorted-outer"},
    {StrategyId::dynamic_outer, "dynamic-outer"},
    {StrategyId::dynamic_outer_2phases, "dynamic-outer-2p"},
    {StrategyId::random_matrix, "random-matrix"},
    {StrategyId::sorted_matrix, "sorted-matrix"},
    {StrategyId::dynamic_matrix, "dynamic-matrix"},
    {StrategyId::dynamic_matrix_2phases, "dynamic-matrix-2p"},
}};

constexpr std::array<StrategyId, 8> kAll{
    StrategyId::random_outer,  StrategyId::sorted_outer,  StrategyId::dynamic_outer,  StrategyId::dynamic_outer_2phases,
    StrategyId::random_matrix, StrategyId::sorted_matrix, StrategyId::dynamic_matrix, StrategyId::dynamic_matrix_2phases,
};

std::size_t flat(Index n, Index r, Index c) { return static_cast<std::size_t>(r) * n + c; }

Allocation single_task(const MasterView& view, std::size_t worker, const TaskId& task) {
  Allocation out;
  for (const auto& block : task_inputs(view.problem, task))
    if (!view.workers[worker].holds(block)) out.blocks.push_back(block);
  out.batch.push_back(task);
  return out;
}

std::optional<Index> draw_new(const IndexSet& set, RandomStream& rng) {
  if (set.full()) return std::nullopt;
  return set.draw_outside(rng);
}

}  // namespace

std::string_view to_string(StrategyId id) {
  for (const auto& n : kNames)
    if (n.id == id) return n.token;
  return "unknown";
}

StrategyId parse_strategy(std::string_view text) {
  for (const auto& n : kNames)
    if (n.token == text) return n.id;
  throw std::invalid_argument("unknown strategy: " + std::string(text));
}

KernelKind kernel_of(StrategyId id) {
  switch (id) {
    case StrategyId::random_outer:
    case StrategyId::sorted_outer:
    case StrategyId::dynamic_outer:
    case StrategyId::dynamic_outer_2phases:
      return KernelKind::outer;
    default:
      return KernelKind::matmul;
  }
}

bool is_two_phase(StrategyId id) {
  return id == StrategyId::dynamic_outer_2phases || id == StrategyId::dynamic_matrix_2phases;
}

std::span<const StrategyId> all_strategies() { return kAll; }

// WorkerKnowledge

WorkerKnowledge::WorkerKnowledge(const Problem& problem)
    : problem_(problem), rows_(problem.n), cols_(problem.n), depth_(problem.n) {
  if (problem.kind == KernelKind::matmul) {
    const std::size_t cells = static_cast<std::size_t>(problem.n) * problem.n;
    held_a_.assign(cells, 0);
    held_b_.assign(cells, 0);
    held_c_.assign(cells, 0);
  }
}

bool WorkerKnowledge::holds(const BlockId& b) const {
  if (problem_.kind == KernelKind::outer) {
    switch (b.array) {
      case BlockArray::A: return rows_.contains(b.row);
      case BlockArray::B: return cols_.contains(b.row);
      case BlockArray::C: return false;
    }
  }
  switch (b.array) {
    case BlockArray::A: return held_a_.at(flat(problem_.n, b.row, b.col)) != 0;
    case BlockArray::B: return held_b_.at(flat(problem_.n, b.row, b.col)) != 0;
    case BlockArray::C: return held_c_.at(flat(problem_.n, b.row, b.col)) != 0;
  }
  return false;
}

bool WorkerKnowledge::receive(const BlockId& b) {
  if (b.row >= problem_.n || b.col >= problem_.n) throw InvariantViolation("block index out of range");
  if (problem_.kind == KernelKind::outer) {
    if (b.col != 0) throw InvariantViolation("outer-product blocks have col = 0");
    switch (b.array) {
      case BlockArray::A: return rows_.insert(b.row);
      case BlockArray::B: return cols_.insert(b.row);
      case BlockArray::C: throw InvariantViolation("outer product has no C blocks");
    }
  }
  auto& flags = b.array == BlockArray::A ? held_a_ : b.array == BlockArray::B ? held_b_ : held_c_;
  auto& flag = flags.at(flat(problem_.n, b.row, b.col));
  if (flag) return false;
  flag = 1;
  switch (b.array) {
    case BlockArray::A:
      rows_.insert(b.row);
      depth_.insert(b.col);
      break;
    case BlockArray::B:
      cols_.insert(b.col);
      break;
    case BlockArray::C:
      break;
  }
  return true;
}

bool WorkerKnowledge::can_execute(const TaskId& task) const {
  for (const auto& block : task_inputs(problem_, task))
    if (!holds(block)) return false;
  return true;
}

// Allocators

Allocation allocate_random(const MasterView& view, std::size_t worker, RandomStream& rng) {
  return single_task(view, worker, view.ledger.random_unprocessed(rng));
}

Allocation allocate_sorted(const MasterView& view, std::size_t worker, RandomStream&) {
  return single_task(view, worker, view.ledger.first_unprocessed());
}

Allocation allocate_dynamic_outer(const MasterView& view, std::size_t worker, RandomStream& rng) {
  const auto& known = view.workers[worker];
  const auto& rows = known.rows();
  const auto& cols = known.cols();
  if (rows.full() && cols.full()) return allocate_random(view, worker, rng);

  const auto i = draw_new(rows, rng);
  const auto j = draw_new(cols, rng);
  Allocation out;
  out.data_aware = true;
  if (i) out.blocks.push_back({BlockArray::A, *i, 0});
  if (j) out.blocks.push_back({BlockArray::B, *j, 0});
  out.batch = tasks_for_cross_outer(rows, cols, i, j, view.ledger);
  return out;
}

Allocation allocate_dynamic_matrix(const MasterView& view, std::size_t worker, RandomStream& rng) {
  const auto& known = view.workers[worker];
  const auto& rows = known.rows();
  const auto& cols = known.cols();
  const auto& depth = known.depth();
  if (rows.full() && cols.full() && depth.full()) return allocate_random(view, worker, rng);

  const auto i = draw_new(rows, rng);
  const auto j = draw_new(cols, rng);
  const auto k = draw_new(depth, rng);

  Allocation out;
  out.data_aware = true;
  auto send = [&](BlockArray array, Index r, Index c) {
    BlockId block{array, r, c};
    if (!known.holds(block)) out.blocks.push_back(block);
  };
  // Extending (I, J, K) by (i, j, k) needs the new rows/columns of the three
  // faces I x K (A), K x J (B) and I x J (C).
  auto extend_face = [&](BlockArray array, const IndexSet& r_set, std::optional<Index> r_new, const IndexSet& c_set,
                         std::optional<Index> c_new) {
    if (r_new) {
      for (Index c : c_set.sorted_members()) send(array, *r_new, c);
      if (c_new) send(array, *r_new, *c_new);
    }
    if (c_new) {
      for (Index r : r_set.sorted_members()) send(array, r, *c_new);
    }
  };
  extend_face(BlockArray::A, rows, i, depth, k);
  extend_face(BlockArray::B, depth, k, cols, j);
  extend_face(BlockArray::C, rows, i, cols, j);
  out.batch = tasks_for_cross_matmul(rows, cols, depth, i, j, k, view.ledger);
  return out;
}

Allocation allocate_two_phase(const MasterView& view, std::size_t worker, RandomStream& rng,
                              std::uint64_t threshold) {
  const bool outer = view.problem.kind == KernelKind::outer;
  if (view.ledger.remaining() > threshold)
    return outer ? allocate_dynamic_outer(view, worker, rng) : allocate_dynamic_matrix(view, worker, rng);
  return allocate_random(view, worker, rng);
}

Allocation allocate(StrategyId id, const MasterView& view, std::size_t worker, RandomStream& rng,
                    std::uint64_t threshold) {
  if (kernel_of(id) != view.problem.kind)
    throw std::invalid_argument(std::string(to_string(id)) + " does not apply to the " +
                                std::string(to_string(view.problem.kind)) + " kernel");
  switch (id) {
    case StrategyId::random_outer:
    case StrategyId::random_matrix:
      return allocate_random(view, worker, rng);
    case StrategyId::sorted_outer:
    case StrategyId::sorted_matrix:
      return allocate_sorted(view, worker, rng);
    case StrategyId::dynamic_outer:
      return allocate_dynamic_outer(view, worker, rng);
    case StrategyId::dynamic_matrix:
      return allocate_dynamic_matrix(view, worker, rng);
    case StrategyId::dynamic_outer_2phases:
    case StrategyId::dynamic_matrix_2phases:
      return allocate_two_phase(view, worker, rng, threshold);
  }
  throw std::logic_error("unhandled strategy");
}

}  // namespace dynsched
