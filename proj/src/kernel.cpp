#include "dynsched/kernel.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace dynsched {

std::string_view to_string(KernelKind kind) { return kind == KernelKind::outer ? "outer" : "matmul"; }

KernelKind parse_kernel(std::string_view text) {
  if (text == "outer") return KernelKind::outer;
  if (text == "matmul") return KernelKind::matmul;
  throw std::invalid_argument("unknown kernel: " + std::string(text));
}

std::uint64_t total_tasks(const Problem& problem) {
  const std::uint64_t n = problem.n;
  return problem.kind == KernelKind::outer ? n * n : n * n * n;
}

std::uint64_t linear_index(const Problem& problem, const TaskId& task) {
  const std::uint64_t n = problem.n;
  if (problem.kind == KernelKind::outer) return task.i * n + task.j;
  return (task.i * n + task.j) * n + task.k;
}

TaskId task_from_linear(const Problem& problem, std::uint64_t id) {
  const std::uint64_t n = problem.n;
  if (problem.kind == KernelKind::outer) return {static_cast<Index>(id / n), static_cast<Index>(id % n), 0};
  return {static_cast<Index>(id / (n * n)), static_cast<Index>((id / n) % n), static_cast<Index>(id % n)};
}

std::vector<BlockId> task_inputs(const Problem& problem, const TaskId& t) {
  if (problem.kind == KernelKind::outer) return {{BlockArray::A, t.i, 0}, {BlockArray::B, t.j, 0}};
  return {{BlockArray::A, t.i, t.k}, {BlockArray::B, t.k, t.j}, {BlockArray::C, t.i, t.j}};
}

// IndexSet

IndexSet::IndexSet(Index universe)
    : in_(universe, 0), complement_(universe), complement_pos_(universe) {
  std::iota(complement_.begin(), complement_.end(), Index{0});
  std::iota(complement_pos_.begin(), complement_pos_.end(), Index{0});
}

bool IndexSet::insert(Index i) {
  if (in_.at(i)) return false;
  in_[i] = 1;
  members_.push_back(i);
  const Index pos = complement_pos_[i];
  const Index last = complement_.back();
  complement_[pos] = last;
  complement_pos_[last] = pos;
  complement_.pop_back();
  return true;
}

std::vector<Index> IndexSet::sorted_members() const {
  std::vector<Index> out(members_.begin(), members_.end());
  std::sort(out.begin(), out.end());
  return out;
}

Index IndexSet::draw_outside(RandomStream& rng) const {
  if (complement_.empty()) throw std::logic_error("draw_outside on a full index set");
  return complement_[rng.below(complement_.size())];
}

// TaskLedger

TaskLedger::TaskLedger(const Problem& problem) : problem_(problem) {
  if (problem.n == 0) throw std::invalid_argument("problem needs n >= 1");
  const std::uint64_t total = total_tasks(problem);
  if (total > std::numeric_limits<std::uint32_t>::max())
    throw std::invalid_argument("problem too large for 32-bit task ids");
  processed_.assign(total, 0);
  pool_.resize(total);
  pool_pos_.resize(total);
  std::iota(pool_.begin(), pool_.end(), 0u);
  std::iota(pool_pos_.begin(), pool_pos_.end(), 0u);
}

void TaskLedger::mark_processed(const TaskId& task) {
  if (task.i >= problem_.n || task.j >= problem_.n || task.k >= problem_.n ||
      (problem_.kind == KernelKind::outer && task.k != 0))
    throw InvariantViolation("task index out of range");
  const auto id = linear_index(problem_, task);
  if (processed_[id]) {
    throw InvariantViolation("task (" + std::to_string(task.i) + "," + std::to_string(task.j) + "," +
                             std::to_string(task.k) + ") processed twice");
  }
  processed_[id] = 1;
  const auto pos = pool_pos_[id];
  const auto last = pool_.back();
  pool_[pos] = last;
  pool_pos_[last] = pos;
  pool_.pop_back();
  while (cursor_ < processed_.size() && processed_[cursor_]) ++cursor_;
}

TaskId TaskLedger::random_unprocessed(RandomStream& rng) const {
  if (pool_.empty()) throw std::logic_error("no unprocessed task left");
  return task_from_linear(problem_, pool_[rng.below(pool_.size())]);
}

TaskId TaskLedger::first_unprocessed() const {
  if (pool_.empty()) throw std::logic_error("no unprocessed task left");
  return task_from_linear(problem_, cursor_);
}

// Crosses

std::vector<TaskId> tasks_for_cross_outer(const IndexSet& rows, const IndexSet& cols, std::optional<Index> i,
                                          std::optional<Index> j, const TaskLedger& ledger) {
  if (i && rows.contains(*i)) throw std::invalid_argument("new row already known");
  if (j && cols.contains(*j)) throw std::invalid_argument("new column already known");
  std::vector<TaskId> out;
  auto push = [&](Index r, Index c) {
    TaskId t{r, c, 0};
    if (!ledger.is_processed(t)) out.push_back(t);
  };
  if (i) {
    std::vector<Index> cs = cols.sorted_members();
    if (j) cs.insert(std::upper_bound(cs.begin(), cs.end(), *j), *j);
    for (Index c : cs) push(*i, c);
  }
  if (j) {
    for (Index r : rows.sorted_members()) push(r, *j);
  }
  return out;
}

std::vector<TaskId> tasks_for_cross_matmul(const IndexSet& rows, const IndexSet& cols, const IndexSet& depth,
                                           std::optional<Index> i, std::optional<Index> j, std::optional<Index> k,
                                           const TaskLedger& ledger) {
  if (i && rows.contains(*i)) throw std::invalid_argument("new i already known");
  if (j && cols.contains(*j)) throw std::invalid_argument("new j already known");
  if (k && depth.contains(*k)) throw std::invalid_argument("new k already known");

  auto extended = [](const IndexSet& s, std::optional<Index> extra) {
    std::vector<Index> v = s.sorted_members();
    if (extra) v.insert(std::upper_bound(v.begin(), v.end(), *extra), *extra);
    return v;
  };
  const auto is = extended(rows, i);
  const auto js = extended(cols, j);
  const auto ks = extended(depth, k);

  // The new part of the cube splits into three disjoint slabs: i' = i, then
  // i' old and j' = j, then i', j' old and k' = k.
  std::vector<TaskId> out;
  auto push = [&](Index a, Index b, Index c) {
    TaskId t{a, b, c};
    if (!ledger.is_processed(t)) out.push_back(t);
  };
  if (i) {
    for (Index b : js)
      for (Index c : ks) push(*i, b, c);
  }
  if (j) {
    for (Index a : rows.members())
      for (Index c : ks) push(a, *j, c);
  }
  if (k) {
    for (Index a : rows.members())
      for (Index b : cols.members()) push(a, b, *k);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace dynsched
