#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dynsched/random.hpp"

namespace dynsched {

/// How a worker's speed evolves while it computes.
struct DriftPolicy {
  enum class Kind { none, per_task_jitter };

  Kind kind = Kind::none;
  double magnitude = 0.0;  // fraction in [0, 1)

  static DriftPolicy none() { return {}; }
  static DriftPolicy jitter(double magnitude);

  bool active() const noexcept { return kind == Kind::per_task_jitter; }
  bool operator==(const DriftPolicy&) const = default;
};

/// Heterogeneous worker speeds, in tasks per unit of time.
class Platform {
 public:
  explicit Platform(std::vector<double> speeds, DriftPolicy drift = DriftPolicy::none());

  std::size_t size() const noexcept { return speeds_.size(); }
  std::span<const double> speeds() const noexcept { return speeds_; }
  double speed(std::size_t worker) const { return speeds_.at(worker); }
  const DriftPolicy& drift() const noexcept { return drift_; }
  double total_speed() const noexcept;

  /// s_k / sum(s), summing to one.
  std::vector<double> relative_speeds() const;

  Platform with_drift(DriftPolicy drift) const { return Platform(speeds_, drift); }

  bool operator==(const Platform&) const = default;

 private:
  std::vector<double> speeds_;
  DriftPolicy drift_;
};

/// p speeds drawn i.i.d. uniformly on [lo, hi].
Platform make_uniform_platform(std::size_t p, double lo, double hi, std::uint64_t seed);

/// p speeds drawn uniformly from a finite set of speeds.
Platform make_discrete_platform(std::size_t p, std::span<const double> speed_set, std::uint64_t seed);

/// Homogeneous platform: every worker has the same speed.
Platform make_homogeneous_platform(std::size_t p, double speed = 1.0);

/// Rescales one worker's speed by a factor uniform on [1 - m, 1 + m]. Identity
/// when the platform has no drift.
Platform apply_drift(const Platform& platform, std::size_t worker, RandomStream& rng);

/// In-place variant used by the simulator's inner loop.
void apply_drift_in_place(std::vector<double>& speeds, const DriftPolicy& drift, std::size_t worker,
                          RandomStream& rng);

/// Plain-text speed list: one real per line, blank lines and '#' comments ignored.
Platform read_speeds(std::istream& in);
Platform read_speeds_file(const std::string& path);
void write_speeds(std::ostream& out, const Platform& platform);

}  // namespace dynsched
