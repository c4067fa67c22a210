#include "dynsched/platform.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dynsched {

DriftPolicy DriftPolicy::jitter(double magnitude) {
  if (!(magnitude >= 0.0 && magnitude < 1.0))
    throw std::invalid_argument("drift magnitude must lie in [0, 1)");
  if (magnitude == 0.0) return none();
  return {Kind::per_task_jitter, magnitude};
}

Platform::Platform(std::vector<double> speeds, DriftPolicy drift)
    : speeds_(std::move(speeds)), drift_(drift) {
  if (speeds_.empty()) throw std::invalid_argument("platform needs at least one worker");
  for (double s : speeds_) {
    if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("worker speeds must be positive and finite");
  }
  if ((drift_.kind == DriftPolicy::Kind::none) != (drift_.magnitude == 0.0))
    throw std::invalid_argument("drift magnitude must be zero exactly when drift is disabled");
}

double Platform::total_speed() const noexcept {
  return std::accumulate(speeds_.begin(), speeds_.end(), 0.0);
}

std::vector<double> Platform::relative_speeds() const {
  const double total = total_speed();
  std::vector<double> rs(speeds_.size());
  for (std::size_t k = 0; k < rs.size(); ++k) rs[k] = speeds_[k] / total;
  return rs;
}

Platform make_uniform_platform(std::size_t p, double lo, double hi, std::uint64_t seed) {
  if (p == 0) throw std::invalid_argument("platform needs at least one worker");
  if (!(lo > 0.0) || !(lo <= hi)) throw std::invalid_argument("uniform speeds need 0 < lo <= hi");
  RandomStream rng(seed);
  std::vector<double> speeds(p);
  for (auto& s : speeds) s = rng.uniform(lo, hi);
  return Platform(std::move(speeds));
}

Platform make_discrete_platform(std::size_t p, std::span<const double> speed_set, std::uint64_t seed) {
  if (p == 0) throw std::invalid_argument("platform needs at least one worker");
  if (speed_set.empty()) throw std::invalid_argument("speed set is empty");
  for (double s : speed_set)
    if (!(s > 0.0)) throw std::invalid_argument("speed set contains a nonpositive speed");
  RandomStream rng(seed);
  std::vector<double> speeds(p);
  for (auto& s : speeds) s = speed_set[rng.below(speed_set.size())];
  return Platform(std::move(speeds));
}

Platform make_homogeneous_platform(std::size_t p, double speed) {
  if (p == 0) throw std::invalid_argument("platform needs at least one worker");
  return Platform(std::vector<double>(p, speed));
}

void apply_drift_in_place(std::vector<double>& speeds, const DriftPolicy& drift, std::size_t worker,
                          RandomStream& rng) {
  if (!drift.active()) return;
  const double factor = rng.uniform(1.0 - drift.magnitude, 1.0 + drift.magnitude);
  speeds.at(worker) *= factor;
}

Platform apply_drift(const Platform& platform, std::size_t worker, RandomStream& rng) {
  if (!platform.drift().active()) return platform;
  std::vector<double> speeds(platform.speeds().begin(), platform.speeds().end());
  apply_drift_in_place(speeds, platform.drift(), worker, rng);
  return Platform(std::move(speeds), platform.drift());
}

Platform read_speeds(std::istream& in) {
  std::vector<double> speeds;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    double value = 0.0;
    if (!(fields >> value)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw std::invalid_argument("speeds line " + std::to_string(lineno) + ": not a number");
    }
    std::string rest;
    if (fields >> rest) throw std::invalid_argument("speeds line " + std::to_string(lineno) + ": trailing text");
    speeds.push_back(value);
  }
  return Platform(std::move(speeds));
}

Platform read_speeds_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open speeds file: " + path);
  return read_speeds(in);
}

void write_speeds(std::ostream& out, const Platform& platform) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (double s : platform.speeds()) out << s << '\n';
}

}  // namespace dynsched
