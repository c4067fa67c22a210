#pragma once

#include <cmath>
#include <stdexcept>

namespace dynsched {

struct ScalarMinimum {
  double x = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

/// Golden-section search for the minimum of a unimodal function on [lo, hi].
/// Stops when the bracket is narrower than `tolerance`.
template <typename F>
ScalarMinimum golden_section_minimize(F&& f, double lo, double hi, double tolerance) {
  if (!(lo < hi)) throw std::invalid_argument("golden section needs lo < hi");
  if (!(tolerance > 0.0)) throw std::invalid_argument("golden section needs a positive tolerance");

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  int evaluations = 2;

  while (b - a > tolerance) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    ++evaluations;
  }

  const double x = 0.5 * (a + b);
  const double fx = f(x);
  return {x, fx, evaluations + 1};
}

}  // namespace dynsched
