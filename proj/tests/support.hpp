#pragma once

// Shared oracles and generators for the test suite.

#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "csl/expr.hpp"

namespace csl::testing {

// Richardson-extrapolated central difference of a scalar function of one variable.
inline double fd_first(const std::function<double(double)>& f, double x, double h) {
  const double d1 = (f(x + h) - f(x - h)) / (2 * h);
  const double d2 = (f(x + h / 2) - f(x - h / 2)) / h;
  return (4 * d2 - d1) / 3;
}

inline double fd_second(const std::function<double(double)>& f, double x, double h) {
  auto c = [&](double s) { return (f(x + s) - 2 * f(x) + f(x - s)) / (s * s); };
  return (4 * c(h / 2) - c(h)) / 3;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0}); }

// Random well-conditioned expression text over the given variable names.
// Function arguments are kept in safe ranges so every sample stays finite.
class ExprGenerator {
 public:
  ExprGenerator(std::vector<std::string> vars, unsigned seed) : vars_(std::move(vars)), rng_(seed) {}

  std::string next(int depth = 3) { return node(depth); }

 private:
  std::string leaf() {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(vars_.size()));
    const int k = pick(rng_);
    if (k < static_cast<int>(vars_.size())) return vars_[k];
    return number();
  }
  std::string number() {
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", d(rng_));
    std::string s = buf;
    return s[0] == '-' ? "(" + s + ")" : s;
  }
  std::string node(int depth) {
    if (depth == 0) return leaf();
    std::uniform_int_distribution<int> pick(0, 9);
    const std::string a = node(depth - 1);
    switch (pick(rng_)) {
      case 0: return a + "+" + node(depth - 1);
      case 1: return a + "-" + node(depth - 1);
      case 2: return "(" + a + ")*(" + node(depth - 1) + ")";
      case 3: return "(" + a + ")/(2+(" + node(depth - 1) + ")^2)";
      case 4: return "-(" + a + ")";
      case 5: return "(" + a + ")^2";
      case 6: return "sin(" + a + ")";
      case 7: return "cos(" + a + ")";
      case 8: return "exp(0.2*sin(" + a + "))";
      default: return "sqrt(1.5+cos(" + a + "))*ln(3+sin(" + a + "))";
    }
  }

  std::vector<std::string> vars_;
  std::mt19937 rng_;
};

}  // namespace csl::testing
