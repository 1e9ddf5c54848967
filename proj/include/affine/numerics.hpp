#pragma once

// Small numerical kernels shared by the modules: adaptive Gauss-Kronrod
// quadrature, Gauss-Legendre rules, bracketed root finding, compensated sums.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <initializer_list>
#include <utility>

namespace affine::numerics {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

/// Seven-point Gauss / fifteen-point Kronrod estimate on [a, b].
QuadratureResult gauss_kronrod15(const std::function<double(double)>& f, double a, double b);

/// Globally adaptive G7K15 (largest-error interval bisected first) until the
/// summed error estimate is below max(abs_tol, rel_tol * |I|).
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b, double abs_tol,
                                    double rel_tol = 0.0, int max_intervals = 4000);

/// n-point Gauss-Legendre nodes and weights on [-1, 1] (Golub-Welsch).
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
GaussRule gauss_legendre(int n);

/// Root of f in [lo, hi] with f(lo), f(hi) of opposite sign (Brent's method).
/// Stops when the bracket is below x_tol or f vanishes exactly.
double find_root(const std::function<double(double)>& f, double lo, double hi, double x_tol = 0.0,
                 int max_iter = 200);

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::initializer_list<double> terms) {
  CompensatedSum s;
  for (double x : terms) s.add(x);
  return s.value();
}

}  // namespace affine::numerics
