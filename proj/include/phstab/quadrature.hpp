#pragma once

#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace phstab {

/// Gauss-Legendre nodes and weights on [-1, 1]. Results are cached per order.
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int order);

/// Fixed-order Gauss-Legendre quadrature of f over [lo, hi].
double integrate_gl(const std::function<double(double)>& f, double lo, double hi, int order);

Eigen::MatrixXd integrate_gl_matrix(const std::function<Eigen::MatrixXd(double)>& f, double lo,
                                    double hi, int order);

/// Adaptive quadrature (GL-15 against GL-15 on halves) with relative
/// tolerance. `abs_floor` is an absolute error cutoff protecting against
/// endless refinement when a subinterval's integral is pure rounding noise;
/// pass rel_tol times a characteristic scale of the full integral.
/// The integrand must be finite on [lo, hi].
double integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                          double rel_tol, double abs_floor = 0.0, int max_depth = 48);

/// Spectral (operator 2-) norm.
double op_norm(const Eigen::MatrixXd& M);

}  // namespace phstab
