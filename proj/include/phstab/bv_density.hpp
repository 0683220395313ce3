#pragma once

#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace phstab {

/// Matrix-valued polynomial in the spatial coordinate, degree capped at 8.
struct MatrixPoly {
    std::vector<Eigen::MatrixXd> coeffs;  // coeffs[d] multiplies zeta^d

    explicit MatrixPoly(std::vector<Eigen::MatrixXd> c);
    static MatrixPoly constant(const Eigen::MatrixXd& c);

    int dim() const { return static_cast<int>(coeffs.front().rows()); }
    int degree() const { return static_cast<int>(coeffs.size()) - 1; }

    Eigen::MatrixXd value(double zeta) const;
    Eigen::MatrixXd derivative(double zeta) const;
    /// Exact integral of the polynomial over [lo, hi].
    Eigen::MatrixXd integral(double lo, double hi) const;
};

enum class Side { Left, Right };

/// Piecewise-smooth matrix-valued BV function on [a, b]. The stored value at
/// an interior breakpoint is the right limit; both one-sided limits are
/// available through `evaluate`.
class PiecewiseMatrixDensity {
  public:
    PiecewiseMatrixDensity(std::vector<double> breakpoints, std::vector<MatrixPoly> pieces);

    static PiecewiseMatrixDensity constant(double a, double b, const Eigen::MatrixXd& value);
    static PiecewiseMatrixDensity scalar_step(double a, double b, double where, double before,
                                              double after);

    double a() const { return breakpoints_.front(); }
    double b() const { return breakpoints_.back(); }
    int dim() const { return pieces_.front().dim(); }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<MatrixPoly>& pieces() const { return pieces_; }

    Eigen::MatrixXd evaluate(double zeta, Side side) const;
    Eigen::MatrixXd derivative(double zeta, Side side) const;

    /// Sum of smooth-piece curve lengths (adaptive quadrature of ||H'||) plus
    /// jump norms at interior breakpoints, in the operator 2-norm.
    double total_variation() const;

    /// Certified eigenvalue range over [a, b]; throws std::domain_error when
    /// the lower bound is not positive.
    std::pair<double, double> bounds() const;

    /// ||H(a+)|| + Var(H) + ||H(b-)||.
    double mbar_prime() const;

    /// Mean value over [lo, hi], exact across interior breakpoints.
    Eigen::MatrixXd cell_average(double lo, double hi) const;

    /// Eigenvalue range without the positivity requirement (used by tests).
    std::pair<double, double> eigen_range() const;

  private:
    int piece_index(double zeta, Side side) const;

    std::vector<double> breakpoints_;
    std::vector<MatrixPoly> pieces_;
};

/// C^1 approximation of a BV density: j_eps-mollification of the clamped
/// extension, stored as dense uniform value/derivative samples with cubic
/// Hermite interpolation between them.
class SmoothDensity {
  public:
    SmoothDensity(PiecewiseMatrixDensity source, double eps, int num_samples, bool parallel);

    double a() const { return source_.a(); }
    double b() const { return source_.b(); }
    int dim() const { return source_.dim(); }
    double eps() const { return eps_; }
    int num_samples() const { return static_cast<int>(sample_points_.size()); }
    const std::vector<double>& sample_points() const { return sample_points_; }
    const std::vector<Eigen::MatrixXd>& sample_values() const { return values_; }
    const std::vector<Eigen::MatrixXd>& sample_derivatives() const { return derivs_; }
    const PiecewiseMatrixDensity& source() const { return source_; }

    /// Cubic Hermite interpolation of the stored samples.
    Eigen::MatrixXd value(double zeta) const;
    Eigen::MatrixXd derivative(double zeta) const;

    /// Direct convolution quadrature, independent of the stored samples.
    Eigen::MatrixXd value_exact(double zeta) const;
    Eigen::MatrixXd derivative_exact(double zeta) const;

    /// Integral of ||H_eps'|| via adaptive quadrature on the exact convolution.
    double total_variation() const;

    /// Eigenvalue range over the stored samples.
    std::pair<double, double> bounds_at_samples() const;

  private:
    PiecewiseMatrixDensity source_;
    double eps_;
    std::vector<double> sample_points_;
    std::vector<Eigen::MatrixXd> values_;
    std::vector<Eigen::MatrixXd> derivs_;
};

/// Normalization constant of the standard bump r -> c * exp(-1/(1-r^2)).
double bump_normalization();
double bump(double r);
double bump_derivative(double r);

SmoothDensity mollify(const PiecewiseMatrixDensity& density, double eps, int num_samples = 1025);

/// Piecewise-cubic (Hermite) representation reproducing the stored samples,
/// e.g. to feed a mollified density back into the solver.
PiecewiseMatrixDensity to_piecewise(const SmoothDensity& smooth);

/// Serial reference for the sample loop of `mollify`; identical output.
SmoothDensity mollify_serial(const PiecewiseMatrixDensity& density, double eps,
                             int num_samples = 1025);

}  // namespace phstab
