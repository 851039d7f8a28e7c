#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace starrep {

using Complex = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;

// Hermitian inner product, linear in the FIRST argument:  <xi, zeta> = sum_k xi_k conj(zeta_k).
inline Complex hermitian_inner(const VecC& xi, const VecC& zeta) { return zeta.dot(xi); }

// The real-part predicate [xi, zeta] = Re <xi, zeta>.
inline double re_inner(const VecC& xi, const VecC& zeta) { return hermitian_inner(xi, zeta).real(); }

// Largest singular value.
double operator_norm(const MatC& a);

// Moore-Penrose pseudo-inverse with a relative singular-value cutoff.
MatC pseudo_inverse(const MatC& a, double rel_tol = 1e-12);

// Orthogonal projector onto the column space of a / of a horizontal stack.
MatC range_projector(const MatC& a, double rel_tol = 1e-8);
MatC range_projector(const std::vector<MatC>& blocks, double rel_tol = 1e-8);

// Orthonormal basis (columns) of the column space / of the null space.
MatC range_basis(const MatC& a, double rel_tol = 1e-8);
MatC kernel_basis(const MatC& a, double rel_tol = 1e-8);

struct BallLsqResult {
  double distance = 0.0;  // min over ||z|| <= 1 of ||A z - b||
  VecC witness;           // argmin z
};

// Norm-constrained least squares: min_{||z||<=1} ||A z - b||.
//
// If the min-norm unconstrained solution already fits in the ball, the
// distance is the plain least-squares residual.  Otherwise the minimizer sits
// on the sphere and solves (A*A + lambda I) z = A* b for the unique lambda > 0
// with ||z(lambda)|| = 1; in SVD coordinates that is the scalar secular
// equation  sum_i (s_i |c_i| / (s_i^2 + lambda))^2 = 1,  strictly decreasing
// in lambda, which we bracket and bisect.  The precomputed SVD makes repeated
// solves against the same A cheap.
class BallLeastSquares {
 public:
  BallLeastSquares() = default;
  explicit BallLeastSquares(MatC a);

  BallLsqResult solve(const VecC& target) const;
  const MatC& matrix() const { return a_; }
  double sigma_max() const { return sigma_max_; }
  // Right singular vector of the top singular value (direction of the
  // farthest image point A v on the unit ball).
  VecC top_right_singular() const;

 private:
  MatC a_;
  Eigen::JacobiSVD<MatC> svd_;
  double sigma_max_ = 0.0;
  int rank_ = 0;
};

BallLsqResult ball_least_squares(const MatC& a, const VecC& target);

// Exact minimizer of the real quadratic v^T A v + 2 b^T v + c over the closed
// unit ball (trust-region subproblem): interior stationary point when A is
// positive definite and the Newton point fits, otherwise the boundary
// multiplier from the secular equation ||(A + mu I)^-1 b|| = 1, including the
// degenerate bottom-eigenspace case.
struct TrustRegionResult {
  double value = 0.0;
  Eigen::VectorXd minimizer;
};
TrustRegionResult trust_region_min(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double c);

// Deterministic random helpers on top of a seeded mt19937_64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  int uniform_int(int lo, int hi);       // inclusive ends
  double gaussian();
  Complex gaussian_complex();
  VecC unit_vector(int dim);
  VecC ball_vector(int dim);  // uniform over the complex unit ball

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Haar-ish random unitary (QR of a Gaussian matrix with phase fixing).
MatC random_unitary(int dim, Rng& rng);

}  // namespace starrep
