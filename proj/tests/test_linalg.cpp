#include <cmath>

#include "doctest.h"
#include "starrep/linalg.hpp"

using namespace starrep;

TEST_CASE("hermitian inner product is linear in the first slot") {
  VecC x(2), y(2);
  x << Complex(1, 2), Complex(0, -1);
  y << Complex(2, 0), Complex(1, 1);
  Complex direct = x(0) * std::conj(y(0)) + x(1) * std::conj(y(1));
  CHECK(std::abs(hermitian_inner(x, y) - direct) < 1e-15);
  CHECK(std::abs(hermitian_inner(Complex(0, 1) * x, y) -
                 Complex(0, 1) * hermitian_inner(x, y)) < 1e-15);
  CHECK(std::abs(hermitian_inner(x, y) - std::conj(hermitian_inner(y, x))) < 1e-15);
  CHECK(re_inner(x, y) == doctest::Approx(re_inner(y, x)));
}

TEST_CASE("operator norm is the top singular value") {
  MatC a = MatC::Zero(2, 2);
  a(0, 0) = 3.0;
  a(1, 1) = Complex(0, 1);
  CHECK(operator_norm(a) == doctest::Approx(3.0));
  Rng rng(42);
  MatC u = random_unitary(4, rng);
  CHECK(operator_norm(u) == doctest::Approx(1.0));
  MatC m(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = rng.gaussian_complex();
  CHECK(operator_norm(u * m) == doctest::Approx(operator_norm(m)).epsilon(1e-12));
}

TEST_CASE("pseudo-inverse satisfies the Moore-Penrose identities") {
  Rng rng(7);
  MatC left(4, 2), right(2, 3);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 2; ++j) left(i, j) = rng.gaussian_complex();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) right(i, j) = rng.gaussian_complex();
  MatC a = left * right;  // rank 2 inside 4x3
  MatC p = pseudo_inverse(a);
  CHECK(operator_norm(a * p * a - a) < 1e-12);
  CHECK(operator_norm(p * a * p - p) < 1e-12);
  CHECK(operator_norm((a * p).adjoint() - a * p) < 1e-12);
  CHECK(operator_norm((p * a).adjoint() - p * a) < 1e-12);
}

TEST_CASE("range and kernel bases split image and null space") {
  MatC a(3, 2);
  a << 1, 1, 1, 1, 0, 0;  // both columns equal: rank 1, nullity 1
  MatC range = range_basis(a);
  MatC kernel = kernel_basis(a);
  CHECK(range.cols() == 1);
  CHECK(kernel.cols() == 1);
  CHECK(operator_norm(range.adjoint() * range - MatC::Identity(range.cols(), range.cols())) <
        1e-12);
  CHECK((a * kernel).norm() < 1e-12);
  MatC projector = range_projector(a);
  CHECK(operator_norm(projector * projector - projector) < 1e-12);
  CHECK(operator_norm(projector * a - a) < 1e-12);
}

TEST_CASE("ball least squares hits frozen boundary and interior answers") {
  MatC a = MatC::Zero(2, 2);
  a(0, 0) = 2.0;
  a(1, 1) = 1.0;
  VecC b(2);
  b << 4.0, 0.0;
  BallLsqResult res = ball_least_squares(a, b);
  // Unconstrained solution (2, 0) is outside, so the sphere point (1, 0)
  // wins with residual 2.
  CHECK(res.distance == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(std::abs(res.witness(0) - 1.0) < 1e-8);
  CHECK(std::abs(res.witness(1)) < 1e-8);

  b << 0.3, 0.4;
  res = ball_least_squares(MatC::Identity(2, 2), b);
  CHECK(res.distance == doctest::Approx(0.0).epsilon(1e-12));
  CHECK((res.witness - b).norm() < 1e-10);
}

TEST_CASE("ball least squares agrees with the trust-region solver") {
  // ||A z - b||^2 over real vectors is the quadratic z^T A^T A z - 2 (A^T b)^T z + ||b||^2;
  // two independent solvers must meet.
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd a(3, 3);
    Eigen::VectorXd b(3);
    for (int i = 0; i < 3; ++i) {
      b(i) = rng.gaussian();
      for (int j = 0; j < 3; ++j) a(i, j) = rng.gaussian();
    }
    BallLsqResult direct = ball_least_squares(a.cast<Complex>(), b.cast<Complex>());
    TrustRegionResult quad =
        trust_region_min(a.transpose() * a, -a.transpose() * b, b.squaredNorm());
    CHECK(direct.distance * direct.distance == doctest::Approx(quad.value).epsilon(1e-7));
  }
}

TEST_CASE("trust region minimizer handles interior, boundary, and hard cases") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd b(2);

  // Boundary touching: min of ||v||^2 + 2 v_0 is -1 at (-1, 0).
  b << 1.0, 0.0;
  TrustRegionResult r = trust_region_min(a, b, 0.0);
  CHECK(r.value == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(std::abs(r.minimizer(0) + 1.0) < 1e-8);

  // Interior: positive definite with small linear part stays inside.
  a << 2.0, 0.0, 0.0, 4.0;
  b << 0.2, 0.0;
  r = trust_region_min(a, b, 5.0);
  CHECK(r.value == doctest::Approx(5.0 - 0.2 * 0.2 / 2.0).epsilon(1e-10));
  CHECK(r.minimizer.norm() < 1.0);

  // Hard case: b orthogonal to the bottom eigenspace.
  a << -1.0, 0.0, 0.0, 1.0;
  b << 0.0, 0.0;
  r = trust_region_min(a, b, 0.0);
  CHECK(r.value == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(r.minimizer.norm() == doctest::Approx(1.0).epsilon(1e-9));

  // Semi-definite boundary case: minimize v_1^2 - 2 v_0 at (1, 0).
  a << 0.0, 0.0, 0.0, 1.0;
  b << -1.0, 0.0;
  r = trust_region_min(a, b, 0.0);
  CHECK(r.value == doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(std::abs(r.minimizer(0) - 1.0) < 1e-7);
}

TEST_CASE("trust region gives exact ball maxima of operator images") {
  // max ||M v||^2 over the ball equals sigma_max^2, found by minimizing the
  // negated quadratic.
  Eigen::MatrixXd m(2, 2);
  m << 3.0, 0.0, 0.0, 1.0;
  TrustRegionResult r = trust_region_min(-(m.transpose() * m), Eigen::VectorXd::Zero(2), 0.0);
  CHECK(-r.value == doctest::Approx(9.0).epsilon(1e-10));
}

TEST_CASE("rng is deterministic and spheres/balls are respected") {
  Rng a(123), b(123);
  for (int k = 0; k < 5; ++k) CHECK(a.uniform() == b.uniform());
  CHECK(a.uniform_int(0, 9) == b.uniform_int(0, 9));
  VecC u = a.unit_vector(6);
  CHECK(u.norm() == doctest::Approx(1.0).epsilon(1e-12));
  for (int k = 0; k < 10; ++k) CHECK(a.ball_vector(4).norm() <= 1.0 + 1e-12);
  MatC q = random_unitary(5, a);
  CHECK(operator_norm(q.adjoint() * q - MatC::Identity(5, 5)) < 1e-12);
}
