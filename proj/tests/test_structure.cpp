#include <cmath>
#include <complex>

#include "doctest.h"
#include "starrep/errors.hpp"
#include "starrep/sentence.hpp"
#include "starrep/structure.hpp"

using namespace starrep;

namespace {

// Independent oracle for min_{||z||<=1} ||diag(sigma) z - xi||: coordinatewise
// unconstrained solution when it fits the ball, otherwise the boundary
// multiplier found by bisection on ||z(mu)|| = 1.
double diag_ball_distance(const Eigen::VectorXd& sigma, const VecC& xi) {
  int n = static_cast<int>(sigma.size());
  double interior_norm_sq = 0.0, kernel_cost = 0.0;
  for (int k = 0; k < n; ++k) {
    if (sigma[k] > 1e-14)
      interior_norm_sq += std::norm(xi[k]) / (sigma[k] * sigma[k]);
    else
      kernel_cost += std::norm(xi[k]);
  }
  if (interior_norm_sq <= 1.0) return std::sqrt(kernel_cost);
  auto norm_sq = [&](double mu) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      double d = sigma[k] * sigma[k] + mu;
      s += sigma[k] * sigma[k] * std::norm(xi[k]) / (d * d);
    }
    return s;
  };
  double lo = 0.0, hi = 1.0;
  while (norm_sq(hi) > 1.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (norm_sq(mid) > 1.0 ? lo : hi) = mid;
  }
  double mu = 0.5 * (lo + hi), cost = 0.0;
  for (int k = 0; k < n; ++k) {
    double d = sigma[k] * sigma[k] + mu;
    cost += std::norm(xi[k]) * (mu / d) * (mu / d);
  }
  return std::sqrt(cost);
}

Sort make_sort(const MatC& op) {
  AlgebraElement dummy = AlgebraElement::dirac(Group::cyclic(2), 0);
  return Sort{"t", dummy, op, op, 1.0, 1.0, BallLeastSquares(op)};
}

MetricStructure z6_structure(MetricStructure::Options options = {}) {
  GroupPtr z6 = Group::cyclic(6);
  AlgebraElement phi =
      AlgebraElement::density(z6, {{0, Complex(0.4, 0.0)}, {1, Complex(0.35, 0.0)}, {2, Complex(0.25, 0.0)}});
  AlgebraElement em = approximate_identity(z6, 0);
  return MetricStructure::build(UnitaryRep::regular(z6), {{"phi", phi}, {"em", em}}, options);
}

}  // namespace

TEST_CASE("sort distance matches the eigen-decomposed hand computation") {
  // pi(0.75 d0 + 0.25 d1) on the two-point group has eigenpairs
  // (1, (1,1)/sqrt2) and (1/2, (1,-1)/sqrt2); the second eigenvector sits at
  // distance exactly 1/2 from the sort, met at its own half.
  GroupPtr z2 = Group::cyclic(2);
  AlgebraElement phi =
      AlgebraElement::density(z2, {{0, Complex(0.75, 0.0)}, {1, Complex(0.25, 0.0)}});
  MetricStructure m = MetricStructure::build(UnitaryRep::regular(z2), {{"phi", phi}});
  VecC xi(2);
  xi << Complex(1.0 / std::sqrt(2.0), 0.0), Complex(-1.0 / std::sqrt(2.0), 0.0);
  SortDistanceResult r = m.sort_distance("phi", xi);
  CHECK(r.distance == doctest::Approx(0.5).epsilon(1e-12));
  CHECK((r.point - 0.5 * xi).norm() < 1e-10);
  CHECK((r.coeff - xi).norm() < 1e-10);  // boundary witness is the eigenvector
  CHECK(m.sort_distance("phi", r.point).distance < 1e-10);  // members are at distance 0
}

TEST_CASE("sort distance agrees with the secular bisection oracle") {
  Rng rng(41);
  for (int dim : {2, 3, 4}) {
    for (int trial = 0; trial < 25; ++trial) {
      Eigen::VectorXd sigma(dim);
      for (int k = 0; k < dim; ++k) sigma[k] = rng.uniform(0.0, 2.0);
      if (trial % 5 == 0) sigma[0] = 0.0;  // rank-deficient slice
      MatC u = random_unitary(dim, rng), v = random_unitary(dim, rng);
      MatC a = u * sigma.cast<Complex>().asDiagonal() * v.adjoint();
      VecC xi = 1.5 * rng.ball_vector(dim);
      double got = sort_distance(make_sort(a), xi).distance;
      // ||u diag(sigma) v* z - xi|| = ||diag(sigma) w - u* xi|| with w = v* z.
      double want = diag_ball_distance(sigma, u.adjoint() * xi);
      CHECK(got == doctest::Approx(want).epsilon(1e-8));
    }
  }
}

TEST_CASE("sort distance handles interior fits and pure kernel targets") {
  MatC a = MatC::Zero(2, 2);
  a(0, 0) = 2.0;
  a(1, 1) = 1.0;
  VecC inside(2);
  inside << Complex(0.4, 0.0), Complex(0.3, 0.0);  // a^-1 inside has norm < 1
  CHECK(sort_distance(make_sort(a), inside).distance < 1e-12);

  MatC b = MatC::Zero(2, 2);
  b(0, 0) = 1.0;  // second coordinate is unreachable
  VecC target(2);
  target << Complex(0.0, 0.0), Complex(0.7, 0.0);
  CHECK(sort_distance(make_sort(b), target).distance == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("closure builds stars and depth-2 products with content dedup") {
  MetricStructure m = z6_structure();
  // phi is asymmetric so phi* is new; em = d0 is the unit, so products with it
  // and its star collapse.  The group is abelian, so phi.phi* = phi*.phi.
  std::vector<std::string> want = {"phi", "em", "phi*", "phi.phi", "phi.phi*", "phi*.phi*"};
  CHECK(m.labels() == want);
  CHECK(m.generator_labels() == std::vector<std::string>{"phi", "em"});

  CHECK(m.involution_label("phi").value() == "phi*");
  CHECK(m.involution_label("em").value() == "em");
  CHECK(m.involution_label("phi.phi").value() == "phi*.phi*");
  CHECK(m.involution_label("phi.phi*").value() == "phi.phi*");

  CHECK(m.product_label("phi", "em").value() == "phi");
  CHECK(m.product_label("em", "em").value() == "em");
  CHECK(m.product_label("phi", "phi*").value() == "phi.phi*");
  CHECK(m.product_label("phi*", "phi").value() == "phi.phi*");
  CHECK(!m.product_label("phi", "nope").has_value());

  CHECK(m.has_sort("phi.phi"));
  CHECK(!m.has_sort("em.em"));  // deduplicated into em before naming
  CHECK_THROWS_AS(m.sort("missing"), MissingSort);
}

TEST_CASE("noncommutative products stay distinct in the closure") {
  GroupPtr s3 = Group::symmetric3();
  AlgebraElement phi =
      AlgebraElement::density(s3, {{3, Complex(0.6, 0.0)}, {1, Complex(0.4, 0.0)}});
  MetricStructure m = MetricStructure::build(UnitaryRep::regular(s3), {{"phi", phi}});
  std::string left = m.product_label("phi", "phi*").value();
  std::string right = m.product_label("phi*", "phi").value();
  CHECK(left != right);
}

TEST_CASE("duplicate generator labels are rejected, duplicate content is merged") {
  GroupPtr z6 = Group::cyclic(6);
  AlgebraElement a = AlgebraElement::dirac(z6, 1);
  AlgebraElement b = AlgebraElement::dirac(z6, 2);
  CHECK_THROWS_AS(
      MetricStructure::build(UnitaryRep::regular(z6), {{"x", a}, {"x", b}}),
      PreconditionViolation);
  MetricStructure m =
      MetricStructure::build(UnitaryRep::regular(z6), {{"x", a}, {"y", a}});  // same content
  CHECK(m.generator_labels() == std::vector<std::string>{"x"});
}

TEST_CASE("ball maximizer reaches known optima") {
  Rng rng(7);
  BallMaxOptions opt{32, 80, 0.4};

  // Quadratic form: sup over the ball of w* diag(2,1) w is the top eigenvalue.
  MatC mmat = MatC::Zero(2, 2);
  mmat(0, 0) = 2.0;
  mmat(1, 1) = 1.0;
  auto quad = [&](const VecC& w) { return std::real(Complex(w.adjoint() * mmat * w)); };
  auto quad_grad = [&](const VecC& w) { return VecC(2.0 * mmat * w); };
  BallMaxResult r = maximize_over_ball(2, quad, quad_grad, {}, nullptr, opt, rng);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(std::abs(r.witness[0]) == doctest::Approx(1.0).epsilon(1e-4));

  // Linear functional: sup of Re<b, w> is ||b||.
  VecC b(3);
  b << Complex(1.0, 0.5), Complex(0.0, -1.0), Complex(0.25, 0.0);
  auto lin = [&](const VecC& w) { return re_inner(w, b); };
  auto lin_grad = [&](const VecC&) { return b; };
  BallMaxResult l = maximize_over_ball(3, lin, lin_grad, {}, nullptr, opt, rng);
  CHECK(l.value == doctest::Approx(b.norm()).epsilon(1e-6));

  // A seeded start at the optimum is never lost.
  VecC opt_dir = b / b.norm();
  BallMaxResult s = maximize_over_ball(3, lin, nullptr, {opt_dir}, nullptr, opt, rng);
  CHECK(s.value >= b.norm() - 1e-9);
}

TEST_CASE("axiom audit of a sound structure stays at machine residuals") {
  MetricStructure m = z6_structure();
  AuditBudget budget{24, 12, 2, 50, 16, 7};
  AuditReport report = audit_axioms(m, budget);
  std::vector<std::string> names;
  for (const auto& ax : report.axioms) names.push_back(ax.axiom);
  CHECK(names == std::vector<std::string>{"Conv", "Sym", "Lin1", "Lin2", "Norm", "Pos", "Pi1",
                                          "Pi2", "Complex", "BallImg", "DenseImg", "HausDist"});
  CHECK(report.max_residual() <= 1e-8);
  for (const auto& ax : report.axioms) CHECK(ax.residual >= 0.0);
  CHECK(report.by_name("Norm").axiom == "Norm");
  CHECK_THROWS_AS(report.by_name("NoSuchAxiom"), PreconditionViolation);
}

TEST_CASE("axiom audit flags a deliberately inflated sort") {
  MetricStructure bad = z6_structure({1.5, {"phi"}});
  CHECK(bad.sort("phi").inflation == doctest::Approx(1.5));
  AuditBudget budget{24, 12, 2, 50, 16, 7};
  AuditReport report = audit_axioms(bad, budget);
  CHECK(report.max_residual() >= 0.1);
  // The inflated sort holds points no pi-image can reach.
  bool caught = false;
  for (const std::string& ax : {"Conv", "BallImg", "DenseImg", "HausDist"})
    caught = caught || report.by_name(ax).residual >= 0.1;
  CHECK(caught);
}

TEST_CASE("pi application lands in the product sort") {
  MetricStructure m = z6_structure();
  Rng rng(11);
  VecC point = m.sort("em").op * rng.ball_vector(6);
  double residual = -1.0;
  VecC image = m.apply_pi("phi", "em", point, &residual);
  CHECK((image - m.sort("phi").pi_op * point).norm() < 1e-12);
  CHECK(residual >= 0.0);
  CHECK(residual < 1e-9);
  CHECK(m.sort_distance(m.product_label("phi", "em").value(), image).distance < 1e-9);
}

TEST_CASE("reconstruction recovers the full space from an invertible family") {
  MetricStructure m = z6_structure();
  ReconstructionReport r = reconstruct(m);
  CHECK(r.dim_f == 6);
  CHECK(r.nondegenerate_rank == 6);
  CHECK(r.intertwiner_residual <= 1e-8);
  CHECK(r.complex_structure_residual <= 1e-8);
  CHECK(r.gram_min_kept > 0.0);
  // The certified intertwiner is unitary.
  MatC u = r.intertwiner;
  CHECK(operator_norm(u.adjoint() * u - MatC::Identity(u.cols(), u.cols())) < 1e-10);
  for (const auto& [label, res] : r.per_sort_residual) CHECK(res <= 1e-8);
}

TEST_CASE("reconstruction quotients away the degenerate padding") {
  GroupPtr z3 = Group::cyclic(3);
  UnitaryRep rep = UnitaryRep::regular(z3).padded(2);
  CHECK(rep.ambient_dim() == 5);
  MetricStructure m = MetricStructure::build(rep, {{"em", approximate_identity(z3, 0)}});
  ReconstructionReport r = reconstruct(m);
  CHECK(r.dim_f == 3);
  CHECK(r.nondegenerate_rank == 3);
  CHECK(r.intertwiner_residual <= 1e-8);
}

TEST_CASE("reconstruction dimension follows the rank of the sample family") {
  // 0.5 d0 + 0.5 d2 on the four-element cycle kills the odd characters; the
  // reconstructed space is the surviving two-dimensional span.
  GroupPtr z4 = Group::cyclic(4);
  AlgebraElement phi =
      AlgebraElement::density(z4, {{0, Complex(0.5, 0.0)}, {2, Complex(0.5, 0.0)}});
  MetricStructure m = MetricStructure::build(UnitaryRep::regular(z4), {{"phi", phi}});
  ReconstructionReport r = reconstruct(m);
  CHECK(r.dim_f == 2);
  CHECK(r.nondegenerate_rank == 2);
  CHECK(r.intertwiner_residual <= 1e-8);
  CHECK(r.gram_max_dropped < 1e-10 * r.gram_min_kept + 1e-12);
}

TEST_CASE("one sided hausdorff distance separates nested sorts") {
  MetricStructure m = z6_structure();
  AuditBudget budget{24, 16, 2, 60, 16, 3};
  // S_phi.em = S_phi, so each side of the pair is contained in the other.
  BallMaxResult same = one_sided_hausdorff(m, "phi", "phi", budget);
  CHECK(same.value <= 1e-8);
  // S_em is the full unit ball; points of S_em far from S_phi exist because
  // pi(phi) contracts some directions strictly.
  BallMaxResult gap = one_sided_hausdorff(m, "em", "phi", budget);
  CHECK(gap.value > 0.05);
  // ...but every point of S_phi is a pi(phi)-image of a ball vector, hence in S_em.
  BallMaxResult zero = one_sided_hausdorff(m, "phi", "em", budget);
  CHECK(zero.value <= 1e-8);
}
