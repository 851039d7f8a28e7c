#include <array>
#include <cmath>
#include <numbers>
#include <set>

#include "doctest.h"
#include "starrep/errors.hpp"
#include "starrep/kazhdan.hpp"

using namespace starrep;

namespace {

constexpr double kPi = std::numbers::pi;

// The two-dimensional sum-zero block of the permutation action, built from
// scratch: one-line images in lexicographic index order, then compression onto
// an orthonormal basis of {x : sum x = 0}.  from_matrices revalidates the
// homomorphism property, so a convention slip here fails loudly.
UnitaryRep s3_standard() {
  GroupPtr s3 = Group::symmetric3();
  const std::array<std::array<int, 3>, 6> one_line = {
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  MatC basis(3, 2);
  basis << Complex(1.0 / std::sqrt(2.0)), Complex(1.0 / std::sqrt(6.0)),
      Complex(-1.0 / std::sqrt(2.0)), Complex(1.0 / std::sqrt(6.0)), Complex(0.0),
      Complex(-2.0 / std::sqrt(6.0));
  std::vector<MatC> mats;
  for (const auto& p : one_line) {
    MatC perm = MatC::Zero(3, 3);
    for (int j = 0; j < 3; ++j) perm(p[j], j) = 1.0;
    mats.push_back(basis.adjoint() * perm * basis);
  }
  return UnitaryRep::from_matrices(s3, std::move(mats));
}

AlgebraElement smooth_probability(const GroupPtr& circle) {
  std::map<int, Complex> values;
  int n = circle->size();
  for (int g = 0; g < n; ++g) values[g] = 1.0 + std::cos(2.0 * kPi * g / n);
  AlgebraElement raw = AlgebraElement::density(circle, std::move(values));
  return raw.scaled(1.0 / raw.norm1());
}

}  // namespace

TEST_CASE("invariant projection of the regular action averages over the group") {
  GroupPtr z6 = Group::cyclic(6);
  MatC p = invariant_projection(UnitaryRep::regular(z6));
  CHECK(operator_norm(p - MatC::Constant(6, 6, Complex(1.0 / 6.0))) < 1e-12);

  // A generating subset pins the same fixed space.
  MatC p1 = invariant_projection(UnitaryRep::regular(z6), {1});
  CHECK(operator_norm(p1 - p) < 1e-10);

  // The subgroup generated by 2 fixes the two characters trivial on it.
  MatC p2 = invariant_projection(UnitaryRep::regular(z6), {2});
  CHECK(p2.trace().real() == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(operator_norm(p2 * p2 - p2) < 1e-10);
  CHECK(operator_norm(p2 - MatC(p2.adjoint())) < 1e-12);

  CHECK(operator_norm(invariant_projection(UnitaryRep::trivial(z6, 3)) - MatC::Identity(3, 3)) <
        1e-12);
  CHECK(operator_norm(invariant_projection(UnitaryRep::character(z6, 1))) < 1e-12);
}

TEST_CASE("kazhdan constant of a cycle with one step is 2 sin(pi/n)") {
  for (int n = 3; n <= 8; ++n) {
    GroupPtr zn = Group::cyclic(n);
    KazhdanResult res = kazhdan_constant(UnitaryRep::regular(zn), {1});
    double want = 2.0 * std::sin(kPi / n);
    CHECK(res.defined);
    CHECK(res.complement_dim == n - 1);
    CHECK(res.kappa == doctest::Approx(want).epsilon(1e-8));
    // |Q| = 1 collapses the spectral sandwich onto the answer itself.
    CHECK(res.lower == doctest::Approx(want).epsilon(1e-10));
    CHECK(res.upper == doctest::Approx(want).epsilon(1e-10));
    CHECK(res.lower <= res.kappa + 1e-9);
    CHECK(res.kappa <= res.upper + 1e-12);

    // The witness is a unit vector, orthogonal to the invariants, achieving kappa.
    CHECK(res.witness.norm() == doctest::Approx(1.0).epsilon(1e-10));
    MatC p = invariant_projection(UnitaryRep::regular(zn));
    CHECK((p * res.witness).norm() < 1e-8);
    UnitaryRep reg = UnitaryRep::regular(zn);
    CHECK((reg.matrix(1) * res.witness - res.witness).norm() ==
          doctest::Approx(res.kappa).epsilon(1e-9));
  }
}

TEST_CASE("kazhdan constant of the standard block is sqrt 3 on a 3-cycle") {
  UnitaryRep std_rep = s3_standard();
  // The 3-cycle acts with eigenvalues w, conj(w), so every unit vector moves
  // by exactly sqrt 3 and the sandwich is tight.
  KazhdanResult res = kazhdan_constant(std_rep, {3});
  CHECK(res.defined);
  CHECK(res.complement_dim == 2);
  CHECK(res.kappa == doctest::Approx(std::sqrt(3.0)).epsilon(1e-10));
  CHECK(res.lower == doctest::Approx(std::sqrt(3.0)).epsilon(1e-10));
  CHECK(res.upper == doctest::Approx(std::sqrt(3.0)).epsilon(1e-10));

  // A single transposition fixes a line, so its defect can be driven to zero.
  KazhdanResult weak = kazhdan_constant(std_rep, {2});
  CHECK(weak.defined);
  CHECK(weak.lower == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(weak.kappa < 1e-8);
}

TEST_CASE("kazhdan constant of the full shift action balances sign and standard parts") {
  // Against {transposition, 3-cycle} the optimum mixes the sign component
  // (moved only by the transposition, norm 2) with a transposition-fixed
  // standard vector (moved only by the 3-cycle, norm sqrt 3); equalizing
  // 4a = 3(1-a) gives kappa^2 = 12/7.
  GroupPtr s3 = Group::symmetric3();
  KazhdanResult res = kazhdan_constant(UnitaryRep::regular(s3), {2, 3});
  double want = std::sqrt(12.0 / 7.0);
  CHECK(res.defined);
  CHECK(res.complement_dim == 5);
  CHECK(res.kappa == doctest::Approx(want).epsilon(1e-6));
  CHECK(res.lower <= res.kappa + 1e-9);
  CHECK(res.kappa <= res.upper + 1e-12);

  // The same balance appears on the six-cycle against {2, 3}.
  GroupPtr z6 = Group::cyclic(6);
  KazhdanResult res6 = kazhdan_constant(UnitaryRep::regular(z6), {2, 3});
  CHECK(res6.kappa == doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("kazhdan constant is invariant under conjugation of the representation") {
  GroupPtr z6 = Group::cyclic(6);
  UnitaryRep reg = UnitaryRep::regular(z6);
  Rng rng(31);
  UnitaryRep rotated = reg.conjugated(random_unitary(6, rng));
  KazhdanResult a = kazhdan_constant(reg, {1});
  KazhdanResult b = kazhdan_constant(rotated, {1});
  CHECK(std::abs(a.kappa - b.kappa) <= 1e-9);
  CHECK(std::abs(a.lambda_min - b.lambda_min) <= 1e-9);
}

TEST_CASE("kazhdan constant is undefined when everything is invariant") {
  GroupPtr z6 = Group::cyclic(6);
  KazhdanResult res = kazhdan_constant(UnitaryRep::trivial(z6, 2), {1});
  CHECK(!res.defined);
  CHECK(res.kappa == 0.0);
  CHECK(res.complement_dim == 0);

  CHECK_THROWS_AS(kazhdan_constant(UnitaryRep::regular(z6), {}), PreconditionViolation);
  CHECK_THROWS_AS(kazhdan_constant(UnitaryRep::regular(z6), {6}), PreconditionViolation);
}

TEST_CASE("mesh bruteforce agrees with the optimizer on tiny complements") {
  // Two characters of the 4-cycle: the optimum sits entirely on the slow one.
  GroupPtr z4 = Group::cyclic(4);
  UnitaryRep two_chars = UnitaryRep::character(z4, 1).direct_sum(UnitaryRep::character(z4, 2));
  KazhdanResult opt = kazhdan_constant(two_chars, {1});
  MeshResult mesh = kazhdan_mesh_bruteforce(two_chars, {1});
  double want = std::sqrt(2.0);
  CHECK(opt.kappa == doctest::Approx(want).epsilon(1e-6));
  CHECK(mesh.value == doctest::Approx(want).epsilon(1e-6));
  CHECK(std::abs(opt.kappa - mesh.value) <= 1e-4);

  UnitaryRep std_rep = s3_standard();
  KazhdanResult opt3 = kazhdan_constant(std_rep, {2, 3});
  MeshResult mesh3 = kazhdan_mesh_bruteforce(std_rep, {2, 3});
  CHECK(opt3.kappa == doctest::Approx(std::sqrt(3.0)).epsilon(1e-6));
  CHECK(std::abs(opt3.kappa - mesh3.value) <= 1e-4);

  // The scan refuses complements beyond two complex dimensions.
  GroupPtr z6 = Group::cyclic(6);
  CHECK_THROWS_AS(kazhdan_mesh_bruteforce(UnitaryRep::regular(z6), {1}), PreconditionViolation);
  CHECK_THROWS_AS(kazhdan_mesh_bruteforce(UnitaryRep::trivial(z6), {1}), PreconditionViolation);
}

TEST_CASE("greedy covers factor every element through a certified piece") {
  GroupPtr circle = Group::circle_discretized(64);
  AlgebraElement phi = smooth_probability(circle);
  std::vector<int> k_set = circle->elements();
  CoverFamily family = build_cover(circle, k_set, phi, 3);
  CHECK(family.levels.size() == 4);
  for (const Cover& cover : family.levels) {
    double scale = std::pow(2.0, -cover.level);
    std::set<int> seen;
    for (const auto& piece : cover.pieces) {
      CHECK(!piece.members.empty());
      for (int f : piece.members) {
        CHECK(seen.insert(f).second);  // pieces are disjoint
        int h = circle->mul(circle->inverse(piece.center), f);
        CHECK(circle->mul(piece.center, h) == f);  // factorization f = c h
        CHECK(rho_seminorm(phi, h) < scale);       // h is genuinely small
      }
    }
    CHECK(seen.size() == k_set.size());  // and exhaustive
  }
  // Finer levels need more pieces.
  CHECK(family.levels.front().pieces.size() <= family.levels.back().pieces.size());

  CHECK_THROWS_AS(build_cover(circle, k_set, phi, 5), UncoverableAtResolution);
  CHECK_THROWS_AS(build_cover(circle, {}, phi, 2), PreconditionViolation);
  CHECK_THROWS_AS(build_cover(circle, {64}, phi, 2), PreconditionViolation);
  GroupPtr z6 = Group::cyclic(6);
  CHECK_THROWS_AS(build_cover(z6, {0}, phi, 2), MismatchError);
}

TEST_CASE("phi predicate vanishes on invariant vectors with an exact tail bound") {
  GroupPtr circle = Group::circle_discretized(64);
  UnitaryRep reg = UnitaryRep::regular(circle);
  AlgebraElement phi = smooth_probability(circle);
  CoverFamily family = build_cover(circle, circle->elements(), phi, 4);

  VecC uniform = VecC::Constant(64, Complex(1.0 / 8.0, 0.0));  // unit, invariant
  PhiInterval inv = phi_predicate(reg, family, uniform);
  CHECK(inv.value == 0.0);
  CHECK(inv.truncation_level == 4);
  CHECK(inv.hi == doctest::Approx(std::pow(2.0, -4)).epsilon(1e-12));

  // Covering just {identity, antipode} forces the antipode to center its own
  // piece at every level; a pure frequency-one vector is flipped there.
  CoverFamily two_points = build_cover(circle, {0, 32}, phi, 4);
  VecC mode(64);
  for (int g = 0; g < 64; ++g)
    mode(g) = Complex(std::cos(2.0 * kPi * g / 64), std::sin(2.0 * kPi * g / 64)) / 8.0;
  PhiInterval moved = phi_predicate(reg, two_points, mode);
  CHECK(moved.value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(moved.hi == doctest::Approx(moved.value + std::pow(2.0, -4)).epsilon(1e-12));

  VecC bad = VecC::Zero(5);
  CHECK_THROWS_AS(phi_predicate(reg, family, bad), MismatchError);
}

TEST_CASE("phi invariance forward implication certifies small displacements") {
  GroupPtr circle = Group::circle_discretized(64);
  UnitaryRep reg = UnitaryRep::regular(circle);
  AlgebraElement phi = smooth_probability(circle);
  CoverFamily family = build_cover(circle, circle->elements(), phi, 4);

  // Exactly invariant zeta at half scale: Phi is 0 and the tail bound
  // 2^-4 * 0.5 certifiably clears the threshold 2^-4 at m = 1.
  VecC zeta = VecC::Constant(64, Complex(0.5 / 8.0, 0.0));
  PhiInvarianceReport rep = phi_invariance_forward(reg, family, zeta, 1);
  CHECK(rep.applicable);
  CHECK(rep.phi_hi == doctest::Approx(0.5 * std::pow(2.0, -4)).epsilon(1e-12));
  CHECK(rep.threshold == doctest::Approx(std::pow(2.0, -4)).epsilon(1e-15));
  CHECK(rep.holds);
  CHECK(rep.displacement <= 1e-12);
  CHECK(rep.slack == doctest::Approx(0.5).epsilon(1e-9));

  // A generic unit vector has Phi of order one: not applicable, but the
  // factorization bound still dominates the direct displacement.
  Rng rng(13);
  VecC random = rng.unit_vector(64);
  PhiInvarianceReport noisy = phi_invariance_forward(reg, family, random, 1);
  CHECK(!noisy.applicable);
  CHECK(noisy.displacement <= noisy.bound_via_cover + 1e-12);

  VecC big = VecC::Constant(64, Complex(0.25, 0.0));  // norm 2
  CHECK_THROWS_AS(phi_invariance_forward(reg, family, big, 1), PreconditionViolation);
  CHECK_THROWS_AS(phi_invariance_forward(reg, family, zeta, -1), PreconditionViolation);
  CHECK_THROWS_AS(phi_invariance_forward(reg, family, zeta, 4), PreconditionViolation);
}

TEST_CASE("fix distance is controlled by displacement over kappa") {
  GroupPtr z6 = Group::cyclic(6);
  UnitaryRep reg = UnitaryRep::regular(z6);
  double kappa = 2.0 * std::sin(kPi / 6.0);  // exactly 1

  // A pure nontrivial character sits at distance 1 from the invariants and
  // moves by exactly kappa: the bound is met with equality.
  VecC chi(6);
  for (int g = 0; g < 6; ++g) {
    double t = 2.0 * kPi * g / 6.0;
    chi(g) = Complex(std::cos(t), std::sin(t)) / std::sqrt(6.0);
  }
  FixDistanceResult sharp = fix_distance(reg, {1}, chi, kappa);
  CHECK(sharp.distance == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sharp.delta == doctest::Approx(kappa).epsilon(1e-10));
  CHECK(sharp.bound == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sharp.holds);

  // Generic vectors respect the bound, and the projected vector is invariant.
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    VecC xi = rng.unit_vector(6);
    FixDistanceResult res = fix_distance(reg, {1}, xi, kappa);
    CHECK(res.holds);
    for (int g : z6->elements())
      CHECK((reg.matrix(g) * res.projected - res.projected).norm() < 1e-10);
  }

  // With a dominator the projected vector keeps its certified membership.
  AlgebraElement phi = AlgebraElement::density(
      z6, {{0, Complex(0.5, 0.0)}, {1, Complex(0.3, 0.0)}, {2, Complex(0.2, 0.0)}});
  VecC zeta = rng.ball_vector(6);
  VecC xi = reg.operator_of(phi) * zeta;
  FixDistanceResult dom = fix_distance(reg, {1}, xi, kappa, phi);
  CHECK(dom.holds);
  CHECK(dom.membership < 1e-9);

  CHECK_THROWS_AS(fix_distance(reg, {1}, chi, 0.0), PreconditionViolation);
  CHECK_THROWS_AS(fix_distance(reg, {}, chi, kappa), PreconditionViolation);
  VecC wrong = VecC::Zero(4);
  CHECK_THROWS_AS(fix_distance(reg, {1}, wrong, kappa), MismatchError);
}
