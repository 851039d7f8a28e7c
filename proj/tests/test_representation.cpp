#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "starrep/errors.hpp"
#include "starrep/representation.hpp"
#include "test_helpers.hpp"

using namespace starrep;
using testutil::random_element;

namespace {

std::vector<AlgebraElement> sample_corpus(const GroupPtr& group, int count) {
  std::vector<AlgebraElement> out;
  for (int k = 0; k < count; ++k) out.push_back(random_element(group, 100 + k, 3, false));
  out.push_back(approximate_identity(group, 0));
  return out;
}

}  // namespace

TEST_CASE("regular representation permutes basis vectors by left translation") {
  GroupPtr z4 = Group::cyclic(4);
  UnitaryRep reg = UnitaryRep::regular(z4);
  CHECK(reg.dim() == 4);
  CHECK(reg.validate());
  // U(g) e_h = e_{gh}: check on every pair by matrix entry.
  for (int g = 0; g < 4; ++g)
    for (int h = 0; h < 4; ++h) {
      VecC basis = VecC::Zero(4);
      basis(h) = 1.0;
      VecC moved = reg.apply(g, basis);
      CHECK(std::abs(moved(z4->mul(g, h)) - 1.0) < 1e-15);
    }
}

TEST_CASE("integrated operator equals the naive weighted sum of action matrices") {
  for (const GroupPtr& g : {Group::cyclic(6), Group::symmetric3()}) {
    UnitaryRep reg = UnitaryRep::regular(g);
    for (std::uint64_t seed : {3, 4, 5}) {
      AlgebraElement a = random_element(g, seed, 4, false);
      MatC naive = MatC::Zero(reg.dim(), reg.dim());
      for (int x : g->elements())
        naive += g->haar_weight(x) * (a.density_at(x) + a.atom_at(x) / g->haar_weight(x)) *
                 reg.matrix(x);
      CHECK(operator_norm(reg.operator_of(a) - naive) < 1e-12);
    }
  }
}

TEST_CASE("characters are the expected phases and integrate to fourier coefficients") {
  GroupPtr z6 = Group::cyclic(6);
  UnitaryRep chi = UnitaryRep::character(z6, 1);
  CHECK(chi.dim() == 1);
  for (int g = 0; g < 6; ++g) {
    Complex expected = std::exp(Complex(0, 2.0 * std::numbers::pi * g / 6.0));
    CHECK(std::abs(chi.matrix(g)(0, 0) - expected) < 1e-14);
  }
  AlgebraElement a = AlgebraElement::density(z6, {{0, 1.0}, {1, 2.0}});
  Complex coeff = chi.matrix(0)(0, 0) * 1.0 + chi.matrix(1)(0, 0) * 2.0;
  CHECK(std::abs(chi.operator_of(a)(0, 0) - coeff) < 1e-14);
  CHECK_THROWS_AS(UnitaryRep::character(Group::symmetric3(), 1), MismatchError);
}

TEST_CASE("direct sums, padding, and conjugation keep unitarity and dimensions") {
  GroupPtr z5 = Group::cyclic(5);
  UnitaryRep a = UnitaryRep::character(z5, 1);
  UnitaryRep b = UnitaryRep::character(z5, 2);
  UnitaryRep sum = a.direct_sum(b).padded(2);
  CHECK(sum.dim() == 2);
  CHECK(sum.padding() == 2);
  CHECK(sum.ambient_dim() == 4);
  CHECK(sum.validate());
  // Ambient action is U(g) (+) 0.
  MatC op = sum.action_operator(1);
  CHECK(operator_norm(op.bottomRightCorner(2, 2)) < 1e-15);
  CHECK(operator_norm(op.topLeftCorner(2, 2) - sum.matrix(1)) < 1e-15);

  Rng rng(9);
  UnitaryRep conj = sum.conjugated(random_unitary(2, rng));
  CHECK(conj.validate());
  CHECK(conj.dim() == 2);
  CHECK_THROWS_AS(sum.conjugated(MatC::Identity(3, 3)), MismatchError);
}

TEST_CASE("from_matrices validates unitarity and the homomorphism law") {
  GroupPtr z2 = Group::cyclic(2);
  std::vector<MatC> good = {MatC::Identity(2, 2), MatC::Identity(2, 2)};
  good[1] << 0, 1, 1, 0;
  CHECK(UnitaryRep::from_matrices(z2, good).validate());
  std::vector<MatC> scaled = {MatC::Identity(2, 2), 2.0 * MatC::Identity(2, 2)};
  CHECK_THROWS_AS(UnitaryRep::from_matrices(z2, scaled), PreconditionViolation);
  CHECK_THROWS_AS(UnitaryRep::from_matrices(z2, {MatC::Identity(2, 2)}), MismatchError);
}

TEST_CASE("star morphism audit is clean on honest reps and flags corruption") {
  GroupPtr s3 = Group::symmetric3();
  UnitaryRep reg = UnitaryRep::regular(s3);
  std::vector<AlgebraElement> corpus = sample_corpus(s3, 6);
  StarAuditReport clean = star_morphism_audit(reg, corpus);
  CHECK(clean.max_residual() < 1e-10);

  MatC bad = reg.matrix(1);
  bad(0, 0) += 0.1;
  StarAuditReport flagged = star_morphism_audit(reg.corrupted(1, bad), corpus);
  CHECK(flagged.max_residual() >= 0.01);
}

TEST_CASE("nondegenerate projection strips padding two independent ways") {
  GroupPtr z4 = Group::cyclic(4);
  UnitaryRep padded = UnitaryRep::regular(z4).padded(3);
  std::vector<AlgebraElement> corpus = sample_corpus(z4, 5);
  ProjectorPair pair = nondegenerate_projection(padded, corpus);
  CHECK(pair.rank == 4);
  CHECK(pair.agreement < 1e-7);
  MatC expected = MatC::Zero(7, 7);
  expected.topLeftCorner(4, 4) = MatC::Identity(4, 4);
  CHECK(operator_norm(pair.svd_projector - expected) < 1e-8);
}

TEST_CASE("group action is recoverable from the integrated assignment") {
  GroupPtr z6 = Group::cyclic(6);
  UnitaryRep reg = UnitaryRep::regular(z6).padded(2);
  auto l1rep = [&](const AlgebraElement& a) { return reg.operator_of(a); };
  for (int g : {1, 3, 5}) {
    MatC recovered = recover_group_action(l1rep, z6, reg.ambient_dim(), g);
    // The action is pinned down on the non-degenerate block only.
    CHECK(operator_norm(recovered.topLeftCorner(6, 6) - reg.matrix(g)) < 1e-8);
  }
}

TEST_CASE("averaged probability measures move vectors no farther than the support does") {
  GroupPtr z8 = Group::cyclic(8);
  UnitaryRep reg = UnitaryRep::regular(z8);
  Rng rng(21);
  for (int trial = 0; trial < 25; ++trial) {
    VecC xi = rng.unit_vector(8);
    AlgebraElement mu = AlgebraElement::density(z8, {{0, 0.25}, {1, 0.5}, {7, 0.25}});
    double r = 0.0;
    for (int g : mu.support()) r = std::max(r, (reg.apply(g, xi) - xi).norm());
    AveragedDisplacementBound bound = averaged_displacement_check(reg, mu, xi, r);
    CHECK(bound.holds);
    CHECK(bound.slack >= -1e-12);
    CHECK(bound.displacement <= r + 1e-12);
  }
}

TEST_CASE("averaged displacement rejects inadmissible measures") {
  GroupPtr z4 = Group::cyclic(4);
  UnitaryRep reg = UnitaryRep::regular(z4);
  VecC xi = VecC::Zero(4);
  xi(0) = 1.0;
  AlgebraElement not_prob = AlgebraElement::density(z4, {{0, 0.5}});
  CHECK_THROWS_AS(averaged_displacement_check(reg, not_prob, xi, 2.0), PreconditionViolation);
  AlgebraElement negative = AlgebraElement::density(z4, {{0, 1.5}, {1, -0.5}});
  CHECK_THROWS_AS(averaged_displacement_check(reg, negative, xi, 2.0), PreconditionViolation);
  // Support point moving farther than r is rejected as an unusable premise.
  AlgebraElement shifted = AlgebraElement::density(z4, {{1, 1.0}});
  CHECK_THROWS_AS(averaged_displacement_check(reg, shifted, xi, 1e-6), PreconditionViolation);
}
