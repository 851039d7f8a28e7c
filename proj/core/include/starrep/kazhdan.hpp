#pragma once

#include <optional>

#include "starrep/representation.hpp"

namespace starrep {

// Everything in this header works on the genuine (non-degenerate) block of
// the representation: padding carries no group action, so it has no say in
// invariance.  Vectors are rep.dim()-dimensional.

// Orthogonal projector onto the common fixed space of U(g).  `generating`
// empty means all group elements; a proper subset is the caller's promise
// that it generates.
MatC invariant_projection(const UnitaryRep& rep, const std::vector<int>& generating = {});

struct KazhdanOptions {
  int multistarts = 64;
  int iters = 200;
  double step0 = 0.5;
  std::uint64_t seed = 0;
};

// kappa(Q) = inf over unit vectors orthogonal to the invariants of
// max_{g in Q} ||U(g) xi - xi||, with the spectral two-sided bracket
// sqrt(lambda_min / |Q|) <= kappa <= sqrt(lambda_min) from the averaged
// defect operator sum_{g in Q} (2I - U(g) - U(g)*) on the complement.  The
// bottom eigenvectors are always included among the candidates, so the
// reported value never exceeds the bracket's upper end.
struct KazhdanResult {
  bool defined = false;  // false when every vector is invariant
  double kappa = 0.0;
  double lower = 0.0, upper = 0.0;
  double lambda_min = 0.0;
  int complement_dim = 0;
  VecC witness;  // unit minimizer, genuine block
};
KazhdanResult kazhdan_constant(const UnitaryRep& rep, const std::vector<int>& q,
                               const KazhdanOptions& options);
KazhdanResult kazhdan_constant(const UnitaryRep& rep, const std::vector<int>& q);

// Exhaustive cross-check for tiny complements (real dimension <= 4): phase
// reduction to a 2-parameter mesh plus a shrinking-step polish.
struct MeshResult {
  double value = 0.0;
  VecC witness;
};
MeshResult kazhdan_mesh_bruteforce(const UnitaryRep& rep, const std::vector<int>& q,
                                   int steps = 96);

// Scale-indexed greedy covers of a finite set K: at level m the piece around
// a center c collects the k in K with rho_phi(c^-1 k) < 2^-m, centers taken
// in canonical order among the uncovered.  Levels run 0..max_level.
struct CoverPiece {
  int center;
  std::vector<int> members;
};
struct Cover {
  int level = 0;
  std::vector<CoverPiece> pieces;
};
struct CoverFamily {
  std::vector<int> set;
  AlgebraElement phi;
  std::vector<Cover> levels;
};
CoverFamily build_cover(const GroupPtr& group, const std::vector<int>& k_set,
                        const AlgebraElement& phi, int max_level);

// Phi(xi) = sup_m 2^-m max_{centers c at level m} ||pi(c) xi - xi||,
// truncated at the deepest built level M with the certified tail bound
// 2^-M ||xi||: the untruncated value lies in [value, hi].
struct PhiInterval {
  double value = 0.0;
  double hi = 0.0;
  int truncation_level = 0;
};
PhiInterval phi_predicate(const UnitaryRep& rep, const CoverFamily& cover, const VecC& xi);

// Forward implication at scale m, for xi = pi(phi) zeta with ||zeta|| <= 1:
// whenever the truncated Phi is certifiably below 2^-(2m+2), every f in K
// moves xi by less than 2^-m.  The cover factorization f = c h gives the
// intermediate bound that proves it.
struct PhiInvarianceReport {
  bool applicable = false;
  bool holds = false;
  double phi_hi = 0.0;
  double threshold = 0.0;       // 2^-(2m+2)
  double displacement = 0.0;    // max_{f in K} ||pi(f) xi - xi||
  double bound_via_cover = 0.0;
  double slack = 0.0;           // 2^-m - displacement when applicable
};
PhiInvarianceReport phi_invariance_forward(const UnitaryRep& rep, const CoverFamily& cover,
                                           const VecC& zeta, int m);

// Distance to the invariant vectors against the displacement over Q:
// ||xi - P xi|| <= max_{g in Q} ||U(g) xi - xi|| / kappa.  When phi is given
// and xi lies in pi(phi) . Ball, the projected vector is certified to stay
// in that set.
struct FixDistanceResult {
  double distance = 0.0;
  double delta = 0.0;
  double bound = 0.0;
  bool holds = false;
  VecC projected;
  double membership = 0.0;  // distance of P xi to pi(phi) . Ball (when phi given)
};
FixDistanceResult fix_distance(const UnitaryRep& rep, const std::vector<int>& q, const VecC& xi,
                               double kappa, const std::optional<AlgebraElement>& phi = std::nullopt,
                               double tol = 1e-9);

}  // namespace starrep
