#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "starrep/representation.hpp"

namespace starrep {

// One sort S_a = (sort operator) . (closed unit ball).  `pi_op` is the
// integrated operator pi(a) of the underlying representation and is what the
// function symbol pi_a multiplies by; `op` defines the point set of the sort
// and equals pi_op unless the sort was deliberately inflated to build a
// counterexample structure.
struct Sort {
  std::string label;
  AlgebraElement element;
  MatC pi_op;
  MatC op;
  double radius_bound = 0.0;  // ||a||_1
  double inflation = 1.0;
  BallLeastSquares solver;    // SVD of `op`, shared by every distance query
};

struct SortDistanceResult {
  double distance = 0.0;
  VecC point;  // nearest point of the sort
  VecC coeff;  // ball witness z with point = op z
};

// Multistart projected-ascent maximizer over the complex unit ball (or a
// product of balls via a custom projection).  The gradient callback, when
// given, returns an ascent direction g with first-order change Re<g, dw>.
struct BallMaxOptions {
  int multistarts = 32;
  int iters = 60;
  double step0 = 0.4;
};
struct BallMaxResult {
  double value = 0.0;
  VecC witness;
};
BallMaxResult maximize_over_ball(int dim, const std::function<double(const VecC&)>& fn,
                                 const std::function<VecC(const VecC&)>& grad,
                                 const std::vector<VecC>& extra_starts,
                                 const std::function<void(VecC&)>& project,
                                 const BallMaxOptions& opt, Rng& rng);

// The multi-sorted structure M(E, pi) over a finite sample set A0 of algebra
// elements: the generators, their involutions, and all pairwise products
// (depth 2), deduplicated by content.  The predicate is [xi, zeta] =
// Re <xi, zeta> on the ambient space.
class MetricStructure {
 public:
  struct Options {
    double inflate_factor = 1.0;
    std::vector<std::string> inflate_labels;  // sorts to inflate (counterexamples)
  };

  static MetricStructure build(UnitaryRep rep,
                               const std::vector<std::pair<std::string, AlgebraElement>>& generators,
                               const Options& options);
  static MetricStructure build(UnitaryRep rep,
                               const std::vector<std::pair<std::string, AlgebraElement>>& generators);

  const UnitaryRep& rep() const { return rep_; }
  int ambient_dim() const { return rep_.ambient_dim(); }
  const std::vector<Sort>& sorts() const { return sorts_; }
  const Sort& sort(const std::string& label) const;  // throws MissingSort
  bool has_sort(const std::string& label) const;
  std::vector<std::string> labels() const;
  const std::vector<std::string>& generator_labels() const { return generator_labels_; }

  // Label of the product sort S_ab / the involution a*; empty when absent.
  std::optional<std::string> product_label(const std::string& a, const std::string& b) const;
  std::optional<std::string> involution_label(const std::string& a) const;

  double predicate(const VecC& xi, const VecC& zeta) const { return re_inner(xi, zeta); }

  SortDistanceResult sort_distance(const std::string& label, const VecC& xi) const;

  // pi_a applied to a point of S_b, landing in S_ab.  `membership_residual`
  // (if non-null) receives the distance of the image to the target sort.
  VecC apply_pi(const std::string& a, const std::string& b, const VecC& point,
                double* membership_residual = nullptr) const;

 private:
  MetricStructure() = default;
  UnitaryRep rep_ = UnitaryRep::trivial(Group::cyclic(1));
  std::vector<Sort> sorts_;
  std::map<std::string, int> index_;
  std::vector<std::string> generator_labels_;
  std::map<std::pair<std::string, std::string>, std::string> products_;
  std::map<std::string, std::string> involutions_;
};

SortDistanceResult sort_distance(const Sort& s, const VecC& xi);

struct AuditBudget {
  int samples = 64;       // draws per universally quantified axiom
  int multistarts = 32;   // starts per sup-inf instance
  int tuple_len = 3;      // max tuple length for (Pos)/(Pi1)/(BallImg)
  int iters = 60;         // ascent iterations per start
  int pair_cap = 40;      // sampled sort pairs/combos per sup-inf axiom
  std::uint64_t seed = 0;
};

struct AxiomResult {
  std::string axiom;
  double residual = 0.0;
  std::vector<std::pair<std::string, VecC>> witness;  // sort label -> point
  double certificate = 0.0;  // inner value recomputed at the witness
  std::string note;
  int starts = 0;
  std::uint64_t seed = 0;
};

struct AuditReport {
  std::vector<AxiomResult> axioms;  // fixed order, all twelve
  AuditBudget budget;
  double max_residual() const;
  const AxiomResult& by_name(const std::string& axiom) const;
};

// Numerical audit of the twelve axioms.  Residuals are clamped at zero: a
// sound structure reports ~0 everywhere, a corrupted one reports how far the
// worst found violation reaches.
AuditReport audit_axioms(const MetricStructure& m, const AuditBudget& budget);

// sup_{xi in S_a} inf_{zeta in S_b} ||zeta - xi||, with its witness.
BallMaxResult one_sided_hausdorff(const MetricStructure& m, const std::string& a,
                                  const std::string& b, const AuditBudget& budget);

struct ReconstructionReport {
  int dim_f = 0;               // rank of the Gram matrix after kernel truncation
  int nondegenerate_rank = 0;  // rank of the sample-range projector
  double intertwiner_residual = 0.0;
  double complex_structure_residual = 0.0;
  double gram_min_kept = 0.0;
  double gram_max_dropped = 0.0;
  MatC intertwiner;  // unitary from E^pi coordinates to F coordinates
  std::vector<std::pair<std::string, double>> per_sort_residual;
};

// Rebuild the Hilbert space F from predicate data alone (Gram matrix of a
// spanning family, kernel truncation, induced operators, complex structure
// from the i-symbol) and certify a unitary intertwiner against the
// representation's non-degenerate part.  Throws ReconstructionMismatch when
// the dimensions disagree or no intertwiner meets `tol`.
ReconstructionReport reconstruct(const MetricStructure& m, double rank_rel_tol = 1e-10,
                                 double tol = 1e-8);

}  // namespace starrep
