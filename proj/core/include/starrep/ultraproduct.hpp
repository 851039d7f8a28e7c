#pragma once

#include <functional>
#include <iosfwd>
#include <optional>

#include "starrep/representation.hpp"

namespace starrep {

// Index schedule along which sequence limits are probed.
using Schedule = std::vector<int>;
Schedule default_schedule();  // {2, 4, 8, ..., 256}

// A finite stand-in for a limit along an ultrafilter.  `value` is the last
// iterate; the limit counts as converged when the last three consecutive
// differences all stay within cauchy_tol / 4.  When it does not converge,
// [lo, hi] brackets the tail (final half of the schedule): any ultrafilter
// limit of the sampled subsequence lies in that interval.
struct LimitInfo {
  bool converged = false;
  double value = 0.0;
  double lo = 0.0, hi = 0.0;
};

LimitInfo ultralimit(const std::function<double(int)>& f, const Schedule& schedule,
                     double cauchy_tol = 0.05);
// Throwing variant used where a definite limit is required.
double ultralimit_strict(const std::function<double(int)>& f, const Schedule& schedule,
                         double cauchy_tol = 0.05);
Complex ultralimit_complex_strict(const std::function<Complex(int)>& f, const Schedule& schedule,
                                  double cauchy_tol = 0.05);

// A sequence of representations of one fixed group, indexed by i >= 0.
struct RepSequence {
  GroupPtr group;
  std::function<UnitaryRep(int)> at;
  std::string name;
};

// A sequence of vectors xi_i in the spaces of `reps`.  When the vectors were
// produced as xi_i = pi_i(phi) zeta_i the pushforward records phi and zeta so
// the displacement bound ||pi(g) xi - xi|| <= rho_phi(g) ||zeta|| can be
// audited.
struct VectorSequence {
  RepSequence reps;
  std::function<VecC(int)> at;
  std::string name;
  std::optional<AlgebraElement> dominator;
  std::function<VecC(int)> base;
};

VectorSequence pushforward(RepSequence reps, const AlgebraElement& phi,
                           std::function<VecC(int)> zeta, std::string name);

enum class Verdict { Holds, Fails, Inconclusive };
std::string to_string(Verdict v);

struct CriterionEvidence {
  std::string criterion;
  std::vector<LimitInfo> by_level;  // levels 0 .. resolution
  Verdict verdict = Verdict::Inconclusive;
  std::string note;
};

struct ClassifyOptions {
  Schedule schedule;  // empty -> default_schedule()
  double cauchy_tol = 0.05;
  double tol = 1e-3;
};

// Three ways a limit vector can sit over the group action, each probed level
// by level over the neighborhood filtration:
//   pointwise-invariance:   sup_{g in U_m} ultralimit_i ||pi_i(g) xi_i - xi_i||
//   approximate-identity:   ultralimit_i ||pi_i(e_m) xi_i - xi_i||
//   uniform-invariance:     sup over the whole sampled sequence of the
//                           displacement sup_{g in U_m}.
// A criterion holds when the finest-level upper bound falls below tol, fails
// when the lower bound clears tol and the levels have stopped decreasing, and
// stays inconclusive otherwise.  Implications between criteria are enforced
// by demotion (never silent upgrades): a verdict contradicting an implication
// becomes Inconclusive with a note.
struct ClassificationReport {
  CriterionEvidence pointwise;
  CriterionEvidence approx_identity;
  CriterionEvidence uniform;
  int resolution = 0;
  ClassifyOptions options;
  bool agree() const;  // all three verdicts coincide
};

ClassificationReport classify_vector(const VectorSequence& seq, const ClassifyOptions& options);
ClassificationReport classify_vector(const VectorSequence& seq);

// Worst violation of the declared domination bound at one level; requires the
// sequence to carry dominator data.
double domination_residual(const VectorSequence& seq, int level, const Schedule& schedule);

// Greedy cover of the group by cells {x : rho(center^-1 x) < epsilon},
// centers chosen in canonical element order among uncovered points.  Throws
// ResolutionExceeded when even the finest neighborhood does not fit inside
// {rho < epsilon} (the scale cannot be resolved).
struct PartitionCell {
  int center;
  std::vector<int> members;
};
struct Partition {
  std::vector<PartitionCell> cells;
  double epsilon = 0.0;
};
Partition partition_of_unity(const GroupPtr& group, const std::function<double(int)>& rho,
                             double epsilon);
AlgebraElement cell_indicator(const GroupPtr& group, const PartitionCell& cell);

// Piecewise displacement estimate: split phi over the cells of the partition
// built from rho_psi, bound each piece by the center displacement plus
// epsilon ||zeta||, and compare against the direct ||pi(phi) xi - xi|| for
// xi = pi(psi) zeta.  Every per-piece bound is certified by a support check.
struct PartitionBoundReport {
  Partition partition;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  std::vector<AveragedDisplacementBound> pieces;
};
PartitionBoundReport partition_bound_check(const UnitaryRep& rep, const AlgebraElement& phi,
                                           const AlgebraElement& psi, const VecC& zeta,
                                           double epsilon, double tol = 1e-9);

// Entrywise limit of the representation matrices and the vectors.  Demands
// actual convergence (throws NonConvergent) and a constant dimension, then
// re-validates the limit as a representation.
struct NaiveUltraproduct {
  UnitaryRep rep;
  VecC xi;
};
NaiveUltraproduct naive_ultraproduct(const VectorSequence& seq, const Schedule& schedule,
                                     double cauchy_tol = 0.05);

void write_evidence_csv(const ClassificationReport& report, std::ostream& out);

}  // namespace starrep
