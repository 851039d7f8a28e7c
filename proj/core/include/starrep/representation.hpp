#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>

#include "starrep/algebra.hpp"

namespace starrep {

namespace detail {
// Storage strategy for the genuine (non-degenerate) block of a representation.
class RepKernel {
 public:
  virtual ~RepKernel() = default;
  virtual int dim() const = 0;
  virtual MatC matrix(int g) const = 0;  // unitary block for the element g
  // Integrated operator of the genuine block; default is the plain sum
  // sum_atoms c U(g) + sum_g w(g) phi(g) U(g).
  virtual MatC integrate(const AlgebraElement& a) const;
};
}  // namespace detail

// A unitary representation of a desk-scale group, plus an optional degenerate
// padding block of `padding` extra dimensions on which every integrated
// operator acts as zero.  The group itself acts only on the genuine block;
// ambient operators embed it as U(g) (+) 0.
class UnitaryRep {
 public:
  static UnitaryRep regular(GroupPtr group);
  static UnitaryRep trivial(GroupPtr group, int dim = 1);
  // One-dimensional character of an abelian kind (cyclic / circle / windowed):
  // g -> exp(2 pi i k g / n) (windowed uses exp(i theta g) with theta = 2 pi k / 256).
  static UnitaryRep character(GroupPtr group, int k);
  static UnitaryRep from_matrices(GroupPtr group, std::vector<MatC> matrices, int padding = 0,
                                  double tol = 1e-10);

  UnitaryRep direct_sum(const UnitaryRep& other) const;
  UnitaryRep padded(int extra) const;
  UnitaryRep conjugated(const MatC& u) const;  // u U(g) u^*
  // Test helper: overwrite one element's block with an arbitrary (possibly
  // non-unitary) matrix, bypassing validation.
  UnitaryRep corrupted(int element, const MatC& replacement) const;

  const GroupPtr& group() const { return group_; }
  int dim() const;                                     // genuine block
  int padding() const { return padding_; }
  int ambient_dim() const { return dim() + padding_; }

  MatC matrix(int g) const;           // genuine block, dim x dim
  MatC action_operator(int g) const;  // ambient, U(g) (+) 0
  VecC apply(int g, const VecC& xi) const;  // action_operator(g) * xi

  // Integrated operator pi(a) on the ambient space (zero on padding).
  MatC operator_of(const AlgebraElement& a) const;

  // Unitarity on all elements and the homomorphism law on sampled pairs.
  bool validate(double tol = 1e-10, std::string* why = nullptr) const;

 private:
  UnitaryRep(GroupPtr g, std::shared_ptr<const detail::RepKernel> k, int padding)
      : group_(std::move(g)), kernel_(std::move(k)), padding_(padding) {}

  GroupPtr group_;
  std::shared_ptr<const detail::RepKernel> kernel_;
  int padding_ = 0;
};

// Worst pairwise residuals of the integrated map being a contractive
// *-morphism over the sample: multiplicativity ||pi(a*b) - pi(a)pi(b)||,
// involution ||pi(a~) - pi(a)^*||, contractivity max(0, ||pi(a)|| - ||a||_1).
struct StarAuditReport {
  double mult_residual = 0.0;
  double star_residual = 0.0;
  double contract_residual = 0.0;
  int mult_witness_a = -1, mult_witness_b = -1;
  int star_witness = -1, contract_witness = -1;
  double max_residual() const;
};
StarAuditReport star_morphism_audit(const UnitaryRep& rep, std::span<const AlgebraElement> sample);

// Projector onto the non-degenerate part, computed two ways: (i) the span of
// the integrated operators' ranges over the sample (SVD) and (ii) the Cauchy
// limit of pi(e_m) along the approximate identity.  Throws NonConvergent when
// the iterate differences fail Cauchy detection before the resolution limit.
struct ProjectorPair {
  MatC svd_projector;
  MatC iterative_projector;
  int rank = 0;
  double agreement = 0.0;  // ||P_svd - P_iter||
  int iterations = 0;
};
ProjectorPair nondegenerate_projection(const UnitaryRep& rep,
                                       std::span<const AlgebraElement> sample,
                                       double cauchy_tol = 1e-8);

// Recover the group action at g from an assignment a -> pi(a).  The value of
// the defining limit on the non-degenerate part is pinned down algebraically:
// X solves X pi(e_m) = pi(delta_g * e_m) in least squares at the two finest
// levels, and the two solutions must agree (Cauchy check) within tol.
MatC recover_group_action(const std::function<MatC(const AlgebraElement&)>& l1rep,
                          const GroupPtr& group, int ambient_dim, int g, double tol = 1e-6);

// For a probability measure mu supported where ||g xi - xi|| <= r, the
// integrated vector moves by at most r:  slack = r - ||pi(mu) xi - xi||.
struct AveragedDisplacementBound {
  double displacement = 0.0;
  double slack = 0.0;
  bool holds = false;
};
AveragedDisplacementBound averaged_displacement_check(const UnitaryRep& rep,
                                                      const AlgebraElement& mu, const VecC& xi,
                                                      double r, double tol = 1e-12);

}  // namespace starrep
