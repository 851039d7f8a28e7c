#pragma once

#include <iosfwd>
#include <map>

#include "starrep/group.hpp"

namespace starrep {

// An element of the measure algebra at desk scale: a finite atomic part
// (Dirac combination) plus a finitely supported density integrated against
// the Haar weights.  On discrete kinds every atom is folded into the density
// (delta_g corresponds to the density haar_weight(g)^-1 at g), so atoms stay
// nonempty only on the discretized circle, where a point mass is kept honest
// as a measure rather than a grid density.
//
// norm1() is total variation: sum of |atom coefficients| plus the Haar
// integral of |density|.
class AlgebraElement {
 public:
  static AlgebraElement zero(GroupPtr group);
  static AlgebraElement dirac(GroupPtr group, int element, Complex coeff = 1.0);
  static AlgebraElement density(GroupPtr group, std::map<int, Complex> values);
  static AlgebraElement uniform_density(GroupPtr group);  // probability, mass 1

  const GroupPtr& group() const { return group_; }
  const std::map<int, Complex>& atoms() const { return atoms_; }
  const std::map<int, Complex>& density_values() const { return density_; }
  Complex density_at(int g) const;
  Complex atom_at(int g) const;
  bool empty() const { return atoms_.empty() && density_.empty(); }

  double norm1() const;
  Complex total_mass() const;  // integral of the element (atoms + density)
  bool nonnegative(double tol = 0.0) const;
  std::vector<int> support() const;  // atoms then density, ascending, merged

  AlgebraElement operator+(const AlgebraElement& rhs) const;
  AlgebraElement operator-(const AlgebraElement& rhs) const;
  AlgebraElement operator-() const;
  AlgebraElement scaled(Complex factor) const;

  AlgebraElement involution() const;           // a*(g) = modular(g^-1) conj(a(g^-1))
  AlgebraElement left_translate(int f) const;  // delta_f * a
  AlgebraElement right_translate(int h) const; // a * delta_h

 private:
  explicit AlgebraElement(GroupPtr g) : group_(std::move(g)) {}
  void fold_and_prune();

  GroupPtr group_;
  std::map<int, Complex> atoms_;
  std::map<int, Complex> density_;

  friend AlgebraElement convolve(const AlgebraElement&, const AlgebraElement&);
};

// Convolution (psi * phi)(g) = integral psi(h) phi(h^-1 g) dh, with the atomic
// cross terms expanded exactly.
AlgebraElement convolve(const AlgebraElement& a, const AlgebraElement& b);

// Two-sided translate delta_f * a * delta_h.
AlgebraElement translate(int f, const AlgebraElement& a, int h);

// Approximate identity e_m: the normalized indicator of U_m.  Exactly
// delta_e on discrete kinds.
AlgebraElement approximate_identity(const GroupPtr& group, int level);

// rho_a(g) = || delta_g * a - a ||_1, the left-translation semi-norm.
double rho_seminorm(const AlgebraElement& a, int g);

// CSV rows "element,re,im": atom coefficients first, then density values.
// On discrete kinds everything is folded into density, so rows are unique.
void write_csv(const AlgebraElement& a, std::ostream& out);

}  // namespace starrep
