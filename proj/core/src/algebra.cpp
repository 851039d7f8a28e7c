#include "starrep/algebra.hpp"

#include <cmath>
#include <ostream>

#include "starrep/errors.hpp"

namespace starrep {
namespace {

void require_same_group(const AlgebraElement& a, const AlgebraElement& b) {
  if (!a.group()->same_as(*b.group()))
    throw MismatchError("algebra elements live over different groups: " + a.group()->describe() +
                        " vs " + b.group()->describe());
}

void add_into(std::map<int, Complex>& m, int key, Complex v) {
  auto [it, inserted] = m.try_emplace(key, v);
  if (!inserted) it->second += v;
}

}  // namespace

AlgebraElement AlgebraElement::zero(GroupPtr group) { return AlgebraElement(std::move(group)); }

AlgebraElement AlgebraElement::dirac(GroupPtr group, int element, Complex coeff) {
  if (!group->contains(element))
    throw MismatchError("dirac: element outside " + group->describe());
  AlgebraElement a(std::move(group));
  a.atoms_[element] = coeff;
  a.fold_and_prune();
  return a;
}

AlgebraElement AlgebraElement::density(GroupPtr group, std::map<int, Complex> values) {
  for (const auto& [g, v] : values) {
    (void)v;
    if (!group->contains(g))
      throw MismatchError("density: support point outside " + group->describe());
  }
  AlgebraElement a(std::move(group));
  a.density_ = std::move(values);
  a.fold_and_prune();
  return a;
}

AlgebraElement AlgebraElement::uniform_density(GroupPtr group) {
  std::map<int, Complex> v;
  Complex total = group->haar_integrate([](int) { return Complex(1.0, 0.0); });
  for (int g : group->elements()) v[g] = 1.0 / total.real();
  return density(std::move(group), std::move(v));
}

void AlgebraElement::fold_and_prune() {
  if (group_->discrete() && !atoms_.empty()) {
    for (const auto& [g, c] : atoms_) add_into(density_, g, c / group_->haar_weight(g));
    atoms_.clear();
  }
  auto prune = [](std::map<int, Complex>& m) {
    for (auto it = m.begin(); it != m.end();)
      it = (it->second == Complex(0.0, 0.0)) ? m.erase(it) : std::next(it);
  };
  prune(atoms_);
  prune(density_);
}

Complex AlgebraElement::density_at(int g) const {
  auto it = density_.find(g);
  return it == density_.end() ? Complex(0.0, 0.0) : it->second;
}

Complex AlgebraElement::atom_at(int g) const {
  auto it = atoms_.find(g);
  return it == atoms_.end() ? Complex(0.0, 0.0) : it->second;
}

double AlgebraElement::norm1() const {
  double acc = 0.0;
  for (const auto& [g, c] : atoms_) {
    (void)g;
    acc += std::abs(c);
  }
  for (const auto& [g, v] : density_) acc += group_->haar_weight(g) * std::abs(v);
  return acc;
}

Complex AlgebraElement::total_mass() const {
  Complex acc = 0.0;
  for (const auto& [g, c] : atoms_) {
    (void)g;
    acc += c;
  }
  for (const auto& [g, v] : density_) acc += group_->haar_weight(g) * v;
  return acc;
}

bool AlgebraElement::nonnegative(double tol) const {
  auto ok = [tol](const std::map<int, Complex>& m) {
    for (const auto& [g, v] : m) {
      (void)g;
      if (v.real() < -tol || std::abs(v.imag()) > tol) return false;
    }
    return true;
  };
  return ok(atoms_) && ok(density_);
}

std::vector<int> AlgebraElement::support() const {
  std::vector<int> out;
  for (const auto& [g, v] : atoms_) {
    (void)v;
    out.push_back(g);
  }
  for (const auto& [g, v] : density_) {
    (void)v;
    if (atoms_.find(g) == atoms_.end()) out.push_back(g);
  }
  return out;
}

AlgebraElement AlgebraElement::operator+(const AlgebraElement& rhs) const {
  require_same_group(*this, rhs);
  AlgebraElement out = *this;
  for (const auto& [g, c] : rhs.atoms_) add_into(out.atoms_, g, c);
  for (const auto& [g, v] : rhs.density_) add_into(out.density_, g, v);
  out.fold_and_prune();
  return out;
}

AlgebraElement AlgebraElement::operator-(const AlgebraElement& rhs) const {
  return *this + rhs.scaled(-1.0);
}

AlgebraElement AlgebraElement::operator-() const { return scaled(-1.0); }

AlgebraElement AlgebraElement::scaled(Complex factor) const {
  AlgebraElement out = *this;
  for (auto& [g, c] : out.atoms_) {
    (void)g;
    c *= factor;
  }
  for (auto& [g, v] : out.density_) {
    (void)g;
    v *= factor;
  }
  out.fold_and_prune();
  return out;
}

AlgebraElement AlgebraElement::involution() const {
  const Group& grp = *group_;
  AlgebraElement out(group_);
  for (const auto& [g, c] : atoms_) add_into(out.atoms_, grp.inverse(g), std::conj(c));
  // a*(x) = modular(x^-1) conj(a(x^-1)); writing y = x^-1 places
  // modular(y) conj(a(y)) at x = y^-1.
  for (const auto& [y, v] : density_)
    add_into(out.density_, grp.inverse(y), grp.modular(y) * std::conj(v));
  out.fold_and_prune();
  return out;
}

AlgebraElement convolve(const AlgebraElement& a, const AlgebraElement& b) {
  require_same_group(a, b);
  const Group& grp = *a.group();
  AlgebraElement out(a.group());
  // atom * atom -> atom at the product
  for (const auto& [g, c] : a.atoms_)
    for (const auto& [h, d] : b.atoms_) add_into(out.atoms_, grp.mul(g, h), c * d);
  // atom * density: (delta_h * phi)(x) = phi(h^-1 x), i.e. mass c*v at h*y
  for (const auto& [h, c] : a.atoms_)
    for (const auto& [y, v] : b.density_) add_into(out.density_, grp.mul(h, y), c * v);
  // density * atom: (phi * delta_h)(x) = modular(h^-1) phi(x h^-1)
  for (const auto& [y, v] : a.density_)
    for (const auto& [h, d] : b.atoms_)
      add_into(out.density_, grp.mul(y, h), grp.modular(grp.inverse(h)) * v * d);
  // density * density: (psi * phi)(x) = sum_h w(h) psi(h) phi(h^-1 x)
  for (const auto& [h, pv] : a.density_) {
    double w = grp.haar_weight(h);
    for (const auto& [y, qv] : b.density_) add_into(out.density_, grp.mul(h, y), w * pv * qv);
  }
  out.fold_and_prune();
  return out;
}

AlgebraElement AlgebraElement::left_translate(int f) const {
  return convolve(dirac(group_, f), *this);
}

AlgebraElement AlgebraElement::right_translate(int h) const {
  return convolve(*this, dirac(group_, h));
}

AlgebraElement translate(int f, const AlgebraElement& a, int h) {
  return a.left_translate(f).right_translate(h);
}

AlgebraElement approximate_identity(const GroupPtr& group, int level) {
  if (group->discrete()) {
    if (level < 0 || level > group->resolution_limit())
      throw ResolutionExceeded(group->describe() + ": approximate-identity level " +
                               std::to_string(level) + " out of range");
    return AlgebraElement::dirac(group, group->identity());
  }
  std::vector<int> u = group->neighborhood(level);
  double mass = 0.0;
  for (int g : u) mass += group->haar_weight(g);
  std::map<int, Complex> values;
  for (int g : u) values[g] = 1.0 / mass;
  return AlgebraElement::density(group, std::move(values));
}

double rho_seminorm(const AlgebraElement& a, int g) {
  return (a.left_translate(g) - a).norm1();
}

void write_csv(const AlgebraElement& a, std::ostream& out) {
  out << "element,re,im\n";
  out.precision(17);
  for (const auto& [g, c] : a.atoms())
    out << g << "," << c.real() << "," << c.imag() << "\n";
  for (const auto& [g, v] : a.density_values())
    out << g << "," << v.real() << "," << v.imag() << "\n";
}

}  // namespace starrep
