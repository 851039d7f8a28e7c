#pragma once

#include <map>
#include <vector>

#include "starrep/algebra.hpp"

namespace testutil {

using starrep::AlgebraElement;
using starrep::Complex;
using starrep::GroupPtr;

// Independent convolution oracle: treats both operands as plain functions on
// the whole group (atoms divided by their Haar weight) and evaluates
// (a * b)(g) = sum_h w(h) a(h) b(h^-1 g) by brute force.  No shared code with
// the library's convolution.
inline std::map<int, Complex> as_function(const AlgebraElement& a) {
  std::map<int, Complex> f;
  for (int g : a.group()->elements()) {
    Complex v = a.density_at(g) + a.atom_at(g) / a.group()->haar_weight(g);
    if (std::abs(v) > 0) f[g] = v;
  }
  return f;
}

inline std::map<int, Complex> convolve_oracle(const AlgebraElement& a, const AlgebraElement& b) {
  const GroupPtr& group = a.group();
  std::map<int, Complex> fa = as_function(a), fb = as_function(b), out;
  for (int g : group->elements()) {
    Complex acc = 0.0;
    for (const auto& [h, va] : fa) {
      int rest = group->mul(group->inverse(h), g);
      auto it = fb.find(rest);
      if (it != fb.end()) acc += group->haar_weight(h) * va * it->second;
    }
    if (std::abs(acc) > 1e-18) out[g] = acc;
  }
  return out;
}

inline double function_distance(const std::map<int, Complex>& f, const AlgebraElement& a) {
  std::map<int, Complex> g = as_function(a);
  auto value = [](const std::map<int, Complex>& m, int k) {
    auto it = m.find(k);
    return it == m.end() ? Complex(0.0) : it->second;
  };
  double worst = 0.0;
  for (const auto& [k, v] : f) worst = std::max(worst, std::abs(v - value(g, k)));
  for (const auto& [k, v] : g) worst = std::max(worst, std::abs(v - value(f, k)));
  return worst;
}

// Random element with density support of the given size (atoms on the circle
// kind when with_atom is set), deterministic in seed.
inline AlgebraElement random_element(const GroupPtr& group, std::uint64_t seed, int support = 3,
                                     bool with_atom = false) {
  starrep::Rng rng(seed);
  std::map<int, Complex> density;
  std::vector<int> elems = group->elements();
  for (int k = 0; k < support; ++k) {
    int g = elems[rng.uniform_int(0, static_cast<int>(elems.size()) - 1)];
    density[g] = rng.gaussian_complex();
  }
  AlgebraElement out = AlgebraElement::density(group, std::move(density));
  if (with_atom) {
    int g = elems[rng.uniform_int(0, static_cast<int>(elems.size()) - 1)];
    out = out + AlgebraElement::dirac(group, g, rng.gaussian_complex());
  }
  return out;
}

}  // namespace testutil
