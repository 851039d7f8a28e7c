#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "starrep/linalg.hpp"

namespace starrep {

enum class GroupKind {
  FiniteTable,
  Cyclic,
  Symmetric3,
  Dihedral,
  CircleDiscretized,
  IntegersWindowed,
};

class Group;
using GroupPtr = std::shared_ptr<const Group>;

// A group instance at desk scale.  Elements are plain ints:
//   - finite kinds enumerate elements 0 .. size()-1 with identity 0,
//   - the windowed integers use the integer value itself, in [-W, W].
//
// Every shipped kind is unimodular, so modular() is identically 1; the
// involution and translation formulas still route through it so the shape of
// the general computation is preserved.
class Group {
 public:
  static GroupPtr cyclic(int n);
  static GroupPtr symmetric3();
  static GroupPtr dihedral(int n);  // 2n elements, index a*n + j means s^a r^j
  static GroupPtr circle_discretized(int points);
  static GroupPtr integers_windowed(int half_width);
  // Explicit multiplication table; validated exhaustively (|G| <= 64).
  static GroupPtr finite_table(std::vector<std::vector<int>> table);

  GroupKind kind() const { return kind_; }
  // All kinds except the discretized circle carry the discrete topology.
  bool discrete() const { return kind_ != GroupKind::CircleDiscretized; }
  int size() const { return size_; }
  int param() const { return param_; }  // n / point count / half width
  int identity() const { return identity_; }

  std::vector<int> elements() const;
  bool contains(int g) const;

  int mul(int g, int h) const;      // throws WindowOverflow on window escape
  int inverse(int g) const;
  double haar_weight(int g) const;  // counting measure; 1/N on the circle
  double modular(int g) const;      // 1 for every shipped kind

  Complex haar_integrate(const std::function<Complex(int)>& f) const;

  // Neighborhood basis U_m of the identity.  Discrete kinds: {e} at every
  // level.  Circle: the closed arc of total length pi * 2^-m centered at the
  // identity, i.e. indices k with min(k, N-k) <= floor(N / 2^(m+2)).
  std::vector<int> neighborhood(int level) const;
  int resolution_limit() const;  // floor(log2 N) - 2 on the circle, else 20

  std::string describe() const;
  std::string element_name(int g) const;
  bool same_as(const Group& other) const;

 private:
  Group() = default;
  void build_tables();
  void validate_axioms() const;

  GroupKind kind_ = GroupKind::Cyclic;
  int param_ = 0;
  int size_ = 0;
  int identity_ = 0;
  std::vector<std::vector<int>> table_;  // finite-table / symmetric3 / dihedral
  std::vector<int> inverse_;
};

}  // namespace starrep
