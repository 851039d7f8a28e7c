#include "starrep/group.hpp"

#include <array>
#include <cmath>
#include <numeric>

#include "starrep/errors.hpp"

namespace starrep {
namespace {

// Permutations of {0,1,2} in lexicographic one-line order; index 0 is the
// identity.  Composition is right-to-left: (s.t)(x) = s(t(x)).
constexpr std::array<std::array<int, 3>, 6> kS3 = {{
    {0, 1, 2},
    {0, 2, 1},
    {1, 0, 2},
    {1, 2, 0},
    {2, 0, 1},
    {2, 1, 0},
}};

int s3_compose(int a, int b) {
  std::array<int, 3> r{};
  for (int x = 0; x < 3; ++x) r[x] = kS3[a][kS3[b][x]];
  for (int i = 0; i < 6; ++i)
    if (kS3[i] == r) return i;
  throw Error("symmetric3: composition left the table");
}

int positive_mod(int x, int n) {
  int r = x % n;
  return r < 0 ? r + n : r;
}

}  // namespace

GroupPtr Group::cyclic(int n) {
  if (n < 1) throw ConfigError("cyclic(n) needs n >= 1");
  auto g = std::shared_ptr<Group>(new Group());
  g->kind_ = GroupKind::Cyclic;
  g->param_ = n;
  g->size_ = n;
  g->build_tables();
  return g;
}

GroupPtr Group::symmetric3() {
  auto g = std::shared_ptr<Group>(new Group());
  g->kind_ = GroupKind::Symmetric3;
  g->param_ = 3;
  g->size_ = 6;
  g->build_tables();
  return g;
}

GroupPtr Group::dihedral(int n) {
  if (n < 1) throw ConfigError("dihedral(n) needs n >= 1");
  auto g = std::shared_ptr<Group>(new Group());
  g->kind_ = GroupKind::Dihedral;
  g->param_ = n;
  g->size_ = 2 * n;
  g->build_tables();
  return g;
}

GroupPtr Group::circle_discretized(int points) {
  if (points < 8) throw ConfigError("circle-discretized(N) needs N >= 8");
  auto g = std::shared_ptr<Group>(new Group());
  g->kind_ = GroupKind::CircleDiscretized;
  g->param_ = points;
  g->size_ = points;
  g->build_tables();
  return g;
}

GroupPtr Group::integers_windowed(int half_width) {
  if (half_width < 1) throw ConfigError("integers-windowed(W) needs W >= 1");
  auto g = std::shared_ptr<Group>(new Group());
  g->kind_ = GroupKind::IntegersWindowed;
  g->param_ = half_width;
  g->size_ = 2 * half_width + 1;
  g->build_tables();
  return g;
}

GroupPtr Group::finite_table(std::vector<std::vector<int>> table) {
  auto g = std::shared_ptr<Group>(new Group());
  g->kind_ = GroupKind::FiniteTable;
  g->table_ = std::move(table);
  g->size_ = static_cast<int>(g->table_.size());
  g->param_ = g->size_;
  if (g->size_ == 0 || g->size_ > 64)
    throw ConfigError("finite-table groups are supported for 1 <= |G| <= 64");
  for (const auto& row : g->table_) {
    if (static_cast<int>(row.size()) != g->size_)
      throw ConfigError("finite-table: table is not square");
    for (int v : row)
      if (v < 0 || v >= g->size_) throw ConfigError("finite-table: entry out of range");
  }
  g->build_tables();
  g->validate_axioms();
  return g;
}

void Group::build_tables() {
  switch (kind_) {
    case GroupKind::Cyclic:
    case GroupKind::CircleDiscretized: {
      identity_ = 0;
      inverse_.resize(size_);
      for (int g = 0; g < size_; ++g) inverse_[g] = positive_mod(-g, size_);
      return;
    }
    case GroupKind::Symmetric3: {
      identity_ = 0;
      table_.assign(6, std::vector<int>(6, 0));
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) table_[a][b] = s3_compose(a, b);
      break;
    }
    case GroupKind::Dihedral: {
      identity_ = 0;
      const int n = param_;
      table_.assign(size_, std::vector<int>(size_, 0));
      // (a, j) * (b, k) = (a xor b, (-1)^b j + k mod n), with s r s = r^{-1}.
      for (int a = 0; a < 2; ++a)
        for (int j = 0; j < n; ++j)
          for (int b = 0; b < 2; ++b)
            for (int k = 0; k < n; ++k) {
              int sign = b ? -1 : 1;
              int jj = positive_mod(sign * j + k, n);
              table_[a * n + j][b * n + k] = (a ^ b) * n + jj;
            }
      break;
    }
    case GroupKind::IntegersWindowed: {
      identity_ = 0;
      return;  // arithmetic kind, no tables
    }
    case GroupKind::FiniteTable: {
      // Locate the two-sided identity.
      identity_ = -1;
      for (int e = 0; e < size_; ++e) {
        bool ok = true;
        for (int g = 0; g < size_ && ok; ++g)
          ok = table_[e][g] == g && table_[g][e] == g;
        if (ok) {
          identity_ = e;
          break;
        }
      }
      if (identity_ < 0) throw ConfigError("finite-table: no identity element");
      break;
    }
  }
  inverse_.assign(size_, -1);
  for (int g = 0; g < size_; ++g)
    for (int h = 0; h < size_; ++h)
      if (table_[g][h] == identity_ && table_[h][g] == identity_) {
        inverse_[g] = h;
        break;
      }
  for (int g = 0; g < size_; ++g)
    if (inverse_[g] < 0) throw ConfigError(describe() + ": element without inverse");
}

void Group::validate_axioms() const {
  if (size_ > 64) return;
  for (int a = 0; a < size_; ++a)
    for (int b = 0; b < size_; ++b)
      for (int c = 0; c < size_; ++c)
        if (mul(mul(a, b), c) != mul(a, mul(b, c)))
          throw ConfigError("finite-table: associativity fails");
}

std::vector<int> Group::elements() const {
  std::vector<int> out;
  out.reserve(size_);
  if (kind_ == GroupKind::IntegersWindowed) {
    for (int v = -param_; v <= param_; ++v) out.push_back(v);
  } else {
    for (int g = 0; g < size_; ++g) out.push_back(g);
  }
  return out;
}

bool Group::contains(int g) const {
  if (kind_ == GroupKind::IntegersWindowed) return g >= -param_ && g <= param_;
  return g >= 0 && g < size_;
}

int Group::mul(int g, int h) const {
  switch (kind_) {
    case GroupKind::Cyclic:
    case GroupKind::CircleDiscretized:
      return positive_mod(g + h, size_);
    case GroupKind::IntegersWindowed: {
      int r = g + h;
      if (r < -param_ || r > param_)
        throw WindowOverflow("integers-windowed(" + std::to_string(param_) + "): product " +
                             std::to_string(g) + " + " + std::to_string(h) +
                             " escapes the window");
      return r;
    }
    default:
      return table_[g][h];
  }
}

int Group::inverse(int g) const {
  if (kind_ == GroupKind::IntegersWindowed) return -g;
  return inverse_[g];
}

double Group::haar_weight(int) const {
  return kind_ == GroupKind::CircleDiscretized ? 1.0 / size_ : 1.0;
}

double Group::modular(int) const { return 1.0; }

Complex Group::haar_integrate(const std::function<Complex(int)>& f) const {
  Complex acc = 0.0;
  for (int g : elements()) acc += haar_weight(g) * f(g);
  return acc;
}

int Group::resolution_limit() const {
  if (kind_ != GroupKind::CircleDiscretized) return 20;
  int log2n = 0;
  while ((1 << (log2n + 1)) <= param_) ++log2n;
  return log2n - 2;
}

std::vector<int> Group::neighborhood(int level) const {
  if (level < 0) throw ResolutionExceeded("neighborhood level must be >= 0");
  if (level > resolution_limit())
    throw ResolutionExceeded(describe() + ": level " + std::to_string(level) +
                             " beyond resolution limit " + std::to_string(resolution_limit()));
  if (discrete()) return {identity_};
  // Closed arc of total length pi * 2^-m around the identity.
  const int n = size_;
  int radius = n;
  for (int i = 0; i < level + 2; ++i) radius /= 2;
  std::vector<int> out;
  out.push_back(0);
  for (int k = 1; k <= radius; ++k) {
    out.push_back(k);
    if (k != n - k) out.push_back(n - k);
  }
  return out;
}

std::string Group::describe() const {
  switch (kind_) {
    case GroupKind::FiniteTable:
      return "finite-table(" + std::to_string(size_) + ")";
    case GroupKind::Cyclic:
      return "cyclic(" + std::to_string(param_) + ")";
    case GroupKind::Symmetric3:
      return "symmetric(3)";
    case GroupKind::Dihedral:
      return "dihedral(" + std::to_string(param_) + ")";
    case GroupKind::CircleDiscretized:
      return "circle-discretized(" + std::to_string(param_) + ")";
    case GroupKind::IntegersWindowed:
      return "integers-windowed(" + std::to_string(param_) + ")";
  }
  return "?";
}

std::string Group::element_name(int g) const {
  switch (kind_) {
    case GroupKind::Symmetric3: {
      const auto& p = kS3[g];
      return "(" + std::to_string(p[0]) + std::to_string(p[1]) + std::to_string(p[2]) + ")";
    }
    case GroupKind::Dihedral: {
      int a = g / param_, j = g % param_;
      return (a ? "sr^" : "r^") + std::to_string(j);
    }
    default:
      return std::to_string(g);
  }
}

bool Group::same_as(const Group& other) const {
  if (kind_ != other.kind_ || size_ != other.size_ || param_ != other.param_) return false;
  if (kind_ == GroupKind::FiniteTable) return table_ == other.table_;
  return true;
}

}  // namespace starrep
