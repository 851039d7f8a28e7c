#include "starrep/representation.hpp"

#include <cmath>
#include <numbers>

#include "starrep/errors.hpp"

namespace starrep {
namespace detail {

MatC RepKernel::integrate(const AlgebraElement& a) const {
  MatC acc = MatC::Zero(dim(), dim());
  for (const auto& [g, c] : a.atoms()) acc += c * matrix(g);
  for (const auto& [g, v] : a.density_values())
    acc += a.group()->haar_weight(g) * v * matrix(g);
  return acc;
}

namespace {

class ExplicitKernel final : public RepKernel {
 public:
  ExplicitKernel(GroupPtr group, std::vector<MatC> mats)
      : group_(std::move(group)), mats_(std::move(mats)) {}
  int dim() const override { return mats_.empty() ? 0 : static_cast<int>(mats_[0].rows()); }
  MatC matrix(int g) const override { return mats_[index_of(g)]; }
  int index_of(int g) const {
    if (group_->kind() == GroupKind::IntegersWindowed) return g + group_->param();
    return g;
  }

 private:
  GroupPtr group_;
  std::vector<MatC> mats_;
};

class RegularKernel final : public RepKernel {
 public:
  explicit RegularKernel(GroupPtr group) : group_(std::move(group)) {
    elements_ = group_->elements();
    for (int i = 0; i < static_cast<int>(elements_.size()); ++i) index_[elements_[i]] = i;
  }
  int dim() const override { return static_cast<int>(elements_.size()); }

  MatC matrix(int g) const override {
    const int n = dim();
    MatC m = MatC::Zero(n, n);
    for (int j = 0; j < n; ++j) {
      int target = group_->mul(g, elements_[j]);
      m(index_.at(target), j) = 1.0;
    }
    return m;
  }

  // pi(a)[g*y, y] += coefficient(g); avoids materializing |G| permutation
  // matrices for large instances.
  MatC integrate(const AlgebraElement& a) const override {
    const int n = dim();
    MatC acc = MatC::Zero(n, n);
    auto add = [&](int g, Complex coeff) {
      for (int j = 0; j < n; ++j) acc(index_.at(group_->mul(g, elements_[j])), j) += coeff;
    };
    for (const auto& [g, c] : a.atoms()) add(g, c);
    for (const auto& [g, v] : a.density_values()) add(g, a.group()->haar_weight(g) * v);
    return acc;
  }

 private:
  GroupPtr group_;
  std::vector<int> elements_;
  std::map<int, int> index_;
};

class CharacterKernel final : public RepKernel {
 public:
  CharacterKernel(GroupPtr group, int k) : group_(std::move(group)), k_(k) {}
  int dim() const override { return 1; }
  MatC matrix(int g) const override {
    MatC m(1, 1);
    double angle;
    if (group_->kind() == GroupKind::IntegersWindowed) {
      angle = 2.0 * std::numbers::pi * k_ * g / 256.0;
    } else {
      angle = 2.0 * std::numbers::pi * static_cast<double>(k_) * g / group_->size();
    }
    m(0, 0) = std::polar(1.0, angle);
    return m;
  }

 private:
  GroupPtr group_;
  int k_;
};

class TrivialKernel final : public RepKernel {
 public:
  explicit TrivialKernel(int dim) : dim_(dim) {}
  int dim() const override { return dim_; }
  MatC matrix(int) const override { return MatC::Identity(dim_, dim_); }
  MatC integrate(const AlgebraElement& a) const override {
    return a.total_mass() * MatC::Identity(dim_, dim_);
  }

 private:
  int dim_;
};

class DirectSumKernel final : public RepKernel {
 public:
  DirectSumKernel(std::shared_ptr<const RepKernel> a, std::shared_ptr<const RepKernel> b)
      : a_(std::move(a)), b_(std::move(b)) {}
  int dim() const override { return a_->dim() + b_->dim(); }
  MatC matrix(int g) const override {
    MatC m = MatC::Zero(dim(), dim());
    m.topLeftCorner(a_->dim(), a_->dim()) = a_->matrix(g);
    m.bottomRightCorner(b_->dim(), b_->dim()) = b_->matrix(g);
    return m;
  }
  MatC integrate(const AlgebraElement& x) const override {
    MatC m = MatC::Zero(dim(), dim());
    m.topLeftCorner(a_->dim(), a_->dim()) = a_->integrate(x);
    m.bottomRightCorner(b_->dim(), b_->dim()) = b_->integrate(x);
    return m;
  }

 private:
  std::shared_ptr<const RepKernel> a_, b_;
};

class ConjugatedKernel final : public RepKernel {
 public:
  ConjugatedKernel(std::shared_ptr<const RepKernel> inner, MatC u)
      : inner_(std::move(inner)), u_(std::move(u)) {}
  int dim() const override { return inner_->dim(); }
  MatC matrix(int g) const override { return u_ * inner_->matrix(g) * u_.adjoint(); }
  MatC integrate(const AlgebraElement& a) const override {
    return u_ * inner_->integrate(a) * u_.adjoint();
  }

 private:
  std::shared_ptr<const RepKernel> inner_;
  MatC u_;
};

class CorruptedKernel final : public RepKernel {
 public:
  CorruptedKernel(std::shared_ptr<const RepKernel> inner, int element, MatC replacement)
      : inner_(std::move(inner)), element_(element), replacement_(std::move(replacement)) {}
  int dim() const override { return inner_->dim(); }
  MatC matrix(int g) const override {
    return g == element_ ? replacement_ : inner_->matrix(g);
  }

 private:
  std::shared_ptr<const RepKernel> inner_;
  int element_;
  MatC replacement_;
};

}  // namespace
}  // namespace detail

using detail::RepKernel;

UnitaryRep UnitaryRep::regular(GroupPtr group) {
  auto k = std::make_shared<detail::RegularKernel>(group);
  return UnitaryRep(std::move(group), std::move(k), 0);
}

UnitaryRep UnitaryRep::trivial(GroupPtr group, int dim) {
  auto k = std::make_shared<detail::TrivialKernel>(dim);
  return UnitaryRep(std::move(group), std::move(k), 0);
}

UnitaryRep UnitaryRep::character(GroupPtr group, int k) {
  switch (group->kind()) {
    case GroupKind::Cyclic:
    case GroupKind::CircleDiscretized:
    case GroupKind::IntegersWindowed:
      break;
    default:
      throw MismatchError("character reps are defined for the abelian kinds only");
  }
  auto kern = std::make_shared<detail::CharacterKernel>(group, k);
  return UnitaryRep(std::move(group), std::move(kern), 0);
}

UnitaryRep UnitaryRep::from_matrices(GroupPtr group, std::vector<MatC> matrices, int padding,
                                     double tol) {
  if (static_cast<int>(matrices.size()) != group->size())
    throw MismatchError("from_matrices: need one block per group element");
  auto k = std::make_shared<detail::ExplicitKernel>(group, std::move(matrices));
  UnitaryRep rep(std::move(group), std::move(k), padding);
  std::string why;
  if (!rep.validate(tol, &why)) throw PreconditionViolation("from_matrices: " + why);
  return rep;
}

UnitaryRep UnitaryRep::direct_sum(const UnitaryRep& other) const {
  if (!group_->same_as(*other.group_))
    throw MismatchError("direct_sum: representations of different groups");
  auto k = std::make_shared<detail::DirectSumKernel>(kernel_, other.kernel_);
  return UnitaryRep(group_, std::move(k), padding_ + other.padding_);
}

UnitaryRep UnitaryRep::padded(int extra) const {
  if (extra < 0) throw PreconditionViolation("padded: negative padding");
  return UnitaryRep(group_, kernel_, padding_ + extra);
}

UnitaryRep UnitaryRep::conjugated(const MatC& u) const {
  if (u.rows() != dim() || u.cols() != dim())
    throw MismatchError("conjugated: unitary has the wrong size");
  auto k = std::make_shared<detail::ConjugatedKernel>(kernel_, u);
  return UnitaryRep(group_, std::move(k), padding_);
}

UnitaryRep UnitaryRep::corrupted(int element, const MatC& replacement) const {
  auto k = std::make_shared<detail::CorruptedKernel>(kernel_, element, replacement);
  return UnitaryRep(group_, std::move(k), padding_);
}

int UnitaryRep::dim() const { return kernel_->dim(); }

MatC UnitaryRep::matrix(int g) const {
  if (!group_->contains(g)) throw MismatchError("matrix: element outside the group");
  return kernel_->matrix(g);
}

MatC UnitaryRep::action_operator(int g) const {
  MatC m = MatC::Zero(ambient_dim(), ambient_dim());
  m.topLeftCorner(dim(), dim()) = matrix(g);
  return m;
}

VecC UnitaryRep::apply(int g, const VecC& xi) const {
  if (xi.size() != ambient_dim()) throw MismatchError("apply: vector has the wrong dimension");
  VecC out = VecC::Zero(ambient_dim());
  out.head(dim()) = matrix(g) * xi.head(dim());
  return out;
}

MatC UnitaryRep::operator_of(const AlgebraElement& a) const {
  if (!a.group()->same_as(*group_))
    throw MismatchError("operator_of: element over " + a.group()->describe() +
                        ", representation over " + group_->describe());
  MatC m = MatC::Zero(ambient_dim(), ambient_dim());
  m.topLeftCorner(dim(), dim()) = kernel_->integrate(a);
  return m;
}

bool UnitaryRep::validate(double tol, std::string* why) const {
  const int n = group_->size();
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  std::vector<int> elems = group_->elements();
  for (int g : elems) {
    MatC u = matrix(g);
    if ((u.adjoint() * u - MatC::Identity(dim(), dim())).norm() > tol * std::max(1, dim()))
      return fail("element " + group_->element_name(g) + " is not unitary");
  }
  MatC id = matrix(group_->identity());
  if ((id - MatC::Identity(dim(), dim())).norm() > tol * std::max(1, dim()))
    return fail("identity does not act as the identity");
  // Homomorphism on all pairs for small groups, on a fixed sample otherwise.
  auto check_pair = [&](int g, int h) {
    try {
      int gh = group_->mul(g, h);
      return (matrix(g) * matrix(h) - matrix(gh)).norm() <= tol * std::max(1, dim());
    } catch (const WindowOverflow&) {
      return true;  // products escaping the window carry no constraint
    }
  };
  if (n <= 24) {
    for (int g : elems)
      for (int h : elems)
        if (!check_pair(g, h))
          return fail("homomorphism law fails at a pair of elements");
  } else {
    Rng rng(7);
    for (int t = 0; t < 128; ++t) {
      int g = elems[rng.uniform_int(0, n - 1)];
      int h = elems[rng.uniform_int(0, n - 1)];
      if (!check_pair(g, h)) return fail("homomorphism law fails at a sampled pair");
    }
  }
  return true;
}

double StarAuditReport::max_residual() const {
  return std::max({mult_residual, star_residual, contract_residual});
}

StarAuditReport star_morphism_audit(const UnitaryRep& rep,
                                    std::span<const AlgebraElement> sample) {
  StarAuditReport rpt;
  std::vector<MatC> ops;
  ops.reserve(sample.size());
  for (const auto& a : sample) ops.push_back(rep.operator_of(a));
  for (int i = 0; i < static_cast<int>(sample.size()); ++i) {
    double star = operator_norm(rep.operator_of(sample[i].involution()) - ops[i].adjoint());
    if (star > rpt.star_residual) {
      rpt.star_residual = star;
      rpt.star_witness = i;
    }
    double contract = operator_norm(ops[i]) - sample[i].norm1();
    if (contract > rpt.contract_residual) {
      rpt.contract_residual = contract;
      rpt.contract_witness = i;
    }
    for (int j = 0; j < static_cast<int>(sample.size()); ++j) {
      double mult =
          operator_norm(rep.operator_of(convolve(sample[i], sample[j])) - ops[i] * ops[j]);
      if (mult > rpt.mult_residual) {
        rpt.mult_residual = mult;
        rpt.mult_witness_a = i;
        rpt.mult_witness_b = j;
      }
    }
  }
  rpt.contract_residual = std::max(0.0, rpt.contract_residual);
  return rpt;
}

ProjectorPair nondegenerate_projection(const UnitaryRep& rep,
                                       std::span<const AlgebraElement> sample,
                                       double cauchy_tol) {
  ProjectorPair out;
  std::vector<MatC> ops;
  for (const auto& a : sample) ops.push_back(rep.operator_of(a));
  out.svd_projector = range_projector(ops, 1e-8);
  out.rank = static_cast<int>(std::lround(out.svd_projector.trace().real()));

  const GroupPtr& grp = rep.group();
  MatC prev;
  bool have_prev = false;
  bool converged = false;
  for (int m = 0; m <= grp->resolution_limit(); ++m) {
    MatC cur = rep.operator_of(approximate_identity(grp, m));
    ++out.iterations;
    if (have_prev && (cur - prev).norm() <= cauchy_tol / 4) {
      out.iterative_projector = cur;
      converged = true;
      // One confirming step: the next difference must stay below tolerance.
      if (m < grp->resolution_limit()) {
        MatC next = rep.operator_of(approximate_identity(grp, m + 1));
        ++out.iterations;
        if ((next - cur).norm() > cauchy_tol / 4) {
          converged = false;
          prev = next;
          continue;
        }
        out.iterative_projector = next;
      }
      break;
    }
    prev = cur;
    have_prev = true;
  }
  if (!converged)
    throw NonConvergent("nondegenerate_projection: pi(e_m) failed Cauchy detection by level " +
                        std::to_string(grp->resolution_limit()));
  out.agreement = operator_norm(out.svd_projector - out.iterative_projector);
  return out;
}

MatC recover_group_action(const std::function<MatC(const AlgebraElement&)>& l1rep,
                          const GroupPtr& group, int ambient_dim, int g, double tol) {
  const int m_fine = group->discrete() ? 1 : group->resolution_limit();
  const int m_coarse = std::max(0, m_fine - 1);
  auto solve_at = [&](int m) {
    AlgebraElement em = approximate_identity(group, m);
    MatC b = l1rep(em);
    MatC c = l1rep(convolve(AlgebraElement::dirac(group, g), em));
    MatC x = c * pseudo_inverse(b, 1e-12);
    double resid = operator_norm(x * b - c);
    if (resid > tol)
      throw NonConvergent("recover_group_action: least-squares residual " +
                          std::to_string(resid) + " at level " + std::to_string(m));
    return x;
  };
  MatC x_fine = solve_at(m_fine);
  MatC x_coarse = solve_at(m_coarse);
  if (operator_norm(x_fine - x_coarse) > tol)
    throw NonConvergent("recover_group_action: levels " + std::to_string(m_coarse) + " and " +
                        std::to_string(m_fine) + " disagree");
  if (x_fine.rows() != ambient_dim)
    throw MismatchError("recover_group_action: assignment dimension mismatch");
  return x_fine;
}

AveragedDisplacementBound averaged_displacement_check(const UnitaryRep& rep,
                                                      const AlgebraElement& mu, const VecC& xi,
                                                      double r, double tol) {
  if (!mu.nonnegative(tol)) throw PreconditionViolation("averaged displacement: mu is not nonnegative");
  if (std::abs(mu.norm1() - 1.0) > 1e-9)
    throw PreconditionViolation("averaged displacement: mu is not a probability measure");
  for (int g : mu.support()) {
    if ((rep.apply(g, xi) - xi).norm() > r + 1e-9)
      throw PreconditionViolation("averaged displacement: support point " + rep.group()->element_name(g) +
                                  " moves xi farther than r");
  }
  AveragedDisplacementBound out;
  out.displacement = (rep.operator_of(mu) * xi - xi).norm();
  out.slack = r - out.displacement;
  out.holds = out.slack >= -tol;
  return out;
}

}  // namespace starrep
