#include "starrep/kazhdan.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "starrep/algebra.hpp"
#include "starrep/errors.hpp"

namespace starrep {

MatC invariant_projection(const UnitaryRep& rep, const std::vector<int>& generating) {
  const int d = rep.dim();
  std::vector<int> gens = generating.empty() ? rep.group()->elements() : generating;
  MatC stacked(static_cast<int>(gens.size()) * d, d);
  MatC eye = MatC::Identity(d, d);
  for (int i = 0; i < static_cast<int>(gens.size()); ++i)
    stacked.middleRows(i * d, d) = rep.matrix(gens[i]) - eye;
  MatC k = kernel_basis(stacked);
  if (k.cols() == 0) return MatC::Zero(d, d);
  return k * k.adjoint();
}

namespace {

// max_{g in Q} ||M_g v|| for the complement-restricted displacement maps.
double defect(const std::vector<MatC>& maps, const VecC& v) {
  double worst = 0.0;
  for (const auto& m : maps) worst = std::max(worst, (m * v).norm());
  return worst;
}

// Tangent subgradient step minimization of the defect over the unit sphere,
// followed by a shrinking-step polish.  Phase invariance makes the complex
// projection harmless.
VecC minimize_defect(const std::vector<MatC>& maps, VecC v, int iters, double step0) {
  auto grad_at = [&](const VecC& w) {
    double worst = -1.0;
    VecC g = VecC::Zero(w.size());
    for (const auto& m : maps) {
      VecC mv = m * w;
      double n = mv.norm();
      if (n > worst) {
        worst = n;
        g = n < 1e-14 ? VecC(VecC::Zero(w.size())) : VecC(m.adjoint() * (mv / n));
      }
    }
    return g;
  };
  v.normalize();
  double best = defect(maps, v);
  VecC bv = v;
  for (int t = 0; t < iters; ++t) {
    VecC g = grad_at(v);
    VecC tangent = g - hermitian_inner(g, v) * v;
    double tn = tangent.norm();
    if (tn < 1e-14) break;
    v = (v - (step0 / std::sqrt(t + 1.0)) * (tangent / tn)).normalized();
    double val = defect(maps, v);
    if (val < best) {
      best = val;
      bv = v;
    }
  }
  v = bv;
  double step = step0;
  while (step > 1e-10) {
    VecC g = grad_at(v);
    VecC tangent = g - hermitian_inner(g, v) * v;
    double tn = tangent.norm();
    if (tn < 1e-14) break;
    VecC v2 = (v - step * (tangent / tn)).normalized();
    double val = defect(maps, v2);
    if (val < best - 1e-15) {
      best = val;
      v = v2;
    } else {
      step *= 0.5;
    }
  }
  return v;
}

}  // namespace

KazhdanResult kazhdan_constant(const UnitaryRep& rep, const std::vector<int>& q,
                               const KazhdanOptions& options) {
  if (q.empty()) throw PreconditionViolation("empty test set for the Kazhdan constant");
  for (int g : q)
    if (!rep.group()->contains(g)) throw PreconditionViolation("test set element outside group");
  const int d = rep.dim();

  MatC p = invariant_projection(rep);
  MatC complement = range_basis(MatC::Identity(d, d) - p);
  KazhdanResult out;
  out.complement_dim = static_cast<int>(complement.cols());
  if (out.complement_dim == 0) {
    out.defined = false;
    return out;
  }
  out.defined = true;

  std::vector<MatC> maps;
  maps.reserve(q.size());
  MatC eye = MatC::Identity(d, d);
  for (int g : q) maps.push_back((rep.matrix(g) - eye) * complement);

  const int c = out.complement_dim;
  MatC h = MatC::Zero(c, c);
  for (const auto& m : maps) h += m.adjoint() * m;
  Eigen::SelfAdjointEigenSolver<MatC> eig(0.5 * (h + MatC(h.adjoint())));
  out.lambda_min = std::max(eig.eigenvalues()(0), 0.0);
  out.lower = std::sqrt(out.lambda_min / static_cast<double>(q.size()));
  out.upper = std::sqrt(out.lambda_min);

  double best = std::numeric_limits<double>::infinity();
  VecC best_v;
  auto consider = [&](const VecC& v0) {
    VecC v = minimize_defect(maps, v0, options.iters, options.step0);
    double val = defect(maps, v);
    if (val < best) {
      best = val;
      best_v = v;
    }
  };
  int n_eig = std::min(c, 8);
  for (int i = 0; i < n_eig; ++i) consider(eig.eigenvectors().col(i));
  Rng rng(options.seed ^ 0xabcddcba12344321ULL);
  for (int s = 0; s < options.multistarts; ++s) consider(rng.unit_vector(c));

  out.kappa = best;
  out.witness = complement * best_v;
  return out;
}

KazhdanResult kazhdan_constant(const UnitaryRep& rep, const std::vector<int>& q) {
  return kazhdan_constant(rep, q, KazhdanOptions());
}

MeshResult kazhdan_mesh_bruteforce(const UnitaryRep& rep, const std::vector<int>& q, int steps) {
  if (q.empty()) throw PreconditionViolation("empty test set for the Kazhdan constant");
  const int d = rep.dim();
  MatC p = invariant_projection(rep);
  MatC complement = range_basis(MatC::Identity(d, d) - p);
  const int c = static_cast<int>(complement.cols());
  if (c == 0) throw PreconditionViolation("no complement to scan");
  if (2 * c > 4)
    throw PreconditionViolation("mesh scan limited to real dimension 4 (complex dimension 2)");

  std::vector<MatC> maps;
  MatC eye = MatC::Identity(d, d);
  for (int g : q) maps.push_back((rep.matrix(g) - eye) * complement);

  double best = std::numeric_limits<double>::infinity();
  VecC best_v = VecC::Zero(c);
  if (c == 1) {
    best_v = VecC::Ones(1);  // global phase is immaterial
    best = defect(maps, best_v);
  } else {
    // Phase-fixed unit sphere of C^2: v = (cos a, sin a e^{i t}).
    const double pi = std::acos(-1.0);
    for (int i = 0; i <= steps; ++i) {
      double a = 0.5 * pi * i / steps;
      for (int j = 0; j < 2 * steps; ++j) {
        double t = 2.0 * pi * j / (2 * steps);
        VecC v(2);
        v << Complex(std::cos(a), 0.0), std::sin(a) * Complex(std::cos(t), std::sin(t));
        double val = defect(maps, v);
        if (val < best) {
          best = val;
          best_v = v;
        }
      }
    }
  }
  best_v = minimize_defect(maps, best_v, 200, 0.25);
  MeshResult out;
  out.value = defect(maps, best_v);
  out.witness = complement * best_v;
  return out;
}

CoverFamily build_cover(const GroupPtr& group, const std::vector<int>& k_set,
                        const AlgebraElement& phi, int max_level) {
  if (k_set.empty()) throw PreconditionViolation("empty set to cover");
  if (!phi.group()->same_as(*group)) throw MismatchError("scale element on a different group");
  if (max_level > group->resolution_limit())
    throw UncoverableAtResolution("cover scale finer than the resolution limit");
  for (int k : k_set)
    if (!group->contains(k)) throw PreconditionViolation("cover set element outside group");

  CoverFamily family{k_set, phi, {}};
  for (int m = 0; m <= max_level; ++m) {
    double scale = std::pow(2.0, -m);
    Cover cover;
    cover.level = m;
    std::set<int> covered;
    for (int center : k_set) {
      if (covered.count(center)) continue;
      CoverPiece piece;
      piece.center = center;
      int inv = group->inverse(center);
      for (int k : k_set) {
        if (covered.count(k)) continue;
        bool inside = false;
        try {
          inside = rho_seminorm(phi, group->mul(inv, k)) < scale;
        } catch (const WindowOverflow&) {
          inside = false;
        }
        if (inside) {
          piece.members.push_back(k);
          covered.insert(k);
        }
      }
      if (piece.members.empty())
        throw UncoverableAtResolution("center cannot cover itself at level " + std::to_string(m));
      cover.pieces.push_back(std::move(piece));
    }
    family.levels.push_back(std::move(cover));
  }
  return family;
}

PhiInterval phi_predicate(const UnitaryRep& rep, const CoverFamily& cover, const VecC& xi) {
  if (cover.levels.empty()) throw PreconditionViolation("cover family has no levels");
  const int d = rep.dim();
  if (xi.size() != d) throw MismatchError("vector dimension differs from the genuine block");
  PhiInterval out;
  int deepest = static_cast<int>(cover.levels.size()) - 1;
  out.truncation_level = deepest;
  for (const Cover& cov : cover.levels) {
    double alpha = 0.0;
    for (const auto& piece : cov.pieces)
      alpha = std::max(alpha, (rep.matrix(piece.center) * xi - xi).norm());
    out.value = std::max(out.value, std::pow(2.0, -cov.level) * alpha);
  }
  out.hi = std::max(out.value, out.value + std::pow(2.0, -deepest) * xi.norm());
  return out;
}

PhiInvarianceReport phi_invariance_forward(const UnitaryRep& rep, const CoverFamily& cover,
                                           const VecC& zeta, int m) {
  if (m < 0) throw PreconditionViolation("negative scale");
  if (static_cast<int>(cover.levels.size()) <= m + 1)
    throw PreconditionViolation("cover family too shallow for scale m (needs level m+1)");
  if (zeta.norm() > 1.0 + 1e-12)
    throw PreconditionViolation("zeta must lie in the unit ball");
  const int d = rep.dim();
  const GroupPtr& group = rep.group();
  MatC phi_op = rep.operator_of(cover.phi).topLeftCorner(d, d);
  VecC xi = phi_op * zeta;

  PhiInvarianceReport report;
  PhiInterval phi_val = phi_predicate(rep, cover, xi);
  report.phi_hi = phi_val.hi;
  report.threshold = std::pow(2.0, -(2 * m + 2));
  report.applicable = phi_val.hi < report.threshold;

  double displacement = 0.0;
  for (int f : cover.set)
    displacement = std::max(displacement, (rep.matrix(f) * xi - xi).norm());
  report.displacement = displacement;

  // Factorize each f = c h through its level-(m+1) piece.
  const Cover& fine = cover.levels[m + 1];
  double bound = 0.0;
  for (const auto& piece : fine.pieces) {
    double center_disp = (rep.matrix(piece.center) * xi - xi).norm();
    int inv = group->inverse(piece.center);
    for (int f : piece.members) {
      double h_disp = (rep.matrix(group->mul(inv, f)) * xi - xi).norm();
      bound = std::max(bound, center_disp + h_disp);
    }
  }
  report.bound_via_cover = bound;

  if (report.applicable) {
    report.holds = displacement < std::pow(2.0, -m);
    report.slack = std::pow(2.0, -m) - displacement;
  }
  return report;
}

FixDistanceResult fix_distance(const UnitaryRep& rep, const std::vector<int>& q, const VecC& xi,
                               double kappa, const std::optional<AlgebraElement>& phi, double tol) {
  if (kappa <= 0.0) throw PreconditionViolation("fix distance needs a positive kappa");
  if (q.empty()) throw PreconditionViolation("empty test set");
  const int d = rep.dim();
  if (xi.size() != d) throw MismatchError("vector dimension differs from the genuine block");

  MatC p = invariant_projection(rep);
  FixDistanceResult out;
  out.projected = p * xi;
  out.distance = (xi - out.projected).norm();
  for (int g : q) out.delta = std::max(out.delta, (rep.matrix(g) * xi - xi).norm());
  out.bound = out.delta / kappa;
  out.holds = out.distance <= out.bound + tol;
  if (phi) {
    MatC phi_op = rep.operator_of(*phi).topLeftCorner(d, d);
    out.membership = BallLeastSquares(phi_op).solve(out.projected).distance;
  }
  return out;
}

}  // namespace starrep
