#include "starrep/ultraproduct.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "starrep/algebra.hpp"
#include "starrep/errors.hpp"

namespace starrep {

Schedule default_schedule() {
  Schedule s;
  for (int i = 2; i <= 256; i *= 2) s.push_back(i);
  return s;
}

LimitInfo ultralimit(const std::function<double(int)>& f, const Schedule& schedule,
                     double cauchy_tol) {
  if (schedule.empty()) throw PreconditionViolation("empty limit schedule");
  std::vector<double> vals;
  vals.reserve(schedule.size());
  for (int i : schedule) vals.push_back(f(i));
  const int n = static_cast<int>(vals.size());

  LimitInfo info;
  info.value = vals.back();
  int diffs = std::min(3, n - 1);
  bool cauchy = true;
  for (int k = 0; k < diffs; ++k)
    cauchy = cauchy && std::abs(vals[n - 1 - k] - vals[n - 2 - k]) <= cauchy_tol / 4.0;
  info.converged = cauchy;
  if (info.converged) {
    info.lo = info.hi = info.value;
  } else {
    int tail = (n + 1) / 2;
    info.lo = info.hi = vals[n - tail];
    for (int k = n - tail; k < n; ++k) {
      info.lo = std::min(info.lo, vals[k]);
      info.hi = std::max(info.hi, vals[k]);
    }
  }
  return info;
}

double ultralimit_strict(const std::function<double(int)>& f, const Schedule& schedule,
                         double cauchy_tol) {
  LimitInfo info = ultralimit(f, schedule, cauchy_tol);
  if (!info.converged)
    throw NonConvergent("sequence limit did not settle: tail range [" + std::to_string(info.lo) +
                        ", " + std::to_string(info.hi) + "]");
  return info.value;
}

Complex ultralimit_complex_strict(const std::function<Complex(int)>& f, const Schedule& schedule,
                                  double cauchy_tol) {
  // Cache the complex values so real and imaginary limits see one evaluation.
  std::map<int, Complex> cache;
  auto cached = [&](int i) {
    auto it = cache.find(i);
    if (it == cache.end()) it = cache.emplace(i, f(i)).first;
    return it->second;
  };
  double re = ultralimit_strict([&](int i) { return cached(i).real(); }, schedule, cauchy_tol);
  double im = ultralimit_strict([&](int i) { return cached(i).imag(); }, schedule, cauchy_tol);
  return {re, im};
}

VectorSequence pushforward(RepSequence reps, const AlgebraElement& phi,
                           std::function<VecC(int)> zeta, std::string name) {
  if (!phi.group()->same_as(*reps.group))
    throw MismatchError("pushforward element lives on a different group");
  VectorSequence seq;
  seq.reps = reps;
  seq.name = std::move(name);
  seq.dominator = phi;
  seq.base = zeta;
  seq.at = [reps, phi, zeta](int i) {
    UnitaryRep rep = reps.at(i);
    return VecC(rep.operator_of(phi) * zeta(i));
  };
  return seq;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    default: return "inconclusive";
  }
}

bool ClassificationReport::agree() const {
  return pointwise.verdict == approx_identity.verdict && pointwise.verdict == uniform.verdict;
}

namespace {

Verdict verdict_from_levels(const std::vector<LimitInfo>& levels, double tol) {
  const LimitInfo& last = levels.back();
  if (last.hi <= tol) return Verdict::Holds;
  bool still_decreasing =
      levels.size() >= 2 && last.hi < levels[levels.size() - 2].hi - tol;
  if (last.lo >= tol && !still_decreasing) return Verdict::Fails;
  return Verdict::Inconclusive;
}

LimitInfo combine_sup(const std::vector<LimitInfo>& parts) {
  LimitInfo out;
  out.converged = true;
  for (const auto& p : parts) {
    out.converged = out.converged && p.converged;
    out.value = std::max(out.value, p.value);
    out.lo = std::max(out.lo, p.lo);
    out.hi = std::max(out.hi, p.hi);
  }
  return out;
}

}  // namespace

ClassificationReport classify_vector(const VectorSequence& seq, const ClassifyOptions& options) {
  ClassifyOptions opt = options;
  if (opt.schedule.empty()) opt.schedule = default_schedule();
  const GroupPtr& group = seq.reps.group;
  const int resolution = group->resolution_limit();

  // Cache the sampled representations and vectors once.
  std::vector<UnitaryRep> reps;
  std::vector<VecC> vecs;
  for (int i : opt.schedule) {
    reps.push_back(seq.reps.at(i));
    vecs.push_back(seq.at(i));
  }
  const int n = static_cast<int>(opt.schedule.size());
  auto displacement = [&](int idx, int g) {
    return (reps[idx].apply(g, vecs[idx]) - vecs[idx]).norm();
  };

  ClassificationReport report;
  report.resolution = resolution;
  report.options = opt;
  report.pointwise.criterion = "pointwise-invariance";
  report.approx_identity.criterion = "approximate-identity";
  report.uniform.criterion = "uniform-invariance";

  Schedule positions(n);
  for (int k = 0; k < n; ++k) positions[k] = k;

  for (int m = 0; m <= resolution; ++m) {
    std::vector<int> um = group->neighborhood(m);

    std::vector<LimitInfo> per_g;
    per_g.reserve(um.size());
    for (int g : um)
      per_g.push_back(
          ultralimit([&](int k) { return displacement(k, g); }, positions, opt.cauchy_tol));
    report.pointwise.by_level.push_back(combine_sup(per_g));

    AlgebraElement em = approximate_identity(group, m);
    std::vector<MatC> em_ops;
    em_ops.reserve(n);
    for (int k = 0; k < n; ++k) em_ops.push_back(reps[k].operator_of(em));
    report.approx_identity.by_level.push_back(ultralimit(
        [&](int k) { return (em_ops[k] * vecs[k] - vecs[k]).norm(); }, positions, opt.cauchy_tol));

    double uniform_value = 0.0;
    for (int k = 0; k < n; ++k)
      for (int g : um) uniform_value = std::max(uniform_value, displacement(k, g));
    LimitInfo u;
    u.converged = true;
    u.value = u.lo = u.hi = uniform_value;
    report.uniform.by_level.push_back(u);
  }

  report.pointwise.verdict = verdict_from_levels(report.pointwise.by_level, opt.tol);
  report.approx_identity.verdict = verdict_from_levels(report.approx_identity.by_level, opt.tol);
  report.uniform.verdict = verdict_from_levels(report.uniform.by_level, opt.tol);

  // Implications: approximate-identity or uniform invariance force pointwise
  // invariance; a contradicting Fails is demoted, never upgraded.
  if (report.pointwise.verdict == Verdict::Fails) {
    if (report.approx_identity.verdict == Verdict::Holds) {
      report.pointwise.verdict = Verdict::Inconclusive;
      report.pointwise.note = "demoted: contradicts implication from approximate-identity";
    } else if (report.uniform.verdict == Verdict::Holds) {
      report.pointwise.verdict = Verdict::Inconclusive;
      report.pointwise.note = "demoted: contradicts implication from uniform-invariance";
    }
  }
  return report;
}

ClassificationReport classify_vector(const VectorSequence& seq) {
  return classify_vector(seq, ClassifyOptions());
}

double domination_residual(const VectorSequence& seq, int level, const Schedule& schedule) {
  if (!seq.dominator || !seq.base)
    throw PreconditionViolation("sequence carries no domination data");
  const AlgebraElement& phi = *seq.dominator;
  std::vector<int> um = seq.reps.group->neighborhood(level);
  double worst = -1e300;
  for (int i : schedule) {
    UnitaryRep rep = seq.reps.at(i);
    VecC xi = seq.at(i);
    double zeta_norm = seq.base(i).norm();
    for (int g : um) {
      double lhs = (rep.apply(g, xi) - xi).norm();
      worst = std::max(worst, lhs - rho_seminorm(phi, g) * zeta_norm);
    }
  }
  return worst;
}

Partition partition_of_unity(const GroupPtr& group, const std::function<double(int)>& rho,
                             double epsilon) {
  if (epsilon <= 0.0) throw PreconditionViolation("partition scale must be positive");
  for (int g : group->neighborhood(group->resolution_limit()))
    if (!(rho(g) < epsilon))
      throw ResolutionExceeded("finest neighborhood does not fit inside {rho < epsilon}");

  Partition part;
  part.epsilon = epsilon;
  std::set<int> covered;
  std::vector<int> order = group->elements();
  for (int center : order) {
    if (covered.count(center)) continue;
    PartitionCell cell;
    cell.center = center;
    int inv = group->inverse(center);
    for (int x : order) {
      if (covered.count(x)) continue;
      bool inside = false;
      try {
        inside = rho(group->mul(inv, x)) < epsilon;
      } catch (const WindowOverflow&) {
        inside = false;
      }
      if (inside) {
        cell.members.push_back(x);
        covered.insert(x);
      }
    }
    if (cell.members.empty())
      throw PreconditionViolation("partition center fails to cover itself (rho(e) >= epsilon?)");
    part.cells.push_back(std::move(cell));
  }
  return part;
}

AlgebraElement cell_indicator(const GroupPtr& group, const PartitionCell& cell) {
  std::map<int, Complex> values;
  for (int x : cell.members) values[x] = 1.0;
  return AlgebraElement::density(group, std::move(values));
}

PartitionBoundReport partition_bound_check(const UnitaryRep& rep, const AlgebraElement& phi,
                                           const AlgebraElement& psi, const VecC& zeta,
                                           double epsilon, double tol) {
  const GroupPtr& group = rep.group();
  if (!phi.nonnegative(1e-12)) throw PreconditionViolation("phi must be nonnegative");
  if (!phi.atoms().empty())
    throw PreconditionViolation("partition bound needs a density (atom-free) phi");

  VecC xi = rep.operator_of(psi) * zeta;
  PartitionBoundReport report;
  report.partition =
      partition_of_unity(group, [&](int g) { return rho_seminorm(psi, g); }, epsilon);
  // Compare through the normalized phi so both sides describe a probability.
  AlgebraElement phi_n = phi.scaled(1.0 / phi.norm1());
  report.lhs = (rep.operator_of(phi_n) * xi - xi).norm();

  double zeta_norm = zeta.norm();
  double rhs = 0.0;
  for (const auto& cell : report.partition.cells) {
    // phi restricted to the cell, normalized to a probability piece.
    std::map<int, Complex> restricted;
    double mass = 0.0;
    for (int x : cell.members) {
      Complex v = phi.density_values().count(x) ? phi.density_values().at(x) : Complex(0.0);
      if (v != Complex(0.0)) restricted[x] = v;
      mass += v.real() * group->haar_weight(x);
    }
    if (mass <= 0.0) continue;
    AlgebraElement piece = AlgebraElement::density(group, std::move(restricted)).scaled(1.0 / mass);
    double center_disp = (rep.apply(cell.center, xi) - xi).norm();
    double r = center_disp + epsilon * zeta_norm;
    report.pieces.push_back(averaged_displacement_check(rep, piece, xi, r));
    rhs += (mass / phi.norm1()) * r;
  }
  report.rhs = rhs;
  bool pieces_ok = true;
  for (const auto& p : report.pieces) pieces_ok = pieces_ok && p.holds;
  report.holds = pieces_ok && report.lhs <= report.rhs + tol;
  return report;
}

NaiveUltraproduct naive_ultraproduct(const VectorSequence& seq, const Schedule& schedule,
                                     double cauchy_tol) {
  if (schedule.empty()) throw PreconditionViolation("empty limit schedule");
  std::vector<UnitaryRep> reps;
  std::vector<VecC> vecs;
  for (int i : schedule) {
    reps.push_back(seq.reps.at(i));
    vecs.push_back(seq.at(i));
  }
  int dim = reps.front().dim();
  int padding = reps.front().padding();
  for (const auto& r : reps)
    if (r.dim() != dim || r.padding() != padding)
      throw MismatchError("entrywise limit needs a constant dimension");

  const GroupPtr& group = seq.reps.group;
  std::vector<int> elems = group->elements();
  std::vector<MatC> mats;
  std::vector<std::vector<MatC>> sampled;  // per schedule index, per element
  sampled.reserve(reps.size());
  for (const auto& r : reps) {
    std::vector<MatC> row;
    row.reserve(elems.size());
    for (int g : elems) row.push_back(r.matrix(g));
    sampled.push_back(std::move(row));
  }
  Schedule positions(reps.size());
  for (int k = 0; k < static_cast<int>(reps.size()); ++k) positions[k] = k;
  for (int gi = 0; gi < static_cast<int>(elems.size()); ++gi) {
    MatC limit(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c)
        limit(r, c) = ultralimit_complex_strict(
            [&](int k) { return sampled[k][gi](r, c); }, positions, cauchy_tol);
    mats.push_back(std::move(limit));
  }
  VecC xi(dim + padding);
  for (int r = 0; r < dim + padding; ++r)
    xi(r) = ultralimit_complex_strict([&](int k) { return Complex(vecs[k](r)); }, positions,
                                      cauchy_tol);
  NaiveUltraproduct out{UnitaryRep::from_matrices(group, std::move(mats), padding), std::move(xi)};
  return out;
}

void write_evidence_csv(const ClassificationReport& report, std::ostream& out) {
  out << "criterion,level,converged,value,lo,hi\n";
  auto dump = [&](const CriterionEvidence& e) {
    for (int m = 0; m < static_cast<int>(e.by_level.size()); ++m) {
      const LimitInfo& li = e.by_level[m];
      out << e.criterion << ',' << m << ',' << (li.converged ? 1 : 0) << ',' << li.value << ','
          << li.lo << ',' << li.hi << '\n';
    }
  };
  dump(report.pointwise);
  dump(report.approx_identity);
  dump(report.uniform);
}

}  // namespace starrep
