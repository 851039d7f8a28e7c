#include "starrep/structure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "starrep/errors.hpp"

namespace starrep {

namespace {

bool same_content(const AlgebraElement& a, const AlgebraElement& b) {
  return (a - b).norm1() <= 1e-12 * (1.0 + a.norm1() + b.norm1());
}

VecC times_i(const VecC& x) { return Complex(0.0, 1.0) * x; }

}  // namespace

BallMaxResult maximize_over_ball(int dim, const std::function<double(const VecC&)>& fn,
                                 const std::function<VecC(const VecC&)>& grad,
                                 const std::vector<VecC>& extra_starts,
                                 const std::function<void(VecC&)>& project,
                                 const BallMaxOptions& opt, Rng& rng) {
  auto proj = [&](VecC& w) {
    if (project) {
      project(w);
      return;
    }
    double n = w.norm();
    if (n > 1.0) w /= n;
  };
  auto num_grad = [&](const VecC& w) {
    const double h = 1e-6;
    VecC g(dim);
    for (int k = 0; k < dim; ++k) {
      VecC wp = w, wm = w;
      wp[k] += h;
      wm[k] -= h;
      double dre = (fn(wp) - fn(wm)) / (2 * h);
      wp = w;
      wm = w;
      wp[k] += Complex(0, h);
      wm[k] -= Complex(0, h);
      double dim_part = (fn(wp) - fn(wm)) / (2 * h);
      g[k] = Complex(dre, dim_part);
    }
    return g;
  };
  auto ascent = [&](const VecC& w0) {
    VecC w = w0;
    double best = fn(w);
    VecC bw = w;
    for (int t = 0; t < opt.iters; ++t) {
      VecC g = grad ? grad(w) : num_grad(w);
      double gn = g.norm();
      if (gn < 1e-13) break;
      w += (opt.step0 / std::sqrt(t + 1.0)) * (g / gn);
      proj(w);
      double v = fn(w);
      if (v > best) {
        best = v;
        bw = w;
      }
    }
    // Polish: gradient-direction hill climb with geometric step shrink, so
    // smooth single-basin objectives resolve well past the coarse phase.
    w = bw;
    double step = opt.step0;
    while (step > 1e-9) {
      VecC g = grad ? grad(w) : num_grad(w);
      double gn = g.norm();
      if (gn < 1e-13) break;
      VecC w2 = w + step * (g / gn);
      proj(w2);
      double v = fn(w2);
      if (v > best + 1e-15) {
        w = w2;
        best = v;
        bw = w;
      } else {
        step *= 0.5;
      }
    }
    return std::make_pair(best, bw);
  };

  BallMaxResult out{-std::numeric_limits<double>::infinity(), VecC::Zero(dim)};
  int total = std::max<int>(opt.multistarts, static_cast<int>(extra_starts.size()));
  for (int s = 0; s < total; ++s) {
    VecC w0;
    if (s < static_cast<int>(extra_starts.size()))
      w0 = extra_starts[s];
    else
      w0 = rng.ball_vector(dim);
    proj(w0);
    auto [v, w] = ascent(w0);
    if (v > out.value) {
      out.value = v;
      out.witness = w;
    }
  }
  return out;
}

MetricStructure MetricStructure::build(
    UnitaryRep rep, const std::vector<std::pair<std::string, AlgebraElement>>& generators,
    const Options& options) {
  if (generators.empty()) throw PreconditionViolation("structure needs at least one generator");
  for (const auto& [label, elem] : generators) {
    if (!elem.group()->same_as(*rep.group()))
      throw MismatchError("generator '" + label + "' lives on a different group");
    if (label.empty()) throw PreconditionViolation("empty generator label");
  }

  struct Entry {
    std::string label;
    AlgebraElement elem;
  };
  std::vector<Entry> all;
  auto find_content = [&](const AlgebraElement& e) -> int {
    for (int i = 0; i < static_cast<int>(all.size()); ++i)
      if (same_content(all[i].elem, e)) return i;
    return -1;
  };

  MetricStructure m;
  for (const auto& [label, elem] : generators) {
    for (const auto& e : all)
      if (e.label == label) throw PreconditionViolation("duplicate generator label '" + label + "'");
    if (find_content(elem) >= 0) continue;  // content-identical generator, keep the first
    all.push_back({label, elem});
    m.generator_labels_.push_back(label);
  }

  // Close under involution (stars of stars come back, so one pass suffices).
  int base_end = static_cast<int>(all.size());
  for (int i = 0; i < base_end; ++i) {
    AlgebraElement star = all[i].elem.involution();
    int j = find_content(star);
    if (j < 0) {
      j = static_cast<int>(all.size());
      all.push_back({all[i].label + "*", star});
    }
    m.involutions_[all[i].label] = all[j].label;
    m.involutions_[all[j].label] = all[i].label;
  }

  // Depth-2 products over the star-closed base, deduplicated by content.
  int prod_base = static_cast<int>(all.size());
  for (int i = 0; i < prod_base; ++i) {
    for (int j = 0; j < prod_base; ++j) {
      AlgebraElement p = convolve(all[i].elem, all[j].elem);
      int k = find_content(p);
      if (k < 0) {
        k = static_cast<int>(all.size());
        all.push_back({all[i].label + "." + all[j].label, p});
      }
      m.products_[{all[i].label, all[j].label}] = all[k].label;
    }
  }
  // Involutions of product sorts: (ab)* = b* a* already sits in the closure.
  for (int i = prod_base; i < static_cast<int>(all.size()); ++i) {
    int j = find_content(all[i].elem.involution());
    if (j >= 0) {
      m.involutions_[all[i].label] = all[j].label;
      m.involutions_[all[j].label] = all[i].label;
    }
  }

  m.rep_ = rep;
  for (auto& e : all) {
    MatC pi_op = rep.operator_of(e.elem);
    double factor = 1.0;
    if (std::find(options.inflate_labels.begin(), options.inflate_labels.end(), e.label) !=
        options.inflate_labels.end())
      factor = options.inflate_factor;
    MatC op = factor * pi_op;
    m.index_[e.label] = static_cast<int>(m.sorts_.size());
    m.sorts_.push_back(
        Sort{e.label, e.elem, std::move(pi_op), op, e.elem.norm1(), factor, BallLeastSquares(op)});
  }
  return m;
}

MetricStructure MetricStructure::build(
    UnitaryRep rep, const std::vector<std::pair<std::string, AlgebraElement>>& generators) {
  return build(std::move(rep), generators, Options());
}

const Sort& MetricStructure::sort(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) throw MissingSort("no sort labelled '" + label + "'");
  return sorts_[it->second];
}

bool MetricStructure::has_sort(const std::string& label) const { return index_.count(label) > 0; }

std::vector<std::string> MetricStructure::labels() const {
  std::vector<std::string> out;
  out.reserve(sorts_.size());
  for (const auto& s : sorts_) out.push_back(s.label);
  return out;
}

std::optional<std::string> MetricStructure::product_label(const std::string& a,
                                                          const std::string& b) const {
  auto it = products_.find({a, b});
  if (it == products_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> MetricStructure::involution_label(const std::string& a) const {
  auto it = involutions_.find(a);
  if (it == involutions_.end()) return std::nullopt;
  return it->second;
}

SortDistanceResult sort_distance(const Sort& s, const VecC& xi) {
  BallLsqResult r = s.solver.solve(xi);
  SortDistanceResult out;
  out.distance = r.distance;
  out.coeff = r.witness;
  out.point = s.op * r.witness;
  return out;
}

SortDistanceResult MetricStructure::sort_distance(const std::string& label, const VecC& xi) const {
  return starrep::sort_distance(sort(label), xi);
}

VecC MetricStructure::apply_pi(const std::string& a, const std::string& b, const VecC& point,
                               double* membership_residual) const {
  auto target = product_label(a, b);
  if (!target) throw MissingSort("no product sort for pi_" + a + " : S_" + b);
  VecC image = sort(a).pi_op * point;
  if (membership_residual) *membership_residual = sort(*target).solver.solve(image).distance;
  return image;
}

double AuditReport::max_residual() const {
  double m = 0.0;
  for (const auto& a : axioms) m = std::max(m, a.residual);
  return m;
}

const AxiomResult& AuditReport::by_name(const std::string& axiom) const {
  for (const auto& a : axioms)
    if (a.axiom == axiom) return a;
  throw PreconditionViolation("no axiom named '" + axiom + "' in report");
}

namespace {

// Mutable accumulator for one axiom: keeps the worst violation found.
struct Acc {
  AxiomResult r;
  explicit Acc(std::string name) { r.axiom = std::move(name); }
  void offer(double value, std::vector<std::pair<std::string, VecC>> witness, std::string note = {},
             double certificate = 0.0) {
    if (value > r.residual) {
      r.residual = value;
      r.witness = std::move(witness);
      r.note = std::move(note);
      r.certificate = certificate;
    }
  }
};

Complex complex_pred(const MetricStructure& m, const VecC& x, const VecC& y) {
  // [x,y] + i [x, iy] recovers the full hermitian product <x,y> = y^* x.
  return Complex(m.predicate(x, y), m.predicate(x, times_i(y)));
}

}  // namespace

BallMaxResult one_sided_hausdorff(const MetricStructure& m, const std::string& a,
                                  const std::string& b, const AuditBudget& budget) {
  const Sort& sa = m.sort(a);
  const Sort& sb = m.sort(b);
  int dim = m.ambient_dim();
  auto fn = [&](const VecC& w) { return sb.solver.solve(sa.op * w).distance; };
  auto grad = [&](const VecC& w) -> VecC {
    VecC y = sa.op * w;
    BallLsqResult inner = sb.solver.solve(y);
    if (inner.distance < 1e-12) return VecC::Zero(dim);
    VecC res = y - sb.op * inner.witness;
    return sa.op.adjoint() * (res / inner.distance);
  };
  Rng rng(budget.seed ^ 0x5d3a9f4b2c1e8d77ULL);
  std::vector<VecC> starts{sa.solver.top_right_singular()};
  BallMaxOptions opt{budget.multistarts, budget.iters, 0.4};
  return maximize_over_ball(dim, fn, grad, starts, nullptr, opt, rng);
}

AuditReport audit_axioms(const MetricStructure& m, const AuditBudget& budget) {
  const auto& sorts = m.sorts();
  const int n = static_cast<int>(sorts.size());
  const int D = m.ambient_dim();
  const UnitaryRep& rep = m.rep();
  BallMaxOptions opt{budget.multistarts, budget.iters, 0.4};

  auto seeded = [&](int axiom_index) {
    return Rng(budget.seed * 1000003ULL + 0x9e3779b97f4a7c15ULL * (axiom_index + 1));
  };
  auto rand_sort = [&](Rng& rng) -> const Sort& { return sorts[rng.uniform_int(0, n - 1)]; };
  auto sample_point = [&](const Sort& s, Rng& rng) { return VecC(s.op * rng.ball_vector(D)); };
  // Exact distance solvers against the honest images pi(a) . Ball.
  std::vector<BallLeastSquares> pi_solver;
  pi_solver.reserve(n);
  for (const auto& s : sorts) pi_solver.emplace_back(s.pi_op);

  AuditReport report;
  report.budget = budget;

  {  // (Conv): sorts are bounded by ||a||_1, symmetric, and midpoint-closed.
    Acc acc("Conv");
    Rng rng = seeded(0);
    for (const auto& s : sorts) {
      double over = s.solver.sigma_max() - s.radius_bound;
      VecC far = s.op * s.solver.top_right_singular();
      acc.offer(over, {{s.label, far}}, "radius(" + s.label + ")", s.solver.sigma_max());
    }
    for (int i = 0; i < budget.samples; ++i) {
      const Sort& s = rand_sort(rng);
      VecC x = sample_point(s, rng), y = sample_point(s, rng);
      acc.offer(s.solver.solve(-x).distance, {{s.label, -x}}, "symmetry(" + s.label + ")");
      VecC mid = 0.5 * (x + y);
      acc.offer(s.solver.solve(mid).distance, {{s.label, mid}}, "midpoint(" + s.label + ")");
    }
    acc.r.seed = budget.seed;
    report.axioms.push_back(acc.r);
  }

  {  // (Sym): [x,y] = [y,x].
    Acc acc("Sym");
    Rng rng = seeded(1);
    for (int i = 0; i < budget.samples; ++i) {
      const Sort& sx = rand_sort(rng);
      const Sort& sy = rand_sort(rng);
      VecC x = sample_point(sx, rng), y = sample_point(sy, rng);
      acc.offer(std::abs(m.predicate(x, y) - m.predicate(y, x)), {{sx.label, x}, {sy.label, y}});
    }
    report.axioms.push_back(acc.r);
  }

  {  // (Lin1): midpoint linearity in the first slot.
    Acc acc("Lin1");
    Rng rng = seeded(2);
    for (int i = 0; i < budget.samples; ++i) {
      const Sort& sx = rand_sort(rng);
      const Sort& sy = rand_sort(rng);
      VecC x = sample_point(sx, rng), x2 = sample_point(sx, rng), y = sample_point(sy, rng);
      double lhs = m.predicate(0.5 * (x + x2), y);
      double rhs = 0.5 * (m.predicate(x, y) + m.predicate(x2, y));
      acc.offer(std::abs(lhs - rhs), {{sx.label, x}, {sx.label, x2}, {sy.label, y}});
    }
    report.axioms.push_back(acc.r);
  }

  {  // (Lin2): midpoint linearity in the second slot.
    Acc acc("Lin2");
    Rng rng = seeded(3);
    for (int i = 0; i < budget.samples; ++i) {
      const Sort& sx = rand_sort(rng);
      const Sort& sy = rand_sort(rng);
      VecC x = sample_point(sx, rng), y = sample_point(sy, rng), y2 = sample_point(sy, rng);
      double lhs = m.predicate(x, 0.5 * (y + y2));
      double rhs = 0.5 * (m.predicate(x, y) + m.predicate(x, y2));
      acc.offer(std::abs(lhs - rhs), {{sx.label, x}, {sy.label, y}, {sy.label, y2}});
    }
    report.axioms.push_back(acc.r);
  }

  {  // (Norm): ||x - y||^2 = [x,x] - 2[x,y] + [y,y] ties the metric to the predicate.
    Acc acc("Norm");
    Rng rng = seeded(4);
    for (int i = 0; i < budget.samples; ++i) {
      const Sort& sx = rand_sort(rng);
      const Sort& sy = rand_sort(rng);
      VecC x = sample_point(sx, rng), y = sample_point(sy, rng);
      double lhs = (x - y).squaredNorm();
      double rhs = m.predicate(x, x) - 2.0 * m.predicate(x, y) + m.predicate(y, y);
      acc.offer(std::abs(lhs - rhs), {{sx.label, x}, {sy.label, y}});
    }
    report.axioms.push_back(acc.r);
  }

  {  // (Pos): Gram matrices of tuples are positive semidefinite.
    Acc acc("Pos");
    Rng rng = seeded(5);
    for (int i = 0; i < budget.samples; ++i) {
      int len = rng.uniform_int(1, std::max(1, budget.tuple_len));
      std::vector<VecC> xs;
      std::vector<double> cs;
      std::vector<std::pair<std::string, VecC>> witness;
      for (int k = 0; k < len; ++k) {
        const Sort& s = rand_sort(rng);
        xs.push_back(sample_point(s, rng));
        cs.push_back(rng.uniform(-1.0, 1.0));
        witness.emplace_back(s.label, xs.back());
      }
      double quad = 0.0;
      for (int p = 0; p < len; ++p)
        for (int q = 0; q < len; ++q) quad += cs[p] * cs[q] * m.predicate(xs[p], xs[q]);
      acc.offer(-quad, std::move(witness));
    }
    report.axioms.push_back(acc.r);
  }

  {  // (Pi1): ||pi_a xi|| <= ||a||_1 ||xi||, with the norm read off the predicate.
    Acc acc("Pi1");
    Rng rng = seeded(6);
    for (const auto& s : sorts) {
      double over = operator_norm(s.pi_op) - s.radius_bound;
      acc.offer(over, {{s.label, VecC::Zero(D)}}, "operator norm(" + s.label + ")");
    }
    for (int i = 0; i < budget.samples; ++i) {
      const Sort& sa = rand_sort(rng);
      int len = rng.uniform_int(1, std::max(1, budget.tuple_len));
      VecC sum = VecC::Zero(D);
      std::vector<VecC> xs;
      std::vector<std::pair<std::string, VecC>> witness;
      for (int k = 0; k < len; ++k) {
        const Sort& s = rand_sort(rng);
        xs.push_back(sample_point(s, rng));
        sum += xs.back();
        witness.emplace_back(s.label, xs.back());
      }
      double gram = 0.0;
      for (const auto& u : xs)
        for (const auto& v : xs) gram += m.predicate(u, v);
      double lhs = (sa.pi_op * sum).norm();
      double rhs = sa.radius_bound * std::sqrt(std::max(gram, 0.0));
      acc.offer(lhs - rhs, std::move(witness), "bound(" + sa.label + ")");
    }
    report.axioms.push_back(acc.r);
  }

  {  // (Pi2): pi is a *-homomorphism: linear, multiplicative, adjoint-compatible.
    Acc acc("Pi2");
    Rng rng = seeded(7);
    for (int i = 0; i < budget.samples; ++i) {
      const Sort& sa = rand_sort(rng);
      const Sort& sb = rand_sort(rng);
      const Sort& sp = rand_sort(rng);
      VecC p = sample_point(sp, rng);
      double alpha = rng.uniform(-2.0, 2.0);
      MatC combo = rep.operator_of(sa.element.scaled(alpha) + sb.element);
      double lin = (combo * p - (alpha * (sa.pi_op * p) + sb.pi_op * p)).norm();
      acc.offer(lin, {{sp.label, p}}, "linear(" + sa.label + "," + sb.label + ")");

      MatC prod_op = rep.operator_of(convolve(sa.element, sb.element));
      double mult = (sa.pi_op * (sb.pi_op * p) - prod_op * p).norm();
      acc.offer(mult, {{sp.label, p}}, "product(" + sa.label + "," + sb.label + ")");

      const Sort& sq = rand_sort(rng);
      VecC q = sample_point(sq, rng);
      MatC star_op = rep.operator_of(sa.element.involution());
      Complex lhs = complex_pred(m, sa.pi_op * p, q);
      Complex rhs = complex_pred(m, p, star_op * q);
      acc.offer(std::abs(lhs - rhs), {{sp.label, p}, {sq.label, q}},
                "adjoint(" + sa.label + ")");
    }
    report.axioms.push_back(acc.r);
  }

  {  // (Complex): the i-symbol is an isometric square root of -1 commuting with pi.
    Acc acc("Complex");
    Rng rng = seeded(8);
    for (int i = 0; i < budget.samples; ++i) {
      const Sort& s = rand_sort(rng);
      const Sort& s2 = rand_sort(rng);
      VecC x = sample_point(s, rng), y = sample_point(s2, rng);
      acc.offer(s.solver.solve(times_i(x)).distance, {{s.label, x}}, "closure(" + s.label + ")");
      acc.offer((times_i(times_i(x)) + x).norm(), {{s.label, x}}, "square");
      acc.offer(std::abs(m.predicate(times_i(x), times_i(y)) - m.predicate(x, y)),
                {{s.label, x}, {s2.label, y}}, "isometry");
      acc.offer((s2.pi_op * times_i(x) - times_i(s2.pi_op * x)).norm(), {{s.label, x}},
                "commutes(" + s2.label + ")");
    }
    report.axioms.push_back(acc.r);
  }

  {  // (BallImg): pi_a maps the ambient unit ball into S_a.
    Acc acc("BallImg");
    Rng rng = seeded(9);
    int cap = std::min(n, budget.pair_cap);
    for (int si = 0; si < cap; ++si) {
      const Sort& s = sorts[si];
      auto fn = [&](const VecC& w) { return s.solver.solve(s.pi_op * w).distance; };
      auto grad = [&](const VecC& w) -> VecC {
        VecC y = s.pi_op * w;
        BallLsqResult inner = s.solver.solve(y);
        if (inner.distance < 1e-12) return VecC::Zero(D);
        return s.pi_op.adjoint() * ((y - s.op * inner.witness) / inner.distance);
      };
      std::vector<VecC> starts{pi_solver[si].top_right_singular()};
      BallMaxResult r = maximize_over_ball(D, fn, grad, starts, nullptr, opt, rng);
      double certified = fn(r.witness);
      acc.offer(certified, {{s.label, VecC(s.pi_op * r.witness)}}, "image(" + s.label + ")",
                certified);
      acc.r.starts += opt.multistarts;
    }
    acc.r.seed = budget.seed;
    report.axioms.push_back(acc.r);
  }

  {  // (DenseImg): every point of S_a is approximated by pi_a of a ball vector.
    Acc acc("DenseImg");
    Rng rng = seeded(10);
    int cap = std::min(n, budget.pair_cap);
    for (int si = 0; si < cap; ++si) {
      const Sort& s = sorts[si];
      auto fn = [&](const VecC& w) { return pi_solver[si].solve(s.op * w).distance; };
      auto grad = [&](const VecC& w) -> VecC {
        VecC xi = s.op * w;
        BallLsqResult inner = pi_solver[si].solve(xi);
        if (inner.distance < 1e-12) return VecC::Zero(D);
        return s.op.adjoint() * ((xi - s.pi_op * inner.witness) / inner.distance);
      };
      std::vector<VecC> starts{s.solver.top_right_singular()};
      BallMaxResult r = maximize_over_ball(D, fn, grad, starts, nullptr, opt, rng);
      double certified = fn(r.witness);
      acc.offer(certified, {{s.label, VecC(s.op * r.witness)}}, "density(" + s.label + ")",
                certified);
      acc.r.starts += opt.multistarts;
    }
    acc.r.seed = budget.seed;
    report.axioms.push_back(acc.r);
  }

  {  // (HausDist): Hausdorff distance of sorts is bounded by the algebra distance.
    Acc acc("HausDist");
    Rng rng = seeded(11);
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) pairs.emplace_back(i, j);
    if (static_cast<int>(pairs.size()) > budget.pair_cap) {
      std::vector<std::pair<int, int>> chosen;
      for (int k = 0; k < budget.pair_cap; ++k)
        chosen.push_back(pairs[rng.uniform_int(0, static_cast<int>(pairs.size()) - 1)]);
      pairs = std::move(chosen);
    }
    for (auto [i, j] : pairs) {
      const Sort& sa = sorts[i];
      const Sort& sb = sorts[j];
      BallMaxResult r = one_sided_hausdorff(m, sa.label, sb.label, budget);
      double bound = (sa.element - sb.element).norm1();
      double certified = sb.solver.solve(sa.op * r.witness).distance;
      acc.offer(certified - bound, {{sa.label, VecC(sa.op * r.witness)}},
                "d(" + sa.label + "," + sb.label + ") vs " + std::to_string(bound), certified);
      acc.r.starts += opt.multistarts;
    }
    acc.r.seed = budget.seed;
    report.axioms.push_back(acc.r);
  }

  for (auto& a : report.axioms) {
    a.residual = std::max(a.residual, 0.0);
    a.seed = budget.seed;
    if (a.starts == 0) a.starts = budget.samples;
  }
  return report;
}

ReconstructionReport reconstruct(const MetricStructure& m, double rank_rel_tol, double tol) {
  const auto& sorts = m.sorts();
  const int D = m.ambient_dim();
  const int n = static_cast<int>(sorts.size());

  // Spanning family: the images of the standard basis under every sort
  // operator.  For very large ambient dimensions the columns are strided down
  // to a cap; rank mismatches from an unlucky stride surface as
  // ReconstructionMismatch rather than a silent wrong answer.
  const int cap = std::max(2048, 4 * D);
  int total = n * D;
  int stride = (total + cap - 1) / cap;
  std::vector<VecC> family;
  for (int idx = 0; idx < total; idx += stride) {
    int si = idx / D, col = idx % D;
    family.push_back(sorts[si].op.col(col));
  }
  const int K = static_cast<int>(family.size());
  MatC X(D, K);
  for (int k = 0; k < K; ++k) X.col(k) = family[k];

  // Gram matrix assembled purely from predicate values: G_jk = <x_j, x_k>
  // read as [x_j,x_k] + i [x_j, i x_k] (with conjugate-transpose symmetry).
  MatC G(K, K);
  for (int j = 0; j < K; ++j)
    for (int k = 0; k < K; ++k) G(j, k) = complex_pred(m, family[k], family[j]);
  G = 0.5 * (G + MatC(G.adjoint()));

  Eigen::SelfAdjointEigenSolver<MatC> eig(G);
  const auto& lam = eig.eigenvalues();
  double lam_max = lam(K - 1);
  if (lam_max <= 0.0) throw ReconstructionMismatch("degenerate spanning family");
  double cut = rank_rel_tol * lam_max;
  int first_kept = 0;
  while (first_kept < K && lam(first_kept) < cut) ++first_kept;
  const int r = K - first_kept;
  if (r == 0) throw ReconstructionMismatch("all Gram eigenvalues below the kernel cutoff");

  ReconstructionReport rep;
  rep.dim_f = r;
  rep.gram_min_kept = lam(first_kept);
  rep.gram_max_dropped = first_kept > 0 ? std::max(lam(first_kept - 1), 0.0) : 0.0;

  MatC W = eig.eigenvectors().rightCols(r);        // K x r
  VecC lam_kept = lam.tail(r).cast<Complex>();
  MatC lam_isqrt = MatC::Zero(r, r), lam_sqrt = MatC::Zero(r, r);
  for (int i = 0; i < r; ++i) {
    lam_sqrt(i, i) = std::sqrt(lam_kept(i).real());
    lam_isqrt(i, i) = 1.0 / std::sqrt(lam_kept(i).real());
  }
  MatC Y = lam_sqrt * W.adjoint();  // r x K, reconstructed coordinates of the family

  // Non-degenerate part of the representation, for the dimension comparison.
  std::vector<MatC> ops;
  ops.reserve(n);
  for (const auto& s : sorts) ops.push_back(s.pi_op);
  MatC stacked(D, n * D);
  for (int i = 0; i < n; ++i) stacked.middleCols(i * D, D) = ops[i];
  MatC Q = range_basis(stacked, std::sqrt(rank_rel_tol));
  rep.nondegenerate_rank = static_cast<int>(Q.cols());
  if (rep.nondegenerate_rank != r)
    throw ReconstructionMismatch("reconstructed dimension " + std::to_string(r) +
                                 " != non-degenerate rank " +
                                 std::to_string(rep.nondegenerate_rank));

  // Induced operators sigma(a) from predicate cross-Grams, and the reference
  // compression pi~(a) = Q^* pi(a) Q.
  MatC Xt = Q.adjoint() * X;  // r x K
  MatC B = Y * Xt.adjoint();  // r x r
  Eigen::JacobiSVD<MatC> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
  MatC U = svd.matrixU() * svd.matrixV().adjoint();  // Procrustes-optimal unitary
  rep.intertwiner = U;

  double vec_res = 0.0;
  for (int k = 0; k < K; ++k) vec_res = std::max(vec_res, (U * Xt.col(k) - Y.col(k)).norm());
  rep.intertwiner_residual = vec_res;

  for (const auto& s : sorts) {
    MatC AX = s.pi_op * X;
    MatC Ma(K, K);
    for (int j = 0; j < K; ++j)
      for (int k = 0; k < K; ++k) Ma(j, k) = complex_pred(m, AX.col(k), family[j]);
    MatC sigma = lam_isqrt * W.adjoint() * Ma * W * lam_isqrt;
    MatC pit = Q.adjoint() * s.pi_op * Q;
    double res = operator_norm(sigma * U - U * pit);
    rep.per_sort_residual.emplace_back(s.label, res);
    rep.intertwiner_residual = std::max(rep.intertwiner_residual, res);
  }

  // The i-symbol must act as the scalar i in reconstructed coordinates.
  MatC Gi(K, K);
  for (int j = 0; j < K; ++j)
    for (int k = 0; k < K; ++k) Gi(j, k) = complex_pred(m, times_i(family[k]), family[j]);
  MatC J = lam_isqrt * W.adjoint() * Gi * W * lam_isqrt;
  rep.complex_structure_residual =
      operator_norm(J - Complex(0, 1) * MatC::Identity(r, r));

  if (rep.intertwiner_residual > tol || rep.complex_structure_residual > tol)
    throw ReconstructionMismatch("no intertwiner within tolerance: residual " +
                                 std::to_string(rep.intertwiner_residual));
  return rep;
}

}  // namespace starrep
