#include "starrep/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "starrep/errors.hpp"

namespace starrep {

double operator_norm(const MatC& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  if (a.rows() >= 32 || a.cols() >= 32) {
    Eigen::BDCSVD<MatC> svd(a);
    return svd.singularValues()(0);
  }
  Eigen::JacobiSVD<MatC> svd(a);
  return svd.singularValues()(0);
}

MatC pseudo_inverse(const MatC& a, double rel_tol) {
  Eigen::JacobiSVD<MatC> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  double cut = (s.size() ? s(0) : 0.0) * rel_tol;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > cut) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

MatC range_basis(const MatC& a, double rel_tol) {
  Eigen::JacobiSVD<MatC> svd(a, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  double cut = (s.size() ? s(0) : 0.0) * rel_tol;
  int r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  return svd.matrixU().leftCols(r);
}

MatC kernel_basis(const MatC& a, double rel_tol) {
  Eigen::JacobiSVD<MatC> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  double cut = (s.size() ? s(0) : 0.0) * rel_tol;
  int r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  return svd.matrixV().rightCols(a.cols() - r);
}

MatC range_projector(const MatC& a, double rel_tol) {
  MatC q = range_basis(a, rel_tol);
  return q * q.adjoint();
}

MatC range_projector(const std::vector<MatC>& blocks, double rel_tol) {
  if (blocks.empty()) return MatC::Zero(0, 0);
  Eigen::Index rows = blocks.front().rows(), cols = 0;
  for (const auto& b : blocks) cols += b.cols();
  MatC stacked(rows, cols);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    stacked.middleCols(at, b.cols()) = b;
    at += b.cols();
  }
  return range_projector(stacked, rel_tol);
}

BallLeastSquares::BallLeastSquares(MatC a) : a_(std::move(a)) {
  svd_.compute(a_, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd_.singularValues();
  sigma_max_ = s.size() ? s(0) : 0.0;
  double cut = sigma_max_ * 1e-13;
  rank_ = 0;
  while (rank_ < s.size() && s(rank_) > cut) ++rank_;
}

VecC BallLeastSquares::top_right_singular() const {
  if (rank_ == 0) return VecC::Zero(a_.cols());
  return svd_.matrixV().col(0);
}

BallLsqResult BallLeastSquares::solve(const VecC& b) const {
  const auto& s = svd_.singularValues();
  const MatC& u = svd_.matrixU();
  const MatC& v = svd_.matrixV();
  const Eigen::Index n = a_.cols();

  if (rank_ == 0) {
    BallLsqResult r;
    r.witness = VecC::Zero(n);
    r.distance = b.norm();
    return r;
  }

  VecC c = u.adjoint() * b;

  double min_norm_sq = 0.0;
  for (int i = 0; i < rank_; ++i) min_norm_sq += std::norm(c(i)) / (s(i) * s(i));

  VecC coeff = VecC::Zero(s.size());
  if (min_norm_sq <= 1.0) {
    for (int i = 0; i < rank_; ++i) coeff(i) = c(i) / s(i);
  } else {
    // Secular equation: h(lambda) = sum (s_i |c_i| / (s_i^2+lambda))^2 = 1.
    auto h = [&](double lam) {
      double acc = 0.0;
      for (int i = 0; i < rank_; ++i) {
        double t = s(i) / (s(i) * s(i) + lam);
        acc += std::norm(c(i)) * t * t;
      }
      return acc;
    };
    double lo = 0.0, hi = sigma_max_ * (c.norm() + 1.0);
    while (h(hi) > 1.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      (h(mid) > 1.0 ? lo : hi) = mid;
      if (hi - lo <= 1e-16 * (1.0 + hi)) break;
    }
    double lam = 0.5 * (lo + hi);
    for (int i = 0; i < rank_; ++i) coeff(i) = s(i) * c(i) / (s(i) * s(i) + lam);
  }

  BallLsqResult r;
  r.witness = v * coeff;
  if (min_norm_sq > 1.0 && r.witness.norm() > 0) r.witness /= r.witness.norm();
  r.distance = (a_ * r.witness - b).norm();
  return r;
}

BallLsqResult ball_least_squares(const MatC& a, const VecC& target) {
  return BallLeastSquares(a).solve(target);
}

double Rng::uniform() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int Rng::uniform_int(int lo, int hi) {
  return lo + static_cast<int>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
}

double Rng::gaussian() {
  // Marsaglia polar method; deterministic given the seed.
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double x, y, r2;
  do {
    x = 2.0 * uniform() - 1.0;
    y = 2.0 * uniform() - 1.0;
    r2 = x * x + y * y;
  } while (r2 >= 1.0 || r2 == 0.0);
  double f = std::sqrt(-2.0 * std::log(r2) / r2);
  spare_ = y * f;
  have_spare_ = true;
  return x * f;
}

Complex Rng::gaussian_complex() { return {gaussian(), gaussian()}; }

VecC Rng::unit_vector(int dim) {
  VecC v(dim);
  for (int i = 0; i < dim; ++i) v(i) = gaussian_complex();
  double n = v.norm();
  if (n == 0.0) return unit_vector(dim);
  return v / n;
}

VecC Rng::ball_vector(int dim) {
  VecC v = unit_vector(dim);
  // Radius with the density of a uniform draw from the 2*dim real ball.
  double r = std::pow(uniform(), 1.0 / (2.0 * dim));
  return r * v;
}

MatC random_unitary(int dim, Rng& rng) {
  MatC g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = rng.gaussian_complex();
  Eigen::HouseholderQR<MatC> qr(g);
  MatC q = qr.householderQ();
  MatC r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < dim; ++i) {
    Complex d = r(i, i);
    double ad = std::abs(d);
    q.col(i) *= (ad > 0 ? d / ad : Complex(1, 0));
  }
  return q;
}

TrustRegionResult trust_region_min(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double c) {
  const int n = static_cast<int>(a.rows());
  TrustRegionResult out;
  if (n == 0) {
    out.value = c;
    out.minimizer = Eigen::VectorXd();
    return out;
  }
  Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  const Eigen::VectorXd& lam = eig.eigenvalues();
  Eigen::VectorXd beta = eig.eigenvectors().transpose() * b;
  auto assemble = [&](const Eigen::VectorXd& coeff) {
    return Eigen::VectorXd(eig.eigenvectors() * coeff);
  };
  auto quad = [&](const Eigen::VectorXd& v) { return v.dot(sym * v) + 2.0 * b.dot(v) + c; };

  // Interior Newton point, valid only when the quadratic is convex there.
  if (lam(0) > 1e-14) {
    Eigen::VectorXd coeff(n);
    for (int i = 0; i < n; ++i) coeff(i) = -beta(i) / lam(i);
    if (coeff.norm() <= 1.0) {
      out.minimizer = assemble(coeff);
      out.value = quad(out.minimizer);
      return out;
    }
  }

  // Boundary: ||v(mu)||^2 = sum (beta_i / (lam_i + mu))^2 = 1 with
  // mu >= max(0, -lam_min), decreasing in mu.
  double mu_crit = std::max(0.0, -lam(0));
  auto norm_sq_at = [&](double mu) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      double d = lam(i) + mu;
      if (std::abs(d) < 1e-300) return 1e300;
      s += (beta(i) / d) * (beta(i) / d);
    }
    return s;
  };
  double eps = 1e-12 * (1.0 + std::abs(mu_crit));
  if (norm_sq_at(mu_crit + eps) < 1.0) {
    // Degenerate bottom eigenspace: regular part plus a slack direction.
    Eigen::VectorXd coeff = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      double d = lam(i) + mu_crit;
      if (std::abs(d) > 1e-10 * (1.0 + std::abs(lam(n - 1)))) coeff(i) = -beta(i) / d;
    }
    double reg = coeff.squaredNorm();
    double tau = std::sqrt(std::max(0.0, 1.0 - reg));
    coeff(0) += tau;  // bottom eigendirection
    out.minimizer = assemble(coeff);
    out.value = quad(out.minimizer);
    return out;
  }
  double lo = mu_crit + eps, hi = std::max(1.0, 2.0 * lo);
  while (norm_sq_at(hi) > 1.0) hi = 2.0 * hi + 1.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (norm_sq_at(mid) > 1.0 ? lo : hi) = mid;
  }
  double mu = 0.5 * (lo + hi);
  Eigen::VectorXd coeff(n);
  for (int i = 0; i < n; ++i) coeff(i) = -beta(i) / (lam(i) + mu);
  if (coeff.norm() > 0.0) coeff /= coeff.norm();  // certify the sphere constraint
  out.minimizer = assemble(coeff);
  out.value = quad(out.minimizer);
  return out;
}

}  // namespace starrep
