#include "phdinf/moments.hpp"

#include <cmath>
#include <sstream>

#include "phdinf/error.hpp"

namespace phdinf {

Dataset::Dataset(Vector y, Matrix x, std::vector<std::string> names)
    : y_(std::move(y)), x_(std::move(x)), names_(std::move(names)) {
  if (y_.size() != x_.rows()) fail(ErrorKind::InvalidMatrix, "y and x row counts differ");
  if (x_.cols() < 1) fail(ErrorKind::InvalidMatrix, "at least one predictor is required");
  if (!y_.allFinite() || !x_.allFinite()) fail(ErrorKind::InvalidMatrix, "dataset has non-finite entries");
  if (y_.size() < x_.cols() + 2) {
    std::ostringstream msg;
    msg << "need n >= p + 2 observations (n = " << y_.size() << ", p = " << x_.cols() << ")";
    fail(ErrorKind::InsufficientData, msg.str());
  }
  if (names_.empty()) {
    for (Index c = 0; c < x_.cols(); ++c) names_.push_back("x" + std::to_string(c + 1));
  }
  if (static_cast<Index>(names_.size()) != x_.cols()) {
    fail(ErrorKind::InvalidMatrix, "predictor name count does not match p");
  }
}

Matrix contract_third(const std::vector<Matrix>& x_third, const Vector& beta) {
  Matrix out = Matrix::Zero(beta.size(), beta.size());
  for (Index a = 0; a < beta.size(); ++a) out += beta[a] * x_third[static_cast<std::size_t>(a)];
  return out;
}

MomentSet compute_moments(const Vector& y, const Matrix& x) {
  const Index n = y.size();
  const Index p = x.cols();
  if (x.rows() != n) fail(ErrorKind::InvalidMatrix, "y and x row counts differ");
  if (n < p + 1) fail(ErrorKind::InsufficientData, "too few observations for an invertible covariance");

  MomentSet m;
  m.n = n;
  m.xbar = x.colwise().mean().transpose();
  m.ybar = y.mean();
  const Matrix dev = x.rowwise() - m.xbar.transpose();
  const Vector e = y.array() - m.ybar;

  const double nd = static_cast<double>(n);
  m.s = SymMatrix::symmetrize(dev.transpose() * dev / (nd - 1.0));
  m.s_inv_sqrt = inv_sqrt(m.s);
  m.s_inv = inverse_spd(m.s);
  m.s_xy = dev.transpose() * e / (nd - 1.0);
  m.ols_slope = m.s_inv.matrix() * m.s_xy;
  m.residuals = e - dev * m.ols_slope;

  m.sigma_yxx_hat = SymMatrix::symmetrize(dev.transpose() * e.asDiagonal() * dev / nd);
  m.sigma_rxx_hat = SymMatrix::symmetrize(dev.transpose() * m.residuals.asDiagonal() * dev / nd);

  m.x_third.assign(static_cast<std::size_t>(p), Matrix::Zero(p, p));
  for (Index a = 0; a < p; ++a) {
    m.x_third[static_cast<std::size_t>(a)] = dev.transpose() * dev.col(a).asDiagonal() * dev;
  }
  return m;
}

MomentSet compute_moments(const Dataset& d) { return compute_moments(d.y(), d.x()); }

std::pair<Vector, double> loo_means(const Dataset& d, const MomentSet& m, Index j) {
  if (j < 0 || j >= d.n()) fail(ErrorKind::Usage, "observation index out of range");
  const double nm1 = static_cast<double>(d.n() - 1);
  const Vector delta = d.x().row(j).transpose() - m.xbar;
  const double eta = d.y()[j] - m.ybar;
  return {m.xbar - delta / nm1, m.ybar - eta / nm1};
}

namespace {

// Σ_{i≠j} (wᵢ + a)(dᵢ + b)(dᵢ + b)ᵀ from the unshifted sums
//   weighted = Σ wᵢdᵢdᵢᵀ, first = Σ wᵢdᵢ, total = Σ wᵢ,
//   cross = Σ dᵢdᵢᵀ, dsum = Σ dᵢ, count = n − 1.
Matrix shifted_third(const Matrix& weighted, const Vector& first, double total, double a,
                     const Vector& b, const Matrix& cross, const Vector& dsum, double count) {
  const Matrix bb = b * b.transpose();
  return weighted + first * b.transpose() + b * first.transpose() + total * bb + a * cross +
         a * (dsum * b.transpose() + b * dsum.transpose()) + a * count * bb;
}

}  // namespace

LooMoments loo_downdate(const Dataset& d, const MomentSet& m, Index j) {
  if (j < 0 || j >= d.n()) fail(ErrorKind::Usage, "observation index out of range");
  const Index p = d.p();
  const double n = static_cast<double>(d.n());
  const double nm1 = n - 1.0;
  const double nm2 = n - 2.0;

  const Vector delta = d.x().row(j).transpose() - m.xbar;
  const double eta = d.y()[j] - m.ybar;
  const Vector z = m.s_inv_sqrt.matrix() * delta;
  const double denom = nm1 * nm1 / n - z.squaredNorm();
  if (std::abs(denom) < 1e-10) {
    std::ostringstream msg;
    msg << "observation " << j << " is at the leverage singularity";
    fail(ErrorKind::DegenerateLeverage, msg.str());
  }

  LooMoments out;
  out.j = j;
  std::tie(out.xbar_j, out.ybar_j) = loo_means(d, m, j);

  const Matrix& root = m.s_inv_sqrt.matrix();
  const Matrix inner = Matrix::Identity(p, p) + z * z.transpose() / denom;
  out.s_inv_j = SymMatrix::symmetrize((nm2 / nm1) * root * inner * root);

  out.s_xy_j = (nm1 * m.s_xy - (n / nm1) * eta * delta) / nm2;
  const Vector slope_j = out.s_inv_j.matrix() * out.s_xy_j;

  // Sums over i ≠ j of full-sample deviations; the subset recentres by
  // dᵢ + δ/(n−1) and eᵢ + η/(n−1).
  const Matrix cross = nm1 * m.s.matrix() - delta * delta.transpose();
  const Vector dsum = -delta;
  const Vector shift = delta / nm1;

  const Matrix y_part = shifted_third(n * m.sigma_yxx_hat.matrix() - eta * delta * delta.transpose(),
                                      nm1 * m.s_xy - eta * delta, -eta, eta / nm1, shift, cross, dsum,
                                      nm1);
  const double db = delta.dot(slope_j);
  const Matrix x_part = shifted_third(contract_third(m.x_third, slope_j) - db * delta * delta.transpose(),
                                      cross * slope_j, -db, shift.dot(slope_j), shift, cross, dsum, nm1);

  out.sigma_yxx_j = SymMatrix::symmetrize(y_part / nm1);
  out.sigma_rxx_j = SymMatrix::symmetrize((y_part - x_part) / nm1);
  return out;
}

Vector mahalanobis(const Dataset& d, const MomentSet& m) {
  const Matrix dev = d.x().rowwise() - m.xbar.transpose();
  const Vector quad = (dev * m.s_inv.matrix()).cwiseProduct(dev).rowwise().sum();
  return quad.cwiseMax(0.0).cwiseSqrt();
}

}  // namespace phdinf
