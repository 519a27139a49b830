#include "phdinf/population_influence.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "phdinf/error.hpp"
#include "phdinf/format.hpp"
#include "phdinf/parallel.hpp"

namespace phdinf {

namespace {

void check_point(const PopulationModel& model, const ContaminationPoint& pt) {
  if (pt.x0.size() != model.p()) fail(ErrorKind::InvalidVector, "contamination point has wrong dimension");
  if (!std::isfinite(pt.y0) || !pt.x0.allFinite()) {
    fail(ErrorKind::InvalidVector, "contamination point must be finite");
  }
}

void check_direction(Index k, Index rank) {
  if (k < 0 || k >= rank) {
    std::ostringstream msg;
    msg << "direction index " << k << " outside [0, " << rank << ")";
    fail(ErrorKind::InvalidRank, msg.str());
  }
}

}  // namespace

PopulationModel::PopulationModel(Vector mu, SymMatrix sigma, Basis gamma, Vector lambda, double mu_y,
                                 Vector sigma_xy)
    : mu_(std::move(mu)),
      sigma_(std::move(sigma)),
      gamma_(std::move(gamma)),
      lambda_(std::move(lambda)),
      mu_y_(mu_y),
      sigma_xy_(std::move(sigma_xy)) {
  const Index p = mu_.size();
  if (sigma_.dim() != p || gamma_.dim() != p || sigma_xy_.size() != p) {
    fail(ErrorKind::InvalidModel, "population model dimensions disagree");
  }
  const Index k = gamma_.rank();
  if (k < 1) fail(ErrorKind::InvalidModel, "population model needs K >= 1");
  if (lambda_.size() != k) fail(ErrorKind::InvalidModel, "need one eigenvalue per basis column");
  if (!mu_.allFinite() || !lambda_.allFinite() || !sigma_xy_.allFinite() || !std::isfinite(mu_y_)) {
    fail(ErrorKind::InvalidModel, "population model has non-finite parameters");
  }
  for (Index i = 0; i < k; ++i) {
    if (lambda_[i] == 0.0) fail(ErrorKind::InvalidModel, "eigenvalues must be nonzero");
    if (i > 0 && std::abs(lambda_[i]) > std::abs(lambda_[i - 1])) {
      fail(ErrorKind::InvalidModel, "eigenvalues must be ordered by descending magnitude");
    }
    for (Index j = 0; j < i; ++j) {
      if (std::abs(lambda_[i] - lambda_[j]) < 1e-9) {
        fail(ErrorKind::DegenerateSpectrum, "population eigenvalues must be distinct");
      }
    }
  }

  params_.mu = mu_;
  params_.sigma_inv = inverse_spd(sigma_).matrix();
  params_.sigma_inv_sqrt = inv_sqrt(sigma_).matrix();
  params_.sigma_sqrt = sqrt_spd(sigma_).matrix();
  params_.gamma = gamma_.columns();
  params_.lambda = lambda_;
  params_.residual_projector = residual_projector(gamma_).matrix();
  params_.mu_y = mu_y_;
  params_.sigma_xy = sigma_xy_;

  const Vector slope = params_.sigma_inv * sigma_xy_;
  if ((params_.residual_projector * slope).norm() > 1e-10 * (1.0 + slope.norm())) {
    fail(ErrorKind::InvalidModel, "OLS direction must lie in span(gamma)");
  }
  h_ = SymMatrix::symmetrize(gamma_.columns() * lambda_.asDiagonal() * gamma_.columns().transpose());
}

SymMatrix population_h(const PopulationModel& model) { return model.h(); }

double population_ols_residual(const PopulationModel& model, const ContaminationPoint& pt) {
  check_point(model, pt);
  const InfluenceParameters& prm = model.parameters();
  return pt.y0 - prm.mu_y - (pt.x0 - prm.mu).dot(prm.sigma_inv * prm.sigma_xy);
}

double ris_y_value(const InfluenceParameters& prm, double y0, const Vector& x0, Index k) {
  const Vector z0 = prm.sigma_inv_sqrt * (x0 - prm.mu);
  const Vector g = prm.gamma.col(k);
  const double lambda = prm.lambda[k];
  const double e = y0 - prm.mu_y;
  const double coef =
      e * g.dot(prm.sigma_inv_sqrt * z0) - lambda * g.dot(prm.sigma_sqrt * z0) - g.dot(prm.sigma_inv * prm.sigma_xy);
  const Vector alpha = coef * z0 - e * (prm.sigma_inv_sqrt * g);
  return (prm.residual_projector * (prm.sigma_inv_sqrt * alpha)).norm() / std::abs(lambda);
}

double ris_r_value(const InfluenceParameters& prm, double residual, const Vector& x0, Index k) {
  const Vector z0 = prm.sigma_inv_sqrt * (x0 - prm.mu);
  const Vector g = prm.gamma.col(k);
  const double lambda = prm.lambda[k];
  const double coef = residual * g.dot(prm.sigma_inv_sqrt * z0) - lambda * g.dot(prm.sigma_sqrt * z0);
  const Vector alpha = coef * z0 - residual * (prm.sigma_inv_sqrt * g);
  return (prm.residual_projector * (prm.sigma_inv_sqrt * alpha)).norm() / std::abs(lambda);
}

RisValue ris_y(const PopulationModel& model, const ContaminationPoint& pt, Index k) {
  check_point(model, pt);
  check_direction(k, model.k());
  return {PhdVariant::y_based, k, ris_y_value(model.parameters(), pt.y0, pt.x0, k)};
}

RisValue ris_r(const PopulationModel& model, const ContaminationPoint& pt, Index k) {
  check_point(model, pt);
  check_direction(k, model.k());
  const double r0 = population_ols_residual(model, pt);
  return {PhdVariant::r_based, k, ris_r_value(model.parameters(), r0, pt.x0, k)};
}

ContaminatedMoments mix_moments(const BaseMoments& base, const ContaminationPoint& pt, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) fail(ErrorKind::InvalidEpsilon, "epsilon must lie in (0, 1)");
  const Vector d = pt.x0 - base.mu;
  const double e = pt.y0 - base.mu_y;
  const double keep = 1.0 - eps;
  const double eps3 = eps * eps * eps;
  const double keep3 = keep * keep * keep;
  const Matrix& sigma = base.sigma.matrix();
  const Matrix dd = d * d.transpose();

  ContaminatedMoments out;
  out.mu = base.mu + eps * d;
  out.mu_y = base.mu_y + eps * e;
  out.sigma = SymMatrix::symmetrize(keep * sigma + eps * keep * dd);
  out.sigma_xy = keep * base.sigma_xy + eps * keep * e * d;

  const Matrix yxx = keep * (base.sigma_yxx.matrix() - eps * (base.sigma_xy * d.transpose() + d * base.sigma_xy.transpose()) -
                             eps * e * sigma - eps3 * e * dd) +
                     eps * keep3 * e * dd;
  out.sigma_yxx = SymMatrix::symmetrize(yxx);

  // E_ε[(uᵀβ)uuᵀ] for u = X − μ_ε; the G part only has terms from the mean shift.
  const Vector beta = inverse_spd(out.sigma).matrix() * out.sigma_xy;
  const double db = d.dot(beta);
  const Vector sb = sigma * beta;
  const Matrix linear_third =
      keep * (-eps * (sb * d.transpose() + d * sb.transpose()) - eps * db * sigma - eps3 * db * dd) +
      eps * keep3 * db * dd;
  out.sigma_rxx = SymMatrix::symmetrize(yxx - linear_third);
  return out;
}

ContaminatedMoments contaminated_moments(const PopulationModel& model, const ContaminationPoint& pt, double eps) {
  check_point(model, pt);
  BaseMoments base;
  base.mu = model.mu();
  base.sigma = model.sigma();
  base.sigma_yxx = SymMatrix::symmetrize(model.sigma().matrix() * model.h().matrix() * model.sigma().matrix());
  base.mu_y = model.mu_y();
  base.sigma_xy = model.sigma_xy();
  return mix_moments(base, pt, eps);
}

double ris_numeric_oracle(const PopulationModel& model, const ContaminationPoint& pt, Index k, PhdVariant v,
                          double eps) {
  check_direction(k, model.k());
  const ContaminatedMoments cm = contaminated_moments(model, pt, eps);
  const SymMatrix s_inv = inverse_spd(cm.sigma);
  const SymMatrix h = hessian_estimate(s_inv, v == PhdVariant::y_based ? cm.sigma_yxx : cm.sigma_rxx);
  const EigenSystem es = sym_eigen(h);

  const Vector g = model.gamma().column(k);
  const Vector overlap = (es.vectors.transpose() * g).cwiseAbs();
  Index best = 0;
  for (Index i = 1; i < overlap.size(); ++i) {
    if (overlap[i] > overlap[best]) best = i;
  }
  for (Index i = 0; i < overlap.size(); ++i) {
    if (i != best && overlap[best] - overlap[i] < 1e-8) {
      fail(ErrorKind::AmbiguousMatch, "perturbed eigenvector match is ambiguous");
    }
  }
  return sine_to_subspace(es.vectors.col(best), model.gamma()) / eps;
}

SymMatrix if_h_y(const PopulationModel& model, const ContaminationPoint& pt) {
  check_point(model, pt);
  const InfluenceParameters& prm = model.parameters();
  const Matrix& h = model.h().matrix();
  const Vector d = pt.x0 - prm.mu;
  const double e = pt.y0 - prm.mu_y;
  const Matrix a = prm.sigma_inv * d * (d.transpose() * h + prm.sigma_xy.transpose() * prm.sigma_inv);
  const Matrix centred = d * d.transpose() - model.sigma().matrix();
  return SymMatrix::symmetrize(h - a - a.transpose() + e * prm.sigma_inv * centred * prm.sigma_inv);
}

SymMatrix if_h_r(const PopulationModel& model, const ContaminationPoint& pt, double residual) {
  check_point(model, pt);
  const InfluenceParameters& prm = model.parameters();
  const Matrix& h = model.h().matrix();
  const Vector d = pt.x0 - prm.mu;
  const Matrix a = prm.sigma_inv * d * (d.transpose() * h);
  const Matrix centred = d * d.transpose() - model.sigma().matrix();
  return SymMatrix::symmetrize(h - a - a.transpose() + residual * prm.sigma_inv * centred * prm.sigma_inv);
}

SymMatrix if_h_r(const PopulationModel& model, const ContaminationPoint& pt) {
  return if_h_r(model, pt, population_ols_residual(model, pt));
}

double ris_from_if(const PopulationModel& model, const SymMatrix& if_h, Index k) {
  check_direction(k, model.k());
  const InfluenceParameters& prm = model.parameters();
  return (prm.residual_projector * (if_h.matrix() * prm.gamma.col(k))).norm() / std::abs(prm.lambda[k]);
}

CosineModelConstants example42_constants() {
  const double e2 = std::exp(-2.0);
  const double root2 = std::numbers::sqrt2;
  return {e2 / root2, root2 * e2, -2.0 * root2 * e2};
}

PopulationModel example42_model(const Vector& beta1) {
  const Index p = beta1.size();
  if (std::abs(beta1.norm() - 1.0) > 1e-10) fail(ErrorKind::InvalidModel, "beta1 must have unit norm");
  const CosineModelConstants c = example42_constants();
  Vector lambda(1);
  lambda << c.lambda1;
  return PopulationModel(Vector::Zero(p), SymMatrix::identity(p), Basis(Matrix(beta1)), lambda, c.mu_y,
                         c.sigma_xy_coef * beta1);
}

PopulationModel example42_model(Index p) {
  if (p < 2) fail(ErrorKind::InvalidModel, "the cosine model needs p >= 2");
  return example42_model(Vector::Unit(p, 0));
}

double cosine_link(double index) { return std::cos(2.0 * index - std::numbers::pi / 4.0); }

double SurfaceGrid::at(PhdVariant v, std::size_t norm_index, std::size_t cos_index) const {
  const std::size_t cell = norm_index * cosines.size() + cos_index;
  return v == PhdVariant::y_based ? ris_y.at(cell) : ris_r.at(cell);
}

SurfaceGrid figure1_surface(const PopulationModel& model, const std::vector<double>& norm_grid,
                            const std::vector<double>& cos_grid, unsigned threads) {
  const Index p = model.p();
  if (model.k() != 1 || p < 2 || max_abs(model.mu()) > 1e-12 ||
      max_abs(model.sigma().matrix() - Matrix::Identity(p, p)) > 1e-12) {
    fail(ErrorKind::UnsupportedModel, "surface requires a single-index model with mu = 0 and Sigma = I");
  }
  for (double c : cos_grid) {
    if (!(c >= -1.0 && c <= 1.0)) fail(ErrorKind::Usage, "cos(theta0) grid values must lie in [-1, 1]");
  }
  for (double r : norm_grid) {
    if (!std::isfinite(r)) fail(ErrorKind::Usage, "norm grid values must be finite");
  }

  const Vector beta = model.gamma().column(0);
  Index axis = 0;
  for (Index i = 1; i < p; ++i) {
    if (std::abs(beta[i]) < std::abs(beta[axis])) axis = i;
  }
  Vector u = Vector::Unit(p, axis) - beta[axis] * beta;
  u.normalize();

  const double lambda = model.lambda()[0];
  const double mu_y = model.mu_y();
  const double b_sxy = beta.dot(model.sigma_xy());

  SurfaceGrid grid;
  grid.norms = norm_grid;
  grid.cosines = cos_grid;
  const std::size_t cells = norm_grid.size() * cos_grid.size();
  grid.ris_y.assign(cells, 0.0);
  grid.ris_r.assign(cells, 0.0);

  parallel_for(cells, threads, [&](std::size_t cell) {
    const double norm = norm_grid[cell / cos_grid.size()];
    const double cos_t = cos_grid[cell % cos_grid.size()];
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    const double proj = norm * cos_t;
    ContaminationPoint pt{cosine_link(proj), norm * (cos_t * beta + sin_t * u)};

    const double general_y = ris_y(model, pt, 0).value;
    const double general_r = ris_r(model, pt, 0).value;

    const double c_y = std::abs(((pt.y0 - mu_y) * proj - lambda * proj - b_sxy) / lambda);
    const double c_r = std::abs(((pt.y0 - mu_y - b_sxy * proj) * proj - lambda * proj) / lambda);
    const double short_y = c_y * norm * sin_t;
    const double short_r = c_r * norm * sin_t;
    if (std::abs(general_y - short_y) > 1e-9 * std::max(1.0, std::abs(short_y)) ||
        std::abs(general_r - short_r) > 1e-9 * std::max(1.0, std::abs(short_r))) {
      fail(ErrorKind::UnsupportedModel, "closed form and single-index shortcut disagree");
    }
    grid.ris_y[cell] = general_y;
    grid.ris_r[cell] = general_r;
  });
  return grid;
}

std::string surface_csv(const SurfaceGrid& grid) {
  std::string out = "norm_x0,cos_theta0,ris_y,ris_r\n";
  for (std::size_t i = 0; i < grid.norms.size(); ++i) {
    for (std::size_t j = 0; j < grid.cosines.size(); ++j) {
      const std::size_t cell = i * grid.cosines.size() + j;
      out += format_double(grid.norms[i]) + ',' + format_double(grid.cosines[j]) + ',' +
             format_double(grid.ris_y[cell]) + ',' + format_double(grid.ris_r[cell]) + '\n';
    }
  }
  return out;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  out.back() = hi;
  return out;
}

}  // namespace phdinf
