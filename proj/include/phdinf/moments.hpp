#pragma once

#include <string>
#include <vector>

#include "phdinf/linalg.hpp"

namespace phdinf {

/// n observations of a scalar response and a p-vector predictor.
/// Requires n >= p + 2 and finite entries.
class Dataset {
 public:
  Dataset(Vector y, Matrix x, std::vector<std::string> names = {});

  Index n() const { return y_.size(); }
  Index p() const { return x_.cols(); }
  const Vector& y() const { return y_; }
  const Matrix& x() const { return x_; }
  /// Predictor labels; defaults to x1..xp.
  const std::vector<std::string>& names() const { return names_; }

 private:
  Vector y_;
  Matrix x_;
  std::vector<std::string> names_;
};

/// Sample moments a PHD fit needs. S and S_xy divide by n−1; Σ̂_yxx and
/// Σ̂_rxx divide by n.
struct MomentSet {
  Index n = 0;
  Vector xbar;
  double ybar = 0.0;
  SymMatrix s;
  SymMatrix s_inv;
  SymMatrix s_inv_sqrt;
  Vector s_xy;
  /// OLS slope S⁻¹S_xy.
  Vector ols_slope;
  SymMatrix sigma_yxx_hat;
  SymMatrix sigma_rxx_hat;
  Vector residuals;
  /// x_third[a] = Σᵢ dᵢₐ dᵢdᵢᵀ with dᵢ = xᵢ − x̄. Needed for the closed-form
  /// leave-one-out Σ̂_rxx, where the OLS slope itself moves.
  std::vector<Matrix> x_third;
};

/// Moments of the sample with row j removed.
struct LooMoments {
  Index j = 0;
  Vector xbar_j;
  double ybar_j = 0.0;
  SymMatrix s_inv_j;
  Vector s_xy_j;
  SymMatrix sigma_yxx_j;
  SymMatrix sigma_rxx_j;
};

MomentSet compute_moments(const Dataset& d);

/// Same estimators on raw arrays; requires n >= p + 1 so the covariance can be
/// invertible. Used for leave-one-out refits.
MomentSet compute_moments(const Vector& y, const Matrix& x);

/// Closed-form leave-one-out moments. Throws DegenerateLeverage when
/// (n−1)²/n − z_jᵀz_j is within 1e-10 of zero.
LooMoments loo_downdate(const Dataset& d, const MomentSet& m, Index j);

/// Leave-one-out means only; always defined.
std::pair<Vector, double> loo_means(const Dataset& d, const MomentSet& m, Index j);

/// √((xᵢ − x̄)ᵀS⁻¹(xᵢ − x̄)) for every row.
Vector mahalanobis(const Dataset& d, const MomentSet& m);

/// Σₐ βₐ·x_third[a] = Σᵢ (dᵢᵀβ) dᵢdᵢᵀ.
Matrix contract_third(const std::vector<Matrix>& x_third, const Vector& beta);

}  // namespace phdinf
