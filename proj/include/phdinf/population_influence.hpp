#pragma once

#include <string>
#include <vector>

#include "phdinf/linalg.hpp"
#include "phdinf/phd_fit.hpp"

namespace phdinf {

/// Everything the closed-form RIS needs, whether the values are exact model
/// parameters or their sample estimates.
struct InfluenceParameters {
  Vector mu;
  Matrix sigma_inv;
  Matrix sigma_inv_sqrt;
  Matrix sigma_sqrt;
  Matrix gamma;
  Vector lambda;
  /// I − ΓΓᵀ.
  Matrix residual_projector;
  double mu_y = 0.0;
  Vector sigma_xy;
};

/// Parameters of (Y, X) ~ G with X ~ N_p(μ, Σ) at which influence is
/// evaluated. Requires K >= 1, |λ₁| >= ... >= |λ_K| > 0, pairwise distinct
/// eigenvalues, and the OLS direction Σ⁻¹σ_xy inside span(Γ).
class PopulationModel {
 public:
  PopulationModel(Vector mu, SymMatrix sigma, Basis gamma, Vector lambda, double mu_y, Vector sigma_xy);

  Index p() const { return mu_.size(); }
  Index k() const { return gamma_.rank(); }
  const Vector& mu() const { return mu_; }
  const SymMatrix& sigma() const { return sigma_; }
  const Basis& gamma() const { return gamma_; }
  const Vector& lambda() const { return lambda_; }
  double mu_y() const { return mu_y_; }
  const Vector& sigma_xy() const { return sigma_xy_; }
  /// H̄_x = Γ·diag(λ)·Γᵀ.
  const SymMatrix& h() const { return h_; }
  const InfluenceParameters& parameters() const { return params_; }

 private:
  Vector mu_;
  SymMatrix sigma_;
  Basis gamma_;
  Vector lambda_;
  double mu_y_;
  Vector sigma_xy_;
  SymMatrix h_;
  InfluenceParameters params_;
};

/// A point mass (y0, x0) mixed into G.
struct ContaminationPoint {
  double y0 = 0.0;
  Vector x0;
};

struct RisValue {
  PhdVariant variant = PhdVariant::y_based;
  Index k = 0;
  double value = 0.0;
};

/// Reconstructs H̄_x from the model's eigenpairs.
SymMatrix population_h(const PopulationModel& model);

/// y0 − μ_y − (x0 − μ)ᵀΣ⁻¹σ_xy.
double population_ols_residual(const PopulationModel& model, const ContaminationPoint& pt);

/// Closed-form RIS for direction `k` (0-based) of y-based PHD.
RisValue ris_y(const PopulationModel& model, const ContaminationPoint& pt, Index k);
/// Closed-form RIS for direction `k` (0-based) of r-based PHD.
RisValue ris_r(const PopulationModel& model, const ContaminationPoint& pt, Index k);

/// ‖(I − P)Σ^{-1/2}α_{y,k}‖/|λ_k| with
/// α_{y,k} = {(y0−μ_y)γᵀΣ^{-1/2}z0 − λγᵀΣ^{1/2}z0 − γᵀΣ⁻¹σ_xy}z0 − (y0−μ_y)Σ^{-1/2}γ.
double ris_y_value(const InfluenceParameters& prm, double y0, const Vector& x0, Index k);
/// Same with α_{r,k} = {r0·γᵀΣ^{-1/2}z0 − λγᵀΣ^{1/2}z0}z0 − r0·Σ^{-1/2}γ.
double ris_r_value(const InfluenceParameters& prm, double residual, const Vector& x0, Index k);

/// Mixture moments of G_ε = (1−ε)G + εΔ, exact in ε.
struct ContaminatedMoments {
  Vector mu;
  SymMatrix sigma;
  SymMatrix sigma_yxx;
  SymMatrix sigma_rxx;
  double mu_y = 0.0;
  Vector sigma_xy;
};

ContaminatedMoments contaminated_moments(const PopulationModel& model, const ContaminationPoint& pt, double eps);

/// Uncontaminated moments of G. The third central moments of X must vanish
/// (true under Gaussian X), which the Σ_rxx,ε expansion relies on.
struct BaseMoments {
  Vector mu;
  SymMatrix sigma;
  SymMatrix sigma_yxx;
  double mu_y = 0.0;
  Vector sigma_xy;
};

ContaminatedMoments mix_moments(const BaseMoments& base, const ContaminationPoint& pt, double eps);

/// sin(θ_ε,k)/ε from an explicit eigendecomposition of H(G_ε).
double ris_numeric_oracle(const PopulationModel& model, const ContaminationPoint& pt, Index k, PhdVariant v,
                          double eps = 1e-6);

/// Influence function of the y-based Hessian functional.
SymMatrix if_h_y(const PopulationModel& model, const ContaminationPoint& pt);
/// Influence function of the r-based Hessian functional at the model residual.
SymMatrix if_h_r(const PopulationModel& model, const ContaminationPoint& pt);
/// As above with an externally supplied OLS residual for the point.
SymMatrix if_h_r(const PopulationModel& model, const ContaminationPoint& pt, double residual);

/// ‖(I − P_S)·IF(H)·γ_k‖/|λ_k|.
double ris_from_if(const PopulationModel& model, const SymMatrix& if_h, Index k);

// Single-index cosine model Y = cos(2β₁ᵀX − π/4) + σε, X ~ N(0, I).

struct CosineModelConstants {
  double mu_y;
  double sigma_xy_coef;
  double lambda1;
};

/// (e⁻²/√2, √2·e⁻², −2√2·e⁻²).
CosineModelConstants example42_constants();

/// μ = 0, Σ = I, Γ = β₁, λ₁ from example42_constants.
PopulationModel example42_model(const Vector& beta1);

/// Default cosine model with β₁ = e₁.
PopulationModel example42_model(Index p = 3);

/// The noiseless response cos(2t − π/4) at t = β₁ᵀx0.
double cosine_link(double index);

/// RIS over a (‖x0‖, cos θ₀) grid, row-major with the norm as the slow index.
struct SurfaceGrid {
  std::vector<double> norms;
  std::vector<double> cosines;
  std::vector<double> ris_y;
  std::vector<double> ris_r;

  double at(PhdVariant v, std::size_t norm_index, std::size_t cos_index) const;
};

/// Evaluates the general closed form on every cell and checks it against the
/// c_y/c_r shortcut to 1e-9. `threads` = 0 uses the hardware concurrency.
SurfaceGrid figure1_surface(const PopulationModel& model, const std::vector<double>& norm_grid,
                            const std::vector<double>& cos_grid, unsigned threads = 0);

/// `norm_x0,cos_theta0,ris_y,ris_r`, 17 significant digits.
std::string surface_csv(const SurfaceGrid& grid);

/// `count` evenly spaced points from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, std::size_t count);

}  // namespace phdinf
