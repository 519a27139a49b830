#pragma once

#include <string_view>

#include "phdinf/linalg.hpp"
#include "phdinf/moments.hpp"

namespace phdinf {

enum class PhdVariant { y_based, r_based };

std::string_view to_string(PhdVariant v);
/// Accepts "y", "r", "y_based", "r_based".
PhdVariant parse_variant(std::string_view text);

/// One estimated average Hessian with its full eigensystem and the leading
/// K-dimensional basis.
struct PhdFit {
  PhdVariant variant = PhdVariant::y_based;
  SymMatrix h;
  EigenSystem eig;
  Index k = 0;
  Basis gamma_hat;
  SymMatrix p_hat;
  Vector lambda_hat;
};

/// Ĥ = S⁻¹·M·S⁻¹ with M = Σ̂_yxx or Σ̂_rxx.
SymMatrix hessian_estimate(const SymMatrix& s_inv, const SymMatrix& third);

/// The weighted third moment a variant uses: Σ̂_yxx or Σ̂_rxx.
const SymMatrix& third_moment(const MomentSet& m, PhdVariant v);

PhdFit fit_phd(const MomentSet& m, PhdVariant v, Index k);
PhdFit fit_phd(const Dataset& d, PhdVariant v, Index k);

/// Wraps an already computed Hessian estimate in a fit.
PhdFit fit_from_hessian(const SymMatrix& h, PhdVariant v, Index k);

}  // namespace phdinf
