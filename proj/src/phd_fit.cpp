#include "phdinf/phd_fit.hpp"

#include <sstream>
#include <string>

#include "phdinf/error.hpp"

namespace phdinf {

std::string_view to_string(PhdVariant v) { return v == PhdVariant::y_based ? "y" : "r"; }

PhdVariant parse_variant(std::string_view text) {
  if (text == "y" || text == "y_based") return PhdVariant::y_based;
  if (text == "r" || text == "r_based") return PhdVariant::r_based;
  fail(ErrorKind::Usage, "unknown PHD variant '" + std::string(text) + "'");
}

SymMatrix hessian_estimate(const SymMatrix& s_inv, const SymMatrix& third) {
  return SymMatrix::symmetrize(s_inv.matrix() * third.matrix() * s_inv.matrix());
}

const SymMatrix& third_moment(const MomentSet& m, PhdVariant v) {
  return v == PhdVariant::y_based ? m.sigma_yxx_hat : m.sigma_rxx_hat;
}

PhdFit fit_from_hessian(const SymMatrix& h, PhdVariant v, Index k) {
  if (k < 1 || k > h.dim()) {
    std::ostringstream msg;
    msg << "rank k = " << k << " must lie in [1, " << h.dim() << "]";
    fail(ErrorKind::InvalidRank, msg.str());
  }
  PhdFit fit;
  fit.variant = v;
  fit.h = h;
  fit.eig = sym_eigen(h);
  fit.k = k;
  fit.gamma_hat = Basis(fit.eig.vectors.leftCols(k));
  fit.p_hat = fit.gamma_hat.projector();
  fit.lambda_hat = fit.eig.values.head(k);
  return fit;
}

PhdFit fit_phd(const MomentSet& m, PhdVariant v, Index k) {
  if (k < 1 || k > m.xbar.size()) {
    std::ostringstream msg;
    msg << "rank k = " << k << " must lie in [1, " << m.xbar.size() << "]";
    fail(ErrorKind::InvalidRank, msg.str());
  }
  return fit_from_hessian(hessian_estimate(m.s_inv, third_moment(m, v)), v, k);
}

PhdFit fit_phd(const Dataset& d, PhdVariant v, Index k) { return fit_phd(compute_moments(d), v, k); }

}  // namespace phdinf
