#include "phdinf/sample_influence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "phdinf/error.hpp"
#include "phdinf/format.hpp"
#include "phdinf/parallel.hpp"
#include "phdinf/population_influence.hpp"

namespace phdinf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kSwapMargin = 0.2;

void check_eigenvalues(const PhdFit& fit) {
  for (Index k = 0; k < fit.k; ++k) {
    if (std::abs(fit.lambda_hat[k]) < 1e-12) {
      fail(ErrorKind::DegenerateEigenvalue, "an estimated eigenvalue is numerically zero");
    }
  }
}

void check_compatible(const Dataset& d, const PhdFit& fit) {
  if (fit.h.dim() != d.p()) fail(ErrorKind::InvalidMatrix, "fit and dataset dimensions differ");
}

InfluenceParameters sample_parameters(const PhdFit& fit, const MomentSet& m) {
  InfluenceParameters prm;
  prm.mu = m.xbar;
  prm.sigma_inv = m.s_inv.matrix();
  prm.sigma_inv_sqrt = m.s_inv_sqrt.matrix();
  prm.sigma_sqrt = sqrt_spd(m.s).matrix();
  prm.gamma = fit.gamma_hat.columns();
  prm.lambda = fit.lambda_hat;
  prm.residual_projector = residual_projector(fit.gamma_hat).matrix();
  prm.mu_y = m.ybar;
  prm.sigma_xy = m.s_xy;
  return prm;
}

double row_mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<double> row_of(const Matrix& m, Index j) {
  std::vector<double> out(static_cast<std::size_t>(m.cols()));
  for (Index k = 0; k < m.cols(); ++k) out[static_cast<std::size_t>(k)] = m(j, k);
  return out;
}

}  // namespace

SrisResult sris(const Dataset& d, const PhdFit& fit, unsigned threads) {
  check_compatible(d, fit);
  const Index n = d.n();
  const Index p = d.p();
  const Index k = fit.k;
  SrisResult out;
  out.values = Matrix::Constant(n, k, kNaN);
  std::vector<char> swap(static_cast<std::size_t>(n), 0);
  std::vector<char> degenerate(static_cast<std::size_t>(n), 0);

  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t idx) {
    const Index j = static_cast<Index>(idx);
    Vector y(n - 1);
    Matrix x(n - 1, p);
    for (Index i = 0, r = 0; i < n; ++i) {
      if (i == j) continue;
      y[r] = d.y()[i];
      x.row(r) = d.x().row(i);
      ++r;
    }
    EigenSystem es;
    try {
      const MomentSet mj = compute_moments(y, x);
      es = sym_eigen(hessian_estimate(mj.s_inv, third_moment(mj, fit.variant)));
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::NotPositiveDefinite) throw;
      degenerate[idx] = 1;
      return;
    }
    for (Index c = 0; c < k; ++c) {
      const Vector direction = es.vectors.col(c);
      out.values(j, c) = static_cast<double>(n - 1) * sine_to_subspace(direction, fit.gamma_hat);
      const Vector overlap = (es.vectors.transpose() * fit.gamma_hat.column(c)).cwiseAbs();
      for (Index o = 0; o < p; ++o) {
        if (o != c && overlap[o] - overlap[c] > kSwapMargin) swap[idx] = 1;
      }
    }
  });
  out.order_swap.assign(swap.begin(), swap.end());
  out.degenerate.assign(degenerate.begin(), degenerate.end());
  return out;
}

Matrix eris(const Dataset& d, const PhdFit& fit, const MomentSet& m) {
  check_compatible(d, fit);
  check_eigenvalues(fit);
  const InfluenceParameters prm = sample_parameters(fit, m);
  Matrix out(d.n(), fit.k);
  for (Index j = 0; j < d.n(); ++j) {
    const Vector xj = d.x().row(j).transpose();
    for (Index c = 0; c < fit.k; ++c) {
      out(j, c) = fit.variant == PhdVariant::y_based ? ris_y_value(prm, d.y()[j], xj, c)
                                                     : ris_r_value(prm, m.residuals[j], xj, c);
    }
  }
  return out;
}

Matrix eris_via_if(const Dataset& d, const PhdFit& fit, const MomentSet& m) {
  check_compatible(d, fit);
  check_eigenvalues(fit);
  const Vector projected_xy = m.s.matrix() * (fit.p_hat.matrix() * m.ols_slope);
  const PopulationModel plugin(m.xbar, m.s, fit.gamma_hat, fit.lambda_hat, m.ybar, projected_xy);
  Matrix out(d.n(), fit.k);
  for (Index j = 0; j < d.n(); ++j) {
    const ContaminationPoint pt{d.y()[j], d.x().row(j).transpose()};
    const SymMatrix influence =
        fit.variant == PhdVariant::y_based ? if_h_y(plugin, pt) : if_h_r(plugin, pt, m.residuals[j]);
    for (Index c = 0; c < fit.k; ++c) out(j, c) = ris_from_if(plugin, influence, c);
  }
  return out;
}

HrisResult hris(const Dataset& d, const PhdFit& fit, const MomentSet& m, unsigned threads) {
  check_compatible(d, fit);
  check_eigenvalues(fit);
  const Index n = d.n();
  const Matrix q = residual_projector(fit.gamma_hat).matrix();
  HrisResult out;
  out.values = Matrix::Constant(n, fit.k, kNaN);
  std::vector<char> degenerate(static_cast<std::size_t>(n), 0);

  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t idx) {
    const Index j = static_cast<Index>(idx);
    LooMoments loo;
    try {
      loo = loo_downdate(d, m, j);
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::DegenerateLeverage) throw;
      degenerate[idx] = 1;
      return;
    }
    const SymMatrix& third = fit.variant == PhdVariant::y_based ? loo.sigma_yxx_j : loo.sigma_rxx_j;
    const Matrix h_j = hessian_estimate(loo.s_inv_j, third).matrix();
    const Matrix sif = static_cast<double>(n - 1) * (fit.h.matrix() - h_j);
    for (Index c = 0; c < fit.k; ++c) {
      out.values(j, c) = (q * (sif * fit.gamma_hat.column(c))).norm() / std::abs(fit.lambda_hat[c]);
    }
  });
  out.degenerate.assign(degenerate.begin(), degenerate.end());
  return out;
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t end = i + 1;
    while (end < n && values[order[end]] == values[order[i]]) ++end;
    // Positions i..end-1 share the mean of 1-based ranks i+1..end.
    const double rank = 0.5 * static_cast<double>(i + 1 + end);
    for (std::size_t t = i; t < end; ++t) ranks[order[t]] = rank;
    i = end;
  }
  return ranks;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorKind::InvalidVector, "spearman inputs differ in length");
  if (a.size() < 2) fail(ErrorKind::InsufficientData, "spearman needs at least two observations");
  const std::vector<double> ra = average_ranks(a);
  const std::vector<double> rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n + 1.0) / 2.0;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - mean) * (rb[i] - mean);
    saa += (ra[i] - mean) * (ra[i] - mean);
    sbb += (rb[i] - mean) * (rb[i] - mean);
  }
  if (saa == 0.0 || sbb == 0.0) fail(ErrorKind::UndefinedCorrelation, "spearman input is constant");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double CorrelationReport::at(PhdVariant v, CorrelationTarget t, Index column) const {
  return table[static_cast<std::size_t>(v)][static_cast<std::size_t>(t)].at(static_cast<std::size_t>(column));
}

namespace {

// Spearman over the rows where both series are present; NaN if undefined.
double complete_spearman(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> fa, fb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isnan(a[i]) || std::isnan(b[i])) continue;
    fa.push_back(a[i]);
    fb.push_back(b[i]);
  }
  try {
    return spearman(fa, fb);
  } catch (const Error&) {
    return kNaN;
  }
}

VariantDiagnostics diagnostics_for(Index j, const SrisResult& s, const Matrix& e, const HrisResult& h) {
  VariantDiagnostics out;
  out.sris = row_of(s.values, j);
  out.eris = row_of(e, j);
  out.hris = row_of(h.values, j);
  out.sris_avg = row_mean(out.sris);
  out.eris_avg = row_mean(out.eris);
  out.hris_avg = row_mean(out.hris);
  out.order_swap = s.order_swap[static_cast<std::size_t>(j)];
  out.degenerate_leverage = s.degenerate[static_cast<std::size_t>(j)] || h.degenerate[static_cast<std::size_t>(j)];
  return out;
}

}  // namespace

InfluenceReport influence_report(const Dataset& d, Index k, unsigned threads) {
  const MomentSet m = compute_moments(d);
  InfluenceReport report;
  report.n = d.n();
  report.p = d.p();
  report.k = k;
  report.fit_y = fit_phd(m, PhdVariant::y_based, k);
  report.fit_r = fit_phd(m, PhdVariant::r_based, k);
  const Vector md = mahalanobis(d, m);

  const SrisResult sris_y = sris(d, report.fit_y, threads);
  const SrisResult sris_r = sris(d, report.fit_r, threads);
  const Matrix eris_y = eris(d, report.fit_y, m);
  const Matrix eris_r = eris(d, report.fit_r, m);
  const HrisResult hris_y = hris(d, report.fit_y, m, threads);
  const HrisResult hris_r = hris(d, report.fit_r, m, threads);

  std::vector<InfluenceRecord> records(static_cast<std::size_t>(d.n()));
  for (Index j = 0; j < d.n(); ++j) {
    InfluenceRecord& rec = records[static_cast<std::size_t>(j)];
    rec.j = j;
    rec.md = md[j];
    rec.y = diagnostics_for(j, sris_y, eris_y, hris_y);
    rec.r = diagnostics_for(j, sris_r, eris_r, hris_r);
  }

  report.correlations.k = k;
  for (PhdVariant v : {PhdVariant::y_based, PhdVariant::r_based}) {
    auto& per_variant = report.correlations.table[static_cast<std::size_t>(v)];
    for (auto& column : per_variant) column.assign(static_cast<std::size_t>(k + 1), kNaN);
    for (Index c = 0; c <= k; ++c) {
      std::vector<double> s, e, h, dist;
      for (const InfluenceRecord& rec : records) {
        const VariantDiagnostics& dv = rec.of(v);
        const bool avg = c == k;
        s.push_back(avg ? dv.sris_avg : dv.sris[static_cast<std::size_t>(c)]);
        e.push_back(avg ? dv.eris_avg : dv.eris[static_cast<std::size_t>(c)]);
        h.push_back(avg ? dv.hris_avg : dv.hris[static_cast<std::size_t>(c)]);
        dist.push_back(rec.md);
      }
      per_variant[0][static_cast<std::size_t>(c)] = complete_spearman(s, e);
      per_variant[1][static_cast<std::size_t>(c)] = complete_spearman(s, h);
      per_variant[2][static_cast<std::size_t>(c)] = complete_spearman(s, dist);
    }
  }

  std::stable_sort(records.begin(), records.end(), [](const InfluenceRecord& a, const InfluenceRecord& b) {
    const bool na = std::isnan(a.y.sris_avg);
    const bool nb = std::isnan(b.y.sris_avg);
    if (na != nb) return nb;
    if (!na && a.y.sris_avg != b.y.sris_avg) return a.y.sris_avg < b.y.sris_avg;
    return a.j < b.j;
  });
  report.records = std::move(records);
  return report;
}

namespace {

std::string flag_text(const VariantDiagnostics& dv) {
  std::string out;
  if (dv.order_swap) out += "order_swap";
  if (dv.degenerate_leverage) out += std::string(out.empty() ? "" : "|") + "degenerate_leverage";
  return out;
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json numbers(const std::vector<double>& v) {
  nlohmann::json out = nlohmann::json::array();
  for (double x : v) out.push_back(number_or_null(x));
  return out;
}

nlohmann::json fit_json(const PhdFit& fit) {
  nlohmann::json out;
  std::vector<double> values(fit.eig.values.data(), fit.eig.values.data() + fit.eig.values.size());
  out["eigenvalues"] = numbers(values);
  nlohmann::json basis = nlohmann::json::array();
  for (Index c = 0; c < fit.k; ++c) {
    const Vector col = fit.gamma_hat.column(c);
    basis.push_back(numbers(std::vector<double>(col.data(), col.data() + col.size())));
  }
  out["basis"] = basis;
  return out;
}

nlohmann::json diagnostics_json(const VariantDiagnostics& dv) {
  nlohmann::json out;
  out["sris"] = numbers(dv.sris);
  out["eris"] = numbers(dv.eris);
  out["hris"] = numbers(dv.hris);
  out["sris_avg"] = number_or_null(dv.sris_avg);
  out["eris_avg"] = number_or_null(dv.eris_avg);
  out["hris_avg"] = number_or_null(dv.hris_avg);
  nlohmann::json flags = nlohmann::json::array();
  if (dv.order_swap) flags.push_back("order_swap");
  if (dv.degenerate_leverage) flags.push_back("degenerate_leverage");
  out["flags"] = flags;
  return out;
}

}  // namespace

std::string report_csv(const InfluenceReport& report) {
  std::string out = "j,variant,direction,sris,eris,hris,md,flags\n";
  for (const InfluenceRecord& rec : report.records) {
    for (PhdVariant v : {PhdVariant::y_based, PhdVariant::r_based}) {
      const VariantDiagnostics& dv = rec.of(v);
      const std::string prefix = std::to_string(rec.j + 1) + ',' + std::string(to_string(v)) + ',';
      const std::string tail = ',' + format_double(rec.md) + ',' + flag_text(dv) + '\n';
      for (std::size_t c = 0; c < dv.sris.size(); ++c) {
        out += prefix + std::to_string(c + 1) + ',' + format_double(dv.sris[c]) + ',' + format_double(dv.eris[c]) +
               ',' + format_double(dv.hris[c]) + tail;
      }
      out += prefix + "avg," + format_double(dv.sris_avg) + ',' + format_double(dv.eris_avg) + ',' +
             format_double(dv.hris_avg) + tail;
    }
  }
  return out;
}

std::string correlation_csv(const CorrelationReport& corr) {
  std::string out = "variant,target";
  for (Index c = 0; c < corr.k; ++c) out += ",dir" + std::to_string(c + 1);
  out += ",average\n";
  const char* targets[] = {"eris", "hris", "md"};
  for (PhdVariant v : {PhdVariant::y_based, PhdVariant::r_based}) {
    for (std::size_t t = 0; t < 3; ++t) {
      out += std::string(to_string(v)) + ',' + targets[t];
      for (double x : corr.table[static_cast<std::size_t>(v)][t]) out += ',' + format_double(x);
      out += '\n';
    }
  }
  return out;
}

std::string report_json(const InfluenceReport& report, const std::vector<std::string>& predictor_names) {
  nlohmann::json doc;
  doc["n"] = report.n;
  doc["p"] = report.p;
  doc["k"] = report.k;
  doc["predictors"] = predictor_names;
  doc["fits"]["y"] = fit_json(report.fit_y);
  doc["fits"]["r"] = fit_json(report.fit_r);

  nlohmann::json records = nlohmann::json::array();
  for (const InfluenceRecord& rec : report.records) {
    nlohmann::json r;
    r["j"] = rec.j + 1;
    r["md"] = number_or_null(rec.md);
    r["y"] = diagnostics_json(rec.y);
    r["r"] = diagnostics_json(rec.r);
    records.push_back(std::move(r));
  }
  doc["records"] = std::move(records);

  const char* targets[] = {"eris", "hris", "md"};
  for (PhdVariant v : {PhdVariant::y_based, PhdVariant::r_based}) {
    for (std::size_t t = 0; t < 3; ++t) {
      doc["correlations"][std::string(to_string(v))][targets[t]] =
          numbers(report.correlations.table[static_cast<std::size_t>(v)][t]);
    }
  }
  return doc.dump(2) + '\n';
}

}  // namespace phdinf
