#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "phdinf/linalg.hpp"
#include "phdinf/moments.hpp"
#include "phdinf/phd_fit.hpp"

namespace phdinf {

/// Leave-one-out refit diagnostic: (n−1)·sin of the angle between the k-th
/// refit direction and span(Γ̂). Rows whose deletion leaves a singular
/// covariance are NaN and flagged.
struct SrisResult {
  Matrix values;
  std::vector<bool> order_swap;
  std::vector<bool> degenerate;
};

SrisResult sris(const Dataset& d, const PhdFit& fit, unsigned threads = 0);

/// Empirical RIS: the closed-form population RIS with every parameter
/// replaced by its sample estimate and observation j as the contaminant.
Matrix eris(const Dataset& d, const PhdFit& fit, const MomentSet& m);

/// ERIS through the Hessian influence function, evaluated at the plug-in
/// model (Γ̂, λ̂, x̄, S, ȳ, S·P̂·S⁻¹S_xy). Agrees with `eris` to rounding.
Matrix eris_via_if(const Dataset& d, const PhdFit& fit, const MomentSet& m);

/// Hybrid RIS from the closed-form deletion effect (n−1)(Ĥ − Ĥ₍ⱼ₎).
struct HrisResult {
  Matrix values;
  std::vector<bool> degenerate;
};

HrisResult hris(const Dataset& d, const PhdFit& fit, const MomentSet& m, unsigned threads = 0);

/// Spearman correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

/// Average (1-based) ranks.
std::vector<double> average_ranks(std::span<const double> values);

struct VariantDiagnostics {
  std::vector<double> sris;
  std::vector<double> eris;
  std::vector<double> hris;
  double sris_avg = 0.0;
  double eris_avg = 0.0;
  double hris_avg = 0.0;
  bool order_swap = false;
  bool degenerate_leverage = false;
};

struct InfluenceRecord {
  Index j = 0;
  VariantDiagnostics y;
  VariantDiagnostics r;
  double md = 0.0;

  const VariantDiagnostics& of(PhdVariant v) const { return v == PhdVariant::y_based ? y : r; }
};

enum class CorrelationTarget { eris = 0, hris = 1, md = 2 };

/// Spearman correlation of SRIS against ERIS, HRIS and MD, per variant, for
/// each direction followed by the across-direction average.
struct CorrelationReport {
  Index k = 0;
  std::array<std::array<std::vector<double>, 3>, 2> table;

  /// `column` in [0, k): direction; `column` == k: average.
  double at(PhdVariant v, CorrelationTarget t, Index column) const;
};

struct InfluenceReport {
  Index n = 0;
  Index p = 0;
  Index k = 0;
  PhdFit fit_y;
  PhdFit fit_r;
  /// Sorted by ascending y-based average SRIS (NaN last, then by index).
  std::vector<InfluenceRecord> records;
  CorrelationReport correlations;
};

InfluenceReport influence_report(const Dataset& d, Index k, unsigned threads = 0);

/// `j,variant,direction,sris,eris,hris,md,flags`; j is 1-based, direction is
/// 1..K or `avg`.
std::string report_csv(const InfluenceReport& report);

std::string report_json(const InfluenceReport& report, const std::vector<std::string>& predictor_names);

/// Table-shaped correlation summary:
/// `variant,target,dir1,...,dirK,average`.
std::string correlation_csv(const CorrelationReport& corr);

}  // namespace phdinf
