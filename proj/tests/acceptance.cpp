// Acceptance gate. Prints one PASS/FAIL line per criterion; `--criterion ID`
// runs a single one. Exit status is nonzero if any selected criterion fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "phdinf/cli.hpp"
#include "phdinf/cli_io.hpp"
#include "phdinf/model_sim.hpp"
#include "phdinf/parallel.hpp"
#include "phdinf/population_influence.hpp"
#include "phdinf/sample_influence.hpp"
#include "test_util.hpp"

using namespace phdinf;
namespace fs = std::filesystem;

namespace {

constexpr PhdVariant kY = PhdVariant::y_based;
constexpr PhdVariant kR = PhdVariant::r_based;

const std::string kHitters = PHDINF_TEST_DATA "/hitters.csv";

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  std::ostringstream out;
  out.precision(4);
  out << v;
  return out.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("phdinf_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// Quiet CLI invocation: stdout is only chatter for these runs.
int run_cli(const std::vector<std::string>& args) {
  std::streambuf* saved = std::cout.rdbuf();
  std::ostringstream sink;
  std::cout.rdbuf(sink.rdbuf());
  const int code = cli::run(args);
  std::cout.rdbuf(saved);
  return code;
}

PopulationModel general_model(Index p, std::uint64_t seed, bool identity) {
  const Matrix g = testutil::random_orthonormal(p, 2, seed);
  const SymMatrix sigma = identity ? SymMatrix::identity(p) : testutil::random_spd(p, seed + 1);
  const Vector mu = identity ? Vector::Zero(p) : Vector(testutil::gaussian(p, 1, seed + 2).col(0));
  Vector lambda(2);
  lambda << 1.3, -0.6;
  Vector a(2);
  a << 0.4, -0.25;
  return PopulationModel(mu, sigma, Basis(g), lambda, 0.7, sigma.matrix() * g * a);
}

std::vector<ContaminationPoint> random_points(const PopulationModel& model, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  const SymMatrix root = sqrt_spd(model.sigma());
  std::vector<ContaminationPoint> out;
  for (int i = 0; i < count; ++i) {
    Vector u(model.p());
    for (Index c = 0; c < model.p(); ++c) u[c] = 1.5 * z(rng);
    out.push_back({model.mu_y() + 1.5 * z(rng), model.mu() + root.matrix() * u});
  }
  return out;
}

IngestResult hitters() {
  IngestConfig cfg;
  cfg.response_column = "Salary";
  cfg.log_response = true;
  return ingest_csv(kHitters, cfg);
}

// 1. Closed-form RIS against the ε-perturbation oracle.
Outcome theorem_vs_oracle() {
  const std::vector<PopulationModel> models = {example42_model(3), general_model(4, 11, true),
                                               general_model(5, 12, false)};
  double worst = 0.0;
  int checks = 0;
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const PopulationModel& model = models[mi];
    for (const auto& pt : random_points(model, 20, 100 + mi)) {
      for (Index k = 0; k < model.k(); ++k) {
        for (PhdVariant v : {kY, kR}) {
          const double closed = v == kY ? ris_y(model, pt, k).value : ris_r(model, pt, k).value;
          const double oracle = ris_numeric_oracle(model, pt, k, v, 1e-6);
          worst = std::max(worst, std::abs(closed - oracle) / std::max(closed, 1e-8));
          ++checks;
        }
      }
    }
  }
  return {worst <= 1e-3, std::to_string(checks) + " comparisons, max relative error " + num(worst) + " (tol 1e-3)"};
}

// 2. Monte Carlo constants through the CLI.
Outcome appendix_constants() {
  const fs::path out = scratch("constants") / "constants.txt";
  const int code = run_cli({"validate-constants", "--n", "10000000", "--sigma", "0.5", "--seed", "7", "--output",
                            out.string()});
  const std::string report = read_file(out);
  int passes = 0;
  std::string lambda_line;
  std::istringstream lines(report);
  for (std::string line; std::getline(lines, line);) {
    if (line.rfind("PASS ", 0) == 0) ++passes;
    if (line.find(" lambda1 ") != std::string::npos) lambda_line = line;
  }
  const bool pass = code == 0 && passes == 4;
  return {pass, "exit " + std::to_string(code) + "; " + lambda_line};
}

// 3. Exact zeros and equalities in the identity-covariance settings.
Outcome orthogonal_exactness() {
  double worst_r = 0.0, worst_y = 0.0, worst_eq = 0.0;
  const PopulationModel model = general_model(5, 21, true);
  const Vector raw = testutil::gaussian(5, 1, 22).col(0);
  const Vector u = (residual_projector(model.gamma()).matrix() * raw).normalized();
  for (double c : {-2.5, -0.4, 1.0, 3.0}) {
    for (double y0 : {-1.0, 0.2, 5.0}) {
      const ContaminationPoint pt{y0, c * u};
      for (Index k = 0; k < 2; ++k) {
        worst_r = std::max(worst_r, ris_r(model, pt, k).value);
        const double expected = std::abs(c * model.sigma_xy().dot(model.gamma().column(k)) / model.lambda()[k]);
        worst_y = std::max(worst_y, std::abs(ris_y(model, pt, k).value - expected));
      }
    }
  }
  for (bool identity : {true, false}) {
    const PopulationModel base = general_model(4, 23, identity);
    const PopulationModel flat(base.mu(), base.sigma(), base.gamma(), base.lambda(), base.mu_y(), Vector::Zero(4));
    for (const auto& pt : random_points(flat, 20, 24)) {
      for (Index k = 0; k < 2; ++k) {
        worst_eq = std::max(worst_eq, std::abs(ris_y(flat, pt, k).value - ris_r(flat, pt, k).value));
      }
    }
  }
  const bool pass = worst_r <= 1e-12 && worst_y <= 1e-12 && worst_eq <= 1e-12;
  return {pass, "max ris_r off-span " + num(worst_r) + ", max |ris_y - |c s'g/l|| " + num(worst_y) +
                    ", max |ris_y - ris_r| without trend " + num(worst_eq) + " (tol 1e-12)"};
}

// 4. Surface checkpoints on the cosine model.
Outcome surface_checkpoints() {
  const PopulationModel model = example42_model(3);
  const auto norms = linspace(0.0, 3.0, 61);
  const auto cosines = linspace(-1.0, 1.0, 61);
  const SurfaceGrid g = figure1_surface(model, norms, cosines, 0);
  const double at_y = g.at(kY, 40, 30), at_r = g.at(kR, 40, 30);
  double edge = 0.0;
  for (std::size_t i = 0; i < norms.size(); ++i) {
    for (std::size_t c : {std::size_t{0}, cosines.size() - 1}) {
      edge = std::max({edge, g.at(kY, i, c), g.at(kR, i, c)});
    }
  }
  const SurfaceGrid cross = figure1_surface(model, {2.0}, linspace(-1.0, 1.0, 201), 0);
  const double max_y = *std::max_element(cross.ris_y.begin(), cross.ris_y.end());
  const double max_r = *std::max_element(cross.ris_r.begin(), cross.ris_r.end());
  const bool pass = std::abs(at_y - 1.0) <= 1e-9 && std::abs(at_r) <= 1e-9 && edge <= 1e-9 && max_r > max_y;
  return {pass, "(2,0) -> (" + num(at_y) + ", " + num(at_r) + "), max at cos=+-1 " + num(edge) +
                    ", radius-2 max r " + num(max_r) + " vs y " + num(max_y)};
}

// 5. Leave-one-out downdates against brute-force refits.
Outcome downdate_correctness() {
  const Dataset d = testutil::nonlinear_data(40, 4, 51);
  const Index n = d.n(), p = d.p();
  const MomentSet m = compute_moments(d);
  const testutil::Naive full = testutil::naive_moments(d.y(), d.x());
  double worst = 0.0;
  std::vector<PhdFit> fits = {fit_phd(m, kY, 2), fit_phd(m, kR, 2)};
  std::vector<Matrix> h_closed = {hris(d, fits[0], m, 1).values, hris(d, fits[1], m, 1).values};
  for (Index j = 0; j < n; ++j) {
    const LooMoments loo = loo_downdate(d, m, j);
    Vector yj;
    Matrix xj;
    testutil::drop_row(d.y(), d.x(), j, yj, xj);
    const testutil::Naive ref = testutil::naive_moments(yj, xj);
    worst = std::max(worst, testutil::rel_err(loo.s_inv_j.matrix(), ref.s.fullPivLu().inverse()));
    worst = std::max(worst, testutil::rel_err(loo.sigma_yxx_j.matrix(), ref.syxx));
    worst = std::max(worst, testutil::rel_err(loo.sigma_rxx_j.matrix(), ref.srxx));
    for (int v = 0; v < 2; ++v) {
      const PhdFit& fit = fits[static_cast<std::size_t>(v)];
      const Matrix h = testutil::naive_hessian(full, fit.variant);
      const Matrix hj = testutil::naive_hessian(ref, fit.variant);
      const Matrix q = Matrix::Identity(p, p) - fit.p_hat.matrix();
      for (Index k = 0; k < 2; ++k) {
        const double brute = (q * (double(n - 1) * (h - hj)) * fit.gamma_hat.column(k)).norm() /
                             std::abs(fit.lambda_hat[k]);
        worst = std::max(worst, std::abs(h_closed[static_cast<std::size_t>(v)](j, k) - brute) /
                                    std::max(1.0, std::abs(brute)));
      }
    }
  }
  return {worst <= 1e-9, "n=40 p=4, all j, both variants: max relative error " + num(worst) + " (tol 1e-9)"};
}

// 6a-6d. Hitters reproduction.
Outcome hitters_n() {
  const IngestResult r = hitters();
  return {r.data.n() == 263, "n=" + std::to_string(r.data.n()) + ", p=" + std::to_string(r.data.p()) +
                                 " (16 numeric predictors, response log Salary)"};
}

Outcome hitters_eigenvalues() {
  const PhdFit fit = fit_phd(hitters().data, kY, 2);
  const double expected[3] = {0.0314, 0.0238, 0.0060};
  bool pass = true;
  std::string detail = "top |lambda|:";
  for (int i = 0; i < 3; ++i) {
    const double got = std::abs(fit.eig.values[i]);
    pass = pass && std::abs(got - expected[i]) <= 0.003;
    detail += " " + num(got);
  }
  return {pass, detail + " vs 0.0314 0.0238 0.0060 (tol 0.003)"};
}

Outcome hitters_table() {
  const InfluenceReport report = influence_report(hitters().data, 2, 0);
  const double table[2][3][3] = {{{0.898, 0.922, 0.935}, {0.996, 0.992, 0.995}, {0.435, 0.388, 0.506}},
                                 {{0.912, 0.776, 0.821}, {0.999, 0.946, 0.952}, {0.388, 0.544, 0.564}}};
  double worst = 0.0;
  for (int v = 0; v < 2; ++v)
    for (int t = 0; t < 3; ++t)
      for (int c = 0; c < 3; ++c) {
        const double got =
            report.correlations.at(static_cast<PhdVariant>(v), static_cast<CorrelationTarget>(t), c);
        worst = std::max(worst, std::abs(got - table[v][t][c]));
      }
  return {worst <= 0.05, "18 Spearman cells, max |deviation| " + num(worst) + " (tol 0.05)"};
}

Outcome hitters_sris_ratio() {
  const InfluenceReport report = influence_report(hitters().data, 2, 0);
  double max_y = 0.0, max_r = 0.0;
  for (const auto& rec : report.records) {
    if (std::isfinite(rec.y.sris_avg)) max_y = std::max(max_y, rec.y.sris_avg);
    if (std::isfinite(rec.r.sris_avg)) max_r = std::max(max_r, rec.r.sris_avg);
  }
  const double ratio = max_r / max_y;
  return {ratio > 3.0, "max avg SRIS r " + num(max_r) + " / y " + num(max_y) + " = " + num(ratio) + " (need > 3)"};
}

// 7. Two ERIS routes.
Outcome eris_routes() {
  double worst = 0.0;
  for (std::uint64_t seed : {71, 72, 73}) {
    const Dataset d = testutil::nonlinear_data(60, 4, seed);
    const MomentSet m = compute_moments(d);
    for (PhdVariant v : {kY, kR}) {
      const PhdFit fit = fit_phd(m, v, 2);
      worst = std::max(worst, (eris(d, fit, m) - eris_via_if(d, fit, m)).cwiseAbs().maxCoeff());
    }
  }
  return {worst <= 1e-9, "max |plug-in - influence-function route| " + num(worst) + " (tol 1e-9)"};
}

// 8. Thread-count invariance of output files.
Outcome determinism() {
  const fs::path dir = scratch("determinism");
  std::vector<std::string> mismatches;
  // Each command runs with --threads 1, the default, and --threads 4 (the
  // default alone is a single thread on one-core machines).
  const std::vector<std::string> settings = {"1", "default", "4"};
  const auto both = [&](const std::string& tag, const std::vector<std::string>& args,
                        const std::vector<std::string>& files, bool dir_output) {
    const auto target = [&](const std::string& threads) { return dir / (tag + "_" + threads); };
    for (const std::string& threads : settings) {
      auto a = args;
      if (threads != "default") {
        a.push_back("--threads");
        a.push_back(threads);
      }
      a.push_back(dir_output ? "--output-dir" : "--output");
      a.push_back(target(threads).string());
      if (run_cli(a) != 0) mismatches.push_back(tag + " failed");
    }
    for (const std::string& threads : settings) {
      for (const auto& f : files) {
        const std::string reference = read_file(f.empty() ? target("1") : target("1") / f);
        const std::string other = read_file(f.empty() ? target(threads) : target(threads) / f);
        if (reference.empty() || reference != other) mismatches.push_back(tag + "/" + f + "@" + threads);
      }
    }
  };
  // Criterion 4 surface, criterion 5 style influence run on seeded data, Hitters influence.
  both("surface", {"surface", "--norm-max", "3", "--grid", "61"}, {""}, false);
  const fs::path sim = dir / "sim.csv";
  run_cli({"simulate", "--model", "cosine", "--n", "40", "--p", "4", "--seed", "5", "--output", sim.string()});
  both("influence_sim", {"influence", "--input", sim.string(), "--response", "y", "--k", "2"},
       {"influence.csv", "influence.json", "correlations.csv"}, true);
  both("influence_hitters", {"influence", "--input", kHitters, "--response", "Salary", "--log-response", "--k", "2"},
       {"influence.csv", "influence.json", "correlations.csv"}, true);

  // Library-level parallel paths used by criteria 1-5.
  const Dataset d = testutil::nonlinear_data(40, 4, 51);
  const MomentSet m = compute_moments(d);
  for (PhdVariant v : {kY, kR}) {
    const PhdFit fit = fit_phd(m, v, 2);
    for (unsigned t : {0u, 4u}) {
      if (hris(d, fit, m, 1).values != hris(d, fit, m, t).values) mismatches.push_back("hris");
      if (sris(d, fit, 1).values != sris(d, fit, t).values) mismatches.push_back("sris");
    }
  }
  const PopulationModel cosine = example42_model(3);
  if (surface_csv(figure1_surface(cosine, {2.0}, linspace(-1, 1, 201), 1)) !=
      surface_csv(figure1_surface(cosine, {2.0}, linspace(-1, 1, 201), 0))) {
    mismatches.push_back("cross-section");
  }
  std::string detail = "threads=1 vs default (" + std::to_string(resolve_threads(0)) + ") vs 4: ";
  if (mismatches.empty()) return {true, detail + "all outputs byte-identical"};
  for (const auto& m : mismatches) detail += m + " ";
  return {false, detail + "differ"};
}

struct Criterion {
  std::string id;
  std::string name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {"1", "closed-form RIS agrees with perturbation oracle", 10.0, theorem_vs_oracle},
      {"2", "Monte Carlo constants (n=1e7, sigma=0.5)", 60.0, appendix_constants},
      {"3", "orthogonal-contamination and no-trend exactness", 1.0, orthogonal_exactness},
      {"4", "influence surface checkpoints", 5.0, surface_checkpoints},
      {"5", "leave-one-out downdates match refits", 5.0, downdate_correctness},
      {"6a", "Hitters: n after dropping missing salary", 0.0, hitters_n},
      {"6b", "Hitters: leading PHD_y eigenvalues", 0.0, hitters_eigenvalues},
      {"6c", "Hitters: Spearman correlation table", 0.0, hitters_table},
      {"6d", "Hitters: r-based max avg SRIS exceeds 3x y-based", 0.0, hitters_sris_ratio},
      {"7", "ERIS routes agree", 2.0, eris_routes},
      {"8", "thread-count determinism", 0.0, determinism},
  };

  std::string only;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--criterion") only = argv[i + 1];
  }

  bool all = true;
  bool matched = false;
  for (const Criterion& c : criteria) {
    if (!only.empty() && c.id != only) continue;
    matched = true;
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = c.budget_s <= 0.0 || secs <= c.budget_s;
    const bool pass = o.pass && in_budget;
    all = all && pass;
    std::cout << (pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail << "; " << num(secs)
              << " s";
    if (c.budget_s > 0.0) std::cout << " (budget " << num(c.budget_s) << " s)";
    std::cout << std::endl;
  }
  if (!matched) {
    std::cerr << "unknown criterion '" << only << "'\n";
    return 2;
  }
  return all ? 0 : 1;
}
