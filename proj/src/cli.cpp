#include "phdinf/cli.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "phdinf/cli_io.hpp"
#include "phdinf/error.hpp"
#include "phdinf/format.hpp"
#include "phdinf/model_sim.hpp"
#include "phdinf/phd_fit.hpp"
#include "phdinf/population_influence.hpp"
#include "phdinf/sample_influence.hpp"

namespace phdinf::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kValidationFailed = 1;

struct InputOptions {
  std::string input;
  std::string response;
  bool log_response = false;
  std::vector<std::string> predictors;
  std::string delimiter = ",";
};

void add_input_options(CLI::App* cmd, InputOptions& o) {
  cmd->add_option("--input", o.input, "Input CSV file")->required();
  cmd->add_option("--response", o.response, "Response column name")->required();
  cmd->add_flag("--log-response", o.log_response, "Use the natural log of the response");
  cmd->add_option("--predictors", o.predictors, "Predictor columns (default: all numeric)")->delimiter(',');
  cmd->add_option("--delimiter", o.delimiter, "Field delimiter")->capture_default_str();
}

IngestConfig ingest_config(const InputOptions& o) {
  if (o.delimiter.size() != 1) fail(ErrorKind::Usage, "delimiter must be a single character");
  IngestConfig cfg;
  cfg.response_column = o.response;
  cfg.log_response = o.log_response;
  cfg.predictor_columns = o.predictors;
  cfg.delimiter = o.delimiter[0];
  return cfg;
}

json input_json(const InputOptions& o) {
  return {{"input", o.input},
          {"response", o.response},
          {"log_response", o.log_response},
          {"predictors", o.predictors},
          {"delimiter", o.delimiter}};
}

std::vector<PhdVariant> variants_of(const std::string& text) {
  if (text == "both") return {PhdVariant::y_based, PhdVariant::r_based};
  return {parse_variant(text)};
}

// Writes `text` and records it in the manifest.
void emit(RunManifest& manifest, const fs::path& path, const std::string& text) {
  write_text(path, text);
  manifest.add_output(path);
}

fs::path manifest_path_for(const fs::path& output) {
  fs::path out = output;
  out += ".manifest.json";
  return out;
}

// ---- fit ----

struct FitOptions {
  InputOptions in;
  std::string variant = "both";
  Index k = 2;
  std::string output_dir = "phd_fit";
};

std::string eigen_table(const PhdFit& fit) {
  std::string out = "index,eigenvalue,abs_eigenvalue,ratio_to_first,in_basis\n";
  const Vector& values = fit.eig.values;
  const double first = std::abs(values[0]);
  for (Index i = 0; i < values.size(); ++i) {
    out += std::to_string(i + 1) + ',' + format_double(values[i]) + ',' + format_double(std::abs(values[i])) + ',' +
           format_double(first > 0.0 ? std::abs(values[i]) / first : std::nan("")) + ',' + (i < fit.k ? "1" : "0") + '\n';
  }
  return out;
}

std::string basis_table(const PhdFit& fit, const std::vector<std::string>& names) {
  std::string out = "predictor";
  for (Index c = 0; c < fit.k; ++c) out += ",dir" + std::to_string(c + 1);
  out += '\n';
  const Matrix& g = fit.gamma_hat.columns();
  for (Index r = 0; r < g.rows(); ++r) {
    out += names[static_cast<std::size_t>(r)];
    for (Index c = 0; c < g.cols(); ++c) out += ',' + format_double(g(r, c));
    out += '\n';
  }
  return out;
}

int cmd_fit(const FitOptions& o) {
  const IngestResult data = ingest_csv(o.in.input, ingest_config(o.in));
  const MomentSet m = compute_moments(data.data);
  const fs::path dir = o.output_dir;

  RunManifest manifest("fit");
  json cfg = input_json(o.in);
  cfg["variant"] = o.variant;
  cfg["k"] = o.k;
  manifest.set_config(cfg);
  manifest.set_input(o.in.input);
  manifest.set("n", data.data.n());
  manifest.set("p", data.data.p());
  manifest.set("rows_dropped", data.rows_dropped);
  manifest.set("predictors_resolved", data.predictors);

  for (PhdVariant v : variants_of(o.variant)) {
    const PhdFit fit = fit_phd(m, v, o.k);
    const std::string tag(to_string(v));
    emit(manifest, dir / ("eigenvalues_" + tag + ".csv"), eigen_table(fit));
    emit(manifest, dir / ("basis_" + tag + ".csv"), basis_table(fit, data.predictors));
    std::cout << "PHD_" << tag << " (n=" << data.data.n() << ", p=" << data.data.p() << ") top |eigenvalues|:";
    for (Index i = 0; i < std::min<Index>(3, fit.eig.values.size()); ++i) {
      std::cout << ' ' << format_double(std::abs(fit.eig.values[i]));
    }
    std::cout << '\n';
  }
  manifest.write(dir / "manifest.json");
  return 0;
}

// ---- influence ----

struct InfluenceOptions {
  InputOptions in;
  Index k = 2;
  unsigned threads = 0;
  std::string output_dir = "phd_influence";
};

int cmd_influence(const InfluenceOptions& o) {
  const IngestResult data = ingest_csv(o.in.input, ingest_config(o.in));
  const InfluenceReport report = influence_report(data.data, o.k, o.threads);
  const fs::path dir = o.output_dir;

  RunManifest manifest("influence");
  json cfg = input_json(o.in);
  cfg["k"] = o.k;
  manifest.set_config(cfg);
  manifest.set_input(o.in.input);
  manifest.set("n", data.data.n());
  manifest.set("p", data.data.p());
  manifest.set("rows_dropped", data.rows_dropped);
  manifest.set("predictors_resolved", data.predictors);

  emit(manifest, dir / "influence.csv", report_csv(report));
  emit(manifest, dir / "influence.json", report_json(report, data.predictors));
  emit(manifest, dir / "correlations.csv", correlation_csv(report.correlations));
  manifest.write(dir / "manifest.json");
  std::cout << correlation_csv(report.correlations);
  return 0;
}

// ---- surface ----

struct SurfaceOptions {
  double norm_max = 3.0;
  std::size_t grid = 61;
  Index p = 3;
  unsigned threads = 0;
  std::string output = "surface.csv";
};

int cmd_surface(const SurfaceOptions& o) {
  if (o.grid < 2) fail(ErrorKind::Usage, "grid must have at least two points");
  if (!(o.norm_max > 0.0)) fail(ErrorKind::Usage, "norm-max must be positive");
  const PopulationModel model = example42_model(o.p);
  const SurfaceGrid grid =
      figure1_surface(model, linspace(0.0, o.norm_max, o.grid), linspace(-1.0, 1.0, o.grid), o.threads);

  RunManifest manifest("surface");
  manifest.set_config({{"norm_max", o.norm_max}, {"grid", o.grid}, {"p", o.p}, {"model", "cosine"}});
  emit(manifest, o.output, surface_csv(grid));
  manifest.write(manifest_path_for(o.output));
  return 0;
}

// ---- simulate ----

struct SimulateOptions {
  std::string model = "cosine";
  Index n = 263;
  Index p = 4;
  double sigma = 0.5;
  std::uint64_t seed = 1;
  std::vector<double> beta;
  Index k = 2;
  std::string link = "sum_of_squares";
  std::string output = "simulated.csv";
};

Vector beta_or_first_axis(const std::vector<double>& beta, Index p) {
  if (beta.empty()) return Vector::Unit(p, 0);
  if (static_cast<Index>(beta.size()) != p) fail(ErrorKind::Usage, "--beta must have p entries");
  return Eigen::Map<const Vector>(beta.data(), p);
}

SimSpec sim_spec(const SimulateOptions& o) {
  SimSpec spec;
  spec.n = o.n;
  spec.p = o.p;
  spec.seed = o.seed;
  if (o.model == "cosine") {
    spec.model = CosineIndex{beta_or_first_axis(o.beta, o.p), o.sigma};
  } else if (o.model == "quadratic") {
    spec.model = QuadraticFirst{o.sigma};
  } else if (o.model == "linear") {
    spec.model = LinearIndex{beta_or_first_axis(o.beta, o.p), o.sigma};
  } else if (o.model == "custom") {
    if (o.k < 1 || o.k > o.p) fail(ErrorKind::Usage, "--k must be in [1, p]");
    spec.model = CustomIndex{Matrix::Identity(o.p, o.k), parse_link(o.link), o.sigma};
  } else {
    fail(ErrorKind::Usage, "unknown model '" + o.model + "'");
  }
  return spec;
}

int cmd_simulate(const SimulateOptions& o) {
  const Dataset d = simulate(sim_spec(o));
  RunManifest manifest("simulate");
  manifest.set_config({{"model", o.model},
                       {"n", o.n},
                       {"p", o.p},
                       {"sigma", o.sigma},
                       {"beta", o.beta},
                       {"k", o.k},
                       {"link", o.link}});
  manifest.add_seed(o.seed);
  emit(manifest, o.output, dataset_csv(d));
  manifest.write(manifest_path_for(o.output));
  return 0;
}

// ---- validate-constants ----

struct ValidateOptions {
  Index n = 10'000'000;
  std::uint64_t seed = 7;
  double sigma = 0.5;
  Index p = 3;
  std::string output;
};

struct Check {
  std::string name;
  double estimate;
  double se;
  double target;
  bool expect_inside;
};

int cmd_validate_constants(const ValidateOptions& o) {
  SimSpec spec;
  spec.n = 1;
  spec.p = o.p;
  spec.seed = o.seed;
  spec.model = CosineIndex{Vector::Unit(o.p, 0), o.sigma};
  const McConstants mc = mc_constants(spec, o.n);
  const CosineModelConstants c = example42_constants();

  const std::vector<Check> checks = {
      {"mu_y", mc.mu_y, mc.mu_y_se, c.mu_y, true},
      {"cov_zy", mc.cov_zy, mc.cov_zy_se, c.sigma_xy_coef, true},
      {"lambda1", mc.lambda1, mc.lambda1_se, c.lambda1, true},
      {"lambda1_excludes_half", mc.lambda1, mc.lambda1_se, c.lambda1 / 2.0, false},
  };

  std::ostringstream report;
  bool all_pass = true;
  json rows = json::array();
  for (const Check& ch : checks) {
    const double z = (ch.estimate - ch.target) / ch.se;
    const bool inside = std::abs(z) <= 3.0;
    const bool pass = inside == ch.expect_inside;
    all_pass = all_pass && pass;
    report << (pass ? "PASS " : "FAIL ") << ch.name << " estimate=" << format_double(ch.estimate)
           << " se=" << format_double(ch.se) << " target=" << format_double(ch.target) << " z=" << format_double(z)
           << (ch.expect_inside ? " require |z|<=3" : " require |z|>3") << '\n';
    rows.push_back({{"name", ch.name},
                    {"estimate", ch.estimate},
                    {"se", ch.se},
                    {"target", ch.target},
                    {"z", z},
                    {"expect_inside", ch.expect_inside},
                    {"pass", pass}});
  }
  std::cout << report.str();

  if (!o.output.empty()) {
    RunManifest manifest("validate-constants");
    manifest.set_config({{"n_mc", o.n}, {"sigma", o.sigma}, {"p", o.p}});
    manifest.add_seed(o.seed);
    manifest.set("checks", rows);
    emit(manifest, o.output, report.str());
    manifest.write(manifest_path_for(o.output));
  }
  return all_pass ? 0 : kValidationFailed;
}

void report_error(std::string_view kind, const std::string& message, int code) {
  const json record = {{"error", kind}, {"message", message}, {"exit_code", code}};
  std::cerr << record.dump() << '\n';
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Principal Hessian directions with influence diagnostics", "phdinf"};
  app.set_version_flag("--version", kLibraryVersion);
  app.require_subcommand(1);

  FitOptions fit_opt;
  auto* fit = app.add_subcommand("fit", "Fit PHD and write the eigenvalue table and basis");
  add_input_options(fit, fit_opt.in);
  fit->add_option("--variant", fit_opt.variant, "y, r or both")
      ->check(CLI::IsMember({"y", "r", "y_based", "r_based", "both"}))
      ->capture_default_str();
  fit->add_option("--k", fit_opt.k, "Dimension of the estimated subspace")->capture_default_str();
  fit->add_option("--output-dir", fit_opt.output_dir)->capture_default_str();

  InfluenceOptions inf_opt;
  auto* inf = app.add_subcommand("influence", "Leave-one-out influence diagnostics for both variants");
  add_input_options(inf, inf_opt.in);
  inf->add_option("--k", inf_opt.k)->capture_default_str();
  inf->add_option("--threads", inf_opt.threads, "Worker threads (0 = all cores)")->capture_default_str();
  inf->add_option("--output-dir", inf_opt.output_dir)->capture_default_str();

  SurfaceOptions surf_opt;
  auto* surf = app.add_subcommand("surface", "Population RIS grid for the cosine single-index model");
  surf->add_option("--norm-max", surf_opt.norm_max)->capture_default_str();
  surf->add_option("--grid", surf_opt.grid, "Points per axis")->capture_default_str();
  surf->add_option("--p", surf_opt.p)->capture_default_str();
  surf->add_option("--threads", surf_opt.threads)->capture_default_str();
  surf->add_option("--output", surf_opt.output)->capture_default_str();

  SimulateOptions sim_opt;
  auto* sim = app.add_subcommand("simulate", "Draw a seeded dataset from a catalog model");
  sim->add_option("--model", sim_opt.model)
      ->check(CLI::IsMember({"cosine", "quadratic", "linear", "custom"}))
      ->capture_default_str();
  sim->add_option("--n", sim_opt.n)->capture_default_str();
  sim->add_option("--p", sim_opt.p)->capture_default_str();
  sim->add_option("--sigma", sim_opt.sigma)->capture_default_str();
  sim->add_option("--seed", sim_opt.seed)->capture_default_str();
  sim->add_option("--beta", sim_opt.beta, "Index or slope vector (default e1)")->delimiter(',');
  sim->add_option("--k", sim_opt.k, "Number of indices for the custom model")->capture_default_str();
  sim->add_option("--link", sim_opt.link, "product, sum_of_squares or ratio")->capture_default_str();
  sim->add_option("--output", sim_opt.output)->capture_default_str();

  ValidateOptions val_opt;
  auto* val = app.add_subcommand("validate-constants", "Monte Carlo check of the cosine model constants");
  val->add_option("--n", val_opt.n)->capture_default_str();
  val->add_option("--seed", val_opt.seed)->capture_default_str();
  val->add_option("--sigma", val_opt.sigma)->capture_default_str();
  val->add_option("--p", val_opt.p)->capture_default_str();
  val->add_option("--output", val_opt.output, "Optional report file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("Usage", e.what(), exit_code(ErrorKind::Usage));
    return exit_code(ErrorKind::Usage);
  }

  try {
    if (*fit) return cmd_fit(fit_opt);
    if (*inf) return cmd_influence(inf_opt);
    if (*surf) return cmd_surface(surf_opt);
    if (*sim) return cmd_simulate(sim_opt);
    if (*val) return cmd_validate_constants(val_opt);
  } catch (const Error& e) {
    report_error(to_string(e.kind()), e.what(), exit_code(e.kind()));
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    report_error(to_string(ErrorKind::IoError), e.what(), exit_code(ErrorKind::IoError));
    return exit_code(ErrorKind::IoError);
  }
  return exit_code(ErrorKind::Usage);
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"phdinf"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace phdinf::cli
