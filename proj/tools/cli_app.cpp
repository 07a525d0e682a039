#include "cli_app.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tavie/basis.hpp"
#include "tavie/bqr.hpp"
#include "tavie/csv.hpp"
#include "tavie/data_bench.hpp"
#include "tavie/errors.hpp"
#include "tavie/oracle.hpp"
#include "tavie/report_io.hpp"
#include "tavie/tavie_core.hpp"

namespace tavie::cli {

namespace {

std::vector<double> parse_double_list(const std::string& csv, const char* what) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw DomainError(std::string(what) + ": cannot parse '" + tok + "'");
    }
  }
  if (out.empty()) throw DomainError(std::string(what) + ": empty list");
  return out;
}

std::vector<std::string> parse_string_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

struct PriorFlags {
  std::string mu = "0";
  double sigma_scale = 1.0;
  std::string sigma_path;
  double a = 0.025;
  double b = 0.025;
};

Eigen::VectorXd expand_mu(const std::string& spec, Eigen::Index p) {
  const std::vector<double> vals = parse_double_list(spec, "prior mu");
  if (vals.size() == 1) return Eigen::VectorXd::Constant(p, vals[0]);
  if (static_cast<Eigen::Index>(vals.size()) != p)
    throw DomainError("prior mu has " + std::to_string(vals.size()) +
                      " entries, expected " + std::to_string(p));
  return Eigen::Map<const Eigen::VectorXd>(vals.data(), p);
}

Eigen::MatrixXd prior_sigma(const PriorFlags& prior, Eigen::Index p) {
  if (!prior.sigma_path.empty()) {
    const CsvTable t = read_csv(prior.sigma_path);
    if (t.values.rows() != p || t.values.cols() != p)
      throw DomainError("prior covariance file is not " + std::to_string(p) + "x" +
                        std::to_string(p));
    return t.values;
  }
  if (prior.sigma_scale <= 0.0) throw DomainError("prior sigma scale must be positive");
  return prior.sigma_scale * Eigen::MatrixXd::Identity(p, p);
}

void add_prior_flags(CLI::App* cmd, PriorFlags& prior, bool with_gamma) {
  cmd->add_option("--prior-mu", prior.mu,
                  "Prior mean: scalar or comma separated vector");
  cmd->add_option("--prior-sigma-scale", prior.sigma_scale,
                  "Prior covariance s*I (ignored when --prior-sigma-path is set)");
  cmd->add_option("--prior-sigma-path", prior.sigma_path,
                  "CSV file holding the full p x p prior covariance");
  if (with_gamma) {
    cmd->add_option("--prior-a", prior.a, "Gamma shape parameter (stored as a)");
    cmd->add_option("--prior-b", prior.b, "Gamma rate parameter (stored as b)");
  }
}

struct DataFlags {
  std::string path;
  std::string target;
  std::string features;
  std::string m_column;
};

void add_data_flags(CLI::App* cmd, DataFlags& flags) {
  cmd->add_option("--data", flags.path, "Input CSV")->required();
  cmd->add_option("--target", flags.target, "Response column")->required();
  cmd->add_option("--features", flags.features,
                  "Comma separated feature columns (default: all other columns)");
  cmd->add_option("--m-column", flags.m_column, "Count size column");
}

struct LoopFlags {
  double tol = 1e-9;
  int max_iter = 10000;
  std::string init = "ones";
};

void add_loop_flags(CLI::App* cmd, LoopFlags& flags) {
  cmd->add_option("--tol", flags.tol, "Convergence tolerance on ||xi_t - xi_{t-1}||_2");
  cmd->add_option("--max-iter", flags.max_iter, "Iteration cap");
  cmd->add_option("--init", flags.init, "xi initialization: ones | residual")
      ->check(CLI::IsMember({"ones", "residual"}));
}

FitOptions make_options(const LoopFlags& flags, bool record_trace) {
  FitOptions opts;
  opts.tol = flags.tol;
  opts.max_iter = flags.max_iter;
  opts.init = flags.init == "residual" ? XiInit::Residual : XiInit::Ones;
  opts.record_trace = record_trace;
  return opts;
}

SsgFamily family_for_model(const std::string& model, int nu) {
  if (model == "laplace") return SsgFamily::laplace();
  if (model == "student") return SsgFamily::student_t(nu);
  if (model == "logistic" || model == "binomial") return SsgFamily::binomial();
  if (model == "negbin") return SsgFamily::negative_binomial();
  throw DomainError("unknown model: " + model);
}

Dataset with_unit_sizes(const Dataset& data) {
  return Dataset(data.X, data.y, Eigen::VectorXd::Ones(data.n()));
}

void write_trace_csv(const std::string& path, const std::vector<double>& trace) {
  Eigen::MatrixXd t(static_cast<Eigen::Index>(trace.size()), 2);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    t(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i);
    t(static_cast<Eigen::Index>(i), 1) = trace[i];
  }
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path);
  write_csv(out, {"iteration", "elbo"}, t);
}

// --config JSON: keys mirror long flags (without the leading dashes); values
// from the file are injected before the explicit flags, which therefore win.
std::vector<std::string> apply_config(std::vector<std::string> args) {
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;

  std::ifstream in(config_path);
  if (!in) throw ParseError("cannot open config file: " + config_path);
  nlohmann::json cfg;
  try {
    in >> cfg;
  } catch (const std::exception& e) {
    throw ParseError("invalid JSON in config file: " + std::string(e.what()));
  }
  if (!cfg.is_object()) throw ParseError("config file must hold a JSON object");

  std::vector<std::string> tokens;
  for (const auto& [key, value] : cfg.items()) {
    const std::string flag = "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) tokens.push_back(flag);
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& item : value) {
        if (!joined.empty()) joined += ',';
        joined += item.is_string() ? item.get<std::string>() : item.dump();
      }
      tokens.push_back(flag);
      tokens.push_back(joined);
    } else if (value.is_string()) {
      tokens.push_back(flag);
      tokens.push_back(value.get<std::string>());
    } else {
      tokens.push_back(flag);
      tokens.push_back(value.dump());
    }
  }
  // Insert after the subcommand name.
  const std::size_t at = args.empty() ? 0 : 1;
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), tokens.begin(),
              tokens.end());
  return args;
}

int run_fit(const std::string& model, int nu, double alpha, const DataFlags& dataf,
            const PriorFlags& priorf, const LoopFlags& loopf, bool trace,
            const std::string& trace_out, const std::string& out_path) {
  if (model == "quantile")
    throw DomainError("use the quantreg subcommand for quantile regression");
  const SsgFamily family = family_for_model(model, nu);

  std::optional<std::string> m_col;
  if (!dataf.m_column.empty()) m_col = dataf.m_column;
  if ((model == "binomial" || model == "negbin") && !m_col)
    throw DomainError(model + " requires --m-column");

  ParsedCsv parsed =
      parse_csv(dataf.path, dataf.target, parse_string_list(dataf.features), m_col);
  Dataset data = std::move(parsed.dataset);
  if (model == "logistic" && !data.m) data = with_unit_sizes(data);
  if (model == "logistic" && data.m && (data.m->array() != 1.0).any())
    throw DomainError("logistic expects unit trial counts; use binomial instead");

  const Eigen::Index p = data.p();
  const Eigen::VectorXd mu0 = expand_mu(priorf.mu, p);
  const Eigen::MatrixXd Sigma0 = prior_sigma(priorf, p);
  const FitOptions opts = make_options(loopf, true);

  FitReport report;
  if (family.is_type1()) {
    report = fit(family, data, NormalGammaParams(mu0, Sigma0, priorf.a, priorf.b),
                 alpha, opts);
  } else {
    report = fit(family, data, GaussianParams(mu0, Sigma0), alpha, opts);
  }

  FitDocument doc;
  doc.model = model;
  doc.alpha = alpha;
  if (model == "student") doc.nu = nu;
  doc.feature_columns = parsed.feature_columns;
  doc.m_column = parsed.m_column;
  doc.posterior = report.state.posterior;
  doc.elbo_trace = report.elbo_trace;
  doc.iterations = report.iterations;
  doc.converged = report.converged;
  doc.fixed_point_residual = report.fixed_point_residual;
  doc.wall_time_s = report.wall_time_s;
  write_fit_document(out_path, doc);

  if (trace) {
    const std::string tpath = trace_out.empty() ? out_path + ".trace.csv" : trace_out;
    write_trace_csv(tpath, report.elbo_trace);
  }
  return 0;
}

int run_quantreg(const std::string& quantiles, double tau0, double alpha,
                 const DataFlags& dataf, const PriorFlags& priorf,
                 const LoopFlags& loopf, const std::string& out_path) {
  ParsedCsv parsed =
      parse_csv(dataf.path, dataf.target, parse_string_list(dataf.features),
                std::nullopt);
  const Dataset& data = parsed.dataset;
  const Eigen::Index p = data.p();
  const GaussianParams prior(expand_mu(priorf.mu, p), prior_sigma(priorf, p));
  const FitOptions opts = make_options(loopf, true);

  std::vector<FitDocument> docs;
  for (double u : parse_double_list(quantiles, "quantiles")) {
    const FitReport report = fit_bqr(data, prior, BQRConfig(u, tau0, alpha), opts);
    FitDocument doc;
    doc.model = "quantile";
    doc.alpha = alpha;
    doc.tau0 = tau0;
    doc.quantile = u;
    doc.feature_columns = parsed.feature_columns;
    doc.posterior = report.state.posterior;
    doc.elbo_trace = report.elbo_trace;
    doc.iterations = report.iterations;
    doc.converged = report.converged;
    doc.fixed_point_residual = report.fixed_point_residual;
    doc.wall_time_s = report.wall_time_s;
    docs.push_back(std::move(doc));
  }
  write_fit_documents(out_path, docs);
  return 0;
}

int run_bench(const std::string& family_name, int nu, const std::string& experiment,
              int reps, double alpha, const std::string& alphas,
              std::uint64_t seed, const std::string& out_path) {
  const SsgFamily family = family_for_model(family_name, nu);
  std::vector<BenchRow> rows;
  if (!alphas.empty()) {
    rows = alpha_sweep(family, parse_double_list(alphas, "alphas"), reps, seed);
  } else {
    const ExperimentGrid grid =
        experiment == "E2" ? ExperimentGrid::E2 : ExperimentGrid::E1;
    if (experiment != "E1" && experiment != "E2")
      throw DomainError("experiment must be E1 or E2");
    rows = run_experiment(grid, family, reps, alpha, seed);
  }
  std::ofstream out(out_path);
  if (!out) throw ParseError("cannot write file: " + out_path);
  write_bench_csv(out, rows);
  return 0;
}

int run_riskcheck(const std::string& model_name, int n, int p,
                  const std::string& alphas, int reps, int n_mc,
                  std::uint64_t seed, const std::string& out_path) {
  RiskModel model;
  if (model_name == "laplace") model = RiskModel::Laplace;
  else if (model_name == "negbin") model = RiskModel::NegBin;
  else throw DomainError("riskcheck model must be laplace or negbin");

  nlohmann::json arr = nlohmann::json::array();
  for (double alpha : parse_double_list(alphas, "alpha")) {
    for (int rep = 0; rep < reps; ++rep) {
      const RiskGapReport r = risk_gap(model, n, p, alpha, seed + rep, n_mc);
      arr.push_back({{"model", r.model},
                     {"n", r.n},
                     {"p", r.p},
                     {"alpha", r.alpha},
                     {"rep", rep},
                     {"lhs", r.lhs},
                     {"rhs", r.rhs},
                     {"gap", r.gap},
                     {"mc_se", r.mc_se},
                     {"n_mc", r.n_mc}});
    }
  }
  if (out_path.empty()) {
    std::cout << arr.dump(2) << '\n';
  } else {
    std::ofstream out(out_path);
    if (!out) throw ParseError("cannot write file: " + out_path);
    out << arr.dump(2) << '\n';
  }
  return 0;
}

int run_gradcheck(const std::string& model, int nu, double u, double tau0,
                  double alpha, int n, int p, int states, double step,
                  std::uint64_t seed, const std::string& out_path) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> standard(0.0, 1.0);
  double worst = 0.0;

  for (int s = 0; s < states; ++s) {
    VariationalState state;
    state.alpha = alpha;
    Dataset data = [&] {
      if (model == "quantile") {
        auto [d, t] = simulate(SsgFamily::ald(u), n, p, seed + s);
        state.family = SsgFamily::ald(u);
        state.tau0 = tau0;
        state.prior = GaussianParams(Eigen::VectorXd::Zero(p),
                                     Eigen::MatrixXd::Identity(p, p));
        return d;
      }
      const SsgFamily family = family_for_model(model, nu);
      auto [d, t] = simulate(family, n, p, seed + s);
      state.family = family;
      if (family.is_type1()) {
        state.prior = NormalGammaParams(Eigen::VectorXd::Zero(p),
                                        Eigen::MatrixXd::Identity(p, p), 2.0, 2.0);
      } else {
        state.prior = GaussianParams(Eigen::VectorXd::Zero(p),
                                     Eigen::MatrixXd::Identity(p, p));
        state.coeffs = typeII_coefficients(family.count_model(), d.y, *d.m);
      }
      return d;
    }();

    state.xi.resize(data.n());
    for (Eigen::Index i = 0; i < data.n(); ++i)
      state.xi[i] = 0.5 + std::abs(standard(rng));
    refresh_posterior(state, data);

    const Eigen::VectorXd analytic = elbo_gradient(state, data);
    const Eigen::VectorXd numeric = fd_gradient(state, data, step);
    const double rel = (numeric - analytic).norm() / analytic.norm();
    worst = std::max(worst, rel);
  }

  nlohmann::json j = {{"model", model}, {"states", states},
                      {"step", step}, {"max_relative_error", worst}};
  if (out_path.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    std::ofstream out(out_path);
    if (!out) throw ParseError("cannot write file: " + out_path);
    out << j.dump(2) << '\n';
  }
  return 0;
}

int run_basis(const std::string& coords_path, int degree, int nx, int ny,
              const std::string& domain, const std::string& out_path) {
  const CsvTable coords_table = read_csv(coords_path);
  if (coords_table.values.cols() < 2)
    throw DomainError("basis: coordinate file needs at least two columns");
  Eigen::MatrixXd coords(coords_table.values.rows(), 2);
  const Eigen::Index cx = std::max<Eigen::Index>(coords_table.column_index("x"), 0);
  Eigen::Index cy = coords_table.column_index("y");
  if (cy < 0) cy = cx == 0 ? 1 : 0;
  coords.col(0) = coords_table.values.col(cx);
  coords.col(1) = coords_table.values.col(cy);

  SplineSpec spec;
  spec.degree = degree;
  spec.n_basis_x = nx;
  spec.n_basis_y = ny;
  if (!domain.empty()) {
    const auto d = parse_double_list(domain, "domain");
    if (d.size() != 4) throw DomainError("domain must be xmin,xmax,ymin,ymax");
    spec.xmin = d[0];
    spec.xmax = d[1];
    spec.ymin = d[2];
    spec.ymax = d[3];
  } else {
    spec.xmin = coords.col(0).minCoeff();
    spec.xmax = coords.col(0).maxCoeff();
    spec.ymin = coords.col(1).minCoeff();
    spec.ymax = coords.col(1).maxCoeff();
  }

  const Eigen::MatrixXd design = tensor_design(coords, spec);
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(design.cols()));
  for (Eigen::Index j = 0; j < design.cols(); ++j)
    names.push_back("b" + std::to_string(j));
  std::ofstream out(out_path);
  if (!out) throw ParseError("cannot write file: " + out_path);
  write_csv(out, names, design);
  return 0;
}

int run_predict(const std::string& report_path, const std::string& newdata_path,
                const std::string& out_path) {
  const FitDocument doc = read_fit_document(report_path);
  const CsvTable table = read_csv(newdata_path);

  Eigen::MatrixXd X(table.values.rows(),
                    static_cast<Eigen::Index>(doc.feature_columns.size()));
  for (std::size_t j = 0; j < doc.feature_columns.size(); ++j) {
    const Eigen::Index idx = table.column_index(doc.feature_columns[j]);
    if (idx < 0)
      throw DomainError("predict: new data lacks column " + doc.feature_columns[j]);
    X.col(static_cast<Eigen::Index>(j)) = table.values.col(idx);
  }

  std::optional<Eigen::VectorXd> m;
  if (doc.model == "binomial" || doc.model == "negbin") {
    if (doc.m_column) {
      const Eigen::Index idx = table.column_index(*doc.m_column);
      if (idx < 0) throw DomainError("predict: new data lacks column " + *doc.m_column);
      m = table.values.col(idx);
    } else {
      m = Eigen::VectorXd::Ones(X.rows());
    }
  } else if (doc.model == "logistic") {
    m = Eigen::VectorXd::Ones(X.rows());
  }

  const Eigen::VectorXd pred = predict(doc, X, m);
  std::ofstream out(out_path);
  if (!out) throw ParseError("cannot write file: " + out_path);
  write_csv(out, {"prediction"}, pred);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& raw_args) {
  CLI::App app{"Tangent-approximation variational EM for heavy-tailed, count, and quantile regression"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  // fit ----------------------------------------------------------------
  auto* fit_cmd = app.add_subcommand("fit", "Fit one model and write a JSON report");
  std::string fit_model, fit_trace_out, fit_out, fit_config;
  int fit_nu = 5;
  double fit_alpha = 1.0;
  bool fit_trace = false;
  DataFlags fit_data;
  PriorFlags fit_prior;
  LoopFlags fit_loop;
  fit_cmd->add_option("--model", fit_model,
                      "laplace | student | logistic | binomial | negbin")
      ->required();
  fit_cmd->add_option("--nu", fit_nu, "Student-t degrees of freedom");
  fit_cmd->add_option("--alpha", fit_alpha, "Likelihood tempering in (0,1]");
  add_data_flags(fit_cmd, fit_data);
  add_prior_flags(fit_cmd, fit_prior, true);
  add_loop_flags(fit_cmd, fit_loop);
  fit_cmd->add_flag("--trace", fit_trace, "Also write the objective trace CSV");
  fit_cmd->add_option("--trace-out", fit_trace_out, "Trace CSV path");
  fit_cmd->add_option("--out", fit_out, "Output JSON path")->required();
  fit_cmd->add_option("--config", fit_config, "JSON config whose keys mirror flags");

  // quantreg -----------------------------------------------------------
  auto* qr_cmd = app.add_subcommand("quantreg", "Quantile regression over a grid of levels");
  std::string qr_quantiles, qr_out, qr_config;
  double qr_tau0 = 1.0, qr_alpha = 1.0;
  DataFlags qr_data;
  PriorFlags qr_prior;
  LoopFlags qr_loop;
  qr_cmd->add_option("--quantiles", qr_quantiles, "Comma separated levels in (0,1)")
      ->required();
  qr_cmd->add_option("--tau0", qr_tau0, "Fixed asymmetric-Laplace scale");
  qr_cmd->add_option("--alpha", qr_alpha, "Likelihood tempering in (0,1]");
  add_data_flags(qr_cmd, qr_data);
  add_prior_flags(qr_cmd, qr_prior, false);
  add_loop_flags(qr_cmd, qr_loop);
  qr_cmd->add_option("--out", qr_out, "Output JSON path (array)")->required();
  qr_cmd->add_option("--config", qr_config, "JSON config whose keys mirror flags");

  // bench ---------------------------------------------------------------
  auto* bench_cmd = app.add_subcommand("bench", "Simulation study: MSE and runtime table");
  std::string bench_family = "student", bench_exp = "E1", bench_alphas, bench_out;
  int bench_nu = 5, bench_reps = 20;
  double bench_alpha = 1.0;
  std::uint64_t bench_seed = 0;
  std::string bench_config;
  bench_cmd->add_option("--family", bench_family, "student | laplace | negbin | binomial");
  bench_cmd->add_option("--nu", bench_nu, "Student-t degrees of freedom");
  bench_cmd->add_option("--experiment", bench_exp, "E1 (n grid) or E2 (p grid)");
  bench_cmd->add_option("--reps", bench_reps, "Repetitions per cell");
  bench_cmd->add_option("--alpha", bench_alpha, "Likelihood tempering in (0,1]");
  bench_cmd->add_option("--alphas", bench_alphas,
                        "Comma separated tempering grid; runs the sweep at n=2000, p=8");
  bench_cmd->add_option("--seed", bench_seed, "Base seed (per-row seed is seed + rep)");
  bench_cmd->add_option("--out", bench_out, "Output CSV path")->required();
  bench_cmd->add_option("--config", bench_config, "JSON config whose keys mirror flags");

  // riskcheck ------------------------------------------------------------
  auto* risk_cmd = app.add_subcommand("riskcheck", "Risk bound gap experiment");
  std::string risk_model = "laplace", risk_alphas = "0.3,0.95", risk_out, risk_config;
  int risk_n = 2000, risk_p = 8, risk_reps = 10, risk_nmc = 100;
  std::uint64_t risk_seed = 0;
  risk_cmd->add_option("--model", risk_model, "laplace | negbin");
  risk_cmd->add_option("--n", risk_n, "Sample size");
  risk_cmd->add_option("--p", risk_p, "Feature count");
  risk_cmd->add_option("--alpha", risk_alphas, "Comma separated tempering values in (0,1)");
  risk_cmd->add_option("--reps", risk_reps, "Replications per alpha");
  risk_cmd->add_option("--n-mc", risk_nmc, "Posterior draws per replication");
  risk_cmd->add_option("--seed", risk_seed, "Base seed");
  risk_cmd->add_option("--out", risk_out, "Output JSON path (stdout when omitted)");
  risk_cmd->add_option("--config", risk_config, "JSON config whose keys mirror flags");

  // gradcheck ------------------------------------------------------------
  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient audit");
  std::string grad_model = "laplace", grad_out, grad_config;
  int grad_nu = 5, grad_n = 12, grad_p = 3, grad_states = 50;
  double grad_u = 0.5, grad_tau0 = 1.0, grad_alpha = 1.0, grad_step = 1e-5;
  std::uint64_t grad_seed = 0;
  grad_cmd->add_option("--model", grad_model,
                       "laplace | student | logistic | binomial | negbin | quantile");
  grad_cmd->add_option("--nu", grad_nu, "Student-t degrees of freedom");
  grad_cmd->add_option("--u", grad_u, "Quantile level for the quantile model");
  grad_cmd->add_option("--tau0", grad_tau0, "Quantile model scale");
  grad_cmd->add_option("--alpha", grad_alpha, "Likelihood tempering in (0,1]");
  grad_cmd->add_option("--n", grad_n, "Rows per random state");
  grad_cmd->add_option("--p", grad_p, "Features per random state");
  grad_cmd->add_option("--states", grad_states, "Number of random states");
  grad_cmd->add_option("--step", grad_step, "Central difference step");
  grad_cmd->add_option("--seed", grad_seed, "Base seed");
  grad_cmd->add_option("--out", grad_out, "Output JSON path (stdout when omitted)");
  grad_cmd->add_option("--config", grad_config, "JSON config whose keys mirror flags");

  // basis ------------------------------------------------------------------
  auto* basis_cmd = app.add_subcommand("basis", "Tensor-product B-spline design matrix");
  std::string basis_coords, basis_domain, basis_out, basis_config;
  int basis_degree = 3, basis_nx = 5, basis_ny = 5;
  basis_cmd->add_option("--coords", basis_coords, "CSV with x,y coordinates")->required();
  basis_cmd->add_option("--degree", basis_degree, "Spline degree");
  basis_cmd->add_option("--nx", basis_nx, "Basis count along x");
  basis_cmd->add_option("--ny", basis_ny, "Basis count along y");
  basis_cmd->add_option("--domain", basis_domain,
                        "xmin,xmax,ymin,ymax (default: coordinate range)");
  basis_cmd->add_option("--out", basis_out, "Output CSV path")->required();
  basis_cmd->add_option("--config", basis_config, "JSON config whose keys mirror flags");

  // predict ------------------------------------------------------------------
  auto* pred_cmd = app.add_subcommand("predict", "Plug-in predictions from a fit report");
  std::string pred_report, pred_newdata, pred_out, pred_config;
  pred_cmd->add_option("--report", pred_report, "Fit report JSON")->required();
  pred_cmd->add_option("--newdata", pred_newdata, "CSV with the fit's feature columns")
      ->required();
  pred_cmd->add_option("--out", pred_out, "Output CSV path")->required();
  pred_cmd->add_option("--config", pred_config, "JSON config whose keys mirror flags");

  try {
    std::vector<std::string> args = apply_config(raw_args);
    std::reverse(args.begin(), args.end());  // CLI11 vector parse wants reversed
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (fit_cmd->parsed())
      return run_fit(fit_model, fit_nu, fit_alpha, fit_data, fit_prior, fit_loop,
                     fit_trace, fit_trace_out, fit_out);
    if (qr_cmd->parsed())
      return run_quantreg(qr_quantiles, qr_tau0, qr_alpha, qr_data, qr_prior,
                          qr_loop, qr_out);
    if (bench_cmd->parsed())
      return run_bench(bench_family, bench_nu, bench_exp, bench_reps, bench_alpha,
                       bench_alphas, bench_seed, bench_out);
    if (risk_cmd->parsed())
      return run_riskcheck(risk_model, risk_n, risk_p, risk_alphas, risk_reps,
                           risk_nmc, risk_seed, risk_out);
    if (grad_cmd->parsed())
      return run_gradcheck(grad_model, grad_nu, grad_u, grad_tau0, grad_alpha,
                           grad_n, grad_p, grad_states, grad_step, grad_seed,
                           grad_out);
    if (basis_cmd->parsed())
      return run_basis(basis_coords, basis_degree, basis_nx, basis_ny, basis_domain,
                       basis_out);
    if (pred_cmd->parsed()) return run_predict(pred_report, pred_newdata, pred_out);
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int run(int argc, const char* const* argv) {
  return run(std::vector<std::string>(argv, argv + argc));
}

}  // namespace tavie::cli
