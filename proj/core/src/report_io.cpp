#include "tavie/report_io.hpp"

#include <cmath>
#include <fstream>

#include "tavie/errors.hpp"

namespace tavie {

using nlohmann::json;

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i];
  return v;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return {};
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  return m;
}

double sigmoid(double t) {
  return t >= 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
}

}  // namespace

json fit_document_to_json(const FitDocument& doc) {
  json j;
  j["model"] = doc.model;
  j["alpha"] = doc.alpha;
  if (doc.nu) j["nu"] = *doc.nu;
  if (doc.tau0) j["tau0"] = *doc.tau0;
  if (doc.quantile) j["quantile"] = *doc.quantile;
  j["feature_columns"] = doc.feature_columns;
  if (doc.m_column) j["m_column"] = *doc.m_column;

  json posterior;
  if (const auto* ng = std::get_if<NormalGammaParams>(&doc.posterior)) {
    posterior["mu"] = vector_to_json(ng->mu);
    posterior["Sigma"] = matrix_to_json(ng->Sigma);
    posterior["a"] = ng->a;
    posterior["b"] = ng->b;
  } else {
    const auto& g = std::get<GaussianParams>(doc.posterior);
    posterior["mu"] = vector_to_json(g.mu);
    posterior["Sigma"] = matrix_to_json(g.Sigma);
  }
  j["posterior"] = std::move(posterior);

  j["elbo_trace"] = doc.elbo_trace;
  j["iterations"] = doc.iterations;
  j["converged"] = doc.converged;
  j["fixed_point_residual"] = doc.fixed_point_residual;
  j["wall_time_s"] = doc.wall_time_s;
  return j;
}

FitDocument fit_document_from_json(const json& j) {
  FitDocument doc;
  doc.model = j.at("model").get<std::string>();
  doc.alpha = j.at("alpha").get<double>();
  if (j.contains("nu")) doc.nu = j["nu"].get<int>();
  if (j.contains("tau0")) doc.tau0 = j["tau0"].get<double>();
  if (j.contains("quantile")) doc.quantile = j["quantile"].get<double>();
  if (j.contains("feature_columns"))
    doc.feature_columns = j["feature_columns"].get<std::vector<std::string>>();
  if (j.contains("m_column")) doc.m_column = j["m_column"].get<std::string>();

  const json& p = j.at("posterior");
  Eigen::VectorXd mu = vector_from_json(p.at("mu"));
  Eigen::MatrixXd Sigma = matrix_from_json(p.at("Sigma"));
  if (p.contains("a"))
    doc.posterior = NormalGammaParams(std::move(mu), std::move(Sigma),
                                      p.at("a").get<double>(), p.at("b").get<double>());
  else
    doc.posterior = GaussianParams(std::move(mu), std::move(Sigma));

  if (j.contains("elbo_trace"))
    doc.elbo_trace = j["elbo_trace"].get<std::vector<double>>();
  doc.iterations = j.at("iterations").get<int>();
  doc.converged = j.at("converged").get<bool>();
  doc.fixed_point_residual = j.at("fixed_point_residual").get<double>();
  doc.wall_time_s = j.at("wall_time_s").get<double>();
  return doc;
}

void write_fit_document(const std::string& path, const FitDocument& doc) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path);
  out << fit_document_to_json(doc).dump(2) << '\n';
}

FitDocument read_fit_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  json j;
  in >> j;
  if (j.is_array()) throw ParseError("expected a single fit document: " + path);
  return fit_document_from_json(j);
}

void write_fit_documents(const std::string& path, const std::vector<FitDocument>& docs) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path);
  json arr = json::array();
  for (const auto& d : docs) arr.push_back(fit_document_to_json(d));
  out << arr.dump(2) << '\n';
}

Eigen::VectorXd predict(const FitDocument& doc, const Eigen::MatrixXd& X,
                        const std::optional<Eigen::VectorXd>& m) {
  const Eigen::VectorXd mu = std::visit([](const auto& p) { return p.mu; },
                                        doc.posterior);
  if (X.cols() != mu.size())
    throw DomainError("predict: new data has " + std::to_string(X.cols()) +
                      " features, fit used " + std::to_string(mu.size()));
  const Eigen::VectorXd eta = X * mu;

  if (doc.model == "binomial" || doc.model == "negbin") {
    if (!m || m->size() != X.rows())
      throw DomainError("predict: count model needs a size per row");
  } else if (m && m->size() != X.rows()) {
    throw DomainError("predict: m length mismatch");
  }

  Eigen::VectorXd out(eta.size());
  if (doc.model == "logistic") {
    for (Eigen::Index i = 0; i < eta.size(); ++i) out[i] = sigmoid(eta[i]);
  } else if (doc.model == "binomial") {
    for (Eigen::Index i = 0; i < eta.size(); ++i) out[i] = (*m)[i] * sigmoid(eta[i]);
  } else if (doc.model == "negbin") {
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double s = sigmoid(eta[i]);
      out[i] = (*m)[i] * (1.0 - s) / s;
    }
  } else {
    out = eta;  // location-scale and quantile models predict X mu
  }
  return out;
}

}  // namespace tavie
