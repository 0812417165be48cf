#include "streamfilter/ssm_model.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <string>

#include "streamfilter/format.hpp"
#include "streamfilter/rng.hpp"

namespace streamfilter::ssm {

void HyperParams::validate() const {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw ConfigError("ssm: sigma2 must be positive");
  if (!(phi2 > 0.0) || !std::isfinite(phi2)) throw ConfigError("ssm: phi2 must be positive");
}

std::vector<SufficientStats> Dataset::stats(int upto_t) const {
  if (upto_t < 1 || upto_t > horizon()) throw ContractViolation("Dataset::stats: upto_t out of range");
  std::vector<SufficientStats> out;
  out.reserve(static_cast<std::size_t>(upto_t));
  for (int t = 0; t < upto_t; ++t) out.push_back(sufficient_stats(batches[static_cast<std::size_t>(t)]));
  return out;
}

void Dataset::validate() const {
  hyper.validate();
  for (std::size_t k = 0; k < batches.size(); ++k)
    if (batches[k].t != static_cast<int>(k) + 1)
      throw ValidationError("ssm dataset: batches must be indexed consecutively from 1");
}

Dataset generate_data(int horizon, int n, const HyperParams& hyper, std::uint64_t seed) {
  hyper.validate();
  if (horizon < 1) throw ConfigError("generate_data: horizon must be >= 1");
  if (n < 0) throw ConfigError("generate_data: n must be >= 0");

  Dataset ds;
  ds.hyper = hyper;
  ds.seed = seed;
  auto rng = Rng::stream(seed, {static_cast<std::uint64_t>(Purpose::data)});
  const double phi = std::sqrt(hyper.phi2);
  const double sigma = std::sqrt(hyper.sigma2);
  double theta = 0.0;
  for (int t = 1; t <= horizon; ++t) {
    theta = rng.normal(theta, phi);
    ds.true_states.push_back(theta);
  }
  for (int t = 1; t <= horizon; ++t) {
    DataBatch batch;
    batch.t = t;
    batch.values.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) batch.values.push_back(rng.normal(ds.true_states[t - 1], sigma));
    ds.batches.push_back(std::move(batch));
  }
  return ds;
}

SufficientStats sufficient_stats(std::span<const double> values) {
  SufficientStats s;
  s.n = values.size();
  for (double y : values) {
    s.sum_y += y;
    s.sum_y2 += y * y;
  }
  return s;
}

double log_likelihood(const SufficientStats& stats, double theta, const HyperParams& hyper) {
  if (stats.n == 0) return 0.0;
  const double n = static_cast<double>(stats.n);
  const double quad = stats.sum_y2 - 2.0 * theta * stats.sum_y + n * theta * theta;
  return -0.5 * n * std::log(2.0 * std::numbers::pi * hyper.sigma2) - quad / (2.0 * hyper.sigma2);
}

GaussianDist full_conditional_theta_t(double theta_prev, const SufficientStats& stats,
                                      const HyperParams& hyper) {
  const double v = 1.0 / (1.0 / hyper.phi2 + static_cast<double>(stats.n) / hyper.sigma2);
  const double c = theta_prev / hyper.phi2 + stats.sum_y / hyper.sigma2;
  return {v * c, v};
}

GaussianDist full_conditional_theta_ell(int ell, int horizon, std::optional<double> left,
                                        std::optional<double> right, const SufficientStats& stats,
                                        const HyperParams& hyper) {
  if (ell < 1 || ell > horizon) throw ContractViolation("full_conditional_theta_ell: ell out of range");
  if (left.has_value() == (ell == 1))
    throw ContractViolation("full_conditional_theta_ell: left neighbour must be absent exactly at ell = 1");
  if (right.has_value() == (ell == horizon))
    throw ContractViolation("full_conditional_theta_ell: right neighbour must be absent exactly at ell = t");

  const double left_value = left.value_or(0.0);
  double precision = static_cast<double>(stats.n) / hyper.sigma2 + 1.0 / hyper.phi2;
  double linear = stats.sum_y / hyper.sigma2 + left_value / hyper.phi2;
  if (right) {
    precision += 1.0 / hyper.phi2;
    linear += *right / hyper.phi2;
  }
  return {linear / precision, 1.0 / precision};
}

SymTridiagonal<double> posterior_precision(std::span<const SufficientStats> stats,
                                           const HyperParams& hyper) {
  const auto t = static_cast<Eigen::Index>(stats.size());
  if (t < 1) throw ContractViolation("posterior_precision: need at least one batch");
  SymTridiagonal<double> q;
  q.diag.resize(t);
  q.off = Vector::Constant(t - 1, -1.0 / hyper.phi2);
  for (Eigen::Index l = 0; l < t; ++l) {
    q.diag(l) = static_cast<double>(stats[static_cast<std::size_t>(l)].n) / hyper.sigma2 + 1.0 / hyper.phi2;
    if (l + 1 < t) q.diag(l) += 1.0 / hyper.phi2;
  }
  return q;
}

ExactPosterior::ExactPosterior(std::span<const SufficientStats> stats, const HyperParams& hyper)
    : precision_(posterior_precision(stats, hyper)), factor_(precision_) {
  Vector b(precision_.size());
  for (Eigen::Index l = 0; l < b.size(); ++l) b(l) = stats[static_cast<std::size_t>(l)].sum_y / hyper.sigma2;
  mean_ = factor_.solve(b);
}

const Matrix& ExactPosterior::covariance() const {
  if (!covariance_) {
    Matrix c = factor_.inverse();
    covariance_ = (0.5 * (c + c.transpose())).eval();
  }
  return *covariance_;
}

GaussianDist ExactPosterior::marginal(int j) const {
  if (j < 0 || j >= horizon()) throw ContractViolation("ExactPosterior::marginal: index out of range");
  return {mean_(j), covariance()(j, j)};
}

ExactPosterior exact_posterior(const Dataset& dataset, int upto_t) {
  const auto stats = dataset.stats(upto_t);
  return ExactPosterior(stats, dataset.hyper);
}

double log_joint(std::span<const SufficientStats> stats, const HyperParams& hyper,
                 const Eigen::Ref<const Vector>& theta) {
  if (static_cast<std::size_t>(theta.size()) != stats.size())
    throw ContractViolation("log_joint: state length does not match number of batches");
  double lp = 0.0;
  double prev = 0.0;
  for (Eigen::Index l = 0; l < theta.size(); ++l) {
    lp += normal_log_pdf(theta(l), prev, hyper.phi2);
    lp += log_likelihood(stats[static_cast<std::size_t>(l)], theta(l), hyper);
    prev = theta(l);
  }
  return lp;
}

void write_dataset(std::ostream& os, const Dataset& dataset) {
  std::string n_field = "variable";
  if (!dataset.batches.empty()) {
    const auto n0 = dataset.batches.front().n();
    bool uniform = true;
    for (const auto& b : dataset.batches) uniform = uniform && b.n() == n0;
    if (uniform) n_field = std::to_string(n0);
  }
  os << "# streamfilter ssm dataset\n";
  os << "# T=" << dataset.horizon() << "\n";
  os << "# n=" << n_field << "\n";
  os << "# sigma2=" << format_real(dataset.hyper.sigma2) << "\n";
  os << "# phi2=" << format_real(dataset.hyper.phi2) << "\n";
  os << "# seed=" << dataset.seed << "\n";
  os << "# theta=";
  for (std::size_t k = 0; k < dataset.true_states.size(); ++k)
    os << (k ? ";" : "") << format_real(dataset.true_states[k]);
  os << "\n";
  os << "t,i,y\n";
  for (const auto& b : dataset.batches)
    for (std::size_t i = 0; i < b.values.size(); ++i)
      os << b.t << ',' << (i + 1) << ',' << format_real(b.values[i]) << '\n';
}

Dataset read_dataset(std::istream& is) {
  std::map<std::string, std::string, std::less<>> header;
  Dataset ds;
  std::string line;
  std::size_t lineno = 0;
  bool seen_columns = false;
  std::vector<std::vector<double>> values;
  int horizon = -1;

  while (std::getline(is, line)) {
    ++lineno;
    auto view = trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      auto body = trim(view.substr(1));
      const auto eq = body.find('=');
      if (eq != std::string_view::npos)
        header[std::string(trim(body.substr(0, eq)))] = std::string(trim(body.substr(eq + 1)));
      continue;
    }
    if (!seen_columns) {
      if (view != "t,i,y") throw ParseError("expected column header 't,i,y'", lineno);
      seen_columns = true;
      auto need = [&](const char* key) -> const std::string& {
        auto it = header.find(key);
        if (it == header.end()) throw ParseError(std::string("missing header field ") + key, lineno);
        return it->second;
      };
      auto T = parse_int(need("T"));
      auto s2 = parse_real(need("sigma2"));
      auto p2 = parse_real(need("phi2"));
      auto seed = parse_uint(need("seed"));
      if (!T || !s2 || !p2 || !seed || *T < 0) throw ParseError("malformed header block", lineno);
      horizon = static_cast<int>(*T);
      ds.hyper = {*s2, *p2};
      ds.seed = *seed;
      values.assign(static_cast<std::size_t>(horizon), {});
      if (auto it = header.find("theta"); it != header.end() && !it->second.empty()) {
        for (auto tok : split(it->second, ';')) {
          auto v = parse_real(tok);
          if (!v) throw ParseError("malformed theta header", lineno);
          ds.true_states.push_back(*v);
        }
      }
      continue;
    }
    auto fields = split(view, ',');
    if (fields.size() != 3) throw ParseError("expected 3 fields", lineno);
    auto t = parse_int(fields[0]);
    auto i = parse_int(fields[1]);
    auto y = parse_real(fields[2]);
    if (!t || !i || !y) throw ParseError("malformed row", lineno);
    if (*t < 1 || *t > horizon) throw ParseError("time index out of range", lineno);
    auto& batch = values[static_cast<std::size_t>(*t - 1)];
    if (*i != static_cast<std::int64_t>(batch.size()) + 1) throw ParseError("observation index out of order", lineno);
    batch.push_back(*y);
  }
  if (!seen_columns) throw ParseError("missing column header", lineno);
  for (int t = 1; t <= horizon; ++t) ds.batches.push_back({t, std::move(values[static_cast<std::size_t>(t - 1)])});
  ds.validate();
  return ds;
}

}  // namespace streamfilter::ssm
