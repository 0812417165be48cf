#include "streamfilter/samplers.hpp"

#include <algorithm>

namespace streamfilter {

void SamplerConfig::validate() const {
  if (ensemble_size < 2) throw ConfigError("sampler: ensemble size S must be >= 2");
  if (iters < 1) throw ConfigError("sampler: iters must be >= 1");
  if (burn_in < 0 || burn_in >= iters) throw ConfigError("sampler: burn_in must lie in [0, iters)");
  if (thin < 1) throw ConfigError("sampler: thin must be >= 1");
  if (retained() < 2) throw ConfigError("sampler: (iters - burn_in) / thin must leave at least 2 draws");
}

RwProposal RwProposal::from_covariance(Matrix covariance) {
  require(covariance.rows() == covariance.cols() && covariance.rows() > 0, "RwProposal: covariance must be square");
  const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
  require((covariance - covariance.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
          "RwProposal: covariance must be symmetric");
  Eigen::LLT<Matrix> llt(covariance);
  require(llt.info() == Eigen::Success, "RwProposal: covariance must be positive definite");
  Matrix l = llt.matrixL();
  return RwProposal(std::move(covariance), std::move(l));
}

RwProposal RwProposal::adaptive(const Matrix& posterior_covariance) {
  const double d = static_cast<double>(posterior_covariance.rows());
  require(d > 0, "RwProposal: empty covariance");
  return from_covariance((2.4 * 2.4 / d) * posterior_covariance);
}

Vector RwProposal::draw_increment(Rng& rng) const {
  Vector z(dim());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return cholesky_.triangularView<Eigen::Lower>() * z;
}

Matrix ensemble_covariance(const Matrix& members, double jitter) {
  require(members.cols() >= 2, "ensemble_covariance: need at least 2 members");
  const Matrix centered = members.colwise() - members.rowwise().mean();
  Matrix cov = centered * centered.transpose() / static_cast<double>(members.cols() - 1);
  cov = 0.5 * (cov + cov.transpose());
  cov.diagonal().array() += jitter;
  return cov;
}

std::vector<Eigen::Index> multinomial_resample(const Vector& weights, Eigen::Index count, Rng& rng) {
  require(weights.size() > 0, "multinomial_resample: no weights");
  std::vector<double> cumulative(static_cast<std::size_t>(weights.size()));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    require(weights(i) >= 0.0, "multinomial_resample: negative weight");
    acc += weights(i);
    cumulative[static_cast<std::size_t>(i)] = acc;
  }
  if (!(acc > 0.0)) throw DegenerateWeights("multinomial_resample: weights sum to zero");
  std::vector<Eigen::Index> out(static_cast<std::size_t>(count));
  for (auto& idx : out) {
    const double u = rng.uniform() * acc;
    auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    idx = static_cast<Eigen::Index>(it - cumulative.begin());
  }
  return out;
}

}  // namespace streamfilter
