#ifndef STREAMFILTER_SSM_MODEL_HPP_
#define STREAMFILTER_SSM_MODEL_HPP_

// Gaussian random-walk state-space model:
//
//   y_{t,i} ~ N(theta_t, sigma2),   theta_1 ~ N(0, phi2),
//   theta_t | theta_{t-1} ~ N(theta_{t-1}, phi2).
//
// Everything downstream of data generation works from per-batch sufficient
// statistics (n, sum y, sum y^2) only.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "streamfilter/gaussian.hpp"

namespace streamfilter::ssm {

struct HyperParams {
  double sigma2 = 1.0;  // observation variance
  double phi2 = 1.0;    // state-evolution variance

  void validate() const;
};

struct DataBatch {
  int t = 1;
  std::vector<double> values;

  std::size_t n() const { return values.size(); }
};

struct SufficientStats {
  std::size_t n = 0;
  double sum_y = 0.0;
  double sum_y2 = 0.0;
};

struct Dataset {
  HyperParams hyper;
  std::uint64_t seed = 0;
  std::vector<DataBatch> batches;  // t = 1..T
  std::vector<double> true_states;  // theta_{1:T}, reporting only

  int horizon() const { return static_cast<int>(batches.size()); }
  /// Statistics of batches 1..upto_t.
  std::vector<SufficientStats> stats(int upto_t) const;
  void validate() const;
};

/// Draws theta_{1:T} from the prior and n observations per step.
/// Pure function of its arguments.
Dataset generate_data(int horizon, int n, const HyperParams& hyper, std::uint64_t seed);

SufficientStats sufficient_stats(std::span<const double> values);
inline SufficientStats sufficient_stats(const DataBatch& batch) { return sufficient_stats(batch.values); }

/// sum_i log N(y_i; theta, sigma2) from the statistics alone.
double log_likelihood(const SufficientStats& stats, double theta, const HyperParams& hyper);

/// theta_t | theta_{t-1}, y_t. theta_{t-1} = 0 encodes the theta_1 prior.
GaussianDist full_conditional_theta_t(double theta_prev, const SufficientStats& stats,
                                      const HyperParams& hyper);

/// Gibbs conditional of component `ell` (1-based) in a chain of length
/// `horizon`. `left` must be absent exactly when ell == 1 and `right` exactly
/// when ell == horizon.
GaussianDist full_conditional_theta_ell(int ell, int horizon, std::optional<double> left,
                                        std::optional<double> right, const SufficientStats& stats,
                                        const HyperParams& hyper);

/// Tridiagonal posterior precision of theta_{1:t} given the batch statistics.
SymTridiagonal<double> posterior_precision(std::span<const SufficientStats> stats,
                                           const HyperParams& hyper);

/// Exact p(theta_{1:t} | y_{1:t}) in precision form; the covariance is only
/// assembled when asked for.
class ExactPosterior {
 public:
  ExactPosterior(std::span<const SufficientStats> stats, const HyperParams& hyper);

  int horizon() const { return static_cast<int>(mean_.size()); }
  const Vector& mean() const { return mean_; }
  const SymTridiagonal<double>& precision() const { return precision_; }
  const Matrix& covariance() const;
  GaussianDist marginal(int j) const;  // 0-based coordinate
  GaussianMVDist distribution() const { return {mean_, covariance()}; }

 private:
  SymTridiagonal<double> precision_;
  TridiagonalLDLT<double> factor_;
  Vector mean_;
  mutable std::optional<Matrix> covariance_;
};

ExactPosterior exact_posterior(const Dataset& dataset, int upto_t);

/// Joint unnormalized log density log p(y_{1:t} | theta) + log p(theta).
double log_joint(std::span<const SufficientStats> stats, const HyperParams& hyper,
                 const Eigen::Ref<const Vector>& theta);

// Delimited text: a '#'-prefixed header block (T, n, sigma2, phi2, seed and
// the generating states) followed by rows "t,i,y". Reals use 17 significant
// digits so parsing reproduces every value exactly.
void write_dataset(std::ostream& os, const Dataset& dataset);
Dataset read_dataset(std::istream& is);

}  // namespace streamfilter::ssm

#endif  // STREAMFILTER_SSM_MODEL_HPP_
