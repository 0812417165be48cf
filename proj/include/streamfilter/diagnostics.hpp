#ifndef STREAMFILTER_DIAGNOSTICS_HPP_
#define STREAMFILTER_DIAGNOSTICS_HPP_

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "streamfilter/ensemble.hpp"

namespace streamfilter {

using Cdf = std::function<double(double)>;

/// One-sample Kolmogorov-Smirnov distance sup_x |F_n(x) - F(x)|, evaluated
/// with both one-sided gaps at each order statistic.
double ks_statistic(std::span<const double> samples, const Cdf& reference);

/// Sup distance between two empirical CDFs.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Distinct values (bitwise equality) over length.
double unique_proportion(std::span<const double> samples);

/// N / (1 + 2 sum rho_k), autocorrelations truncated at the first
/// non-positive pair sum (initial positive sequence). Constant chains give 1.
double effective_sample_size(std::span<const double> chain);

/// Max over coordinates of the across-chain Pearson correlation between the
/// current ensemble and the ensemble that entered the transition phase.
/// Absolute correlations by default; `signed_correlation` keeps the sign.
/// A coordinate with zero spread at either iteration counts as 1.
double correlation_stop_statistic(const Matrix& initial, const Matrix& current,
                                  bool signed_correlation = false);
double correlation_stop_statistic(const Ensemble& initial, const Ensemble& current,
                                  bool signed_correlation = false);

/// True iff every monitored coordinate's KS distance is below threshold.
bool oracle_stop_check(const Ensemble& ensemble, const std::vector<Cdf>& reference_cdfs,
                       const std::vector<Eigen::Index>& coords, double threshold);

/// Mann-Kendall trend test (no tie correction beyond the variance term).
struct TrendTest {
  double s = 0.0;  // sum of sign(x_j - x_i), i < j
  double z = 0.0;
  double p_value = 1.0;  // two-sided
};
TrendTest mann_kendall(std::span<const double> series);

/// A coordinate watched by the oracle rule, with its distance to the reference
/// (one-sample KS against a CDF, or two-sample KS against reference draws).
struct MonitoredCoordinate {
  Eigen::Index coord = 0;
  std::function<double(std::span<const double>)> distance;

  static MonitoredCoordinate against_cdf(Eigen::Index coord, Cdf cdf);
  static MonitoredCoordinate against_samples(Eigen::Index coord, std::vector<double> reference);
};

/// Decides how many transition sweeps m_t an update performs.
class StoppingRule {
 public:
  enum class Kind { fixed, oracle, correlation };

  static StoppingRule fixed(int m);
  static StoppingRule oracle(double threshold, std::vector<MonitoredCoordinate> monitors);
  static StoppingRule correlation(double epsilon, bool signed_correlation = false);

  Kind kind() const { return kind_; }
  int fixed_steps() const { return fixed_steps_; }
  double threshold() const { return threshold_; }
  double epsilon() const { return epsilon_; }

  /// Adaptive rules never stop before this many sweeps (default 1) and give
  /// up at `max_steps` (default 10^4).
  StoppingRule& with_min_steps(int k);
  StoppingRule& with_max_steps(int k);
  /// Coordinates whose KS is reported as residual error at the stop. The
  /// oracle rule reports its own monitors.
  StoppingRule& with_report(std::vector<MonitoredCoordinate> monitors);

  int min_steps() const { return min_steps_; }
  int max_steps() const { return max_steps_; }

  /// Whether the chains may stop after k sweeps. `initial` is the ensemble
  /// that entered the transition phase (dim x S).
  bool satisfied(const Matrix& initial, const Matrix& current, int k) const;

  /// Largest KS distance over the reported coordinates; NaN if none.
  double residual(const Matrix& current) const;

 private:
  Kind kind_ = Kind::fixed;
  int fixed_steps_ = 0;
  double threshold_ = 0.0;
  double epsilon_ = 0.0;
  bool signed_ = false;
  int min_steps_ = 1;
  int max_steps_ = 10000;
  std::vector<MonitoredCoordinate> monitors_;
  std::vector<MonitoredCoordinate> report_;
};

/// Per-update measurements, serialized as rows (t, coordinate, metric, value).
struct DiagnosticsReport {
  struct Row {
    int t;
    int coordinate;  // 1-based; 0 for update-level metrics
    std::string metric;
    double value;
  };
  std::vector<Row> rows;

  void add(int t, int coordinate, std::string metric, double value) {
    rows.push_back({t, coordinate, std::move(metric), value});
  }
  /// ks/unique_prop/ess for every coordinate of the ensemble.
  void add_ensemble(const Ensemble& e, const std::vector<Cdf>* reference_cdfs = nullptr);

  void write(std::ostream& os, bool with_header = true) const;
};

}  // namespace streamfilter

#endif  // STREAMFILTER_DIAGNOSTICS_HPP_
