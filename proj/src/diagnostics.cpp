#include "streamfilter/diagnostics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <unordered_set>

#include "streamfilter/format.hpp"

namespace streamfilter {

double ks_statistic(std::span<const double> samples, const Cdf& reference) {
  if (samples.empty()) throw ContractViolation("ks_statistic: empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = reference(sorted[i]);
    const double above = static_cast<double>(i + 1) / n - f;
    const double below = f - static_cast<double>(i) / n;
    d = std::max({d, above, below});
  }
  return d;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ContractViolation("ks_two_sample: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  // Once one sample is exhausted its CDF is 1 and the other only rises toward 1.
  return d;
}

double unique_proportion(std::span<const double> samples) {
  if (samples.empty()) throw ContractViolation("unique_proportion: empty sample");
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(samples.size());
  for (double v : samples) seen.insert(std::bit_cast<std::uint64_t>(v));
  return static_cast<double>(seen.size()) / static_cast<double>(samples.size());
}

double effective_sample_size(std::span<const double> chain) {
  if (chain.size() < 10) throw ContractViolation("effective_sample_size: need at least 10 draws");
  const auto n = chain.size();
  const double dn = static_cast<double>(n);
  double mean = 0.0;
  for (double v : chain) mean += v;
  mean /= dn;
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = chain[i] - mean;
  double var0 = 0.0;
  for (double v : c) var0 += v * v;
  if (!(var0 > 0.0)) return 1.0;

  auto rho = [&](std::size_t k) {
    double acc = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) acc += c[i] * c[i + k];
    return acc / var0;
  };
  double tau = -1.0;
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    const double pair = rho(2 * k) + rho(2 * k + 1);
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  const double ess = dn / tau;
  return std::clamp(ess, std::numeric_limits<double>::min(), dn);
}

double correlation_stop_statistic(const Matrix& initial, const Matrix& current, bool signed_correlation) {
  if (initial.rows() != current.rows() || initial.cols() != current.cols())
    throw ContractViolation("correlation_stop_statistic: ensembles differ in shape");
  if (initial.cols() < 3) throw ContractViolation("correlation_stop_statistic: need at least 3 chains");
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < initial.rows(); ++j) {
    const Eigen::ArrayXd x0 = initial.row(j).transpose().array() - initial.row(j).mean();
    const Eigen::ArrayXd xk = current.row(j).transpose().array() - current.row(j).mean();
    const double s0 = std::sqrt((x0 * x0).sum());
    const double sk = std::sqrt((xk * xk).sum());
    double r = 1.0;
    if (s0 > 0.0 && sk > 0.0) {
      r = (x0 * xk).sum() / (s0 * sk);
      if (!signed_correlation) r = std::abs(r);
    }
    best = std::max(best, r);
  }
  return best;
}

double correlation_stop_statistic(const Ensemble& initial, const Ensemble& current, bool signed_correlation) {
  return correlation_stop_statistic(initial.members(), current.members(), signed_correlation);
}

bool oracle_stop_check(const Ensemble& ensemble, const std::vector<Cdf>& reference_cdfs,
                       const std::vector<Eigen::Index>& coords, double threshold) {
  if (reference_cdfs.size() != coords.size())
    throw ContractViolation("oracle_stop_check: one reference CDF per monitored coordinate");
  for (std::size_t k = 0; k < coords.size(); ++k) {
    if (coords[k] < 0 || coords[k] >= ensemble.dim())
      throw ContractViolation("oracle_stop_check: monitored coordinate out of range");
    const auto values = ensemble.coordinate(coords[k]);
    if (!(ks_statistic(values, reference_cdfs[k]) < threshold)) return false;
  }
  return true;
}

TrendTest mann_kendall(std::span<const double> series) {
  const auto n = series.size();
  TrendTest out;
  if (n < 3) return out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = series[j] - series[i];
      out.s += (d > 0) - (d < 0);
    }
  std::map<double, int> ties;
  for (double v : series) ++ties[v];
  const double dn = static_cast<double>(n);
  double var = dn * (dn - 1) * (2 * dn + 5);
  for (const auto& [v, c] : ties) {
    const double t = c;
    var -= t * (t - 1) * (2 * t + 5);
  }
  var /= 18.0;
  if (var > 0.0) {
    if (out.s > 0) out.z = (out.s - 1) / std::sqrt(var);
    else if (out.s < 0) out.z = (out.s + 1) / std::sqrt(var);
  }
  out.p_value = std::erfc(std::abs(out.z) / std::sqrt(2.0));
  return out;
}

MonitoredCoordinate MonitoredCoordinate::against_cdf(Eigen::Index coord, Cdf cdf) {
  return {coord, [cdf = std::move(cdf)](std::span<const double> v) { return ks_statistic(v, cdf); }};
}

MonitoredCoordinate MonitoredCoordinate::against_samples(Eigen::Index coord, std::vector<double> reference) {
  return {coord, [ref = std::move(reference)](std::span<const double> v) { return ks_two_sample(v, ref); }};
}

StoppingRule StoppingRule::fixed(int m) {
  if (m < 0) throw ConfigError("fixed stopping rule: m must be >= 0");
  StoppingRule r;
  r.kind_ = Kind::fixed;
  r.fixed_steps_ = m;
  r.min_steps_ = m;
  r.max_steps_ = m;
  return r;
}

StoppingRule StoppingRule::oracle(double threshold, std::vector<MonitoredCoordinate> monitors) {
  if (!(threshold > 0.0)) throw ConfigError("oracle stopping rule: threshold must be > 0");
  if (monitors.empty()) throw ConfigError("oracle stopping rule: nothing to monitor");
  StoppingRule r;
  r.kind_ = Kind::oracle;
  r.threshold_ = threshold;
  r.monitors_ = std::move(monitors);
  return r;
}

StoppingRule StoppingRule::correlation(double epsilon, bool signed_correlation) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("correlation stopping rule: epsilon must lie in [0, 1]");
  StoppingRule r;
  r.kind_ = Kind::correlation;
  r.epsilon_ = epsilon;
  r.signed_ = signed_correlation;
  return r;
}

StoppingRule& StoppingRule::with_min_steps(int k) {
  if (kind_ != Kind::fixed) min_steps_ = std::max(0, k);
  return *this;
}

StoppingRule& StoppingRule::with_max_steps(int k) {
  if (kind_ != Kind::fixed) max_steps_ = std::max(min_steps_, k);
  return *this;
}

StoppingRule& StoppingRule::with_report(std::vector<MonitoredCoordinate> monitors) {
  report_ = std::move(monitors);
  return *this;
}

bool StoppingRule::satisfied(const Matrix& initial, const Matrix& current, int k) const {
  if (k < min_steps_) return false;
  if (k >= max_steps_) return true;
  switch (kind_) {
    case Kind::fixed:
      return k >= fixed_steps_;
    case Kind::oracle: {
      std::vector<double> values(static_cast<std::size_t>(current.cols()));
      for (const auto& m : monitors_) {
        if (m.coord < 0 || m.coord >= current.rows())
          throw ContractViolation("oracle stopping rule: monitored coordinate out of range");
        Eigen::Map<Eigen::RowVectorXd>(values.data(), current.cols()) = current.row(m.coord);
        if (!(m.distance(values) < threshold_)) return false;
      }
      return true;
    }
    case Kind::correlation:
      return correlation_stop_statistic(initial, current, signed_) <= 1.0 - epsilon_;
  }
  return true;
}

double StoppingRule::residual(const Matrix& current) const {
  const auto& list = report_.empty() ? monitors_ : report_;
  if (list.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> values(static_cast<std::size_t>(current.cols()));
  double worst = 0.0;
  for (const auto& m : list) {
    Eigen::Map<Eigen::RowVectorXd>(values.data(), current.cols()) = current.row(m.coord);
    worst = std::max(worst, m.distance(values));
  }
  return worst;
}

void DiagnosticsReport::add_ensemble(const Ensemble& e, const std::vector<Cdf>* reference_cdfs) {
  for (Eigen::Index j = 0; j < e.dim(); ++j) {
    const auto values = e.coordinate(j);
    const int coord = static_cast<int>(j + 1);
    if (reference_cdfs && static_cast<std::size_t>(j) < reference_cdfs->size())
      add(e.time(), coord, "ks", ks_statistic(values, (*reference_cdfs)[static_cast<std::size_t>(j)]));
    add(e.time(), coord, "unique_prop", unique_proportion(values));
    if (values.size() >= 10) add(e.time(), coord, "ess", effective_sample_size(values));
  }
}

void DiagnosticsReport::write(std::ostream& os, bool with_header) const {
  if (with_header) os << "t,coordinate,metric,value\n";
  for (const auto& r : rows) os << r.t << ',' << r.coordinate << ',' << r.metric << ',' << format_real(r.value) << '\n';
}

}  // namespace streamfilter
