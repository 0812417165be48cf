#include "streamfilter/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "streamfilter/errors.hpp"

namespace streamfilter::bounds {

namespace {

bool close(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

void check_horizon(const BoundTrace& trace, std::size_t t) {
  trace.validate();
  require(t <= trace.length(), "bound recursion: t exceeds trace length");
}

}  // namespace

void ErrorTerms::validate() const {
  require(prev_error >= 0 && finite_sample >= 0 && posterior_shift >= 0 && approx_shift >= 0,
          "ErrorTerms: all terms must be non-negative");
}

Sandwich pprb_error_sandwich(const ErrorTerms& terms) {
  terms.validate();
  const double upper = terms.prev_error + terms.finite_sample + terms.posterior_shift + terms.approx_shift;
  const double lower = std::abs(terms.prev_error - terms.finite_sample) - terms.posterior_shift - terms.approx_shift;
  return {std::max(0.0, lower), upper};
}

void BoundTrace::validate() const {
  const auto n = eps.size();
  require(lambda_f.size() == n && lambda_j.size() == n && alpha.size() == n,
          "BoundTrace: sequences must have equal length");
  for (std::size_t u = 0; u < n; ++u) {
    require(eps[u] > 0.0 && eps[u] < 1.0, "BoundTrace: eps entries must lie in (0, 1)");
    require(lambda_f[u] >= 0.0 && lambda_j[u] >= 0.0 && alpha[u] >= 0.0,
            "BoundTrace: lambda and alpha entries must be non-negative");
  }
}

double gamma_filter_direct(const BoundTrace& trace, std::size_t t) {
  check_horizon(trace, t);
  double total = 0.0;
  for (std::size_t v = 1; v <= t; ++v) {
    double prod = 1.0;
    for (std::size_t u = v + 1; u <= t; ++u) prod *= trace.eps[u - 1] * (1.0 - trace.lambda_f[u - 1]);
    total += prod * trace.eps[v - 1] * trace.lambda_f[v - 1];
  }
  return total;
}

double gamma_jump_direct(const BoundTrace& trace, std::size_t t) {
  check_horizon(trace, t);
  double total = 0.0;
  for (std::size_t v = 1; v <= t; ++v) {
    double prod = 1.0;
    for (std::size_t u = v; u <= t; ++u) prod *= trace.eps[u - 1];
    total += prod * (trace.lambda_j[v - 1] + trace.alpha[v - 1]);
  }
  return total;
}

double gamma_filter_weak(const BoundTrace& trace, std::size_t t) {
  check_horizon(trace, t);
  double total = 0.0;
  for (std::size_t v = 1; v <= t; ++v) {
    double prod = 1.0;
    for (std::size_t u = v; u <= t; ++u) prod *= trace.eps[u - 1];
    total += prod * trace.lambda_f[v - 1];
  }
  return total;
}

GammaValue gamma_filter(const BoundTrace& trace, std::size_t t) {
  check_horizon(trace, t);
  GammaValue out;
  double gamma = 0.0;
  for (std::size_t u = 1; u <= t; ++u) {
    const double e = trace.eps[u - 1];
    const double l = trace.lambda_f[u - 1];
    if (l > 1.0) out.lambda_out_of_range = true;
    gamma = e * (1.0 - l) * gamma + e * l;
  }
  out.value = gamma;
  out.direct = gamma_filter_direct(trace, t);
  out.agrees = close(out.value, out.direct);
  return out;
}

GammaValue gamma_jump(const BoundTrace& trace, std::size_t t) {
  check_horizon(trace, t);
  GammaValue out;
  double gamma = 0.0;
  for (std::size_t u = 1; u <= t; ++u) {
    const double e = trace.eps[u - 1];
    gamma = e * gamma + e * (trace.alpha[u - 1] + trace.lambda_j[u - 1]);
  }
  out.value = gamma;
  out.direct = gamma_jump_direct(trace, t);
  out.agrees = close(out.value, out.direct);
  return out;
}

bool recursive_dominance_check(double gamma, double eps, double lambda_f, double lambda_j, double alpha) {
  require(gamma >= 0 && lambda_f >= 0 && lambda_j >= 0 && alpha >= 0,
          "recursive_dominance_check: inputs must be non-negative");
  require(eps > 0.0 && eps < 1.0, "recursive_dominance_check: eps must lie in (0, 1)");
  const double filter = eps * (1.0 - lambda_f) * gamma + eps * lambda_f;
  const double jump = eps * gamma + eps * (alpha + lambda_j);
  // Rounding slack so the algebraic boundary case counts as dominated.
  return filter <= jump + 1e-12 * std::max(1.0, std::abs(jump));
}

StepReduction step_reduction(int m_s, double dist_jump, double dist_filter, double rho) {
  require(dist_jump > 0.0 && dist_filter > 0.0, "step_reduction: distances must be positive");
  require(rho > 0.0 && rho < 1.0, "step_reduction: rho must lie in (0, 1)");
  require(m_s >= 0, "step_reduction: m_s must be non-negative");
  const double rhs = static_cast<double>(m_s) - std::log(dist_jump / dist_filter) / std::log(1.0 / rho);
  double m = std::ceil(rhs);
  // A right-hand side that is an integer up to rounding should not cost a step.
  if (std::abs(rhs - std::round(rhs)) <= 1e-9 * std::max(1.0, std::abs(rhs))) m = std::round(rhs);
  StepReduction out;
  out.m_filter = static_cast<int>(std::max(0.0, m));
  out.saving = m_s - out.m_filter;
  const double bound = std::pow(rho, out.saving);
  out.tight_condition = dist_filter / dist_jump <= bound * (1.0 + 1e-12);
  return out;
}

double empirical_l1_distance(std::span<const double> a, std::span<const double> b, std::size_t bins) {
  require(!a.empty() && !b.empty(), "empirical_l1_distance: samples must be non-empty");
  if (bins == 0)
    bins = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(std::max(a.size(), b.size())))));
  require(bins >= 2, "empirical_l1_distance: need at least 2 bins");
  const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
  const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
  const double lo = std::min(*amin, *bmin);
  const double hi = std::max(*amax, *bmax);
  if (!(hi > lo)) return 0.0;  // every value identical
  const double width = (hi - lo) / static_cast<double>(bins);

  auto histogram = [&](std::span<const double> x) {
    std::vector<double> h(bins, 0.0);
    for (double v : x) {
      auto k = static_cast<std::size_t>((v - lo) / width);
      h[std::min(k, bins - 1)] += 1.0;
    }
    for (auto& c : h) c /= static_cast<double>(x.size());
    return h;
  };
  const auto ha = histogram(a);
  const auto hb = histogram(b);
  double total = 0.0;
  for (std::size_t k = 0; k < bins; ++k) total += std::abs(ha[k] - hb[k]);
  return std::min(total, 2.0);
}

}  // namespace streamfilter::bounds
