#ifndef STREAMFILTER_BOUNDS_HPP_
#define STREAMFILTER_BOUNDS_HPP_

// Calculators for the L1 error bounds of streaming updates: the one-step
// sandwich for PPRB, the accumulated filtering/jumping bounds and the
// step-reduction condition. Inputs are user supplied or estimated with
// empirical_l1_distance; nothing here estimates mixing rates.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace streamfilter::bounds {

struct ErrorTerms {
  double prev_error = 0.0;       // ||A_{t-1} - pi_{t-1}||
  double finite_sample = 0.0;    // ||F_S^{(t-1)} - A_{t-1}||
  double posterior_shift = 0.0;  // ||pi_t - pi_{t-1}||
  double approx_shift = 0.0;     // ||A_t - F_S^{(t-1)}||

  void validate() const;
};

struct Sandwich {
  double lower = 0.0;
  double upper = 0.0;
};

/// upper = sum of the four terms; lower = max(0, |prev - finite| - shift terms).
Sandwich pprb_error_sandwich(const ErrorTerms& terms);

/// Per-update constants, index u = 1..T stored at u - 1.
struct BoundTrace {
  std::vector<double> eps;       // rho_u^{m_u}, in (0, 1)
  std::vector<double> lambda_f;  // filtering error, >= 0
  std::vector<double> lambda_j;  // jumping error, >= 0
  std::vector<double> alpha;     // posterior shift, >= 0

  std::size_t length() const { return eps.size(); }
  void validate() const;
};

struct GammaValue {
  double value = 0.0;   // by recursion
  double direct = 0.0;  // by the explicit double sum
  bool agrees = true;   // |value - direct| <= 1e-12 * max(1, |direct|)
  /// Some lambda_f lies outside [0, 1]; only the weaker bound
  /// sum_v (prod_{u>=v} eps_u) lambda_v is then guaranteed.
  bool lambda_out_of_range = false;
};

/// gamma_t = eps_t (1 - lambda_t) gamma_{t-1} + eps_t lambda_t, gamma_0 = 0.
GammaValue gamma_filter(const BoundTrace& trace, std::size_t t);
/// gamma_t = eps_t gamma_{t-1} + eps_t (alpha_t + lambda_t), gamma_0 = 0.
GammaValue gamma_jump(const BoundTrace& trace, std::size_t t);

/// Direct double-sum forms (used as the independent check of the recursions).
double gamma_filter_direct(const BoundTrace& trace, std::size_t t);
double gamma_jump_direct(const BoundTrace& trace, std::size_t t);
/// sum_v (prod_{u=v}^t eps_u) lambda_f_v, which bounds gamma_filter.
double gamma_filter_weak(const BoundTrace& trace, std::size_t t);

/// Whether one step of the filtering recursion stays at or below one step of
/// the jumping recursion when both start from gamma.
bool recursive_dominance_check(double gamma, double eps, double lambda_f, double lambda_j, double alpha);

struct StepReduction {
  int m_filter = 0;           // minimal m^(F) meeting the inequality
  int saving = 0;             // m_s - m_filter
  bool tight_condition = false;  // dist_filter / dist_jump <= rho^saving
};

/// Smallest integer m_f >= 0 with m_f >= m_s - log(dist_jump / dist_filter) / log(1 / rho).
StepReduction step_reduction(int m_s, double dist_jump, double dist_filter, double rho);

/// Binned L1 distance between the empirical distributions of a and b over a
/// shared equal-width grid on the pooled range. bins = 0 picks ceil(sqrt(N)),
/// N the larger sample size. Result in [0, 2].
double empirical_l1_distance(std::span<const double> a, std::span<const double> b, std::size_t bins = 0);

}  // namespace streamfilter::bounds

#endif  // STREAMFILTER_BOUNDS_HPP_
