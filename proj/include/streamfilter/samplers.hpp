#ifndef STREAMFILTER_SAMPLERS_HPP_
#define STREAMFILTER_SAMPLERS_HPP_

// Streaming samplers over a generic model interface:
//
//   gibbs_update                  non-streaming refit from scratch
//   pprb_within_gibbs_update      resample old parameters through independent
//                                 MH, Gibbs-step the new block
//   smcmc_update                  jump each member, then m_t parallel sweeps
//   generative_filtering_update   filter (PPRB-within-Gibbs), then m_t
//                                 parallel sweeps
//   bootstrap_smc_update          importance weighting + multinomial resampling
//
// Parallel chains draw from streams keyed by (seed, t, purpose, chain), so the
// output does not depend on the number of worker threads.

#include <omp.h>

#include <cmath>
#include <concepts>
#include <cstdint>
#include <utility>
#include <vector>

#include "streamfilter/diagnostics.hpp"
#include "streamfilter/ensemble.hpp"
#include "streamfilter/rng.hpp"

namespace streamfilter {

struct SamplerConfig {
  int ensemble_size = 1000;  // S
  int iters = 1100;
  int burn_in = 100;
  int thin = 1;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: OpenMP default
  StoppingRule stopping = StoppingRule::fixed(5);

  void validate() const;
  /// Draws kept by a chain of `iters` sweeps: (iters - burn_in) / thin.
  int retained() const { return (iters - burn_in) / thin; }
};

using VectorRef = Eigen::Ref<Vector>;
using VectorCRef = Eigen::Ref<const Vector>;

/// A model at update time t. The state is theta_{1:t} flattened so that the
/// block added at time t comes last: state = [old (prev_dim) ; block].
template <typename M>
concept StreamingStep = requires(const M& m, VectorCRef prev, VectorCRef block, VectorRef state, Rng& rng) {
  { m.time() } -> std::convertible_to<int>;
  { m.prev_dim() } -> std::convertible_to<Eigen::Index>;
  { m.block_dim() } -> std::convertible_to<Eigen::Index>;
  // p(block | old): conditional prior of the new parameters
  { m.draw_block_prior(prev, rng) } -> std::convertible_to<Vector>;
  { m.log_block_prior(prev, block) } -> std::convertible_to<double>;
  // log p(y_t | old, block, y_{1:t-1})
  { m.log_batch_likelihood(prev, block) } -> std::convertible_to<double>;
  // Draw (or MH-move) the block from p(block | old, y_{1:t}).
  { m.draw_block_conditional(prev, block, rng) } -> std::convertible_to<Vector>;
  // SMCMC jumping kernel J_t.
  { m.jump(prev, rng) } -> std::convertible_to<Vector>;
  // One sweep of a kernel leaving p(theta_{1:t} | y_{1:t}) invariant.
  { m.transition(state, rng) };
};

/// Models whose jumping kernel has a tractable density (bootstrap filter).
template <typename M>
concept ImportanceStep = StreamingStep<M> && requires(const M& m, VectorCRef prev, VectorCRef block) {
  { m.log_jump_density(prev, block) } -> std::convertible_to<double>;
};

/// Models that expose a component-wise Gibbs sweep.
template <typename M>
concept GibbsTarget = requires(const M& m, VectorRef state, Rng& rng) {
  { m.time() } -> std::convertible_to<int>;
  { m.dim() } -> std::convertible_to<Eigen::Index>;
  { m.gibbs_sweep(state, rng) };
};

/// Random-walk Metropolis proposal N(x, covariance).
class RwProposal {
 public:
  /// Rejects covariances that are not symmetric positive definite.
  static RwProposal from_covariance(Matrix covariance);
  /// 2.4^2 Sigma / d for a d-dimensional target.
  static RwProposal adaptive(const Matrix& posterior_covariance);

  const Matrix& covariance() const { return covariance_; }
  Eigen::Index dim() const { return covariance_.rows(); }
  Vector draw_increment(Rng& rng) const;

 private:
  RwProposal(Matrix covariance, Matrix cholesky) : covariance_(std::move(covariance)), cholesky_(std::move(cholesky)) {}
  Matrix covariance_;
  Matrix cholesky_;
};

/// Empirical covariance of the members plus `jitter` on the diagonal.
Matrix ensemble_covariance(const Matrix& members, double jitter = 1e-9);

/// One joint random-walk Metropolis step. Returns whether it moved.
template <typename LogTarget>
bool rw_transition_sweep(VectorRef state, const RwProposal& proposal, LogTarget&& log_target, Rng& rng) {
  require(proposal.dim() == state.size(), "rw_transition_sweep: proposal dimension does not match state");
  const Vector candidate = state + proposal.draw_increment(rng);
  const double log_ratio = log_target(candidate) - log_target(Vector(state));
  if (std::log(rng.uniform()) < log_ratio) {
    state = candidate;
    return true;
  }
  return false;
}

namespace detail {

inline int thread_count(int requested) { return requested > 0 ? requested : omp_get_max_threads(); }

}  // namespace detail

struct TransitionOutcome {
  Ensemble ensemble;
  int steps = 0;          // m_t actually applied
  bool capped = false;    // hit the rule's max_steps without meeting it
  double residual = 0.0;  // rule's reported KS at the stop (NaN if none)
};

/// Runs the S chains in lockstep, one sweep at a time, until `rule` is met.
template <StreamingStep M>
TransitionOutcome run_transition_phase(const M& step, const Ensemble& start, const StoppingRule& rule,
                                       std::uint64_t seed, int threads) {
  const auto S = start.size();
  const Matrix& initial = start.members();
  Matrix current = initial;
  std::vector<Rng> rngs;
  rngs.reserve(static_cast<std::size_t>(S));
  for (Eigen::Index s = 0; s < S; ++s)
    rngs.push_back(Rng::stream(seed, {static_cast<std::uint64_t>(step.time()),
                                      static_cast<std::uint64_t>(Purpose::transition),
                                      static_cast<std::uint64_t>(s)}));
  const int nthreads = detail::thread_count(threads);

  int k = 0;
  while (!rule.satisfied(initial, current, k)) {
#pragma omp parallel for num_threads(nthreads) schedule(static)
    for (Eigen::Index s = 0; s < S; ++s) {
      Vector x = current.col(s);
      step.transition(x, rngs[static_cast<std::size_t>(s)]);
      current.col(s) = x;
    }
    ++k;
  }
  TransitionOutcome out;
  out.steps = k;
  out.capped = rule.kind() != StoppingRule::Kind::fixed && k >= rule.max_steps();
  out.residual = rule.residual(current);
  out.ensemble = Ensemble(step.time(), std::move(current));
  return out;
}

template <GibbsTarget M>
Ensemble gibbs_update(const M& target, const SamplerConfig& cfg, Vector init) {
  cfg.validate();
  require(init.size() == target.dim(), "gibbs_update: initial state has the wrong dimension");
  auto rng = Rng::stream(cfg.seed, {static_cast<std::uint64_t>(target.time()),
                                    static_cast<std::uint64_t>(Purpose::gibbs)});
  Matrix kept(target.dim(), cfg.retained());
  Eigen::Index filled = 0;
  for (int it = 0; it < cfg.iters && filled < kept.cols(); ++it) {
    target.gibbs_sweep(init, rng);
    if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == cfg.thin - 1) kept.col(filled++) = init;
  }
  return Ensemble(target.time(), std::move(kept));
}

struct PprbStats {
  int proposals = 0;
  int accepted = 0;
  double acceptance_rate() const { return proposals ? static_cast<double>(accepted) / proposals : 0.0; }
};

/// PPRB-within-Gibbs: independent MH over the previous ensemble for the old
/// parameters, then a conditional draw of the new block, repeated for
/// cfg.iters iterations; burn-in and thinning leave cfg.retained() members.
template <StreamingStep M>
Ensemble pprb_within_gibbs_update(const M& step, const Ensemble& prev, const SamplerConfig& cfg,
                                  PprbStats* stats = nullptr) {
  cfg.validate();
  require(prev.size() >= 1, "pprb_within_gibbs_update: empty ensemble");
  require(prev.dim() == step.prev_dim(), "pprb_within_gibbs_update: ensemble dimension does not match model");
  auto rng = Rng::stream(cfg.seed, {static_cast<std::uint64_t>(step.time()),
                                    static_cast<std::uint64_t>(Purpose::filter)});
  const auto S = static_cast<std::uint64_t>(prev.size());
  const auto& pool = prev.members();

  std::uint64_t current = rng.index(S);
  Vector block = step.draw_block_prior(pool.col(static_cast<Eigen::Index>(current)), rng);

  Matrix kept(step.prev_dim() + step.block_dim(), cfg.retained());
  Eigen::Index filled = 0;
  PprbStats local;
  for (int it = 0; it < cfg.iters && filled < kept.cols(); ++it) {
    const std::uint64_t proposal = rng.index(S);
    const auto old_cur = pool.col(static_cast<Eigen::Index>(current));
    const auto old_prop = pool.col(static_cast<Eigen::Index>(proposal));
    const double log_alpha = step.log_batch_likelihood(old_prop, block) - step.log_batch_likelihood(old_cur, block) +
                             step.log_block_prior(old_prop, block) - step.log_block_prior(old_cur, block);
    ++local.proposals;
    if (std::log(rng.uniform()) < log_alpha) {
      current = proposal;
      ++local.accepted;
    }
    const auto old = pool.col(static_cast<Eigen::Index>(current));
    block = step.draw_block_conditional(old, block, rng);
    if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == cfg.thin - 1) {
      kept.col(filled).head(step.prev_dim()) = old;
      kept.col(filled).tail(step.block_dim()) = block;
      ++filled;
    }
  }
  if (stats) *stats = local;
  return Ensemble(step.time(), std::move(kept));
}

/// Jumping-kernel extension of every member (SMCMC's first stage).
template <StreamingStep M>
Ensemble jump_ensemble(const M& step, const Ensemble& prev, const SamplerConfig& cfg) {
  require(prev.dim() == step.prev_dim(), "jump_ensemble: ensemble dimension does not match model");
  const auto S = prev.size();
  Matrix out(step.prev_dim() + step.block_dim(), S);
  const int nthreads = detail::thread_count(cfg.threads);
#pragma omp parallel for num_threads(nthreads) schedule(static)
  for (Eigen::Index s = 0; s < S; ++s) {
    auto rng = Rng::stream(cfg.seed, {static_cast<std::uint64_t>(step.time()),
                                      static_cast<std::uint64_t>(Purpose::jump), static_cast<std::uint64_t>(s)});
    const auto old = prev.member(s);
    out.col(s).head(step.prev_dim()) = old;
    out.col(s).tail(step.block_dim()) = step.jump(old, rng);
  }
  return Ensemble(step.time(), std::move(out));
}

template <StreamingStep M>
TransitionOutcome smcmc_update(const M& step, const Ensemble& prev, const SamplerConfig& cfg) {
  cfg.validate();
  return run_transition_phase(step, jump_ensemble(step, prev, cfg), cfg.stopping, cfg.seed, cfg.threads);
}

/// Generative Filtering with a caller-supplied filtering step.
template <StreamingStep M, typename Filter>
  requires std::invocable<Filter, const M&, const Ensemble&, const SamplerConfig&>
TransitionOutcome generative_filtering_update(const M& step, const Ensemble& prev, const SamplerConfig& cfg,
                                              Filter&& filter) {
  cfg.validate();
  Ensemble filtered = std::forward<Filter>(filter)(step, prev, cfg);
  require(filtered.dim() == step.prev_dim() + step.block_dim(), "generative_filtering_update: filter output has wrong dimension");
  return run_transition_phase(step, filtered, cfg.stopping, cfg.seed, cfg.threads);
}

/// Generative Filtering with PPRB-within-Gibbs as the filter.
template <StreamingStep M>
TransitionOutcome generative_filtering_update(const M& step, const Ensemble& prev, const SamplerConfig& cfg) {
  return generative_filtering_update(step, prev, cfg, [](const M& m, const Ensemble& e, const SamplerConfig& c) {
    return pprb_within_gibbs_update(m, e, c);
  });
}

/// Proposals and normalized importance weights of one bootstrap step, before
/// resampling.
struct ImportanceDraw {
  Ensemble proposals;
  Vector log_weights;  // unnormalized, includes the incoming weights
  Vector weights;      // normalized
};

template <ImportanceStep M>
ImportanceDraw bootstrap_weights(const M& step, const WeightedEnsemble& prev, const SamplerConfig& cfg) {
  const auto& e = prev.ensemble;
  require(e.dim() == step.prev_dim(), "bootstrap_smc_update: ensemble dimension does not match model");
  require(prev.weights.size() == e.size(), "bootstrap_smc_update: one weight per particle");
  const auto S = e.size();
  Matrix out(step.prev_dim() + step.block_dim(), S);
  Vector logw(S);
  for (Eigen::Index s = 0; s < S; ++s) {
    auto rng = Rng::stream(cfg.seed, {static_cast<std::uint64_t>(step.time()),
                                      static_cast<std::uint64_t>(Purpose::jump), static_cast<std::uint64_t>(s)});
    const auto old = e.member(s);
    const Vector block = step.jump(old, rng);
    out.col(s).head(step.prev_dim()) = old;
    out.col(s).tail(step.block_dim()) = block;
    logw(s) = std::log(prev.weights(s)) + step.log_batch_likelihood(old, block) + step.log_block_prior(old, block) -
              step.log_jump_density(old, block);
  }
  const double top = logw.maxCoeff();
  if (!std::isfinite(top)) throw DegenerateWeights("bootstrap_smc_update: all importance weights are zero");
  Vector w = (logw.array() - top).exp().matrix();
  w /= w.sum();
  return {Ensemble(step.time(), std::move(out)), std::move(logw), std::move(w)};
}

/// Multinomial resampling indices from normalized weights.
std::vector<Eigen::Index> multinomial_resample(const Vector& weights, Eigen::Index count, Rng& rng);

template <ImportanceStep M>
WeightedEnsemble bootstrap_smc_update(const M& step, const WeightedEnsemble& prev, const SamplerConfig& cfg) {
  auto draw = bootstrap_weights(step, prev, cfg);
  auto rng = Rng::stream(cfg.seed, {static_cast<std::uint64_t>(step.time()),
                                    static_cast<std::uint64_t>(Purpose::resample)});
  const auto S = draw.proposals.size();
  const auto idx = multinomial_resample(draw.weights, S, rng);
  Matrix out(draw.proposals.dim(), S);
  for (Eigen::Index s = 0; s < S; ++s) out.col(s) = draw.proposals.member(idx[static_cast<std::size_t>(s)]);
  return WeightedEnsemble::uniform(Ensemble(step.time(), std::move(out)));
}

}  // namespace streamfilter

#endif  // STREAMFILTER_SAMPLERS_HPP_
