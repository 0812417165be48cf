#ifndef STREAMFILTER_SSM_STEP_HPP_
#define STREAMFILTER_SSM_STEP_HPP_

// The Gaussian state-space model seen by the generic samplers at time t.

#include <optional>
#include <vector>

#include "streamfilter/samplers.hpp"
#include "streamfilter/ssm_model.hpp"

namespace streamfilter::ssm {

class SsmStep {
 public:
  /// `stats` holds batches 1..t. The transition kernel is random-walk
  /// Metropolis with covariance 2.4^2 Sigma / t, Sigma the exact posterior
  /// covariance, unless a proposal is supplied.
  SsmStep(std::vector<SufficientStats> stats, const HyperParams& hyper,
          std::optional<RwProposal> proposal = std::nullopt);

  int time() const { return static_cast<int>(stats_.size()); }
  Eigen::Index dim() const { return time(); }
  Eigen::Index prev_dim() const { return time() - 1; }
  Eigen::Index block_dim() const { return 1; }
  const HyperParams& hyper() const { return hyper_; }
  const std::vector<SufficientStats>& stats() const { return stats_; }
  const RwProposal& proposal() const { return proposal_; }

  Vector draw_block_prior(VectorCRef prev, Rng& rng) const;
  double log_block_prior(VectorCRef prev, VectorCRef block) const;
  double log_batch_likelihood(VectorCRef prev, VectorCRef block) const;
  Vector draw_block_conditional(VectorCRef prev, VectorCRef block, Rng& rng) const;
  /// Draw from the full conditional of theta_t given theta_{t-1} and y_t.
  Vector jump(VectorCRef prev, Rng& rng) const;
  double log_jump_density(VectorCRef prev, VectorCRef block) const;
  void transition(VectorRef state, Rng& rng) const;

  void gibbs_sweep(VectorRef state, Rng& rng) const;
  double log_posterior(VectorCRef state) const;

 private:
  double last(VectorCRef prev) const { return prev.size() ? prev(prev.size() - 1) : 0.0; }
  GaussianDist block_conditional(VectorCRef prev) const;

  std::vector<SufficientStats> stats_;
  HyperParams hyper_;
  RwProposal proposal_;
};

static_assert(StreamingStep<SsmStep>);
static_assert(ImportanceStep<SsmStep>);
static_assert(GibbsTarget<SsmStep>);

}  // namespace streamfilter::ssm

#endif  // STREAMFILTER_SSM_STEP_HPP_
