#include "streamfilter/ssm_step.hpp"

namespace streamfilter::ssm {

namespace {

RwProposal default_proposal(const std::vector<SufficientStats>& stats, const HyperParams& hyper) {
  return RwProposal::adaptive(ExactPosterior(stats, hyper).covariance());
}

}  // namespace

SsmStep::SsmStep(std::vector<SufficientStats> stats, const HyperParams& hyper, std::optional<RwProposal> proposal)
    : stats_(std::move(stats)),
      hyper_(hyper),
      proposal_(proposal ? std::move(*proposal) : default_proposal(stats_, hyper)) {
  hyper_.validate();
  require(!stats_.empty(), "SsmStep: need at least one batch");
  require(proposal_.dim() == dim(), "SsmStep: proposal dimension must equal t");
}

Vector SsmStep::draw_block_prior(VectorCRef prev, Rng& rng) const {
  return Vector::Constant(1, rng.normal(last(prev), std::sqrt(hyper_.phi2)));
}

double SsmStep::log_block_prior(VectorCRef prev, VectorCRef block) const {
  return normal_log_pdf(block(0), last(prev), hyper_.phi2);
}

double SsmStep::log_batch_likelihood(VectorCRef, VectorCRef block) const {
  return log_likelihood(stats_.back(), block(0), hyper_);
}

GaussianDist SsmStep::block_conditional(VectorCRef prev) const {
  return full_conditional_theta_t(last(prev), stats_.back(), hyper_);
}

Vector SsmStep::draw_block_conditional(VectorCRef prev, VectorCRef, Rng& rng) const {
  const auto c = block_conditional(prev);
  return Vector::Constant(1, rng.normal(c.mean, c.sd()));
}

Vector SsmStep::jump(VectorCRef prev, Rng& rng) const {
  const auto c = block_conditional(prev);
  return Vector::Constant(1, rng.normal(c.mean, c.sd()));
}

double SsmStep::log_jump_density(VectorCRef prev, VectorCRef block) const {
  return block_conditional(prev).log_pdf(block(0));
}

void SsmStep::transition(VectorRef state, Rng& rng) const {
  rw_transition_sweep(state, proposal_, [this](const Vector& x) { return log_posterior(x); }, rng);
}

void SsmStep::gibbs_sweep(VectorRef state, Rng& rng) const {
  const int T = time();
  require(state.size() == T, "SsmStep::gibbs_sweep: state has the wrong dimension");
  for (int ell = 1; ell <= T; ++ell) {
    const auto i = static_cast<Eigen::Index>(ell - 1);
    std::optional<double> left, right;
    if (ell > 1) left = state(i - 1);
    if (ell < T) right = state(i + 1);
    const auto c = full_conditional_theta_ell(ell, T, left, right, stats_[static_cast<std::size_t>(i)], hyper_);
    state(i) = rng.normal(c.mean, c.sd());
  }
}

double SsmStep::log_posterior(VectorCRef state) const { return log_joint(stats_, hyper_, state); }

}  // namespace streamfilter::ssm
