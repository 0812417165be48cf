#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "oracles.hpp"
#include "streamfilter/samplers.hpp"
#include "streamfilter/ssm_step.hpp"

using namespace streamfilter;
using namespace streamfilter::ssm;

namespace {

constexpr double kCritical = 0.055;

Ensemble exact_ensemble(const std::vector<SufficientStats>& st, const HyperParams& h, int S, std::uint64_t seed) {
  const auto dense = oracle::dense_ssm_posterior(st, h.sigma2, h.phi2);
  auto rng = Rng::stream(seed, {0xe1});
  return Ensemble(static_cast<int>(st.size()), oracle::mvn_draws(dense.mean, dense.covariance, S, rng));
}

double max_ks(const Ensemble& e, const std::vector<SufficientStats>& st, const HyperParams& h) {
  const auto dense = oracle::dense_ssm_posterior(st, h.sigma2, h.phi2);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < e.dim(); ++j) {
    const double m = dense.mean(j), v = dense.covariance(j, j);
    worst = std::max(worst, oracle::ks(e.coordinate(j), [&](double x) { return oracle::normal_cdf(x, m, v); }));
  }
  return worst;
}

std::vector<SufficientStats> upto(const Dataset& ds, int t) { return ds.stats(t); }

SamplerConfig config(std::uint64_t seed, int m) {
  SamplerConfig c;
  c.seed = seed;
  c.stopping = StoppingRule::fixed(m);
  return c;
}

/// Model whose new batch has zero likelihood everywhere.
struct NullLikelihood {
  int time() const { return 2; }
  Eigen::Index prev_dim() const { return 1; }
  Eigen::Index block_dim() const { return 1; }
  Vector draw_block_prior(VectorCRef, Rng& rng) const { return Vector::Constant(1, rng.normal()); }
  double log_block_prior(VectorCRef, VectorCRef) const { return 0.0; }
  double log_batch_likelihood(VectorCRef, VectorCRef) const { return -std::numeric_limits<double>::infinity(); }
  Vector draw_block_conditional(VectorCRef, VectorCRef b, Rng&) const { return b; }
  Vector jump(VectorCRef, Rng& rng) const { return Vector::Constant(1, rng.normal()); }
  double log_jump_density(VectorCRef, VectorCRef) const { return 0.0; }
  void transition(VectorRef, Rng&) const {}
};
static_assert(ImportanceStep<NullLikelihood>);

}  // namespace

TEST_CASE("sampler configuration checks") {
  SamplerConfig c;
  CHECK_NOTHROW(c.validate());
  c.burn_in = c.iters;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = SamplerConfig{};
  c.thin = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = SamplerConfig{};
  c.ensemble_size = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("gibbs at t = 1 samples the conjugate posterior") {
  const HyperParams h{1.0, 1.0};
  const std::vector<SufficientStats> st{sufficient_stats(std::vector<double>{1.0})};
  const SsmStep step(st, h);
  const auto e = gibbs_update(step, config(3, 0), Vector::Zero(1));
  CHECK(e.size() == 1000);
  CHECK(oracle::ks(e.coordinate(0), [](double x) { return oracle::normal_cdf(x, 0.5, 0.5); }) < kCritical);
}

TEST_CASE("gibbs bookkeeping: iters = burn_in + S * thin fills exactly S draws") {
  const HyperParams h{1.0, 1.0};
  const auto ds = generate_data(3, 2, h, 1);
  const SsmStep step(upto(ds, 3), h);
  auto c = config(1, 0);
  c.thin = 7;
  c.burn_in = 13;
  c.iters = c.burn_in + 40 * c.thin;
  CHECK(c.retained() == 40);
  const auto e = gibbs_update(step, c, Vector::Zero(3));
  CHECK(e.size() == 40);
  CHECK(e.dim() == 3);
  CHECK_THROWS_AS(gibbs_update(step, c, Vector::Zero(2)), ContractViolation);
}

TEST_CASE("random-walk proposal construction") {
  Matrix bad(2, 2);
  bad << 1, 2, 2, 1;
  CHECK_THROWS_AS(RwProposal::from_covariance(bad), ContractViolation);
  Matrix asym(2, 2);
  asym << 1, 0.1, 0.2, 1;
  CHECK_THROWS_AS(RwProposal::from_covariance(asym), ContractViolation);
  Matrix cov(2, 2);
  cov << 2, 0.5, 0.5, 1;
  const auto p = RwProposal::adaptive(cov);
  CHECK((p.covariance() - (2.4 * 2.4 / 2.0) * cov).cwiseAbs().maxCoeff() < 1e-14);

  // Empirical covariance of increments.
  auto rng = Rng::stream(4, {});
  Matrix draws(2, 100000);
  for (Eigen::Index s = 0; s < draws.cols(); ++s) draws.col(s) = p.draw_increment(rng);
  // Five standard errors of a sample variance at the largest entry.
  const double tol = 5.0 * std::sqrt(2.0 / 100000) * p.covariance().cwiseAbs().maxCoeff();
  CHECK((ensemble_covariance(draws, 0.0) - p.covariance()).cwiseAbs().maxCoeff() < tol);
}

TEST_CASE("vanishing random-walk steps are almost always accepted") {
  const HyperParams h{1.0, 1.0};
  const auto ds = generate_data(4, 2, h, 5);
  const auto st = upto(ds, 4);
  const auto prop = RwProposal::from_covariance(1e-12 * Matrix::Identity(4, 4));
  const ExactPosterior exact(st, h);
  Vector x = exact.mean();
  auto rng = Rng::stream(6, {});
  int moved = 0;
  for (int i = 0; i < 10000; ++i)
    moved += rw_transition_sweep(x, prop, [&](const Vector& v) { return log_joint(st, h, v); }, rng);
  CHECK(moved / 10000.0 > 0.999);
}

TEST_CASE("a long random-walk chain targets the exact posterior") {
  const HyperParams h{1.0, 1.0};
  const auto ds = generate_data(2, 3, h, 12);
  const auto st = upto(ds, 2);
  const SsmStep step(st, h);
  Vector x = Vector::Zero(2);
  auto rng = Rng::stream(13, {});
  Matrix kept(2, 2000);
  for (int i = 0; i < 1000; ++i) step.transition(x, rng);
  for (int s = 0; s < 2000; ++s) {
    for (int k = 0; k < 50; ++k) step.transition(x, rng);
    kept.col(s) = x;
  }
  CHECK(max_ks(Ensemble(2, kept), st, h) < kCritical);
}

TEST_CASE("transition sweeps started at exact draws stay at the posterior") {
  const HyperParams h{1.0, 1.0};
  const auto ds = generate_data(5, 5, h, 14);
  const auto st = upto(ds, 5);
  const SsmStep step(st, h);
  const auto start = exact_ensemble(st, h, 1000, 15);
  CHECK(max_ks(start, st, h) < kCritical);
  for (int m : {1, 10, 40}) {
    const auto out = run_transition_phase(step, start, StoppingRule::fixed(m), 16, 0);
    CHECK(out.steps == m);
    CHECK(!out.capped);
    CHECK(max_ks(out.ensemble, st, h) < kCritical);
  }
}

TEST_CASE("pprb-within-gibbs accepts a proposal equal to the current member") {
  const HyperParams h{1.0, 1.0};
  const auto ds = generate_data(2, 3, h, 17);
  const SsmStep step(upto(ds, 2), h);
  const Ensemble same(1, Matrix::Constant(1, 2, 0.3));
  PprbStats stats;
  const auto out = pprb_within_gibbs_update(step, same, config(18, 0), &stats);
  CHECK(stats.proposals == 1100);
  CHECK(stats.accepted == stats.proposals);
  CHECK(out.size() == 1000);
  CHECK_THROWS_AS(pprb_within_gibbs_update(step, Ensemble(1, Matrix::Zero(2, 3)), config(18, 0)), ContractViolation);
}

TEST_CASE("pprb-within-gibbs with an empty batch keeps the old marginal") {
  const HyperParams h{1.0, 1.0};
  const auto ds = generate_data(1, 3, h, 19);
  auto st = upto(ds, 1);
  const auto prev = exact_ensemble(st, h, 1000, 20);
  st.push_back(sufficient_stats(std::vector<double>{}));
  const SsmStep step(st, h);
  auto c = config(21, 0);
  c.thin = 20;
  c.iters = c.burn_in + 1000 * c.thin;
  const auto out = pprb_within_gibbs_update(step, prev, c);
  CHECK(ks_two_sample(out.coordinate(0), prev.coordinate(0)) < kCritical);
}

TEST_CASE("pprb-within-gibbs targets the likelihood-reweighted ensemble") {
  const HyperParams h{1.0, 1.0};
  const auto ds = generate_data(2, 5, h, 22);
  const auto st1 = upto(ds, 1);
  const auto st2 = upto(ds, 2);
  const int S = 1000;
  const auto prev = exact_ensemble(st1, h, S, 23);
  const auto& y2 = ds.batches[1].values;

  const SsmStep step(st2, h);
  auto c = config(24, 0);
  c.thin = 50;
  c.iters = c.burn_in + S * c.thin;
  const auto out = pprb_within_gibbs_update(step, prev, c);
  CHECK(oracle::pprb_target_ks(prev.coordinate(0), y2, h.sigma2, h.phi2, out.coordinate(0), out.coordinate(1)) <
        kCritical);
}

TEST_CASE("zero transition steps return the first stage unchanged") {
  const HyperParams h{1.0, 1.0};
  const auto ds = generate_data(3, 2, h, 25);
  const auto prev = exact_ensemble(upto(ds, 2), h, 200, 26);
  const SsmStep step(upto(ds, 3), h);
  auto c = config(27, 0);
  c.ensemble_size = 200;
  c.iters = 300;
  const auto smcmc = smcmc_update(step, prev, c);
  CHECK(smcmc.steps == 0);
  CHECK(smcmc.ensemble.members() == jump_ensemble(step, prev, c).members());
  const auto gf = generative_filtering_update(step, prev, c);
  CHECK(gf.steps == 0);
  CHECK(gf.ensemble.members() == pprb_within_gibbs_update(step, prev, c).members());
  CHECK(smcmc.ensemble.size() == 200);
  CHECK(smcmc.ensemble.members().topRows(2) == prev.members());
}

TEST_CASE("smcmc and generative filtering reach the exact posterior at t = 2") {
  const HyperParams h{1.0, 1.0};
  const auto ds = generate_data(2, 5, h, 28);
  const auto prev = exact_ensemble(upto(ds, 1), h, 1000, 29);
  const SsmStep step(upto(ds, 2), h);
  const auto smcmc = smcmc_update(step, prev, config(30, 200));
  CHECK(smcmc.ensemble.size() == 1000);
  CHECK(max_ks(smcmc.ensemble, upto(ds, 2), h) < kCritical);
  const auto gf = generative_filtering_update(step, prev, config(31, 30));
  CHECK(gf.ensemble.size() == 1000);
  CHECK(max_ks(gf.ensemble, upto(ds, 2), h) < kCritical);
}

TEST_CASE("parallel chains do not depend on the thread count") {
  const HyperParams h{1.0, 1.0};
  const auto ds = generate_data(6, 2, h, 32);
  const auto prev = exact_ensemble(upto(ds, 5), h, 300, 33);
  const SsmStep step(upto(ds, 6), h);
  auto c = config(34, 7);
  c.ensemble_size = 300;
  c.iters = 400;
  std::vector<Matrix> smcmc, gf;
  for (int threads : {1, 2, 5}) {
    c.threads = threads;
    smcmc.push_back(smcmc_update(step, prev, c).ensemble.members());
    gf.push_back(generative_filtering_update(step, prev, c).ensemble.members());
  }
  CHECK(smcmc[0] == smcmc[1]);
  CHECK(smcmc[0] == smcmc[2]);
  CHECK(gf[0] == gf[1]);
  CHECK(gf[0] == gf[2]);
}

TEST_CASE("bootstrap weights") {
  const HyperParams h{1.0, 1.0};
  const auto ds = generate_data(2, 4, h, 35);
  auto st = upto(ds, 1);
  const auto prev = WeightedEnsemble::uniform(exact_ensemble(st, h, 500, 36));
  const auto informative = bootstrap_weights(SsmStep(upto(ds, 2), h), prev, config(37, 0));
  CHECK(std::abs(informative.weights.sum() - 1.0) < 1e-12);
  CHECK(informative.weights.minCoeff() >= 0.0);

  st.push_back(sufficient_stats(std::vector<double>{}));
  const auto flat = bootstrap_weights(SsmStep(st, h), prev, config(37, 0));
  CHECK((flat.weights.array() - 1.0 / 500).abs().maxCoeff() < 1e-12);

  auto rng = Rng::stream(38, {});
  std::vector<int> counts(4, 0);
  const auto idx = multinomial_resample(Vector::Constant(4, 0.25), 40000, rng);
  for (auto i : idx) ++counts[static_cast<std::size_t>(i)];
  for (int k : counts) CHECK(std::abs(k - 10000) < 500);

  const WeightedEnsemble tiny = WeightedEnsemble::uniform(Ensemble(1, Matrix::Zero(1, 3)));
  CHECK_THROWS_AS(bootstrap_smc_update(NullLikelihood{}, tiny, config(39, 0)), DegenerateWeights);
}

TEST_CASE("bootstrap filter with many particles matches the exact posterior") {
  const HyperParams h{1.0, 1.0};
  const auto ds = generate_data(2, 5, h, 40);
  const int S = 100000;
  const auto prev = WeightedEnsemble::uniform(exact_ensemble(upto(ds, 1), h, S, 41));
  auto c = config(42, 0);
  c.ensemble_size = S;
  const auto out = bootstrap_smc_update(SsmStep(upto(ds, 2), h), prev, c);
  CHECK(out.ensemble.size() == S);
  CHECK(std::abs(out.weights.sum() - 1.0) < 1e-12);
  CHECK(max_ks(out.ensemble, upto(ds, 2), h) < 0.02);
}

TEST_CASE("filtering loses unique values and generative filtering restores them") {
  const HyperParams h{1.0, 1.0};
  const int horizon = 12, reps = 10;
  std::vector<double> pprb_mean(horizon - 1, 0.0), gf_mean(horizon - 1, 0.0);
  for (int r = 0; r < reps; ++r) {
    const auto ds = generate_data(horizon, 5, h, 100 + static_cast<std::uint64_t>(r));
    Ensemble pprb = exact_ensemble(upto(ds, 1), h, 1000, 200 + static_cast<std::uint64_t>(r));
    Ensemble gf = pprb;
    for (int t = 2; t <= horizon; ++t) {
      const SsmStep step(upto(ds, t), h);
      const auto c = config(300 + static_cast<std::uint64_t>(r), 5);
      pprb = pprb_within_gibbs_update(step, pprb, c);
      gf = generative_filtering_update(step, gf, c).ensemble;
      pprb_mean[static_cast<std::size_t>(t - 2)] += unique_proportion(pprb.coordinate(0)) / reps;
      gf_mean[static_cast<std::size_t>(t - 2)] += unique_proportion(gf.coordinate(0)) / reps;
    }
  }
  const auto trend = mann_kendall(pprb_mean);
  CHECK(trend.s < 0);
  CHECK(trend.p_value < 0.05);
  for (int t = 5; t <= horizon; ++t)
    CHECK(gf_mean[static_cast<std::size_t>(t - 2)] > pprb_mean[static_cast<std::size_t>(t - 2)]);
}
