#include <map>

#include "streamfilter/diagnostics.hpp"
#include "streamfilter/harness.hpp"
#include "streamfilter/samplers.hpp"
#include "streamfilter/ssm_step.hpp"

namespace streamfilter::harness {

namespace {

struct Cell {
  int index;
  int n;
  double sigma2;
};

std::vector<Cell> grid(const ExperimentSpec& spec) {
  std::vector<Cell> cells;
  for (int n : spec.n_values)
    for (double s2 : spec.sigma2_values) cells.push_back({static_cast<int>(cells.size()), n, s2});
  return cells;
}

std::vector<ssm::SufficientStats> stats_upto(const std::vector<ssm::SufficientStats>& all, int t) {
  return {all.begin(), all.begin() + t};
}

/// Gibbs starting point: per-batch sample means.
Vector batch_means(const std::vector<ssm::SufficientStats>& stats) {
  Vector x(static_cast<Eigen::Index>(stats.size()));
  for (std::size_t i = 0; i < stats.size(); ++i)
    x(static_cast<Eigen::Index>(i)) = stats[i].n ? stats[i].sum_y / static_cast<double>(stats[i].n) : 0.0;
  return x;
}

SamplerConfig sampler_config(const ExperimentSpec& spec, std::uint64_t seed) {
  SamplerConfig c;
  c.ensemble_size = spec.ensemble_size;
  c.iters = spec.iters;
  c.burn_in = spec.burn_in;
  c.seed = seed;
  c.threads = spec.threads;
  return c;
}

/// Ensembles larger than S (when iters - burn_in > S) keep their first S members.
Ensemble first_members(const Ensemble& e, int S) {
  if (e.size() == S) return e;
  return Ensemble(e.time(), e.members().leftCols(S));
}

void add_lineage(Table& table, const ExperimentSpec& spec) {
  table.note("experiment", spec.experiment);
  table.note("master_seed", std::to_string(spec.seed));
  table.note("lineage", "dataset_seed=derive(derive(master,cell),dataset); run_seed=derive(dataset_seed,1000+run)");
}

}  // namespace

Table run_degradation(const ExperimentSpec& spec) {
  spec.validate();
  Table table("degradation_ks", {"sampler", "n", "sigma2", "dataset", "run", "t", "ks_theta1", "unique_prop"});
  add_lineage(table, spec);
  auto wants = [&](const char* name) {
    return std::find(spec.samplers.begin(), spec.samplers.end(), name) != spec.samplers.end();
  };
  const ssm::HyperParams base{1.0, spec.phi2};

  for (const auto& g : grid(spec)) {
    ssm::HyperParams hyper = base;
    hyper.sigma2 = g.sigma2;
    for (int d = 0; d < spec.replicates; ++d) {
      const auto dseed = dataset_seed(spec.seed, g.index, d);
      const auto data = ssm::generate_data(spec.horizon, g.n, hyper, dseed);
      const auto all = data.stats(spec.horizon);
      for (int r = 0; r < spec.chains_per_dataset; ++r) {
        const auto rseed = run_seed(dseed, r);
        auto cfg = sampler_config(spec, rseed);
        cfg.stopping = StoppingRule::fixed(spec.gf_steps);

        // t = 1: i.i.d. draws from the exact posterior.
        const auto first = ssm::ExactPosterior(stats_upto(all, 1), hyper).marginal(0);
        auto rng = Rng::stream(rseed, {1, static_cast<std::uint64_t>(Purpose::init)});
        Matrix init(1, spec.ensemble_size);
        for (int s = 0; s < spec.ensemble_size; ++s) init(0, s) = rng.normal(first.mean, first.sd());
        Ensemble pprb(1, init), gf(1, init);
        WeightedEnsemble smc = WeightedEnsemble::uniform(Ensemble(1, init));

        auto emit = [&](const char* sampler, int t, const Ensemble& e, const GaussianDist& truth) {
          const auto v = e.coordinate(0);
          table.add_row({sampler, cell(g.n), cell(g.sigma2), cell(d), cell(r), cell(t),
                         cell(ks_statistic(v, [&](double x) { return truth.cdf(x); })), cell(unique_proportion(v))});
        };

        for (int t = 2; t <= spec.horizon; ++t) {
          const auto stats = stats_upto(all, t);
          const ssm::SsmStep step(stats, hyper);
          const auto truth = ssm::ExactPosterior(stats, hyper).marginal(0);
          if (wants("gibbs")) emit("gibbs", t, first_members(gibbs_update(step, cfg, batch_means(stats)), spec.ensemble_size), truth);
          if (wants("pprb_wg")) {
            pprb = first_members(pprb_within_gibbs_update(step, pprb, cfg), spec.ensemble_size);
            emit("pprb_wg", t, pprb, truth);
          }
          if (wants("smc")) {
            smc = bootstrap_smc_update(step, smc, cfg);
            emit("smc", t, smc.ensemble, truth);
          }
          if (wants("gf")) {
            gf = generative_filtering_update(step, gf, cfg, [&](const ssm::SsmStep& m, const Ensemble& e,
                                                               const SamplerConfig& c) {
                   return first_members(pprb_within_gibbs_update(m, e, c), spec.ensemble_size);
                 }).ensemble;
            emit("gf", t, gf, truth);
          }
        }
      }
    }
  }
  return table;
}

Table run_steps(const ExperimentSpec& spec) {
  spec.validate();
  Table table("steps", {"n", "sigma2", "dataset", "run", "t", "method", "steps", "cumulative_steps", "capped",
                        "residual_ks"});
  add_lineage(table, spec);
  table.note("stopping", spec.stopping);
  const ssm::HyperParams base{1.0, spec.phi2};

  for (const auto& g : grid(spec)) {
    ssm::HyperParams hyper = base;
    hyper.sigma2 = g.sigma2;
    for (int d = 0; d < spec.replicates; ++d) {
      const auto dseed = dataset_seed(spec.seed, g.index, d);
      const auto data = ssm::generate_data(spec.horizon, g.n, hyper, dseed);
      const auto all = data.stats(spec.horizon);
      for (int r = 0; r < spec.chains_per_dataset; ++r) {
        const auto rseed = run_seed(dseed, r);
        std::map<std::string, int> cumulative;
        for (int t = 2; t <= spec.horizon; ++t) {
          // Fresh, thinned Gibbs ensemble for p(theta_{1:t-1} | y_{1:t-1}).
          const auto prev_stats = stats_upto(all, t - 1);
          auto gcfg = sampler_config(spec, rseed);
          gcfg.thin = spec.gibbs_thin;
          gcfg.iters = spec.burn_in + spec.ensemble_size * spec.gibbs_thin;
          const auto start = gibbs_update(ssm::SsmStep(prev_stats, hyper), gcfg, batch_means(prev_stats));

          const auto stats = stats_upto(all, t);
          const ssm::SsmStep step(stats, hyper);
          const ssm::ExactPosterior exact(stats, hyper);
          std::vector<MonitoredCoordinate> monitors;
          for (int j : {t - 1, t - 2}) {
            const auto m = exact.marginal(j);
            monitors.push_back(MonitoredCoordinate::against_cdf(j, [m](double x) { return m.cdf(x); }));
          }
          auto cfg = sampler_config(spec, rseed);
          if (spec.stopping == "oracle") cfg.stopping = StoppingRule::oracle(spec.oracle_threshold, monitors);
          else {
            cfg.stopping = StoppingRule::correlation(spec.correlation_epsilon, spec.correlation_signed);
            cfg.stopping.with_report(monitors);
          }
          cfg.stopping.with_max_steps(spec.max_steps);

          const auto smcmc = smcmc_update(step, start, cfg);
          const auto gf = generative_filtering_update(step, start, cfg, [&](const ssm::SsmStep& m, const Ensemble& e,
                                                                           const SamplerConfig& c) {
            return first_members(pprb_within_gibbs_update(m, e, c), spec.ensemble_size);
          });
          for (const auto& [name, out] : {std::pair<const char*, const TransitionOutcome*>{"smcmc", &smcmc},
                                          std::pair<const char*, const TransitionOutcome*>{"gf", &gf}}) {
            cumulative[name] += out->steps;
            table.add_row({cell(g.n), cell(g.sigma2), cell(d), cell(r), cell(t), name, cell(out->steps),
                           cell(cumulative[name]), cell(out->capped), cell(out->residual)});
          }
        }
      }
    }
  }
  return table;
}

}  // namespace streamfilter::harness
