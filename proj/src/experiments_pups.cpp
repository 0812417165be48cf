#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>

#include "streamfilter/diagnostics.hpp"
#include "streamfilter/harness.hpp"

namespace streamfilter::harness {

namespace {

/// Linear-interpolation sample quantile (R type 7).
double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

void summarize(Table& table, const char* method, int year, int update, const std::string& parameter,
               const std::vector<double>& values) {
  double mean = 0.0;
  for (double x : values) mean += x;
  mean /= static_cast<double>(values.size());
  table.add_row({method, cell(year), cell(update), parameter, cell(mean), cell(quantile(values, 0.025)),
                 cell(quantile(values, 0.975))});
}

}  // namespace

PupsResult run_pups(const ExperimentSpec& spec) {
  spec.validate();
  PupsResult out{Table("pups_summary", {"method", "year", "update", "parameter", "mean", "q025", "q975"}),
                 Table("pups_unique", {"method", "year", "update", "site", "unique_prop"}),
                 Table("pups_steps", {"method", "year", "update", "steps", "capped", "residual_ks", "acceptance"}),
                 Table("pups_timing", {"cores", "method", "cumulative_time"}),
                 Table("pups_tuning", {"site", "year", "proposal_variance", "acceptance"}), false};

  pups::PupsData data;
  if (!spec.data_file.empty() && std::filesystem::exists(spec.data_file)) {
    std::ifstream in(spec.data_file);
    pups::IngestReport report;
    data = pups::ingest_counts(in, spec.sites, &report);
    out.summary.note("data", spec.data_file);
    out.summary.note("rejected_rows", std::to_string(report.rejected.size()));
    if (data.num_sites() == 0) throw ConfigError("pups: no rows for the configured sites in " + spec.data_file);
  } else {
    pups::SyntheticPups truth;
    truth.first_year = spec.first_year;
    truth.last_year = spec.final_year;
    truth.observe_prob = spec.synthetic_observe_prob;
    const auto K = std::min(truth.sites.size(), spec.sites.size());
    truth.sites = spec.sites;
    truth.sites.resize(K);
    truth.phi.resize(K);
    truth.sigma2.resize(K);
    truth.log_lambda_1.resize(K);
    data = pups::generate_pups_data(truth, derive_key(spec.seed, 0x5eed));
    out.synthetic = true;
    out.summary.note("data", "synthetic");
  }
  data = data.restrict_years(spec.first_year, spec.final_year);
  for (auto* t : {&out.summary, &out.unique, &out.steps, &out.timing, &out.tuning}) {
    t->note("experiment", "pups");
    t->note("master_seed", std::to_string(spec.seed));
  }

  pups::PupsRunConfig cfg;
  cfg.base_last_year = spec.base_last_year;
  cfg.final_year = spec.final_year;
  cfg.ensemble_size = spec.ensemble_size;
  cfg.gibbs_burn_in = spec.pups_gibbs_burn_in;
  cfg.reference_thin = spec.pups_reference_thin;
  cfg.filter_iters = spec.iters;
  cfg.filter_burn_in = spec.burn_in;
  cfg.pilot_iters = spec.pups_pilot_iters;
  cfg.target_rate = spec.pups_target_rate;
  cfg.oracle_threshold = spec.pups_oracle_threshold;
  cfg.max_steps = spec.max_steps;
  cfg.seed = spec.seed;
  cfg.threads = spec.threads;

  const int unique_t = spec.unique_year - data.first_year + 1;
  const auto& sites = data.sites;
  const int K = data.num_sites();
  const int last_update = spec.final_year - spec.base_last_year;
  std::map<std::string, std::map<int, double>> cumulative;

  auto on_update = [&](const pups::PupsUpdate& u) {
    const auto* name = pups::method_name(u.method);
    const int T = u.year - data.first_year + 1;
    const pups::Layout layout{K, T};
    const auto& e = *u.ensemble;
    for (int s = 0; s < K; ++s) {
      const auto& site = sites[static_cast<std::size_t>(s)];
      summarize(out.summary, name, u.year, u.update, "phi[" + site + "]", e.coordinate(layout.phi(s)));
      if (unique_t <= T)
        out.unique.add_row({name, cell(u.year), cell(u.update), site,
                            cell(unique_proportion(e.coordinate(layout.log_lambda(s, unique_t))))});
      if (u.update == last_update) {
        summarize(out.summary, name, u.year, u.update, "sigma2[" + site + "]", e.coordinate(layout.sigma2(s)));
        for (int t = 1; t <= T; ++t)
          summarize(out.summary, name, u.year, u.update,
                    "log_lambda[" + site + "," + std::to_string(data.first_year + t - 1) + "]",
                    e.coordinate(layout.log_lambda(s, t)));
      }
    }
    out.steps.add_row({name, cell(u.year), cell(u.update), cell(u.steps), cell(u.capped), cell(u.residual),
                       cell(u.acceptance)});
    if (u.update == 0) return;
    for (int c : spec.core_counts) {
      const long dim = layout.dim();
      double time = 0.0;
      switch (u.method) {
        case pups::Method::gibbs:
          time = gibbs_update_time(spec.costs, cfg.gibbs_burn_in + cfg.ensemble_size * cfg.reference_thin, dim);
          break;
        case pups::Method::pprb_wg: time = pprb_update_time(spec.costs, cfg.filter_iters); break;
        case pups::Method::smcmc:
          time = smcmc_update_time(spec.costs, cfg.ensemble_size, c, u.steps, dim);
          break;
        case pups::Method::gf:
          time = gf_update_time(spec.costs, cfg.filter_iters, cfg.ensemble_size, c, u.steps, dim);
          break;
      }
      cumulative[name][c] += time;
    }
  };

  pups::TunedProposal tuned;
  pups::pups_streaming_updates(data, spec.pups_hyper, cfg, on_update, &tuned);

  for (int c : spec.core_counts)
    for (const char* name : {"gibbs", "pprb_wg", "smcmc", "gf"})
      out.timing.add_row({cell(c), name, cell(cumulative[name][c])});
  out.tuning.note("tuning_warning", tuned.warning ? tuned.message : "none");
  for (int s = 0; s < tuned.K; ++s)
    for (int t = 1; t <= tuned.years(); ++t)
      out.tuning.add_row({sites[static_cast<std::size_t>(s)], cell(data.first_year + t - 1), cell(tuned.at(s, t)),
                          cell(tuned.rate[static_cast<std::size_t>(s)][static_cast<std::size_t>(t - 1)])});
  return out;
}

}  // namespace streamfilter::harness
