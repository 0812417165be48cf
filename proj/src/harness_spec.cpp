#include <filesystem>
#include <fstream>

#include "streamfilter/harness.hpp"
#include "streamfilter/rng.hpp"

namespace streamfilter::harness {

void CostModel::validate() const {
  if (!(filter_cost > 0 && kernel_cost > 0 && jump_cost > 0)) throw ConfigError("cost model: costs must be > 0");
}

void ExperimentSpec::validate() const {
  if (experiment != "degradation" && experiment != "steps" && experiment != "timing" && experiment != "pups")
    throw ConfigError("unknown experiment " + experiment);
  if (n_values.empty() || sigma2_values.empty()) throw ConfigError("grid: n_values and sigma2_values must be non-empty");
  for (int n : n_values)
    if (n < 1) throw ConfigError("grid: n values must be >= 1");
  for (double s : sigma2_values)
    if (!(s > 0)) throw ConfigError("grid: sigma2 values must be > 0");
  if (!(phi2 > 0)) throw ConfigError("phi2 must be > 0");
  if (horizon < 2) throw ConfigError("horizon must be >= 2");
  if (replicates < 1 || chains_per_dataset < 1) throw ConfigError("replicates and chains_per_dataset must be >= 1");
  for (const auto& s : samplers)
    if (s != "gibbs" && s != "pprb_wg" && s != "smc" && s != "gf") throw ConfigError("unknown sampler " + s);
  if (ensemble_size < 2) throw ConfigError("ensemble_size must be >= 2");
  if (burn_in < 0 || iters - burn_in < ensemble_size)
    throw ConfigError("iters - burn_in must be at least ensemble_size");
  if (gf_steps < 0 || gibbs_thin < 1 || max_steps < 1) throw ConfigError("gf_steps, gibbs_thin or max_steps out of range");
  if (stopping != "oracle" && stopping != "correlation") throw ConfigError("stopping must be oracle or correlation");
  if (!(oracle_threshold > 0)) throw ConfigError("oracle_threshold must be > 0");
  if (!(correlation_epsilon >= 0 && correlation_epsilon <= 1)) throw ConfigError("correlation_epsilon must lie in [0, 1]");
  if (core_counts.empty()) throw ConfigError("core_counts must be non-empty");
  for (int c : core_counts)
    if (c < 1) throw ConfigError("core counts must be >= 1");
  costs.validate();
  pups_hyper.validate();
  if (!(first_year <= base_last_year && base_last_year <= final_year))
    throw ConfigError("pups years must satisfy first_year <= base_last_year <= final_year");
  if (!(synthetic_observe_prob > 0 && synthetic_observe_prob <= 1))
    throw ConfigError("synthetic_observe_prob must lie in (0, 1]");
}

ExperimentSpec spec_from_config(const ConfigFile& c, const std::string& experiment) {
  c.reject_unknown({"n_values", "sigma2_values", "phi2", "horizon", "replicates", "chains_per_dataset", "samplers",
                    "ensemble_size", "iters", "burn_in", "gf_steps", "gibbs_thin", "stopping", "oracle_threshold",
                    "correlation_epsilon", "correlation_signed", "max_steps", "core_counts", "filter_cost",
                    "kernel_cost", "jump_cost", "data_file", "sites", "first_year", "base_last_year", "final_year",
                    "unique_year", "synthetic_observe_prob", "mu1", "sigma2_1", "sigma2_phi", "alpha", "beta",
                    "pups_gibbs_burn_in", "pups_reference_thin", "pups_pilot_iters", "pups_target_rate",
                    "pups_oracle_threshold", "seed", "threads"});
  ExperimentSpec s;
  s.experiment = experiment;
  auto to_int = [](std::int64_t v) { return static_cast<int>(v); };
  if (auto v = c.integers("n_values")) {
    s.n_values.clear();
    for (auto x : *v) s.n_values.push_back(to_int(x));
  }
  if (auto v = c.reals("sigma2_values")) s.sigma2_values = *v;
  if (auto v = c.real("phi2")) s.phi2 = *v;
  if (auto v = c.integer("horizon")) s.horizon = to_int(*v);
  if (auto v = c.integer("replicates")) s.replicates = to_int(*v);
  if (auto v = c.integer("chains_per_dataset")) s.chains_per_dataset = to_int(*v);
  if (auto v = c.texts("samplers")) s.samplers = *v;
  if (auto v = c.integer("ensemble_size")) s.ensemble_size = to_int(*v);
  if (auto v = c.integer("iters")) s.iters = to_int(*v);
  if (auto v = c.integer("burn_in")) s.burn_in = to_int(*v);
  if (auto v = c.integer("gf_steps")) s.gf_steps = to_int(*v);
  if (auto v = c.integer("gibbs_thin")) s.gibbs_thin = to_int(*v);
  if (auto v = c.text("stopping")) s.stopping = *v;
  if (auto v = c.real("oracle_threshold")) s.oracle_threshold = *v;
  if (auto v = c.real("correlation_epsilon")) s.correlation_epsilon = *v;
  if (auto v = c.boolean("correlation_signed")) s.correlation_signed = *v;
  if (auto v = c.integer("max_steps")) s.max_steps = to_int(*v);
  if (auto v = c.integers("core_counts")) {
    s.core_counts.clear();
    for (auto x : *v) s.core_counts.push_back(to_int(x));
  }
  if (auto v = c.real("filter_cost")) s.costs.filter_cost = *v;
  if (auto v = c.real("kernel_cost")) s.costs.kernel_cost = *v;
  if (auto v = c.real("jump_cost")) s.costs.jump_cost = *v;
  if (auto v = c.text("data_file")) s.data_file = *v;
  if (auto v = c.texts("sites")) s.sites = *v;
  if (auto v = c.integer("first_year")) s.first_year = to_int(*v);
  if (auto v = c.integer("base_last_year")) s.base_last_year = to_int(*v);
  if (auto v = c.integer("final_year")) s.final_year = to_int(*v);
  if (auto v = c.integer("unique_year")) s.unique_year = to_int(*v);
  if (auto v = c.real("synthetic_observe_prob")) s.synthetic_observe_prob = *v;
  if (auto v = c.real("mu1")) s.pups_hyper.mu1 = *v;
  if (auto v = c.real("sigma2_1")) s.pups_hyper.sigma2_1 = *v;
  if (auto v = c.real("sigma2_phi")) s.pups_hyper.sigma2_phi = *v;
  if (auto v = c.real("alpha")) s.pups_hyper.alpha = *v;
  if (auto v = c.real("beta")) s.pups_hyper.beta = *v;
  if (auto v = c.integer("pups_gibbs_burn_in")) s.pups_gibbs_burn_in = to_int(*v);
  if (auto v = c.integer("pups_reference_thin")) s.pups_reference_thin = to_int(*v);
  if (auto v = c.integer("pups_pilot_iters")) s.pups_pilot_iters = to_int(*v);
  if (auto v = c.real("pups_target_rate")) s.pups_target_rate = *v;
  if (auto v = c.real("pups_oracle_threshold")) s.pups_oracle_threshold = *v;
  if (auto v = c.unsigned_integer("seed")) s.seed = *v;
  if (auto v = c.integer("threads")) s.threads = to_int(*v);
  s.validate();
  return s;
}

ExperimentSpec smoke_profile(ExperimentSpec s) {
  s.n_values = {s.n_values.front()};
  s.sigma2_values = {s.sigma2_values.front()};
  s.replicates = 2;
  s.chains_per_dataset = 1;
  s.horizon = std::min(s.horizon, 5);
  s.ensemble_size = std::min(s.ensemble_size, 200);
  s.iters = s.burn_in + s.ensemble_size;
  s.max_steps = std::min(s.max_steps, 500);
  // Two sites, three update years, short chains.
  if (s.sites.size() > 2) s.sites.resize(2);
  s.final_year = std::min(s.final_year, s.base_last_year + 3);
  s.unique_year = std::min(s.unique_year, s.final_year);
  s.pups_gibbs_burn_in = std::min(s.pups_gibbs_burn_in, 200);
  s.pups_reference_thin = std::min(s.pups_reference_thin, 2);
  s.pups_pilot_iters = 500;
  s.validate();
  return s;
}

std::uint64_t dataset_seed(std::uint64_t master, int cell, int dataset) {
  return derive_key(derive_key(master, static_cast<std::uint64_t>(cell)), static_cast<std::uint64_t>(dataset));
}

std::uint64_t run_seed(std::uint64_t dataset_seed, int run) {
  return derive_key(dataset_seed, static_cast<std::uint64_t>(run) + 1000);
}

void write_tables(const std::vector<const Table*>& tables, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const auto* t : tables) {
    const auto path = std::filesystem::path(dir) / (t->name() + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    t->write(out);
  }
}

}  // namespace streamfilter::harness
