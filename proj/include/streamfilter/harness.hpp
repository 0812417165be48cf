#ifndef STREAMFILTER_HARNESS_HPP_
#define STREAMFILTER_HARNESS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "streamfilter/config.hpp"
#include "streamfilter/pups_model.hpp"
#include "streamfilter/table.hpp"

namespace streamfilter::harness {

/// Abstract time units for the simulated-core timing model.
struct CostModel {
  double filter_cost = 1.0;  // one PPRB-within-Gibbs iteration
  double kernel_cost = 1.0;  // one transition sweep, per coordinate
  double jump_cost = 1.0;    // one jumping-kernel draw, per member

  void validate() const;
};

struct ExperimentSpec {
  std::string experiment = "degradation";  // degradation | steps | timing | pups

  // State-space grid.
  std::vector<int> n_values = {1, 5, 10, 50};
  std::vector<double> sigma2_values = {0.25, 0.5, 1.0, 2.0, 4.0};
  double phi2 = 1.0;
  int horizon = 20;
  int replicates = 5;          // data sets per cell
  int chains_per_dataset = 5;  // sampler runs per data set
  std::vector<std::string> samplers = {"gibbs", "pprb_wg", "smc", "gf"};

  // Sampler settings.
  int ensemble_size = 1000;
  int iters = 1100;
  int burn_in = 100;
  int gf_steps = 5;     // fixed m_t in the degradation study
  int gibbs_thin = 5;   // fresh Gibbs ensembles in the steps study
  std::string stopping = "oracle";  // oracle | correlation
  double oracle_threshold = 0.055;
  double correlation_epsilon = 0.5;
  bool correlation_signed = false;
  int max_steps = 10000;

  // Timing model.
  std::vector<int> core_counts = {1, 8, 32, 1000};
  CostModel costs;

  // Pups pipeline.
  std::string data_file;  // empty or missing file: synthetic stand-in
  std::vector<std::string> sites = {"Marmot", "Sugarloaf", "Seal Rocks", "Atkins"};
  int first_year = 1978;
  int base_last_year = 2000;
  int final_year = 2016;
  int unique_year = 2001;
  double synthetic_observe_prob = 0.5;
  pups::PupsHyperParams pups_hyper;
  int pups_gibbs_burn_in = 1000;
  int pups_reference_thin = 10;
  int pups_pilot_iters = 1000;
  double pups_target_rate = 0.44;
  double pups_oracle_threshold = 0.1;

  std::uint64_t seed = 1;
  int threads = 0;

  void validate() const;
};

/// Fills a spec from config keys named like the fields above. Unknown keys
/// are rejected.
ExperimentSpec spec_from_config(const ConfigFile& config, const std::string& experiment);

/// One grid cell, two replicates, one run each, t <= 5 (pups: two sites,
/// three update years, small ensembles).
ExperimentSpec smoke_profile(ExperimentSpec spec);

/// Seed lineage: master -> cell -> data set -> run.
std::uint64_t dataset_seed(std::uint64_t master, int cell, int dataset);
std::uint64_t run_seed(std::uint64_t dataset_seed, int run);

/// Rows (sampler, n, sigma2, dataset, run, t, ks_theta1, unique_prop).
Table run_degradation(const ExperimentSpec& spec);

/// Rows (n, sigma2, dataset, run, t, method, steps, cumulative_steps, capped,
/// residual_ks). Both methods start each t from the same fresh Gibbs ensemble.
Table run_steps(const ExperimentSpec& spec);

/// Simulated time of one update.
double gf_update_time(const CostModel& c, int filter_iters, int S, int cores, int steps, long dim);
double smcmc_update_time(const CostModel& c, int S, int cores, int steps, long dim);
double gibbs_update_time(const CostModel& c, int iters, long dim);
double pprb_update_time(const CostModel& c, int filter_iters);

struct TimingResult {
  Table per_cores;   // (n, sigma2, cores, method, mean_cumulative_time)
  Table break_even;  // (scope, break_even_cores)
  /// Smallest C at which SMCMC's mean cumulative time is at most GF's in
  /// every cell; -1 if no C <= S qualifies.
  int break_even_cores = -1;
};

/// Timing model applied to a steps table.
TimingResult timing_from_steps(const Table& steps, const ExperimentSpec& spec);
/// run_steps followed by timing_from_steps.
TimingResult run_timing(const ExperimentSpec& spec, Table* steps_out = nullptr);

struct PupsResult {
  Table summary;  // (method, year, update, parameter, mean, q025, q975)
  Table unique;   // (method, year, update, site, unique_prop) for log lambda_{s, unique_year}
  Table steps;    // (method, year, update, steps, capped, residual_ks, acceptance)
  Table timing;   // (cores, method, cumulative_time)
  Table tuning;   // (site, year, proposal_variance, acceptance)
  bool synthetic = false;
};

PupsResult run_pups(const ExperimentSpec& spec);

/// Writes <dir>/<table name>.csv for each table.
void write_tables(const std::vector<const Table*>& tables, const std::string& dir);

}  // namespace streamfilter::harness

#endif  // STREAMFILTER_HARNESS_HPP_
