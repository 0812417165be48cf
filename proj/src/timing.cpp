#include <cmath>
#include <map>

#include "streamfilter/format.hpp"
#include "streamfilter/harness.hpp"

namespace streamfilter::harness {

namespace {

double batches(int S, int cores) { return std::ceil(static_cast<double>(S) / static_cast<double>(cores)); }

}  // namespace

double gf_update_time(const CostModel& c, int filter_iters, int S, int cores, int steps, long dim) {
  return filter_iters * c.filter_cost + batches(S, cores) * steps * c.kernel_cost * static_cast<double>(dim);
}

double smcmc_update_time(const CostModel& c, int S, int cores, int steps, long dim) {
  return batches(S, cores) * (c.jump_cost + steps * c.kernel_cost * static_cast<double>(dim));
}

double gibbs_update_time(const CostModel& c, int iters, long dim) {
  return iters * c.kernel_cost * static_cast<double>(dim);
}

double pprb_update_time(const CostModel& c, int filter_iters) { return filter_iters * c.filter_cost; }

TimingResult timing_from_steps(const Table& steps, const ExperimentSpec& spec) {
  spec.costs.validate();
  const auto n = steps.column("n");
  const auto sigma2 = steps.column("sigma2");
  const auto dataset = steps.column("dataset");
  const auto run = steps.column("run");
  const auto t = steps.column("t");
  const auto method = steps.column("method");
  const auto m = steps.column("steps");

  // Cumulative simulated time per (cell, run, method, cores).
  using CellKey = std::pair<std::string, std::string>;
  using RunKey = std::tuple<CellKey, std::string, std::string>;
  std::map<CellKey, std::map<RunKey, std::map<std::string, std::map<int, double>>>> totals;

  std::vector<int> cores = spec.core_counts;
  // The break-even search needs every C up to S.
  std::vector<int> search(static_cast<std::size_t>(spec.ensemble_size));
  for (int c = 1; c <= spec.ensemble_size; ++c) search[static_cast<std::size_t>(c - 1)] = c;

  for (std::size_t i = 0; i < steps.size(); ++i) {
    const CellKey ck{n[i], sigma2[i]};
    const RunKey rk{ck, dataset[i], run[i]};
    const long dim = *parse_int(t[i]);
    const int k = static_cast<int>(*parse_int(m[i]));
    auto& slot = totals[ck][rk];
    for (int c : search) {
      if (method[i] == "gf") {
        slot["gf"][c] += gf_update_time(spec.costs, spec.iters, spec.ensemble_size, c, k, dim);
        slot["pprb_wg"][c] += pprb_update_time(spec.costs, spec.iters);
        slot["gibbs"][c] += gibbs_update_time(spec.costs, spec.iters, dim);
      } else {
        slot["smcmc"][c] += smcmc_update_time(spec.costs, spec.ensemble_size, c, k, dim);
      }
    }
  }

  TimingResult out{Table("timing", {"n", "sigma2", "cores", "method", "mean_cumulative_time"}),
                   Table("timing_break_even", {"scope", "break_even_cores"}), -1};
  out.per_cores.note("experiment", spec.experiment);
  out.per_cores.note("costs", "filter=" + format_real(spec.costs.filter_cost) + ";kernel=" +
                                  format_real(spec.costs.kernel_cost) + ";jump=" + format_real(spec.costs.jump_cost));

  auto mean_over_runs = [](const auto& runs, const std::string& method_name, int c) {
    double acc = 0.0;
    for (const auto& [rk, per_method] : runs) acc += per_method.at(method_name).at(c);
    return acc / static_cast<double>(runs.size());
  };

  int overall = 0;
  bool overall_found = true;
  for (const auto& [ck, runs] : totals) {
    for (int c : cores) {
      const int cc = std::min(c, spec.ensemble_size);
      for (const char* name : {"gibbs", "pprb_wg", "smcmc", "gf"})
        out.per_cores.add_row({ck.first, ck.second, cell(c), name, cell(mean_over_runs(runs, name, cc))});
    }
    int cell_break = -1;
    for (int c : search)
      if (mean_over_runs(runs, "smcmc", c) <= mean_over_runs(runs, "gf", c)) {
        cell_break = c;
        break;
      }
    out.break_even.add_row({"n=" + ck.first + ";sigma2=" + ck.second, cell(cell_break)});
    if (cell_break < 0) overall_found = false;
    else overall = std::max(overall, cell_break);
  }
  out.break_even_cores = overall_found && !totals.empty() ? overall : -1;
  out.break_even.add_row({"all", cell(out.break_even_cores)});
  return out;
}

TimingResult run_timing(const ExperimentSpec& spec, Table* steps_out) {
  auto steps = run_steps(spec);
  auto result = timing_from_steps(steps, spec);
  if (steps_out) *steps_out = std::move(steps);
  return result;
}

}  // namespace streamfilter::harness
