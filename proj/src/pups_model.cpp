#include "streamfilter/pups_model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <random>

#include "streamfilter/format.hpp"

namespace streamfilter::pups {

namespace {

double poisson_log_pmf(std::int64_t y, double log_lambda) {
  const double yd = static_cast<double>(y);
  return yd * log_lambda - std::exp(log_lambda) - std::lgamma(yd + 1.0);
}

void check_site(const Layout& layout, int site) {
  require(site >= 0 && site < layout.K, "pups: site index out of range");
}

template <typename Variance, typename OnStep>
void sweep_impl(const Layout& layout, VectorRef state, const PupsData& data, const PupsHyperParams& hyper,
                Variance&& variance, Rng& rng, OnStep&& on_step) {
  for (int s = 0; s < layout.K; ++s) {
    const auto phi = phi_full_conditional(layout, state, s, hyper);
    state(layout.phi(s)) = rng.normal(phi.mean, phi.sd());
    state(layout.sigma2(s)) = sigma2_full_conditional(layout, state, s, hyper).draw(rng);
    for (int t = 1; t <= layout.T; ++t) {
      const bool accepted = log_lambda_mh_step(layout, state, s, t, variance(s, t), data, hyper, rng);
      on_step(s, t, accepted);
    }
  }
}

}  // namespace

void PupsHyperParams::validate() const {
  if (!(sigma2_1 > 0 && sigma2_phi > 0 && alpha > 0 && beta > 0) || !std::isfinite(mu1))
    throw ConfigError("pups hyperparameters: sigma2_1, sigma2_phi, alpha and beta must be > 0");
}

int PupsData::observations(int site) const {
  int n = 0;
  for (const auto& c : counts[static_cast<std::size_t>(site)]) n += c.has_value();
  return n;
}

PupsData PupsData::restrict_years(int first, int last) const {
  require(last >= first, "PupsData::restrict_years: empty range");
  PupsData out;
  out.sites = sites;
  out.first_year = first;
  const auto n = static_cast<std::size_t>(last - first + 1);
  out.counts.assign(sites.size(), std::vector<std::optional<std::int64_t>>(n));
  for (std::size_t s = 0; s < sites.size(); ++s)
    for (int y = std::max(first, first_year); y <= std::min(last, last_year()); ++y)
      out.counts[s][static_cast<std::size_t>(y - first)] = counts[s][static_cast<std::size_t>(y - first_year)];
  return out;
}

void PupsData::validate() const {
  if (counts.size() != sites.size()) throw ValidationError("pups data: one count row per site");
  for (const auto& row : counts) {
    if (row.size() != counts.front().size()) throw ValidationError("pups data: ragged year range");
    for (const auto& c : row)
      if (c && *c < 0) throw ValidationError("pups data: negative count");
  }
}

PupsData ingest_counts(std::istream& is, const std::vector<std::string>& allowed_sites, IngestReport* report) {
  struct Row {
    std::string site;
    int year;
    std::optional<std::int64_t> count;
  };
  std::vector<Row> rows;
  IngestReport local;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto parts = split(view, ',');
    if (parts.size() != 3) throw ParseError("expected 3 fields site,year,count", lineno);
    const std::string site(trim(parts[0]));
    if (rows.empty() && local.rows == 0 && site == "site") continue;
    ++local.rows;
    const auto year = parse_int(trim(parts[1]));
    if (!year) throw ParseError("malformed year", lineno);
    std::optional<std::int64_t> count;
    const auto count_text = trim(parts[2]);
    if (!count_text.empty()) {
      count = parse_int(count_text);
      if (!count) throw ParseError("malformed count", lineno);
      if (*count < 0) throw ValidationError("line " + std::to_string(lineno) + ": negative count");
    }
    if (!allowed_sites.empty() && std::find(allowed_sites.begin(), allowed_sites.end(), site) == allowed_sites.end()) {
      local.rejected.push_back("line " + std::to_string(lineno) + ": site " + site + " not configured");
      continue;
    }
    rows.push_back({site, static_cast<int>(*year), count});
  }
  local.kept = rows.size();
  if (report) *report = local;

  PupsData out;
  if (rows.empty()) return out;
  if (!allowed_sites.empty()) {
    for (const auto& s : allowed_sites)
      if (std::any_of(rows.begin(), rows.end(), [&](const Row& r) { return r.site == s; })) out.sites.push_back(s);
  } else {
    for (const auto& r : rows)
      if (std::find(out.sites.begin(), out.sites.end(), r.site) == out.sites.end()) out.sites.push_back(r.site);
  }
  int lo = rows.front().year, hi = rows.front().year;
  for (const auto& r : rows) {
    lo = std::min(lo, r.year);
    hi = std::max(hi, r.year);
  }
  out.first_year = lo;
  out.counts.assign(out.sites.size(), std::vector<std::optional<std::int64_t>>(static_cast<std::size_t>(hi - lo + 1)));
  std::map<std::pair<std::size_t, int>, bool> seen;
  for (const auto& r : rows) {
    const auto s = static_cast<std::size_t>(std::find(out.sites.begin(), out.sites.end(), r.site) - out.sites.begin());
    if (seen[{s, r.year}]) throw ValidationError("duplicate row for site " + r.site + " year " + std::to_string(r.year));
    seen[{s, r.year}] = true;
    out.counts[s][static_cast<std::size_t>(r.year - lo)] = r.count;
  }
  return out;
}

void write_counts(std::ostream& os, const PupsData& data) {
  os << "site,year,count\n";
  for (int s = 0; s < data.num_sites(); ++s)
    for (int t = 1; t <= data.num_years(); ++t) {
      os << data.sites[static_cast<std::size_t>(s)] << ',' << (data.first_year + t - 1) << ',';
      if (const auto& c = data.count(s, t)) os << *c;
      os << '\n';
    }
}

PupsData generate_pups_data(const SyntheticPups& truth, std::uint64_t seed) {
  const auto K = truth.sites.size();
  if (truth.phi.size() != K || truth.sigma2.size() != K || truth.log_lambda_1.size() != K)
    throw ConfigError("synthetic pups: one phi, sigma2 and initial log lambda per site");
  if (truth.last_year < truth.first_year) throw ConfigError("synthetic pups: empty year range");
  auto rng = Rng::stream(seed, {static_cast<std::uint64_t>(Purpose::data)});
  PupsData out;
  out.sites = truth.sites;
  out.first_year = truth.first_year;
  const int years = truth.last_year - truth.first_year + 1;
  out.counts.assign(K, std::vector<std::optional<std::int64_t>>(static_cast<std::size_t>(years)));
  for (std::size_t s = 0; s < K; ++s) {
    double x = truth.log_lambda_1[s];
    int observed = 0;
    for (int t = 0; t < years; ++t) {
      if (t > 0) x = rng.normal(x + truth.phi[s], std::sqrt(truth.sigma2[s]));
      std::poisson_distribution<std::int64_t> pois(std::exp(x));
      const auto y = pois(rng);
      const bool keep = rng.uniform() < truth.observe_prob || (t == years - 1 && observed == 0);
      if (keep) {
        out.counts[s][static_cast<std::size_t>(t)] = y;
        ++observed;
      }
    }
  }
  return out;
}

double InverseGamma::log_pdf(double x) const {
  if (!(x > 0)) return -std::numeric_limits<double>::infinity();
  return -(shape + 1.0) * std::log(x) - 1.0 / (scale * x) - std::lgamma(shape) - shape * std::log(scale);
}

GaussianDist phi_full_conditional(const Layout& layout, VectorCRef state, int site, const PupsHyperParams& hyper) {
  check_site(layout, site);
  require(layout.T >= 2, "phi_full_conditional: need T >= 2");
  const double s2 = state(layout.sigma2(site));
  const double a = (layout.T - 1) / s2 + 1.0 / hyper.sigma2_phi;
  const double b = (state(layout.log_lambda(site, layout.T)) - state(layout.log_lambda(site, 1))) / s2;
  return {b / a, 1.0 / a};
}

InverseGamma sigma2_full_conditional(const Layout& layout, VectorCRef state, int site, const PupsHyperParams& hyper) {
  check_site(layout, site);
  require(layout.T >= 2, "sigma2_full_conditional: need T >= 2");
  const double phi = state(layout.phi(site));
  double ss = 0.0;
  for (int t = 2; t <= layout.T; ++t) {
    const double r = state(layout.log_lambda(site, t)) - phi - state(layout.log_lambda(site, t - 1));
    ss += r * r;
  }
  return {(layout.T - 1) / 2.0 + hyper.alpha, 1.0 / (ss / 2.0 + 1.0 / hyper.beta)};
}

double log_lambda_conditional(const Layout& layout, VectorCRef state, int site, int t, double x, const PupsData& data,
                              const PupsHyperParams& hyper) {
  check_site(layout, site);
  require(t >= 1 && t <= layout.T, "log_lambda_conditional: year out of range");
  require(data.num_years() >= layout.T && data.num_sites() == layout.K, "log_lambda_conditional: data does not cover the layout");
  const double phi = state(layout.phi(site));
  const double s2 = state(layout.sigma2(site));
  double lp = 0.0;
  if (const auto& y = data.count(site, t)) lp += poisson_log_pmf(*y, x);
  if (t == 1) lp += normal_log_pdf(x, hyper.mu1, hyper.sigma2_1);
  else lp += normal_log_pdf(x, phi + state(layout.log_lambda(site, t - 1)), s2);
  if (t < layout.T) lp += normal_log_pdf(state(layout.log_lambda(site, t + 1)), phi + x, s2);
  return lp;
}

bool log_lambda_mh_step(const Layout& layout, VectorRef state, int site, int t, double proposal_variance,
                        const PupsData& data, const PupsHyperParams& hyper, Rng& rng) {
  require(proposal_variance > 0, "log_lambda_mh_step: proposal variance must be > 0");
  const auto i = layout.log_lambda(site, t);
  const double current = state(i);
  const double proposal = rng.normal(current, std::sqrt(proposal_variance));
  const double log_alpha = log_lambda_conditional(layout, state, site, t, proposal, data, hyper) -
                           log_lambda_conditional(layout, state, site, t, current, data, hyper);
  if (std::log(rng.uniform()) < log_alpha) {
    state(i) = proposal;
    return true;
  }
  return false;
}

AcceptanceCounter::AcceptanceCounter(const Layout& layout)
    : accepted(static_cast<std::size_t>(layout.K), std::vector<int>(static_cast<std::size_t>(layout.T), 0)) {}

void gibbs_sweep(const Layout& layout, VectorRef state, const PupsData& data, const PupsHyperParams& hyper,
                 const TunedProposal& tune, Rng& rng, AcceptanceCounter* counter) {
  require(state.size() == layout.dim(), "pups gibbs_sweep: state has the wrong dimension");
  require(tune.K == layout.K && tune.years() >= layout.T, "pups gibbs_sweep: proposals do not cover the layout");
  sweep_impl(layout, state, data, hyper, [&](int s, int t) { return tune.at(s, t); }, rng,
             [&](int s, int t, bool acc) {
               if (counter) counter->accepted[static_cast<std::size_t>(s)][static_cast<std::size_t>(t - 1)] += acc;
             });
  if (counter) ++counter->sweeps;
}

Vector initial_state(const PupsData& data, int T) {
  const int K = data.num_sites();
  require(T >= 1 && T <= data.num_years(), "pups initial_state: horizon out of range");
  const Layout layout{K, T};
  Vector x(layout.dim());
  for (int s = 0; s < K; ++s) {
    std::vector<std::pair<int, double>> known;
    for (int t = 1; t <= T; ++t)
      if (const auto& c = data.count(s, t)) known.emplace_back(t, std::log(static_cast<double>(*c) + 1.0));
    for (int t = 1; t <= T; ++t) {
      double v = PupsHyperParams{}.mu1;
      if (!known.empty()) {
        auto hi = std::lower_bound(known.begin(), known.end(), t, [](const auto& p, int v2) { return p.first < v2; });
        if (hi == known.end()) v = known.back().second;
        else if (hi->first == t || hi == known.begin()) v = hi->second;
        else {
          const auto lo = std::prev(hi);
          const double w = static_cast<double>(t - lo->first) / static_cast<double>(hi->first - lo->first);
          v = (1.0 - w) * lo->second + w * hi->second;
        }
      }
      x(layout.log_lambda(s, t)) = v;
    }
    double phi = 0.0, s2 = 0.1;
    if (T >= 2) {
      phi = (x(layout.log_lambda(s, T)) - x(layout.log_lambda(s, 1))) / (T - 1);
      double ss = 0.0;
      for (int t = 2; t <= T; ++t) {
        const double r = x(layout.log_lambda(s, t)) - x(layout.log_lambda(s, t - 1)) - phi;
        ss += r * r;
      }
      s2 = std::max(0.01, ss / std::max(1, T - 2));
    }
    x(layout.phi(s)) = phi;
    x(layout.sigma2(s)) = s2;
  }
  return x;
}

TunedProposal TunedProposal::extended_to(int T) const {
  require(years() >= 1, "TunedProposal::extended_to: nothing tuned");
  TunedProposal out = *this;
  for (auto& row : out.variance) row.resize(static_cast<std::size_t>(std::max(T, years())), row.back());
  for (auto& row : out.rate) {
    const double last = row.empty() ? 0.0 : row.back();
    row.resize(static_cast<std::size_t>(std::max(T, years())), last);
  }
  return out;
}

double TunedProposal::fraction_in_band(double lo, double hi) const {
  std::size_t in = 0, total = 0;
  for (const auto& row : rate)
    for (double r : row) {
      ++total;
      in += (r >= lo && r <= hi);
    }
  return total ? static_cast<double>(in) / static_cast<double>(total) : 0.0;
}

TunedProposal tune_proposals(const PupsData& data, int T, const PupsHyperParams& hyper, double target_rate,
                             int pilot_iters, std::uint64_t seed, const TunedProposal* fixed) {
  if (pilot_iters < 500) throw ConfigError("tune_proposals: pilot_iters must be >= 500");
  hyper.validate();
  require(T >= 2 && T <= data.num_years(), "tune_proposals: horizon out of range");
  const Layout layout{data.num_sites(), T};
  const auto K = static_cast<std::size_t>(layout.K);
  const auto Tz = static_cast<std::size_t>(T);
  std::vector<std::vector<double>> log_sd(K, std::vector<double>(Tz, std::log(0.1)));
  int first_free = 1;
  if (fixed) {
    require(fixed->K == layout.K, "tune_proposals: fixed proposals have the wrong number of sites");
    const auto start = fixed->extended_to(T);
    for (std::size_t s = 0; s < K; ++s)
      for (std::size_t t = 0; t < Tz; ++t) log_sd[s][t] = 0.5 * std::log(start.variance[s][t]);
    // The last fixed year gains a right neighbour, so it adapts again.
    first_free = std::max(1, fixed->years());
  }
  auto rng = Rng::stream(seed, {static_cast<std::uint64_t>(T), static_cast<std::uint64_t>(Purpose::tune)});
  Vector state = initial_state(data, T);

  const double lo_sd = std::log(1e-4), hi_sd = std::log(10.0);
  // Batch adaptation: every `batch` sweeps, move log sd by the batch
  // acceptance error with a decaying gain.
  constexpr int batch = 25;
  std::vector<std::vector<int>> hits(K, std::vector<int>(Tz, 0));
  int b = 0;
  for (int it = 1; it <= pilot_iters; ++it) {
    sweep_impl(
        layout, state, data, hyper,
        [&](int s, int t) { return std::exp(2.0 * log_sd[static_cast<std::size_t>(s)][static_cast<std::size_t>(t - 1)]); },
        rng,
        [&](int s, int t, bool acc) { hits[static_cast<std::size_t>(s)][static_cast<std::size_t>(t - 1)] += acc; });
    if (it % batch) continue;
    const double gain = 3.0 / std::sqrt(static_cast<double>(++b));
    for (std::size_t s = 0; s < K; ++s)
      for (std::size_t t = static_cast<std::size_t>(first_free - 1); t < Tz; ++t) {
        const double rate = static_cast<double>(hits[s][t]) / batch;
        log_sd[s][t] = std::clamp(log_sd[s][t] + gain * (rate - target_rate), lo_sd, hi_sd);
      }
    for (auto& row : hits) std::fill(row.begin(), row.end(), 0);
  }

  TunedProposal out;
  out.K = layout.K;
  out.variance.assign(K, std::vector<double>(Tz));
  for (std::size_t s = 0; s < K; ++s)
    for (std::size_t t = 0; t < Tz; ++t) out.variance[s][t] = std::exp(2.0 * log_sd[s][t]);

  const int measure = std::max(500, pilot_iters / 2);
  AcceptanceCounter counter(layout);
  for (int it = 0; it < measure; ++it) gibbs_sweep(layout, state, data, hyper, out, rng, &counter);
  out.rate.assign(K, std::vector<double>(Tz));
  for (std::size_t s = 0; s < K; ++s)
    for (std::size_t t = 0; t < Tz; ++t) out.rate[s][t] = static_cast<double>(counter.accepted[s][t]) / measure;

  const double band = out.fraction_in_band(target_rate - 0.1, target_rate + 0.1);
  if (!(target_rate > 0.0 && target_rate < 1.0)) {
    out.warning = true;
    out.message = "target acceptance rate " + format_real(target_rate) + " is unreachable";
  } else if (band < 1.0) {
    out.warning = true;
    out.message = "acceptance rate outside target +- 0.1 for " + format_real(100.0 * (1.0 - band)) + "% of cells";
  }
  return out;
}

PupsStep::PupsStep(const PupsData& data, int T, const PupsHyperParams& hyper, TunedProposal tune)
    : data_(data.restrict_years(data.first_year, data.first_year + T - 1)),
      layout_{data.num_sites(), T},
      hyper_(hyper),
      tune_(tune.extended_to(T)) {
  hyper_.validate();
  require(T >= 2 && T <= data.num_years(), "PupsStep: horizon out of range");
  require(tune_.K == layout_.K, "PupsStep: proposals have the wrong number of sites");
}

Vector PupsStep::draw_block_prior(VectorCRef prev, Rng& rng) const {
  Vector block(layout_.K);
  for (int s = 0; s < layout_.K; ++s)
    block(s) = rng.normal(prev(layout_.phi(s)) + prev(layout_.log_lambda(s, layout_.T - 1)),
                          std::sqrt(prev(layout_.sigma2(s))));
  return block;
}

double PupsStep::log_block_prior(VectorCRef prev, VectorCRef block) const {
  double lp = 0.0;
  for (int s = 0; s < layout_.K; ++s)
    lp += normal_log_pdf(block(s), prev(layout_.phi(s)) + prev(layout_.log_lambda(s, layout_.T - 1)),
                         prev(layout_.sigma2(s)));
  return lp;
}

double PupsStep::log_batch_likelihood(VectorCRef, VectorCRef block) const {
  double lp = 0.0;
  for (int s = 0; s < layout_.K; ++s)
    if (const auto& y = data_.count(s, layout_.T)) lp += poisson_log_pmf(*y, block(s));
  return lp;
}

Vector PupsStep::draw_block_conditional(VectorCRef prev, VectorCRef block, Rng& rng) const {
  Vector full(dim());
  full << prev, block;
  for (int s = 0; s < layout_.K; ++s)
    log_lambda_mh_step(layout_, full, s, layout_.T, tune_.at(s, layout_.T), data_, hyper_, rng);
  return full.tail(layout_.K);
}

Vector PupsStep::jump(VectorCRef prev, Rng& rng) const {
  const Vector block = draw_block_prior(prev, rng);
  return draw_block_conditional(prev, block, rng);
}

void PupsStep::transition(VectorRef state, Rng& rng) const { gibbs_sweep(state, rng); }

void PupsStep::gibbs_sweep(VectorRef state, Rng& rng) const {
  pups::gibbs_sweep(layout_, state, data_, hyper_, tune_, rng);
}

const char* method_name(Method m) {
  switch (m) {
    case Method::gibbs: return "gibbs";
    case Method::pprb_wg: return "pprb_wg";
    case Method::smcmc: return "smcmc";
    case Method::gf: return "gf";
  }
  return "unknown";
}

void PupsRunConfig::validate() const {
  if (final_year < base_last_year) throw ConfigError("pups: final_year must be >= base_last_year");
  if (ensemble_size < 2) throw ConfigError("pups: ensemble size must be >= 2");
  if (gibbs_burn_in < 0 || reference_thin < 1) throw ConfigError("pups: invalid Gibbs burn-in or thinning");
  if (filter_iters - filter_burn_in < ensemble_size)
    throw ConfigError("pups: filter_iters - filter_burn_in must be >= ensemble size");
  if (!(oracle_threshold > 0)) throw ConfigError("pups: oracle threshold must be > 0");
  if (max_steps < 1) throw ConfigError("pups: max_steps must be >= 1");
}

namespace {

struct GibbsRun {
  Ensemble consecutive;  // first S post-burn-in draws
  Ensemble thinned;      // every thin-th draw, S of them
  double acceptance = 0.0;
};

}  // namespace

void pups_streaming_updates(const PupsData& data, const PupsHyperParams& hyper, const PupsRunConfig& cfg,
                            const std::function<void(const PupsUpdate&)>& on_update, TunedProposal* tuned_out) {
  cfg.validate();
  hyper.validate();
  data.validate();
  const int T0 = cfg.base_last_year - data.first_year + 1;
  const int T_end = cfg.final_year - data.first_year + 1;
  if (T0 < 2 || T_end > data.num_years())
    throw ConfigError("pups: base and final years must lie within the data with at least 2 base years");

  auto tune = tune_proposals(data, T0, hyper, cfg.target_rate, cfg.pilot_iters, cfg.seed);

  auto gibbs_for = [&](const PupsStep& step) {
    auto rng = Rng::stream(cfg.seed, {static_cast<std::uint64_t>(step.time()), static_cast<std::uint64_t>(Purpose::gibbs)});
    const auto S = cfg.ensemble_size;
    Vector state = initial_state(data, step.time());
    Matrix consecutive(step.dim(), S), thinned(step.dim(), S);
    for (int it = 0; it < cfg.gibbs_burn_in; ++it) step.gibbs_sweep(state, rng);
    AcceptanceCounter counter(step.layout());
    const int total = S * cfg.reference_thin;
    for (int it = 0; it < total; ++it) {
      gibbs_sweep(step.layout(), state, step.data(), hyper, step.tune(), rng, &counter);
      if (it < S) consecutive.col(it) = state;
      if (it % cfg.reference_thin == cfg.reference_thin - 1) thinned.col(it / cfg.reference_thin) = state;
    }
    double acc = 0.0;
    for (const auto& row : counter.accepted)
      for (int a : row) acc += a;
    acc /= static_cast<double>(counter.sweeps) * step.layout().K * step.time();
    return GibbsRun{Ensemble(step.time(), std::move(consecutive)), Ensemble(step.time(), std::move(thinned)), acc};
  };

  const PupsStep base_step(data, T0, hyper, tune);
  const auto base = gibbs_for(base_step);
  for (auto m : {Method::gibbs, Method::pprb_wg, Method::smcmc, Method::gf}) {
    PupsUpdate u;
    u.year = cfg.base_last_year;
    u.update = 0;
    u.method = m;
    u.ensemble = m == Method::gibbs ? &base.consecutive : &base.thinned;
    u.reference = &base.thinned;
    u.acceptance = base.acceptance;
    on_update(u);
  }

  Ensemble pprb = base.thinned, smcmc = base.thinned, gf = base.thinned;
  for (int T = T0 + 1; T <= T_end; ++T) {
    tune = tune_proposals(data, T, hyper, cfg.target_rate, cfg.pilot_iters, cfg.seed, &tune);
    const PupsStep step(data, T, hyper, tune);
    const auto gibbs = gibbs_for(step);
    const auto& layout = step.layout();

    std::vector<MonitoredCoordinate> monitors;
    for (int s = 0; s < layout.K; ++s)
      for (auto c : {layout.phi(s), layout.log_lambda(s, T), layout.log_lambda(s, T - 1)})
        monitors.push_back(MonitoredCoordinate::against_samples(c, gibbs.thinned.coordinate(c)));

    SamplerConfig sc;
    sc.ensemble_size = cfg.ensemble_size;
    sc.iters = cfg.filter_iters;
    sc.burn_in = cfg.filter_burn_in;
    sc.seed = cfg.seed;
    sc.threads = cfg.threads;
    sc.stopping = StoppingRule::oracle(cfg.oracle_threshold, monitors);
    sc.stopping.with_max_steps(cfg.max_steps);

    auto keep_first = [&](const Ensemble& e) {
      return Ensemble(e.time(), e.members().leftCols(cfg.ensemble_size));
    };

    PprbStats stats;
    pprb = keep_first(pprb_within_gibbs_update(step, pprb, sc, &stats));
    const auto smcmc_out = smcmc_update(step, smcmc, sc);
    smcmc = smcmc_out.ensemble;
    const auto gf_out = generative_filtering_update(step, gf, sc, [&](const PupsStep& m, const Ensemble& e,
                                                                      const SamplerConfig& c) {
      return keep_first(pprb_within_gibbs_update(m, e, c));
    });
    gf = gf_out.ensemble;

    const int year = data.first_year + T - 1;
    const int update = T - T0;
    auto emit = [&](Method m, const Ensemble& e, const TransitionOutcome* o, double acc) {
      PupsUpdate u;
      u.year = year;
      u.update = update;
      u.method = m;
      u.ensemble = &e;
      u.reference = &gibbs.thinned;
      u.acceptance = acc;
      if (o) {
        u.steps = o->steps;
        u.capped = o->capped;
        u.residual = o->residual;
      }
      on_update(u);
    };
    emit(Method::gibbs, gibbs.consecutive, nullptr, gibbs.acceptance);
    emit(Method::pprb_wg, pprb, nullptr, stats.acceptance_rate());
    emit(Method::smcmc, smcmc, &smcmc_out, 0.0);
    emit(Method::gf, gf, &gf_out, 0.0);
  }
  if (tuned_out) *tuned_out = tune;
}

}  // namespace streamfilter::pups
