#ifndef STREAMFILTER_PUPS_MODEL_HPP_
#define STREAMFILTER_PUPS_MODEL_HPP_

// Poisson log-AR model for yearly pup counts at K sites:
//
//   y_{s,t} ~ Pois(lambda_{s,t}),  log lambda_{s,1} ~ N(mu1, sigma2_1),
//   log lambda_{s,t} ~ N(phi_s + log lambda_{s,t-1}, sigma2_s),
//   phi_s ~ N(0, sigma2_phi),  sigma2_s ~ IG(alpha, beta).
//
// IG(a, b) here means 1 / sigma2 ~ Gamma(shape a, scale b), i.e. density
// proportional to x^{-(a+1)} exp(-1 / (b x)).
//
// State vectors are laid out as [phi_1..K, sigma2_1..K, log lambda year by
// year (t=1: s=1..K, t=2: ...)], so the parameters added by a new year are the
// last K entries.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "streamfilter/gaussian.hpp"
#include "streamfilter/samplers.hpp"

namespace streamfilter::pups {

struct PupsHyperParams {
  double mu1 = 8.7;
  double sigma2_1 = 1.69;
  double sigma2_phi = 1.0;
  double alpha = 1.0;
  double beta = 20.0;

  void validate() const;
};

/// Counts per (site, year); std::nullopt marks an unobserved cell.
struct PupsData {
  std::vector<std::string> sites;
  int first_year = 0;
  std::vector<std::vector<std::optional<std::int64_t>>> counts;  // [site][year - first_year]

  int num_sites() const { return static_cast<int>(sites.size()); }
  int num_years() const { return counts.empty() ? 0 : static_cast<int>(counts.front().size()); }
  int last_year() const { return first_year + num_years() - 1; }
  /// t is 1-based within the year range.
  const std::optional<std::int64_t>& count(int site, int t) const {
    return counts[static_cast<std::size_t>(site)][static_cast<std::size_t>(t - 1)];
  }
  int observations(int site) const;
  /// Years first..last (extending with missing cells where needed).
  PupsData restrict_years(int first, int last) const;
  void validate() const;
};

struct IngestReport {
  std::size_t rows = 0;
  std::size_t kept = 0;
  std::vector<std::string> rejected;  // "line N: site X not configured"
};

/// Rows "site,year,count" with a blank count for a missing survey. An
/// optional header row starting with "site" is skipped. Rows for sites not in
/// `allowed_sites` are rejected into the report (every site is kept when the
/// list is empty). Site order follows `allowed_sites`, else first appearance.
PupsData ingest_counts(std::istream& is, const std::vector<std::string>& allowed_sites = {},
                       IngestReport* report = nullptr);
void write_counts(std::ostream& os, const PupsData& data);

struct SyntheticPups {
  std::vector<std::string> sites = {"Marmot", "Sugarloaf", "Seal Rocks", "Atkins"};
  int first_year = 1978;
  int last_year = 2016;
  std::vector<double> phi = {-0.05, 0.02, 0.0, 0.1};
  std::vector<double> sigma2 = {0.02, 0.02, 0.02, 0.02};
  std::vector<double> log_lambda_1 = {8.0, 7.5, 6.5, 6.0};
  double observe_prob = 0.5;
};

/// Draws a data set from the model with the given true parameters.
PupsData generate_pups_data(const SyntheticPups& truth, std::uint64_t seed);

/// Index arithmetic for the flattened state at horizon T.
struct Layout {
  int K = 4;
  int T = 1;

  Eigen::Index dim() const { return 2 * K + K * T; }
  Eigen::Index phi(int s) const { return s; }
  Eigen::Index sigma2(int s) const { return K + s; }
  Eigen::Index log_lambda(int s, int t) const { return 2 * K + (t - 1) * K + s; }  // t 1-based
};

struct PupsState {
  Layout layout;
  Vector values;

  double phi(int s) const { return values(layout.phi(s)); }
  double sigma2(int s) const { return values(layout.sigma2(s)); }
  double log_lambda(int s, int t) const { return values(layout.log_lambda(s, t)); }
};

/// Inverse gamma in the convention above.
struct InverseGamma {
  double shape;
  double scale;

  double log_pdf(double x) const;
  double draw(Rng& rng) const { return 1.0 / rng.gamma(shape, scale); }
};

GaussianDist phi_full_conditional(const Layout& layout, VectorCRef state, int site, const PupsHyperParams& hyper);
InverseGamma sigma2_full_conditional(const Layout& layout, VectorCRef state, int site, const PupsHyperParams& hyper);

/// Unnormalized log full conditional of log lambda_{site,t} at value x: the
/// Poisson factor (if observed), the AR (or t = 1 prior) factor and the right
/// neighbour's AR factor (if t < T).
double log_lambda_conditional(const Layout& layout, VectorCRef state, int site, int t, double x, const PupsData& data,
                              const PupsHyperParams& hyper);

/// Per-(site, year) random-walk proposal variances.
struct TunedProposal {
  int K = 0;
  std::vector<std::vector<double>> variance;  // [site][t - 1]
  std::vector<std::vector<double>> rate;      // acceptance measured after freezing
  bool warning = false;
  std::string message;

  int years() const { return variance.empty() ? 0 : static_cast<int>(variance.front().size()); }
  double at(int site, int t) const {
    return variance[static_cast<std::size_t>(site)][static_cast<std::size_t>(t - 1)];
  }
  /// Years beyond the tuned range copy the nearest tuned year.
  TunedProposal extended_to(int T) const;
  /// Fraction of cells whose rate lies in [lo, hi].
  double fraction_in_band(double lo = 0.34, double hi = 0.54) const;
};

/// One random-walk Metropolis update of log lambda_{site,t}. Returns whether
/// the proposal was accepted.
bool log_lambda_mh_step(const Layout& layout, VectorRef state, int site, int t, double proposal_variance,
                        const PupsData& data, const PupsHyperParams& hyper, Rng& rng);

/// Acceptance counts per (site, year) collected during sweeps.
struct AcceptanceCounter {
  std::vector<std::vector<int>> accepted;
  int sweeps = 0;

  explicit AcceptanceCounter(const Layout& layout);
};

/// Full component-wise sweep: for each site phi, then sigma2, then every
/// log lambda_{s,t} for t = 1..T.
void gibbs_sweep(const Layout& layout, VectorRef state, const PupsData& data, const PupsHyperParams& hyper,
                 const TunedProposal& tune, Rng& rng, AcceptanceCounter* counter = nullptr);

/// Starting point: log lambda at log(count + 1), linearly interpolated across
/// missing years (held constant beyond the observed ends, mu1 for a site with
/// no data); phi at the mean increment; sigma2 at the increment variance.
Vector initial_state(const PupsData& data, int T);

/// Stochastic-approximation pilot on log sd toward `target_rate`, then a
/// frozen measuring run over years 1..T. Warns when a rate falls outside
/// target +- 0.1. With `fixed`, its years keep their variances except the last
/// one; that year and all later years adapt, starting from the nearest fixed year.
TunedProposal tune_proposals(const PupsData& data, int T, const PupsHyperParams& hyper, double target_rate,
                             int pilot_iters, std::uint64_t seed, const TunedProposal* fixed = nullptr);

/// The model at horizon T as seen by the generic samplers. The new block is
/// {log lambda_{s,T}}_s.
class PupsStep {
 public:
  PupsStep(const PupsData& data, int T, const PupsHyperParams& hyper, TunedProposal tune);

  int time() const { return layout_.T; }
  const Layout& layout() const { return layout_; }
  Eigen::Index dim() const { return layout_.dim(); }
  Eigen::Index prev_dim() const { return layout_.dim() - layout_.K; }
  Eigen::Index block_dim() const { return layout_.K; }
  const PupsData& data() const { return data_; }
  const TunedProposal& tune() const { return tune_; }

  Vector draw_block_prior(VectorCRef prev, Rng& rng) const;
  double log_block_prior(VectorCRef prev, VectorCRef block) const;
  double log_batch_likelihood(VectorCRef prev, VectorCRef block) const;
  /// The t = T Metropolis update for every site, started at `block`.
  Vector draw_block_conditional(VectorCRef prev, VectorCRef block, Rng& rng) const;
  /// Conditional-prior draw followed by the t = T Metropolis update.
  Vector jump(VectorCRef prev, Rng& rng) const;
  void transition(VectorRef state, Rng& rng) const;
  void gibbs_sweep(VectorRef state, Rng& rng) const;

 private:
  PupsData data_;  // years 1..T only
  Layout layout_;
  PupsHyperParams hyper_;
  TunedProposal tune_;
};

static_assert(StreamingStep<PupsStep>);
static_assert(GibbsTarget<PupsStep>);

enum class Method { gibbs, pprb_wg, smcmc, gf };
const char* method_name(Method m);

struct PupsRunConfig {
  int base_last_year = 2000;
  int final_year = 2016;
  int ensemble_size = 1000;
  int gibbs_burn_in = 1000;
  int reference_thin = 10;
  int filter_iters = 1100;
  int filter_burn_in = 100;
  int pilot_iters = 1000;
  double target_rate = 0.44;
  double oracle_threshold = 0.1;
  int max_steps = 10000;
  std::uint64_t seed = 0;
  int threads = 0;

  void validate() const;
};

/// What one method produced at one update.
struct PupsUpdate {
  int year = 0;   // calendar year of the newest data
  int update = 0;  // 0 = base fit, 1.. = streaming updates
  Method method = Method::gibbs;
  const Ensemble* ensemble = nullptr;  // valid during the callback only
  int steps = 0;                       // transition sweeps (SMCMC, GF)
  bool capped = false;
  double residual = 0.0;
  double acceptance = 0.0;  // PPRB filter acceptance, or mean MH acceptance for Gibbs
  const Ensemble* reference = nullptr;  // thinned Gibbs chain for this year
};

/// Base Gibbs fit through base_last_year, then one update per year up to
/// final_year with every method. SMCMC and GF stop when every monitored
/// coordinate (phi_s, log lambda_{s,T}, log lambda_{s,T-1}) is within
/// oracle_threshold two-sample KS of the thinned Gibbs reference. The Gibbs
/// method reports S consecutive post-burn-in draws of that same chain.
/// Proposals are tuned on the base fit; each update retunes the newest two years,
/// before any method runs. `tuned_out` receives the final proposals.
void pups_streaming_updates(const PupsData& data, const PupsHyperParams& hyper, const PupsRunConfig& cfg,
                            const std::function<void(const PupsUpdate&)>& on_update,
                            TunedProposal* tuned_out = nullptr);

}  // namespace streamfilter::pups

#endif  // STREAMFILTER_PUPS_MODEL_HPP_
