#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wlsq/certify.hpp"
#include "wlsq/io.hpp"
#include "wlsq/sampler.hpp"
#include "wlsq/spectral.hpp"

namespace wlsq {

enum class MRuleKind { explicit_m, log_rule };

/// log: m = floor(n / (c1 r log n)). explicit: one m for all n, or one per n.
struct MRule {
  MRuleKind kind = MRuleKind::log_rule;
  double c1 = 10.0;
  double r = 2.0;
  std::vector<std::size_t> m;

  std::size_t m_for(std::size_t n, std::size_t n_index) const;
};

/// Smallest n whose log-rule m is at least `m`.
std::size_t n_for_m(std::size_t m, double c1, double r);

struct ExperimentConfig {
  SpectralModel model = SpectralModel::legendre(2.0);
  MRule m_rule;
  std::vector<std::size_t> n;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  DensityVariant variant = DensityVariant::none;
  bool weighted = false;
  bool subsample = false;
  bool certify = true;
  CertifyRoute route = CertifyRoute::spectral;
  std::size_t grid_per_dim = 0;  // 0: GridSpec::defaults
  double kernel_rel_eps = 0.0;   // 0: default_kernel_rel_eps
  bool bounded_ons = false;
  std::string trials_csv = "trials.csv";
  std::string summary_json = "summary.json";

  /// Throws ArgumentError when trials < 1, n is not strictly increasing, r <= 1
  /// under the log rule, or some n yields m < 2 or m - 1 > n.
  void validate() const;
  GridSpec grid() const;
};

/// Defaults follow the model: trig runs plain least squares on uniform nodes
/// with c1 = 10 and the bounded-ONS constant; Legendre runs weighted least
/// squares on krieg_ullrich nodes with c1 = 20. r defaults to 2.
ExperimentConfig config_from_json(const Json& j);
/// Fully resolved config (defaults filled in), stable key order.
Json config_to_json(const ExperimentConfig& config);
/// FNV-1a 64 of the resolved config's compact dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

struct TrialRecord {
  std::size_t n = 0;
  std::size_t trial = 0;
  std::size_t m = 0;
  double r = 0.0;  // NaN under an explicit m rule
  std::uint64_t seed = 0;
  std::uint64_t substream = 0;
  std::uint64_t node_seed = 0;
  std::string config_hash;
  bool ok = false;
  std::string error;
  std::size_t nodes_used = 0;
  bool rank_ok = false;
  double spectral_norm = 0.0;
  double spectral_threshold = 0.0;
  bool spectral_pass = false;
  double certificate = 0.0;  // grid sup of e (NaN when not certified)
  double certificate_upper = 0.0;
  std::size_t truncation_rank = 0;
  double thm31_rhs = 0.0;
  bool thm31_pass = false;
};

/// One (n, trial) cell. Module errors are caught and recorded (ok = false).
/// Kernels run serially so a record does not depend on the thread count.
TrialRecord run_trial(const ExperimentConfig& config, std::size_t n_index, std::size_t trial);

/// All cells in (n, trial) order; parallel over cells when exec is parallel.
std::vector<TrialRecord> run_trials(const ExperimentConfig& config, Exec exec = Exec::parallel);

void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& records);
std::vector<TrialRecord> read_trials_csv(std::istream& is);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root mean square of the log residuals
  std::size_t points = 0;
};

/// OLS of log(error) on log(x). Throws ArgumentError with fewer than 4 points
/// or a non-positive x or error.
RateFit rate_fit(const std::vector<std::pair<double, double>>& points);

/// Summary computed from the records alone, so a trials CSV reproduces it exactly.
Json summarize(const std::vector<TrialRecord>& records);

struct ExperimentResult {
  std::vector<TrialRecord> records;
  Json summary;
  bool any_error = false;
};

/// Runs every trial and, when out_dir is non-empty, writes the trials CSV and
/// the summary JSON there.
ExperimentResult run_experiment(const ExperimentConfig& config, const std::string& out_dir,
                                Exec exec = Exec::parallel);

}  // namespace wlsq
