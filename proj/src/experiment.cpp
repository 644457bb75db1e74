#include "wlsq/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "wlsq/bounds.hpp"
#include "wlsq/errors.hpp"
#include "wlsq/recover.hpp"
#include "wlsq/rng.hpp"
#include "wlsq/subsample.hpp"

namespace wlsq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const char* kColumns[] = {"n",           "trial",         "m",
                          "r",           "seed",          "substream",
                          "node_seed",   "config_hash",   "status",
                          "error",       "nodes_used",    "rank_ok",
                          "spectral_norm", "spectral_threshold", "spectral_pass",
                          "certificate", "certificate_upper", "truncation_rank",
                          "thm31_rhs",   "thm31_pass"};

std::string sanitize(std::string s) {
  for (auto& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

double median(std::vector<double> v) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::uint64_t trial_substream(std::size_t n, std::size_t trial) {
  return (static_cast<std::uint64_t>(n) << 20) | static_cast<std::uint64_t>(trial);
}

}  // namespace

std::size_t MRule::m_for(std::size_t n, std::size_t n_index) const {
  if (kind == MRuleKind::log_rule) return log_m_rule(n, c1, r);
  if (m.empty()) throw ArgumentError("explicit m rule needs at least one m");
  return m.size() == 1 ? m[0] : m.at(n_index);
}

std::size_t n_for_m(std::size_t m, double c1, double r) {
  std::size_t lo = 2, hi = 4;
  while (log_m_rule(hi, c1, r) < m) hi *= 2;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (log_m_rule(mid, c1, r) >= m) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw ArgumentError("trials must be >= 1");
  if (n.empty()) throw ArgumentError("n list is empty");
  for (std::size_t i = 1; i < n.size(); ++i) {
    if (n[i] <= n[i - 1]) throw ArgumentError("n list must be strictly increasing");
  }
  if (m_rule.kind == MRuleKind::log_rule && !(m_rule.r > 1.0)) throw ArgumentError("log m rule needs r > 1");
  if (m_rule.kind == MRuleKind::explicit_m && m_rule.m.size() != 1 && m_rule.m.size() != n.size()) {
    throw ArgumentError("explicit m list must have one entry or one per n");
  }
  for (std::size_t i = 0; i < n.size(); ++i) {
    const std::size_t m = m_rule.m_for(n[i], i);
    if (m < 2 || m - 1 > n[i]) {
      throw ArgumentError("n = " + std::to_string(n[i]) + " gives m = " + std::to_string(m) +
                          "; need 2 <= m <= n + 1");
    }
  }
  if (bounded_ons && !model.unimodular()) throw ArgumentError("bounded_ons needs a trigonometric model");
  if (certify && !model.certifiable()) throw ArgumentError("model is not certifiable: " + model.key());
}

GridSpec ExperimentConfig::grid() const {
  return grid_per_dim == 0 ? GridSpec::defaults(model) : GridSpec::uniform(model, grid_per_dim);
}

ExperimentConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ArgumentError("experiment config must be a JSON object");
  ExperimentConfig c;
  if (!j.contains("model")) throw ArgumentError("experiment config needs 'model'");
  c.model = model_from_json(j.at("model"));
  const bool trig = c.model.unimodular();
  c.m_rule.c1 = trig ? 10.0 : 20.0;
  c.variant = trig ? DensityVariant::none : DensityVariant::krieg_ullrich;
  c.weighted = !trig;
  c.bounded_ons = trig;
  if (j.contains("m_rule")) {
    const auto& mr = j.at("m_rule");
    const auto kind = mr.value("kind", std::string("log"));
    if (kind == "log") {
      c.m_rule.kind = MRuleKind::log_rule;
      c.m_rule.c1 = mr.value("c1", c.m_rule.c1);
      c.m_rule.r = mr.value("r", c.m_rule.r);
    } else if (kind == "explicit") {
      c.m_rule.kind = MRuleKind::explicit_m;
      c.m_rule.r = kNaN;
      const auto& m = mr.at("m");
      if (m.is_array()) {
        c.m_rule.m = m.get<std::vector<std::size_t>>();
      } else {
        c.m_rule.m = {m.get<std::size_t>()};
      }
    } else {
      throw ArgumentError("m_rule.kind must be 'log' or 'explicit'");
    }
  }
  if (!j.contains("n")) throw ArgumentError("experiment config needs 'n'");
  c.n = j.at("n").get<std::vector<std::size_t>>();
  c.trials = j.value("trials", c.trials);
  c.seed = j.value("seed", c.seed);
  if (j.contains("variant")) c.variant = parse_variant(j.at("variant").get<std::string>());
  c.weighted = j.value("weighted", c.weighted);
  c.subsample = j.value("subsample", c.subsample);
  c.certify = j.value("certify", c.certify);
  if (j.contains("route")) {
    const auto route = j.at("route").get<std::string>();
    if (route == "spectral") {
      c.route = CertifyRoute::spectral;
    } else if (route == "gram") {
      c.route = CertifyRoute::gram;
    } else {
      throw ArgumentError("route must be 'spectral' or 'gram'");
    }
  }
  if (j.contains("grid")) c.grid_per_dim = j.at("grid").value("per_dim", std::size_t{0});
  c.kernel_rel_eps = j.value("kernel_rel_eps", 0.0);
  if (c.kernel_rel_eps == 0.0) c.kernel_rel_eps = default_kernel_rel_eps(c.model);
  c.bounded_ons = j.value("bounded_ons", c.bounded_ons);
  if (j.contains("output")) {
    c.trials_csv = j.at("output").value("trials_csv", c.trials_csv);
    c.summary_json = j.at("output").value("summary_json", c.summary_json);
  }
  c.validate();
  return c;
}

Json config_to_json(const ExperimentConfig& c) {
  Json j;
  j["model"] = model_to_json(c.model);
  if (c.m_rule.kind == MRuleKind::log_rule) {
    j["m_rule"] = {{"kind", "log"}, {"c1", c.m_rule.c1}, {"r", c.m_rule.r}};
  } else {
    j["m_rule"] = {{"kind", "explicit"}, {"m", c.m_rule.m}};
  }
  j["n"] = c.n;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["variant"] = std::string(to_string(c.variant));
  j["weighted"] = c.weighted;
  j["subsample"] = c.subsample;
  j["certify"] = c.certify;
  j["route"] = c.route == CertifyRoute::spectral ? "spectral" : "gram";
  j["grid"] = {{"per_dim", c.grid().counts.front()}};
  j["kernel_rel_eps"] = c.kernel_rel_eps > 0.0 ? c.kernel_rel_eps : default_kernel_rel_eps(c.model);
  j["bounded_ons"] = c.bounded_ons;
  j["output"] = {{"trials_csv", c.trials_csv}, {"summary_json", c.summary_json}};
  return j;
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : config_to_json(config).dump()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

TrialRecord run_trial(const ExperimentConfig& config, std::size_t n_index, std::size_t trial) {
  TrialRecord rec;
  rec.n = config.n.at(n_index);
  rec.trial = trial;
  rec.m = config.m_rule.m_for(rec.n, n_index);
  rec.r = config.m_rule.kind == MRuleKind::log_rule ? config.m_rule.r : kNaN;
  rec.seed = config.seed;
  rec.substream = trial_substream(rec.n, trial);
  rec.node_seed = derive_seed(config.seed, rec.substream);
  rec.config_hash = config_hash(config);
  rec.spectral_norm = kNaN;
  rec.spectral_threshold = kNaN;
  rec.certificate = kNaN;
  rec.certificate_upper = kNaN;
  rec.thm31_rhs = kNaN;
  try {
    const auto& model = config.model;
    NodeSet nodes = draw_nodes(model, rec.m, rec.n, config.variant, rec.node_seed);
    auto matrix = assemble(model, nodes, rec.m, config.weighted);
    const auto check = spectral_norm_check(matrix);
    rec.spectral_norm = check.norm;
    rec.spectral_threshold = check.threshold;
    rec.spectral_pass = check.pass;
    if (config.subsample) {
      const auto rows = frame_rows(matrix);
      const std::size_t dim = rec.m - 1;
      double k1 = 0.0;
      for (Eigen::Index i = 0; i < rows.rows(); ++i) k1 = std::max(k1, rows.row(i).squaredNorm());
      k1 *= static_cast<double>(rec.n) / static_cast<double>(dim);
      const auto fb = frame_bounds(rows);
      const auto sel = weaver_subsample(rows, dim, k1 * (1.0 + 1e-12), fb.lower * (1.0 - 1e-12),
                                        fb.upper * (1.0 + 1e-12));
      nodes = nodes.subset(sel.indices);
      matrix = assemble(model, nodes, rec.m, config.weighted);
    }
    rec.nodes_used = nodes.size();
    const std::vector<cplx> zeros(nodes.size());
    std::optional<RecoveryOperator> op;
    try {
      op.emplace(fit(matrix, zeros));
      rec.rank_ok = true;
    } catch (const RankDeficientError&) {
      rec.rank_ok = false;
    }
    if (config.certify) {
      rec.thm31_rhs = thm31_rhs(model, rec.m, config.bounded_ons).value;
      if (op) {
        CertifyOptions options;
        options.route = config.route;
        options.exec = Exec::serial;
        const double eps = kernel_eps(model, rec.m, config.kernel_rel_eps);
        const auto cert = certify_sup(*op, model, config.grid(), eps, options);
        rec.certificate = cert.sup_value;
        rec.certificate_upper = cert.upper();
        rec.truncation_rank = cert.truncation_rank;
        rec.thm31_pass = cert.upper() * cert.upper() <= rec.thm31_rhs;
      }
    }
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = sanitize(e.what());
  }
  return rec;
}

std::vector<TrialRecord> run_trials(const ExperimentConfig& config, Exec exec) {
  config.validate();
  const std::size_t cells = config.n.size() * config.trials;
  std::vector<TrialRecord> out(cells);
  const auto body = [&](std::size_t c) { out[c] = run_trial(config, c / config.trials, c % config.trials); };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t c = 0; c < cells; ++c) body(c);
  } else {
    for (std::size_t c = 0; c < cells; ++c) body(c);
  }
  return out;
}

void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
  for (std::size_t i = 0; i < std::size(kColumns); ++i) os << (i ? "," : "") << kColumns[i];
  os << '\n';
  for (const auto& r : records) {
    os << r.n << ',' << r.trial << ',' << r.m << ',' << format_double(r.r) << ',' << r.seed << ',' << r.substream
       << ',' << r.node_seed << ',' << r.config_hash << ',' << (r.ok ? "ok" : "error") << ',' << sanitize(r.error)
       << ',' << r.nodes_used << ',' << int(r.rank_ok) << ',' << format_double(r.spectral_norm) << ','
       << format_double(r.spectral_threshold) << ',' << int(r.spectral_pass) << ','
       << format_double(r.certificate) << ',' << format_double(r.certificate_upper) << ',' << r.truncation_rank
       << ',' << format_double(r.thm31_rhs) << ',' << int(r.thm31_pass) << '\n';
  }
}

std::vector<TrialRecord> read_trials_csv(std::istream& is) {
  const auto table = read_csv(is);
  std::vector<std::size_t> col;
  for (const char* name : kColumns) col.push_back(table.column(name));
  std::vector<TrialRecord> out;
  for (const auto& row : table.rows) {
    auto at = [&](std::size_t k) -> const std::string& { return row[col[k]]; };
    TrialRecord r;
    r.n = std::stoull(at(0));
    r.trial = std::stoull(at(1));
    r.m = std::stoull(at(2));
    r.r = std::stod(at(3));
    r.seed = std::stoull(at(4));
    r.substream = std::stoull(at(5));
    r.node_seed = std::stoull(at(6));
    r.config_hash = at(7);
    r.ok = at(8) == "ok";
    r.error = at(9);
    r.nodes_used = std::stoull(at(10));
    r.rank_ok = at(11) == "1";
    r.spectral_norm = std::stod(at(12));
    r.spectral_threshold = std::stod(at(13));
    r.spectral_pass = at(14) == "1";
    r.certificate = std::stod(at(15));
    r.certificate_upper = std::stod(at(16));
    r.truncation_rank = std::stoull(at(17));
    r.thm31_rhs = std::stod(at(18));
    r.thm31_pass = at(19) == "1";
    out.push_back(std::move(r));
  }
  return out;
}

RateFit rate_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 4) throw ArgumentError("rate_fit needs at least 4 points");
  std::vector<double> x, y;
  for (const auto& [n, e] : points) {
    if (!(n > 0.0) || !(e > 0.0)) throw ArgumentError("rate_fit needs positive n and error");
    x.push_back(std::log(n));
    y.push_back(std::log(e));
  }
  const double k = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ArgumentError("rate_fit needs at least two distinct n");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double res = y[i] - (fit.intercept + fit.slope * x[i]);
    ss += res * res;
  }
  fit.residual = std::sqrt(ss / k);
  fit.points = x.size();
  return fit;
}

Json summarize(const std::vector<TrialRecord>& records) {
  Json s;
  std::size_t errors = 0;
  for (const auto& r : records) errors += r.ok ? 0 : 1;
  s["config_hash"] = records.empty() ? "" : records.front().config_hash;
  s["seed"] = records.empty() ? 0 : records.front().seed;
  s["trials"] = records.size();
  s["errors"] = errors;
  Json per_n = Json::array();
  std::vector<std::pair<double, double>> by_n, by_m;
  std::size_t i = 0;
  while (i < records.size()) {
    std::size_t j = i;
    while (j < records.size() && records[j].n == records[i].n) ++j;
    const auto& first = records[i];
    std::size_t ok = 0, rank_ok = 0, sn_pass = 0, bound_pass = 0, certified = 0;
    std::vector<double> cert, upper;
    for (std::size_t k = i; k < j; ++k) {
      const auto& r = records[k];
      if (!r.ok) continue;
      ++ok;
      rank_ok += r.rank_ok;
      sn_pass += r.spectral_pass;
      if (std::isfinite(r.certificate)) {
        ++certified;
        bound_pass += r.thm31_pass;
        cert.push_back(r.certificate);
        upper.push_back(r.certificate_upper);
      }
    }
    Json e;
    e["n"] = first.n;
    e["m"] = first.m;
    e["trials"] = j - i;
    e["errors"] = (j - i) - ok;
    e["rank_ok"] = rank_ok;
    e["spectral_norm_pass_rate"] = ok ? Json(static_cast<double>(sn_pass) / ok) : Json(nullptr);
    e["expected_pass_rate"] = std::isfinite(first.r)
                                  ? number_or_null(1.0 - 3.0 * std::pow(static_cast<double>(first.n), 1.0 - first.r))
                                  : Json(nullptr);
    e["certified"] = certified;
    const double med = median(cert);
    e["certificate_median"] = number_or_null(med);
    e["certificate_upper_median"] = number_or_null(median(upper));
    e["thm31_rhs"] = number_or_null(first.thm31_rhs);
    e["thm31_pass_rate"] = certified ? Json(static_cast<double>(bound_pass) / certified) : Json(nullptr);
    per_n.push_back(std::move(e));
    if (std::isfinite(med) && med > 0.0) {
      by_n.emplace_back(static_cast<double>(first.n), med);
      by_m.emplace_back(static_cast<double>(first.m), med);
    }
    i = j;
  }
  s["per_n"] = std::move(per_n);
  auto fit_json = [](const std::vector<std::pair<double, double>>& pts) -> Json {
    if (pts.size() < 4) return nullptr;
    try {
      const auto f = rate_fit(pts);
      return Json{{"slope", f.slope}, {"intercept", f.intercept}, {"residual", f.residual}, {"points", f.points}};
    } catch (const ArgumentError&) {
      return nullptr;
    }
  };
  s["rate_fit_n"] = fit_json(by_n);
  s["rate_fit_m"] = fit_json(by_m);
  return s;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const std::string& out_dir, Exec exec) {
  ExperimentResult result;
  result.records = run_trials(config, exec);
  for (const auto& r : result.records) result.any_error = result.any_error || !r.ok;
  result.summary = summarize(result.records);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const auto base = std::filesystem::path(out_dir);
    std::ofstream csv(base / config.trials_csv);
    if (!csv) throw std::runtime_error("cannot write " + (base / config.trials_csv).string());
    write_trials_csv(csv, result.records);
    std::ofstream js(base / config.summary_json);
    if (!js) throw std::runtime_error("cannot write " + (base / config.summary_json).string());
    js << result.summary.dump(2) << '\n';
  }
  return result;
}

}  // namespace wlsq
