// Command-line front end: one subcommand per module plus the experiment harness.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "wlsq/bounds.hpp"
#include "wlsq/certify.hpp"
#include "wlsq/christoffel.hpp"
#include "wlsq/errors.hpp"
#include "wlsq/experiment.hpp"
#include "wlsq/io.hpp"
#include "wlsq/recover.hpp"
#include "wlsq/rng.hpp"
#include "wlsq/sampler.hpp"
#include "wlsq/spectral.hpp"
#include "wlsq/subsample.hpp"

namespace fs = std::filesystem;
using namespace wlsq;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
};

Json load_config(const Common& c) {
  if (c.config.empty()) throw ArgumentError("--config <json> is required");
  std::ifstream is(c.config);
  if (!is) throw ArgumentError("cannot read config " + c.config);
  Json j;
  try {
    j = Json::parse(is);
  } catch (const Json::parse_error& e) {
    throw ArgumentError("config " + c.config + " is not valid JSON: " + e.what());
  }
  if (c.seed) j["seed"] = *c.seed;
  return j;
}

fs::path out_file(const Common& c, const std::string& name) {
  fs::create_directories(c.out);
  return fs::path(c.out) / name;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

void write_json(const fs::path& path, const Json& j) { open_out(path) << j.dump(2) << '\n'; }

DensityVariant variant_of(const Json& j, const SpectralModel& model) {
  if (j.contains("variant")) return parse_variant(j.at("variant").get<std::string>());
  return model.unimodular() ? DensityVariant::none : DensityVariant::krieg_ullrich;
}

GridSpec grid_of(const Json& j, const SpectralModel& model) {
  if (j.contains("grid")) return GridSpec::uniform(model, j.at("grid").at("per_dim").get<std::size_t>());
  return GridSpec::defaults(model);
}

// Nodes from "nodes": <csv path>, else drawn from (m, n, variant, seed).
NodeSet nodes_of(const Json& j, const SpectralModel& model, std::size_t m) {
  if (j.contains("nodes")) {
    std::ifstream is(j.at("nodes").get<std::string>());
    if (!is) throw ArgumentError("cannot read node file " + j.at("nodes").get<std::string>());
    return read_nodes_csv(is);
  }
  return draw_nodes(model, m, j.at("n").get<std::size_t>(), variant_of(j, model), j.value("seed", std::uint64_t{0}));
}

int cmd_spectrum(const Common& c) {
  const auto j = load_config(c);
  const auto model = model_from_json(j.at("model"));
  auto os = open_out(out_file(c, "spectrum.csv"));
  write_spectrum_csv(os, ranked_spectrum(model, j.at("count").get<std::size_t>()));
  return 0;
}

int cmd_sample(const Common& c) {
  const auto j = load_config(c);
  const auto model = model_from_json(j.at("model"));
  const auto m = j.at("m").get<std::size_t>();
  const auto nodes =
      draw_nodes(model, m, j.at("n").get<std::size_t>(), variant_of(j, model), j.value("seed", std::uint64_t{0}));
  auto os = open_out(out_file(c, "nodes.csv"));
  write_nodes_csv(os, nodes);
  return 0;
}

// Fits a seeded random element of the unit ball on the first `function_ranks` ranks.
int cmd_recover(const Common& c) {
  const auto j = load_config(c);
  const auto model = model_from_json(j.at("model"));
  const auto m = j.at("m").get<std::size_t>();
  const bool weighted = j.value("weighted", !model.unimodular());
  const auto nodes = nodes_of(j, model, m);
  std::string node_file = j.value("nodes", std::string());
  if (node_file.empty()) {
    node_file = out_file(c, "nodes.csv").string();
    auto os = open_out(node_file);
    write_nodes_csv(os, nodes);
  }
  const auto ranks = j.value("function_ranks", m - 1);
  const auto basis = SpectralBasis::get(model, ranks);
  auto rng = Philox::substream(j.value("seed", std::uint64_t{0}), 1);
  std::vector<cplx> a(ranks);
  double norm = 0.0;
  for (auto& v : a) {
    v = model.real_valued() ? cplx(rng.normal()) : rng.complex_normal();
    norm += std::norm(v);
  }
  for (auto& v : a) v /= std::sqrt(norm);
  std::vector<cplx> eta(ranks);
  auto f = [&](std::span<const double> x) {
    basis->eval(x, ranks, eta);
    cplx v = 0.0;
    for (std::size_t k = 0; k < ranks; ++k) v += a[k] * basis->sigma(k + 1) * eta[k];
    return v;
  };
  std::vector<cplx> samples(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) samples[i] = f(nodes.point(i));
  const auto op = fit(assemble(model, nodes, m, weighted), samples);
  const auto grid = grid_of(j, model);
  const auto points = grid_points(model, grid);
  const auto d = static_cast<std::size_t>(model.dim());
  double err = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::span<const double> x(points.data() + i * d, d);
    err = std::max(err, std::abs(f(x) - op.evaluate(x)));
  }
  auto out = operator_to_json(op, node_file);
  out["function_ranks"] = ranks;
  out["grid_error_sup"] = err;
  write_json(out_file(c, "operator.json"), out);
  return 0;
}

int cmd_subsample(const Common& c) {
  const auto j = load_config(c);
  const auto model = model_from_json(j.at("model"));
  const auto m = j.at("m").get<std::size_t>();
  const auto nodes = nodes_of(j, model, m);
  const auto rows = frame_rows(assemble(model, nodes, m, j.value("weighted", !model.unimodular())));
  const std::size_t dim = m - 1;
  double k1 = 0.0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) k1 = std::max(k1, rows.row(i).squaredNorm());
  k1 *= static_cast<double>(rows.rows()) / static_cast<double>(dim);
  const auto fb = frame_bounds(rows);
  const auto result = weaver_subsample(rows, dim, j.value("k1", k1 * (1.0 + 1e-12)),
                                       j.value("k2", fb.lower * (1.0 - 1e-12)), j.value("k3", fb.upper * (1.0 + 1e-12)));
  write_json(out_file(c, "subsample.json"), subsample_to_json(result));
  return 0;
}

int cmd_certify(const Common& c) {
  const auto j = load_config(c);
  const auto model = model_from_json(j.at("model"));
  const auto m = j.at("m").get<std::size_t>();
  const auto nodes = nodes_of(j, model, m);
  const std::vector<cplx> zeros(nodes.size());
  const auto op = fit(assemble(model, nodes, m, j.value("weighted", !model.unimodular())), zeros);
  CertifyOptions options;
  options.keep_values = true;
  const auto route = j.value("route", std::string("spectral"));
  if (route == "gram") {
    options.route = CertifyRoute::gram;
  } else if (route != "spectral") {
    throw ArgumentError("route must be 'spectral' or 'gram'");
  }
  const double rel = j.value("kernel_rel_eps", default_kernel_rel_eps(model));
  const auto cert = certify_sup(op, model, grid_of(j, model), kernel_eps(model, m, rel), options);
  auto os = open_out(out_file(c, "certificate.csv"));
  write_certificate_csv(os, model, cert);
  auto summary = certificate_to_json(cert);
  summary["m"] = m;
  summary["n"] = nodes.size();
  summary["kernel_rel_eps"] = rel;
  write_json(out_file(c, "certificate.json"), summary);
  return 0;
}

int cmd_bounds(const Common& c) {
  const auto j = load_config(c);
  const auto model = model_from_json(j.at("model"));
  const auto ms = j.at("m").get<std::vector<std::size_t>>();
  const bool bounded = j.value("bounded_ons", model.unimodular());
  const auto profile = make_profile(model);
  const auto grid = grid_of(j, model);
  const double rel = j.value("kernel_rel_eps", default_kernel_rel_eps(model));
  std::vector<BoundReport> reports;
  std::vector<ChristoffelRow> rows;
  for (std::size_t m : ms) {
    reports.push_back(thm31_rhs(model, m, bounded));
    reports.push_back(thm42_rhs(*profile, Thm42Variant::ii, m, bounded));
    reports.push_back(cor43_bound(*profile, m));
    const double s = model.smoothness();
    const int d = model.dim();
    if (model.unimodular() && model.weight().kind == WeightKind::sharp_mixed && m >= 4 &&
        2.0 * s / (1.0 + std::log2(static_cast<double>(d))) > 1.0) {
      reports.push_back(preasymp_hmix(s, d, m));
    }
    const double eps = kernel_eps(model, m, rel);
    rows.push_back({m, christoffel_sup(model, m, grid), projection_error_sup(model, m, grid, eps).upper,
                    tail_bound_rhs(*profile, m).value});
  }
  auto os = open_out(out_file(c, "bounds.csv"));
  write_bounds_csv(os, reports);
  auto cs = open_out(out_file(c, "christoffel.csv"));
  write_christoffel_csv(cs, rows);
  return 0;
}

int cmd_experiment(const Common& c, const std::string& from_csv) {
  if (!from_csv.empty()) {
    std::ifstream is(from_csv);
    if (!is) throw ArgumentError("cannot read " + from_csv);
    write_json(out_file(c, "summary.json"), summarize(read_trials_csv(is)));
    return 0;
  }
  const auto config = config_from_json(load_config(c));
  const auto result = run_experiment(config, c.out);
  for (const auto& r : result.records) {
    if (!r.ok) std::cerr << "trial n=" << r.n << " #" << r.trial << " failed: " << r.error << '\n';
  }
  return result.any_error ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted least-squares recovery in the uniform norm with certified worst-case errors"};
  app.require_subcommand(1);
  Common common;
  std::string from_csv;
  auto add = [&](const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", common.config, "JSON config file")->required(name != "experiment");
    sub->add_option("--seed", common.seed, "Override the config seed");
    sub->add_option("--out", common.out, "Output directory");
    return sub;
  };
  add("spectrum", "Ranked spectrum CSV (rank,index,sigma)");
  add("sample", "Draw nodes from a tailored density");
  add("recover", "Fit a random unit-ball element and export the operator");
  add("subsample", "Frame subsampling of a node set");
  add("certify", "Certified worst-case sup error of the recovery operator");
  add("bounds", "Error bound tables and Christoffel exports");
  auto* exp = add("experiment", "Seeded multi-trial experiment");
  exp->add_option("--from-csv", from_csv, "Recompute the summary from a trials CSV");

  CLI11_PARSE(app, argc, argv);
  try {
    if (app.got_subcommand("spectrum")) return cmd_spectrum(common);
    if (app.got_subcommand("sample")) return cmd_sample(common);
    if (app.got_subcommand("recover")) return cmd_recover(common);
    if (app.got_subcommand("subsample")) return cmd_subsample(common);
    if (app.got_subcommand("certify")) return cmd_certify(common);
    if (app.got_subcommand("bounds")) return cmd_bounds(common);
    if (app.got_subcommand("experiment")) return cmd_experiment(common, from_csv);
  } catch (const ArgumentError& e) {
    std::cerr << "argument error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
