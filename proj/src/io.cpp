#include "wlsq/io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "wlsq/errors.hpp"

namespace wlsq {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

std::string joined(const NamedValues& values) {
  std::string out;
  for (const auto& [k, v] : values) {
    if (!out.empty()) out += ';';
    out += k + "=" + format_double(v);
  }
  return out;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ArgumentError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw ArgumentError("not a number: '" + s + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

SpectralModel model_from_json(const Json& j) {
  if (!j.is_object()) throw ArgumentError("model descriptor must be a JSON object");
  if (!j.contains("basis") || !j.contains("s")) throw ArgumentError("model descriptor needs 'basis' and 's'");
  const auto basis = j.at("basis").get<std::string>();
  const double s = j.at("s").get<double>();
  const int d = j.value("d", 1);
  if (basis == "trig_sharp") return SpectralModel::trigonometric(WeightModel::sharp(s, d));
  if (basis == "trig_plus") return SpectralModel::trigonometric(WeightModel::plus(s, d));
  if (basis == "legendre") {
    if (d != 1) throw ArgumentError("legendre model is one-dimensional");
    return SpectralModel::legendre(s);
  }
  throw ArgumentError("unknown basis '" + basis + "' (expected trig_sharp, trig_plus or legendre)");
}

Json model_to_json(const SpectralModel& model) {
  Json j;
  if (model.kind() == BasisKind::legendre) {
    j["basis"] = "legendre";
  } else {
    switch (model.weight().kind) {
      case WeightKind::sharp_mixed: j["basis"] = "trig_sharp"; break;
      case WeightKind::plus_mixed: j["basis"] = "trig_plus"; break;
      case WeightKind::custom: throw ArgumentError("custom weights have no JSON descriptor");
    }
  }
  j["s"] = model.smoothness();
  j["d"] = model.dim();
  return j;
}

void write_spectrum_csv(std::ostream& os, const RankedSpectrum& spectrum) {
  os << "rank,index,sigma\n";
  for (const auto& e : spectrum.entries) {
    os << e.rank << ',';
    for (std::size_t c = 0; c < e.index.size(); ++c) os << (c ? ";" : "") << e.index[c];
    os << ',' << format_double(e.sigma) << '\n';
  }
}

void write_nodes_csv(std::ostream& os, const NodeSet& nodes) {
  os << "# seed=" << nodes.seed << ",m=" << nodes.m << ",variant=" << to_string(nodes.variant)
     << ",density_scale=" << format_double(nodes.density_scale) << '\n';
  for (int c = 0; c < nodes.dim; ++c) os << "x_" << c + 1 << ',';
  os << "density\n";
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (double x : nodes.point(i)) os << format_double(x) << ',';
    os << format_double(nodes.density[i]) << '\n';
  }
}

NodeSet read_nodes_csv(std::istream& is) {
  NodeSet out;
  std::string line;
  bool have_meta = false;
  while (std::getline(is, line)) {
    line = strip_cr(line);
    if (line.rfind("# ", 0) != 0) break;
    for (const auto& field : split(line.substr(2), ',')) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) continue;
      const auto key = field.substr(0, eq);
      const auto value = field.substr(eq + 1);
      if (key == "seed") out.seed = std::stoull(value);
      if (key == "m") out.m = std::stoull(value);
      if (key == "variant") out.variant = parse_variant(value);
      if (key == "density_scale") out.density_scale = parse_double(value);
    }
    have_meta = true;
  }
  if (!have_meta) throw ArgumentError("node file lacks the '# seed=..' header");
  const auto header = split(line, ',');
  if (header.size() < 2 || header.back() != "density") throw ArgumentError("node file header must end in 'density'");
  out.dim = static_cast<int>(header.size() - 1);
  while (std::getline(is, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) throw ArgumentError("node row has the wrong number of columns: " + line);
    for (int c = 0; c < out.dim; ++c) out.points.push_back(parse_double(cells[c]));
    out.density.push_back(parse_double(cells.back()));
  }
  return out;
}

Json operator_to_json(const RecoveryOperator& op, const std::string& node_file) {
  Json j;
  j["model"] = model_to_json(op.model());
  j["m"] = op.m();
  j["node_file"] = node_file;
  j["nodes"] = op.nodes().size();
  j["weighted"] = op.weighted();
  j["rank_ok"] = op.rank_ok();
  j["rank"] = op.rank();
  j["sigma_min"] = op.sigma_min();
  j["sigma_max"] = op.sigma_max();
  j["residual_norm"] = op.residual_norm();
  Json coef = Json::array();
  for (Eigen::Index k = 0; k < op.coefficients().size(); ++k) {
    coef.push_back({op.coefficients()(k).real(), op.coefficients()(k).imag()});
  }
  j["coefficients"] = std::move(coef);
  return j;
}

void write_certificate_csv(std::ostream& os, const SpectralModel& model, const ErrorCertificate& cert) {
  if (cert.values.size() != cert.grid.size()) throw ArgumentError("certificate was built without keep_values");
  const auto points = grid_points(model, cert.grid);
  const auto d = static_cast<std::size_t>(model.dim());
  for (std::size_t c = 0; c < d; ++c) os << "x_" << c + 1 << ',';
  os << "e,slack\n";
  for (std::size_t i = 0; i < cert.values.size(); ++i) {
    for (std::size_t c = 0; c < d; ++c) os << format_double(points[i * d + c]) << ',';
    os << format_double(cert.values[i]) << ',' << format_double(cert.slacks[i]) << '\n';
  }
}

Json certificate_to_json(const ErrorCertificate& cert) {
  Json j;
  j["sup"] = cert.sup_value;
  j["upper"] = cert.upper();
  j["argmax"] = cert.argmax;
  j["argmax_index"] = cert.argmax_index;
  j["truncation_slack"] = cert.truncation_slack;
  j["tail_bound"] = cert.tail_bound;
  j["truncation_rank"] = cert.truncation_rank;
  j["route"] = cert.route == CertifyRoute::spectral ? "spectral" : "gram";
  j["grid"] = cert.grid.counts;
  if (cert.route == CertifyRoute::gram) {
    j["min_raw_square"] = cert.min_raw_square;
    j["roundoff_violations"] = cert.roundoff_violations;
  }
  return j;
}

Json subsample_to_json(const SubsampleResult& result) {
  Json j;
  j["indices"] = result.indices;
  j["size"] = result.indices.size();
  j["budget"] = result.budget;
  j["achieved"] = {{"lower", result.achieved.lower}, {"upper", result.achieved.upper}};
  const auto& c = result.constants;
  j["constants"] = {{"k1", c.k1}, {"k2", c.k2}, {"k3", c.k3}, {"C1", c.C1},
                    {"C2", c.C2}, {"C3", c.C3}, {"large_oversampling", c.large_oversampling}};
  return j;
}

Json bound_report_to_json(const BoundReport& report) {
  auto named = [](const NamedValues& values) {
    Json j = Json::object();
    for (const auto& [k, v] : values) j[k] = v;
    return j;
  };
  Json j;
  j["name"] = report.name;
  j["value"] = report.value;
  j["truncation_slack"] = report.truncation_slack;
  j["constants"] = named(report.constants);
  j["inputs"] = named(report.inputs);
  j["branches"] = named(report.branches);
  return j;
}

void write_bounds_csv(std::ostream& os, const std::vector<BoundReport>& reports) {
  os << "name,value,truncation_slack,constants,inputs\n";
  for (const auto& r : reports) {
    os << r.name << ',' << format_double(r.value) << ',' << format_double(r.truncation_slack) << ','
       << joined(r.constants) << ',' << joined(r.inputs) << '\n';
  }
}

void write_christoffel_csv(std::ostream& os, const std::vector<ChristoffelRow>& rows) {
  os << "m,N(m),projection_error_sup,tail_bound_rhs\n";
  for (const auto& r : rows) {
    os << r.m << ',' << format_double(r.christoffel) << ',' << format_double(r.projection_error_sup) << ','
       << format_double(r.tail_bound_rhs) << '\n';
  }
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ArgumentError("CSV has no column '" + name + "'");
}

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  while (std::getline(is, line)) {
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    if (t.header.empty()) {
      t.header = split(line, ',');
      continue;
    }
    auto cells = split(line, ',');
    if (cells.size() != t.header.size()) throw ArgumentError("CSV row has the wrong number of columns: " + line);
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) throw ArgumentError("CSV input is empty");
  return t;
}

}  // namespace wlsq
