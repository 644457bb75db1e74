#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "wlsq/bounds.hpp"
#include "wlsq/certify.hpp"
#include "wlsq/recover.hpp"
#include "wlsq/sampler.hpp"
#include "wlsq/spectral.hpp"
#include "wlsq/subsample.hpp"

namespace wlsq {

using Json = nlohmann::ordered_json;

/// Round-trip formatting (%.17g).
std::string format_double(double v);

/// {"basis": "trig_sharp" | "trig_plus" | "legendre", "s": ..., "d": ...}; d defaults to 1.
SpectralModel model_from_json(const Json& j);
Json model_to_json(const SpectralModel& model);

/// Columns rank,index,sigma; index is the frequency with coordinates joined by ';'.
void write_spectrum_csv(std::ostream& os, const RankedSpectrum& spectrum);

/// Comment header "# seed=..,m=..,variant=..,density_scale=..", then x_1..x_d,density.
void write_nodes_csv(std::ostream& os, const NodeSet& nodes);
NodeSet read_nodes_csv(std::istream& is);

Json operator_to_json(const RecoveryOperator& op, const std::string& node_file);

/// Columns x_1..x_d,e,slack; needs a certificate built with keep_values.
void write_certificate_csv(std::ostream& os, const SpectralModel& model, const ErrorCertificate& cert);
Json certificate_to_json(const ErrorCertificate& cert);

Json subsample_to_json(const SubsampleResult& result);

Json bound_report_to_json(const BoundReport& report);
/// Columns name,value,truncation_slack,constants,inputs; the last two as k=v joined by ';'.
void write_bounds_csv(std::ostream& os, const std::vector<BoundReport>& reports);

struct ChristoffelRow {
  std::size_t m = 0;
  double christoffel = 0.0;
  double projection_error_sup = 0.0;
  double tail_bound_rhs = 0.0;
};
/// Columns m,N(m),projection_error_sup,tail_bound_rhs.
void write_christoffel_csv(std::ostream& os, const std::vector<ChristoffelRow>& rows);

/// Minimal CSV reader for the files written here: header row, comma-separated,
/// no quoting; lines starting with '#' are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t column(const std::string& name) const;
};
CsvTable read_csv(std::istream& is);

}  // namespace wlsq
