#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "npspec/config.hpp"
#include "npspec/resolvent.hpp"

namespace npspec::io {

/// %.17g, with nan / inf / -inf spelled out.
std::string fmt(double v);
/// Quotes a CSV field when it holds a comma, quote, CR or LF.
std::string csv_field(const std::string& s);

/// Row-oriented CSV text with CRLF line endings.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header);
  Csv& row(const std::vector<std::string>& fields);
  const std::string& text() const { return text_; }
  std::size_t columns() const { return cols_; }

 private:
  std::string text_;
  std::size_t cols_;
};

/// Parses RFC-4180 text into rows of fields (header included).
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

/// Creates parent directories as needed.
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

enum class RunStatus { Clean = 0, Partial = 1, Failed = 2 };
const char* to_string(RunStatus s);
RunStatus status_of(const IndicatorProfile& p);

/// One row per (t, delta, source): t, delta, source_id, norm_star, alpha, cond.
std::string profile_csv(const IndicatorProfile& p);
/// t, alpha_sharp, alpha_rate, refined
std::string alpha_plot_csv(const IndicatorProfile& p);
/// t, delta, energy: max over sources of delta ||phi||^2 per rung.
std::string energy_plot_csv(const IndicatorProfile& p);

struct RunInfo {
  std::string timestamp;  // ISO 8601, UTC
  std::size_t mesh_nodes = 0;
  std::size_t graded_nodes = 0;
  double essential_bound = 0.0;
  double symmetry_defect = 0.0;  // NaN when the grid has no mirrored points
  double seconds = 0.0;
};

std::string report_json(const RunConfig& cfg, const IndicatorProfile& p, const SpectrumReport& r,
                        const RunInfo& info);

struct EigenRow {
  double param = 0.0;  // family parameter, or 0 for a single domain
  int n = 0;           // 1-based rank by magnitude
  double value = 0.0;
  double oracle = 0.0;  // NaN when no closed form is available
};

/// param, n, eigenvalue, oracle, abs_error (empty oracle fields without a closed form)
std::string eigenvalues_csv(const std::vector<EigenRow>& rows);

std::string utc_timestamp();

// Matrix dumps. Both formats store the matrix row-major.
//
// CSV: first line "# npspec-matrix rows=<m> cols=<n> type=<real|complex> order=row-major",
// then one line per row. Complex entries occupy two fields, re and im.
//
// Binary (little-endian):
//   char[8]   magic "NPSPECMX"
//   uint32    version (1)
//   uint32    1 for complex, 0 for real
//   uint64    rows
//   uint64    cols
//   double[]  entries row by row; complex entries as (re, im) pairs
void dump_matrix_csv(const std::string& path, const CMatrix& m, bool complex_values = true);
void dump_matrix_binary(const std::string& path, const CMatrix& m, bool complex_values = true);
/// Picks the format from the extension: ".csv" or anything else for binary.
void dump_matrix(const std::string& path, const CMatrix& m, bool complex_values = true);
CMatrix read_matrix_binary(const std::string& path, bool* complex_values = nullptr);
CMatrix read_matrix_csv(const std::string& path, bool* complex_values = nullptr);

}  // namespace npspec::io
