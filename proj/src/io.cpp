#include "npspec/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace npspec::io {

using nlohmann::json;

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

Csv::Csv(std::vector<std::string> header) : cols_(header.size()) { row(header); }

Csv& Csv::row(const std::vector<std::string>& fields) {
  if (fields.size() != cols_) throw ContractError("CSV row has the wrong number of fields");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) text_ += ',';
    text_ += csv_field(fields[i]);
  }
  text_ += "\r\n";
  return *this;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> cur;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = any = true;
    } else if (c == ',') {
      cur.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      cur.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(cur));
      cur.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw ContractError("unterminated quoted CSV field");
  if (any) {
    cur.push_back(std::move(field));
    rows.push_back(std::move(cur));
  }
  return rows;
}

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
  if (!out) throw Error("write to '" + path + "' failed");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Clean: return "clean";
    case RunStatus::Partial: return "partial";
    case RunStatus::Failed: return "failed";
  }
  return "failed";
}

RunStatus status_of(const IndicatorProfile& p) {
  std::size_t ok = 0;
  for (const SpectralSample& s : p.samples) ok += s.ok ? 1 : 0;
  if (ok == 0) return RunStatus::Failed;
  return p.failures.empty() ? RunStatus::Clean : RunStatus::Partial;
}

std::string profile_csv(const IndicatorProfile& p) {
  Csv csv({"t", "delta", "source_id", "norm_star", "alpha", "cond"});
  for (const SpectralSample& s : p.samples)
    csv.row({fmt(s.t), fmt(s.delta), std::to_string(s.source_id), fmt(s.norm_star), fmt(s.alpha), fmt(s.cond)});
  return csv.text();
}

std::string alpha_plot_csv(const IndicatorProfile& p) {
  Csv csv({"t", "alpha_sharp", "alpha_rate", "refined"});
  for (std::size_t i = 0; i < p.t.size(); ++i)
    csv.row({fmt(p.t[i]), fmt(p.alpha_sharp[i]), fmt(p.alpha_rate[i]), p.refined[i] ? "1" : "0"});
  return csv.text();
}

std::string energy_plot_csv(const IndicatorProfile& p) {
  Csv csv({"t", "delta", "energy"});
  for (std::size_t ti = 0; ti < p.t.size(); ++ti)
    for (std::size_t di = 0; di < p.deltas.size(); ++di) {
      double best = std::nan("");
      for (std::size_t si = 0; si < p.sources.size(); ++si) {
        const SpectralSample& s = p.at(ti, di, si);
        if (!s.ok) continue;
        const double e = s.delta * s.norm_star * s.norm_star;
        if (!(e <= best)) best = e;
      }
      csv.row({fmt(p.t[ti]), fmt(p.deltas[di]), fmt(best)});
    }
  return csv.text();
}

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json claim_json(const Claim& c) {
  json ladder = json::array();
  for (const LadderRow& r : c.evidence)
    ladder.push_back({{"delta", num(r.delta)}, {"norm_star", num(r.norm_star)}, {"alpha", num(r.alpha)}});
  return {{"t", num(c.t)}, {"alpha", num(c.alpha)}, {"source_id", c.source_id}, {"ladder", ladder}};
}

}  // namespace

std::string report_json(const RunConfig& cfg, const IndicatorProfile& p, const SpectrumReport& r,
                        const RunInfo& info) {
  json j;
  j["name"] = cfg.name;
  j["generated_at"] = info.timestamp;
  j["status"] = to_string(status_of(p));
  j["config"] = json::parse(serialize_config(cfg));
  j["mesh"] = {{"nodes", info.mesh_nodes}, {"graded_nodes", info.graded_nodes}, {"solver", cfg.solver}};
  j["essential_bound"] = num(info.essential_bound);
  j["symmetry_defect"] = num(info.symmetry_defect);
  j["seconds"] = info.seconds;
  j["deltas"] = p.deltas;
  j["t_count"] = p.t.size();
  j["source_count"] = p.sources.size();

  json bands = json::array();
  for (const Band& b : r.bands) {
    json ev = json::array();
    for (const Claim& c : b.evidence) ev.push_back(claim_json(c));
    bands.push_back({{"lo", num(b.lo)}, {"hi", num(b.hi)}, {"evidence", ev}});
  }
  j["bands"] = bands;
  json eig = json::array(), emb = json::array(), unc = json::array();
  for (const Claim& c : r.eigenvalues) eig.push_back(claim_json(c));
  for (const Claim& c : r.embedded) emb.push_back(claim_json(c));
  for (const Unclassified& u : r.unclassified) unc.push_back({{"t", num(u.t)}, {"alpha", num(u.alpha)}, {"reason", u.reason}});
  j["eigenvalues"] = eig;
  j["embedded_resonances"] = emb;
  j["unclassified"] = unc;
  j["resolvent_cells"] = r.resolvent_cells;

  json fails = json::array();
  for (const CellFailure& f : p.failures) fails.push_back({{"t", num(f.t)}, {"delta", num(f.delta)}, {"message", f.message}});
  j["failures"] = fails;
  return j.dump(2) + "\n";
}

std::string eigenvalues_csv(const std::vector<EigenRow>& rows) {
  Csv csv({"param", "n", "eigenvalue", "oracle", "abs_error"});
  for (const EigenRow& e : rows) {
    const bool has = std::isfinite(e.oracle);
    csv.row({fmt(e.param), std::to_string(e.n), fmt(e.value), has ? fmt(e.oracle) : "",
             has ? fmt(std::abs(e.value - e.oracle)) : ""});
  }
  return csv.text();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

constexpr char kMagic[8] = {'N', 'P', 'S', 'P', 'E', 'C', 'M', 'X'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw Error("truncated matrix file");
  return v;
}

}  // namespace

void dump_matrix_csv(const std::string& path, const CMatrix& m, bool complex_values) {
  std::string s = "# npspec-matrix rows=" + std::to_string(m.rows()) + " cols=" + std::to_string(m.cols()) +
                  " type=" + (complex_values ? "complex" : "real") + " order=row-major\r\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      if (k) s += ',';
      s += fmt(m(i, k).real());
      if (complex_values) s += ',' + fmt(m(i, k).imag());
    }
    s += "\r\n";
  }
  write_file(path, s);
}

void dump_matrix_binary(const std::string& path, const CMatrix& m, bool complex_values) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, complex_values ? 1u : 0u);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      put<double>(out, m(i, k).real());
      if (complex_values) put<double>(out, m(i, k).imag());
    }
  if (!out) throw Error("write to '" + path + "' failed");
}

void dump_matrix(const std::string& path, const CMatrix& m, bool complex_values) {
  if (std::filesystem::path(path).extension() == ".csv")
    dump_matrix_csv(path, m, complex_values);
  else
    dump_matrix_binary(path, m, complex_values);
}

CMatrix read_matrix_binary(const std::string& path, bool* complex_values) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw Error("not an npspec matrix file");
  if (get<std::uint32_t>(in) != kVersion) throw Error("unsupported matrix file version");
  const bool cx = get<std::uint32_t>(in) != 0;
  const auto rows = static_cast<Eigen::Index>(get<std::uint64_t>(in));
  const auto cols = static_cast<Eigen::Index>(get<std::uint64_t>(in));
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < cols; ++k) {
      const double re = get<double>(in);
      m(i, k) = cplx(re, cx ? get<double>(in) : 0.0);
    }
  if (complex_values) *complex_values = cx;
  return m;
}

CMatrix read_matrix_csv(const std::string& path, bool* complex_values) {
  const std::string text = read_file(path);
  const std::size_t eol = text.find('\n');
  const std::string head = text.substr(0, eol);
  long rows = -1, cols = -1;
  char type[16] = {};
  if (std::sscanf(head.c_str(), "# npspec-matrix rows=%ld cols=%ld type=%15s", &rows, &cols, type) != 3)
    throw Error("missing npspec-matrix header in '" + path + "'");
  const bool cx = std::strcmp(type, "complex") == 0;
  auto body = parse_csv(eol == std::string::npos ? std::string() : text.substr(eol + 1));
  if (static_cast<long>(body.size()) != rows) throw Error("matrix CSV row count does not match its header");
  CMatrix m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    const auto& r = body[static_cast<std::size_t>(i)];
    if (static_cast<long>(r.size()) != cols * (cx ? 2 : 1)) throw Error("matrix CSV column count does not match");
    for (long k = 0; k < cols; ++k)
      m(i, k) = cx ? cplx(std::stod(r[2 * k]), std::stod(r[2 * k + 1])) : cplx(std::stod(r[k]), 0.0);
  }
  if (complex_values) *complex_values = cx;
  return m;
}

}  // namespace npspec::io
