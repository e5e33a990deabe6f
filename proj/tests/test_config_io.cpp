#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "doctest.h"
#include "npspec/config.hpp"
#include "npspec/experiments.hpp"
#include "npspec/io.hpp"

using namespace npspec;

namespace {
const char* kRect = R"({
  "name": "r",
  "domain": {"generator": "rectangle", "r": 3},
  "mesh": {"nodes_per_panel": 16, "panels": 4, "corner_levels": 30},
  "deltas": [1e-4, 1e-6],
  "t_grid": {"min": -0.3, "max": 0.3, "count": 7},
  "sources": {"ring": {"radius": 3.6, "positions": 4, "orientations": 2},
              "dipoles": [{"z": [0, 3], "d": [1, 0]}]},
  "solver": "both",
  "seed": 9
})";

std::filesystem::path scratch_dir() {
  auto d = std::filesystem::temp_directory_path() / "npspec_test_config_io";
  std::filesystem::create_directories(d);
  return d;
}
}  // namespace

TEST_CASE("config round trip") {
  RunConfig c = parse_config(kRect);
  CHECK(c.domain.generator == "rectangle");
  CHECK(c.domain.params.at("r") == 3.0);
  CHECK(c.panels == 4);
  CHECK(c.corner_levels == 30);
  CHECK(c.solver == "both");
  CHECK(c.t_grid.values().size() == 7);
  CHECK(c.sources.build(c.seed).size() == 9);
  RunConfig back = parse_config(serialize_config(c));
  CHECK(back == c);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"name": "x"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"domain": {"generator": "rectangle", "r": 2}, "colour": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"domain": {"generator": "blob"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"domain": {"generator": "ellipse", "a": 2}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"domain": {"generator": "ellipse", "a": 2, "b": 1}, "deltas": [1e-4, -1]})"),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_config(R"({"domain": {"generator": "ellipse", "a": 2, "b": 1}, "family": {"param": "c", "min": 1, "max": 2, "count": 3}})"),
      ConfigError);
}

TEST_CASE("number formatting") {
  CHECK(io::fmt(0.1) == "0.10000000000000001");
  CHECK(io::fmt(-2.0) == "-2");
  CHECK(io::fmt(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(io::fmt(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(std::stod(io::fmt(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("csv quoting and parsing") {
  CHECK(io::csv_field("plain") == "plain");
  CHECK(io::csv_field("a,b") == "\"a,b\"");
  CHECK(io::csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  io::Csv csv({"k", "v"});
  csv.row({"x,y", "line\nbreak"}).row({"2", "\"q\""});
  CHECK(csv.text().find("\r\n") != std::string::npos);
  auto rows = io::parse_csv(csv.text());
  REQUIRE(rows.size() == 3);
  CHECK(rows[1][0] == "x,y");
  CHECK(rows[1][1] == "line\nbreak");
  CHECK(rows[2][1] == "\"q\"");
  CHECK_THROWS_AS(csv.row({"only one"}), ContractError);
}

TEST_CASE("matrix dumps round trip") {
  CMatrix m(2, 3);
  m << cplx(1.0, -2.0), cplx(0.1, 0.0), cplx(1e-300, 3.0), cplx(-4.0, 0.5), cplx(0.0, 0.0), cplx(1.0 / 3.0, 7.0);
  const auto dir = scratch_dir();
  for (const char* name : {"m.bin", "m.csv"}) {
    const std::string path = (dir / name).string();
    io::dump_matrix(path, m);
    bool cplx_flag = false;
    CMatrix back = std::string(name).ends_with(".csv") ? io::read_matrix_csv(path, &cplx_flag)
                                                       : io::read_matrix_binary(path, &cplx_flag);
    CHECK(cplx_flag);
    CHECK(back == m);
  }
  const std::string real_path = (dir / "r.csv").string();
  io::dump_matrix(real_path, m.real().cast<cplx>(), false);
  CHECK(io::read_file(real_path).rfind("# npspec-matrix rows=2 cols=3 type=real", 0) == 0);
  bool cplx_flag = true;
  CMatrix back = io::read_matrix_csv(real_path, &cplx_flag);
  CHECK_FALSE(cplx_flag);
  CHECK(back.real() == m.real());
  io::write_file((dir / "bad.bin").string(), "NOTAMTRX");
  CHECK_THROWS(io::read_matrix_binary((dir / "bad.bin").string()));
}

TEST_CASE("run status") {
  IndicatorProfile p;
  CHECK(io::status_of(p) == io::RunStatus::Failed);
  p.samples.push_back({});
  p.samples.back().ok = true;
  CHECK(io::status_of(p) == io::RunStatus::Clean);
  p.failures.push_back({0.0, 1e-10, "singular"});
  CHECK(io::status_of(p) == io::RunStatus::Partial);
  CHECK(std::string(io::to_string(io::RunStatus::Failed)) == "failed");
}

TEST_CASE("matching digits") {
  CHECK(matching_digits(0.4641820097578, 0.4641820097578) == 17);
  CHECK(matching_digits(0.46418, 0.4641820097578) == 5);
  CHECK(matching_digits(1.0, 0.0) == -1);
}

TEST_CASE("table csv") {
  std::vector<TableRow> rows{{"rectangle", 1, 0.0, 0.46440817528139, 0.46440817528139, 17}};
  auto parsed = io::parse_csv(table_csv(rows));
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[1][0] == "rectangle");
}
