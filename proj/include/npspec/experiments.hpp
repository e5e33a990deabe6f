#pragma once

#include <string>
#include <vector>

#include "npspec/config.hpp"
#include "npspec/io.hpp"
#include "npspec/resolvent.hpp"

// Drivers shared by the command line tool and the acceptance suite.
namespace npspec {

struct SweepRun {
  IndicatorProfile profile;
  SpectrumReport report;
  io::RunInfo info;
};

SweepRun run_sweep(const RunConfig& cfg);

/// Writes profile.csv, report.json and plotdata/{alpha,energy}.csv under `dir`.
io::RunStatus write_sweep(const RunConfig& cfg, const SweepRun& run, const std::string& dir);

/// Largest nontrivial eigenvalues of the configured domain, or of every
/// member of cfg.family. Ellipses carry the closed-form value nearest to
/// each computed eigenvalue. Values below 1e-14 in magnitude are dropped.
std::vector<io::EigenRow> run_eigs(const RunConfig& cfg);

/// floor(-log10 |c - r| / |r|), capped at 17; -1 when r is 0.
int matching_digits(double computed, double reference);

struct TableRow {
  std::string column;  // which table column the row belongs to
  int n = 0;           // row index within the column (eigenvalue rank)
  double key = 0.0;    // t for energy tables
  double computed = 0.0;
  double reference = 0.0;
  int digits = 0;
};

std::string table_csv(const std::vector<TableRow>& rows);

/// delta ||phi||_*^2 for the dipole at (3, 2), d = (1, 1)/sqrt 2, on the
/// union of two disks of radius 2 with exterior corner angle pi / 2.
std::vector<TableRow> table1(const MeshConfig& mesh = {}, double delta = 1e-10);

/// Reference delta ||phi||^2 values of table1 at t = -0.3, -0.2, -0.1, 0.1, 0.2, 0.3.
const std::vector<std::pair<double, double>>& table1_reference();

/// Largest eigenvalues of the superellipse |x/30|^10 + |y|^10 = 1.
std::vector<TableRow> table2_superellipse(const MeshConfig& mesh = {});
/// Largest eigenvalues of the unit-area rectangle with aspect ratio 30 from
/// the resonance sweep configured in `rect`, matched to the reference list.
std::vector<TableRow> table2_rectangle(const RunConfig& rect, SweepRun* run = nullptr);

const std::vector<double>& table2_superellipse_reference();  // k = 10, n = 1..8
const std::vector<double>& table2_rectangle_reference();     // n = 1..7

}  // namespace npspec
