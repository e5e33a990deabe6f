#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "npspec/geometry.hpp"
#include "npspec/mesh.hpp"
#include "npspec/resolvent.hpp"

namespace npspec {

/// Generator name plus named parameters.
///   ellipse            a, b
///   superellipse       r, k
///   rectangle          r
///   triangle           s1, s2
///   disks              a, theta0
///   perturbed_ellipse  r, theta_c, w
struct DomainSpec {
  std::string generator = "ellipse";
  std::map<std::string, double> params;

  BoundaryCurve build() const;
  bool operator==(const DomainSpec&) const = default;
};

struct TGrid {
  double min = -0.45;
  double max = 0.45;
  int count = 91;
  std::vector<double> values() const;
  bool operator==(const TGrid&) const = default;
};

/// A domain parameter stepped over [min, max] (eigs only); count 0 disables.
struct ParamFamily {
  std::string param;
  double min = 0.0;
  double max = 0.0;
  int count = 0;
  std::vector<double> values() const;
  bool operator==(const ParamFamily&) const = default;
};

struct SourceSpec {
  double radius = 0.0;  // ring radius; 0 disables the ring
  int positions = 16;
  int orientations = 8;
  bool random_orientations = false;
  struct Dipole {
    double zx = 0, zy = 0, dx = 1, dy = 0;
    bool operator==(const Dipole&) const = default;
  };
  std::vector<Dipole> dipoles;  // explicit sources, appended after the ring

  std::vector<DipoleSource> build(std::uint64_t seed) const;
  bool operator==(const SourceSpec&) const = default;
};

struct RunConfig {
  std::string name = "run";
  DomainSpec domain;
  int nodes_per_panel = 16;
  int panels = 0;          // coarse panels per arc, 0 = adaptive
  int corner_levels = 60;  // dyadic levels per corner side (brute force and truncated compression)
  bool include_closest_panel = true;
  std::vector<double> deltas{1e-4, 1e-6, 1e-8, 1e-10};
  TGrid t_grid;
  SourceSpec sources;
  std::string solver = "compressed";
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  int jobs = 1;
  int eig_count = 20;
  ParamFamily family;
  bool refine_peaks = true;
  int rate_rungs = 3;
  Thresholds thresholds;

  /// Mesh settings, with source positions added as refinement points.
  MeshConfig mesh_config() const;
  void validate() const;
  bool operator==(const RunConfig&) const;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& cfg);

}  // namespace npspec
