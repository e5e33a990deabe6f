#pragma once

#include <memory>
#include <vector>

#include "npspec/geometry.hpp"

namespace npspec {

struct MeshConfig {
  int nodes_per_panel = 16;
  /// Fixed number of coarse panels per arc; 0 selects panels adaptively.
  int panels_per_arc = 0;
  /// Upper bound on coarse panel length; 0 picks perimeter / 24.
  double target_panel_length = 0.0;
  /// Dyadic panels per side of each corner. 0 and 1 both leave the coarse
  /// corner panels unrefined.
  int corner_levels = 60;
  bool include_closest_panel_to_vertex = true;
  /// Points near the curve (e.g. dipole locations) that panels must resolve.
  std::vector<Vec2> refine_points;
  /// Panels near a refine point satisfy length <= refine_ratio * distance.
  double refine_ratio = 1.0;

  void validate() const;
};

/// One Gauss-Legendre panel. Panels inside a corner zone are described by
/// parameter offsets [d0, d1] measured from the vertex, so that a panel of
/// size 2^-60 still carries its full relative precision.
struct Panel {
  std::size_t arc = 0;
  double s0 = 0.0, s1 = 1.0;  // parameter span on the arc
  int corner = -1;            // corner zone this panel belongs to, or -1
  int side = 0;               // -1: arc ends at the corner, +1: arc starts there
  double d0 = 0.0, d1 = 0.0;  // parameter offsets from the vertex (corner panels)
  int level = 0;              // dyadic depth; 0 for coarse panels
};

struct CornerZone {
  int corner = -1;
  std::vector<std::size_t> panels;  // in curve order
  std::vector<std::size_t> nodes;   // in curve order
};

/// Composite Gauss-Legendre discretization of a boundary curve.
class PanelMesh {
 public:
  std::shared_ptr<const BoundaryCurve> curve;
  int nodes_per_panel = 16;
  std::vector<Panel> panels;
  std::vector<CornerZone> corner_zones;

  // node data
  std::vector<Vec2> x;
  std::vector<Vec2> local;   // x minus the anchor vertex (accurate near corners)
  std::vector<int> anchor;   // corner index or -1
  std::vector<Vec2> normal;  // outward unit normal
  std::vector<double> weight;
  std::vector<double> curvature;
  std::vector<double> param;
  std::vector<std::size_t> panel_of;

  std::size_t size() const { return x.size(); }
  /// x_j - x_k, using vertex-relative coordinates when both share an anchor.
  Vec2 delta(std::size_t j, std::size_t k) const {
    if (anchor[j] >= 0 && anchor[j] == anchor[k]) return local[j] - local[k];
    return x[j] - x[k];
  }
  double perimeter() const;
  /// (1/2) sum_j w_j x_j . n_j
  double area() const;
  /// Panel length (sum of its weights).
  double panel_length(std::size_t p) const;
};

/// Arclength from the start of the first panel to every node.
std::vector<double> node_arclength(const PanelMesh& mesh);

PanelMesh build_mesh(const BoundaryCurve& curve, const MeshConfig& cfg);
PanelMesh refine_mesh(const PanelMesh& mesh, int factor);

/// Node data for an explicit list of panels; used for corner-local meshes.
PanelMesh mesh_from_panels(std::shared_ptr<const BoundaryCurve> curve, std::vector<Panel> panels,
                           int nodes_per_panel);

}  // namespace npspec
