#include "npspec/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

namespace npspec {

using nlohmann::json;

namespace {

const std::map<std::string, std::vector<std::string>>& generator_params() {
  static const std::map<std::string, std::vector<std::string>> g{
      {"ellipse", {"a", "b"}},
      {"superellipse", {"r", "k"}},
      {"rectangle", {"r"}},
      {"triangle", {"s1", "s2"}},
      {"disks", {"a", "theta0"}},
      {"perturbed_ellipse", {"r", "theta_c", "w"}},
  };
  return g;
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

Vec2 read_pair(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(std::string(what) + " must be a two-element array");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

BoundaryCurve DomainSpec::build() const {
  auto it = generator_params().find(generator);
  if (it == generator_params().end()) throw ConfigError("unknown domain generator '" + generator + "'");
  for (const auto& [k, v] : params) {
    (void)v;
    if (std::find(it->second.begin(), it->second.end(), k) == it->second.end())
      throw ConfigError("generator '" + generator + "' takes no parameter '" + k + "'");
  }
  auto p = [&](const char* k) {
    auto f = params.find(k);
    if (f == params.end()) throw ConfigError("generator '" + generator + "' needs parameter '" + k + "'");
    return f->second;
  };
  if (generator == "ellipse") return make_ellipse(p("a"), p("b"));
  if (generator == "superellipse") return make_superellipse(p("r"), p("k"));
  if (generator == "rectangle") return make_rectangle(p("r"));
  if (generator == "triangle") return make_isosceles_triangle(p("s1"), p("s2"));
  if (generator == "disks") return make_intersecting_disks(p("a"), p("theta0"));
  return make_perturbed_ellipse(p("r"), p("theta_c"), p("w"));
}

std::vector<double> TGrid::values() const {
  if (count < 1) throw ConfigError("t grid needs count >= 1");
  if (count == 1) return {min};
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    // symmetric rounding so that mirrored grids contain exact negatives
    const double s = static_cast<double>(2 * i - (count - 1)) / (count - 1);
    v[static_cast<std::size_t>(i)] = 0.5 * (max + min) + 0.5 * (max - min) * s;
  }
  return v;
}

std::vector<double> ParamFamily::values() const {
  if (count <= 0) return {};
  if (count == 1) return {min};
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = min + (max - min) * i / (count - 1);
  v.back() = max;
  return v;
}

std::vector<DipoleSource> SourceSpec::build(std::uint64_t seed) const {
  std::vector<DipoleSource> out;
  if (radius > 0.0)
    out = random_orientations ? source_ring_random(radius, positions, orientations, seed)
                              : source_ring(radius, positions, orientations);
  int id = static_cast<int>(out.size());
  for (const Dipole& d : dipoles) {
    Vec2 dir{d.dx, d.dy};
    if (!(norm(dir) > 0.0)) throw ConfigError("dipole direction must be nonzero");
    out.push_back({id++, {d.zx, d.zy}, normalized(dir)});
  }
  if (out.empty()) throw ConfigError("no sources configured");
  return out;
}

MeshConfig RunConfig::mesh_config() const {
  MeshConfig m;
  m.nodes_per_panel = nodes_per_panel;
  m.panels_per_arc = panels;
  m.corner_levels = corner_levels;
  m.include_closest_panel_to_vertex = include_closest_panel;
  if (sources.radius > 0.0)
    for (int p = 0; p < sources.positions; ++p) {
      const double a = 2.0 * kPi * p / sources.positions;
      m.refine_points.push_back({sources.radius * std::cos(a), sources.radius * std::sin(a)});
    }
  for (const auto& d : sources.dipoles) m.refine_points.push_back({d.zx, d.zy});
  return m;
}

void RunConfig::validate() const {
  mesh_config().validate();
  if (deltas.empty()) throw ConfigError("delta ladder is empty");
  for (double d : deltas)
    if (!(d > 0.0 && d < 1.0)) throw ConfigError("deltas must lie in (0, 1)");
  if (t_grid.count < 1) throw ConfigError("t grid needs count >= 1");
  if (!(t_grid.min > -0.5 && t_grid.max < 0.5 && t_grid.min <= t_grid.max))
    throw ConfigError("t grid must lie strictly inside (-1/2, 1/2)");
  if (sources.radius < 0.0 || sources.positions < 1 || sources.orientations < 1)
    throw ConfigError("source ring needs radius >= 0 and positive counts");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (eig_count < 0) throw ConfigError("eigs must be >= 0");
  solver_kind_from(solver);
  if (family.count > 0) {
    if (!domain.params.count(family.param))
      throw ConfigError("family parameter '" + family.param + "' is not a parameter of the domain");
    if (!(family.min <= family.max)) throw ConfigError("family needs min <= max");
  }
  BoundaryCurve c = domain.build();
  if (sources.radius > 0.0 && !(sources.radius > c.max_radius()))
    throw ConfigError("source ring does not enclose the domain");
}

bool RunConfig::operator==(const RunConfig& o) const {
  auto th = [](const Thresholds& t) {
    return std::tuple(t.pure_point, t.continuous_lo, t.continuous_hi, t.resolvent, t.isolation, t.zero_window_cells);
  };
  return name == o.name && domain == o.domain && nodes_per_panel == o.nodes_per_panel && panels == o.panels &&
         corner_levels == o.corner_levels && include_closest_panel == o.include_closest_panel && deltas == o.deltas &&
         t_grid == o.t_grid && sources == o.sources && solver == o.solver && out_dir == o.out_dir && seed == o.seed &&
         jobs == o.jobs && eig_count == o.eig_count && family == o.family && refine_peaks == o.refine_peaks && rate_rungs == o.rate_rungs &&
         th(thresholds) == th(o.thresholds);
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j, {"name", "domain", "mesh", "deltas", "t_grid", "sources", "solver", "out", "seed", "jobs", "eigs",
                     "family", "refine_peaks", "rate_rungs", "thresholds"},
                 "config");
  RunConfig c;
  read(j, "name", c.name);
  if (!j.contains("domain")) throw ConfigError("config needs a domain");
  {
    const json& d = j.at("domain");
    if (!d.is_object() || !d.contains("generator")) throw ConfigError("domain needs a generator");
    c.domain.generator = d.at("generator").get<std::string>();
    for (auto it = d.begin(); it != d.end(); ++it) {
      if (it.key() == "generator") continue;
      if (!it.value().is_number()) throw ConfigError("domain parameter '" + it.key() + "' must be a number");
      c.domain.params[it.key()] = it.value().get<double>();
    }
  }
  if (j.contains("mesh")) {
    const json& m = j.at("mesh");
    reject_unknown(m, {"nodes_per_panel", "panels", "corner_levels", "include_closest_panel"}, "mesh");
    read(m, "nodes_per_panel", c.nodes_per_panel);
    read(m, "panels", c.panels);
    read(m, "corner_levels", c.corner_levels);
    read(m, "include_closest_panel", c.include_closest_panel);
  }
  read(j, "deltas", c.deltas);
  if (j.contains("t_grid")) {
    const json& t = j.at("t_grid");
    reject_unknown(t, {"min", "max", "count"}, "t_grid");
    read(t, "min", c.t_grid.min);
    read(t, "max", c.t_grid.max);
    read(t, "count", c.t_grid.count);
  }
  if (j.contains("sources")) {
    const json& s = j.at("sources");
    reject_unknown(s, {"ring", "dipoles"}, "sources");
    if (s.contains("ring")) {
      const json& r = s.at("ring");
      reject_unknown(r, {"radius", "positions", "orientations", "random"}, "sources.ring");
      read(r, "radius", c.sources.radius);
      read(r, "positions", c.sources.positions);
      read(r, "orientations", c.sources.orientations);
      read(r, "random", c.sources.random_orientations);
    }
    if (s.contains("dipoles")) {
      for (const json& d : s.at("dipoles")) {
        reject_unknown(d, {"z", "d"}, "sources.dipoles");
        if (!d.contains("z") || !d.contains("d")) throw ConfigError("dipole needs z and d");
        Vec2 z = read_pair(d.at("z"), "z"), dir = read_pair(d.at("d"), "d");
        c.sources.dipoles.push_back({z.x, z.y, dir.x, dir.y});
      }
    }
  }
  read(j, "solver", c.solver);
  read(j, "out", c.out_dir);
  read(j, "seed", c.seed);
  read(j, "jobs", c.jobs);
  read(j, "eigs", c.eig_count);
  if (j.contains("family")) {
    const json& f = j.at("family");
    reject_unknown(f, {"param", "min", "max", "count"}, "family");
    read(f, "param", c.family.param);
    read(f, "min", c.family.min);
    read(f, "max", c.family.max);
    read(f, "count", c.family.count);
  }
  read(j, "refine_peaks", c.refine_peaks);
  read(j, "rate_rungs", c.rate_rungs);
  if (j.contains("thresholds")) {
    const json& t = j.at("thresholds");
    reject_unknown(t, {"pure_point", "continuous_lo", "continuous_hi", "resolvent", "isolation", "zero_window_cells"},
                   "thresholds");
    read(t, "pure_point", c.thresholds.pure_point);
    read(t, "continuous_lo", c.thresholds.continuous_lo);
    read(t, "continuous_hi", c.thresholds.continuous_hi);
    read(t, "resolvent", c.thresholds.resolvent);
    read(t, "isolation", c.thresholds.isolation);
    read(t, "zero_window_cells", c.thresholds.zero_window_cells);
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  json j;
  j["name"] = c.name;
  json d;
  d["generator"] = c.domain.generator;
  for (const auto& [k, v] : c.domain.params) d[k] = v;
  j["domain"] = d;
  j["mesh"] = {{"nodes_per_panel", c.nodes_per_panel},
               {"panels", c.panels},
               {"corner_levels", c.corner_levels},
               {"include_closest_panel", c.include_closest_panel}};
  j["deltas"] = c.deltas;
  j["t_grid"] = {{"min", c.t_grid.min}, {"max", c.t_grid.max}, {"count", c.t_grid.count}};
  json s;
  s["ring"] = {{"radius", c.sources.radius},
               {"positions", c.sources.positions},
               {"orientations", c.sources.orientations},
               {"random", c.sources.random_orientations}};
  json dl = json::array();
  for (const auto& p : c.sources.dipoles) dl.push_back({{"z", {p.zx, p.zy}}, {"d", {p.dx, p.dy}}});
  s["dipoles"] = dl;
  j["sources"] = s;
  j["solver"] = c.solver;
  j["out"] = c.out_dir;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  j["eigs"] = c.eig_count;
  j["family"] = {{"param", c.family.param}, {"min", c.family.min}, {"max", c.family.max}, {"count", c.family.count}};
  j["refine_peaks"] = c.refine_peaks;
  j["rate_rungs"] = c.rate_rungs;
  j["thresholds"] = {{"pure_point", c.thresholds.pure_point},
                     {"continuous_lo", c.thresholds.continuous_lo},
                     {"continuous_hi", c.thresholds.continuous_hi},
                     {"resolvent", c.thresholds.resolvent},
                     {"isolation", c.thresholds.isolation},
                     {"zero_window_cells", c.thresholds.zero_window_cells}};
  return j.dump(2) + "\n";
}

}  // namespace npspec
