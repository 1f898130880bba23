#pragma once

// Experiment runner: JSON scenario configs with strict schema checking,
// built-in scenarios, the analysis pipeline (traces, on-front limits,
// spectra, far fields, weight suite), direction datasets, and convergence
// studies. All outputs are CSV files with JSON sidecars under
// out/<scenario>/<analysis>/.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pwlab/carleman.hpp"
#include "pwlab/common.hpp"
#include "pwlab/csv.hpp"
#include "pwlab/fields.hpp"
#include "pwlab/geometry.hpp"
#include "pwlab/mollifier.hpp"
#include "pwlab/pwe.hpp"
#include "pwlab/scattering.hpp"
#include "pwlab/traces.hpp"
#include "pwlab/wavesolver.hpp"

namespace pwlab {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersionString = "pwlab 1.0.0";

struct CarlemanParams {
  double lambda_w = 1.0;
  double T = 7.5;
  std::vector<double> vartheta;  // empty: (2, 0, ...) of dimension n
  std::vector<double> sigmas{0.0, 1.0, 2.0, 5.0, 10.0, 20.0};
  std::vector<double> ratio_sigmas{2.0, 4.0, 8.0, 16.0, 32.0};
};

struct FarFieldParams {
  std::vector<double> radii{3.0, 4.0};
  double h = 1.0 / 32.0;
  int theta_count = 16;
};

struct Scenario {
  std::string name = "unnamed";
  int n = 2;
  double h = 1.0 / 64.0;
  double extent = 5.0;
  double t_end = 3.0;
  double epsilon_over_h = 4.0;
  std::string incident = "heaviside";  // heaviside | delta | both
  std::vector<Direction> directions;
  std::vector<FieldSpec> potentials;
  std::vector<std::string> analyses;
  std::string compare = "equal";  // equal | distinct: expectation for pair comparisons
  int levels = 3;
  double boundary_step = 0.2;  // angular spacing of trace points
  CarlemanParams carleman;
  FarFieldParams far_field;
  json raw;  // canonical config for hashing/provenance
};

struct Metric {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

struct RunReport {
  std::string scenario;
  std::string hash;
  std::vector<Metric> metrics;
  json provenance;

  bool all_pass() const {
    for (const auto& m : metrics)
      if (!m.pass) return false;
    return true;
  }
  void add(const std::string& name, double value, double tol, bool pass,
           const std::string& note = "") {
    metrics.push_back(Metric{name, value, tol, pass, note});
  }
  void add_leq(const std::string& name, double value, double tol, const std::string& note = "") {
    metrics.push_back(Metric{name, value, tol, value <= tol, note});
  }
};

// ---------------------------------------------------------------------------
// config parsing

namespace detail {

inline void check_keys(const json& obj, const std::set<std::string>& allowed,
                       const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      throw error("unknown key '" + it.key() + "' in " + where);
  }
}

inline cplx parse_amp(const json& j, const std::string& where) {
  if (j.is_number()) return cplx{j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return cplx{j[0].get<double>(), j[1].get<double>()};
  throw error("invalid amplitude in " + where + " (number or [re, im])");
}

inline Vec parse_vec(const json& j, int n, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    throw error("invalid vector in " + where + " (expected " + std::to_string(n) + " numbers)");
  Vec v(n);
  for (int d = 0; d < n; ++d) v[d] = j[static_cast<std::size_t>(d)].get<double>();
  return v;
}

inline FieldSpec parse_potential(const json& j, int n, const FieldSpec* first,
                                 const std::string& where) {
  check_keys(j, {"form", "support_radius", "vector_bumps", "scalar_bumps", "rotational",
                 "gauge_of_first", "gauge_bump"},
             where);
  const std::string form_s = j.value("form", "drift");
  if (form_s != "drift" && form_s != "magnetic")
    throw error("invalid form '" + form_s + "' in " + where);
  const Form form =
      form_s == "drift" ? Form::Drift : Form::Magnetic;

  if (j.value("gauge_of_first", false)) {
    if (!first) throw error("gauge_of_first requires a preceding potential in " + where);
    if (!j.contains("gauge_bump")) throw error("gauge_of_first requires gauge_bump in " + where);
    const json& gb = j.at("gauge_bump");
    check_keys(gb, {"center", "radius", "amp"}, where + ".gauge_bump");
    FieldSpec base = *first;
    if (base.form != Form::Magnetic) base = convert_form(base);
    GaugeFunction f = make_gauge_bump(parse_vec(gb.at("center"), n, where),
                                      gb.at("radius").get<double>(),
                                      cplx{gb.at("amp").get<double>(), 0.0});
    FieldSpec out = gauge_transform(base, f);
    return form == Form::Magnetic ? out : convert_form(out);
  }

  std::vector<Vec> vcenters, scenters;
  std::vector<double> vradii, sradii;
  std::vector<VecC> vamps;
  std::vector<cplx> samps;
  if (j.contains("vector_bumps")) {
    for (const json& b : j.at("vector_bumps")) {
      check_keys(b, {"center", "radius", "amp"}, where + ".vector_bumps");
      vcenters.push_back(parse_vec(b.at("center"), n, where));
      vradii.push_back(b.at("radius").get<double>());
      const json& a = b.at("amp");
      if (!a.is_array() || static_cast<int>(a.size()) != n)
        throw error("invalid vector amplitude in " + where);
      VecC amp(n);
      for (int d = 0; d < n; ++d) amp[d] = parse_amp(a[static_cast<std::size_t>(d)], where);
      vamps.push_back(amp);
    }
  }
  if (j.contains("scalar_bumps")) {
    for (const json& b : j.at("scalar_bumps")) {
      check_keys(b, {"center", "radius", "amp"}, where + ".scalar_bumps");
      scenters.push_back(parse_vec(b.at("center"), n, where));
      sradii.push_back(b.at("radius").get<double>());
      samps.push_back(parse_amp(b.at("amp"), where));
    }
  }

  FieldSpec spec;
  bool have = false;
  if (!vcenters.empty()) {
    spec = make_bump_potential(n, vcenters, vradii, vamps, form);
    have = true;
  }
  if (!scenters.empty()) {
    FieldSpec s = make_bump_potential(n, scenters, sradii, samps, form);
    spec = have ? merge_parts(spec, s) : s;
    have = true;
  }
  if (j.contains("rotational")) {
    for (const json& b : j.at("rotational")) {
      check_keys(b, {"amp", "radius"}, where + ".rotational");
      FieldSpec r = make_rotational_field(n, b.at("amp").get<double>(),
                                          b.at("radius").get<double>(), form);
      spec = have ? merge_parts(spec, r) : r;
      have = true;
    }
  }
  if (!have) {
    spec.form = form;
    spec.n = n;
    spec.support_radius = 0.5;
  }
  return spec;
}

inline std::vector<Direction> axis_directions(int n) {
  std::vector<Direction> out;
  for (int d = 0; d < n; ++d) {
    Vec v = Vec::Zero(n);
    v[d] = 1.0;
    out.push_back(Direction(v));
    out.push_back(Direction(Vec(-v)));
  }
  return out;
}

}  // namespace detail

inline Scenario parse_scenario(const json& cfg) {
  detail::check_keys(cfg,
                     {"schema_version", "name", "n", "h", "extent", "t_end", "epsilon_over_h",
                      "incident", "directions", "potentials", "analyses", "compare", "levels",
                      "boundary_step", "carleman", "far_field"},
                     "config");
  if (!cfg.contains("schema_version")) throw error("config missing schema_version");
  if (cfg.at("schema_version").get<int>() != kSchemaVersion)
    throw error("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");

  Scenario sc;
  sc.raw = cfg;
  sc.name = cfg.value("name", "unnamed");
  sc.n = cfg.value("n", 2);
  if (sc.n < 1 || sc.n > 3) throw error("config n must be 1, 2, or 3");
  sc.h = cfg.value("h", 1.0 / 64.0);
  sc.extent = cfg.value("extent", 5.0);
  sc.t_end = cfg.value("t_end", 3.0);
  sc.epsilon_over_h = cfg.value("epsilon_over_h", 4.0);
  sc.incident = cfg.value("incident", "heaviside");
  if (sc.incident != "heaviside" && sc.incident != "delta" && sc.incident != "both")
    throw error("invalid incident kind '" + sc.incident + "'");
  sc.compare = cfg.value("compare", "equal");
  if (sc.compare != "equal" && sc.compare != "distinct")
    throw error("invalid compare mode '" + sc.compare + "'");
  sc.levels = cfg.value("levels", 3);
  sc.boundary_step = cfg.value("boundary_step", 0.2);

  if (cfg.contains("directions")) {
    const json& dirs = cfg.at("directions");
    if (dirs.is_string() && dirs.get<std::string>() == "axes") {
      sc.directions = detail::axis_directions(sc.n);
    } else if (dirs.is_array()) {
      for (const json& d : dirs)
        sc.directions.push_back(Direction(detail::parse_vec(d, sc.n, "directions")));
    } else {
      throw error("invalid directions (array of unit vectors or \"axes\")");
    }
  } else {
    Vec e1 = Vec::Zero(sc.n);
    e1[0] = 1.0;
    sc.directions.push_back(Direction(e1));
  }

  if (cfg.contains("potentials")) {
    const json& pots = cfg.at("potentials");
    if (!pots.is_array() || pots.empty() || pots.size() > 2)
      throw error("potentials must list one or two entries");
    for (std::size_t i = 0; i < pots.size(); ++i) {
      const FieldSpec* first = sc.potentials.empty() ? nullptr : &sc.potentials.front();
      sc.potentials.push_back(detail::parse_potential(
          pots[i], sc.n, first, "potentials[" + std::to_string(i) + "]"));
    }
  } else {
    FieldSpec empty;
    empty.n = sc.n;
    empty.support_radius = 0.5;
    sc.potentials.push_back(empty);
  }

  if (cfg.contains("analyses")) {
    for (const json& a : cfg.at("analyses")) sc.analyses.push_back(a.get<std::string>());
    const std::set<std::string> known{"trace-compare", "gamma-limit", "fourier",
                                      "far-field", "carleman", "integral-identity",
                                      "derivative-identity"};
    for (const auto& a : sc.analyses)
      if (!known.count(a)) throw error("unknown analysis '" + a + "'");
  }

  if (cfg.contains("carleman")) {
    const json& c = cfg.at("carleman");
    detail::check_keys(c, {"lambda_w", "T", "vartheta", "sigmas", "ratio_sigmas"}, "carleman");
    sc.carleman.lambda_w = c.value("lambda_w", 1.0);
    sc.carleman.T = c.value("T", 7.5);
    if (c.contains("vartheta"))
      sc.carleman.vartheta = c.at("vartheta").get<std::vector<double>>();
    if (c.contains("sigmas")) sc.carleman.sigmas = c.at("sigmas").get<std::vector<double>>();
    if (c.contains("ratio_sigmas"))
      sc.carleman.ratio_sigmas = c.at("ratio_sigmas").get<std::vector<double>>();
  }
  if (cfg.contains("far_field")) {
    const json& f = cfg.at("far_field");
    detail::check_keys(f, {"radii", "h", "theta_count"}, "far_field");
    if (f.contains("radii")) sc.far_field.radii = f.at("radii").get<std::vector<double>>();
    sc.far_field.h = f.value("h", 1.0 / 32.0);
    sc.far_field.theta_count = f.value("theta_count", 16);
  }
  return sc;
}

inline Scenario parse_scenario_text(const std::string& text) {
  json cfg;
  try {
    cfg = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    throw error("config parse error at line " + std::to_string(line) + ": " + e.what());
  }
  return parse_scenario(cfg);
}

// ---------------------------------------------------------------------------
// built-in scenarios

inline const std::map<std::string, std::string>& builtin_scenarios() {
  static const std::map<std::string, std::string> table = {
      {"freespace", R"({
  "schema_version": 1,
  "name": "freespace",
  "n": 2,
  "h": 0.015625,
  "extent": 5.0,
  "t_end": 3.0,
  "incident": "both",
  "potentials": [{"form": "drift"}],
  "analyses": ["gamma-limit", "integral-identity"]
})"},
      {"standard-bump", R"({
  "schema_version": 1,
  "name": "standard-bump",
  "n": 2,
  "h": 0.015625,
  "extent": 5.0,
  "t_end": 3.0,
  "incident": "both",
  "potentials": [{
    "form": "drift",
    "vector_bumps": [{"center": [0.05, -0.05], "radius": 0.65, "amp": [0.3, -0.2]}],
    "scalar_bumps": [{"center": [-0.05, 0.05], "radius": 0.7, "amp": 0.4}]
  }],
  "analyses": ["gamma-limit", "integral-identity", "derivative-identity", "far-field"]
})"},
      {"gauge-pair", R"({
  "schema_version": 1,
  "name": "gauge-pair",
  "n": 2,
  "h": 0.015625,
  "extent": 5.0,
  "t_end": 3.0,
  "incident": "both",
  "potentials": [
    {
      "form": "magnetic",
      "vector_bumps": [{"center": [0.05, 0.1], "radius": 0.45, "amp": [0.25, 0.15]}],
      "scalar_bumps": [{"center": [0.0, -0.1], "radius": 0.45, "amp": 0.3}]
    },
    {
      "form": "magnetic",
      "gauge_of_first": true,
      "gauge_bump": {"center": [-0.05, 0.05], "radius": 0.6, "amp": 0.02}
    }
  ],
  "analyses": ["trace-compare", "far-field"]
})"},
      {"perturbed-q", R"({
  "schema_version": 1,
  "name": "perturbed-q",
  "n": 2,
  "h": 0.015625,
  "extent": 5.0,
  "t_end": 3.0,
  "incident": "both",
  "potentials": [
    {
      "form": "magnetic",
      "vector_bumps": [{"center": [0.05, 0.1], "radius": 0.45, "amp": [0.25, 0.15]}],
      "scalar_bumps": [{"center": [0.0, -0.1], "radius": 0.45, "amp": 0.3}]
    },
    {
      "form": "magnetic",
      "vector_bumps": [{"center": [0.05, 0.1], "radius": 0.45, "amp": [0.25, 0.15]}],
      "scalar_bumps": [{"center": [0.0, -0.1], "radius": 0.45, "amp": 0.3},
                        {"center": [0.1, 0.05], "radius": 0.35, "amp": 0.1}]
    }
  ],
  "compare": "distinct",
  "analyses": ["trace-compare", "far-field"]
})"},
      {"v-decoupling", R"({
  "schema_version": 1,
  "name": "v-decoupling",
  "n": 2,
  "h": 0.015625,
  "extent": 5.0,
  "t_end": 3.0,
  "incident": "heaviside",
  "potentials": [
    {
      "form": "drift",
      "vector_bumps": [{"center": [0.05, -0.05], "radius": 0.65, "amp": [0.3, -0.2]}]
    },
    {
      "form": "drift",
      "vector_bumps": [{"center": [0.05, -0.05], "radius": 0.65, "amp": [0.3, -0.2]}],
      "scalar_bumps": [{"center": [0.0, 0.0], "radius": 0.65, "amp": 1.359140914229522}]
    }
  ],
  "compare": "distinct",
  "analyses": ["gamma-limit", "trace-compare"]
})"},
      {"antisymmetric", R"({
  "schema_version": 1,
  "name": "antisymmetric",
  "n": 2,
  "h": 0.03125,
  "extent": 5.0,
  "t_end": 3.0,
  "incident": "heaviside",
  "directions": "axes",
  "potentials": [
    {"form": "magnetic", "rotational": [{"amp": 0.5, "radius": 0.4}]},
    {"form": "magnetic", "rotational": [{"amp": 0.5, "radius": 0.4}]}
  ],
  "analyses": ["trace-compare"]
})"},
      {"oscillating-w", R"({
  "schema_version": 1,
  "name": "oscillating-w",
  "n": 2,
  "h": 0.015625,
  "extent": 5.0,
  "t_end": 3.0,
  "incident": "both",
  "potentials": [{"form": "drift", "rotational": [{"amp": 0.5, "radius": 0.65}]}],
  "analyses": ["fourier", "derivative-identity", "gamma-limit"]
})"}};
  return table;
}

// Resolve --config values: an existing file path, or a built-in name.
inline Scenario load_scenario(const std::string& config) {
  namespace fs = std::filesystem;
  if (fs::exists(config)) {
    std::ifstream in(config);
    if (!in) throw error("cannot open config: " + config);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario_text(ss.str());
  }
  auto it = builtin_scenarios().find(config);
  if (it == builtin_scenarios().end())
    throw error("config '" + config + "' is neither a file nor a built-in scenario");
  return parse_scenario_text(it->second);
}

// ---------------------------------------------------------------------------
// pipeline pieces

namespace detail {

inline void check_budget(const SimGrid& grid) {
  if (grid.points_per_axis() > 1024)
    throw error("budget exceeded: grid axis has " + std::to_string(grid.points_per_axis()) +
                " points (limit 1024)");
  if (grid.step_count() > 20000)
    throw error("budget exceeded: " + std::to_string(grid.step_count()) +
                " time steps (limit 20000)");
}

inline SimGrid scenario_grid(const Scenario& sc, double h) {
  const double eps = sc.epsilon_over_h * h;
  SimGrid grid(sc.n, h, sc.extent, -1.0 - eps, sc.t_end);
  check_budget(grid);
  return grid;
}

inline std::string dir_label(const Direction& d) {
  // +e1 / -e2 for signed axes, else d0_d1_...
  for (int a = 0; a < d.n(); ++a) {
    Vec e = Vec::Zero(d.n());
    e[a] = 1.0;
    if ((d.vec() - e).norm() < 1e-12) return "+e" + std::to_string(a + 1);
    if ((d.vec() + e).norm() < 1e-12) return "-e" + std::to_string(a + 1);
  }
  std::string s = "dir";
  for (int a = 0; a < d.n(); ++a) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "_%.3f", d.vec()[a]);
    s += buf;
  }
  return s;
}

inline std::string kind_label(IncidentKind k) {
  return k == IncidentKind::Delta ? "delta" : "heaviside";
}

// Bump-only fields hash their canonical serialization; fields with functional
// components (rotational parts, gauge gradients) fall back to the scenario
// source, which fully determines them.
inline std::uint64_t field_hash(const Scenario& sc, std::size_t pot) {
  if (sc.potentials[pot].pure_bumps()) return fnv1a(serialize_field(sc.potentials[pot]));
  return fnv1a(sc.raw.dump() + "#potential" + std::to_string(pot));
}

struct RunKey {
  std::size_t pot = 0;
  std::size_t dir = 0;
  IncidentKind kind = IncidentKind::Heaviside;
  bool operator<(const RunKey& o) const {
    return std::tie(pot, dir, kind) < std::tie(o.pot, o.dir, o.kind);
  }
};

// The on-front limit is probed on a ring threading the support interior: at
// the outer circle the scattered front has focused behind the support and
// the expansion window there needs eps far below desk budgets.
inline constexpr double kGammaRingRadius = 0.3;

// Cache of solver runs shared between analyses of one scenario.
struct RunSet {
  const Scenario& sc;
  SimGrid grid;
  std::vector<BoundaryPoint> points;
  std::vector<BoundaryPoint> ring_points;
  std::map<RunKey, BoundaryTrace> traces;
  std::map<RunKey, BoundaryTrace> ring_traces;

  RunSet(const Scenario& s, double h) : sc(s), grid(scenario_grid(s, h)) {
    points = sample_boundary_circle(s.n, s.boundary_step);
    ring_points = points;
    for (BoundaryPoint& b : ring_points) b.x *= kGammaRingRadius;
  }

  std::vector<IncidentKind> kinds() const {
    if (sc.incident == "both") return {IncidentKind::Heaviside, IncidentKind::Delta};
    if (sc.incident == "delta") return {IncidentKind::Delta};
    return {IncidentKind::Heaviside};
  }

  const BoundaryTrace& trace(std::size_t pot, std::size_t dir, IncidentKind kind) {
    return fetch(traces, points, pot, dir, kind);
  }

  const BoundaryTrace& ring_trace(std::size_t pot, std::size_t dir, IncidentKind kind) {
    return fetch(ring_traces, ring_points, pot, dir, kind);
  }

 private:
  const BoundaryTrace& fetch(std::map<RunKey, BoundaryTrace>& cache,
                             const std::vector<BoundaryPoint>& where, std::size_t pot,
                             std::size_t dir, IncidentKind kind) {
    RunKey key{pot, dir, kind};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    MollifiedIncident inc(kind, sc.epsilon_over_h * grid.h);
    TraceRequest req{where};
    WaveRun wr = run(sc.potentials[pot], sc.directions[dir], inc, grid, req);
    return cache.emplace(key, std::move(wr.trace)).first->second;
  }
};

}  // namespace detail

// tolerance ladder shared by analyses (C fitted once on the scenario suite)
inline double tol_trace(double h, double eps) {
  return std::max(1e-2, 0.5 * (h * h + eps));
}
inline double tol_gauge(double h, double eps) {
  return std::max(1e-3, 0.5 * (h * h + eps) * 0.1);
}

// ---------------------------------------------------------------------------
// analyses

namespace detail {

inline void analysis_gamma_limit(RunSet& rs, const std::filesystem::path& dir,
                                 RunReport& rep) {
  const Scenario& sc = rs.sc;
  const double eps = sc.epsilon_over_h * rs.grid.h;
  const double tol = tol_trace(rs.grid.h, eps);
  const double spacing = 1e-3;
  std::map<std::pair<std::size_t, IncidentKind>, std::vector<cplx>> first_pot;

  for (std::size_t p = 0; p < sc.potentials.size(); ++p) {
    FieldSpec drift = sc.potentials[p].form == Form::Drift
                          ? sc.potentials[p]
                          : convert_form(sc.potentials[p]);
    for (std::size_t d = 0; d < sc.directions.size(); ++d) {
      const Direction& omega = sc.directions[d];
      for (IncidentKind kind : rs.kinds()) {
        const BoundaryTrace& tr = rs.ring_trace(p, d, kind);
        const BoundaryTrace total = kind == IncidentKind::Heaviside ? add_incident(tr) : tr;
        std::vector<cplx> lim = gamma_limit(total);

        double worst = 0.0;
        CsvWriter csv(dir / ("gamma_" + std::to_string(p) + "_" + dir_label(omega) + "_" +
                             kind_label(kind) + ".csv"),
                      {"point_index", "angle1", "angle2", "measured_re", "measured_im",
                       "reference_re", "reference_im", "abs_error"});
        for (std::size_t i = 0; i < rs.ring_points.size(); ++i) {
          cplx ref;
          if (kind == IncidentKind::Heaviside) {
            ref = std::exp(psi_at(drift, omega, rs.ring_points[i].x, spacing));
          } else {
            ref = leading_amplitude_at(drift, omega, rs.ring_points[i].x, spacing);
          }
          const double err = std::abs(lim[i] - ref);
          worst = std::max(worst, err);
          csv.cell(i)
              .cell(rs.ring_points[i].angle1)
              .cell(rs.ring_points[i].angle2)
              .cell(lim[i].real())
              .cell(lim[i].imag())
              .cell(ref.real())
              .cell(ref.imag())
              .cell(err);
          csv.end_row();
        }
        csv.finish();
        json meta;
        meta["omega"] = std::vector<double>(omega.vec().data(), omega.vec().data() + sc.n);
        meta["kind"] = kind_label(kind);
        meta["epsilon"] = eps;
        meta["h"] = rs.grid.h;
        meta["probe_radius"] = kGammaRingRadius;
        write_sidecar(dir / ("gamma_" + std::to_string(p) + "_" + dir_label(omega) + "_" +
                             kind_label(kind) + ".csv"),
                      meta);
        rep.add_leq("gamma_limit/" + std::to_string(p) + "/" + dir_label(omega) + "/" +
                        kind_label(kind),
                    worst, tol);

        // The H-wave on-front limit depends on the potential only through W,
        // so a pair differing in V alone must agree here even when the traces
        // themselves separate.
        if (kind == IncidentKind::Heaviside && sc.potentials.size() == 2) {
          if (p == 0) {
            first_pot[{d, kind}] = lim;
          } else {
            const std::vector<cplx>& base = first_pot.at({d, kind});
            double cross = 0.0;
            for (std::size_t i = 0; i < lim.size(); ++i)
              cross = std::max(cross, std::abs(lim[i] - base[i]));
            rep.add_leq("gamma_v_independence/" + dir_label(omega), cross, tol);
          }
        }
      }
    }
  }
}

// Equal mode gates the discrepancy from above (gauge pairs and other
// data-identical constructions); distinct mode gates it from below, with the
// floor at ten gauge tolerances, so a genuinely perturbed pair cannot hide
// inside the numerical noise of an equivalent one.
inline void analysis_trace_compare(RunSet& rs, const std::filesystem::path& dir,
                                   RunReport& rep, double pass_tol) {
  const Scenario& sc = rs.sc;
  if (sc.potentials.size() != 2) throw error("trace-compare needs two potentials");
  const bool distinct = sc.compare == "distinct";
  const double floor = 10.0 * pass_tol;
  CsvWriter csv(dir / "discrepancy.csv",
                {"direction", "kind", "l2", "linf"});
  for (std::size_t d = 0; d < sc.directions.size(); ++d) {
    for (IncidentKind kind : rs.kinds()) {
      const BoundaryTrace a = comparison_form(rs.trace(0, d, kind));
      const BoundaryTrace b = comparison_form(rs.trace(1, d, kind));
      const double l2 = discrepancy(a, b, TraceNorm::L2);
      const double li = discrepancy(a, b, TraceNorm::Linf);
      csv.cell(dir_label(sc.directions[d])).cell(kind_label(kind)).cell(l2).cell(li);
      csv.end_row();
      const std::string name =
          "trace_discrepancy/" + dir_label(sc.directions[d]) + "/" + kind_label(kind);
      if (distinct) {
        rep.add(name, l2, floor, l2 >= floor, "distinct pair: value must exceed tolerance");
      } else {
        rep.add_leq(name, l2, pass_tol);
      }
    }
  }
  csv.finish();
  json meta;
  meta["norm"] = "masked, normalized";
  meta["compare"] = sc.compare;
  meta["h"] = rs.grid.h;
  write_sidecar(dir / "discrepancy.csv", meta);
}

inline void analysis_integral_identity(RunSet& rs, const std::filesystem::path& dir,
                                       RunReport& rep) {
  const Scenario& sc = rs.sc;
  const double eps = sc.epsilon_over_h * rs.grid.h;
  const double tol = tol_trace(rs.grid.h, eps);
  const double spacing = 1e-3;
  for (std::size_t p = 0; p < sc.potentials.size(); ++p) {
    FieldSpec drift = sc.potentials[p].form == Form::Drift
                          ? sc.potentials[p]
                          : convert_form(sc.potentials[p]);
    for (std::size_t d = 0; d < sc.directions.size(); ++d) {
      const BoundaryTrace& th = rs.trace(p, d, IncidentKind::Heaviside);
      const BoundaryTrace& td = rs.trace(p, d, IncidentKind::Delta);
      std::vector<cplx> psi(rs.points.size());
      for (std::size_t i = 0; i < rs.points.size(); ++i)
        psi[i] = psi_at(drift, sc.directions[d], rs.points[i].x, spacing);
      const double resid = integral_identity_residual(th, td, psi);
      rep.add_leq(
          "integral_identity/" + std::to_string(p) + "/" + dir_label(sc.directions[d]), resid,
          tol);
      CsvWriter csv(dir / ("residual_" + std::to_string(p) + "_" +
                           dir_label(sc.directions[d]) + ".csv"),
                    {"max_residual"});
      csv.cell(resid);
      csv.end_row();
      csv.finish();
    }
  }
}

// The delta trace integrated in time must reproduce the Heaviside trace
// sample by sample. Tested in integrated form: pointwise time derivatives
// amplify the mollified layer, while the running integral is uniformly
// second order. Relative sup over all samples.
inline double derivative_identity_error(const BoundaryTrace& th, const BoundaryTrace& td) {
  if (!th.same_sampling(td)) throw error("sampling mismatch");
  double worst = 0.0, scale = 0.0;
  std::vector<cplx> row(static_cast<std::size_t>(td.samples));
  std::vector<cplx> cum(static_cast<std::size_t>(td.samples));
  for (std::size_t p = 0; p < th.points.size(); ++p) {
    for (int k = 0; k < td.samples; ++k) row[static_cast<std::size_t>(k)] = td.value(p, k);
    cumulative_simpson<cplx>(row, td.dt, cum);
    for (int k = 0; k < th.samples; ++k) {
      worst = std::max(worst, std::abs(th.value(p, k) - cum[static_cast<std::size_t>(k)]));
      scale = std::max(scale, std::abs(th.value(p, k)));
    }
  }
  return worst / std::max(scale, 1e-14);
}

inline void analysis_derivative_identity(RunSet& rs, const std::filesystem::path& dir,
                                         RunReport& rep) {
  const Scenario& sc = rs.sc;
  const double eps = sc.epsilon_over_h * rs.grid.h;
  const double tol = std::max(5e-3, 0.5 * (rs.grid.h * rs.grid.h + eps * eps));
  CsvWriter csv(dir / "derivative_identity.csv", {"potential", "direction", "rel_l2"});
  for (std::size_t p = 0; p < sc.potentials.size(); ++p) {
    for (std::size_t d = 0; d < sc.directions.size(); ++d) {
      const double err = derivative_identity_error(rs.trace(p, d, IncidentKind::Heaviside),
                                                   rs.trace(p, d, IncidentKind::Delta));
      csv.cell(p).cell(dir_label(sc.directions[d])).cell(err);
      csv.end_row();
      rep.add_leq("derivative_identity/" + std::to_string(p) + "/" +
                      dir_label(sc.directions[d]),
                  err, tol);
    }
  }
  csv.finish();
}

// frequency side: spectrum_delta = (-i lambda) spectrum_heaviside, up to the
// taper term the finite window exchanges for the boundary contribution.
inline void analysis_fourier(RunSet& rs, const std::filesystem::path& dir, RunReport& rep) {
  const Scenario& sc = rs.sc;
  std::vector<double> freqs = default_freq_grid();
  for (std::size_t p = 0; p < sc.potentials.size(); ++p) {
    for (std::size_t d = 0; d < sc.directions.size(); ++d) {
      SpectralTrace sh = fourier_trace(rs.trace(p, d, IncidentKind::Heaviside), freqs);
      SpectralTrace sd = fourier_trace(rs.trace(p, d, IncidentKind::Delta), freqs);
      SpectralTrace corr = taper_correction(rs.trace(p, d, IncidentKind::Heaviside), freqs);
      double worst = 0.0;
      CsvWriter fcsv(dir / ("fourier_identity_" + std::to_string(p) + "_" +
                            dir_label(sc.directions[d]) + ".csv"),
                     {"lambda", "rel_error"});
      for (std::size_t f = 0; f < freqs.size(); ++f) {
        std::vector<double> diff2, ref2;
        for (std::size_t i = 0; i < rs.points.size(); ++i) {
          const cplx lhs = sd.value(i, f);
          const cplx rhs = cplx{0.0, -freqs[f]} * sh.value(i, f) - corr.value(i, f);
          diff2.push_back(std::norm(lhs - rhs));
          ref2.push_back(std::norm(rhs));
        }
        const double rel =
            std::sqrt(pairwise_sum(diff2)) / std::max(std::sqrt(pairwise_sum(ref2)), 1e-14);
        worst = std::max(worst, rel);
        fcsv.cell(freqs[f]).cell(rel);
        fcsv.end_row();
      }
      fcsv.finish();
      rep.add_leq("fourier_identity/" + std::to_string(p) + "/" + dir_label(sc.directions[d]),
                  worst, 1e-2);
    }
  }
}

inline void analysis_far_field(RunSet& rs, const std::filesystem::path& dir, RunReport& rep) {
  const Scenario& sc = rs.sc;
  std::vector<double> freqs = default_freq_grid();
  std::vector<BoundaryPoint> thetas =
      sample_boundary_circle(sc.n, 2.0 * std::numbers::pi / sc.far_field.theta_count);

  std::vector<std::vector<FarField>> ff(sc.potentials.size());
  for (std::size_t p = 0; p < sc.potentials.size(); ++p) {
    for (double radius : sc.far_field.radii) {
      FarFieldOptions opt;
      opt.h = sc.far_field.h;
      FarField a = far_field(sc.potentials[p], sc.directions[0], freqs, thetas, radius, opt);
      export_far_field_csv(a,
                           dir / ("amplitude_" + std::to_string(p) + "_R" +
                                  std::to_string(static_cast<int>(radius)) + ".csv"),
                           sc.directions[0]);
      ff[p].push_back(std::move(a));
    }
  }

  auto rel_diff = [&](const FarField& a, const FarField& b) {
    std::vector<double> d2, r2;
    for (std::size_t i = 0; i < a.amplitude.size(); ++i) {
      d2.push_back(std::norm(a.amplitude[i] - b.amplitude[i]));
      r2.push_back(std::norm(a.amplitude[i]));
    }
    return std::sqrt(pairwise_sum(d2)) / std::max(std::sqrt(pairwise_sum(r2)), 1e-14);
  };

  if (ff[0].size() >= 2)
    rep.add_leq("far_field_r_stability/0", rel_diff(ff[0][0], ff[0][1]), 0.15);
  if (sc.potentials.size() == 2) {
    const std::string name =
        "far_field_pair/R" + std::to_string(static_cast<int>(sc.far_field.radii[0]));
    const double diff = rel_diff(ff[0][0], ff[1][0]);
    if (sc.compare == "distinct") {
      rep.add(name, diff, 2e-2, diff >= 2e-2, "distinct pair: value must exceed tolerance");
    } else {
      rep.add_leq(name, diff, 1e-2);
    }
  }
}

inline void analysis_carleman(const Scenario& sc, const std::filesystem::path& dir,
                              RunReport& rep) {
  const CarlemanParams& cp = sc.carleman;
  Vec vt;
  if (!cp.vartheta.empty()) {
    vt = Vec(static_cast<int>(cp.vartheta.size()));
    for (std::size_t i = 0; i < cp.vartheta.size(); ++i)
      vt[static_cast<int>(i)] = cp.vartheta[i];
  } else {
    vt = Vec::Zero(sc.n);
    vt[0] = 2.0;
  }
  Vec e1 = Vec::Zero(static_cast<int>(vt.size()));
  e1[0] = 1.0;
  CarlemanWeight w = make_weight(cp.lambda_w, vt, cp.T, Direction(e1));

  std::vector<double> bs;
  for (double b = 0.0; b <= 10.0 + 1e-9; b += 0.25) bs.push_back(b);
  export_margin_csv(bs, dir / "margin.csv");
  rep.add("pseudoconvexity_margin_b4", pseudoconvexity_margin(4.0), 1e-12,
          std::abs(pseudoconvexity_margin(4.0) - 2.5) <= 1e-12, "|margin(4) - 2.5|");

  WeightSeparation sep = weight_separation(w);
  export_separation_csv(w, sep, dir / "separation.csv");
  rep.add("weight_separation_gap", sep.gap, 0.0, sep.gap > 0.0, "gap > 0 required");

  std::vector<double> kappas(cp.sigmas.size());
  for (std::size_t i = 0; i < cp.sigmas.size(); ++i) kappas[i] = kappa(w, cp.sigmas[i]);
  export_kappa_csv(w, cp.sigmas, kappas, dir / "kappa.csv");
  bool monotone = true;
  for (std::size_t i = 1; i < kappas.size(); ++i)
    monotone = monotone && kappas[i] <= kappas[i - 1] * (1.0 + 1e-10);
  rep.add("kappa_monotone", monotone ? 1.0 : 0.0, 1.0, monotone, "non-increasing in sigma");
  if (!cp.sigmas.empty() && cp.sigmas[0] == 0.0)
    rep.add("kappa_zero", kappas[0], 1e-12, std::abs(kappas[0] - 2.0 * cp.T) <= 1e-12,
            "kappa(0) = 2T");

  TestFunction u;
  u.center = Vec::Zero(static_cast<int>(vt.size()));
  u.center[0] = 0.7;
  u.radius = 0.15;
  u.t_center = 0.5;
  u.t_radius = 0.6;
  RatioResult rr = carleman_ratio(w, cp.ratio_sigmas, u);
  export_ratio_csv(w, rr, dir / "ratio.csv");
  if (rr.ratios.size() >= 3) {
    const double bound =
        2.0 * std::max(rr.ratios[rr.ratios.size() - 3], rr.ratios[rr.ratios.size() - 2]);
    rep.add_leq("carleman_ratio_bounded", rr.ratios.back(), bound,
                "last <= 2 max(previous two)");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// reports

inline void write_report(const RunReport& rep, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  CsvWriter csv(out_dir / "report.csv", {"metric", "value", "tolerance", "pass", "note"});
  for (const auto& m : rep.metrics) {
    csv.cell(m.name).cell(m.value).cell(m.tolerance).cell(m.pass ? 1 : 0).cell(m.note);
    csv.end_row();
  }
  csv.finish();
  json j;
  j["scenario"] = rep.scenario;
  j["hash"] = rep.hash;
  j["provenance"] = rep.provenance;
  j["all_pass"] = rep.all_pass();
  json jm = json::array();
  for (const auto& m : rep.metrics) {
    json e;
    e["metric"] = m.name;
    e["value"] = m.value;
    e["tolerance"] = m.tolerance;
    e["pass"] = m.pass;
    if (!m.note.empty()) e["note"] = m.note;
    jm.push_back(e);
  }
  j["metrics"] = jm;
  std::ofstream out(out_dir / "report.json");
  if (!out) throw error("cannot open output file: " + (out_dir / "report.json").string());
  out << j.dump(2) << "\n";
}

inline RunReport make_report(const Scenario& sc) {
  RunReport rep;
  rep.scenario = sc.name;
  rep.hash = hex64(fnv1a(sc.raw.dump()));
  rep.provenance["version"] = kVersionString;
  rep.provenance["schema_version"] = kSchemaVersion;
  rep.provenance["n"] = sc.n;
  rep.provenance["h"] = sc.h;
  rep.provenance["extent"] = sc.extent;
  rep.provenance["t_end"] = sc.t_end;
  rep.provenance["threads"] = static_cast<int>(max_threads());
  return rep;
}

// ---------------------------------------------------------------------------
// top-level operations

inline RunReport run_scenario(const Scenario& sc, const std::filesystem::path& out_root) {
  RunReport rep = make_report(sc);
  const std::filesystem::path base = out_root / sc.name;
  detail::RunSet rs(sc, sc.h);

  bool needs_solver = sc.analyses.empty();
  for (const std::string& a : sc.analyses) needs_solver = needs_solver || a != "carleman";

  if (needs_solver) {
    const std::filesystem::path tdir = base / "traces";
    std::filesystem::create_directories(tdir);
    for (std::size_t p = 0; p < sc.potentials.size(); ++p) {
      const std::uint64_t spec_hash = detail::field_hash(sc, p);
      for (std::size_t d = 0; d < sc.directions.size(); ++d) {
        for (IncidentKind kind : rs.kinds()) {
          const BoundaryTrace& tr = rs.trace(p, d, kind);
          export_trace_csv(tr,
                           tdir / ("trace_" + std::to_string(p) + "_" +
                                   detail::dir_label(sc.directions[d]) + "_" +
                                   detail::kind_label(kind) + ".csv"),
                           spec_hash);
          rep.add_leq("causality/" + std::to_string(p) + "/" +
                          detail::dir_label(sc.directions[d]) + "/" +
                          detail::kind_label(kind),
                      causality_violation(tr), 1e-5);
        }
      }
    }
  }

  for (const std::string& a : sc.analyses) {
    const std::filesystem::path adir = base / a;
    std::filesystem::create_directories(adir);
    if (a == "gamma-limit") {
      detail::analysis_gamma_limit(rs, adir, rep);
    } else if (a == "trace-compare") {
      const double eps = sc.epsilon_over_h * rs.grid.h;
      detail::analysis_trace_compare(rs, adir, rep, tol_gauge(rs.grid.h, eps));
    } else if (a == "integral-identity") {
      detail::analysis_integral_identity(rs, adir, rep);
    } else if (a == "derivative-identity") {
      detail::analysis_derivative_identity(rs, adir, rep);
    } else if (a == "fourier") {
      detail::analysis_fourier(rs, adir, rep);
    } else if (a == "far-field") {
      detail::analysis_far_field(rs, adir, rep);
    } else if (a == "carleman") {
      detail::analysis_carleman(sc, adir, rep);
    }
  }

  write_report(rep, base);
  return rep;
}

// Runs all 2n axis directions for both potentials, emits per-direction trace
// files and the discrepancy matrix; antisymmetric vector parts are labeled
// with the reduced n+1 direction set.
inline RunReport dataset_2n(const Scenario& sc_in, const std::filesystem::path& out_root) {
  Scenario sc = sc_in;
  if (sc.n < 2) throw error("dataset-2n requires n in {2, 3}");
  if (sc.potentials.size() != 2) throw error("dataset-2n needs two potentials");
  sc.directions = detail::axis_directions(sc.n);
  RunReport rep = make_report(sc);
  const std::filesystem::path base = out_root / sc.name / "dataset-2n";
  std::filesystem::create_directories(base);
  detail::RunSet rs(sc, sc.h);

  bool antisym = true;
  for (const FieldSpec& spec : sc.potentials)
    antisym = antisym && check_condition(spec, CertKind::Antisymmetric).residual <= 1e-8;
  const int kept = antisym ? sc.n + 1 : 2 * sc.n;

  const double eps = sc.epsilon_over_h * rs.grid.h;
  const double tol = tol_gauge(rs.grid.h, eps);
  IncidentKind kind = rs.kinds().front();
  CsvWriter csv(base / "discrepancy_matrix.csv",
                {"direction", "kind", "l2", "linf", "reduced_set_member"});
  for (std::size_t d = 0; d < sc.directions.size(); ++d) {
    for (std::size_t p = 0; p < 2; ++p) {
      const BoundaryTrace& tr = rs.trace(p, d, kind);
      export_trace_csv(tr,
                       base / ("trace_" + std::to_string(p) + "_" +
                               detail::dir_label(sc.directions[d]) + ".csv"),
                       detail::field_hash(sc, p));
    }
    const BoundaryTrace ca = comparison_form(rs.trace(0, d, kind));
    const BoundaryTrace cb = comparison_form(rs.trace(1, d, kind));
    const double l2 = discrepancy(ca, cb, TraceNorm::L2);
    const double li = discrepancy(ca, cb, TraceNorm::Linf);
    const bool member = static_cast<int>(d) < kept;
    csv.cell(detail::dir_label(sc.directions[d]))
        .cell(detail::kind_label(kind))
        .cell(l2)
        .cell(li)
        .cell(member ? 1 : 0);
    csv.end_row();
    rep.add_leq("dataset_2n/" + detail::dir_label(sc.directions[d]), l2, tol);
  }
  csv.finish();
  json meta;
  meta["antisymmetric"] = antisym;
  meta["reduced_count"] = kept;
  meta["direction_count"] = 2 * sc.n;
  meta["note"] = antisym ? "antisymmetric vector parts: first n+1 directions suffice"
                         : "full 2n direction set";
  write_sidecar(base / "discrepancy_matrix.csv", meta);
  write_report(rep, out_root / sc.name);
  return rep;
}

struct ConvergenceRow {
  double h = 0.0;
  double eps = 0.0;
  std::map<std::string, double> errors;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  std::map<std::string, double> slopes;  // NaN when at floor
  RunReport report;
};

inline double fit_slope(const std::vector<double>& hs, const std::vector<double>& errs) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double k = static_cast<double>(hs.size());
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const double x = std::log(hs[i]);
    const double y = std::log(std::max(errs[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

inline ConvergenceReport convergence_study(const Scenario& sc,
                                           const std::filesystem::path& out_root,
                                           int levels) {
  if (levels < 3) throw error("convergence study needs at least 3 levels");
  ConvergenceReport out;
  out.report = make_report(sc);

  // probe points for the near-front reconstruction metric
  std::vector<BoundaryPoint> probes;
  {
    const Direction& omega = sc.directions[0];
    for (double zc : {0.0, 0.2, 0.45}) {
      BoundaryPoint bp;
      bp.x = Vec(zc * omega.vec());
      probes.push_back(bp);
    }
  }

  FieldSpec drift = sc.potentials[0].form == Form::Drift
                        ? sc.potentials[0]
                        : convert_form(sc.potentials[0]);
  const Direction& omega = sc.directions[0];

  // expansion table once; continuum reference shared by every level
  SimGrid table_grid = make_table_grid(sc.n, 1.0 / 64.0, 1.6);
  ExpansionTable table_h = expand(drift, omega, table_grid, 2, WaveKind::Heaviside);

  for (int level = 0; level < levels; ++level) {
    const double h = sc.h * std::pow(2.0, levels - 1 - level) * 1.0;
    ConvergenceRow row;
    row.h = h;
    row.eps = sc.epsilon_over_h * h;

    detail::RunSet rs(sc, h);
    const double spacing = 1e-3;

    // gamma-limit errors vs the continuum references
    {
      double worst_h = 0.0, worst_d = 0.0;
      const BoundaryTrace& th = rs.ring_trace(0, 0, IncidentKind::Heaviside);
      const BoundaryTrace total = add_incident(th);
      std::vector<cplx> lim = gamma_limit(total);
      for (std::size_t i = 0; i < rs.ring_points.size(); ++i) {
        const cplx ref = std::exp(psi_at(drift, omega, rs.ring_points[i].x, spacing));
        worst_h = std::max(worst_h, std::abs(lim[i] - ref));
      }
      const BoundaryTrace& td = rs.ring_trace(0, 0, IncidentKind::Delta);
      std::vector<cplx> limd = gamma_limit(td);
      for (std::size_t i = 0; i < rs.ring_points.size(); ++i) {
        const cplx ref = leading_amplitude_at(drift, omega, rs.ring_points[i].x, spacing);
        worst_d = std::max(worst_d, std::abs(limd[i] - ref));
      }
      row.errors["gamma_h"] = worst_h;
      row.errors["gamma_delta"] = worst_d;
    }

    // derivative identity and integral identity
    row.errors["derivative_identity"] = detail::derivative_identity_error(
        rs.trace(0, 0, IncidentKind::Heaviside), rs.trace(0, 0, IncidentKind::Delta));
    {
      std::vector<cplx> psi(rs.points.size());
      for (std::size_t i = 0; i < rs.points.size(); ++i)
        psi[i] = psi_at(drift, omega, rs.points[i].x, spacing);
      row.errors["integral_identity"] = integral_identity_residual(
          rs.trace(0, 0, IncidentKind::Heaviside), rs.trace(0, 0, IncidentKind::Delta), psi);
    }

    // near-front Taylor reconstruction at interior probes (total H field)
    {
      MollifiedIncident inc(IncidentKind::Heaviside, sc.epsilon_over_h * h);
      TraceRequest req{probes};
      WaveRun wr = run(sc.potentials[0], omega, inc, rs.grid, req);
      const double m2 = adaptive_simpson(
          [&](double s) { return s * s * inc.delta(s); }, -inc.epsilon, inc.epsilon, 1e-12);
      double worst = 0.0;
      for (std::size_t pi = 0; pi < probes.size(); ++pi) {
        const double z = omega.vec().dot(probes[pi].x);
        const cplx a0 = eval_coeff(table_h, 0, probes[pi].x);
        const cplx a1 = eval_coeff(table_h, 1, probes[pi].x);
        const cplx a2 = eval_coeff(table_h, 2, probes[pi].x);
        for (int k = 0; k < wr.trace.samples; ++k) {
          const double s = wr.trace.time_at(k) - z;
          if (s < 3.0 * wr.trace.epsilon || s > 6.0 * wr.trace.epsilon) continue;
          const cplx num = wr.trace.value(pi, k) + inc.heaviside(s);
          const cplx fit = a0 + a1 * s + a2 * (s * s + m2);
          worst = std::max(worst, std::abs(num - fit));
        }
      }
      row.errors["near_front"] = worst;
    }

    // gauge pair at this level
    if (sc.potentials.size() == 2)
      row.errors["pair_discrepancy"] =
          discrepancy(comparison_form(rs.trace(0, 0, rs.kinds().front())),
                      comparison_form(rs.trace(1, 0, rs.kinds().front())), TraceNorm::L2);

    out.rows.push_back(std::move(row));
  }

  // slopes
  std::vector<double> hs;
  for (const auto& r : out.rows) hs.push_back(r.h);
  for (const auto& kv : out.rows.front().errors) {
    std::vector<double> errs;
    bool floor = true;
    for (const auto& r : out.rows) {
      const double e = r.errors.at(kv.first);
      errs.push_back(e);
      floor = floor && e <= 1e-10;
    }
    out.slopes[kv.first] =
        floor ? std::numeric_limits<double>::quiet_NaN() : fit_slope(hs, errs);
  }

  const std::filesystem::path dir = out_root / sc.name / "convergence";
  std::filesystem::create_directories(dir);
  {
    std::vector<std::string> cols{"h", "epsilon"};
    for (const auto& kv : out.rows.front().errors) cols.push_back(kv.first);
    CsvWriter csv(dir / "levels.csv", cols);
    for (const auto& r : out.rows) {
      csv.cell(r.h).cell(r.eps);
      for (const auto& kv : r.errors) csv.cell(kv.second);
      csv.end_row();
    }
    csv.finish();
  }
  {
    CsvWriter csv(dir / "slopes.csv", {"metric", "slope", "at_floor"});
    for (const auto& kv : out.slopes) {
      const bool floor = std::isnan(kv.second);
      csv.cell(kv.first).cell(floor ? 0.0 : kv.second).cell(floor ? 1 : 0);
      csv.end_row();
    }
    csv.finish();
    json meta;
    meta["levels"] = levels;
    meta["note"] = "log-log least squares; at_floor = errors below 1e-10 at every level";
    write_sidecar(dir / "slopes.csv", meta);
  }

  // Slope gates follow the library's contracts: second-order front
  // extraction for both incident kinds, 1.7 for the near-front Taylor
  // match, plain decrease for the identity residuals; the rest is reported
  // without a gate.
  const auto slope_floor = [](const std::string& name) {
    if (name == "gamma_h" || name == "gamma_delta") return 1.5;
    if (name == "near_front") return 1.7;
    if (name == "derivative_identity" || name == "integral_identity") return 0.0;
    return -std::numeric_limits<double>::infinity();
  };
  for (const auto& kv : out.slopes) {
    if (std::isnan(kv.second)) {
      out.report.add(std::string("slope/") + kv.first, 0.0, 0.0, true, "at floor");
    } else {
      const double bound = slope_floor(kv.first);
      out.report.add(std::string("slope/") + kv.first, kv.second, bound, kv.second >= bound,
                     "slope lower bound");
    }
  }
  write_report(out.report, out_root / sc.name);
  return out;
}

}  // namespace pwlab
