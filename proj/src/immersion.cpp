#include "wlab/immersion.hpp"

#include <fstream>

#include "json.hpp"

namespace wlab {

const char* domain_kind_name(DomainKind k) {
  switch (k) {
    case DomainKind::rectangle: return "rectangle";
    case DomainKind::log_polar_annulus: return "log_polar_annulus";
    case DomainKind::periodic_cylinder: return "periodic_cylinder";
  }
  return "rectangle";
}

DomainKind domain_kind_from_name(const std::string& s) {
  if (s == "rectangle") return DomainKind::rectangle;
  if (s == "log_polar_annulus") return DomainKind::log_polar_annulus;
  if (s == "periodic_cylinder") return DomainKind::periodic_cylinder;
  fail(ErrorCode::invalid_argument, "unknown domain kind: " + s);
}

const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::ok: return "ok";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::degenerate_metric: return "DegenerateMetric";
    case ErrorCode::not_conformal: return "NotConformal";
    case ErrorCode::quadrature_under_resolved: return "QuadratureUnderResolved";
    case ErrorCode::out_of_range: return "OutOfRange";
    case ErrorCode::pole_hit: return "PoleHit";
    case ErrorCode::center_on_surface: return "CenterOnSurface";
    case ErrorCode::non_convergent: return "NonConvergent";
    case ErrorCode::ambiguous_order: return "AmbiguousOrder";
    case ErrorCode::zero_order: return "ZeroOrder";
    case ErrorCode::cycle_detected: return "CycleDetected";
    case ErrorCode::mismatch: return "Mismatch";
    case ErrorCode::not_double_tree: return "NotDoubleTree";
    case ErrorCode::no_isomorphism: return "NoIsomorphism";
    case ErrorCode::inconsistent_behavior: return "InconsistentBehavior";
    case ErrorCode::overlap_collision: return "OverlapCollision";
    case ErrorCode::unresolved: return "Unresolved";
    case ErrorCode::inconsistent_across_k: return "InconsistentAcrossK";
    case ErrorCode::ic_center_misclassified: return "ICCenterMisclassified";
    case ErrorCode::internal: return "Internal";
  }
  return "Internal";
}

void DiscreteImmersion::resample() {
  if (!sampler) fail(ErrorCode::invalid_argument, "resample: no analytic sampler attached");
  chart.validate();
  positions.assign(chart.size(), Vec3{});
  for (int i = 0; i < chart.nu; ++i)
    for (int j = 0; j < chart.nv; ++j)
      at(i, j) = sampler(chart.u(i), chart.v(j)).value();
}

void DiscreteImmersion::validate() const {
  chart.validate();
  if (positions.size() != chart.size())
    fail(ErrorCode::invalid_argument, "DiscreteImmersion: position grid does not match chart");
  if (chart.kind == DomainKind::log_polar_annulus && !chart.periodic_v)
    fail(ErrorCode::invalid_argument, "log-polar annulus chart must be periodic in theta");
}

namespace {

// Stencil row: offsets with coefficients for d/dx and d2/dx2, second order,
// one-sided at non-periodic boundaries.
struct Stencil {
  int off1[4];
  double c1[4];
  int n1;
  int off2[4];
  double c2[4];
  int n2;
};

Stencil make_stencil(int i, int n, bool periodic, double h) {
  Stencil s{};
  bool left = !periodic && i == 0;
  bool right = !periodic && i == n - 1;
  if (left) {
    s.n1 = 3;
    s.off1[0] = 0; s.off1[1] = 1; s.off1[2] = 2;
    s.c1[0] = -1.5 / h; s.c1[1] = 2.0 / h; s.c1[2] = -0.5 / h;
    s.n2 = 4;
    s.off2[0] = 0; s.off2[1] = 1; s.off2[2] = 2; s.off2[3] = 3;
    s.c2[0] = 2.0; s.c2[1] = -5.0; s.c2[2] = 4.0; s.c2[3] = -1.0;
    for (int k = 0; k < 4; ++k) s.c2[k] /= h * h;
  } else if (right) {
    s.n1 = 3;
    s.off1[0] = 0; s.off1[1] = -1; s.off1[2] = -2;
    s.c1[0] = 1.5 / h; s.c1[1] = -2.0 / h; s.c1[2] = 0.5 / h;
    s.n2 = 4;
    s.off2[0] = 0; s.off2[1] = -1; s.off2[2] = -2; s.off2[3] = -3;
    s.c2[0] = 2.0; s.c2[1] = -5.0; s.c2[2] = 4.0; s.c2[3] = -1.0;
    for (int k = 0; k < 4; ++k) s.c2[k] /= h * h;
  } else {
    s.n1 = 2;
    s.off1[0] = -1; s.off1[1] = 1;
    s.c1[0] = -0.5 / h; s.c1[1] = 0.5 / h;
    s.n2 = 3;
    s.off2[0] = -1; s.off2[1] = 0; s.off2[2] = 1;
    s.c2[0] = 1.0; s.c2[1] = -2.0; s.c2[2] = 1.0;
    for (int k = 0; k < 3; ++k) s.c2[k] /= h * h;
  }
  return s;
}

}  // namespace

JVec3 DiscreteImmersion::node_jet(int i, int j) const {
  if (sampler) {
    return sampler(chart.u(i), chart.v(j));
  }
  const Stencil su = make_stencil(i, chart.nu, chart.periodic_u, chart.du());
  const Stencil sv = make_stencil(j, chart.nv, chart.periodic_v, chart.dv());
  auto P = [&](int di, int dj) -> Vec3 {
    int ii, jj;
    if (!chart.shift_u(i, di, ii) || !chart.shift_v(j, dj, jj))
      fail(ErrorCode::internal, "node_jet: stencil off grid");
    return positions[chart.idx(ii, jj)];
  };
  Vec3 p = positions[chart.idx(i, j)];
  Vec3 du{}, dv{}, duu{}, dvv{}, duv{};
  for (int k = 0; k < su.n1; ++k) du += su.c1[k] * P(su.off1[k], 0);
  for (int k = 0; k < sv.n1; ++k) dv += sv.c1[k] * P(0, sv.off1[k]);
  for (int k = 0; k < su.n2; ++k) duu += su.c2[k] * P(su.off2[k], 0);
  for (int k = 0; k < sv.n2; ++k) dvv += sv.c2[k] * P(0, sv.off2[k]);
  for (int k = 0; k < su.n1; ++k)
    for (int l = 0; l < sv.n1; ++l) duv += su.c1[k] * sv.c1[l] * P(su.off1[k], sv.off1[l]);
  JVec3 r;
  for (int c = 0; c < 3; ++c) {
    r[c].f = p[c];
    r[c].fu = du[c];
    r[c].fv = dv[c];
    r[c].fuu = duu[c];
    r[c].fuv = duv[c];
    r[c].fvv = dvv[c];
  }
  return r;
}

DiscreteImmersion DiscreteImmersion::refined(int factor) const {
  if (!sampler) fail(ErrorCode::invalid_argument, "refined: needs analytic sampler");
  DiscreteImmersion r = *this;
  r.chart = chart.refined(factor);
  r.resample();
  return r;
}

DiscreteImmersion DiscreteImmersion::coarsened() const {
  if (!chart.coarsenable()) fail(ErrorCode::invalid_argument, "coarsened: grid not coarsenable");
  DiscreteImmersion r;
  r.chart = chart.coarsened();
  r.sampler = sampler;
  r.role = role;
  r.id = id;
  r.positions.assign(r.chart.size(), Vec3{});
  for (int i = 0; i < r.chart.nu; ++i)
    for (int j = 0; j < r.chart.nv; ++j)
      r.positions[r.chart.idx(i, j)] = positions[chart.idx(2 * i, 2 * j)];
  return r;
}

DiscreteImmersion DiscreteImmersion::without_sampler() const {
  DiscreteImmersion r = *this;
  r.sampler = nullptr;
  return r;
}

ImmersionAtlas ImmersionAtlas::refined(int factor) const {
  ImmersionAtlas out;
  for (std::size_t c = 0; c < charts.size(); ++c) {
    out.charts.push_back(charts[c].refined(factor));
    // Weight fields are re-derived by the builder when needed; refinement of a
    // weighted atlas is only used on sampler-backed model atlases where the
    // builder is re-run instead.
    out.weights.emplace_back();
  }
  return out;
}

ImmersionAtlas ImmersionAtlas::without_samplers() const {
  ImmersionAtlas out = *this;
  for (auto& c : out.charts) c.sampler = nullptr;
  return out;
}

using nlohmann::json;

namespace {

json chart_to_json(const DiscreteImmersion& imm) {
  json jc;
  jc["id"] = imm.id;
  jc["domain_kind"] = domain_kind_name(imm.chart.kind);
  jc["bounds"] = {imm.chart.u0, imm.chart.u1, imm.chart.v0, imm.chart.v1};
  jc["resolution"] = {imm.chart.nu, imm.chart.nv};
  jc["periodic"] = {imm.chart.periodic_u, imm.chart.periodic_v};
  jc["role"] = {{"tag", imm.role.tag},
                {"center", {imm.role.center.x, imm.role.center.y, imm.role.center.z}},
                {"axis", {imm.role.axis.x, imm.role.axis.y, imm.role.axis.z}},
                {"quadrature", imm.role.quadrature}};
  std::vector<double> flat;
  flat.reserve(imm.positions.size() * 3);
  for (const auto& p : imm.positions) {
    flat.push_back(p.x);
    flat.push_back(p.y);
    flat.push_back(p.z);
  }
  jc["positions"] = std::move(flat);
  return jc;
}

DiscreteImmersion chart_from_json(const json& jc) {
  DiscreteImmersion imm;
  imm.id = jc.value("id", "");
  imm.chart.kind = domain_kind_from_name(jc.at("domain_kind").get<std::string>());
  auto b = jc.at("bounds");
  imm.chart.u0 = b.at(0);
  imm.chart.u1 = b.at(1);
  imm.chart.v0 = b.at(2);
  imm.chart.v1 = b.at(3);
  imm.chart.nu = jc.at("resolution").at(0);
  imm.chart.nv = jc.at("resolution").at(1);
  imm.chart.periodic_u = jc.at("periodic").at(0);
  imm.chart.periodic_v = jc.at("periodic").at(1);
  if (jc.contains("role")) {
    const auto& r = jc["role"];
    imm.role.tag = r.value("tag", "chart");
    if (r.contains("center"))
      imm.role.center = {r["center"][0], r["center"][1], r["center"][2]};
    if (r.contains("axis")) imm.role.axis = {r["axis"][0], r["axis"][1], r["axis"][2]};
    imm.role.quadrature = r.value("quadrature", true);
  }
  const auto& flat = jc.at("positions");
  if (flat.size() != imm.chart.size() * 3)
    fail(ErrorCode::io_error, "immersion file: position array does not match resolution");
  imm.positions.resize(imm.chart.size());
  for (std::size_t n = 0; n < imm.positions.size(); ++n)
    imm.positions[n] = {flat[3 * n], flat[3 * n + 1], flat[3 * n + 2]};
  imm.validate();
  return imm;
}

}  // namespace

void save_json(const ImmersionAtlas& atlas, const std::string& path) {
  json j;
  j["format"] = "wlab-immersion-atlas";
  j["charts"] = json::array();
  for (std::size_t c = 0; c < atlas.charts.size(); ++c) {
    json jc = chart_to_json(atlas.charts[c]);
    if (c < atlas.weights.size() && !atlas.weights[c].values.empty())
      jc["weights"] = atlas.weights[c].values;
    j["charts"].push_back(std::move(jc));
  }
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path);
  out << j.dump();
}

ImmersionAtlas load_atlas_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_error, "cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(ErrorCode::io_error, std::string("bad immersion file: ") + e.what());
  }
  ImmersionAtlas atlas;
  for (const auto& jc : j.at("charts")) {
    atlas.charts.push_back(chart_from_json(jc));
    ScalarField w;
    if (jc.contains("weights")) {
      w.chart = atlas.charts.back().chart;
      w.values = jc["weights"].get<std::vector<double>>();
      w.validate();
    }
    atlas.weights.push_back(std::move(w));
  }
  return atlas;
}

void write_csv(const ScalarField& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path);
  out << "i,j,value\n";
  char buf[128];
  for (int i = 0; i < f.chart.nu; ++i)
    for (int j = 0; j < f.chart.nv; ++j) {
      std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", i, j, f.at(i, j));
      out << buf;
    }
}

void write_csv(const VectorField& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path);
  out << "i,j,x,y,z\n";
  char buf[192];
  for (int i = 0; i < f.chart.nu; ++i)
    for (int j = 0; j < f.chart.nv; ++j) {
      const Vec3& v = f.at(i, j);
      std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g\n", i, j, v.x, v.y, v.z);
      out << buf;
    }
}

}  // namespace wlab
