#include "wlab/synthesizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "wlab/models.hpp"

namespace wlab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

// Layout and scheduling constants. Plates shrink like s^beta so the blend
// excess decays; taper bands keep the partition of unity clear of the blends.
constexpr double kChildCircle = 0.30;   // children sit at this fraction of the patch radius
constexpr double kChildPatch = 0.08;    // child patch radius fraction
constexpr double kRootPatchCap = 0.22;
constexpr double kPlateFraction = 0.25; // plate radius at k_min, fraction of patch radius
constexpr double kBlendWidth = 1.0;     // max blend width in the conformal coordinate u
constexpr double kTaperLo = 0.55;       // PoU taper band, fractions of the rim
constexpr double kTaperHi = 0.92;
constexpr double kDimpleFloor = 0.55;   // gap transition band, fractions of the patch
constexpr double kDimpleEdge = 0.95;
constexpr double kGapStep = 0.015;      // child gap / parent gap at k = 0

struct Site {
  std::string id;
  bool leaf = false;
  int depth = 0;  // root = 0
  Vec3 dir{1, 0, 0};
  Vec3 e1, e2;
  double patch = 0;  // angular patch radius
  std::string parent;
};

struct Layout {
  std::map<std::string, Site> sites;  // all tree vertices except the root
  std::vector<std::string> internal_order;  // BFS, root first
};

Layout make_layout(const FamilySpec& spec) {
  Layout L;
  const TreeSpec& t = spec.tree;
  L.internal_order.push_back(t.root);
  const auto& rk = t.children.at(t.root);
  std::size_t n0 = rk.size();
  for (std::size_t j = 0; j < n0; ++j) {
    double phi = spec.attachment_angles.size() == n0 ? spec.attachment_angles[j]
                                                     : kTwoPi * double(j) / double(n0);
    Site s;
    s.id = rk[j];
    s.leaf = t.is_leaf(rk[j]);
    s.depth = 1;
    s.dir = {std::cos(phi), std::sin(phi), 0};
    orthonormal_frame(s.dir, s.e1, s.e2);
    double sep = n0 > 1 ? 2.0 * std::sin(kPi / double(n0)) : kTwoPi;
    s.patch = std::min(kRootPatchCap, 0.3 * sep);
    s.parent = t.root;
    L.sites[s.id] = s;
  }
  // nested levels
  std::vector<std::string> frontier(rk.begin(), rk.end());
  while (!frontier.empty()) {
    std::vector<std::string> next;
    for (const auto& vid : frontier) {
      if (t.is_leaf(vid)) continue;
      L.internal_order.push_back(vid);
      const Site& pv = L.sites.at(vid);
      const auto& kids = t.children.at(vid);
      double coff = kChildCircle * pv.patch;
      for (std::size_t j = 0; j < kids.size(); ++j) {
        double phi = kTwoPi * double(j) / double(kids.size());
        Vec3 off = std::cos(phi) * pv.e1 + std::sin(phi) * pv.e2;
        Site s;
        s.id = kids[j];
        s.leaf = t.is_leaf(kids[j]);
        s.depth = pv.depth + 1;
        s.dir = normalized(std::cos(coff) * pv.dir + std::sin(coff) * off);
        orthonormal_frame(s.dir, s.e1, s.e2);
        double sep = kids.size() > 1 ? 2.0 * coff * std::sin(kPi / double(kids.size()))
                                     : 2.0 * coff;
        s.patch = std::min(kChildPatch * pv.patch, 0.35 * sep);
        s.parent = vid;
        L.sites[s.id] = s;
        next.push_back(kids[j]);
      }
    }
    frontier = std::move(next);
  }
  // footprint collision check among siblings and across the equator layout
  for (const auto& [ai, sa] : L.sites)
    for (const auto& [bi, sb] : L.sites) {
      if (ai >= bi) continue;
      bool related = sa.parent == bi || sb.parent == ai;
      if (related) continue;
      double ang = std::acos(std::clamp(dot(sa.dir, sb.dir), -1.0, 1.0));
      if (ang < 1.02 * (sa.patch + sb.patch))
        fail(ErrorCode::overlap_collision,
             "synthesize: neck footprints of " + ai + " and " + bi + " intersect");
    }
  return L;
}

// per-internal-vertex gap at index k (root included)
double vertex_gap(const FamilySpec& spec, int depth, int k) {
  double g0 = spec.base_gap * std::pow(kGapStep, depth);
  return g0 * std::pow(spec.gap_rate, double(k) * double(depth + 1));
}

struct GapWell {
  Vec3 dir;
  double q_in, q_out;  // squared-chord thresholds
  double inner_gap;
};

// gap field as a function of the unit direction, built once per k
struct GapField {
  double base;
  std::vector<GapWell> wells;  // BFS order: parents before children

  double operator()(const Vec3& xhat) const {
    double g = base;
    for (const auto& w : wells) {
      double q = 2.0 * (1.0 - dot(xhat, w.dir));
      double s = smoothstep5((q - w.q_in) / (w.q_out - w.q_in));
      g = w.inner_gap + (g - w.inner_gap) * s;
    }
    return g;
  }
  Jet2 eval(const JVec3& xhat) const {
    Jet2 g(base);
    for (const auto& w : wells) {
      Jet2 q = 2.0 * (1.0 - dot(xhat, JVec3(w.dir)));
      Jet2 s = smoothstep5((q - w.q_in) * (1.0 / (w.q_out - w.q_in)));
      g = Jet2(w.inner_gap) + (g - w.inner_gap) * s;
    }
    return g;
  }
};

GapField make_gap_field(const FamilySpec& spec, const Layout& L, int k) {
  GapField f;
  f.base = vertex_gap(spec, 0, k);
  for (const auto& vid : L.internal_order) {
    if (vid == spec.tree.root) continue;
    const Site& s = L.sites.at(vid);
    GapWell w;
    w.dir = s.dir;
    double a_in = kDimpleFloor * s.patch, a_out = kDimpleEdge * s.patch;
    w.q_in = 2.0 * (1.0 - std::cos(a_in));
    w.q_out = 2.0 * (1.0 - std::cos(a_out));
    w.inner_gap = vertex_gap(spec, s.depth, k);
    f.wells.push_back(w);
  }
  return f;
}

struct NeckSchedule {
  double waist = 0;
  double z0 = 0;                 // waist-center offset along the site normal
  double plate = 0;              // footprint of the inner crossing
  double Uplus = 0, Uminus = 0;  // where the catenoid meets the two sheets
  double DeltaP = 0, DeltaM = 0; // per-side blend widths in u
  double Uout = 0;               // chart half-extent
  double rim = 0;                // footprint at the chart end
};

// Inner-side clearance D(u) = s u - [1 - (1 - g/2) cos(s cosh u)], heights
// measured from the radius-1 mid-surface. The spherical sag outruns the
// catenoid's logarithmic height eventually, so the maximum over u decides
// whether a waist-s neck can reach the inner sheet.
double inner_clearance(double s, double g, double* u_at_max = nullptr) {
  double u_cap = std::acosh(std::min(0.8, 1e4 * std::sqrt(s)) / s);
  auto D = [&](double u) {
    double rho = s * std::cosh(u);
    double sh = std::sin(0.5 * rho);
    // versine form of 1 - (1 - g/2) cos(rho), stable for tiny rho
    return s * u - ((1.0 - 0.5 * g) * 2.0 * sh * sh + 0.5 * g);
  };
  double best = -1e300, bu = 1.0;
  int n = 600;
  for (int i = 0; i <= n; ++i) {
    double u = 1.0 + (u_cap - 1.0) * i / n;
    double d = D(u);
    if (d > best) { best = d; bu = u; }
  }
  double lo = std::max(1.0, bu - (u_cap - 1.0) / n);
  double hi = std::min(u_cap, bu + (u_cap - 1.0) / n);
  const double gr = 0.61803398874989484820;
  double c = hi - gr * (hi - lo), d2 = lo + gr * (hi - lo);
  for (int it = 0; it < 80; ++it) {
    if (D(c) > D(d2)) hi = d2; else lo = c;
    c = hi - gr * (hi - lo);
    d2 = lo + gr * (hi - lo);
  }
  if (u_at_max) *u_at_max = 0.5 * (lo + hi);
  return D(0.5 * (lo + hi));
}

// Extra climb beyond the outer sheet when the outer crossing is placed at the
// kink-optimal footprint sqrt(s) (where the transversal angle s/rho + rho is
// smallest). Negative when the catenoid falls short from the mid-surface.
double outer_optimal_surplus(double s, double g) {
  double rho_t = std::sqrt(s);
  double u_t = std::acosh(rho_t / s);
  double sh = std::sin(0.5 * rho_t);
  double climb = 0.5 * g - (1.0 + 0.5 * g) * 2.0 * sh * sh;
  return s * u_t - climb;
}

// Waist and center offset such that the inner crossing clears its sheet by
// margin * h/2 while the outer crossing sits at the optimal footprint; the
// offset z0 reallocates the climb between the two sides.
void solve_waist_balanced(double h, double margin, double& waist, double& z0) {
  auto G = [&](double s) {
    return inner_clearance(s, h) + outer_optimal_surplus(s, h) - margin * 0.5 * h;
  };
  double lo = h * 1e-12, hi = 0.45 * h;
  if (G(hi) < 0)
    fail(ErrorCode::overlap_collision,
         "synthesize: gap too large, no catenoid reaches across it");
  for (int it = 0; it < 120; ++it) {
    double mid = std::sqrt(lo * hi);  // bisect in log s
    (G(mid) < 0 ? lo : hi) = mid;
  }
  waist = std::sqrt(lo * hi);
  z0 = -outer_optimal_surplus(waist, h);
}

// u where the catenoid height z0 + s*u first meets the sheet over footprint
// s*cosh(u); the bracket stops at the first crossing.
double solve_plate_u(double s, double z0, const GapField& gap, const Site& site,
                     bool outer) {
  auto sheet_height = [&](double rho) {
    Vec3 xh = std::cos(rho) * site.dir + std::sin(rho) * site.e1;
    double g = gap(xh);
    double r = outer ? 1.0 + 0.5 * g : 1.0 - 0.5 * g;
    double sh = std::sin(0.5 * rho);
    return (outer ? 0.5 * g : -0.5 * g) - r * 2.0 * sh * sh;
  };
  auto side_f = [&](double u) {
    double uu = outer ? u : -u;
    double f = z0 + s * uu - sheet_height(s * std::cosh(u));
    return outer ? f : -f;
  };
  double lo = 0.5;
  if (side_f(lo) > 0) fail(ErrorCode::internal, "synthesize: plate bracket degenerate");
  double hi = lo;
  const double step = 0.05;
  bool crossed = false;
  for (int it = 0; it < 40000; ++it) {
    double next = hi + step;
    if (side_f(next) > 0) {
      lo = hi;
      hi = next;
      crossed = true;
      break;
    }
    hi = next;
    if (s * std::cosh(hi) > 0.9) break;
  }
  if (!crossed)
    fail(ErrorCode::overlap_collision,
         "synthesize: neck " + site.id + " cannot reach the sheet (sag limit)");
  for (int it = 0; it < 100; ++it) {
    double mid = 0.5 * (lo + hi);
    (side_f(mid) <= 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

NeckSchedule make_neck_schedule(const Site& site, const GapField& gap, double waist,
                                double z0) {
  NeckSchedule n;
  n.waist = waist;
  n.z0 = z0;
  n.Uplus = solve_plate_u(n.waist, n.z0, gap, site, true);
  n.Uminus = solve_plate_u(n.waist, n.z0, gap, site, false);
  n.plate = n.waist * std::cosh(n.Uminus);
  n.rim = site.patch;
  n.Uout = std::acosh(n.rim / n.waist);
  n.DeltaP = std::min(kBlendWidth, n.Uplus - 0.9);
  n.DeltaM = std::min(kBlendWidth, n.Uminus - 0.9);
  if (n.DeltaP < 0.3 || n.DeltaM < 0.3)
    fail(ErrorCode::overlap_collision,
         "synthesize: neck " + site.id + " leaves no room for the blend");
  if (n.Uout < std::max(n.Uplus, n.Uminus) + 0.2)
    fail(ErrorCode::overlap_collision,
         "synthesize: neck " + site.id + " has no room between plate and rim");
  double rho_cross = n.waist * std::cosh(std::max(n.Uplus, n.Uminus));
  if (rho_cross > 0.5 * kTaperLo * n.rim)
    fail(ErrorCode::overlap_collision,
         "synthesize: plate of " + site.id + " reaches into the taper band");
  return n;
}

AnalyticSampler make_handle_sampler(const Site& site, const NeckSchedule& n,
                                    const GapField& gap) {
  Vec3 A = site.dir, E1 = site.e1, E2 = site.e2;
  double s = n.waist, Up = n.Uplus, Um = n.Uminus, z0 = n.z0;
  double Dp = n.DeltaP, Dm = n.DeltaM;
  GapField g = gap;
  return [=](double u, double th) {
    Jet2 ju = Jet2::var_u(u);
    Jet2 jt = Jet2::var_v(th);
    Jet2 rho = cosh(ju) * s;
    // theta reversed so the chart orientation matches the sheets
    JVec3 ehat = JVec3(E1) * cos(jt) - JVec3(E2) * sin(jt);
    JVec3 xhat = JVec3(A) * cos(rho) + ehat * sin(rho);
    JVec3 pcat = JVec3(A) * (1.0 + z0 + ju * s) + ehat * rho;
    auto sheet = [&](bool outer) {
      Jet2 gv = g.eval(xhat);
      Jet2 r = outer ? 1.0 + gv * 0.5 : 1.0 - gv * 0.5;
      return xhat * r;
    };
    if (u >= Up) return sheet(true);
    if (u <= -Um) return sheet(false);
    if (u > Up - Dp) {
      Jet2 w = smoothstep5((ju - (Up - Dp)) * (1.0 / Dp));
      JVec3 so = sheet(true);
      return so * w + pcat * (1.0 - w);
    }
    if (u < -(Um - Dm)) {
      Jet2 w = smoothstep5(((-(Um - Dm)) - ju) * (1.0 / Dm));
      JVec3 si = sheet(false);
      return si * w + pcat * (1.0 - w);
    }
    return pcat;
  };
}

AnalyticSampler make_body_sampler(const GapField& gap, bool outer) {
  GapField g = gap;
  double o = outer ? 1.0 : -1.0;
  return [=](double t, double ph) {
    Jet2 jt = Jet2::var_u(t);
    Jet2 jp = Jet2::var_v(ph) * o;  // flips orientation for the inner sheet
    Jet2 sech = 1.0 / cosh(jt);
    JVec3 xhat{sech * cos(jp), sech * sin(jp), tanh(jt)};
    Jet2 gv = g.eval(xhat);
    Jet2 r = outer ? 1.0 + gv * 0.5 : 1.0 - gv * 0.5;
    return xhat * r;
  };
}

AnalyticSampler make_patch_sampler(const Site& site, const GapField& gap, bool outer) {
  // exactly conformal geodesic log-polar chart around the patch center; the
  // theta sense follows the sheet's global orientation
  Vec3 A = site.dir, E1 = site.e1, E2 = site.e2;
  GapField g = gap;
  double flip = outer ? -1.0 : 1.0;
  return [=](double u, double th) {
    Jet2 ju = Jet2::var_u(u);
    Jet2 jt = Jet2::var_v(th) * flip;
    Jet2 rho = atan(exp(ju)) * 2.0;
    JVec3 ehat = JVec3(E1) * cos(jt) + JVec3(E2) * sin(jt);
    JVec3 xhat = JVec3(A) * cos(rho) + ehat * sin(rho);
    Jet2 gv = g.eval(xhat);
    Jet2 r = outer ? 1.0 + gv * 0.5 : 1.0 - gv * 0.5;
    return xhat * r;
  };
}

double taper_weight(double rho, double rim) {
  // 1 below the taper band, 0 above
  double lo = kTaperLo * rim, hi = kTaperHi * rim;
  if (rho <= lo) return 1.0;
  if (rho >= hi) return 0.0;
  return 1.0 - smoothstep5((rho - lo) / (hi - lo));
}

}  // namespace

FamilySpec FamilySpec::standard(int genus, int k_min, int k_max) {
  FamilySpec s;
  s.genus = genus;
  s.k_min = k_min;
  s.k_max = k_max;
  TreeSpec t;
  t.root = "w";
  if (genus == 2) {
    t.children["w"] = {"c1", "v"};
    t.children["v"] = {"c2", "c3"};
    t.leaves = {"c1", "c2", "c3"};
  } else {
    for (int j = 1; j <= genus + 1; ++j) {
      t.children["w"].push_back("c" + std::to_string(j));
      t.leaves.push_back("c" + std::to_string(j));
    }
  }
  s.tree = t;
  return s;
}

void FamilySpec::validate() const {
  tree.validate(genus);
  if (k_max < k_min) fail(ErrorCode::invalid_argument, "FamilySpec: empty k-range");
  if (!(beta > 0) || !(beta < 1))
    fail(ErrorCode::invalid_argument, "FamilySpec: beta must lie in (0,1)");
  if (!(base_gap > 0) || !(gap_rate > 0) || !(gap_rate < 1))
    fail(ErrorCode::invalid_argument, "FamilySpec: bad gap schedule");
}

using nlohmann::json;

std::string FamilySpec::to_json() const {
  json j;
  j["genus"] = genus;
  j["tree"] = json::parse(tree.to_json());
  j["k_min"] = k_min;
  j["k_max"] = k_max;
  j["sphere_radius"] = sphere_radius;
  j["beta"] = beta;
  j["base_gap"] = base_gap;
  j["gap_rate"] = gap_rate;
  j["attachment_angles"] = attachment_angles;
  j["body_nu"] = body_nu;
  j["body_nv"] = body_nv;
  j["handle_nv"] = handle_nv;
  j["handle_du"] = handle_du;
  return j.dump(2);
}

FamilySpec FamilySpec::from_json(const std::string& text) {
  json j = json::parse(text);
  FamilySpec s;
  s.genus = j.at("genus");
  s.tree = TreeSpec::from_json(j.at("tree").dump());
  s.k_min = j.value("k_min", 0);
  s.k_max = j.value("k_max", 6);
  s.sphere_radius = j.value("sphere_radius", 1.0);
  s.beta = j.value("beta", 0.3);
  s.base_gap = j.value("base_gap", 0.015);
  s.gap_rate = j.value("gap_rate", 0.5);
  if (j.contains("attachment_angles"))
    s.attachment_angles = j["attachment_angles"].get<std::vector<double>>();
  s.body_nu = j.value("body_nu", 160);
  s.body_nv = j.value("body_nv", 80);
  s.handle_nv = j.value("handle_nv", 48);
  s.handle_du = j.value("handle_du", 0.08);
  s.validate();
  return s;
}

namespace {

struct MemberBuild {
  ImmersionAtlas atlas;
  std::map<std::string, NeckSchedule> necks;
  GapField gap;
};

MemberBuild build_member(const FamilySpec& spec, const Layout& L, int k,
                         const std::map<std::string, double>* waist_override) {
  MemberBuild mb;
  mb.gap = make_gap_field(spec, L, k);

  std::vector<const Site*> leaves;
  for (const auto& [id, s] : L.sites)
    if (s.leaf) leaves.push_back(&s);
  std::sort(leaves.begin(), leaves.end(),
            [](const Site* a, const Site* b) { return a->id < b->id; });

  double margin = 0.3 * spec.beta;  // crossing clearance fraction of the half-gap

  if (waist_override) {
    // an overridden waist implies the gap through the clearance relation
    if (!mb.gap.wells.empty())
      fail(ErrorCode::invalid_argument,
           "waist overrides are only supported for depth-1 trees");
    double h = 0;
    for (const Site* s : leaves) {
      double w = waist_override->at(s->id);
      // solve h from G(w; h) = 0 by a fixed-point pass on the clearance relation
      double h_leaf = 4.0 * w * std::log(2.0 / w) / 2.0;
      for (int it = 0; it < 40; ++it) {
        double excess = inner_clearance(w, h_leaf) + outer_optimal_surplus(w, h_leaf) -
                        margin * 0.5 * h_leaf;
        h_leaf += excess / (1.0 + 0.5 * margin);
        if (h_leaf <= 0) h_leaf = w;
      }
      h = std::max(h, h_leaf);
    }
    mb.gap.base = h;
  }

  for (const Site* s : leaves) {
    double h = mb.gap(s->dir);
    double w, z0;
    if (waist_override && waist_override->count(s->id)) {
      w = waist_override->at(s->id);
      z0 = -outer_optimal_surplus(w, h);
    } else {
      solve_waist_balanced(h, margin, w, z0);
    }
    mb.necks[s->id] = make_neck_schedule(*s, mb.gap, w, z0);
  }

  // handle charts
  for (const Site* s : leaves) {
    const NeckSchedule& n = mb.necks.at(s->id);
    DiscreteImmersion imm;
    imm.chart.kind = DomainKind::periodic_cylinder;
    imm.chart.u0 = -n.Uout;
    imm.chart.u1 = n.Uout;
    imm.chart.v0 = 0;
    imm.chart.v1 = kTwoPi;
    imm.chart.nu = std::max(64, int(std::ceil(2.0 * n.Uout / spec.handle_du)) + 1);
    imm.chart.nv = spec.handle_nv;
    imm.chart.periodic_u = false;
    imm.chart.periodic_v = true;
    imm.sampler = make_handle_sampler(*s, n, mb.gap);
    imm.id = "handle_" + s->id;
    imm.role.tag = "annulus";
    imm.role.center = s->dir;
    imm.role.axis = s->dir;
    imm.resample();
    ScalarField w(imm.chart);
    for (int i = 0; i < imm.chart.nu; ++i) {
      double rho = n.waist * std::cosh(imm.chart.u(i));
      for (int j = 0; j < imm.chart.nv; ++j) w.at(i, j) = taper_weight(rho, n.rim);
    }
    mb.atlas.charts.push_back(std::move(imm));
    mb.atlas.weights.push_back(std::move(w));
  }

  // body charts: one Mercator chart per sheet; weight excises the leaf patches
  for (bool outer : {true, false}) {
    DiscreteImmersion imm;
    imm.chart.kind = DomainKind::log_polar_annulus;
    imm.chart.u0 = -7.0;
    imm.chart.u1 = 7.0;
    imm.chart.v0 = 0;
    imm.chart.v1 = kTwoPi;
    imm.chart.nu = spec.body_nu;
    imm.chart.nv = spec.body_nv;
    imm.chart.periodic_u = false;
    imm.chart.periodic_v = true;
    imm.sampler = make_body_sampler(mb.gap, outer);
    imm.id = outer ? "body_out" : "body_in";
    imm.role.tag = "body";
    imm.resample();
    ScalarField w(imm.chart);
    for (int i = 0; i < imm.chart.nu; ++i)
      for (int j = 0; j < imm.chart.nv; ++j) {
        JVec3 jet = imm.sampler(imm.chart.u(i), imm.chart.v(j));
        Vec3 xhat = normalized(jet.value());
        double wt = 1.0;
        for (const Site* s : leaves) {
          double ang = std::acos(std::clamp(dot(xhat, s->dir), -1.0, 1.0));
          wt *= 1.0 - taper_weight(ang, mb.necks.at(s->id).rim);
        }
        w.at(i, j) = wt;
      }
    mb.atlas.charts.push_back(std::move(imm));
    mb.atlas.weights.push_back(std::move(w));
  }

  // diagnostic patch annuli around internal non-root vertices (zero weight)
  for (const auto& vid : L.internal_order) {
    if (vid == spec.tree.root) continue;
    const Site& s = L.sites.at(vid);
    double child_extent = 0;
    for (const auto& cid : spec.tree.children.at(vid)) {
      const Site& c = L.sites.at(cid);
      double off = std::acos(std::clamp(dot(c.dir, s.dir), -1.0, 1.0));
      child_extent = std::max(child_extent, off + c.patch);
    }
    double rho_in = 1.15 * child_extent;
    double rho_out = 0.95 * kDimpleFloor * s.patch;
    if (rho_out <= rho_in * 1.05) continue;
    for (bool outer : {true, false}) {
      DiscreteImmersion imm;
      imm.chart.kind = DomainKind::log_polar_annulus;
      // geodesic Mercator radial coordinate: u = log tan(rho/2)
      imm.chart.u0 = std::log(std::tan(rho_in / 2));
      imm.chart.u1 = std::log(std::tan(rho_out / 2));
      imm.chart.v0 = 0;
      imm.chart.v1 = kTwoPi;
      imm.chart.nu = 48;
      imm.chart.nv = spec.handle_nv;
      imm.chart.periodic_u = false;
      imm.chart.periodic_v = true;
      imm.sampler = make_patch_sampler(s, mb.gap, outer);
      imm.id = std::string("patch_") + vid + (outer ? "_out" : "_in");
      imm.role.tag = "annulus";
      imm.role.center = s.dir;
      imm.role.axis = s.dir;
      imm.role.quadrature = false;
      imm.resample();
      mb.atlas.charts.push_back(std::move(imm));
      mb.atlas.weights.emplace_back();
    }
  }
  return mb;
}

BubbleGraph build_ground_truth(const FamilySpec& spec, const Layout& L,
                               const std::vector<MemberBuild>& builds) {
  BubbleGraph g;
  g.genus = spec.genus;
  for (int k = spec.k_min; k <= spec.k_max; ++k) g.k_values.push_back(k);
  std::size_t nk = g.k_values.size();

  auto sheet_point = [&](const MemberBuild& mb, const Vec3& dir, bool outer) {
    double gv = mb.gap(dir);
    return dir * (outer ? 1.0 + 0.5 * gv : 1.0 - 0.5 * gv);
  };

  // spheres
  for (int i = 0; i < 2; ++i) {
    BubbleVertex v;
    v.id = i == 0 ? "S1" : "S2";
    v.kind = VertexKind::conc;
    v.limit_class = ModelTag::S;
    v.scales.assign(nk, 1.0);
    v.positions.assign(nk, Vec3{0, 0, 0});
    v.R = {"z"};
    g.vertices.push_back(v);
  }

  // canonical base point for the roots: rotated away from the first attachment
  const Site& first = L.sites.at(spec.tree.children.at(spec.tree.root)[0]);
  Vec3 base_dir = normalized(std::cos(2.2 * first.patch) * first.dir +
                             std::sin(2.2 * first.patch) * first.e1);

  auto add_copy_vertex = [&](const std::string& tree_id, int copy) {
    bool outer = copy == 1;
    BubbleVertex v;
    v.id = tree_id + "_" + std::to_string(copy);
    v.kind = VertexKind::thick;
    v.limit_class = ModelTag::P;
    bool is_root = tree_id == spec.tree.root;
    for (std::size_t ki = 0; ki < nk; ++ki) {
      const MemberBuild& mb = builds[ki];
      if (is_root) {
        v.scales.push_back(vertex_gap(spec, 0, g.k_values[ki]));
        v.positions.push_back(sheet_point(mb, base_dir, outer));
      } else {
        const Site& s = L.sites.at(tree_id);
        v.scales.push_back(vertex_gap(spec, s.depth, g.k_values[ki]));
        v.positions.push_back(sheet_point(mb, s.dir, outer));
      }
    }
    if (!is_root) v.Q.push_back("up");
    for (const auto& cid : spec.tree.children.at(tree_id)) v.Q.push_back("q_" + cid);
    if (is_root) v.R = {"e"};
    g.vertices.push_back(v);
  };

  for (const auto& vid : L.internal_order)
    for (int copy : {1, 2}) add_copy_vertex(vid, copy);

  // leaves (shared between the copies)
  for (const auto& [id, s] : L.sites) {
    if (!s.leaf) continue;
    BubbleVertex v;
    v.id = id;
    v.kind = VertexKind::thin;
    v.limit_class = ModelTag::C;
    for (std::size_t ki = 0; ki < nk; ++ki) {
      v.scales.push_back(builds[ki].necks.at(id).waist);
      v.positions.push_back(s.dir);
    }
    v.Q = {"bot", "top"};
    g.vertices.push_back(v);
  }

  auto copy_id = [&](const std::string& tree_id, int copy) {
    return tree_id + "_" + std::to_string(copy);
  };
  g.edges.push_back({"S1", copy_id(spec.tree.root, 1), "z", "e", 1});
  g.edges.push_back({"S2", copy_id(spec.tree.root, 2), "z", "e", 1});
  for (const auto& vid : L.internal_order)
    for (const auto& cid : spec.tree.children.at(vid))
      for (int copy : {1, 2}) {
        if (spec.tree.is_leaf(cid))
          g.edges.push_back(
              {copy_id(vid, copy), cid, "q_" + cid, copy == 1 ? "top" : "bot", 1});
        else
          g.edges.push_back({copy_id(vid, copy), copy_id(cid, copy), "q_" + cid, "up", 1});
      }
  g.validate();
  return g;
}

SynthesizedFamily synthesize_impl(const FamilySpec& spec,
                                  const std::map<int, std::map<std::string, double>>* waists) {
  spec.validate();
  Layout L = make_layout(spec);

  SynthesizedFamily fam;
  fam.spec = spec;
  int nk = spec.k_max - spec.k_min + 1;
  std::vector<MemberBuild> builds(nk);

  // family members are independent; fan them across a worker pool. Results
  // land in fixed slots, so the output is identical for any worker count.
  int workers = 1;
  if (const char* w = std::getenv("WLAB_WORKERS")) workers = std::max(1, std::atoi(w));
  workers = std::min(workers, nk);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next.fetch_add(1); i < nk; i = next.fetch_add(1)) {
      int k = spec.k_min + i;
      const std::map<std::string, double>* ov =
          waists && waists->count(k) ? &waists->at(k) : nullptr;
      builds[i] = build_member(spec, L, k, ov);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  for (int i = 0; i < nk; ++i) {
    FamilyMember m;
    m.k = spec.k_min + i;
    m.f = functionals(builds[i].atlas);
    for (const auto& [id, n] : builds[i].necks) m.cycle_conformal_length += 2.0 * n.Uout;
    m.atlas = builds[i].atlas;
    fam.members.push_back(std::move(m));
  }
  fam.ground_truth = build_ground_truth(spec, L, builds);
  return fam;
}

}  // namespace

SynthesizedFamily synthesize_family(const FamilySpec& spec) {
  return synthesize_impl(spec, nullptr);
}

DegenerateTorus degenerate_torus(const std::vector<double>& l_schedule, int body_nu,
                                 int body_nv) {
  if (l_schedule.empty())
    fail(ErrorCode::invalid_argument, "degenerate_torus: empty schedule");
  for (std::size_t i = 1; i < l_schedule.size(); ++i)
    if (!(l_schedule[i] < l_schedule[i - 1]))
      fail(ErrorCode::invalid_argument, "degenerate_torus: l_k must strictly decrease");

  FamilySpec spec = FamilySpec::standard(1, 0, int(l_schedule.size()) - 1);
  spec.body_nu = body_nu;
  spec.body_nv = body_nv;
  Layout L = make_layout(spec);

  // choose waists so the two handle spans sum to the target cylinder length:
  // 4 arcosh(rim / waist) = L(l_k)
  std::map<int, std::map<std::string, double>> waists;
  for (std::size_t i = 0; i < l_schedule.size(); ++i) {
    ThinPartGeometry tp(l_schedule[i]);
    double quarter = tp.L() / 4.0;
    // waist = patch / cosh(L/4); heights below ~1e-9 are not representable
    // against unit-sphere positions in double precision
    if (quarter > std::log(2.0 * 0.22 / 1e-9))
      fail(ErrorCode::invalid_argument,
           "degenerate_torus: implied neck waist below the double-precision "
           "floor; shorten the cylinder schedule");
    for (const auto& [id, s] : L.sites) {
      if (!s.leaf) continue;
      waists[int(i)][id] = s.patch / std::cosh(quarter);
    }
  }
  DegenerateTorus out;
  out.family = synthesize_impl(spec, &waists);
  for (const auto& m : out.family.members)
    out.im_omega.push_back(m.cycle_conformal_length / kTwoPi);
  return out;
}

NeckFunctionals neck_contribution(const SynthesizedFamily& fam, int member_index,
                                  const std::string& leaf_id, double alpha,
                                  double alpha0) {
  if (member_index < 0 || member_index >= int(fam.members.size()))
    fail(ErrorCode::out_of_range, "neck_contribution: bad member index");
  const FamilyMember& m = fam.members[member_index];
  const DiscreteImmersion* handle = nullptr;
  for (const auto& c : m.atlas.charts)
    if (c.id == "handle_" + leaf_id) handle = &c;
  if (!handle) fail(ErrorCode::out_of_range, "neck_contribution: unknown leaf " + leaf_id);

  // footprints: the waist (chart center) up to alpha * parent gap scale
  const BubbleVertex* leaf = fam.ground_truth.find(leaf_id);
  std::string parent1;
  for (const auto& e : fam.ground_truth.edges)
    if (e.head == leaf_id) parent1 = e.tail;
  const BubbleVertex* parent = fam.ground_truth.find(parent1);
  double s_child = leaf->scales[member_index];
  double s_parent = parent->scales[member_index];
  double lo = s_child / alpha0;
  double hi = alpha * s_parent;
  if (hi <= lo)
    fail(ErrorCode::out_of_range, "neck_contribution: alpha below the resolvable reach");

  NeckFunctionals out;
  ChartDensities d = chart_densities(*handle, nullptr);
  std::vector<Vec3> pts;
  std::vector<double> A, NPHI, H;
  for (int i = 0; i < handle->chart.nu; ++i) {
    double rho = s_child * std::cosh(handle->chart.u(i));
    if (rho < lo || rho > hi) continue;
    for (int j = 0; j < handle->chart.nv; ++j) {
      std::size_t id = handle->chart.idx(i, j);
      A.push_back(d.area[id]);
      NPHI.push_back(d.nphi[id]);
      H.push_back(d.h[id]);
      if (j % 4 == 0) pts.push_back(handle->positions[id]);
    }
  }
  out.A = pairwise_sum(A);
  out.V = -pairwise_sum(NPHI) / 3.0;
  out.M = pairwise_sum(H);
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b)
      out.diameter = std::max(out.diameter, dist(pts[a], pts[b]));
  return out;
}

std::vector<MacroscopicRow> macroscopic_functional_sum(const SynthesizedFamily& fam) {
  // macroscopic bubbles: the two unit spheres with opposite orientations
  ModelKind s1, s2;
  s1.tag = s2.tag = ModelTag::S;
  s1.orientation = 1;
  s2.orientation = -1;
  ChartRequest req;
  req.nu = 160;
  req.nv = 80;
  Functionals f1 = functionals(make_model(s1, req).atlas);
  Functionals f2 = functionals(make_model(s2, req).atlas);
  Functionals sum;
  sum.A = f1.A + f2.A;
  sum.V = f1.V + f2.V;
  sum.M = f1.M + f2.M;
  std::vector<MacroscopicRow> rows;
  for (std::size_t i = 0; i < fam.members.size(); ++i)
    rows.push_back({fam.members[i].k, fam.members[i].f, sum});
  return rows;
}

ImmersionAtlas coincident_opposite_spheres(double offset_scale, int nu, int nv) {
  ModelKind a, b;
  a.tag = b.tag = ModelTag::S;
  a.orientation = 1;
  b.orientation = -1;
  b.center = {0, 0, std::sqrt(offset_scale)};
  ChartRequest req;
  req.nu = nu;
  req.nv = nv;
  ImmersionAtlas atlas;
  for (const auto& k : {a, b}) {
    auto m = make_model(k, req).atlas;
    atlas.charts.push_back(m.charts[0]);
    atlas.weights.emplace_back();
  }
  return atlas;
}

ImmersionAtlas tangent_equal_spheres(int nu, int nv) {
  ModelKind a, b;
  a.tag = b.tag = ModelTag::S;
  a.center = {0, 0, 1};
  b.center = {0, 0, -1};
  ChartRequest req;
  req.nu = nu;
  req.nv = nv;
  ImmersionAtlas atlas;
  for (const auto& k : {a, b}) {
    auto m = make_model(k, req).atlas;
    atlas.charts.push_back(m.charts[0]);
    atlas.weights.emplace_back();
  }
  return atlas;
}

void save_family(const SynthesizedFamily& fam, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  {
    std::ofstream out(directory + "/family_spec.json");
    out << fam.spec.to_json();
  }
  {
    std::ofstream out(directory + "/ground_truth_graph.json");
    out << fam.ground_truth.to_json();
  }
  {
    std::ofstream out(directory + "/energy_trajectory.csv");
    out << "k,W,E,A,V,M,I,T,cycle_length\n";
    char buf[320];
    for (const auto& m : fam.members) {
      std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                    m.k, m.f.W, m.f.E, m.f.A, m.f.V, m.f.M, m.f.I, m.f.T,
                    m.cycle_conformal_length);
      out << buf;
    }
  }
  for (const auto& m : fam.members)
    save_json(m.atlas, directory + "/member_" + std::to_string(m.k) + ".json");
}

SynthesizedFamily load_family(const std::string& directory) {
  SynthesizedFamily fam;
  {
    std::ifstream in(directory + "/family_spec.json");
    if (!in) fail(ErrorCode::io_error, "missing family_spec.json in " + directory);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    fam.spec = FamilySpec::from_json(text);
  }
  {
    std::ifstream in(directory + "/ground_truth_graph.json");
    if (!in) fail(ErrorCode::io_error, "missing ground_truth_graph.json");
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    fam.ground_truth = BubbleGraph::from_json(text);
  }
  for (int k = fam.spec.k_min; k <= fam.spec.k_max; ++k) {
    FamilyMember m;
    m.k = k;
    m.atlas = load_atlas_json(directory + "/member_" + std::to_string(k) + ".json");
    m.f = functionals(m.atlas);
    fam.members.push_back(std::move(m));
  }
  return fam;
}

}  // namespace wlab
