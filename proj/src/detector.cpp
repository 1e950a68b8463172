#include "wlab/detector.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "wlab/geometry.hpp"

namespace wlab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLn2 = 0.69314718055994530942;

struct NodeFrame {
  Vec3 n, nu, nv;  // Gauss map and its chart derivatives
  Sym2 g;
};

NodeFrame gauss_frame(const JVec3& jet) {
  NodeFrame f;
  Vec3 du = jet.du(), dv = jet.dv();
  f.g = {dot(du, du), dot(du, dv), dot(dv, dv)};
  Vec3 c = cross(du, dv);
  double cn = norm(c);
  if (!(cn > 0)) fail(ErrorCode::degenerate_metric, "detector: degenerate node");
  f.n = c / cn;
  Vec3 cu = cross(jet.duu(), dv) + cross(du, jet.duv());
  Vec3 cv = cross(jet.duv(), dv) + cross(du, jet.dvv());
  f.nu = (cu - dot(f.n, cu) * f.n) / cn;
  f.nv = (cv - dot(f.n, cv) * f.n) / cn;
  return f;
}

void require_radial_chart(const DiscreteImmersion& imm, const char* what) {
  if (imm.chart.kind == DomainKind::rectangle)
    fail(ErrorCode::invalid_argument, std::string(what) + ": requires an annulus chart");
}

// circle-averaged planar conformal factor per row, no conformality gate
std::vector<double> loose_radial_profile(const DiscreteImmersion& imm) {
  std::vector<double> prof(imm.chart.nu, 0.0);
  for (int i = 0; i < imm.chart.nu; ++i) {
    double s = 0;
    for (int j = 0; j < imm.chart.nv; ++j) {
      NodeFrame f = gauss_frame(imm.node_jet(i, j));
      s += 0.25 * std::log(f.g.a11 * f.g.a22);
    }
    prof[i] = s / imm.chart.nv - imm.chart.u(i);
  }
  return prof;
}

}  // namespace

std::vector<double> radial_energy_rows(const DiscreteImmersion& imm) {
  require_radial_chart(imm, "radial_energy_rows");
  const ChartGrid& g = imm.chart;
  std::vector<double> rows(g.nu, 0.0);
  for (int i = 0; i < g.nu; ++i) {
    double s = 0;
    for (int j = 0; j < g.nv; ++j) {
      NodeFrame f = gauss_frame(imm.node_jet(i, j));
      s += norm2(f.nu) + norm2(f.nv);
    }
    rows[i] = s * g.dv();
  }
  return rows;
}

double annulus_energy(const DiscreteImmersion& imm, double r1, double r2) {
  require_radial_chart(imm, "annulus_energy");
  if (!(r1 > 0) || !(r2 > r1)) fail(ErrorCode::out_of_range, "annulus_energy: bad radii");
  double u1 = std::log(r1), u2 = std::log(r2);
  const ChartGrid& g = imm.chart;
  if (u1 < g.u0 - 1e-9 || u2 > g.u1 + 1e-9)
    fail(ErrorCode::out_of_range, "annulus_energy: window outside the chart");
  std::vector<double> rows = radial_energy_rows(imm);
  // continuous prefix of the row-density integral; window ends interpolate
  // partial cells so that band values do not snap to the grid
  auto prefix_at = [&](double u) {
    if (u <= g.u0) return 0.0;
    double acc = 0;
    for (int i = 0; i + 1 < g.nu; ++i) {
      double ua = g.u(i), ub = g.u(i + 1);
      if (u >= ub) {
        acc += 0.5 * (rows[i] + rows[i + 1]) * (ub - ua);
        continue;
      }
      double t = (u - ua) / (ub - ua);
      double ru = rows[i] + t * (rows[i + 1] - rows[i]);
      acc += 0.5 * (rows[i] + ru) * (u - ua);
      break;
    }
    return acc;
  };
  return prefix_at(u2) - prefix_at(u1);
}

AnnulusDecomposition neck_decomposition(const DiscreteImmersion& imm, double eps) {
  require_radial_chart(imm, "neck_decomposition");
  if (!(eps > 0) || !(eps < 8.0 * kPi / 3.0))
    fail(ErrorCode::invalid_argument, "neck_decomposition: eps must lie in (0, 8pi/3)");
  const ChartGrid& g = imm.chart;
  double du = g.du();
  if (du > kLn2 / 4.0)
    fail(ErrorCode::unresolved, "neck_decomposition: grid too coarse for dyadic windows");
  std::vector<double> rows = radial_energy_rows(imm);
  int win = std::max(1, int(std::round(kLn2 / du)));
  std::vector<bool> hot(g.nu, false);
  for (int i = 0; i + win < g.nu; ++i) {
    double e = 0;
    for (int t = i; t <= i + win; ++t)
      e += rows[t] * du * ((t == i || t == i + win) ? 0.5 : 1.0);
    if (e >= eps)
      for (int t = i; t <= i + win; ++t) hot[t] = true;
  }
  AnnulusDecomposition out;
  int i = 0;
  while (i < g.nu) {
    int j = i;
    while (j + 1 < g.nu && hot[j + 1] == hot[i]) ++j;
    AnnulusZone z;
    z.u_lo = g.u(i);
    z.u_hi = g.u(j);
    z.energy = j > i ? annulus_energy(imm, std::exp(z.u_lo), std::exp(z.u_hi))
                     : rows[i] * du;
    (hot[i] ? out.zones : out.necks).push_back(z);
    i = j + 1;
  }
  // paper-ordered radii, descending
  out.a_radii.push_back(std::exp(g.u1));
  for (auto it = out.zones.rbegin(); it != out.zones.rend(); ++it) {
    out.b_radii.push_back(std::exp(it->u_hi));
    out.a_radii.push_back(std::exp(it->u_lo));
  }
  out.b_radii.push_back(std::exp(g.u0));
  return out;
}

ExponentFit neck_exponent(const DiscreteImmersion& imm, double u_lo, double u_hi,
                          bool require_span) {
  require_radial_chart(imm, "neck_exponent");
  double width = u_hi - u_lo;
  double trim = width / 8.0;  // alpha_0 margin per side
  double lo = u_lo + trim, hi = u_hi - trim;
  if (require_span && hi - lo < 1.5 * std::log(10.0))
    fail(ErrorCode::unresolved,
         "neck_exponent: trimmed stretch spans less than 1.5 decades");
  std::vector<double> prof = loose_radial_profile(imm);
  std::vector<double> xs, ys;
  for (int i = 0; i < imm.chart.nu; ++i) {
    double u = imm.chart.u(i);
    if (u < lo || u > hi) continue;
    xs.push_back(u);
    ys.push_back(prof[i]);
  }
  if (xs.size() < 4) fail(ErrorCode::unresolved, "neck_exponent: too few rows in the stretch");
  LineFit f = fit_line(xs, ys);
  ExponentFit out;
  out.slope = f.slope;
  double m_real = f.slope + 1.0;
  double m_round = std::round(m_real);
  out.residual = std::fabs(m_real - m_round);
  if (out.residual > 1.0 / 3.0)
    fail(ErrorCode::ambiguous_order, "neck_exponent: slope residual above delta = 1/3");
  if (m_round == 0) fail(ErrorCode::zero_order, "neck_exponent: order rounded to zero");
  out.m = int(m_round);
  return out;
}

namespace {

struct PieceMeasure {
  double W = 0, E = 0, A = 0;
  double umbilicity = 0;  // mass-weighted mean of ||II|^2 - 2|H|^2| / |II|^2
};

PieceMeasure measure_rows(const DiscreteImmersion& imm, int i0, int i1,
                          const ScalarField* weight) {
  PieceMeasure p;
  std::vector<double> W, E, A, U;
  const ChartGrid& g = imm.chart;
  for (int i = i0; i <= i1; ++i)
    for (int j = 0; j < g.nv; ++j) {
      double pw = weight && !weight->values.empty() ? weight->at(i, j) : 1.0;
      if (pw <= 0) continue;
      JVec3 jet = imm.node_jet(i, j);
      Vec3 du = jet.du(), dv = jet.dv();
      Sym2 met{dot(du, du), dot(du, dv), dot(dv, dv)};
      double detg = met.det();
      if (!(detg > 0)) fail(ErrorCode::degenerate_metric, "classify: degenerate node");
      double Aq = met.a22 / detg, Bq = -met.a12 / detg, Cq = met.a11 / detg;
      auto perp = [&](const Vec3& w) {
        double wu = dot(w, du), wv = dot(w, dv);
        return w - (Aq * wu + Bq * wv) * du - (Bq * wu + Cq * wv) * dv;
      };
      Vec3 II11 = perp(jet.duu()), II12 = perp(jet.duv()), II22 = perp(jet.dvv());
      Vec3 H = 0.5 * (Aq * II11 + 2.0 * Bq * II12 + Cq * II22);
      const Vec3* II[2][2] = {{&II11, &II12}, {&II12, &II22}};
      double Gi[2][2] = {{Aq, Bq}, {Bq, Cq}};
      double ii2 = 0;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int c = 0; c < 2; ++c)
            for (int d = 0; d < 2; ++d)
              ii2 += Gi[a][c] * Gi[b][d] * dot(*II[a][b], *II[c][d]);
      double dmu = std::sqrt(detg) * g.quad_weight(i, j) * pw;
      A.push_back(dmu);
      W.push_back(norm2(H) * dmu);
      E.push_back(ii2 * dmu);
      if (ii2 > 1e-30) U.push_back(std::fabs(ii2 - 2.0 * norm2(H)) / ii2 * ii2 * dmu);
    }
  p.A = pairwise_sum(A);
  p.W = pairwise_sum(W);
  p.E = pairwise_sum(E);
  p.umbilicity = p.E > 1e-30 ? pairwise_sum(U) / p.E : 0.0;
  return p;
}

ZoneClass classify_measure(const PieceMeasure& p) {
  ZoneClass z;
  z.W = p.W;
  z.E = p.E;
  z.A = p.A;
  // flat pieces carry no bending energy at their own scale
  if (p.E < 0.15) {
    z.tag = ModelTag::P;
    z.residual = p.E;
    return z;
  }
  // score the curved alternatives: sphere E = 2W and umbilic, catenoid W ~ 0,
  // inverted catenoids by Willmore level (closed, non-minimal, non-umbilic)
  double ratio = p.W / p.E;  // 1/2 sphere, 0 catenoid, 1/3 IC2, <1/4 IC1-ish
  double score_S = std::fabs(ratio - 0.5) * 2.0 + p.umbilicity;
  double score_C = ratio * 2.0 + std::max(0.0, 1.0 - p.E / (4.0 * kPi));
  double score_IC2 = std::fabs(p.W - 8.0 * kPi) / (8.0 * kPi) + std::fabs(ratio - 1.0 / 3.0);
  double score_IC1 = std::fabs(p.W - 4.0 * kPi) / (4.0 * kPi) + std::max(0.0, 0.5 - p.umbilicity);
  struct Cand {
    ModelTag tag;
    double s;
  } cands[] = {{ModelTag::S, score_S},
               {ModelTag::C, score_C},
               {ModelTag::IC2, score_IC2},
               {ModelTag::IC1, score_IC1}};
  std::sort(std::begin(cands), std::end(cands),
            [](const Cand& a, const Cand& b) { return a.s < b.s; });
  z.residual = cands[0].s;
  if (cands[0].s > 0.8 || cands[1].s < cands[0].s * 1.2) {
    z.tag = ModelTag::unclassified;
    return z;
  }
  z.tag = cands[0].tag;
  return z;
}

}  // namespace

ZoneClass classify_bubble(const DiscreteImmersion& imm, double u_lo, double u_hi) {
  require_radial_chart(imm, "classify_bubble");
  int i0 = -1, i1 = -1;
  for (int i = 0; i < imm.chart.nu; ++i) {
    double u = imm.chart.u(i);
    if (u < u_lo || u > u_hi) continue;
    if (i0 < 0) i0 = i;
    i1 = i;
  }
  if (i0 < 0 || i1 - i0 < 3)
    fail(ErrorCode::unresolved, "classify_bubble: zone not resolved by the grid");
  PieceMeasure p = measure_rows(imm, i0, i1, nullptr);
  return classify_measure(p);
}

ZoneClass classify_piece(const std::vector<const DiscreteImmersion*>& charts,
                         const std::vector<const ScalarField*>& weights) {
  PieceMeasure total;
  std::vector<double> Ws, Es, As, Us;
  for (std::size_t c = 0; c < charts.size(); ++c) {
    PieceMeasure p = measure_rows(*charts[c], 0, charts[c]->chart.nu - 1,
                                  c < weights.size() ? weights[c] : nullptr);
    Ws.push_back(p.W);
    Es.push_back(p.E);
    As.push_back(p.A);
    Us.push_back(p.umbilicity * p.E);
  }
  total.W = pairwise_sum(Ws);
  total.E = pairwise_sum(Es);
  total.A = pairwise_sum(As);
  total.umbilicity = total.E > 1e-30 ? pairwise_sum(Us) / total.E : 0;
  return classify_measure(total);
}

namespace {

// ---- graph extraction machinery ----

struct BodyInfo {
  const DiscreteImmersion* chart = nullptr;
  const ScalarField* weight = nullptr;
  std::vector<Vec3> cloud;  // subsample
  Vec3 base;                // canonical base node position
  double mean_radius = 0;
};

struct AnnulusInfo {
  const DiscreteImmersion* chart = nullptr;
  Vec3 center;
  double rim_outer = 0;  // footprint at the chart's outer end
  int sheet_hi = -1, sheet_lo = -1;  // matched body per end (u1 / u0 side)
  bool is_handle = false;            // ends on two different sheets
  AnnulusDecomposition dec;
};

double cloud_distance(const Vec3& p, const std::vector<Vec3>& cloud) {
  double best = 1e300;
  for (const auto& q : cloud) best = std::min(best, norm2(p - q));
  return std::sqrt(best);
}

// mean <n, rhat> over a row; the outer sheet of the shell has inward normals
// (negative sign), the inner sheet outward ones
double row_orientation(const DiscreteImmersion& imm, int row) {
  double s = 0;
  for (int j = 0; j < imm.chart.nv; ++j) {
    NodeFrame f = gauss_frame(imm.node_jet(row, j));
    Vec3 p = imm.at(row, j);
    s += dot(f.n, normalized(p));
  }
  return s / imm.chart.nv;
}

double chart_orientation(const DiscreteImmersion& imm) {
  double s = 0;
  int rows = 0;
  for (int i = 0; i < imm.chart.nu; i += std::max(1, imm.chart.nu / 8)) {
    s += row_orientation(imm, i);
    ++rows;
  }
  return s / rows;
}

Vec3 ring_mean(const DiscreteImmersion& imm, int row) {
  Vec3 s{};
  for (int j = 0; j < imm.chart.nv; ++j) s += imm.at(row, j);
  return s / double(imm.chart.nv);
}

double ring_footprint(const DiscreteImmersion& imm, int row) {
  Vec3 c = ring_mean(imm, row);
  double s = 0;
  for (int j = 0; j < imm.chart.nv; ++j) s += dist(imm.at(row, j), c);
  return s / imm.chart.nv;
}

struct MemberScan {
  std::vector<BodyInfo> bodies;
  std::vector<AnnulusInfo> annuli;   // same order as atlas charts
  double sheet_gap = 0;              // median body-to-body distance
};

MemberScan scan_member(const ImmersionAtlas& atlas, double eps) {
  MemberScan ms;
  for (std::size_t c = 0; c < atlas.size(); ++c) {
    const DiscreteImmersion& imm = atlas.chart(c);
    if (imm.role.tag == "body") {
      BodyInfo b;
      b.chart = &imm;
      b.weight = c < atlas.weights.size() && !atlas.weights[c].values.empty()
                     ? &atlas.weights[c]
                     : nullptr;
      for (std::size_t n = 0; n < imm.positions.size(); n += 7)
        b.cloud.push_back(imm.positions[n]);
      b.base = imm.at(imm.chart.nu / 2, 0);
      double r = 0;
      for (const auto& p : b.cloud) r += norm(p);
      b.mean_radius = r / b.cloud.size();
      ms.bodies.push_back(std::move(b));
    } else if (imm.role.tag == "annulus") {
      AnnulusInfo a;
      a.chart = &imm;
      a.center = imm.role.center;
      a.rim_outer = ring_footprint(imm, imm.chart.nu - 1);
      a.dec = neck_decomposition(imm, eps);
      ms.annuli.push_back(std::move(a));
    }
  }
  if (ms.bodies.size() != 2 && !ms.bodies.empty() && !ms.annuli.empty())
    fail(ErrorCode::unresolved, "extract_graph: expected exactly two sheet bodies");
  // deterministic sheet order: the outer sheet (inward normals) first
  std::sort(ms.bodies.begin(), ms.bodies.end(), [](const BodyInfo& x, const BodyInfo& y) {
    return chart_orientation(*x.chart) < chart_orientation(*y.chart);
  });
  if (ms.bodies.size() == 2) {
    // the sheets are radial graphs; away from the patches the gap is the
    // radius difference, so compare the PoU-interior radius medians
    auto radius_median = [&](const BodyInfo& b) {
      std::vector<double> r;
      const DiscreteImmersion& imm = *b.chart;
      for (int i = 0; i < imm.chart.nu; i += 2)
        for (int j = 0; j < imm.chart.nv; j += 2) {
          double w = b.weight ? b.weight->at(i, j) : 1.0;
          if (w > 0.95) r.push_back(norm(imm.at(i, j)));
        }
      std::sort(r.begin(), r.end());
      return r[r.size() / 2];
    };
    ms.sheet_gap = std::fabs(radius_median(ms.bodies[0]) - radius_median(ms.bodies[1]));
  }
  for (auto& a : ms.annuli) {
    a.sheet_hi = row_orientation(*a.chart, a.chart->chart.nu - 1) < 0 ? 0 : 1;
    a.sheet_lo = row_orientation(*a.chart, 0) < 0 ? 0 : 1;
    a.is_handle = a.sheet_hi != a.sheet_lo;
  }
  return ms;
}

struct ZoneSignature {
  std::vector<int> zone_counts;  // per annulus chart
  bool operator==(const ZoneSignature& o) const { return zone_counts == o.zone_counts; }
};

ZoneSignature signature(const MemberScan& ms) {
  ZoneSignature s;
  for (const auto& a : ms.annuli) s.zone_counts.push_back(a.dec.N());
  return s;
}

}  // namespace

BubbleGraph extract_graph(const std::vector<const ImmersionAtlas*>& members,
                          const std::vector<int>& k_values, double eps,
                          const ExtractOptions& opts) {
  if (members.empty() || members.size() != k_values.size())
    fail(ErrorCode::invalid_argument, "extract_graph: empty or mismatched family");

  std::vector<MemberScan> scans;
  for (const auto* m : members) scans.push_back(scan_member(*m, eps));

  // the degenerate no-annulus case: a single macroscopic surface
  if (scans.back().annuli.empty()) {
    BubbleGraph g;
    g.genus = 0;
    g.k_values = k_values;
    BubbleVertex v;
    v.id = "body";
    v.kind = VertexKind::thick;
    std::vector<const DiscreteImmersion*> cs;
    std::vector<const ScalarField*> ws;
    for (const auto& b : scans.back().bodies) {
      cs.push_back(b.chart);
      ws.push_back(b.weight);
    }
    ZoneClass zc = classify_piece(cs, ws);
    v.limit_class = zc.tag;
    for (std::size_t mi = 0; mi < scans.size(); ++mi) {
      v.scales.push_back(std::sqrt(std::max(zc.A, 1e-30) / (4.0 * kPi)));
      v.positions.push_back(scans[mi].bodies.empty() ? Vec3{}
                                                     : scans[mi].bodies[0].base);
    }
    g.vertices.push_back(v);
    return g;
  }

  // trailing window with a zone structure matching the finest member
  ZoneSignature target = signature(scans.back());
  std::size_t first = scans.size();
  while (first > 0 && signature(scans[first - 1]) == target) --first;
  std::size_t window = scans.size() - first;
  if (int(window) < std::min<int>(opts.min_consistent_members, int(scans.size())))
    fail(ErrorCode::inconsistent_across_k,
         "extract_graph: zone structure unstable across the trailing k-window");

  const MemberScan& ref = scans.back();
  std::vector<int> ks(k_values.begin() + first, k_values.end());
  std::size_t nk = ks.size();

  BubbleGraph g;
  g.k_values = ks;

  auto sheet_name = [](int s) { return s == 0 ? std::string("out") : std::string("in"); };

  // spheres and sheet-root thick vertices
  for (int s = 0; s < 2; ++s) {
    BubbleVertex sphere;
    sphere.id = "S_" + sheet_name(s);
    sphere.kind = VertexKind::conc;
    std::vector<const DiscreteImmersion*> cs{ref.bodies[s].chart};
    std::vector<const ScalarField*> ws{ref.bodies[s].weight};
    ZoneClass zc = classify_piece(cs, ws);
    sphere.limit_class = zc.tag;
    sphere.R = {"z"};
    BubbleVertex root;
    root.id = "w_" + sheet_name(s);
    root.kind = VertexKind::thick;
    root.limit_class = ModelTag::P;  // flat at the gap scale; verified below
    root.R = {"e"};
    for (std::size_t mi = first; mi < scans.size(); ++mi) {
      const MemberScan& msc = scans[mi];
      std::vector<const DiscreteImmersion*> cs2{msc.bodies[s].chart};
      std::vector<const ScalarField*> ws2{msc.bodies[s].weight};
      ZoneClass z2 = classify_piece(cs2, ws2);
      sphere.scales.push_back(std::sqrt(std::max(z2.A, 1e-30) / (4.0 * kPi)));
      sphere.positions.push_back(msc.bodies[s].base * 0.0);
      root.scales.push_back(msc.sheet_gap);
      root.positions.push_back(msc.bodies[s].base);
    }
    g.vertices.push_back(sphere);
    g.vertices.push_back(root);
    g.edges.push_back({sphere.id, root.id, "z", "e", 1});
  }

  // internal thick vertices from patch annuli: same-sheet annuli paired by
  // center direction across the two sheets
  struct PatchPair {
    std::string id;
    Vec3 center;
    double outer = 0;
    int idx_out = -1, idx_in = -1;  // annulus indices per sheet
  };
  std::vector<PatchPair> patches;
  for (std::size_t a = 0; a < ref.annuli.size(); ++a) {
    const AnnulusInfo& ai = ref.annuli[a];
    if (ai.is_handle) continue;
    bool placed = false;
    for (auto& p : patches) {
      if (dist(normalized(p.center), normalized(ai.center)) < 0.2) {
        (ai.sheet_hi == 0 ? p.idx_out : p.idx_in) = int(a);
        p.outer = std::max(p.outer, ai.rim_outer);
        placed = true;
        break;
      }
    }
    if (!placed) {
      PatchPair p;
      p.id = "v" + std::to_string(patches.size() + 1);
      p.center = ai.center;
      p.outer = ai.rim_outer;
      (ai.sheet_hi == 0 ? p.idx_out : p.idx_in) = int(a);
      patches.push_back(p);
    }
  }
  for (const auto& p : patches)
    if (p.idx_out < 0 || p.idx_in < 0)
      fail(ErrorCode::unresolved, "extract_graph: unpaired patch annulus");

  std::map<std::string, int> patch_m;  // exponent toward the parent
  for (const auto& p : patches) {
    for (int side = 0; side < 2; ++side) {
      int idx = side == 0 ? p.idx_out : p.idx_in;
      const AnnulusInfo& ai = ref.annuli[idx];
      BubbleVertex v;
      v.id = p.id + "_" + sheet_name(side);
      v.kind = VertexKind::thick;
      ZoneClass zc = classify_bubble(*ai.chart, ai.chart->chart.u0, ai.chart->chart.u1);
      v.limit_class = zc.tag;
      v.Q = {"up"};
      double span = ai.chart->chart.u1 - ai.chart->chart.u0;
      double margin = std::min(opts.quiet_margin, span / 8.0);
      ExponentFit fit = neck_exponent(*ai.chart, ai.chart->chart.u0 + margin,
                                      ai.chart->chart.u1 - margin, false);
      patch_m[v.id] = fit.m;
      for (std::size_t mi = first; mi < scans.size(); ++mi) {
        const MemberScan& msc = scans[mi];
        const AnnulusInfo& po = msc.annuli[p.idx_out];
        const AnnulusInfo& pi = msc.annuli[p.idx_in];
        // gap at the dimple floor: inner rims of the paired charts
        Vec3 rim_o = ring_mean(*po.chart, 0), rim_i = ring_mean(*pi.chart, 0);
        v.scales.push_back(dist(rim_o, rim_i));
        v.positions.push_back(ring_mean(*msc.annuli[idx].chart, 0));
      }
      g.vertices.push_back(v);
    }
  }

  // catenoid leaves from handle zones
  struct LeafRec {
    std::string id;
    std::size_t annulus = 0;
  };
  std::vector<LeafRec> leaves;
  for (std::size_t a = 0; a < ref.annuli.size(); ++a) {
    const AnnulusInfo& ai = ref.annuli[a];
    if (!ai.is_handle) continue;
    if (ai.dec.N() != 1)
      fail(ErrorCode::unresolved, "extract_graph: handle chart without a single waist zone");
    LeafRec lr;
    lr.id = "c" + std::to_string(leaves.size() + 1);
    lr.annulus = a;
    leaves.push_back(lr);
  }
  if (leaves.empty()) fail(ErrorCode::unresolved, "extract_graph: no catenoid zones found");

  for (const auto& lr : leaves) {
    const AnnulusInfo& ai = ref.annuli[lr.annulus];
    const AnnulusZone& z = ai.dec.zones[0];
    BubbleVertex v;
    v.id = lr.id;
    v.kind = VertexKind::thin;
    v.limit_class = classify_bubble(*ai.chart, z.u_lo, z.u_hi).tag;
    v.Q = {"bot", "top"};
    for (std::size_t mi = first; mi < scans.size(); ++mi) {
      const AnnulusInfo& am = scans[mi].annuli[lr.annulus];
      const AnnulusZone& zm = am.dec.zones[0];
      std::vector<double> prof = loose_radial_profile(*am.chart);
      // the waist circle is the conformal-factor minimum of the zone; anchoring
      // there makes the scale estimate independent of the eps-dependent zone
      // extent
      double lam_min = 1e300;
      for (int i = 0; i < am.chart->chart.nu; ++i) {
        double u = am.chart->chart.u(i);
        if (u < zm.u_lo || u > zm.u_hi) continue;
        lam_min = std::min(lam_min, prof[i] + u);
      }
      v.scales.push_back(std::exp(lam_min));
      int mid_row = 0;
      double best = 1e300;
      double u_mid = 0.5 * (zm.u_lo + zm.u_hi);
      for (int i = 0; i < am.chart->chart.nu; ++i)
        if (std::fabs(am.chart->chart.u(i) - u_mid) < best) {
          best = std::fabs(am.chart->chart.u(i) - u_mid);
          mid_row = i;
        }
      v.positions.push_back(ring_mean(*am.chart, mid_row));
    }
    g.vertices.push_back(v);

    // edges per side, exponent from the quiet stretch between zone and rim
    for (int side = 0; side < 2; ++side) {
      bool upper = side == 0;  // u > zone side
      int sheet = upper ? ai.sheet_hi : ai.sheet_lo;
      double q_lo = upper ? z.u_hi : ai.chart->chart.u0 + opts.quiet_margin;
      double q_hi = upper ? ai.chart->chart.u1 - opts.quiet_margin : z.u_lo;
      ExponentFit fit = neck_exponent(*ai.chart, q_lo, q_hi, false);
      // the lower stretch reads the chart through r -> 1/r; normalizing the
      // edge orientation flips the exponent sign
      if (!upper) fit.m = -fit.m;
      // parent: smallest containing patch on this sheet, else the sheet root
      std::string parent = "w_" + sheet_name(sheet);
      double best_outer = 1e300;
      for (const auto& p : patches) {
        double d = dist(normalized(p.center), normalized(ai.center));
        if (d < opts.patch_containment * p.outer && p.outer < best_outer) {
          parent = p.id + "_" + sheet_name(sheet);
          best_outer = p.outer;
        }
      }
      BubbleVertex* pv = g.find(parent);
      std::string q1 = "at_" + lr.id;
      pv->Q.push_back(q1);
      g.edges.push_back({parent, lr.id, q1, sheet == 0 ? "top" : "bot", fit.m});
    }
  }

  // edges root -> patch vertices (nesting among patches or to the root)
  for (const auto& p : patches) {
    for (int side = 0; side < 2; ++side) {
      std::string child = p.id + "_" + sheet_name(side);
      std::string parent = "w_" + sheet_name(side);
      double best_outer = 1e300;
      for (const auto& q : patches) {
        if (q.id == p.id) continue;
        double d = dist(normalized(q.center), normalized(p.center));
        if (d < opts.patch_containment * q.outer && q.outer > p.outer &&
            q.outer < best_outer) {
          parent = q.id + "_" + sheet_name(side);
          best_outer = q.outer;
        }
      }
      BubbleVertex* pv = g.find(parent);
      std::string q1 = "at_" + p.id;
      pv->Q.push_back(q1);
      g.edges.push_back({parent, child, q1, "up", patch_m[child]});
    }
  }

  int cats = 0;
  for (const auto& v : g.vertices)
    if (v.limit_class == ModelTag::C) ++cats;
  g.genus = cats - 1;
  g.validate();
  if (first_betti(g) != g.genus)
    fail(ErrorCode::inconsistent_across_k,
         "extract_graph: Betti number disagrees with the catenoid count");
  return g;
}

}  // namespace wlab
