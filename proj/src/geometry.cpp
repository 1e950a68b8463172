#include "wlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct NodeGeometry {
  Vec3 du, dv, n;
  Sym2 g;
  double detg = 0;
  Vec3 II11, II12, II22;  // normal parts of second derivatives
  Vec3 H;
  double II2 = 0;  // |II|^2_g
};

NodeGeometry node_geometry(const JVec3& jet, const char* what) {
  NodeGeometry r;
  r.du = jet.du();
  r.dv = jet.dv();
  r.g.a11 = dot(r.du, r.du);
  r.g.a12 = dot(r.du, r.dv);
  r.g.a22 = dot(r.dv, r.dv);
  r.detg = r.g.det();
  Vec3 c = cross(r.du, r.dv);
  double cn = norm(c);
  if (!(r.detg > 0.0) || !(cn > 0.0))
    fail(ErrorCode::degenerate_metric, std::string(what) + ": det g <= 0 at a node");
  r.n = c / cn;
  // inverse metric
  double A = r.g.a22 / r.detg, B = -r.g.a12 / r.detg, C = r.g.a11 / r.detg;
  auto perp = [&](const Vec3& w) {
    // w - tangential part, tangential coeffs via inverse metric
    double wu = dot(w, r.du), wv = dot(w, r.dv);
    double a = A * wu + B * wv;
    double b = B * wu + C * wv;
    return w - a * r.du - b * r.dv;
  };
  r.II11 = perp(jet.duu());
  r.II12 = perp(jet.duv());
  r.II22 = perp(jet.dvv());
  r.H = 0.5 * (A * r.II11 + 2.0 * B * r.II12 + C * r.II22);
  const Vec3* II[2][2] = {{&r.II11, &r.II12}, {&r.II12, &r.II22}};
  double Gi[2][2] = {{A, B}, {B, C}};
  double s = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          s += Gi[i][k] * Gi[j][l] * dot(*II[i][j], *II[k][l]);
  r.II2 = s;
  return r;
}

}  // namespace

MetricFields pullback_metric(const DiscreteImmersion& imm) {
  imm.validate();
  MetricFields m{ScalarField(imm.chart), ScalarField(imm.chart), ScalarField(imm.chart)};
  for (int i = 0; i < imm.chart.nu; ++i)
    for (int j = 0; j < imm.chart.nv; ++j) {
      NodeGeometry g = node_geometry(imm.node_jet(i, j), "pullback_metric");
      m.g11.at(i, j) = g.g.a11;
      m.g12.at(i, j) = g.g.a12;
      m.g22.at(i, j) = g.g.a22;
    }
  return m;
}

ScalarField conformal_factor(const DiscreteImmersion& imm, double tau_conf) {
  MetricFields m = pullback_metric(imm);
  ScalarField lam(imm.chart);
  for (int i = 0; i < imm.chart.nu; ++i)
    for (int j = 0; j < imm.chart.nv; ++j) {
      double g11 = m.g11.at(i, j), g12 = m.g12.at(i, j), g22 = m.g22.at(i, j);
      double tr = g11 + g22;
      if (std::fabs(g12) > tau_conf * tr || std::fabs(g11 - g22) > tau_conf * tr)
        fail(ErrorCode::not_conformal,
             "conformal_factor: chart is not conformal within tolerance at node (" +
                 std::to_string(i) + "," + std::to_string(j) + ")");
      lam.at(i, j) = 0.5 * std::log(g11);
    }
  return lam;
}

VectorField gauss_map(const DiscreteImmersion& imm) {
  imm.validate();
  VectorField n(imm.chart);
  for (int i = 0; i < imm.chart.nu; ++i)
    for (int j = 0; j < imm.chart.nv; ++j)
      n.at(i, j) = node_geometry(imm.node_jet(i, j), "gauss_map").n;
  return n;
}

MeanCurvatureResult mean_curvature(const DiscreteImmersion& imm) {
  imm.validate();
  MeanCurvatureResult r;
  r.H = VectorField(imm.chart);
  double defect = 0;
  for (int i = 0; i < imm.chart.nu; ++i)
    for (int j = 0; j < imm.chart.nv; ++j) {
      JVec3 jet = imm.node_jet(i, j);
      NodeGeometry g = node_geometry(jet, "mean_curvature");
      r.H.at(i, j) = g.H;
      // orthogonality of the raw conformal-path candidate e^{-2lambda} dPhi/2
      double tr = g.g.a11 + g.g.a22;
      Vec3 lap = (jet.duu() + jet.dvv()) * (1.0 / tr);  // e^{-2lambda} approx 2/tr
      double hn = norm(lap) + 1e-300;
      double d1 = std::fabs(dot(lap, g.du)) / (hn * std::sqrt(g.g.a11));
      double d2 = std::fabs(dot(lap, g.dv)) / (hn * std::sqrt(g.g.a22));
      defect = std::max(defect, std::max(d1, d2));
    }
  r.orthogonality_defect = defect;
  return r;
}

ChartDensities chart_densities(const DiscreteImmersion& imm, const ScalarField* weight) {
  imm.validate();
  const ChartGrid& g = imm.chart;
  std::size_t n = g.size();
  ChartDensities d;
  d.area.assign(n, 0.0);
  d.w.assign(n, 0.0);
  d.e.assign(n, 0.0);
  d.nphi.assign(n, 0.0);
  d.h.assign(n, 0.0);
  for (int i = 0; i < g.nu; ++i)
    for (int j = 0; j < g.nv; ++j) {
      double pw = weight && !weight->values.empty() ? weight->at(i, j) : 1.0;
      if (pw == 0.0) continue;
      JVec3 jet = imm.node_jet(i, j);
      NodeGeometry ng = node_geometry(jet, "energy");
      double dmu = std::sqrt(ng.detg) * g.quad_weight(i, j) * pw;
      std::size_t id = g.idx(i, j);
      d.area[id] = dmu;
      d.w[id] = norm2(ng.H) * dmu;
      d.e[id] = ng.II2 * dmu;
      d.nphi[id] = dot(ng.n, jet.value()) * dmu;
      d.h[id] = dot(ng.H, ng.n) * dmu;
    }
  return d;
}

namespace {

Functionals accumulate(const ImmersionAtlas& atlas) {
  Functionals f;
  std::vector<double> W, E, A, NPHI, H;
  for (std::size_t c = 0; c < atlas.size(); ++c) {
    const DiscreteImmersion& imm = atlas.chart(c);
    if (!imm.role.quadrature) continue;
    const ScalarField* w = c < atlas.weights.size() && !atlas.weights[c].values.empty()
                               ? &atlas.weights[c]
                               : nullptr;
    ChartDensities d = chart_densities(imm, w);
    W.push_back(pairwise_sum(d.w));
    E.push_back(pairwise_sum(d.e));
    A.push_back(pairwise_sum(d.area));
    NPHI.push_back(pairwise_sum(d.nphi));
    H.push_back(pairwise_sum(d.h));
  }
  f.W = pairwise_sum(W);
  f.E = pairwise_sum(E);
  f.A = pairwise_sum(A);
  f.V = -pairwise_sum(NPHI) / 3.0;
  f.M = pairwise_sum(H);
  f.I = f.V > 1e-300 ? f.A / std::pow(f.V, 2.0 / 3.0) : 0.0;
  f.T = f.A > 0 ? f.M / std::sqrt(f.A) : 0.0;
  return f;
}

}  // namespace

double willmore_energy(const ImmersionAtlas& atlas) { return accumulate(atlas).W; }
double dirichlet_energy(const ImmersionAtlas& atlas) { return accumulate(atlas).E; }
double willmore_energy(const DiscreteImmersion& imm) {
  return willmore_energy(ImmersionAtlas::single(imm));
}
double dirichlet_energy(const DiscreteImmersion& imm) {
  return dirichlet_energy(ImmersionAtlas::single(imm));
}

void check_quadrature_resolution(const ImmersionAtlas& atlas, double rel_tol) {
  ImmersionAtlas coarse;
  for (std::size_t c = 0; c < atlas.size(); ++c) {
    if (!atlas.chart(c).chart.coarsenable())
      fail(ErrorCode::invalid_argument, "quadrature check needs coarsenable grids");
    coarse.charts.push_back(atlas.chart(c).coarsened());
    ScalarField w;
    if (c < atlas.weights.size() && !atlas.weights[c].values.empty()) {
      w.chart = coarse.charts.back().chart;
      w.values.assign(w.chart.size(), 0.0);
      for (int i = 0; i < w.chart.nu; ++i)
        for (int j = 0; j < w.chart.nv; ++j)
          w.at(i, j) = atlas.weights[c].at(2 * i, 2 * j);
    }
    coarse.weights.push_back(std::move(w));
  }
  double wf = willmore_energy(atlas);
  double wc = willmore_energy(coarse);
  if (std::fabs(wf - wc) > rel_tol * std::max(std::fabs(wf), 1.0))
    fail(ErrorCode::quadrature_under_resolved,
         "willmore energy moved by " + std::to_string(std::fabs(wf - wc)) +
             " under 2x coarsening");
}

double gauss_bonnet_residual(const ImmersionAtlas& atlas, int genus) {
  Functionals f = accumulate(atlas);
  return f.E - 4.0 * f.W + 8.0 * kPi * (1.0 - genus);
}

Functionals functionals(const ImmersionAtlas& atlas) { return accumulate(atlas); }

double lorentz_quasinorm(const std::vector<double>& values,
                         const std::vector<double>& weights, double p) {
  if (p <= 1.0) fail(ErrorCode::invalid_argument, "lorentz_quasinorm: p must be > 1");
  if (values.size() != weights.size())
    fail(ErrorCode::invalid_argument, "lorentz_quasinorm: size mismatch");
  std::size_t n = values.size();
  if (n == 0) return 0.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(values[a]) > std::fabs(values[b]);
  });
  double cum = 0, sup = 0;
  for (std::size_t r = 0; r < n; ++r) {
    double w = weights[order[r]];
    if (w < 0) fail(ErrorCode::invalid_argument, "lorentz_quasinorm: negative weight");
    cum += w;
    double t = std::fabs(values[order[r]]);
    sup = std::max(sup, std::pow(t, p) * cum);
  }
  return std::pow(sup, 1.0 / p);
}

double lorentz_quasinorm(const ScalarField& f, const std::vector<double>& area_weights,
                         double p) {
  return lorentz_quasinorm(f.values, area_weights, p);
}

std::vector<double> radial_log_conformal_profile(const DiscreteImmersion& imm,
                                                 double tau_conf) {
  if (imm.chart.kind == DomainKind::rectangle)
    fail(ErrorCode::invalid_argument,
         "radial profile requires a log-polar or cylinder chart");
  ScalarField lam = conformal_factor(imm, tau_conf);
  std::vector<double> prof(imm.chart.nu, 0.0);
  for (int i = 0; i < imm.chart.nu; ++i) {
    double s = 0;
    for (int j = 0; j < imm.chart.nv; ++j) s += lam.at(i, j);
    prof[i] = s / imm.chart.nv - imm.chart.u(i);
  }
  return prof;
}

}  // namespace wlab
