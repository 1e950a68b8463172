#include <cmath>

#include "doctest.h"
#include "wlab/geometry.hpp"
#include "wlab/models.hpp"

using namespace wlab;

namespace {
constexpr double kPi = 3.14159265358979323846;

DiscreteImmersion flat_chart(int n = 32) {
  DiscreteImmersion imm;
  imm.chart = {DomainKind::rectangle, -1, 1, -1, 1, n, n, false, false};
  imm.sampler = [](double u, double v) {
    return JVec3{Jet2::var_u(u), Jet2::var_v(v), Jet2(0.0)};
  };
  imm.resample();
  return imm;
}

DiscreteImmersion catenoid_chart(int nu = 128, int nv = 48, double T = 4.0) {
  ModelKind k;
  k.tag = ModelTag::C;
  ChartRequest req;
  req.nu = nu;
  req.nv = nv;
  req.extent = T;
  return make_model(k, req).atlas.charts[0];
}

DiscreteImmersion stereo_rect_chart(int n = 64, double R = 1.5) {
  DiscreteImmersion imm;
  imm.chart = {DomainKind::rectangle, -R, R, -R, R, n, n, false, false};
  imm.sampler = [](double u, double v) {
    Jet2 jx = Jet2::var_u(u), jy = Jet2::var_v(v);
    Jet2 r2 = jx * jx + jy * jy;
    Jet2 den = 1.0 / (1.0 + r2);
    return JVec3{2.0 * jx * den, 2.0 * jy * den, (r2 - 1.0) * den};
  };
  imm.resample();
  return imm;
}

}  // namespace

TEST_CASE("pullback metric: flat chart is the identity") {
  auto m = pullback_metric(flat_chart());
  for (double v : m.g11.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
  for (double v : m.g22.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
  for (double v : m.g12.values) CHECK(std::fabs(v) < 1e-14);
}

TEST_CASE("pullback metric: stereographic sphere chart has factor (2/(1+|z|^2))^2") {
  auto imm = stereo_rect_chart(65);  // odd so z=0 is a node
  auto m = pullback_metric(imm);
  int ic = 32, jc = 32;
  CHECK(imm.chart.u(ic) == doctest::Approx(0.0));
  CHECK(m.g11.at(ic, jc) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(m.g22.at(ic, jc) == doctest::Approx(4.0).epsilon(1e-12));
  // spot check off center
  double u = imm.chart.u(40), v = imm.chart.v(20);
  double expect = std::pow(2.0 / (1.0 + u * u + v * v), 2);
  CHECK(m.g11.at(40, 20) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("pullback metric: catenoid chart has factor cosh^2 t") {
  auto imm = catenoid_chart(64, 32, 3.0);
  auto m = pullback_metric(imm);
  for (int i = 0; i < imm.chart.nu; i += 7) {
    double c2 = std::pow(std::cosh(imm.chart.u(i)), 2);
    CHECK(m.g11.at(i, 5) == doctest::Approx(c2).epsilon(1e-12));
    CHECK(m.g22.at(i, 5) == doctest::Approx(c2).epsilon(1e-12));
    CHECK(std::fabs(m.g12.at(i, 5)) < 1e-12 * c2);
  }
}

TEST_CASE("pullback metric: degenerate sample fails whole operation") {
  DiscreteImmersion imm;
  imm.chart = {DomainKind::rectangle, -1, 1, -1, 1, 8, 8, false, false};
  imm.positions.assign(imm.chart.size(), Vec3{0, 0, 0});  // collapsed
  CHECK_THROWS_AS(pullback_metric(imm), Error);
  try {
    pullback_metric(imm);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate_metric);
  }
}

TEST_CASE("conformal factor: flat, catenoid, stereographic sphere") {
  auto lf = conformal_factor(flat_chart());
  for (double v : lf.values) CHECK(std::fabs(v) < 1e-13);

  auto imm = catenoid_chart(64, 32, 3.0);
  auto lc = conformal_factor(imm);
  for (int i = 0; i < imm.chart.nu; i += 5)
    CHECK(lc.at(i, 3) == doctest::Approx(std::log(std::cosh(imm.chart.u(i)))).epsilon(1e-12));

  auto st = stereo_rect_chart(64);
  auto ls = conformal_factor(st);
  for (int i = 0; i < st.chart.nu; i += 9)
    for (int j = 0; j < st.chart.nv; j += 9) {
      double r2 = st.chart.u(i) * st.chart.u(i) + st.chart.v(j) * st.chart.v(j);
      CHECK(ls.at(i, j) == doctest::Approx(std::log(2.0) - std::log1p(r2)).epsilon(1e-12));
    }
}

TEST_CASE("conformal factor: non-conformal chart rejected") {
  DiscreteImmersion imm;
  imm.chart = {DomainKind::rectangle, -1, 1, -1, 1, 16, 16, false, false};
  imm.sampler = [](double u, double v) {
    return JVec3{Jet2::var_u(u) * 2.0, Jet2::var_v(v), Jet2(0.0)};  // anisotropic
  };
  imm.resample();
  CHECK_THROWS_AS(conformal_factor(imm, 1e-6), Error);
}

TEST_CASE("gauss map: flat chart and unit sphere") {
  auto nf = gauss_map(flat_chart());
  for (const auto& n : nf.values) {
    CHECK(n.z == doctest::Approx(1.0));
  }

  ModelKind k;
  k.tag = ModelTag::S;
  ChartRequest req;
  req.nu = 128;
  req.nv = 64;
  auto sph = make_model(k, req).atlas.charts[0];
  auto ns = gauss_map(sph);
  double worst = 0;
  for (int i = 0; i < sph.chart.nu; i += 3)
    for (int j = 0; j < sph.chart.nv; j += 3)
      worst = std::max(worst, dist(ns.at(i, j), -1.0 * normalized(sph.at(i, j))));
  CHECK(worst < 1e-3);  // exact with jets; tolerance covers the FD fallback too
  // FD path at 128x64 on the stereographic rectangle chart
  ChartRequest rr;
  rr.rectangle_atlas = true;
  rr.nu = 128;
  rr.nv = 64;
  rr.extent = 1.2;
  auto rect = make_model(k, rr).atlas.charts[0].without_sampler();
  auto ns2 = gauss_map(rect);
  worst = 0;
  for (int i = 1; i < rect.chart.nu - 1; ++i)
    for (int j = 1; j < rect.chart.nv - 1; ++j)
      worst = std::max(worst, dist(ns2.at(i, j), -1.0 * normalized(rect.at(i, j))));
  CHECK(worst < 1e-3);
}

TEST_CASE("gauss map: catenoid sign convention at (0,0)") {
  auto imm = catenoid_chart(65, 32, 3.0);
  auto n = gauss_map(imm);
  int i0 = 32;  // t = 0
  CHECK(imm.chart.u(i0) == doctest::Approx(0.0));
  CHECK(n.at(i0, 0).x == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::fabs(n.at(i0, 0).y) < 1e-12);
  CHECK(std::fabs(n.at(i0, 0).z) < 1e-12);
}

TEST_CASE("mean curvature: unit sphere |H| = 1, H-vector toward center; minimal surfaces") {
  ModelKind k;
  k.tag = ModelTag::S;
  ChartRequest req;
  req.nu = 128;
  req.nv = 64;
  auto sph = make_model(k, req).atlas.charts[0];
  auto mc = mean_curvature(sph);
  auto n = gauss_map(sph);
  double worst = 0;
  for (int i = 0; i < sph.chart.nu; ++i)
    for (int j = 0; j < sph.chart.nv; ++j) {
      // H always points to the center; on the inward-oriented chart H = +n,
      // on the outward-oriented chart H = -n.
      worst = std::max(worst, dist(mc.H.at(i, j), -1.0 * normalized(sph.at(i, j))));
      worst = std::max(worst, dist(mc.H.at(i, j), n.at(i, j)));
    }
  CHECK(worst < 1e-8);

  ModelKind ko = k;
  ko.orientation = -1;
  auto spho = make_model(ko, req).atlas.charts[0];
  auto mco = mean_curvature(spho);
  auto no = gauss_map(spho);
  worst = 0;
  for (std::size_t a = 0; a < mco.H.values.size(); ++a)
    worst = std::max(worst, dist(mco.H.values[a], -1.0 * no.values[a]));
  CHECK(worst < 1e-8);

  // FD path at 128x64 on a band chart away from the polar compression
  ChartRequest band;
  band.nu = 128;
  band.nv = 64;
  band.extent = 3.0;
  auto sb = make_model(k, band).atlas.charts[0];
  auto fd1 = mean_curvature(sb.without_sampler());
  double e1 = 0;
  for (std::size_t a = 0; a < fd1.H.values.size(); ++a)
    e1 = std::max(e1, std::fabs(norm(fd1.H.values[a]) - 1.0));
  CHECK(e1 < 1e-2);
  auto fd2 = mean_curvature(sb.refined().without_sampler());
  double e2 = 0;
  for (std::size_t a = 0; a < fd2.H.values.size(); ++a)
    e2 = std::max(e2, std::fabs(norm(fd2.H.values[a]) - 1.0));
  CHECK(e1 / e2 > 3.0);  // observed order ~2

  auto cat = catenoid_chart();
  auto mcc = mean_curvature(cat);
  double hmax = 0;
  for (const auto& h : mcc.H.values) hmax = std::max(hmax, norm(h));
  CHECK(hmax < 1e-3);

  auto mcp = mean_curvature(flat_chart());
  for (const auto& h : mcp.H.values) CHECK(norm(h) < 1e-12);
}

TEST_CASE("willmore energy: sphere 4pi (both atlases), truncated catenoid ~0") {
  ModelKind k;
  k.tag = ModelTag::S;
  auto sphere = make_model(k).atlas;
  double W = willmore_energy(sphere);
  CHECK(W == doctest::Approx(4 * kPi).epsilon(1e-3));

  ChartRequest rect;
  rect.rectangle_atlas = true;
  auto sphere2 = make_model(k, rect).atlas;
  CHECK(willmore_energy(sphere2) == doctest::Approx(4 * kPi).epsilon(1e-3));

  ModelKind kc;
  kc.tag = ModelTag::C;
  ChartRequest rc;
  rc.extent = 4.0;
  CHECK(willmore_energy(make_model(kc, rc).atlas) < 1e-6);
}

TEST_CASE("dirichlet energy: catenoid E -> 8pi tanh T") {
  ModelKind kc;
  kc.tag = ModelTag::C;
  ChartRequest rc;
  rc.extent = 5.0;
  double E = dirichlet_energy(make_model(kc, rc).atlas);
  CHECK(E == doctest::Approx(8 * kPi * std::tanh(5.0)).epsilon(1e-4));
}

TEST_CASE("gauss-bonnet residual: sphere p=0 and Clifford torus p=1") {
  ModelKind k;
  k.tag = ModelTag::S;
  ChartRequest req;
  req.nu = 128;
  req.nv = 64;
  auto sphere = make_model(k, req).atlas;
  CHECK(std::fabs(gauss_bonnet_residual(sphere, 0)) < 0.05);

  // stereographically projected Clifford torus: conformal, doubly periodic
  DiscreteImmersion torus;
  torus.chart = {DomainKind::periodic_cylinder, 0, 2 * kPi, 0, 2 * kPi, 48, 48, true, true};
  torus.sampler = [](double u, double v) {
    Jet2 ju = Jet2::var_u(u), jv = Jet2::var_v(v);
    Jet2 den = 1.0 / (std::sqrt(2.0) - sin(jv));
    return JVec3{cos(ju) * den, sin(ju) * den, cos(jv) * den};
  };
  torus.resample();
  auto atlas = ImmersionAtlas::single(torus);
  double W = willmore_energy(atlas);
  double E = dirichlet_energy(atlas);
  CHECK(W == doctest::Approx(2 * kPi * kPi).epsilon(1e-6));
  CHECK(E == doctest::Approx(8 * kPi * kPi).epsilon(1e-2));
  CHECK(std::fabs(gauss_bonnet_residual(atlas, 1)) < 0.01 * E);
}

TEST_CASE("functionals: unit sphere record and radius-2 total mean curvature") {
  ModelKind k;
  k.tag = ModelTag::S;
  auto f = functionals(make_model(k).atlas);
  CHECK(f.A == doctest::Approx(4 * kPi).epsilon(1e-6));
  CHECK(f.V == doctest::Approx(4 * kPi / 3).epsilon(1e-6));
  CHECK(f.I == doctest::Approx(std::cbrt(36 * kPi)).epsilon(1e-6));
  CHECK(f.I == doctest::Approx(4.8360).epsilon(1e-4));
  CHECK(f.M == doctest::Approx(4 * kPi).epsilon(1e-6));
  CHECK(f.T == doctest::Approx(std::sqrt(4 * kPi)).epsilon(1e-6));
  CHECK(f.T == doctest::Approx(3.5449).epsilon(1e-4));

  ModelKind k2 = k;
  k2.scale = 2.0;
  auto f2 = functionals(make_model(k2).atlas);
  CHECK(f2.M == doctest::Approx(8 * kPi).epsilon(1e-6));
}

TEST_CASE("functionals: two disjoint tangent unit spheres, same orientation, T = sqrt(8pi)") {
  ModelKind a, b;
  a.tag = b.tag = ModelTag::S;
  a.center = {0, 0, 1};
  b.center = {0, 0, -1};
  ImmersionAtlas atlas;
  for (auto& m : {a, b}) {
    auto s = make_model(m).atlas;
    atlas.charts.push_back(s.charts[0]);
    atlas.weights.emplace_back();
  }
  auto f = functionals(atlas);
  CHECK(f.T == doctest::Approx(std::sqrt(8 * kPi)).epsilon(1e-6));
  CHECK(f.T == doctest::Approx(5.0133).epsilon(1e-4));
}

TEST_CASE("refinement consistency: quadrature order >= 1.9 on analytic surfaces") {
  ModelKind k;
  k.tag = ModelTag::S;
  ChartRequest coarse;
  coarse.rectangle_atlas = true;
  coarse.nu = 24;
  coarse.nv = 24;
  double errs[3];
  for (int r = 0; r < 3; ++r) {
    ChartRequest req = coarse;
    req.nu = coarse.nu << r;
    req.nv = coarse.nv << r;
    errs[r] = std::fabs(willmore_energy(make_model(k, req).atlas) - 4 * kPi);
  }
  double order1 = std::log2(errs[0] / errs[1]);
  double order2 = std::log2(errs[1] / errs[2]);
  CHECK(order1 > 1.9);
  CHECK(order2 > 1.9);
}

TEST_CASE("quadrature under-resolution detection") {
  ModelKind k;
  k.tag = ModelTag::S;
  ChartRequest req;
  req.nu = 129;
  req.nv = 64;
  auto atlas = make_model(k, req).atlas;
  CHECK_NOTHROW(check_quadrature_resolution(atlas, 1e-3));
  ChartRequest tiny;
  tiny.nu = 17;
  tiny.nv = 16;
  auto coarse = make_model(k, tiny).atlas;
  CHECK_THROWS_AS(check_quadrature_resolution(coarse, 1e-9), Error);
}

TEST_CASE("lorentz quasinorm: constants, 1/|x| on the disk, single spike") {
  // f = c on a weight-1 set
  CHECK(lorentz_quasinorm({2.5, 2.5, 2.5}, {0.3, 0.3, 0.4}, 2.0) ==
        doctest::Approx(2.5).epsilon(1e-12));

  // f(x) = 1/|x| on the unit disk, p = 2: sup_t t^2 mu(1/|x| > t) = pi.
  // Log-spaced rings with exact annulus areas resolve the superlevel sets.
  std::vector<double> vals, wts;
  double q = 1.02, r = 1e-3;
  while (r < 1.0) {
    double rn = std::min(1.0, r * q);
    double mid = std::sqrt(r * rn);
    vals.push_back(1.0 / mid);
    wts.push_back(kPi * (rn * rn - r * r));
    r = rn;
  }
  CHECK(lorentz_quasinorm(vals, wts, 2.0) == doctest::Approx(std::sqrt(kPi)).epsilon(0.03));

  // single spike of weight w
  CHECK(lorentz_quasinorm(std::vector<double>{7.0}, std::vector<double>{0.25}, 2.0) ==
        doctest::Approx(7.0 * std::sqrt(0.25)));
  // empty field
  CHECK(lorentz_quasinorm(std::vector<double>{}, std::vector<double>{}, 2.0) == 0.0);
}

TEST_CASE("lorentz quasinorm properties: homogeneity and monotone domination") {
  std::vector<double> v = {0.3, 1.2, 2.0, 0.7, 1.5};
  std::vector<double> w = {0.1, 0.4, 0.2, 0.8, 0.3};
  double q = lorentz_quasinorm(v, w, 1.7);
  std::vector<double> v3;
  for (double x : v) v3.push_back(3.0 * x);
  CHECK(lorentz_quasinorm(v3, w, 1.7) == doctest::Approx(3.0 * q).epsilon(1e-12));
  std::vector<double> vbig;
  for (double x : v) vbig.push_back(x + 0.5);
  CHECK(lorentz_quasinorm(vbig, w, 1.7) >= q);
}

TEST_CASE("conformal-factor consistency: e^{2 lambda} I reproduces the metric") {
  auto imm = catenoid_chart(64, 32, 3.0);
  auto lam = conformal_factor(imm);
  auto m = pullback_metric(imm);
  for (int i = 0; i < imm.chart.nu; i += 5)
    for (int j = 0; j < imm.chart.nv; j += 5) {
      double e2l = std::exp(2 * lam.at(i, j));
      CHECK(m.g11.at(i, j) == doctest::Approx(e2l).epsilon(1e-10));
      CHECK(m.g22.at(i, j) == doctest::Approx(e2l).epsilon(1e-10));
    }
}
