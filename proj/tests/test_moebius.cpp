#include <cmath>
#include <random>

#include "doctest.h"
#include "wlab/geometry.hpp"
#include "wlab/models.hpp"
#include "wlab/moebius.hpp"

using namespace wlab;

namespace {
constexpr double kPi = 3.14159265358979323846;

std::vector<Vec3> random_points(int n, unsigned seed, double radius = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-radius, radius);
  std::vector<Vec3> pts;
  for (int i = 0; i < n; ++i) pts.push_back({d(rng), d(rng), d(rng)});
  return pts;
}
}  // namespace

TEST_CASE("apply: inversion, reflection, involution at the origin") {
  CHECK(dist(apply(MoebiusMap::inversion({0, 0, 0}), Vec3{2, 0, 0}), Vec3{0.5, 0, 0}) < 1e-15);
  CHECK(dist(apply(MoebiusMap::reflection({0, 0, 1}), Vec3{1, 2, 3}), Vec3{1, 2, -3}) < 1e-15);
  auto I0 = MoebiusMap::inversion({0, 0, 0});
  for (const Vec3& x : random_points(20, 7)) {
    if (norm(x) < 1e-3) continue;
    CHECK(dist(apply(I0, apply(I0, x)), x) < 1e-12);
  }
}

TEST_CASE("word inverse composes to identity on random points") {
  MoebiusMap m = MoebiusMap::inversion({0.3, -0.2, 0.9})
                     .then(MoebiusMap::reflection({0, 1, 0}))
                     .then(MoebiusMap::similarity(2.5, Mat3::identity(), {1, 0, -1}))
                     .then(MoebiusMap::inversion({-2, 0, 0.4}));
  MoebiusMap mi = m.inverse();
  for (const Vec3& x : random_points(40, 11, 2.0)) {
    Vec3 y;
    try {
      y = apply(m, x);
    } catch (const Error&) {
      continue;  // pole hit: skip that probe
    }
    Vec3 back = apply(mi, y);
    CHECK(dist(back, x) < 1e-10 * std::max(1.0, norm(x)));
  }
}

TEST_CASE("group law: apply(a.then(b)) = b after a") {
  MoebiusMap a = MoebiusMap::inversion({1, 1, 1});
  MoebiusMap b = MoebiusMap::reflection({1, 0, 0}).then(MoebiusMap::translation({0, 2, 0}));
  MoebiusMap ab = a.then(b);
  for (const Vec3& x : random_points(25, 13, 3.0)) {
    if (dist(x, {1, 1, 1}) < 1e-2) continue;
    Vec3 lhs = apply(ab, x);
    Vec3 rhs = apply(b, apply(a, x));
    CHECK(dist(lhs, rhs) < 1e-10 * std::max(1.0, norm(rhs)));
  }
}

TEST_CASE("pole exclusion raises PoleHit") {
  auto I = MoebiusMap::inversion({0, 0, 0});
  CHECK_THROWS_AS(apply(I, Vec3{1e-12, 0, 0}, 1.0, 1e-8), Error);
}

TEST_CASE("moebius json round trip") {
  MoebiusMap m = MoebiusMap::inversion({0.5, 0, -1})
                     .then(MoebiusMap::reflection({0, 0, 1}))
                     .then(MoebiusMap::similarity(0.5, Mat3::identity(), {1, 2, 3}));
  MoebiusMap r = MoebiusMap::from_json(m.to_json());
  REQUIRE(r.word.size() == m.word.size());
  for (const Vec3& x : random_points(10, 17, 2.0)) {
    CHECK(dist(apply(m, x), apply(r, x)) < 1e-14);
  }
}

TEST_CASE("conformal invariance: identity map exact, sphere inversion defect small") {
  ModelKind k;
  k.tag = ModelTag::S;
  ChartRequest req;
  req.nu = 128;
  req.nv = 64;
  auto sphere = make_model(k, req).atlas;
  CHECK(conformal_invariance_check(sphere, MoebiusMap::identity()) == 0.0);

  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  for (int trial = 0; trial < 5; ++trial) {
    Vec3 c{d(rng), d(rng), d(rng)};  // inside, distance > 0.1 from the surface
    double defect = conformal_invariance_check(sphere, MoebiusMap::inversion(c));
    CHECK(defect < 1e-2);
  }
}

TEST_CASE("conformal invariance defect halves (at least) per resolution doubling") {
  ModelKind k;
  k.tag = ModelTag::S;
  MoebiusMap inv = MoebiusMap::inversion({0.4, 0.1, -0.2});
  double defects[2];
  for (int r = 0; r < 2; ++r) {
    ChartRequest req;
    req.rectangle_atlas = true;  // h^2-dominated quadrature
    req.nu = 40 << r;
    req.nv = 40 << r;
    defects[r] = conformal_invariance_check(make_model(k, req).atlas, inv);
  }
  CHECK(defects[0] / defects[1] > 2.0);
}

TEST_CASE("catenoid + off-image inversion reproduces the 8pi Li-Yau jump") {
  ModelKind c;
  c.tag = ModelTag::C;
  ChartRequest req;
  req.nu = 256;
  req.nv = 48;
  req.extent = 8.0;
  auto cat = make_model(c, req).atlas;
  CHECK(willmore_energy(cat) < 1e-6);
  double w_ic = willmore_energy(apply_immersion(MoebiusMap::inversion({0, 0, 0}), cat));
  CHECK(std::fabs(w_ic - 8 * kPi) < 0.005 * 8 * kPi);
}

TEST_CASE("conformality of composed immersions: pullback stays conformal") {
  ModelKind k;
  k.tag = ModelTag::S;
  ChartRequest req;
  req.nu = 64;
  req.nv = 32;
  auto sphere = make_model(k, req).atlas;
  auto moved = apply_immersion(MoebiusMap::inversion({0.3, 0.2, 0.0}), sphere);
  CHECK_NOTHROW(conformal_factor(moved.charts[0], 1e-6));
}

TEST_CASE("rescaled inversion limit: defect O(1/|p_k|), exact zero at origin, reflection limit") {
  // p_k = k e1, K = unit ball sample
  std::vector<Vec3> centers;
  for (int kk = 4; kk <= 128; kk *= 2) centers.push_back({double(kk), 0, 0});
  auto pts = random_points(50, 31);
  auto defects = rescaled_inversion_limit(centers, pts);
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    xs.push_back(std::log(norm(centers[i])));
    ys.push_back(std::log(defects[i]));
  }
  LineFit f = fit_line(xs, ys);
  CHECK(std::fabs(-f.slope - 1.0) < 0.1);  // decay order 1.0 +- 0.1

  // |p|^2 I_p(0) + p = 0 exactly
  auto d0 = rescaled_inversion_limit({{7, 0, 0}}, {Vec3{0, 0, 0}});
  CHECK(d0[0] < 1e-14);

  // nu = e3, test point e1: J_{e3}(e1) = e1
  std::vector<Vec3> cz;
  for (int kk = 8; kk <= 512; kk *= 2) cz.push_back({0, 0, double(kk)});
  auto dz = rescaled_inversion_limit(cz, {Vec3{1, 0, 0}});
  CHECK(dz.back() < 1e-2);
}

TEST_CASE("choose inversion center: acceptance and CenterOnSurface") {
  ModelKind k;
  k.tag = ModelTag::S;
  ChartRequest req;
  req.nu = 64;
  req.nv = 32;
  auto sphere = make_model(k, req).atlas;
  std::vector<Vec3> samples = sphere.charts[0].positions;

  Vec3 c = choose_inversion_center(1.0, {0, 0, 0}, {0.01, 0, 0}, samples);
  CHECK(norm(c) == doctest::Approx(0.01));

  // offset chosen on the surface
  CHECK_THROWS_AS(choose_inversion_center(1.0, {0, 0, 0}, samples[100], samples), Error);
}

TEST_CASE("two-stage normalization I_Q0 o I_Pk as a word") {
  Vec3 P{0.2, 0, 0}, Q0{3, 0, 0};
  MoebiusMap xi = MoebiusMap::inversion(P).then(MoebiusMap::inversion(Q0));
  for (const Vec3& x : random_points(10, 41, 2.0)) {
    if (dist(x, P) < 0.05) continue;
    Vec3 expect = apply(MoebiusMap::inversion(Q0), apply(MoebiusMap::inversion(P), x));
    CHECK(dist(apply(xi, x), expect) < 1e-13);
  }
}
