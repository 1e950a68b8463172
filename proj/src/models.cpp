#include "wlab/models.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace wlab {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
}  // namespace

const char* model_tag_name(ModelTag t) {
  switch (t) {
    case ModelTag::P: return "P";
    case ModelTag::S: return "S";
    case ModelTag::C: return "C";
    case ModelTag::IC1: return "IC1";
    case ModelTag::IC2: return "IC2";
    case ModelTag::unclassified: return "unclassified";
  }
  return "unclassified";
}

ModelTag model_tag_from_name(const std::string& s) {
  if (s == "P") return ModelTag::P;
  if (s == "S") return ModelTag::S;
  if (s == "C") return ModelTag::C;
  if (s == "IC1") return ModelTag::IC1;
  if (s == "IC2") return ModelTag::IC2;
  if (s == "unclassified") return ModelTag::unclassified;
  fail(ErrorCode::invalid_argument, "unknown model tag: " + s);
}

std::string ModelKind::to_json() const {
  nlohmann::json j;
  j["tag"] = model_tag_name(tag);
  j["scale"] = scale;
  j["center"] = {center.x, center.y, center.z};
  j["axis"] = {axis.x, axis.y, axis.z};
  j["inversion_center"] = {inversion_center.x, inversion_center.y, inversion_center.z};
  j["orientation"] = orientation;
  return j.dump();
}

ModelKind ModelKind::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ModelKind k;
  k.tag = model_tag_from_name(j.at("tag").get<std::string>());
  k.scale = j.value("scale", 1.0);
  if (j.contains("center")) k.center = {j["center"][0], j["center"][1], j["center"][2]};
  if (j.contains("axis")) k.axis = {j["axis"][0], j["axis"][1], j["axis"][2]};
  if (j.contains("inversion_center"))
    k.inversion_center = {j["inversion_center"][0], j["inversion_center"][1],
                          j["inversion_center"][2]};
  k.orientation = j.value("orientation", 1);
  return k;
}

namespace {

JVec3 jconst(const Vec3& v) { return JVec3(v); }

AnalyticSampler plane_sampler(double scale, Vec3 center, Vec3 axis) {
  Vec3 e1, e2;
  orthonormal_frame(axis, e1, e2);
  return [=](double u, double v) {
    Jet2 ju = Jet2::var_u(u), jv = Jet2::var_v(v);
    return jconst(center) + jconst(e1) * (ju * scale) + jconst(e2) * (jv * scale);
  };
}

// Log-polar stereographic chart (Mercator form): r = e^t in the stereographic
// coordinate. orientation +1 carries the inward normal.
AnalyticSampler sphere_sampler(double radius, Vec3 center, int orientation) {
  double o = orientation >= 0 ? 1.0 : -1.0;
  return [=](double u, double v) {
    Jet2 jt = Jet2::var_u(u);
    Jet2 jp = Jet2::var_v(v) * o;
    Jet2 sech = 1.0 / cosh(jt);
    JVec3 dir{sech * cos(jp), sech * sin(jp), tanh(jt)};
    return jconst(center) + dir * radius;
  };
}

// Rectangle stereographic chart from the north (pole=+1) or south (pole=-1)
// pole. The southern chart flips y so the overlap map is z -> 1/conj(z).
AnalyticSampler sphere_rect_sampler(double radius, Vec3 center, int orientation,
                                    int pole) {
  double o = orientation >= 0 ? 1.0 : -1.0;
  return [=](double u, double v) {
    Jet2 jx = Jet2::var_u(u);
    Jet2 jy = Jet2::var_v(v) * o;
    if (pole < 0) jy = -jy;
    Jet2 r2 = jx * jx + jy * jy;
    Jet2 den = 1.0 / (1.0 + r2);
    JVec3 dir{2.0 * jx * den, 2.0 * jy * den,
              pole > 0 ? (r2 - 1.0) * den : (1.0 - r2) * den};
    return jconst(center) + dir * radius;
  };
}

AnalyticSampler catenoid_sampler(double waist, Vec3 center, Vec3 axis, int orientation) {
  Vec3 e1, e2;
  orthonormal_frame(axis, e1, e2);
  Vec3 a = normalized(axis);
  double o = orientation >= 0 ? 1.0 : -1.0;
  return [=](double u, double v) {
    Jet2 jt = Jet2::var_u(u);
    Jet2 jp = Jet2::var_v(v) * o;
    Jet2 ch = cosh(jt) * waist;
    return jconst(center) + jconst(e1) * (ch * cos(jp)) + jconst(e2) * (ch * sin(jp)) +
           jconst(a) * (jt * waist);
  };
}

JVec3 apply_inversion(const JVec3& x, const Vec3& p) {
  JVec3 d = x - jconst(p);
  return d / norm2(d);
}

AnalyticSampler compose_inversion(AnalyticSampler base, Vec3 p) {
  return [=](double u, double v) { return apply_inversion(base(u, v), p); };
}

}  // namespace

double distance_to_catenoid(const Vec3& p, double waist, const Vec3& center,
                            const Vec3& axis, double t_max) {
  Vec3 a = normalized(axis);
  Vec3 d = p - center;
  double z0 = dot(d, a);
  double rho0 = norm(d - z0 * a);
  auto f = [&](double t) {
    double dr = waist * std::cosh(t) - rho0;
    double dz = waist * t - z0;
    return dr * dr + dz * dz;
  };
  int n = 4000;
  double best_t = -t_max, best = f(best_t);
  for (int i = 1; i <= n; ++i) {
    double t = -t_max + 2.0 * t_max * i / n;
    double v = f(t);
    if (v < best) { best = v; best_t = t; }
  }
  // golden-section polish
  double lo = std::max(-t_max, best_t - 2.0 * t_max / n);
  double hi = std::min(t_max, best_t + 2.0 * t_max / n);
  const double gr = 0.61803398874989484820;
  double c = hi - gr * (hi - lo), dgs = lo + gr * (hi - lo);
  for (int it = 0; it < 80; ++it) {
    if (f(c) < f(dgs)) { hi = dgs; } else { lo = c; }
    c = hi - gr * (hi - lo);
    dgs = lo + gr * (hi - lo);
  }
  return std::sqrt(f(0.5 * (lo + hi)));
}

namespace {

double default_catenoid_T(double eps_geo = 1e-3) { return 4.0 + std::log(1.0 / eps_geo); }

DiscreteImmersion build_chart(AnalyticSampler s, DomainKind kind, double u0, double u1,
                              double v0, double v1, int nu, int nv, bool pu, bool pv,
                              const std::string& id) {
  DiscreteImmersion imm;
  imm.chart.kind = kind;
  imm.chart.u0 = u0;
  imm.chart.u1 = u1;
  imm.chart.v0 = v0;
  imm.chart.v1 = v1;
  imm.chart.nu = nu;
  imm.chart.nv = nv;
  imm.chart.periodic_u = pu;
  imm.chart.periodic_v = pv;
  imm.sampler = std::move(s);
  imm.id = id;
  imm.resample();
  return imm;
}

ImmersionAtlas sphere_rect_atlas(const ModelKind& k, int nu, int nv, double R) {
  // two stereographic rectangles with a radial quintic partition of unity on
  // the overlap annulus [1/Ro, Ro]
  const double Ro = 2.0;
  ImmersionAtlas atlas;
  for (int pole : {+1, -1}) {
    DiscreteImmersion imm = build_chart(
        sphere_rect_sampler(k.scale, k.center, k.orientation, pole), DomainKind::rectangle,
        -R, R, -R, R, nu, nv, false, false, pole > 0 ? "stereo_n" : "stereo_s");
    imm.role.tag = "body";
    imm.role.center = k.center;
    ScalarField w(imm.chart);
    double L = std::log(Ro);
    for (int i = 0; i < imm.chart.nu; ++i)
      for (int j = 0; j < imm.chart.nv; ++j) {
        double rho = std::hypot(imm.chart.u(i), imm.chart.v(j));
        double q;
        if (rho <= 1.0 / Ro) q = 1.0;
        else if (rho >= Ro) q = 0.0;
        else q = 1.0 - smoothstep5((std::log(rho) + L) / (2.0 * L));
        w.at(i, j) = q;
      }
    atlas.charts.push_back(std::move(imm));
    atlas.weights.push_back(std::move(w));
  }
  return atlas;
}

}  // namespace

ModelSurface make_model(const ModelKind& kind, const ChartRequest& req) {
  if (kind.scale <= 0)
    fail(ErrorCode::invalid_argument, "make_model: scale/radius must be positive");
  ModelSurface out;
  out.kind = kind;
  switch (kind.tag) {
    case ModelTag::P: {
      int nu = req.nu ? req.nu : 64, nv = req.nv ? req.nv : 64;
      double R = req.extent > 0 ? req.extent : 1.0;
      out.atlas = ImmersionAtlas::single(
          build_chart(plane_sampler(kind.scale, kind.center, kind.axis),
                      DomainKind::rectangle, -R, R, -R, R, nu, nv, false, false, "plane"));
      break;
    }
    case ModelTag::S: {
      if (req.rectangle_atlas) {
        int nu = req.nu ? req.nu : 128, nv = req.nv ? req.nv : 128;
        double R = req.extent > 0 ? req.extent : 2.2;
        out.atlas = sphere_rect_atlas(kind, nu, nv, R);
      } else {
        int nu = req.nu ? req.nu : 128, nv = req.nv ? req.nv : 64;
        double T = req.extent > 0 ? req.extent : 9.0;
        DiscreteImmersion imm = build_chart(
            sphere_sampler(kind.scale, kind.center, kind.orientation),
            DomainKind::log_polar_annulus, -T, T, 0.0, kTwoPi, nu, nv, false, true,
            "sphere_mercator");
        imm.role.tag = "body";
        imm.role.center = kind.center;
        out.atlas = ImmersionAtlas::single(std::move(imm));
      }
      break;
    }
    case ModelTag::C: {
      int nu = req.nu ? req.nu : 256, nv = req.nv ? req.nv : 48;
      double T = req.extent > 0 ? req.extent : default_catenoid_T();
      DiscreteImmersion imm = build_chart(
          catenoid_sampler(kind.scale, kind.center, kind.axis, kind.orientation),
          DomainKind::periodic_cylinder, -T, T, 0.0, kTwoPi, nu, nv, false, true,
          "catenoid");
      imm.role.tag = "annulus";
      imm.role.center = kind.center;
      imm.role.axis = kind.axis;
      out.atlas = ImmersionAtlas::single(std::move(imm));
      break;
    }
    case ModelTag::IC1:
    case ModelTag::IC2: {
      int nu = req.nu ? req.nu : 256, nv = req.nv ? req.nv : 48;
      double T = req.extent > 0 ? req.extent : 8.0;
      double d = distance_to_catenoid(kind.inversion_center, kind.scale, kind.center,
                                      kind.axis, T);
      bool on_image = d < kind.scale * 1e-6;
      if (kind.tag == ModelTag::IC1 && !on_image)
        fail(ErrorCode::ic_center_misclassified,
             "IC1 center is off the catenoid image (distance " + std::to_string(d) + ")");
      if (kind.tag == ModelTag::IC2 && on_image)
        fail(ErrorCode::ic_center_misclassified, "IC2 center lies on the catenoid image");
      AnalyticSampler base =
          catenoid_sampler(kind.scale, kind.center, kind.axis, kind.orientation);
      DiscreteImmersion imm =
          build_chart(compose_inversion(base, kind.inversion_center),
                      DomainKind::periodic_cylinder, -T, T, 0.0, kTwoPi, nu, nv, false,
                      true, model_tag_name(kind.tag));
      imm.role.tag = "annulus";
      out.atlas = ImmersionAtlas::single(std::move(imm));
      out.double_point = Vec3{0, 0, 0};  // image of the two catenoid ends
      break;
    }
    case ModelTag::unclassified:
      fail(ErrorCode::invalid_argument, "make_model: unclassified tag");
  }
  return out;
}

ThinPartGeometry::ThinPartGeometry(double length) : l(length) {
  if (!(l > 0) || !(l < 2.0 * std::asinh(1.0)))
    fail(ErrorCode::invalid_argument, "ThinPartGeometry: need 0 < l < 2 arsinh(1)");
}

double ThinPartGeometry::phi() const { return std::asin(std::sinh(l / 2.0)); }

double ThinPartGeometry::L() const { return (kTwoPi / l) * (kPi - 2.0 * phi()); }

double ThinPartGeometry::metric_coeff(double t) const {
  if (t < 0 || t > L()) fail(ErrorCode::out_of_range, "thin_metric_coeff: t outside [0, L]");
  double s = l / (kTwoPi * std::sin(l * t / kTwoPi + phi()));
  return s * s;
}

std::pair<double, double> CylinderChartMap::forward(double r, double theta) const {
  double L = geom.L();
  if (r < std::exp(-L) * (1 - 1e-12) || r > 1 + 1e-12)
    fail(ErrorCode::out_of_range, "cylinder_chart: r outside [e^-L, 1]");
  return {std::log(r) + L, theta};
}

std::pair<double, double> CylinderChartMap::inverse(double t, double theta) const {
  double L = geom.L();
  if (t < -1e-12 || t > L + 1e-12) fail(ErrorCode::out_of_range, "cylinder_chart: t outside [0, L]");
  return {std::exp(t - L), theta};
}

ModulusReduction reduce_modulus(const TorusModulus& m, double degeneration_threshold,
                                int max_iter) {
  std::complex<double> w = m.omega;
  if (!(w.imag() > 0)) fail(ErrorCode::invalid_argument, "reduce_modulus: Im omega must be > 0");
  int it = 0;
  const double eps = 1e-12;
  for (; it < max_iter; ++it) {
    double n = std::floor(w.real() + 0.5);
    w -= n;
    if (std::norm(w) < 1.0 - eps) {
      w = -1.0 / w;
      continue;
    }
    break;
  }
  if (it >= max_iter)
    fail(ErrorCode::non_convergent, "reduce_modulus: no convergence near the domain boundary");
  // boundary identifications of the closed half
  if (std::fabs(w.real() + 0.5) < eps) w += 1.0;
  if (std::fabs(std::norm(w) - 1.0) < eps && w.real() < -eps) w = -1.0 / w;
  if (std::fabs(w.real()) < eps) w = {0.0, w.imag()};
  ModulusReduction r;
  r.reduced.omega = w;
  r.degenerating = w.imag() > degeneration_threshold;
  r.iterations = it;
  return r;
}

EndOrderFit end_order_fit(const DiscreteImmersion& imm, EndSide side,
                          double window_fraction, double tau_conf) {
  double span = imm.chart.u1 - imm.chart.u0;
  if (span < 2.0 * std::log(10.0))
    fail(ErrorCode::invalid_argument, "end_order_fit: radial span must cover >= 2 decades");
  std::vector<double> prof = radial_log_conformal_profile(imm, tau_conf);
  int nu = imm.chart.nu;
  int w = std::max(4, int(window_fraction * nu));
  int trim = std::max(1, nu / 16);  // keep clear of one-sided FD boundary rows
  int lo, hi;
  if (side == EndSide::outer) {
    hi = nu - trim;
    lo = std::max(0, hi - w);
  } else {
    lo = trim;
    hi = std::min(nu, lo + w);
  }
  std::vector<double> xs, ys;
  for (int i = lo; i < hi; ++i) {
    xs.push_back(imm.chart.u(i));
    ys.push_back(prof[i]);
  }
  LineFit f = fit_line(xs, ys);
  double m_real = f.slope + 1.0;
  double m_round = std::round(m_real);
  if (std::fabs(m_real - m_round) > 0.2)
    fail(ErrorCode::ambiguous_order,
         "end_order_fit: slope " + std::to_string(f.slope) + " is not near an integer");
  if (m_round == 0) fail(ErrorCode::zero_order, "end_order_fit: order rounded to zero");
  int m = int(m_round);
  double omega_sum = 0;
  for (int i = lo; i < hi; ++i) omega_sum += prof[i] - (m - 1) * imm.chart.u(i);
  double omega = omega_sum / (hi - lo);

  // growth-ratio cross-check at the fit side
  auto ring_mean = [&](int i) {
    Vec3 s{};
    for (int j = 0; j < imm.chart.nv; ++j) s += imm.at(i, j);
    return s / double(imm.chart.nv);
  };
  auto ring_ratio = [&](int i, const Vec3& ref, bool subtract) {
    double t = imm.chart.u(i);
    double s = 0;
    for (int j = 0; j < imm.chart.nv; ++j) {
      Vec3 p = imm.at(i, j);
      double d = subtract ? dist(p, ref) : norm(p);
      s += d / std::exp(m * t);
    }
    return s / imm.chart.nv;
  };
  EndOrderFit out;
  out.m = m;
  out.coefficient = std::exp(omega);
  out.ratio_expected = out.coefficient / std::abs(m);
  int edge = side == EndSide::outer ? nu - 1 - trim : trim;
  int probe = side == EndSide::outer ? edge - nu / 10 : edge + nu / 10;
  if (side == EndSide::outer) {
    if (m <= -1) out.growth_ratio = ring_ratio(probe, ring_mean(edge), true);
    else out.growth_ratio = ring_ratio(probe, Vec3{}, false);
  } else {
    if (m >= 1) out.growth_ratio = ring_ratio(probe, ring_mean(edge), true);
    else out.growth_ratio = ring_ratio(probe, Vec3{}, false);
  }
  out.slope_residual = std::fabs(f.slope - (m - 1));
  return out;
}

}  // namespace wlab
