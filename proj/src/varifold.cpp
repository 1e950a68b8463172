#include "wlab/varifold.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "wlab/geometry.hpp"

namespace wlab {

namespace {
constexpr double kPi = 3.14159265358979323846;

double tangential_divergence(const Vec3& normal, const Mat3& Df) {
  double tr = Df(0, 0) + Df(1, 1) + Df(2, 2);
  Vec3 Dn = Df * normal;
  return tr - dot(normal, Dn);
}
}  // namespace

double Varifold2::mass() const {
  std::vector<double> m;
  m.reserve(atoms.size());
  for (const auto& a : atoms) m.push_back(a.w * a.theta);
  return pairwise_sum(m);
}

double Varifold2::willmore() const {
  if (!carries_H) fail(ErrorCode::invalid_argument, "varifold willmore: no H attached");
  std::vector<double> m;
  m.reserve(atoms.size());
  for (const auto& a : atoms) m.push_back(norm2(a.H) * a.w * a.theta);
  return pairwise_sum(m);
}

Vec3 Varifold2::bbox_min() const {
  Vec3 lo{1e300, 1e300, 1e300};
  for (const auto& a : atoms)
    for (int c = 0; c < 3; ++c) lo[c] = std::min(lo[c], a.x[c]);
  return lo;
}

Vec3 Varifold2::bbox_max() const {
  Vec3 hi{-1e300, -1e300, -1e300};
  for (const auto& a : atoms)
    for (int c = 0; c < 3; ++c) hi[c] = std::max(hi[c], a.x[c]);
  return hi;
}

double Varifold2::diameter() const { return norm(bbox_max() - bbox_min()); }

void Varifold2::validate() const {
  for (const auto& a : atoms) {
    if (!(a.w > 0)) fail(ErrorCode::invalid_argument, "varifold atom with weight <= 0");
    if (a.theta < 1) fail(ErrorCode::invalid_argument, "varifold atom with density < 1");
  }
}

Vec3 TestField::value(const Vec3& x) const {
  double q = norm2(x - center) / (radius * radius);
  if (q >= 1.0) return {0, 0, 0};
  double psi = (1.0 - q) * (1.0 - q);
  return direction * psi;
}

Mat3 TestField::derivative(const Vec3& x) const {
  Mat3 z{};
  double r2 = radius * radius;
  double q = norm2(x - center) / r2;
  if (q >= 1.0) return z;
  Vec3 grad = (x - center) * (-4.0 * (1.0 - q) / r2);
  return Mat3::outer(direction, grad);
}

std::vector<TestField> default_test_fields(const Varifold2& mu) {
  Vec3 lo = mu.bbox_min(), hi = mu.bbox_max();
  double diam = norm(hi - lo);
  std::vector<TestField> fields;
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b)
      for (int c = 0; c < 5; ++c) {
        Vec3 ctr{lo.x + (hi.x - lo.x) * a / 4.0, lo.y + (hi.y - lo.y) * b / 4.0,
                 lo.z + (hi.z - lo.z) * c / 4.0};
        for (double rf : {0.1, 0.2, 0.4})
          for (int axis = 0; axis < 3; ++axis)
            for (double sgn : {1.0, -1.0}) {
              Vec3 d{};
              d[axis] = sgn;
              fields.push_back(TestField{ctr, rf * diam, d});
            }
      }
  return fields;
}

Varifold2 varifold_from_immersion(const ImmersionAtlas& atlas, int density_override) {
  if (density_override < 1)
    fail(ErrorCode::invalid_argument, "varifold: density override must be >= 1");
  Varifold2 mu;
  mu.carries_H = true;
  for (std::size_t c = 0; c < atlas.size(); ++c) {
    const DiscreteImmersion& imm = atlas.chart(c);
    if (!imm.role.quadrature) continue;
    const ChartGrid& g = imm.chart;
    for (int i = 0; i < g.nu; ++i)
      for (int j = 0; j < g.nv; ++j) {
        double pw = atlas.weight(c, i, j);
        if (pw <= 0) continue;
        JVec3 jet = imm.node_jet(i, j);
        Vec3 du = jet.du(), dv = jet.dv();
        Sym2 met{dot(du, du), dot(du, dv), dot(dv, dv)};
        double detg = met.det();
        Vec3 cr = cross(du, dv);
        double cn = norm(cr);
        if (!(detg > 0) || !(cn > 0))
          fail(ErrorCode::degenerate_metric, "varifold_from_immersion: degenerate node");
        VarifoldAtom a;
        a.x = jet.value();
        a.normal = cr / cn;
        a.w = std::sqrt(detg) * g.quad_weight(i, j) * pw;
        a.theta = density_override;
        double A = met.a22 / detg, B = -met.a12 / detg, C = met.a11 / detg;
        auto perp = [&](const Vec3& w) {
          double wu = dot(w, du), wv = dot(w, dv);
          return w - (A * wu + B * wv) * du - (B * wu + C * wv) * dv;
        };
        a.H = 0.5 * (A * perp(jet.duu()) + 2.0 * B * perp(jet.duv()) + C * perp(jet.dvv()));
        a.has_H = true;
        if (a.w > 0) mu.atoms.push_back(a);
      }
  }
  return mu;
}

double first_variation(const Varifold2& mu, const TestField& f) {
  std::vector<double> terms;
  terms.reserve(mu.atoms.size());
  for (const auto& a : mu.atoms) {
    if (norm2(a.x - f.center) >= f.radius * f.radius) continue;
    terms.push_back(a.w * a.theta * tangential_divergence(a.normal, f.derivative(a.x)));
  }
  return pairwise_sum(terms);
}

double mean_curvature_residual(const Varifold2& mu, const std::vector<TestField>& family) {
  if (!mu.carries_H) fail(ErrorCode::invalid_argument, "mean_curvature_residual: no H");
  double m = mu.mass();
  double worst = 0;
  for (const auto& f : family) {
    std::vector<double> hterm;
    for (const auto& a : mu.atoms) {
      if (norm2(a.x - f.center) >= f.radius * f.radius) continue;
      hterm.push_back(a.w * a.theta * dot(f.value(a.x), a.H));
    }
    double resid = first_variation(mu, f) + 2.0 * pairwise_sum(hterm);
    worst = std::max(worst, std::fabs(resid));
  }
  return worst / m;
}

std::vector<double> geometric_radii(double r_min, double r_max) {
  std::vector<double> r;
  const double q = std::sqrt(2.0);
  for (double x = r_min; x <= r_max * (1 + 1e-12); x *= q) r.push_back(x);
  return r;
}

namespace {

// Mollified ball count: linear ramp over [r(1-w), r(1+w)], normalized so a
// flat density-1 surface through the center gives exactly 1 + O(r^2).
double smoothed_ratio(const Varifold2& mu, const Vec3& x0, double r, double w) {
  double lo = r * (1 - w), hi = r * (1 + w);
  std::vector<double> terms;
  for (const auto& a : mu.atoms) {
    double d = dist(a.x, x0);
    if (d >= hi) continue;
    double chi = d <= lo ? 1.0 : (hi - d) / (hi - lo);
    terms.push_back(chi * a.w * a.theta);
  }
  double normalizer = kPi * r * r * (1.0 + w * w / 3.0);
  return pairwise_sum(terms) / normalizer;
}

DensityEstimate richardson(const std::vector<double>& radii, const std::vector<double>& d,
                           bool at_infinity) {
  // bias model O(r) near a point, O(1/r) at infinity
  std::vector<double> extrap;
  for (std::size_t i = 0; i + 1 < radii.size(); ++i) {
    double r1 = radii[i], r2 = radii[i + 1];
    double e;
    if (!at_infinity) {
      e = (d[i] * r2 - d[i + 1] * r1) / (r2 - r1);
    } else {
      e = (d[i + 1] * r2 - d[i] * r1) / (r2 - r1);
    }
    extrap.push_back(e);
  }
  if (extrap.empty()) fail(ErrorCode::invalid_argument, "density: need >= 2 radii");
  DensityEstimate out;
  out.raw = d;
  std::size_t anchor = at_infinity ? extrap.size() - 1 : 0;
  out.value = extrap[anchor];
  std::size_t checks = std::min<std::size_t>(3, extrap.size());
  for (std::size_t k = 0; k + 1 < checks; ++k) {
    std::size_t i = at_infinity ? extrap.size() - 1 - k : k;
    std::size_t j = at_infinity ? i - 1 : i + 1;
    if (std::fabs(extrap[i] - extrap[j]) > 0.2)
      fail(ErrorCode::non_convergent, "density: successive Richardson estimates differ by > 0.2");
  }
  out.rounded = int(std::lround(out.value));
  return out;
}

}  // namespace

DensityEstimate density(const Varifold2& mu, const Vec3& x0,
                        const std::vector<double>& radii, double mollify) {
  if (radii.size() < 2) fail(ErrorCode::invalid_argument, "density: need >= 2 radii");
  if (radii.back() / radii.front() < std::pow(10.0, 1.5) * 0.999)
    fail(ErrorCode::invalid_argument, "density: radii schedule must span >= 1.5 decades");
  std::vector<double> d;
  for (double r : radii) d.push_back(smoothed_ratio(mu, x0, r, mollify));
  return richardson(radii, d, false);
}

DensityEstimate density_at_infinity(const Varifold2& mu, const std::vector<double>& radii,
                                    double mollify) {
  if (radii.size() < 2) fail(ErrorCode::invalid_argument, "density: need >= 2 radii");
  std::vector<double> d;
  for (double r : radii) d.push_back(smoothed_ratio(mu, Vec3{0, 0, 0}, r, mollify));
  return richardson(radii, d, true);
}

MonotonicityResult monotonicity_residual(const Varifold2& mu, const Vec3& x0,
                                         const std::vector<double>& density_radii) {
  if (!mu.carries_H) fail(ErrorCode::invalid_argument, "monotonicity: H required");
  MonotonicityResult r;
  r.theta = density(mu, x0, density_radii).value;
  std::vector<double> terms;
  double scale = std::max(mu.diameter(), 1e-30);
  for (const auto& a : mu.atoms) {
    Vec3 y = a.x - x0;
    double n2 = norm2(y);
    if (n2 < 1e-18 * scale * scale) continue;  // measure-negligible atoms at the point
    Vec3 yperp = dot(y, a.normal) * a.normal;
    Vec3 integrand = 0.5 * a.H + yperp / n2;
    terms.push_back(norm2(integrand) * a.w * a.theta);
  }
  r.integral = pairwise_sum(terms);
  r.lhs = kPi * r.theta + r.integral;
  r.rhs = mu.willmore() / 4.0;
  r.residual = r.lhs - r.rhs;
  return r;
}

double li_yau_gap(const Varifold2& mu, const Vec3& x0,
                  const std::vector<double>& density_radii) {
  return mu.willmore() / (4.0 * kPi) - density(mu, x0, density_radii).value;
}

Varifold2 pushforward_inversion(const Varifold2& mu, const Vec3& x0, double pole_scale) {
  Varifold2 nu;
  nu.carries_H = mu.carries_H;
  nu.atoms.reserve(mu.atoms.size());
  for (const auto& a : mu.atoms) {
    Vec3 y = a.x - x0;
    double n2 = norm2(y);
    if (n2 < 1e-12 * pole_scale * pole_scale)
      fail(ErrorCode::pole_hit, "pushforward_inversion: atom at the inversion center");
    Vec3 u = y / std::sqrt(n2);
    auto reflect = [&](const Vec3& v) { return v - 2.0 * dot(u, v) * u; };
    VarifoldAtom b;
    b.x = y / n2;
    b.normal = reflect(a.normal);
    b.w = a.w / (n2 * n2);
    b.theta = a.theta;
    if (a.has_H) {
      Vec3 yperp = dot(y, a.normal) * a.normal;
      b.H = n2 * reflect(a.H + 2.0 * yperp / n2);
      b.has_H = true;
    }
    nu.atoms.push_back(b);
  }
  return nu;
}

double stationarity_defect(const Varifold2& nu, const std::vector<TestField>& family) {
  double worst = 0;
  for (const auto& f : family) worst = std::max(worst, std::fabs(first_variation(nu, f)));
  return worst;
}

double inversion_divergence_identity(const Varifold2& mu, const Vec3& x0,
                                     const TestField& f) {
  double worst = 0;
  for (const auto& a : mu.atoms) {
    Vec3 y = a.x - x0;
    double n2 = norm2(y);
    if (n2 < 1e-18) fail(ErrorCode::pole_hit, "inversion identity: atom at the center");
    double n = std::sqrt(n2);
    Vec3 u = y / n;
    auto R = [&](const Vec3& v) { return v - 2.0 * dot(u, v) * u; };
    Vec3 img = y / n2;

    Vec3 t1, t2;
    orthonormal_frame(a.normal, t1, t2);

    Mat3 Df = f.derivative(img);
    Vec3 t1p = R(t1), t2p = R(t2);
    double lhs = dot(Df * t1p, t1p) + dot(Df * t2p, t2p);

    Vec3 F = f.value(img);
    Vec3 gval = n2 * R(F);
    auto Dg = [&](const Vec3& v) {
      Vec3 duh = (v - dot(u, v) * u) / n;
      Vec3 dF = Df * (R(v) / n2);
      Vec3 term1 = 2.0 * dot(y, v) * R(F);
      Vec3 term2 = -2.0 * n2 * (duh * dot(u, F) + u * dot(duh, F));
      Vec3 term3 = n2 * R(dF);
      return term1 + term2 + term3;
    };
    double div_g = dot(Dg(t1), t1) + dot(Dg(t2), t2);
    double rhs = div_g - 4.0 * dot(y, gval) / n2;
    worst = std::max(worst, std::fabs(lhs - rhs));
  }
  return worst;
}

double inversion_mass_integral(const Varifold2& mu, const Vec3& x0) {
  std::vector<double> terms;
  for (const auto& a : mu.atoms) {
    double n2 = norm2(a.x - x0);
    terms.push_back(a.w * a.theta / (n2 * n2));
  }
  return pairwise_sum(terms);
}

void save_csv(const Varifold2& mu, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path);
  out << (mu.carries_H ? "x,y,z,nx,ny,nz,w,theta,Hx,Hy,Hz\n" : "x,y,z,nx,ny,nz,w,theta\n");
  char buf[320];
  for (const auto& a : mu.atoms) {
    if (mu.carries_H)
      std::snprintf(buf, sizeof buf,
                    "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g,%.17g\n",
                    a.x.x, a.x.y, a.x.z, a.normal.x, a.normal.y, a.normal.z, a.w, a.theta,
                    a.H.x, a.H.y, a.H.z);
    else
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                    a.x.x, a.x.y, a.x.z, a.normal.x, a.normal.y, a.normal.z, a.w, a.theta);
    out << buf;
  }
}

Varifold2 load_varifold_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_error, "cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::io_error, "empty varifold file");
  bool with_H = line.find("Hx") != std::string::npos;
  Varifold2 mu;
  mu.carries_H = with_H;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::vector<double> vals;
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    if (vals.size() < 8) fail(ErrorCode::io_error, "bad varifold row");
    VarifoldAtom a;
    a.x = {vals[0], vals[1], vals[2]};
    a.normal = {vals[3], vals[4], vals[5]};
    a.w = vals[6];
    a.theta = int(vals[7]);
    if (with_H && vals.size() >= 11) {
      a.H = {vals[8], vals[9], vals[10]};
      a.has_H = true;
    }
    mu.atoms.push_back(a);
  }
  mu.validate();
  return mu;
}

}  // namespace wlab
