#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wlab/immersion.hpp"
#include "wlab/linalg.hpp"

namespace wlab {

// Discrete integral 2-varifold: weighted rectifiable atom cloud. The measure
// of an atom is w * theta; tangent planes are stored through the unit normal.
struct VarifoldAtom {
  Vec3 x;
  Vec3 normal;     // unit, spans (T_x mu)^perp
  double w = 0;    // area weight, > 0
  int theta = 1;   // integer density >= 1
  Vec3 H{0, 0, 0};
  bool has_H = false;
};

struct Varifold2 {
  std::vector<VarifoldAtom> atoms;
  bool carries_H = false;

  double mass() const;
  double willmore() const;  // integral |H|^2 dmu (requires H)
  Vec3 bbox_min() const;
  Vec3 bbox_max() const;
  double diameter() const;
  void validate() const;
};

// C^1 polynomial bump field f(x) = d * (1 - |x-c|^2/rho^2)^2 on the ball.
struct TestField {
  Vec3 center;
  double radius = 1;
  Vec3 direction;  // |f| <= |direction|

  Vec3 value(const Vec3& x) const;
  Mat3 derivative(const Vec3& x) const;  // Df = d (x) grad psi
};

// Spec family: centers on a 5^3 lattice over the bounding box, radii
// {0.1, 0.2, 0.4} * diameter, directions +-e_i.
std::vector<TestField> default_test_fields(const Varifold2& mu);

// Atoms at quadrature nodes, w = node quadrature weight * sqrt(det g) * PoU
// weight, H from the mean-curvature operator.
Varifold2 varifold_from_immersion(const ImmersionAtlas& atlas, int density_override = 1);

// integral of Div_mu f dmu
double first_variation(const Varifold2& mu, const TestField& f);

// max over the family of |integral Div f + 2 integral <f, H>| / mass
double mean_curvature_residual(const Varifold2& mu, const std::vector<TestField>& family);

struct DensityEstimate {
  double value = 0;
  int rounded = 0;
  std::vector<double> raw;  // per-radius ratios
};

// mu(B_r(x0)) / (pi r^2), Richardson-extrapolated assuming O(r) bias. The ball
// edge is mollified over a relative width to suppress atom-ring staircase
// noise. Throws NonConvergent when successive extrapolates differ by > 0.2.
DensityEstimate density(const Varifold2& mu, const Vec3& x0,
                        const std::vector<double>& radii, double mollify = 0.2);
DensityEstimate density_at_infinity(const Varifold2& mu,
                                    const std::vector<double>& radii,
                                    double mollify = 0.2);
std::vector<double> geometric_radii(double r_min, double r_max);

struct MonotonicityResult {
  double theta = 0;     // density at x0
  double integral = 0;  // integral |H/2 + (x-x0)^perp/|x-x0|^2|^2 dmu
  double lhs = 0;       // pi theta + integral
  double rhs = 0;       // W / 4
  double residual = 0;  // lhs - rhs
};

MonotonicityResult monotonicity_residual(const Varifold2& mu, const Vec3& x0,
                                         const std::vector<double>& density_radii);

// W / 4pi - Theta^2(mu, x0)
double li_yau_gap(const Varifold2& mu, const Vec3& x0,
                  const std::vector<double>& density_radii);

// Atoms through I_{x0}; weights scaled by |x-x0|^-4, normals reflected, H
// transported so that the equality case maps to a stationary varifold.
Varifold2 pushforward_inversion(const Varifold2& mu, const Vec3& x0,
                                double pole_scale = 1.0);

// max over the family of |first_variation(nu, f)|, mass units
double stationarity_defect(const Varifold2& nu, const std::vector<TestField>& family);

// Atomwise residual of
//   (Div_nu f)(I_{x0}(x)) = (Div_mu g)(x) - 4 <x - x0, g(x)> / |x - x0|^2,
// g = DI^{-1} (f o I); both sides in closed form. Returns the max residual.
double inversion_divergence_identity(const Varifold2& mu, const Vec3& x0,
                                     const TestField& f);

// integral |x - x0|^-4 dmu (area-formula mass of the pushforward)
double inversion_mass_integral(const Varifold2& mu, const Vec3& x0);

// CSV atoms (x, y, z, nx, ny, nz, w, theta[, Hx, Hy, Hz])
void save_csv(const Varifold2& mu, const std::string& path);
Varifold2 load_varifold_csv(const std::string& path);

}  // namespace wlab
