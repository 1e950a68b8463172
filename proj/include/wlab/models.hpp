#pragma once

#include <complex>
#include <optional>
#include <string>

#include "wlab/geometry.hpp"
#include "wlab/immersion.hpp"

namespace wlab {

// Bubble taxonomy: planes, spheres, catenoids and inverted catenoids with the
// inversion center on (IC1) / off (IC2) the image.
enum class ModelTag { P, S, C, IC1, IC2, unclassified };

const char* model_tag_name(ModelTag t);
ModelTag model_tag_from_name(const std::string& s);

struct ModelKind {
  ModelTag tag = ModelTag::S;
  double scale = 1.0;            // sphere radius / catenoid waist / plane unit
  Vec3 center{0, 0, 0};
  Vec3 axis{0, 0, 1};
  Vec3 inversion_center{0, 0, 0};  // IC types only
  int orientation = +1;            // +1: spheres carry inward normals

  std::string to_json() const;
  static ModelKind from_json(const std::string& text);
};

struct ChartRequest {
  int nu = 0, nv = 0;        // 0: per-model default
  double extent = 0;         // 0: default (T for cylinder charts, half-width else)
  bool rectangle_atlas = false;  // spheres: two rectangle stereographic charts
};

struct ModelSurface {
  ImmersionAtlas atlas;
  ModelKind kind;
  // IC types: image of the catenoid's ends under the inversion (the density-2
  // point for IC2). Unset otherwise.
  std::optional<Vec3> double_point;
};

// Conformal-chart immersion with analytic sampler attached. Validates the
// IC on/off-image flag numerically (threshold scale * 1e-6).
ModelSurface make_model(const ModelKind& kind, const ChartRequest& req = {});

// Distance from a point to the (truncated) catenoid with given waist scale,
// center, axis; rotational symmetry reduces this to a 1d minimization.
double distance_to_catenoid(const Vec3& p, double waist, const Vec3& center,
                            const Vec3& axis, double t_max);

// Thin-part hyperbolic cylinder around a geodesic of length l.
struct ThinPartGeometry {
  double l;

  explicit ThinPartGeometry(double length);
  double phi() const;  // arcsin(sinh(l/2))
  double L() const;    // (2 pi / l)(pi - 2 phi)

  // Conformal coefficient of g_k at t in [0, L]: (l / (2 pi sin(l t / 2pi + phi)))^2.
  double metric_coeff(double t) const;
};

// chi_k(r e^{i theta}) = (ln r + L, theta) and its inverse.
struct CylinderChartMap {
  ThinPartGeometry geom;
  std::pair<double, double> forward(double r, double theta) const;
  std::pair<double, double> inverse(double t, double theta) const;
};

struct TorusModulus {
  std::complex<double> omega;
};

struct ModulusReduction {
  TorusModulus reduced;
  bool degenerating = false;
  int iterations = 0;
};

// PSL(2,Z)-reduction into the fundamental domain
// {-1/2 < Re < 0, |z| > 1} u {0 <= Re <= 1/2, |z| >= 1}.
ModulusReduction reduce_modulus(const TorusModulus& omega,
                                double degeneration_threshold = 10.0,
                                int max_iter = 256);

enum class EndSide { inner, outer };  // puncture at r -> 0 vs end at r -> infinity

struct EndOrderFit {
  int m = 0;             // chart-side exponent of the Lemma-B.1 normal form
  double coefficient;    // e^omega
  double growth_ratio;   // measured |Phi - ref| / |z|^m at the fit side
  double ratio_expected; // e^omega / |m|
  double slope_residual; // |raw slope - (m-1)|
};

// Least-squares slope of the circle-averaged planar conformal factor against
// log r. Throws AmbiguousOrder when the slope is > 0.2 from an integer,
// ZeroOrder when it rounds to zero.
EndOrderFit end_order_fit(const DiscreteImmersion& imm, EndSide side,
                          double window_fraction = 0.5, double tau_conf = 1e-2);

}  // namespace wlab
