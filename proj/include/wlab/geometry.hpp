#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "wlab/fields.hpp"
#include "wlab/immersion.hpp"

namespace wlab {

// W, E, A, V and the derived ratios of a closed surface.
struct Functionals {
  double W = 0;   // Willmore: integral of |H|^2
  double E = 0;   // Dirichlet: integral of |II|^2
  double A = 0;   // area
  double V = 0;   // algebraic volume, -1/3 integral <n, Phi>
  double I = 0;   // A / V^(2/3), when V > 0
  double M = 0;   // total (scalar) mean curvature
  double T = 0;   // M / sqrt(A), when A > 0
};

struct MetricFields {
  ScalarField g11, g12, g22;  // pullback metric coefficients at nodes
};

// Central differences (or the analytic sampler) at interior and boundary
// nodes. Throws DegenerateMetric if det g <= 0 anywhere.
MetricFields pullback_metric(const DiscreteImmersion& imm);

// lambda = 0.5 log g11 on a conformal chart. Throws NotConformal when the
// off-diagonal / diagonal mismatch exceeds tau_conf * trace at some node.
ScalarField conformal_factor(const DiscreteImmersion& imm, double tau_conf = 1e-6);

// Unit normals d1 x d2 / |d1 x d2| in chart order.
VectorField gauss_map(const DiscreteImmersion& imm);

struct MeanCurvatureResult {
  VectorField H;                    // mean curvature vector
  double orthogonality_defect = 0;  // max |<H, dPhi_i>| / |H| |dPhi_i|, diagnostic
};
MeanCurvatureResult mean_curvature(const DiscreteImmersion& imm);

// Per-node quadrature summands for a chart: {measure dmu, |H|^2 dmu, |II|^2 dmu,
// <n,Phi> dmu, H dmu}. Shared by the energy and functional integrals.
struct ChartDensities {
  std::vector<double> area, w, e, nphi, h;
};
ChartDensities chart_densities(const DiscreteImmersion& imm,
                               const ScalarField* weight);

double willmore_energy(const ImmersionAtlas& atlas);
double dirichlet_energy(const ImmersionAtlas& atlas);
double willmore_energy(const DiscreteImmersion& imm);
double dirichlet_energy(const DiscreteImmersion& imm);

// Throws QuadratureUnderResolved when coarsening by 2x moves the Willmore
// value by more than rel_tol * max(|W|, 1).
void check_quadrature_resolution(const ImmersionAtlas& atlas, double rel_tol);

// E - 4W + 8 pi (1 - p); magnitude is the discretization defect.
double gauss_bonnet_residual(const ImmersionAtlas& atlas, int genus);

Functionals functionals(const ImmersionAtlas& atlas);

// Lorentz L^{p,infinity} quasinorm of |f| with per-sample area weights:
// sup_t t^p mu(|f| > t), sup over sorted sample thresholds, then ^(1/p).
double lorentz_quasinorm(const std::vector<double>& values,
                         const std::vector<double>& weights, double p);
double lorentz_quasinorm(const ScalarField& f, const std::vector<double>& area_weights,
                         double p);

// Circle-averaged conformal factor per u-row of a log-polar / cylinder chart,
// reported in the planar-annulus normalization lambda_plane = lambda_chart - t.
// This is the quantity whose slope against t = log r equals m - 1.
std::vector<double> radial_log_conformal_profile(const DiscreteImmersion& imm,
                                                 double tau_conf = 1e-2);

}  // namespace wlab
