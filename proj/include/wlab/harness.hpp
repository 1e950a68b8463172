#pragma once

#include <string>
#include <vector>

#include "wlab/detector.hpp"
#include "wlab/synthesizer.hpp"

namespace wlab {

// Pipeline configuration; key = value text file, all defaults echoed into the
// report for auditability.
struct PipelineConfig {
  int genus = 1;
  int k_min = 0, k_max = 6;
  double eps = 1.0;
  double tau_conf = 1e-2;
  unsigned long long seed = 20240817ull;
  int workers = 1;  // env WLAB_WORKERS overrides
  std::string output_dir = "wlab_out";
  std::string input_dir;  // when set, analyze an existing family directory
  // frozen tolerances
  double tol_family_energy = 0.05;   // |W - 8pi| / 8pi at the finest k
  double tol_detect_slope = 0.10;    // per-edge log-scale slope deviation
  double tol_invariance = 1e-2;      // Moebius normalization W-defect
  double tol_signed_volume = 1e-2;   // Cor-1.6 configuration
  double tol_macroscopic = 0.02;     // Thm-1.5 sum agreement at the finest k

  void validate() const;
  std::string to_text() const;
  static PipelineConfig from_file(const std::string& path);
  static PipelineConfig from_text(const std::string& text);
};

struct CheckRow {
  std::string name;
  double measured = 0;
  double expected = 0;
  double tolerance = 0;
  bool pass = false;
};

struct PipelineReport {
  std::vector<CheckRow> rows;
  bool all_pass = false;
  std::string output_dir;

  std::string to_text() const;
  std::string to_json() const;
};

// synthesize -> measure -> normalize -> detect -> verify; writes energy
// trajectories, graph JSON and the pass/fail table under config.output_dir.
// Every stage's outputs stay on disk even when a later stage fails.
PipelineReport run_pipeline(const PipelineConfig& config);

// Sum of algebraic volumes over a set of closed oriented immersions; the
// Cor-1.6 configuration must cancel.
double signed_volume_current_check(const std::vector<ImmersionAtlas>& immersions);

// Rejection-sampled far center for the second normalization stage (the Q0 of
// the two-stage inversion); deterministic in the seed.
Vec3 pick_far_center(const std::vector<Vec3>& surface_samples, double clearance,
                     unsigned long long seed);

}  // namespace wlab
