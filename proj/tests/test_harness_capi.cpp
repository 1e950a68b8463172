#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "wlab.h"
#include "wlab/harness.hpp"

using namespace wlab;

namespace {
constexpr double kPi = 3.14159265358979323846;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace

TEST_CASE("config: parsing, echo, validation") {
  PipelineConfig c = PipelineConfig::from_text(
      "genus = 2\nk_max = 5\neps = 0.75\noutput_dir = /tmp/wlab_cfg\nseed = 42\n");
  CHECK(c.genus == 2);
  CHECK(c.k_max == 5);
  CHECK(c.eps == doctest::Approx(0.75));
  CHECK(c.seed == 42);
  PipelineConfig back = PipelineConfig::from_text(c.to_text());
  CHECK(back.to_text() == c.to_text());

  // eps = 10 > 8pi/3 is rejected at validation
  CHECK_THROWS_AS(PipelineConfig::from_text("eps = 10\n"), Error);
  CHECK_THROWS_AS(PipelineConfig::from_text("bogus_key = 3\n"), Error);
}

TEST_CASE("signed volume current check: sphere, opposite pair, tangent pair") {
  ModelKind k;
  k.tag = ModelTag::S;
  auto inward = make_model(k).atlas;
  CHECK(signed_volume_current_check({inward}) == doctest::Approx(4 * kPi / 3).epsilon(1e-4));

  CHECK(std::fabs(signed_volume_current_check({coincident_opposite_spheres()})) < 1e-2);

  auto pair = tangent_equal_spheres();
  CHECK(signed_volume_current_check({pair}) == doctest::Approx(8 * kPi / 3).epsilon(1e-4));
}

TEST_CASE("pipeline: full pass, determinism, missing input directory") {
  PipelineConfig cfg;
  cfg.genus = 1;
  cfg.k_min = 0;
  cfg.k_max = 5;
  cfg.output_dir = "/tmp/wlab_pipe_a";
  PipelineReport rep = run_pipeline(cfg);
  CHECK(rep.all_pass);
  for (const auto& r : rep.rows) CHECK(r.pass);

  cfg.output_dir = "/tmp/wlab_pipe_b";
  PipelineReport rep2 = run_pipeline(cfg);
  CHECK(slurp("/tmp/wlab_pipe_a/report.txt") == slurp("/tmp/wlab_pipe_b/report.txt"));
  CHECK(slurp("/tmp/wlab_pipe_a/family/energy_trajectory.csv") ==
        slurp("/tmp/wlab_pipe_b/family/energy_trajectory.csv"));

  PipelineConfig bad = cfg;
  bad.input_dir = "/tmp/wlab_nonexistent_dir";
  CHECK_THROWS_AS(run_pipeline(bad), Error);
  // earlier outputs survive the failed run
  CHECK(std::filesystem::exists("/tmp/wlab_pipe_b/report.txt"));
}

TEST_CASE("pipeline accepts an existing family directory") {
  auto fam = synthesize_family(FamilySpec::standard(1, 1, 5));
  save_family(fam, "/tmp/wlab_pipe_input");
  PipelineConfig cfg;
  cfg.genus = 1;
  cfg.input_dir = "/tmp/wlab_pipe_input";
  cfg.output_dir = "/tmp/wlab_pipe_c";
  PipelineReport rep = run_pipeline(cfg);
  CHECK(rep.all_pass);
}

// ---- the extern-C surface ----

TEST_CASE("capi: model, measure, immersion round trip") {
  wlab_immersion* imm = nullptr;
  REQUIRE(wlab_model_make("{\"tag\":\"S\",\"scale\":1.0}", 0, 0, 0, 0, &imm) == WLAB_OK);
  wlab_functionals f;
  REQUIRE(wlab_measure(imm, 0, &f) == WLAB_OK);
  CHECK(f.willmore == doctest::Approx(4 * kPi).epsilon(1e-3));
  CHECK(f.area == doctest::Approx(4 * kPi).epsilon(1e-4));
  CHECK(f.volume == doctest::Approx(4 * kPi / 3).epsilon(1e-4));
  CHECK(std::fabs(f.gauss_bonnet_residual) < 0.05);
  REQUIRE(wlab_immersion_save(imm, "/tmp/wlab_capi_sphere.json") == WLAB_OK);
  wlab_immersion_free(imm);

  wlab_immersion* back = nullptr;
  REQUIRE(wlab_immersion_load("/tmp/wlab_capi_sphere.json", &back) == WLAB_OK);
  wlab_functionals f2;
  REQUIRE(wlab_measure(back, 0, &f2) == WLAB_OK);
  CHECK(f2.area == doctest::Approx(f.area).epsilon(1e-2));  // finite differences after reload
  wlab_immersion_free(back);

  wlab_immersion* bad = nullptr;
  CHECK(wlab_model_make("{\"tag\":\"S\",\"scale\":-2}", 0, 0, 0, 0, &bad) ==
        WLAB_ERR_INVALID_ARGUMENT);
  CHECK(std::string(wlab_last_error()).find("positive") != std::string::npos);
  CHECK(wlab_immersion_load("/tmp/wlab_no_such_file.json", &bad) == WLAB_ERR_IO);
}

TEST_CASE("capi: synth + analyze + graph queries") {
  REQUIRE(wlab_synth("{\"standard_genus\":1,\"k_min\":1,\"k_max\":6}",
                     "/tmp/wlab_capi_family") == WLAB_OK);
  REQUIRE(wlab_analyze("/tmp/wlab_capi_family", 1.0, "/tmp/wlab_capi_graph.json",
                       "/tmp/wlab_capi_diag.csv") == WLAB_OK);
  wlab_graph* g = nullptr;
  REQUIRE(wlab_graph_load("/tmp/wlab_capi_graph.json", &g) == WLAB_OK);
  int pass = 0;
  char* clause = nullptr;
  REQUIRE(wlab_graph_double_tree(g, &pass, &clause) == WLAB_OK);
  CHECK(pass == 1);
  wlab_string_free(clause);
  int cats = 0;
  REQUIRE(wlab_graph_catenoid_count(g, &cats) == WLAB_OK);
  CHECK(cats == 2);

  // inversion typing through the C surface
  const char* behavior =
      "{\"c1\":{\"to_infinity\":false,\"limit\":[1,0,0],\"relation\":\"off_image\"}}";
  int type = 0;
  REQUIRE(wlab_invert_type(g, behavior, &type) == WLAB_OK);
  CHECK(type == 1);
  wlab_graph_free(g);
}

TEST_CASE("capi: varifold suite") {
  wlab_immersion* imm = nullptr;
  REQUIRE(wlab_model_make("{\"tag\":\"IC2\",\"scale\":1.0,\"inversion_center\":[0,0,0]}",
                          288, 64, 9.0, 0, &imm) == WLAB_OK);
  wlab_varifold* mu = nullptr;
  REQUIRE(wlab_varifold_from_immersion(imm, 1, &mu) == WLAB_OK);
  wlab_immersion_free(imm);
  REQUIRE(wlab_varifold_save(mu, "/tmp/wlab_capi_varifold.csv") == WLAB_OK);

  double x0[3] = {0, 0, 0};
  char* json = nullptr;
  REQUIRE(wlab_varifold_report(mu, x0, 0.01, 0.35, &json) == WLAB_OK);
  std::string rep(json);
  wlab_string_free(json);
  CHECK(rep.find("monotonicity") != std::string::npos);
  CHECK(rep.find("li_yau_gap") != std::string::npos);
  wlab_varifold_free(mu);

  wlab_varifold* back = nullptr;
  REQUIRE(wlab_varifold_load("/tmp/wlab_capi_varifold.csv", &back) == WLAB_OK);
  wlab_varifold_free(back);
}

TEST_CASE("capi: pipeline entry point") {
  {
    std::ofstream cfg("/tmp/wlab_capi_cfg.txt");
    cfg << "genus = 1\nk_max = 5\noutput_dir = /tmp/wlab_capi_pipe\n";
  }
  int all_pass = 0;
  REQUIRE(wlab_pipeline_run("/tmp/wlab_capi_cfg.txt", &all_pass) == WLAB_OK);
  CHECK(all_pass == 1);
  CHECK(wlab_pipeline_run("/tmp/wlab_missing_cfg.txt", &all_pass) == WLAB_ERR_IO);
}

TEST_CASE("capi: status names mirror the error codes") {
  CHECK(std::string(wlab_status_name(WLAB_OK)) == "ok");
  CHECK(std::string(wlab_status_name(WLAB_ERR_POLE_HIT)) == "PoleHit");
  CHECK(std::string(wlab_status_name(WLAB_ERR_NOT_DOUBLE_TREE)) == "NotDoubleTree");
}
