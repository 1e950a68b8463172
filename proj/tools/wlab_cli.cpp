// Command-line front end; speaks only the extern-C surface in wlab.h.
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "wlab.h"

namespace {

int report(wlab_status s) {
  if (s == WLAB_OK) return 0;
  std::fprintf(stderr, "error [%s]: %s\n", wlab_status_name(s), wlab_last_error());
  return 1;
}

std::string slurp_or_inline(const std::string& arg) {
  std::ifstream in(arg);
  if (!in) return arg;  // treat as inline JSON
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"willmore bubble-tree laboratory"};
  app.require_subcommand(1);

  // model emit
  auto* model = app.add_subcommand("model", "exact model surfaces");
  auto* emit = model->add_subcommand("emit", "build a taxonomy model and write it");
  std::string kind_json, model_out = "model.json";
  int nu = 0, nv = 0;
  double extent = 0;
  bool rect = false;
  bool print_measure = false;
  emit->add_option("--kind", kind_json, "ModelKind JSON (inline or file)")->required();
  emit->add_option("--out", model_out, "output immersion file");
  emit->add_option("--nu", nu);
  emit->add_option("--nv", nv);
  emit->add_option("--extent", extent);
  emit->add_flag("--rect", rect, "two-rectangle stereographic atlas for spheres");
  emit->add_flag("--measure", print_measure, "print the functionals record");

  // synth
  auto* synth = app.add_subcommand("synth", "synthesize a degenerating family");
  std::string spec_json, synth_out = "family";
  int std_genus = 0, k_min = 0, k_max = 6;
  synth->add_option("--spec", spec_json, "FamilySpec JSON (inline or file)");
  synth->add_option("--genus", std_genus, "standard family of this genus");
  synth->add_option("--k-min", k_min);
  synth->add_option("--k-max", k_max);
  synth->add_option("--out", synth_out, "output directory")->required();

  // analyze
  auto* analyze = app.add_subcommand("analyze", "recover the bubble graph from files");
  std::string family_dir, graph_out = "graph.json", diag_out = "diagnostics.csv";
  double eps = 1.0;
  analyze->add_option("--family", family_dir, "family directory")->required();
  analyze->add_option("--eps", eps, "energy threshold in (0, 8pi/3)");
  analyze->add_option("--graph-out", graph_out);
  analyze->add_option("--diag-out", diag_out);

  // measure
  auto* measure = app.add_subcommand("measure", "functionals of an immersion file");
  std::string imm_path;
  int genus = 0;
  measure->add_option("--immersion", imm_path, "immersion atlas file")->required();
  measure->add_option("--genus", genus);

  // varifold
  auto* vf = app.add_subcommand("varifold", "Appendix-C varifold suite");
  std::string vf_imm, vf_csv_out, vf_csv_in;
  std::vector<double> x0{0, 0, 0};
  double rmin = 0.05, rmax = 1.6;
  int density_override = 1;
  vf->add_option("--immersion", vf_imm, "build atoms from this immersion file");
  vf->add_option("--load", vf_csv_in, "load atoms from CSV");
  vf->add_option("--save", vf_csv_out, "write atoms to CSV");
  vf->add_option("--density", density_override);
  vf->add_option("--x0", x0, "probe point")->expected(3);
  vf->add_option("--rmin", rmin);
  vf->add_option("--rmax", rmax);

  // invert-type
  auto* it = app.add_subcommand("invert-type", "Prop-5.1 inversion typing");
  std::string graph_path, centers_json;
  it->add_option("--graph", graph_path, "bubble graph JSON")->required();
  it->add_option("--centers", centers_json, "per-vertex center behavior JSON")->required();

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "full synthesize/measure/detect/verify run");
  std::string config_path;
  pipe->add_option("--config", config_path, "key = value config file")->required();

  CLI11_PARSE(app, argc, argv);

  if (emit->parsed()) {
    wlab_immersion* imm = nullptr;
    wlab_status s = wlab_model_make(slurp_or_inline(kind_json).c_str(), nu, nv, extent,
                                    rect ? 1 : 0, &imm);
    if (s != WLAB_OK) return report(s);
    s = wlab_immersion_save(imm, model_out.c_str());
    if (s == WLAB_OK && print_measure) {
      wlab_functionals f;
      s = wlab_measure(imm, 0, &f);
      if (s == WLAB_OK)
        std::printf("W=%.10g E=%.10g A=%.10g V=%.10g I=%.10g M=%.10g T=%.10g\n",
                    f.willmore, f.dirichlet, f.area, f.volume, f.isoperimetric,
                    f.total_mean_curvature, f.normalized_mean_curvature);
    }
    wlab_immersion_free(imm);
    return report(s);
  }

  if (synth->parsed()) {
    std::string spec;
    if (!spec_json.empty()) {
      spec = slurp_or_inline(spec_json);
    } else if (std_genus >= 1) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "{\"standard_genus\":%d,\"k_min\":%d,\"k_max\":%d}",
                    std_genus, k_min, k_max);
      spec = buf;
    } else {
      std::fprintf(stderr, "synth: provide --spec or --genus\n");
      return 2;
    }
    return report(wlab_synth(spec.c_str(), synth_out.c_str()));
  }

  if (analyze->parsed()) {
    return report(wlab_analyze(family_dir.c_str(), eps, graph_out.c_str(),
                               diag_out.c_str()));
  }

  if (measure->parsed()) {
    wlab_immersion* imm = nullptr;
    wlab_status s = wlab_immersion_load(imm_path.c_str(), &imm);
    if (s != WLAB_OK) return report(s);
    wlab_functionals f;
    s = wlab_measure(imm, genus, &f);
    wlab_immersion_free(imm);
    if (s != WLAB_OK) return report(s);
    std::printf("W=%.10g\nE=%.10g\nA=%.10g\nV=%.10g\nI=%.10g\nM=%.10g\nT=%.10g\n"
                "gauss_bonnet_residual=%.10g\n",
                f.willmore, f.dirichlet, f.area, f.volume, f.isoperimetric,
                f.total_mean_curvature, f.normalized_mean_curvature,
                f.gauss_bonnet_residual);
    return 0;
  }

  if (vf->parsed()) {
    wlab_varifold* mu = nullptr;
    wlab_status s = WLAB_OK;
    if (!vf_csv_in.empty()) {
      s = wlab_varifold_load(vf_csv_in.c_str(), &mu);
    } else if (!vf_imm.empty()) {
      wlab_immersion* imm = nullptr;
      s = wlab_immersion_load(vf_imm.c_str(), &imm);
      if (s == WLAB_OK) {
        s = wlab_varifold_from_immersion(imm, density_override, &mu);
        wlab_immersion_free(imm);
      }
    } else {
      std::fprintf(stderr, "varifold: provide --immersion or --load\n");
      return 2;
    }
    if (s != WLAB_OK) return report(s);
    if (!vf_csv_out.empty()) s = wlab_varifold_save(mu, vf_csv_out.c_str());
    if (s == WLAB_OK) {
      double p[3] = {x0[0], x0[1], x0[2]};
      char* json = nullptr;
      s = wlab_varifold_report(mu, p, rmin, rmax, &json);
      if (s == WLAB_OK) {
        std::printf("%s\n", json);
        wlab_string_free(json);
      }
    }
    wlab_varifold_free(mu);
    return report(s);
  }

  if (it->parsed()) {
    wlab_graph* g = nullptr;
    wlab_status s = wlab_graph_load(graph_path.c_str(), &g);
    if (s != WLAB_OK) return report(s);
    int type = 0;
    s = wlab_invert_type(g, slurp_or_inline(centers_json).c_str(), &type);
    wlab_graph_free(g);
    if (s != WLAB_OK) return report(s);
    std::printf("Type %d\n", type);
    return 0;
  }

  if (pipe->parsed()) {
    int all_pass = 0;
    wlab_status s = wlab_pipeline_run(config_path.c_str(), &all_pass);
    if (s != WLAB_OK) return report(s);
    std::printf("pipeline: %s\n", all_pass ? "ALL PASS" : "FAILURES PRESENT");
    return all_pass ? 0 : 3;
  }

  return 2;
}
