#include "wlab.h"

#include <cstring>
#include <fstream>
#include <cstdlib>
#include <string>

#include "json.hpp"
#include "wlab/bubble_graph.hpp"
#include "wlab/detector.hpp"
#include "wlab/geometry.hpp"
#include "wlab/harness.hpp"
#include "wlab/models.hpp"
#include "wlab/varifold.hpp"

using namespace wlab;

namespace {

thread_local std::string g_last_error;

wlab_status to_status(const Error& e) {
  g_last_error = e.what();
  return static_cast<wlab_status>(static_cast<int>(e.code()));
}

template <typename F>
wlab_status guarded(F&& f) {
  try {
    f();
    return WLAB_OK;
  } catch (const Error& e) {
    return to_status(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return WLAB_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

struct wlab_immersion {
  ImmersionAtlas atlas;
};
struct wlab_graph {
  BubbleGraph graph;
};
struct wlab_varifold {
  Varifold2 mu;
};

extern "C" {

const char* wlab_status_name(wlab_status s) {
  return error_code_name(static_cast<ErrorCode>(static_cast<int>(s)));
}

const char* wlab_last_error(void) { return g_last_error.c_str(); }

wlab_status wlab_model_make(const char* kind_json, int nu, int nv, double extent,
                            int rectangle_atlas, wlab_immersion** out) {
  return guarded([&] {
    if (!kind_json || !out) fail(ErrorCode::invalid_argument, "null argument");
    ModelKind kind = ModelKind::from_json(kind_json);
    ChartRequest req;
    req.nu = nu;
    req.nv = nv;
    req.extent = extent;
    req.rectangle_atlas = rectangle_atlas != 0;
    auto* h = new wlab_immersion{make_model(kind, req).atlas};
    *out = h;
  });
}

wlab_status wlab_immersion_load(const char* path, wlab_immersion** out) {
  return guarded([&] {
    if (!path || !out) fail(ErrorCode::invalid_argument, "null argument");
    *out = new wlab_immersion{load_atlas_json(path)};
  });
}

wlab_status wlab_immersion_save(const wlab_immersion* imm, const char* path) {
  return guarded([&] {
    if (!imm || !path) fail(ErrorCode::invalid_argument, "null argument");
    save_json(imm->atlas, path);
  });
}

void wlab_immersion_free(wlab_immersion* imm) { delete imm; }

wlab_status wlab_measure(const wlab_immersion* imm, int genus, wlab_functionals* out) {
  return guarded([&] {
    if (!imm || !out) fail(ErrorCode::invalid_argument, "null argument");
    Functionals f = functionals(imm->atlas);
    out->willmore = f.W;
    out->dirichlet = f.E;
    out->area = f.A;
    out->volume = f.V;
    out->isoperimetric = f.I;
    out->total_mean_curvature = f.M;
    out->normalized_mean_curvature = f.T;
    out->gauss_bonnet_residual = gauss_bonnet_residual(imm->atlas, genus);
  });
}

wlab_status wlab_synth(const char* family_spec_json, const char* out_dir) {
  return guarded([&] {
    if (!family_spec_json || !out_dir) fail(ErrorCode::invalid_argument, "null argument");
    nlohmann::json j = nlohmann::json::parse(family_spec_json);
    FamilySpec spec;
    if (j.contains("standard_genus")) {
      spec = FamilySpec::standard(j["standard_genus"].get<int>(), j.value("k_min", 0),
                                  j.value("k_max", 6));
    } else {
      spec = FamilySpec::from_json(family_spec_json);
    }
    save_family(synthesize_family(spec), out_dir);
  });
}

wlab_status wlab_analyze(const char* family_dir, double eps, const char* graph_json_out,
                         const char* diagnostics_csv_out) {
  return guarded([&] {
    if (!family_dir || !graph_json_out) fail(ErrorCode::invalid_argument, "null argument");
    SynthesizedFamily fam = load_family(family_dir);
    std::vector<const ImmersionAtlas*> members;
    std::vector<int> ks;
    for (const auto& m : fam.members) {
      members.push_back(&m.atlas);
      ks.push_back(m.k);
    }
    BubbleGraph g = extract_graph(members, ks, eps);
    std::ofstream out(graph_json_out);
    if (!out) fail(ErrorCode::io_error, std::string("cannot write ") + graph_json_out);
    out << g.to_json();
    if (diagnostics_csv_out) {
      std::ofstream diag(diagnostics_csv_out);
      diag << "vertex,kind,class,scale_first,scale_last\n";
      for (const auto& v : g.vertices) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s,%s,%s,%.12g,%.12g\n", v.id.c_str(),
                      vertex_kind_name(v.kind), model_tag_name(v.limit_class),
                      v.scales.front(), v.scales.back());
        diag << buf;
      }
    }
  });
}

wlab_status wlab_graph_load(const char* path, wlab_graph** out) {
  return guarded([&] {
    if (!path || !out) fail(ErrorCode::invalid_argument, "null argument");
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io_error, std::string("cannot read ") + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    *out = new wlab_graph{BubbleGraph::from_json(text)};
  });
}

void wlab_graph_free(wlab_graph* g) { delete g; }

wlab_status wlab_graph_double_tree(const wlab_graph* g, int* pass, char** clause) {
  return guarded([&] {
    if (!g || !pass) fail(ErrorCode::invalid_argument, "null argument");
    DoubleTreeReport r = double_tree_check(g->graph);
    *pass = r.pass ? 1 : 0;
    if (clause) *clause = dup_string(r.failed_clause);
  });
}

wlab_status wlab_graph_catenoid_count(const wlab_graph* g, int* count) {
  return guarded([&] {
    if (!g || !count) fail(ErrorCode::invalid_argument, "null argument");
    *count = count_catenoids(g->graph).by_class;
  });
}

wlab_status wlab_invert_type(const wlab_graph* g, const char* behavior_json,
                             int* out_type) {
  return guarded([&] {
    if (!g || !behavior_json || !out_type)
      fail(ErrorCode::invalid_argument, "null argument");
    nlohmann::json j = nlohmann::json::parse(behavior_json);
    std::map<std::string, CenterBehavior> behavior;
    for (auto it = j.begin(); it != j.end(); ++it) {
      CenterBehavior b;
      b.to_infinity = it.value().value("to_infinity", true);
      if (it.value().contains("limit")) {
        const auto& l = it.value()["limit"];
        b.limit = {l[0], l[1], l[2]};
      }
      std::string rel = it.value().value("relation", "off_image");
      if (rel == "off_image") b.relation = CenterBehavior::Relation::off_image;
      else if (rel == "on_image") b.relation = CenterBehavior::Relation::on_image;
      else if (rel == "at_puncture_image")
        b.relation = CenterBehavior::Relation::at_puncture_image;
      else fail(ErrorCode::invalid_argument, "unknown relation " + rel);
      behavior[it.key()] = b;
    }
    *out_type = static_cast<int>(classify_inversion_type(g->graph, behavior));
  });
}

wlab_status wlab_varifold_from_immersion(const wlab_immersion* imm, int density,
                                         wlab_varifold** out) {
  return guarded([&] {
    if (!imm || !out) fail(ErrorCode::invalid_argument, "null argument");
    *out = new wlab_varifold{varifold_from_immersion(imm->atlas, density)};
  });
}

wlab_status wlab_varifold_load(const char* csv_path, wlab_varifold** out) {
  return guarded([&] {
    if (!csv_path || !out) fail(ErrorCode::invalid_argument, "null argument");
    *out = new wlab_varifold{load_varifold_csv(csv_path)};
  });
}

wlab_status wlab_varifold_save(const wlab_varifold* mu, const char* csv_path) {
  return guarded([&] {
    if (!mu || !csv_path) fail(ErrorCode::invalid_argument, "null argument");
    save_csv(mu->mu, csv_path);
  });
}

void wlab_varifold_free(wlab_varifold* mu) { delete mu; }

wlab_status wlab_varifold_report(const wlab_varifold* mu, const double x0[3],
                                 double r_min, double r_max, char** json_out) {
  return guarded([&] {
    if (!mu || !x0 || !json_out) fail(ErrorCode::invalid_argument, "null argument");
    Vec3 p{x0[0], x0[1], x0[2]};
    auto radii = geometric_radii(r_min, r_max);
    nlohmann::json j;
    j["mass"] = mu->mu.mass();
    j["willmore"] = mu->mu.willmore();
    MonotonicityResult mono = monotonicity_residual(mu->mu, p, radii);
    j["density"] = mono.theta;
    j["monotonicity"] = {{"lhs", mono.lhs},
                         {"rhs", mono.rhs},
                         {"residual", mono.residual},
                         {"integral", mono.integral}};
    j["li_yau_gap"] = li_yau_gap(mu->mu, p, radii);
    Varifold2 nu = pushforward_inversion(mu->mu, p, r_min);
    j["pushforward"] = {
        {"mass", nu.mass()},
        {"stationarity_defect", stationarity_defect(nu, default_test_fields(nu))},
        {"mass_by_area_formula", inversion_mass_integral(mu->mu, p)}};
    double span = nu.diameter();
    j["density_transport"] = {
        {"theta_at_x0", mono.theta},
        {"theta_at_infinity",
         density_at_infinity(nu, geometric_radii(span * 0.015, span * 0.15)).value}};
    *json_out = dup_string(j.dump(2));
  });
}

void wlab_string_free(char* s) { std::free(s); }

wlab_status wlab_pipeline_run(const char* config_path, int* all_pass) {
  return guarded([&] {
    if (!config_path || !all_pass) fail(ErrorCode::invalid_argument, "null argument");
    PipelineConfig cfg = PipelineConfig::from_file(config_path);
    PipelineReport rep = run_pipeline(cfg);
    *all_pass = rep.all_pass ? 1 : 0;
  });
}

}  // extern "C"
