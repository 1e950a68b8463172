#include "wlab/bubble_graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"

namespace wlab {

const char* vertex_kind_name(VertexKind k) {
  switch (k) {
    case VertexKind::thick: return "thick";
    case VertexKind::thin: return "thin";
    case VertexKind::conc: return "conc";
  }
  return "thick";
}

VertexKind vertex_kind_from_name(const std::string& s) {
  if (s == "thick") return VertexKind::thick;
  if (s == "thin") return VertexKind::thin;
  if (s == "conc") return VertexKind::conc;
  fail(ErrorCode::invalid_argument, "unknown vertex kind: " + s);
}

const BubbleVertex* BubbleGraph::find(const std::string& id) const {
  for (const auto& v : vertices)
    if (v.id == id) return &v;
  return nullptr;
}
BubbleVertex* BubbleGraph::find(const std::string& id) {
  for (auto& v : vertices)
    if (v.id == id) return &v;
  return nullptr;
}

namespace {
bool has_label(const std::vector<std::string>& a, const std::vector<std::string>& b,
               const std::string& q) {
  return std::find(a.begin(), a.end(), q) != a.end() ||
         std::find(b.begin(), b.end(), q) != b.end();
}
}  // namespace

void BubbleGraph::validate() const {
  for (const auto& v : vertices) {
    for (double s : v.scales)
      if (!(s > 0))
        fail(ErrorCode::invalid_argument, "vertex " + v.id + ": nonpositive scale");
    if (v.kind == VertexKind::thin && v.Q.size() != 2)
      fail(ErrorCode::invalid_argument, "thin vertex " + v.id + " must have #Q = 2");
    if (v.kind == VertexKind::conc && !v.Q.empty())
      fail(ErrorCode::invalid_argument, "conc vertex " + v.id + " must have empty Q");
    if (v.scales.size() != k_values.size() || v.positions.size() != k_values.size())
      fail(ErrorCode::invalid_argument, "vertex " + v.id + ": schedule length mismatch");
  }
  for (const auto& e : edges) {
    if (e.tail == e.head)
      fail(ErrorCode::invalid_argument, "loop edge at " + e.tail);
    if (e.m == 0) fail(ErrorCode::invalid_argument, "edge with m = 0");
    const BubbleVertex* t = find(e.tail);
    const BubbleVertex* h = find(e.head);
    if (!t || !h) fail(ErrorCode::invalid_argument, "edge references unknown vertex");
    if (!has_label(t->Q, t->R, e.q1))
      fail(ErrorCode::invalid_argument,
           "edge " + e.tail + "->" + e.head + ": q1 not in Q u R of the tail");
    if (!has_label(h->Q, h->R, e.q2))
      fail(ErrorCode::invalid_argument,
           "edge " + e.tail + "->" + e.head + ": q2 not in Q u R of the head");
  }
}

using nlohmann::json;

std::string BubbleGraph::to_json() const {
  json j;
  j["genus"] = genus;
  j["k_values"] = k_values;
  j["vertices"] = json::array();
  for (const auto& v : vertices) {
    json jv;
    jv["id"] = v.id;
    jv["kind"] = vertex_kind_name(v.kind);
    jv["limit_class"] = model_tag_name(v.limit_class);
    jv["scales"] = v.scales;
    json pos = json::array();
    for (const auto& p : v.positions) pos.push_back({p.x, p.y, p.z});
    jv["positions"] = pos;
    jv["Q"] = v.Q;
    jv["R"] = v.R;
    j["vertices"].push_back(jv);
  }
  j["edges"] = json::array();
  for (const auto& e : edges)
    j["edges"].push_back(
        {{"tail", e.tail}, {"head", e.head}, {"q1", e.q1}, {"q2", e.q2}, {"m", e.m}});
  return j.dump(2);
}

BubbleGraph BubbleGraph::from_json(const std::string& text) {
  json j = json::parse(text);
  BubbleGraph g;
  g.genus = j.at("genus");
  g.k_values = j.at("k_values").get<std::vector<int>>();
  for (const auto& jv : j.at("vertices")) {
    BubbleVertex v;
    v.id = jv.at("id");
    v.kind = vertex_kind_from_name(jv.at("kind"));
    v.limit_class = model_tag_from_name(jv.at("limit_class"));
    v.scales = jv.at("scales").get<std::vector<double>>();
    for (const auto& jp : jv.at("positions"))
      v.positions.push_back({jp[0], jp[1], jp[2]});
    v.Q = jv.at("Q").get<std::vector<std::string>>();
    v.R = jv.at("R").get<std::vector<std::string>>();
    g.vertices.push_back(std::move(v));
  }
  for (const auto& je : j.at("edges")) {
    BubbleEdge e;
    e.tail = je.at("tail");
    e.head = je.at("head");
    e.q1 = je.at("q1");
    e.q2 = je.at("q2");
    e.m = je.at("m");
    g.edges.push_back(std::move(e));
  }
  g.validate();
  return g;
}

std::string BubbleGraph::to_graphviz() const {
  std::ostringstream out;
  out << "digraph bubbles {\n";
  for (const auto& v : vertices)
    out << "  \"" << v.id << "\" [label=\"" << v.id << "\\n"
        << vertex_kind_name(v.kind) << "/" << model_tag_name(v.limit_class) << "\"];\n";
  for (const auto& e : edges)
    out << "  \"" << e.tail << "\" -> \"" << e.head << "\" [label=\"m=" << e.m
        << "\"];\n";
  out << "}\n";
  return out.str();
}

int TreeSpec::depth(const std::string& v) const {
  if (v == root) return 0;
  for (const auto& [p, kids] : children)
    for (const auto& k : kids)
      if (k == v) return depth(p) + 1;
  fail(ErrorCode::invalid_argument, "TreeSpec: vertex not found: " + v);
}

std::vector<std::string> TreeSpec::all_vertices() const {
  std::vector<std::string> out{root};
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto it = children.find(out[i]);
    if (it != children.end())
      for (const auto& k : it->second) out.push_back(k);
  }
  return out;
}

bool TreeSpec::is_leaf(const std::string& v) const {
  auto it = children.find(v);
  return it == children.end() || it->second.empty();
}

void TreeSpec::validate(int genus) const {
  auto verts = all_vertices();
  int leaf_count = 0;
  for (const auto& v : verts) {
    if (is_leaf(v)) {
      ++leaf_count;
      if (std::find(leaves.begin(), leaves.end(), v) == leaves.end())
        fail(ErrorCode::invalid_argument, "TreeSpec: leaf " + v + " missing from leaf list");
    } else if (children.at(v).size() < 2) {
      fail(ErrorCode::invalid_argument,
           "TreeSpec: internal vertex " + v + " must have >= 2 children");
    }
  }
  if (leaf_count != genus + 1)
    fail(ErrorCode::invalid_argument, "TreeSpec: expected p+1 leaves");
}

std::string TreeSpec::to_json() const {
  json j;
  j["root"] = root;
  j["children"] = children;
  j["leaves"] = leaves;
  j["ratio_schedule"] = ratio_schedule;
  return j.dump(2);
}

TreeSpec TreeSpec::from_json(const std::string& text) {
  json j = json::parse(text);
  TreeSpec t;
  t.root = j.at("root");
  t.children = j.at("children").get<std::map<std::string, std::vector<std::string>>>();
  t.leaves = j.at("leaves").get<std::vector<std::string>>();
  if (j.contains("ratio_schedule"))
    t.ratio_schedule = j.at("ratio_schedule").get<std::map<std::string, std::vector<double>>>();
  return t;
}

namespace {

// Traversal step shared by descent/ascent: edges are stored tail->head with
// m >= 1. A branch point of v at q is an outgoing edge (tail = v, q1 = q); an
// end of v at q is an incoming edge (head = v, q2 = q).
std::vector<std::string> traverse(const BubbleGraph& g, const std::string& start,
                                  const std::string& q, bool descend) {
  std::vector<std::string> path{start};
  std::set<std::string> seen{start};
  std::string current = start;
  std::string attach = q;
  bool first = true;
  while (true) {
    const BubbleEdge* step = nullptr;
    std::string best_label;
    for (const auto& e : g.edges) {
      bool match = descend ? (e.tail == current && e.q1 == attach)
                           : (e.head == current && e.q2 == attach);
      if (match) {
        step = &e;
        break;
      }
    }
    if (first && !step)
      fail(ErrorCode::invalid_argument,
           (descend ? std::string("bubble_descent: no branch point at ")
                    : std::string("bubble_ascent: no end at ")) +
               attach + " on " + current);
    if (!step) break;
    std::string next = descend ? step->head : step->tail;
    std::string arrival = descend ? step->q2 : step->q1;
    if (seen.count(next))
      fail(ErrorCode::cycle_detected,
           "traversal revisits " + next + " (scale order forbids revisits)");
    path.push_back(next);
    seen.insert(next);
    current = next;
    first = false;
    // choose the next attachment: any eligible point different from the
    // arrival point, smallest label for determinism
    const BubbleVertex* v = g.find(current);
    std::vector<std::string> candidates;
    for (const auto& lbl : v->Q) candidates.push_back(lbl);
    for (const auto& lbl : v->R) candidates.push_back(lbl);
    std::sort(candidates.begin(), candidates.end());
    attach.clear();
    for (const auto& lbl : candidates) {
      if (lbl == arrival) continue;
      bool usable = false;
      for (const auto& e : g.edges) {
        if (descend ? (e.tail == current && e.q1 == lbl)
                    : (e.head == current && e.q2 == lbl)) {
          usable = true;
          break;
        }
      }
      if (usable) {
        attach = lbl;
        break;
      }
    }
    if (attach.empty()) break;  // maximal: no eligible continuation
  }
  return path;
}

}  // namespace

std::vector<std::string> bubble_descent(const BubbleGraph& g, const std::string& v,
                                        const std::string& q) {
  if (!g.find(v)) fail(ErrorCode::invalid_argument, "bubble_descent: unknown vertex " + v);
  return traverse(g, v, q, true);
}

std::vector<std::string> bubble_ascent(const BubbleGraph& g, const std::string& v,
                                       const std::string& q) {
  if (!g.find(v)) fail(ErrorCode::invalid_argument, "bubble_ascent: unknown vertex " + v);
  return traverse(g, v, q, false);
}

std::vector<ScaleOrderRow> check_scale_order(const BubbleGraph& g, double min_final_ratio) {
  if (g.k_values.size() < 4)
    fail(ErrorCode::invalid_argument, "check_scale_order: k-range length must be >= 4");
  std::vector<ScaleOrderRow> rows;
  for (const auto& e : g.edges) {
    const BubbleVertex* t = g.find(e.tail);
    const BubbleVertex* h = g.find(e.head);
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < g.k_values.size(); ++k) {
      xs.push_back(double(g.k_values[k]));
      ys.push_back(std::log(t->scales[k] / h->scales[k]));
    }
    ScaleOrderRow row;
    row.tail = e.tail;
    row.head = e.head;
    row.slope = fit_line(xs, ys).slope;
    row.final_ratio = t->scales.back() / h->scales.back();
    row.pass = row.slope > 0 && row.final_ratio > min_final_ratio;
    rows.push_back(row);
  }
  return rows;
}

bool scale_order_all_pass(const BubbleGraph& g, double min_final_ratio) {
  for (const auto& r : check_scale_order(g, min_final_ratio))
    if (!r.pass) return false;
  return true;
}

namespace {
bool is_prime_vertex(const BubbleVertex& v) { return v.kind != VertexKind::conc; }
}  // namespace

CatenoidCount count_catenoids(const BubbleGraph& g) {
  CatenoidCount c;
  int vprime = 0, eprime = 0;
  for (const auto& v : g.vertices) {
    if (v.limit_class == ModelTag::C) ++c.by_class;
    if (is_prime_vertex(v)) ++vprime;
  }
  for (const auto& e : g.edges) {
    const BubbleVertex* t = g.find(e.tail);
    const BubbleVertex* h = g.find(e.head);
    if (is_prime_vertex(*t) && is_prime_vertex(*h)) ++eprime;
  }
  c.by_euler = eprime - vprime + 2;
  if (c.by_class != c.by_euler)
    fail(ErrorCode::mismatch, "catenoid count " + std::to_string(c.by_class) +
                                  " disagrees with Euler count " +
                                  std::to_string(c.by_euler));
  return c;
}

int first_betti(const BubbleGraph& g) {
  int vprime = 0, eprime = 0;
  for (const auto& v : g.vertices)
    if (is_prime_vertex(v)) ++vprime;
  for (const auto& e : g.edges) {
    if (is_prime_vertex(*g.find(e.tail)) && is_prime_vertex(*g.find(e.head))) ++eprime;
  }
  return eprime - vprime + 1;
}

std::map<std::string, std::string> leaf_fixed_isomorphism(const TreeSpec& t1,
                                                          const TreeSpec& t2) {
  auto leaf_sets = [](const TreeSpec& t) {
    std::map<std::string, std::set<std::string>> sets;
    // post-order accumulation
    std::vector<std::string> order = t.all_vertices();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      if (t.is_leaf(*it)) {
        sets[*it] = {*it};
      } else {
        std::set<std::string> s;
        for (const auto& c : t.children.at(*it)) s.insert(sets[c].begin(), sets[c].end());
        sets[*it] = std::move(s);
      }
    }
    return sets;
  };
  std::set<std::string> l1(t1.leaves.begin(), t1.leaves.end());
  std::set<std::string> l2(t2.leaves.begin(), t2.leaves.end());
  if (l1 != l2) fail(ErrorCode::no_isomorphism, "leaf label sets differ");
  auto s1 = leaf_sets(t1);
  auto s2 = leaf_sets(t2);
  // D_{gamma(v)} = D_v determines gamma
  std::map<std::string, std::string> gamma;
  for (const auto& [v, dv] : s1) {
    std::string match;
    for (const auto& [w, dw] : s2)
      if (dv == dw) {
        match = w;
        break;
      }
    if (match.empty())
      fail(ErrorCode::no_isomorphism, "no partner with leaf set of " + v);
    gamma[v] = match;
  }
  if (gamma.size() != s2.size())
    fail(ErrorCode::no_isomorphism, "leaf-set lattices have different sizes");
  // edges must be preserved
  for (const auto& [p, kids] : t1.children)
    for (const auto& c : kids) {
      const auto& g2kids = t2.children.count(gamma[p]) ? t2.children.at(gamma[p])
                                                       : std::vector<std::string>{};
      if (std::find(g2kids.begin(), g2kids.end(), gamma[c]) == g2kids.end())
        fail(ErrorCode::no_isomorphism, "edge " + p + "->" + c + " not preserved");
    }
  return gamma;
}

DoubleTreeReport double_tree_check(const BubbleGraph& g, bool strict) {
  DoubleTreeReport rep;
  auto fail_clause = [&](const std::string& clause) -> DoubleTreeReport& {
    rep.pass = false;
    rep.failed_clause = clause;
    if (strict) fail(ErrorCode::not_double_tree, "double_tree_check: " + clause);
    return rep;
  };

  // clause 1: V_conc = {S1, S2}, both spheres
  std::vector<std::string> spheres;
  for (const auto& v : g.vertices)
    if (v.kind == VertexKind::conc) spheres.push_back(v.id);
  if (spheres.size() != 2) return fail_clause("V_conc must consist of exactly two vertices");
  for (const auto& s : spheres)
    if (g.find(s)->limit_class != ModelTag::S)
      return fail_clause("conc vertex " + s + " is not a sphere");
  rep.sphere1 = spheres[0];
  rep.sphere2 = spheres[1];

  // clause 2: each sphere feeds exactly one root
  auto root_of = [&](const std::string& s) -> std::string {
    std::string r;
    for (const auto& e : g.edges)
      if (e.tail == s) {
        if (!r.empty()) return "";
        r = e.head;
      }
    return r;
  };
  rep.root1 = root_of(spheres[0]);
  rep.root2 = root_of(spheres[1]);
  if (rep.root1.empty() || rep.root2.empty() || rep.root1 == rep.root2)
    return fail_clause("spheres must attach to two distinct roots");

  // clause 3: directed reachability inside V' from each root
  auto reach = [&](const std::string& root) {
    std::set<std::string> seen{root};
    std::vector<std::string> stack{root};
    while (!stack.empty()) {
      std::string v = stack.back();
      stack.pop_back();
      for (const auto& e : g.edges) {
        if (e.tail != v) continue;
        if (g.find(e.head)->kind == VertexKind::conc) continue;
        if (seen.insert(e.head).second) stack.push_back(e.head);
      }
    }
    return seen;
  };
  std::set<std::string> t1 = reach(rep.root1), t2 = reach(rep.root2);

  std::set<std::string> vprime, cats;
  for (const auto& v : g.vertices) {
    if (v.kind == VertexKind::conc) continue;
    vprime.insert(v.id);
    if (v.limit_class == ModelTag::C) cats.insert(v.id);
  }
  std::set<std::string> uni, inter;
  std::set_union(t1.begin(), t1.end(), t2.begin(), t2.end(), std::inserter(uni, uni.end()));
  std::set_intersection(t1.begin(), t1.end(), t2.begin(), t2.end(),
                        std::inserter(inter, inter.end()));
  if (uni != vprime) return fail_clause("V_T1 u V_T2 != V'");
  if (inter != cats) return fail_clause("V_T1 n V_T2 != C (leaves not shared)");

  // clause 4: each copy is a rooted tree with the catenoids as leaves
  auto build_tree = [&](const std::string& root, const std::set<std::string>& verts,
                        TreeSpec& t) -> bool {
    t.root = root;
    t.children.clear();
    t.leaves.assign(cats.begin(), cats.end());
    std::map<std::string, int> indeg;
    for (const auto& e : g.edges) {
      if (!verts.count(e.tail) || !verts.count(e.head)) continue;
      if (cats.count(e.tail)) return false;  // catenoids must be terminal
      t.children[e.tail].push_back(e.head);
      indeg[e.head]++;
    }
    for (auto& [p, kids] : t.children) std::sort(kids.begin(), kids.end());
    for (const auto& v : verts) {
      if (v == root && indeg.count(v)) return false;
      if (v != root && indeg[v] != 1 && !cats.count(v)) return false;
      if (!cats.count(v) && !t.children.count(v)) return false;   // internal w/o children
      if (!cats.count(v) && t.children[v].size() < 2) return false;
    }
    return true;
  };
  TreeSpec tree1, tree2;
  if (!build_tree(rep.root1, t1, tree1)) return fail_clause("copy 1 is not a rooted tree");
  if (!build_tree(rep.root2, t2, tree2)) return fail_clause("copy 2 is not a rooted tree");

  // clause 5: leaf-fixed isomorphism
  try {
    rep.gamma = leaf_fixed_isomorphism(tree1, tree2);
  } catch (const Error&) {
    return fail_clause("copies are not isomorphic as rooted trees with fixed leaves");
  }

  // clause 6: paired scale/position agreement
  for (const auto& [v, w] : rep.gamma) {
    if (cats.count(v)) continue;
    const BubbleVertex* a = g.find(v);
    const BubbleVertex* b = g.find(w);
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < g.k_values.size(); ++k) {
      double ratio = a->scales[k] / b->scales[k];
      if (ratio < 0.5 || ratio > 2.0)
        return fail_clause("scale ratio of " + v + "/" + w + " outside [1/2, 2]");
      xs.push_back(double(g.k_values[k]));
      ys.push_back(std::log(ratio));
      double posdef = dist(a->positions[k], b->positions[k]) / b->scales[k];
      if (posdef > 10.0)
        return fail_clause("positions of " + v + "/" + w + " drift apart");
    }
    if (std::fabs(fit_line(xs, ys).slope) > 0.05)
      return fail_clause("scale log-ratio of " + v + "/" + w + " has nonzero slope");
  }

  // ratio schedules along copy-1 edges
  for (const auto& [p, kids] : tree1.children)
    for (const auto& c : kids) {
      std::vector<double> sched;
      const BubbleVertex* a = g.find(p);
      const BubbleVertex* b = g.find(c);
      for (std::size_t k = 0; k < g.k_values.size(); ++k)
        sched.push_back(a->scales[k] / b->scales[k]);
      tree1.ratio_schedule[p + "->" + c] = std::move(sched);
    }
  rep.tree = tree1;
  rep.pass = true;
  return rep;
}

InversionType classify_inversion_type(
    const BubbleGraph& g, const std::map<std::string, CenterBehavior>& behavior) {
  int t1_hits = 0, t2_hits = 0, t3_hits = 0;
  for (const auto& [id, b] : behavior) {
    const BubbleVertex* v = g.find(id);
    if (!v) fail(ErrorCode::invalid_argument, "behavior for unknown vertex " + id);
    if (b.to_infinity) continue;
    if (v->limit_class == ModelTag::C) {
      if (b.relation == CenterBehavior::Relation::off_image) ++t1_hits;
      else if (b.relation == CenterBehavior::Relation::on_image) ++t2_hits;
      // at a puncture image of a catenoid: both ends sit at infinity, treated
      // as the type-4 branch
    } else if (v->kind == VertexKind::thick) {
      if (b.relation != CenterBehavior::Relation::at_puncture_image) ++t3_hits;
    }
  }
  int categories = (t1_hits > 0) + (t2_hits > 0) + (t3_hits > 0);
  if (categories > 1 || t1_hits > 1 || t2_hits > 1)
    fail(ErrorCode::inconsistent_behavior,
         "classify_inversion_type: mutually exclusive cases flagged");
  if (t1_hits) return InversionType::type1;
  if (t2_hits) return InversionType::type2;
  if (t3_hits) return InversionType::type3;
  return InversionType::type4;
}

}  // namespace wlab

namespace wlab {

namespace {

double edge_slope(const BubbleGraph& g, const BubbleEdge& e, const std::set<int>& common) {
  const BubbleVertex* t = g.find(e.tail);
  const BubbleVertex* h = g.find(e.head);
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < g.k_values.size(); ++k) {
    if (!common.count(g.k_values[k])) continue;
    xs.push_back(double(g.k_values[k]));
    ys.push_back(std::log(t->scales[k] / h->scales[k]));
  }
  return fit_line(xs, ys).slope;
}

}  // namespace

GraphMatch match_graphs(const BubbleGraph& truth, const BubbleGraph& detected,
                        double leaf_position_tol) {
  GraphMatch out;
  auto fail_with = [&](const std::string& why) {
    out.isomorphic = false;
    out.mismatch = why;
    return out;
  };
  DoubleTreeReport rt = double_tree_check(truth);
  DoubleTreeReport rd = double_tree_check(detected);
  if (!rt.pass) return fail_with("truth graph is not a double tree: " + rt.failed_clause);
  if (!rd.pass) return fail_with("detected graph is not a double tree: " + rd.failed_clause);
  if (truth.genus != detected.genus) return fail_with("genus mismatch");
  if (truth.edges.size() != detected.edges.size()) return fail_with("edge counts differ");

  std::set<int> inter;
  for (int k : truth.k_values)
    if (std::find(detected.k_values.begin(), detected.k_values.end(), k) !=
        detected.k_values.end())
      inter.insert(k);
  if (inter.empty()) return fail_with("no common k-window");
  int klast = *inter.rbegin();
  auto pos_at = [&](const BubbleGraph& g, const std::string& id) {
    const BubbleVertex* v = g.find(id);
    for (std::size_t i = 0; i < g.k_values.size(); ++i)
      if (g.k_values[i] == klast) return v->positions[i];
    return v->positions.back();
  };

  // leaves paired by position
  std::map<std::string, std::string> leaf_map;  // truth -> detected
  for (const auto& lt : rt.tree.leaves) {
    std::string best;
    double bd = 1e300;
    for (const auto& ld : rd.tree.leaves) {
      double d = dist(pos_at(truth, lt), pos_at(detected, ld));
      if (d < bd) {
        bd = d;
        best = ld;
      }
    }
    if (bd > leaf_position_tol)
      return fail_with("leaf " + lt + " has no positional partner");
    leaf_map[lt] = best;
  }
  {
    std::set<std::string> used;
    for (const auto& [a, b] : leaf_map) used.insert(b);
    if (used.size() != leaf_map.size()) return fail_with("leaf pairing not injective");
  }

  // detected copy-2 tree via its gamma
  auto mapped_tree = [](const TreeSpec& t, const std::map<std::string, std::string>& gm) {
    TreeSpec r;
    auto mm = [&](const std::string& v) { return gm.count(v) ? gm.at(v) : v; };
    r.root = mm(t.root);
    for (const auto& [p, kids] : t.children)
      for (const auto& c : kids) r.children[mm(p)].push_back(mm(c));
    for (const auto& l : t.leaves) r.leaves.push_back(mm(l));
    return r;
  };
  std::map<std::string, std::string> rd_gamma_inv;
  for (const auto& [a, b] : rd.gamma) rd_gamma_inv[b] = a;

  std::string last_why = "no copy pairing matched";
  for (int flip = 0; flip < 2; ++flip) {
    TreeSpec dtree = flip ? mapped_tree(rd.tree, rd.gamma) : rd.tree;
    const auto& dgamma = flip ? rd_gamma_inv : rd.gamma;

    // rename detected leaves to the truth labels for the leaf-fixed matching
    std::map<std::string, std::string> inv_leaf;
    for (const auto& [t, d] : leaf_map) inv_leaf[d] = t;
    TreeSpec renamed;
    auto rn = [&](const std::string& v) { return inv_leaf.count(v) ? inv_leaf.at(v) : v; };
    renamed.root = rn(dtree.root);
    for (const auto& [p, kids] : dtree.children)
      for (const auto& c : kids) renamed.children[rn(p)].push_back(rn(c));
    for (const auto& l : dtree.leaves) renamed.leaves.push_back(rn(l));

    std::map<std::string, std::string> iso;
    try {
      iso = leaf_fixed_isomorphism(rt.tree, renamed);  // truth copy1 -> renamed ids
    } catch (const Error& e) {
      last_why = e.what();
      continue;
    }
    std::map<std::string, std::string> vmap;  // truth -> detected
    for (const auto& [t, r] : iso) vmap[t] = leaf_map.count(r) ? leaf_map.at(r) : r;
    bool ok = true;
    std::string why;
    for (const auto& [t1, t2] : rt.gamma) {
      if (t1 == t2) continue;  // leaves map to themselves
      auto it = vmap.find(t1);
      if (it == vmap.end() || !dgamma.count(it->second)) {
        ok = false;
        why = "copy-2 image missing for " + t1;
        break;
      }
      vmap[t2] = dgamma.at(it->second);
    }
    if (!ok) {
      last_why = why;
      continue;
    }
    vmap[rt.sphere1] = flip ? rd.sphere2 : rd.sphere1;
    vmap[rt.sphere2] = flip ? rd.sphere1 : rd.sphere2;

    for (const auto& [t, d] : vmap) {
      const BubbleVertex* vt = truth.find(t);
      const BubbleVertex* vd = detected.find(d);
      if (!vt || !vd) { ok = false; why = "dangling vertex in the match"; break; }
      if (vt->kind != vd->kind) { ok = false; why = "kind mismatch at " + t; break; }
      if (vt->limit_class != vd->limit_class) {
        ok = false;
        why = "limit class mismatch at " + t;
        break;
      }
    }
    if (!ok) {
      last_why = why;
      continue;
    }
    double worst_slope = 0;
    for (const auto& et : truth.edges) {
      const BubbleEdge* match = nullptr;
      for (const auto& ed : detected.edges)
        if (ed.tail == vmap[et.tail] && ed.head == vmap[et.head]) match = &ed;
      if (!match) {
        ok = false;
        why = "edge " + et.tail + "->" + et.head + " missing in the detected graph";
        break;
      }
      if (match->m != et.m) {
        ok = false;
        why = "exponent mismatch on edge " + et.tail + "->" + et.head;
        break;
      }
      double st = edge_slope(truth, et, inter);
      double sd = edge_slope(detected, *match, inter);
      worst_slope = std::max(worst_slope, std::fabs(sd - st) / std::max(std::fabs(st), 0.05));
    }
    if (!ok) {
      last_why = why;
      continue;
    }
    out.isomorphic = true;
    out.vertex_map = vmap;
    out.max_edge_slope_deviation = worst_slope;
    return out;
  }
  return fail_with(last_why);
}

}  // namespace wlab
