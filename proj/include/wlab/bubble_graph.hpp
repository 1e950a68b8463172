#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wlab/linalg.hpp"
#include "wlab/models.hpp"

namespace wlab {

enum class VertexKind { thick, thin, conc };

const char* vertex_kind_name(VertexKind k);
VertexKind vertex_kind_from_name(const std::string& s);

struct BubbleVertex {
  std::string id;
  VertexKind kind = VertexKind::thick;
  ModelTag limit_class = ModelTag::unclassified;
  std::vector<double> scales;    // s^v_k, strictly positive
  std::vector<Vec3> positions;   // y^v_k
  std::vector<std::string> Q;    // punctures (thin: exactly 2; conc: empty)
  std::vector<std::string> R;    // concentration points
};

// Stored tail -> head with m >= 1: branch point of order m at q1 on the tail,
// end of order -m at q2 on the head; tail scale dominates.
struct BubbleEdge {
  std::string tail, head;
  std::string q1, q2;
  int m = 1;
};

struct BubbleGraph {
  int genus = 0;
  std::vector<int> k_values;
  std::vector<BubbleVertex> vertices;
  std::vector<BubbleEdge> edges;

  const BubbleVertex* find(const std::string& id) const;
  BubbleVertex* find(const std::string& id);
  void validate() const;

  std::string to_json() const;
  static BubbleGraph from_json(const std::string& text);
  std::string to_graphviz() const;
};

// Rooted tree with labeled leaves and per-edge scale-ratio schedules; the
// generative blueprint of the double tree (T+T)/~.
struct TreeSpec {
  std::string root;
  std::map<std::string, std::vector<std::string>> children;
  std::vector<std::string> leaves;
  std::map<std::string, std::vector<double>> ratio_schedule;  // key "parent->child"

  int depth(const std::string& v) const;
  std::vector<std::string> all_vertices() const;
  bool is_leaf(const std::string& v) const;
  void validate(int genus) const;  // >= 2 children per internal vertex, p+1 leaves

  std::string to_json() const;
  static TreeSpec from_json(const std::string& text);
};

// Maximal descent (rules 1a/1b) / ascent (2a/2b) from vertex v at attachment q.
// Deterministic continuation: smallest eligible attachment label. Throws
// CycleDetected when a vertex would repeat.
std::vector<std::string> bubble_descent(const BubbleGraph& g, const std::string& v,
                                        const std::string& q);
std::vector<std::string> bubble_ascent(const BubbleGraph& g, const std::string& v,
                                       const std::string& q);

struct ScaleOrderRow {
  std::string tail, head;
  double slope = 0;        // fitted slope of log(s_tail/s_head) in k
  double final_ratio = 0;
  bool pass = false;
};
std::vector<ScaleOrderRow> check_scale_order(const BubbleGraph& g,
                                             double min_final_ratio = 10.0);
bool scale_order_all_pass(const BubbleGraph& g, double min_final_ratio = 10.0);

struct CatenoidCount {
  int by_class = 0;  // #{v : limit_class = C}
  int by_euler = 0;  // #E' - #V' + 2 over the thick/thin subgraph
};
// Throws Mismatch when the two counts disagree.
CatenoidCount count_catenoids(const BubbleGraph& g);

// First Betti number of the thick/thin subgraph: #E' - #V' + 1.
int first_betti(const BubbleGraph& g);

struct DoubleTreeReport {
  bool pass = false;
  std::string failed_clause;
  TreeSpec tree;                             // recovered blueprint (copy 1)
  std::map<std::string, std::string> gamma;  // copy-1 -> copy-2 isomorphism
  std::string sphere1, sphere2, root1, root2;
};

// Verifies V_conc = {S1, S2}, the two rooted trees, the leaf-fixed
// isomorphism, and per-pair scale/position agreement. Throws NotDoubleTree
// only in strict mode; otherwise reports the first violated clause.
DoubleTreeReport double_tree_check(const BubbleGraph& g, bool strict = false);

// The unique rooted isomorphism determined by leaf sets (D_{gamma(v)} = D_v).
// Throws NoIsomorphism when the leaf-set lattices differ.
std::map<std::string, std::string> leaf_fixed_isomorphism(const TreeSpec& t1,
                                                          const TreeSpec& t2);

// Per-vertex limiting behavior of p^v_k = (s^v_k)^{-1}(p_k - y^v_k).
struct CenterBehavior {
  bool to_infinity = true;
  Vec3 limit{0, 0, 0};
  enum class Relation { off_image, on_image, at_puncture_image } relation =
      Relation::off_image;
};

enum class InversionType { type1 = 1, type2 = 2, type3 = 3, type4 = 4 };

// Prop.-5.1 style case analysis on supplied limit data. Throws
// InconsistentBehavior when mutually exclusive cases are flagged.
InversionType classify_inversion_type(
    const BubbleGraph& g, const std::map<std::string, CenterBehavior>& behavior);

}  // namespace wlab

namespace wlab {

struct GraphMatch {
  bool isomorphic = false;
  std::string mismatch;
  std::map<std::string, std::string> vertex_map;  // truth id -> detected id
  double max_edge_slope_deviation = 0;            // relative, against truth slopes
};

// Structural match of a detected graph against ground truth: double-tree
// shapes, kinds, limit classes and edge exponents, with leaves paired by
// position. Slope deviations are measured over the common k-window.
GraphMatch match_graphs(const BubbleGraph& truth, const BubbleGraph& detected,
                        double leaf_position_tol = 0.2);

}  // namespace wlab
