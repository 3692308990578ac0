#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "reoptdb/query.hpp"

namespace reoptdb {

// Leaf sets are bitmasks over the query's canonical relation order.
using RelMask = std::uint32_t;

enum class JoinAlgo { Hash, NestedLoop };

inline const char* join_algo_name(JoinAlgo a) {
  return a == JoinAlgo::Hash ? "hash" : "nested_loop";
}

// One node of a physical plan. Join nodes build (hash) or iterate (nested
// loop) on their left child and stream the right child, so the left/right
// order carries the build/probe (outer/inner) side assignment. Nodes are
// immutable and shared between plans.
struct PlanNode;
using NodePtr = std::shared_ptr<const PlanNode>;

struct PlanNode {
  enum class Kind { Scan, Join };
  Kind kind = Kind::Scan;

  // Scan fields.
  std::string relation;
  int rel_index = -1;
  std::vector<SelectionPred> selections;

  // Join fields. keys lists one cross-side column pair per equivalence
  // class spanning both children; empty keys means a cross product.
  JoinAlgo algo = JoinAlgo::Hash;
  std::vector<std::pair<ColumnRef, ColumnRef>> keys;
  NodePtr left;
  NodePtr right;

  RelMask mask = 0;
};

inline NodePtr make_scan(const std::string& relation, int rel_index,
                         std::vector<SelectionPred> selections) {
  auto n = std::make_shared<PlanNode>();
  n->kind = PlanNode::Kind::Scan;
  n->relation = relation;
  n->rel_index = rel_index;
  n->selections = std::move(selections);
  n->mask = RelMask{1} << rel_index;
  return n;
}

inline NodePtr make_join(NodePtr left, NodePtr right, JoinAlgo algo,
                         std::vector<std::pair<ColumnRef, ColumnRef>> keys) {
  auto n = std::make_shared<PlanNode>();
  n->kind = PlanNode::Kind::Join;
  n->algo = algo;
  n->keys = std::move(keys);
  n->mask = left->mask | right->mask;
  n->left = std::move(left);
  n->right = std::move(right);
  return n;
}

// A complete plan for a query. rel_order fixes the relation each mask bit
// refers to (the query's canonical relation order).
struct PhysicalPlan {
  NodePtr root;
  std::vector<std::string> rel_order;

  bool single_scan() const {
    return root && root->kind == PlanNode::Kind::Scan;
  }
};

inline bool node_equal(const NodePtr& a, const NodePtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  if (a->kind == PlanNode::Kind::Scan) {
    return a->relation == b->relation && a->selections == b->selections;
  }
  return a->algo == b->algo && node_equal(a->left, b->left) &&
         node_equal(a->right, b->right);
}

// Structural plan equality: same shape, same operators, same sides. This is
// the fixed-point test of the re-optimization loop.
inline bool plan_equal(const PhysicalPlan& a, const PhysicalPlan& b) {
  return a.rel_order == b.rel_order && node_equal(a.root, b.root);
}

namespace detail {

inline void collect_join_masks(const NodePtr& n, std::vector<RelMask>& out) {
  if (!n || n->kind == PlanNode::Kind::Scan) return;
  collect_join_masks(n->left, out);
  collect_join_masks(n->right, out);
  out.push_back(n->mask);
}

inline void collect_nodes_postorder(const NodePtr& n,
                                    std::vector<const PlanNode*>& out) {
  if (!n) return;
  collect_nodes_postorder(n->left, out);
  collect_nodes_postorder(n->right, out);
  out.push_back(n.get());
}

inline std::vector<int> mask_indices(RelMask m) {
  std::vector<int> out;
  for (int i = 0; m != 0; ++i, m >>= 1) {
    if (m & 1) out.push_back(i);
  }
  return out;
}

// Leaf sets compare as their sorted index sequences.
inline bool mask_lex_less(RelMask a, RelMask b) {
  return mask_indices(a) < mask_indices(b);
}

}  // namespace detail

// The join list of a plan: every join node's leaf set, bottom-up and
// left-to-right (post-order). A single-relation plan encodes as the empty
// list.
inline std::vector<RelMask> tree_encoding(const PhysicalPlan& p) {
  std::vector<RelMask> out;
  detail::collect_join_masks(p.root, out);
  return out;
}

inline std::string mask_text(RelMask m, const std::vector<std::string>& rels) {
  std::string out = "{";
  bool first = true;
  for (int i : detail::mask_indices(m)) {
    if (!first) out += ",";
    out += rels[static_cast<std::size_t>(i)];
    first = false;
  }
  return out + "}";
}

inline std::string encoding_text(const PhysicalPlan& p) {
  std::string out = "(";
  auto enc = tree_encoding(p);
  for (std::size_t i = 0; i < enc.size(); ++i) {
    if (i) out += ", ";
    out += mask_text(enc[i], p.rel_order);
  }
  return out + ")";
}

enum class Transformation { Local, Global };

inline const char* transformation_name(Transformation t) {
  return t == Transformation::Local ? "local" : "global";
}

// Two plans over the same relations are local transformations of each other
// when they perform the same set of (unordered) joins; otherwise the change
// is global. Each join node's leaf set identifies the unordered join, and
// within one tree all leaf sets are distinct, so set comparison suffices.
inline Transformation classify_transformation(const PhysicalPlan& a,
                                              const PhysicalPlan& b) {
  if (a.rel_order != b.rel_order || !a.root || !b.root ||
      a.root->mask != b.root->mask) {
    throw Error("classify_transformation: plans cover different relations");
  }
  std::vector<RelMask> ea = tree_encoding(a);
  std::vector<RelMask> eb = tree_encoding(b);
  std::sort(ea.begin(), ea.end());
  std::sort(eb.begin(), eb.end());
  return ea == eb ? Transformation::Local : Transformation::Global;
}

// Whether every join of `plan` already appears in some member of `others`.
// A covered plan's validation can reveal nothing new.
inline bool covered(const PhysicalPlan& plan,
                    const std::vector<PhysicalPlan>& others) {
  std::set<RelMask> seen;
  for (const auto& p : others) {
    for (RelMask m : tree_encoding(p)) seen.insert(m);
  }
  for (RelMask m : tree_encoding(plan)) {
    if (!seen.count(m)) return false;
  }
  return true;
}

// All plans performing the same unordered joins as `plan`: every
// combination of child swaps and operator tags, the input included. With j
// join nodes and both operators enabled this yields 4^j distinct plans.
inline std::vector<PhysicalPlan> local_transformations(
    const PhysicalPlan& plan,
    const std::vector<JoinAlgo>& operators = {JoinAlgo::Hash,
                                              JoinAlgo::NestedLoop}) {
  std::vector<PhysicalPlan> out;
  if (!plan.root) return out;

  struct Gen {
    const std::vector<JoinAlgo>& ops;
    std::vector<NodePtr> variants(const NodePtr& n) {
      if (n->kind == PlanNode::Kind::Scan) return {n};
      std::vector<NodePtr> lefts = variants(n->left);
      std::vector<NodePtr> rights = variants(n->right);
      std::vector<NodePtr> result;
      for (const auto& l : lefts) {
        for (const auto& r : rights) {
          for (JoinAlgo algo : ops) {
            result.push_back(make_join(l, r, algo, n->keys));
            std::vector<std::pair<ColumnRef, ColumnRef>> flipped;
            for (const auto& [a, b] : n->keys) flipped.emplace_back(b, a);
            result.push_back(make_join(r, l, algo, std::move(flipped)));
          }
        }
      }
      return result;
    }
  } gen{operators};

  for (const auto& root : gen.variants(plan.root)) {
    out.push_back(PhysicalPlan{root, plan.rel_order});
  }
  return out;
}

// --- Canonical keys for validated cardinalities ---

// A validated join is identified by the unordered set of its base relations
// together with the selections applied beneath it, rendered canonically:
//   R1[A1=0]+R2[A2=1]+R3
// Keys built this way are plan-shape independent: any plan joining the same
// filtered relations observes the same cardinality.
inline std::string canonical_key(
    const std::vector<std::pair<std::string, std::vector<SelectionPred>>>&
        parts) {
  std::vector<std::string> rendered;
  for (const auto& [rel, sels] : parts) {
    std::string s = rel;
    std::vector<SelectionPred> sorted = sels;
    std::sort(sorted.begin(), sorted.end());
    if (!sorted.empty()) {
      s += "[";
      for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i) s += ",";
        s += sorted[i].col.column + "=" + std::to_string(sorted[i].value);
      }
      s += "]";
    }
    rendered.push_back(std::move(s));
  }
  std::sort(rendered.begin(), rendered.end());
  std::string out;
  for (std::size_t i = 0; i < rendered.size(); ++i) {
    if (i) out += "+";
    out += rendered[i];
  }
  return out;
}

inline std::string node_key(const NodePtr& n) {
  std::vector<std::pair<std::string, std::vector<SelectionPred>>> parts;
  std::vector<const PlanNode*> nodes;
  detail::collect_nodes_postorder(n, nodes);
  for (const PlanNode* p : nodes) {
    if (p->kind == PlanNode::Kind::Scan) {
      parts.emplace_back(p->relation, p->selections);
    }
  }
  return canonical_key(parts);
}

// Key for a relation subset of a query, with the query's selections.
inline std::string subset_key(const QuerySpec& q, RelMask mask) {
  std::vector<std::pair<std::string, std::vector<SelectionPred>>> parts;
  for (int i : detail::mask_indices(mask)) {
    const std::string& rel = q.relations[static_cast<std::size_t>(i)];
    parts.emplace_back(rel, q.selections_on(rel));
  }
  return canonical_key(parts);
}

// Validated cardinalities, keyed canonically. Used both for one round's
// newly validated values and for the accumulated store fed back into the
// optimizer.
struct CardMap {
  std::map<std::string, double> cards;

  bool contains(const std::string& key) const { return cards.count(key) > 0; }

  double at(const std::string& key) const {
    auto it = cards.find(key);
    if (it == cards.end()) {
      throw Error("no validated cardinality for key '" + key + "'");
    }
    return it->second;
  }

  bool empty() const { return cards.empty(); }
  std::size_t size() const { return cards.size(); }
};

// Union of `gamma` and `delta`; on key collision the delta value wins.
inline CardMap merge_cards(const CardMap& gamma, const CardMap& delta) {
  CardMap out = gamma;
  for (const auto& [k, v] : delta.cards) out.cards[k] = v;
  return out;
}

// --- Deterministic plan ordering (cost tie-breaks) ---

namespace detail {

// Compares plans by their join list (leaf sets in post-order), then by the
// operator tag sequence, then by full structure. Total order on plans over
// the same relation order; used to break cost ties deterministically.
inline int node_structure_cmp(const NodePtr& a, const NodePtr& b) {
  bool a_scan = a->kind == PlanNode::Kind::Scan;
  bool b_scan = b->kind == PlanNode::Kind::Scan;
  if (a_scan != b_scan) return a_scan ? -1 : 1;
  if (a_scan) {
    if (a->rel_index != b->rel_index) return a->rel_index < b->rel_index ? -1 : 1;
    return 0;
  }
  if (int c = node_structure_cmp(a->left, b->left)) return c;
  return node_structure_cmp(a->right, b->right);
}

inline int plan_cmp(const PhysicalPlan& a, const PhysicalPlan& b) {
  std::vector<RelMask> ea = tree_encoding(a);
  std::vector<RelMask> eb = tree_encoding(b);
  for (std::size_t i = 0; i < std::min(ea.size(), eb.size()); ++i) {
    if (ea[i] != eb[i]) return mask_lex_less(ea[i], eb[i]) ? -1 : 1;
  }
  if (ea.size() != eb.size()) return ea.size() < eb.size() ? -1 : 1;

  // Equal join lists imply equally many join nodes, so the post-order
  // operator tag sequences align position by position. Scans must stay out
  // of this walk: mixing them in would compare tags at unrelated positions
  // and break transitivity.
  std::vector<const PlanNode*> na, nb;
  collect_nodes_postorder(a.root, na);
  collect_nodes_postorder(b.root, nb);
  std::vector<JoinAlgo> ta, tb;
  for (const PlanNode* n : na) {
    if (n->kind == PlanNode::Kind::Join) ta.push_back(n->algo);
  }
  for (const PlanNode* n : nb) {
    if (n->kind == PlanNode::Kind::Join) tb.push_back(n->algo);
  }
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (ta[i] != tb[i]) {
      return static_cast<int>(ta[i]) < static_cast<int>(tb[i]) ? -1 : 1;
    }
  }
  return node_structure_cmp(a.root, b.root);
}

}  // namespace detail

inline bool plan_less(const PhysicalPlan& a, const PhysicalPlan& b) {
  return detail::plan_cmp(a, b) < 0;
}

}  // namespace reoptdb
