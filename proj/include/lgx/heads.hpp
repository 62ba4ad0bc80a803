#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "lgx/corpus.hpp"
#include "lgx/dcg.hpp"
#include "lgx/dcg_train.hpp"
#include "lgx/semantic_graph.hpp"
#include "lgx/symbols.hpp"

namespace lgx {

/// Shared feature templates: a kind bias, the symbol payload, and every
/// phrase word conjoined with both.
inline FeatureVec static_features(const GroundingSymbol& s, const std::vector<std::string>& words) {
    FeatureVec f;
    std::string k = kind_name(s.kind);
    f.push_back("b|" + k);
    auto fv = s.field_values();
    for (const auto& [field, value] : fv) f.push_back("g|" + field + "|" + value);
    for (const auto& w : words) {
        f.push_back("w|" + w + "|k|" + k);
        for (const auto& [field, value] : fv) f.push_back("w|" + w + "|" + field + "|" + value);
    }
    return f;
}

/// Factor-graph skeleton mirroring the clause structure: one node per VP,
/// NP and PP, preorder, without symbols yet.
struct Skeleton {
    DcgGraph graph;
    std::vector<const ParseTree*> phrase;  // parallel to graph.nodes
};

namespace detail {

inline void build_skeleton_rec(const ParseTree& t, int parent, Skeleton& sk) {
    int idx = parent;
    if (t.label == "VP" || t.label == "NP" || t.label == "PP") {
        idx = static_cast<int>(sk.graph.nodes.size());
        DcgNode nd;
        nd.parent = parent;
        nd.label = t.label;
        nd.words = phrase_feature_words(t);
        sk.graph.nodes.push_back(std::move(nd));
        sk.phrase.push_back(&t);
        if (parent >= 0) sk.graph.nodes[static_cast<std::size_t>(parent)].children.push_back(idx);
    }
    for (const auto& c : t.children)
        if (!c.is_leaf()) build_skeleton_rec(c, idx, sk);
}

inline void attach(DcgNode& nd, GroundingSymbol s) {
    nd.static_feats.push_back(static_features(s, nd.words));
    nd.symbols.push_back(std::move(s));
}

inline bool has_child_label(const DcgGraph& g, const DcgNode& nd, const std::string& label) {
    for (int c : nd.children)
        if (g.nodes[static_cast<std::size_t>(c)].label == label) return true;
    return false;
}

}  // namespace detail

inline Skeleton build_skeleton(const ParseTree& root) {
    Skeleton sk;
    detail::build_skeleton_rec(root, -1, sk);
    sk.graph.check();
    return sk;
}

// ---------------------------------------------------------------------------
// detector selection head

class DetectorHead {
public:
    std::vector<std::string> detector_names;
    Weights weights;
    int beam_width = 8;

    Skeleton build(const ParseTree& tree) const {
        Skeleton sk = build_skeleton(tree);
        for (auto& nd : sk.graph.nodes) {
            if (nd.label != "NP") continue;
            for (const auto& n : detector_names) detail::attach(nd, make_detector_symbol(n));
        }
        return sk;
    }

    TrainExample make_example(const ParseTree& tree, const Vocabulary& vocab) const {
        Skeleton sk = build(tree);
        TrainExample ex;
        ex.gold.resize(sk.graph.nodes.size());
        for (std::size_t i = 0; i < sk.graph.nodes.size(); ++i) {
            const DcgNode& nd = sk.graph.nodes[i];
            ex.gold[i].assign(nd.symbols.size(), 0);
            if (nd.label != "NP") continue;
            auto r = read_np(*sk.phrase[i], vocab);
            if (!r) throw std::runtime_error("unreadable noun phrase: " + sk.phrase[i]->text());
            for (std::size_t j = 0; j < nd.symbols.size(); ++j)
                if (nd.symbols[j].type == r->type) ex.gold[i][j] = 1;
        }
        ex.graph = std::move(sk.graph);
        return ex;
    }

    std::vector<TrainExample> make_examples(const std::vector<ParseTree>& trees,
                                            const Vocabulary& vocab) const {
        std::vector<TrainExample> out;
        out.reserve(trees.size());
        for (const auto& t : trees) out.push_back(make_example(t, vocab));
        return out;
    }

    /// P*: the classifiers marked true anywhere in the MAP assignment, in
    /// registry order.
    std::vector<std::string> select(const ParseTree& tree) const {
        Skeleton sk = build(tree);
        static const FeatureModel no_dyn;
        DcgResult res = dcg_infer(sk.graph, no_dyn, weights, beam_width);
        std::vector<std::string> out;
        for (const auto& name : detector_names) {
            bool on = false;
            for (std::size_t i = 0; i < sk.graph.nodes.size() && !on; ++i)
                for (std::size_t j = 0; j < sk.graph.nodes[i].symbols.size() && !on; ++j)
                    on = res.map_assign[i][j] && sk.graph.nodes[i].symbols[j].type == name;
            if (on) out.push_back(name);
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// map annotation head

struct TypeAnnotation {
    std::string type;
    double score = 0.0;
};

struct RelationAnnotation {
    std::string rel, fig, lm;
    double score = 0.0;
};

struct AnnotationSet {
    std::vector<TypeAnnotation> types;
    std::vector<RelationAnnotation> relations;

    bool empty() const { return types.empty() && relations.empty(); }
};

class AnnotationFeatures : public FeatureModel {
public:
    void dynamic_features(const DcgGraph& g, int node, int sym, const ChildAssign& ca,
                          FeatureVec& out) const override {
        const GroundingSymbol& s =
            g.nodes[static_cast<std::size_t>(node)].symbols[static_cast<std::size_t>(sym)];
        if (s.kind == SymbolKind::SpatialRelation) {
            bool any = false, match = false;
            for_each_true_child_symbol(g, node, ca, [&](int, const GroundingSymbol& cs) {
                if (cs.kind != SymbolKind::TypeAssertion) return;
                any = true;
                match = match || cs.type == s.lm_type;
            });
            if (match) out.push_back("cm|rel-lmt");
            else if (any) out.push_back("cm|rel-lmt|miss");
        } else if (s.kind == SymbolKind::RelationAssertion) {
            bool any = false, match = false;
            for_each_true_child_symbol(g, node, ca, [&](int, const GroundingSymbol& cs) {
                if (cs.kind != SymbolKind::SpatialRelation) return;
                any = true;
                match = match || (cs.rel == s.rel && cs.lm_type == s.lm_type);
            });
            if (match) out.push_back("cm|ann-rel");
            else if (any) out.push_back("cm|ann-rel|miss");
        }
    }
};

class AnnotationHead {
public:
    Vocabulary vocab;
    Weights weights;
    int beam_width = 8;
    double min_score = 0.5;

    Skeleton build(const ParseTree& tree) const {
        Skeleton sk = build_skeleton(tree);
        for (auto& nd : sk.graph.nodes) {
            if (nd.label == "NP") {
                for (auto& s : type_assertion_space(vocab)) detail::attach(nd, std::move(s));
                if (detail::has_child_label(sk.graph, nd, "PP"))
                    for (auto& s : relation_assertion_space(vocab)) detail::attach(nd, std::move(s));
            } else if (nd.label == "PP") {
                for (auto& s : type_relation_space(vocab)) detail::attach(nd, std::move(s));
            }
        }
        return sk;
    }

    TrainExample make_example(const ParseTree& tree) const {
        Skeleton sk = build(tree);
        TrainExample ex;
        ex.features = std::make_shared<AnnotationFeatures>();
        ex.gold.resize(sk.graph.nodes.size());
        for (std::size_t i = 0; i < sk.graph.nodes.size(); ++i) {
            const DcgNode& nd = sk.graph.nodes[i];
            ex.gold[i].assign(nd.symbols.size(), 0);
            if (nd.label == "NP") {
                auto r = read_np(*sk.phrase[i], vocab);
                if (!r) throw std::runtime_error("unreadable noun phrase: " + sk.phrase[i]->text());
                std::string rel, lm;
                if (const ParseTree* pp = find_child(*sk.phrase[i], "PP")) {
                    rel = read_pp_relation(*pp, vocab).value_or("");
                    if (auto lr = read_np(*find_child(*pp, "NP"), vocab)) lm = lr->type;
                }
                for (std::size_t j = 0; j < nd.symbols.size(); ++j) {
                    const GroundingSymbol& s = nd.symbols[j];
                    if (s.kind == SymbolKind::TypeAssertion && s.type == r->type) ex.gold[i][j] = 1;
                    if (s.kind == SymbolKind::RelationAssertion && s.rel == rel &&
                        s.fig_type == r->type && s.lm_type == lm)
                        ex.gold[i][j] = 1;
                }
            } else if (nd.label == "PP") {
                auto rel = read_pp_relation(*sk.phrase[i], vocab);
                auto lr = read_np(*find_child(*sk.phrase[i], "NP"), vocab);
                if (!rel || !lr)
                    throw std::runtime_error("unreadable modifier: " + sk.phrase[i]->text());
                for (std::size_t j = 0; j < nd.symbols.size(); ++j)
                    if (nd.symbols[j].rel == *rel && nd.symbols[j].lm_type == lr->type)
                        ex.gold[i][j] = 1;
            }
        }
        ex.graph = std::move(sk.graph);
        return ex;
    }

    std::vector<TrainExample> make_examples(const std::vector<ParseTree>& trees) const {
        std::vector<TrainExample> out;
        out.reserve(trees.size());
        for (const auto& t : trees) out.push_back(make_example(t));
        return out;
    }

    /// Noun-phrase assertions scoring at or above `min_score`, scores being
    /// beam-weighted marginals, deduplicated across phrases by keeping the
    /// highest score.
    AnnotationSet infer(const ParseTree& tree) const {
        Skeleton sk = build(tree);
        AnnotationFeatures fm;
        DcgResult res = dcg_infer(sk.graph, fm, weights, beam_width);
        std::map<std::string, double> type_scores;
        std::map<std::tuple<std::string, std::string, std::string>, double> rel_scores;
        for (std::size_t i = 0; i < sk.graph.nodes.size(); ++i) {
            const DcgNode& nd = sk.graph.nodes[i];
            if (nd.label != "NP") continue;
            for (std::size_t j = 0; j < nd.symbols.size(); ++j) {
                double p = symbol_marginal(sk.graph, fm, weights, res.beams, static_cast<int>(i),
                                           static_cast<int>(j));
                if (p < min_score) continue;
                const GroundingSymbol& s = nd.symbols[j];
                if (s.kind == SymbolKind::TypeAssertion) {
                    auto& v = type_scores[s.type];
                    v = std::max(v, p);
                } else if (s.kind == SymbolKind::RelationAssertion) {
                    auto& v = rel_scores[{s.rel, s.fig_type, s.lm_type}];
                    v = std::max(v, p);
                }
            }
        }
        AnnotationSet out;
        for (const auto& [k, v] : type_scores) out.types.push_back({k, v});
        for (const auto& [k, v] : rel_scores)
            out.relations.push_back({std::get<0>(k), std::get<1>(k), std::get<2>(k), v});
        return out;
    }
};

// ---------------------------------------------------------------------------
// behavior head

struct BehaviorCandidate {
    std::string btype;
    int goal = -1;
    double likelihood = 0.0;
};

class BehaviorFeatures : public FeatureModel {
public:
    BehaviorFeatures(const SemanticGraph& world, const Pose2& viewer)
        : world_(&world), viewer_(viewer) {}

    static std::shared_ptr<BehaviorFeatures> owning(SemanticGraph world, const Pose2& viewer) {
        auto held = std::make_shared<const SemanticGraph>(std::move(world));
        auto fm = std::make_shared<BehaviorFeatures>(*held, viewer);
        fm->owned_ = std::move(held);
        return fm;
    }

    const SemanticGraph& world() const { return *world_; }
    const Pose2& viewer() const { return viewer_; }

    void dynamic_features(const DcgGraph& g, int node, int sym, const ChildAssign& ca,
                          FeatureVec& out) const override {
        const GroundingSymbol& s =
            g.nodes[static_cast<std::size_t>(node)].symbols[static_cast<std::size_t>(sym)];
        bool any = false, match = false;
        if (s.kind == SymbolKind::Object) {
            for_each_true_child_symbol(g, node, ca, [&](int, const GroundingSymbol& cs) {
                if (cs.kind != SymbolKind::SpatialRelation || cs.node < 0) return;
                any = true;
                match = match || rel_holds(*world_, cs.rel, s.node, cs.node, viewer_);
            });
            if (match) out.push_back("cm|obj-rel");
            else if (any) out.push_back("cm|obj-rel|miss");
        } else if (s.kind == SymbolKind::SpatialRelation) {
            for_each_true_child_symbol(g, node, ca, [&](int, const GroundingSymbol& cs) {
                if (cs.kind != SymbolKind::Object) return;
                any = true;
                match = match || cs.node == s.node;
            });
            if (match) out.push_back("cm|rel-lm");
            else if (any) out.push_back("cm|rel-lm|miss");
        } else if (s.kind == SymbolKind::Behavior) {
            for_each_true_child_symbol(g, node, ca, [&](int, const GroundingSymbol& cs) {
                if (cs.kind != SymbolKind::Object) return;
                any = true;
                match = match || cs.node == s.node;
            });
            if (match) out.push_back("cm|beh-goal");
            else if (any) out.push_back("cm|beh-goal|miss");
        }
    }

private:
    std::shared_ptr<const SemanticGraph> owned_;
    const SemanticGraph* world_;
    Pose2 viewer_;
};

/// Language-only training world: referents laid out to satisfy the stated
/// relation as seen from a viewer at the origin, plus distractors so the
/// trainer sees false correspondences.
struct SynthWorld {
    SemanticGraph graph;
    Pose2 viewer;
    int figure_node = -1;
    int landmark_node = -1;
};

inline SynthWorld synth_world(const ParseTree& tree, const Vocabulary& vocab) {
    InstructionMeaning m = read_meaning(tree, vocab);
    SynthWorld sw;
    auto extent = [&](const std::string& type) {
        int i = vocab.type_index(type);
        return i < 0 ? 0.15 : vocab.types[static_cast<std::size_t>(i)].footprint;
    };
    Vec2 fig_pos{3.0, 0.0};
    if (m.has_relation()) {
        Vec2 lm_pos{3.0, 0.0};
        if (m.relation == "inside") fig_pos = {3.05, 0.0};
        else if (m.relation == "near") fig_pos = {4.0, 0.0};
        else if (m.relation == "left_of") fig_pos = {3.0, 1.0};
        else fig_pos = {3.0, -1.0};
        sw.figure_node = sw.graph.add_object(m.figure.type, m.figure.color, fig_pos,
                                             NodeState::Confirmed, 0, extent(m.figure.type));
        sw.landmark_node = sw.graph.add_object(m.landmark.type, m.landmark.color, lm_pos,
                                               NodeState::Confirmed, 0, extent(m.landmark.type));
        if (m.relation == "inside") sw.graph.node(sw.figure_node).container = sw.landmark_node;
    } else {
        sw.figure_node = sw.graph.add_object(m.figure.type, m.figure.color, fig_pos,
                                             NodeState::Confirmed, 0, extent(m.figure.type));
    }
    int placed = 0;
    for (const auto& t : vocab.types) {
        if (placed == 2) break;
        if (t.name == m.figure.type || (m.has_relation() && t.name == m.landmark.type)) continue;
        sw.graph.add_object(t.name, "", {-3.0, placed == 0 ? 2.0 : -2.0}, NodeState::Confirmed, 0,
                            t.footprint);
        ++placed;
    }
    if (!m.figure.color.empty())
        for (const auto& c : vocab.colors)
            if (c != m.figure.color) {
                sw.graph.add_object(m.figure.type, c, {-3.0, 0.0}, NodeState::Confirmed, 0,
                                    extent(m.figure.type));
                break;
            }
    return sw;
}

class BehaviorHead {
public:
    Vocabulary vocab;
    Weights weights;
    int beam_width = 8;

    Skeleton build(const ParseTree& tree, const SemanticGraph& world) const {
        Skeleton sk = build_skeleton(tree);
        std::vector<int> cand;
        for (int id : world.live_objects())
            if (!world.node(id).carried) cand.push_back(id);
        for (auto& nd : sk.graph.nodes) {
            if (nd.label == "NP") {
                for (int id : cand)
                    detail::attach(nd, make_object_symbol(world.node(id).type,
                                                          world.node(id).color, id));
            } else if (nd.label == "PP") {
                for (const auto& r : vocab.relations)
                    for (int id : cand) detail::attach(nd, make_relation_symbol(r.name, id));
            } else {
                for (const auto& v : vocab.verbs)
                    for (int id : cand) detail::attach(nd, make_behavior_symbol(v.name, id));
            }
        }
        return sk;
    }

    TrainExample make_example(const ParseTree& tree) const {
        SynthWorld sw = synth_world(tree, vocab);
        InstructionMeaning m = read_meaning(tree, vocab);
        Skeleton sk = build(tree, sw.graph);
        TrainExample ex;
        ex.gold.resize(sk.graph.nodes.size());
        for (std::size_t i = 0; i < sk.graph.nodes.size(); ++i) {
            const DcgNode& nd = sk.graph.nodes[i];
            ex.gold[i].assign(nd.symbols.size(), 0);
            bool figure_np =
                nd.parent >= 0 &&
                sk.graph.nodes[static_cast<std::size_t>(nd.parent)].label == "VP";
            for (std::size_t j = 0; j < nd.symbols.size(); ++j) {
                const GroundingSymbol& s = nd.symbols[j];
                if (nd.label == "NP") {
                    ex.gold[i][j] = s.node == (figure_np ? sw.figure_node : sw.landmark_node);
                } else if (nd.label == "PP") {
                    ex.gold[i][j] = s.rel == m.relation && s.node == sw.landmark_node;
                } else {
                    ex.gold[i][j] = s.btype == m.verb && s.node == sw.figure_node;
                }
            }
        }
        ex.features = BehaviorFeatures::owning(sw.graph, sw.viewer);
        ex.graph = std::move(sk.graph);
        return ex;
    }

    std::vector<TrainExample> make_examples(const std::vector<ParseTree>& trees) const {
        std::vector<TrainExample> out;
        out.reserve(trees.size());
        for (const auto& t : trees) out.push_back(make_example(t));
        return out;
    }

    /// Every root behavior symbol with its beam-weighted likelihood, in
    /// candidate order.
    std::vector<BehaviorCandidate> infer(const ParseTree& tree, const SemanticGraph& world,
                                         const Pose2& viewer) const {
        Skeleton sk = build(tree, world);
        BehaviorFeatures fm(world, viewer);
        DcgResult res = dcg_infer(sk.graph, fm, weights, beam_width);
        std::vector<BehaviorCandidate> out;
        const DcgNode& root = sk.graph.nodes[0];
        for (std::size_t j = 0; j < root.symbols.size(); ++j) {
            if (root.symbols[j].kind != SymbolKind::Behavior) continue;
            BehaviorCandidate c;
            c.btype = root.symbols[j].btype;
            c.goal = root.symbols[j].node;
            c.likelihood = symbol_marginal(sk.graph, fm, weights, res.beams, 0,
                                           static_cast<int>(j));
            out.push_back(c);
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// held-out evaluation

struct LooResult {
    int total = 0;
    int correct = 0;
    double accuracy() const { return total ? static_cast<double>(correct) / total : 0.0; }
};

/// Leave-one-out behavior grounding: the argmax candidate must name the gold
/// verb and the gold referent node in the held-out instruction's world.
inline LooResult loo_behavior(const std::vector<ParseTree>& trees, const Vocabulary& vocab,
                              const TrainOptions& opt) {
    BehaviorHead head;
    head.vocab = vocab;
    std::vector<TrainExample> all = head.make_examples(trees);
    LooResult res;
    for (std::size_t i = 0; i < trees.size(); ++i) {
        std::vector<const TrainExample*> fold;
        for (std::size_t j = 0; j < trees.size(); ++j)
            if (j != i) fold.push_back(&all[j]);
        BehaviorHead h = head;
        train_weights(fold, h.weights, opt);
        SynthWorld sw = synth_world(trees[i], vocab);
        InstructionMeaning m = read_meaning(trees[i], vocab);
        auto cands = h.infer(trees[i], sw.graph, sw.viewer);
        const BehaviorCandidate* best = nullptr;
        for (const auto& c : cands)
            if (!best || c.likelihood > best->likelihood) best = &c;
        ++res.total;
        if (best && best->btype == m.verb && best->goal == sw.figure_node) ++res.correct;
    }
    return res;
}

/// Leave-one-out detector selection: P* must equal the exact set of types
/// named by the held-out instruction.
inline LooResult loo_detector(const std::vector<ParseTree>& trees, const Vocabulary& vocab,
                              const std::vector<std::string>& detector_names,
                              const TrainOptions& opt) {
    DetectorHead head;
    head.detector_names = detector_names;
    std::vector<TrainExample> all = head.make_examples(trees, vocab);
    LooResult res;
    for (std::size_t i = 0; i < trees.size(); ++i) {
        std::vector<const TrainExample*> fold;
        for (std::size_t j = 0; j < trees.size(); ++j)
            if (j != i) fold.push_back(&all[j]);
        DetectorHead h = head;
        train_weights(fold, h.weights, opt);
        InstructionMeaning m = read_meaning(trees[i], vocab);
        std::vector<std::string> want;
        for (const auto& n : detector_names)
            if (n == m.figure.type || (m.has_relation() && n == m.landmark.type))
                want.push_back(n);
        ++res.total;
        if (h.select(trees[i]) == want) ++res.correct;
    }
    return res;
}

}  // namespace lgx
