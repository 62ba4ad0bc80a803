#pragma once

#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "lgx/parse_tree.hpp"
#include "lgx/vocabulary.hpp"

namespace lgx {

enum class SymbolKind {
    Object,             // a map node, candidate referent of a noun phrase
    SpatialRelation,    // node level (rel, landmark node) or type level (rel, landmark type)
    Behavior,           // (behavior type, goal node) at the clause root
    Detector,           // a perception classifier to enable
    TypeAssertion,      // "somewhere there is a <type>"
    RelationAssertion,  // "<fig type> stands in <rel> to <lm type>"
};

inline const char* kind_name(SymbolKind k) {
    switch (k) {
        case SymbolKind::Object: return "obj";
        case SymbolKind::SpatialRelation: return "rel";
        case SymbolKind::Behavior: return "beh";
        case SymbolKind::Detector: return "det";
        case SymbolKind::TypeAssertion: return "type";
        case SymbolKind::RelationAssertion: return "relassert";
    }
    return "?";
}

/// Candidate grounding for one phrase. A flat payload; which fields are
/// meaningful depends on the kind. Node references never participate in
/// features, only payload values do, so learned weights transfer across
/// worlds.
struct GroundingSymbol {
    SymbolKind kind = SymbolKind::Object;
    std::string type;      // Object / Detector / TypeAssertion
    std::string color;     // Object only, may be empty
    std::string rel;       // SpatialRelation / RelationAssertion
    std::string fig_type;  // RelationAssertion figure
    std::string lm_type;   // type-level SpatialRelation / RelationAssertion landmark
    std::string btype;     // Behavior
    int node = -1;         // Object node / relation landmark node / behavior goal node

    /// Feature payload as field/value pairs, in a fixed order.
    std::vector<std::pair<std::string, std::string>> field_values() const {
        std::vector<std::pair<std::string, std::string>> out;
        switch (kind) {
            case SymbolKind::Object:
                out.emplace_back("type", type);
                if (!color.empty()) out.emplace_back("color", color);
                break;
            case SymbolKind::SpatialRelation:
                out.emplace_back("rel", rel);
                if (!lm_type.empty()) out.emplace_back("lmt", lm_type);
                break;
            case SymbolKind::Behavior:
                out.emplace_back("btype", btype);
                break;
            case SymbolKind::Detector:
                out.emplace_back("det", type);
                break;
            case SymbolKind::TypeAssertion:
                out.emplace_back("ann", type);
                break;
            case SymbolKind::RelationAssertion:
                out.emplace_back("rel", rel);
                out.emplace_back("fig", fig_type);
                out.emplace_back("lmt", lm_type);
                break;
        }
        return out;
    }

    std::string to_string() const {
        std::string s = kind_name(kind);
        s += '(';
        bool first = true;
        auto put = [&](const std::string& v) {
            if (v.empty()) return;
            if (!first) s += ',';
            s += v;
            first = false;
        };
        put(type);
        put(color);
        put(rel);
        put(fig_type);
        put(lm_type);
        put(btype);
        if (node >= 0) put("@" + std::to_string(node));
        return s + ")";
    }

    auto tie() const { return std::tie(kind, type, color, rel, fig_type, lm_type, btype, node); }
    bool operator==(const GroundingSymbol& o) const { return tie() == o.tie(); }
    bool operator<(const GroundingSymbol& o) const { return tie() < o.tie(); }
};

inline GroundingSymbol make_object_symbol(const std::string& type, const std::string& color, int node) {
    GroundingSymbol s;
    s.kind = SymbolKind::Object;
    s.type = type;
    s.color = color;
    s.node = node;
    return s;
}

inline GroundingSymbol make_relation_symbol(const std::string& rel, int landmark_node) {
    GroundingSymbol s;
    s.kind = SymbolKind::SpatialRelation;
    s.rel = rel;
    s.node = landmark_node;
    return s;
}

inline GroundingSymbol make_type_relation_symbol(const std::string& rel, const std::string& lm_type) {
    GroundingSymbol s;
    s.kind = SymbolKind::SpatialRelation;
    s.rel = rel;
    s.lm_type = lm_type;
    return s;
}

inline GroundingSymbol make_behavior_symbol(const std::string& btype, int goal_node) {
    GroundingSymbol s;
    s.kind = SymbolKind::Behavior;
    s.btype = btype;
    s.node = goal_node;
    return s;
}

inline GroundingSymbol make_detector_symbol(const std::string& name) {
    GroundingSymbol s;
    s.kind = SymbolKind::Detector;
    s.type = name;
    return s;
}

inline GroundingSymbol make_type_assertion(const std::string& type) {
    GroundingSymbol s;
    s.kind = SymbolKind::TypeAssertion;
    s.type = type;
    return s;
}

inline GroundingSymbol make_relation_assertion(const std::string& rel, const std::string& fig,
                                               const std::string& lm) {
    GroundingSymbol s;
    s.kind = SymbolKind::RelationAssertion;
    s.rel = rel;
    s.fig_type = fig;
    s.lm_type = lm;
    return s;
}

/// One TypeAssertion per vocabulary type.
inline std::vector<GroundingSymbol> type_assertion_space(const Vocabulary& vocab) {
    std::vector<GroundingSymbol> out;
    for (const auto& t : vocab.types) out.push_back(make_type_assertion(t.name));
    return out;
}

/// RelationAssertions over every relation and ordered pair of distinct types.
inline std::vector<GroundingSymbol> relation_assertion_space(const Vocabulary& vocab) {
    std::vector<GroundingSymbol> out;
    for (const auto& r : vocab.relations)
        for (const auto& fig : vocab.types)
            for (const auto& lm : vocab.types)
                if (fig.name != lm.name)
                    out.push_back(make_relation_assertion(r.name, fig.name, lm.name));
    return out;
}

/// Noun-phrase annotation space: type assertions plus relation assertions.
inline std::vector<GroundingSymbol> annotation_space(const Vocabulary& vocab) {
    std::vector<GroundingSymbol> out = type_assertion_space(vocab);
    auto rel = relation_assertion_space(vocab);
    out.insert(out.end(), rel.begin(), rel.end());
    return out;
}

/// Prepositional-phrase space for the annotation head: relation x landmark type.
inline std::vector<GroundingSymbol> type_relation_space(const Vocabulary& vocab) {
    std::vector<GroundingSymbol> out;
    for (const auto& r : vocab.relations)
        for (const auto& lm : vocab.types) out.push_back(make_type_relation_symbol(r.name, lm.name));
    return out;
}

inline std::vector<GroundingSymbol> detector_space(const std::vector<std::string>& detector_names) {
    std::vector<GroundingSymbol> out;
    for (const auto& n : detector_names) out.push_back(make_detector_symbol(n));
    return out;
}

/// Words a phrase contributes to its own factors: every leaf not inside an
/// embedded noun or prepositional phrase. Compounds under NML count; "the
/// red crackers box inside ..." yields the, red, crackers, box.
inline void collect_feature_words(const ParseTree& t, std::vector<std::string>& out) {
    for (const auto& c : t.children) {
        if (c.is_leaf()) {
            out.insert(out.end(), c.tokens.begin(), c.tokens.end());
        } else if (c.label != "NP" && c.label != "PP") {
            collect_feature_words(c, out);
        }
    }
}

inline std::vector<std::string> phrase_feature_words(const ParseTree& t) {
    std::vector<std::string> out;
    if (t.is_leaf()) return t.tokens;
    collect_feature_words(t, out);
    return out;
}

}  // namespace lgx
