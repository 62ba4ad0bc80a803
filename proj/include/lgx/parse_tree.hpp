#pragma once

#include <algorithm>
#include <cctype>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lgx {

struct TreeFormatError : std::runtime_error {
    explicit TreeFormatError(const std::string& why)
        : std::runtime_error("parse tree format error: " + why) {}
};

/// Lowercase + whitespace-split. The instruction grammar has no punctuation.
inline std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) out.push_back(cur), cur.clear();
        } else {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

/// Constituent parse tree. Leaves are preterminals holding exactly one
/// token; internal nodes own an ordered, span-contiguous child list.
struct ParseTree {
    std::string label;
    int span_begin = 0;  // token index range [begin, end)
    int span_end = 0;
    std::vector<std::string> tokens;  // surface words covered by this node
    std::vector<ParseTree> children;

    bool is_leaf() const { return children.empty(); }

    std::string text() const {
        std::string s;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (i) s += ' ';
            s += tokens[i];
        }
        return s;
    }

    /// Tokens directly under this node (its preterminal children), i.e. the
    /// phrase's own words excluding embedded phrases.
    std::vector<std::string> own_words() const {
        if (is_leaf()) return tokens;
        std::vector<std::string> out;
        for (const auto& c : children)
            if (c.is_leaf()) out.insert(out.end(), c.tokens.begin(), c.tokens.end());
        return out;
    }

    bool operator==(const ParseTree& o) const {
        return label == o.label && tokens == o.tokens && children == o.children;
    }
};

/// Single-line bracketed form: (VP (VB retrieve) (NP (DT the) (NN ball))).
inline std::string to_sexpr(const ParseTree& t) {
    std::string s = "(" + t.label;
    if (t.is_leaf()) {
        for (const auto& tok : t.tokens) s += " " + tok;
    } else {
        for (const auto& c : t.children) s += " " + to_sexpr(c);
    }
    return s + ")";
}

namespace detail {

inline ParseTree parse_sexpr_at(const std::string& s, std::size_t& i, int& next_token) {
    auto skip_ws = [&] { while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i; };
    skip_ws();
    if (i >= s.size() || s[i] != '(') throw TreeFormatError("expected '('");
    ++i;
    ParseTree node;
    skip_ws();
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '(' && s[i] != ')')
        node.label.push_back(s[i++]);
    if (node.label.empty()) throw TreeFormatError("missing node label");
    skip_ws();
    node.span_begin = next_token;
    while (i < s.size() && s[i] != ')') {
        if (s[i] == '(') {
            node.children.push_back(parse_sexpr_at(s, i, next_token));
            node.tokens.insert(node.tokens.end(), node.children.back().tokens.begin(),
                               node.children.back().tokens.end());
        } else {
            std::string tok;
            while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '(' && s[i] != ')')
                tok.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(s[i++]))));
            node.tokens.push_back(tok);
            ++next_token;
        }
        skip_ws();
    }
    if (i >= s.size()) throw TreeFormatError("unbalanced parentheses");
    ++i;  // ')'
    node.span_end = next_token;
    if (node.tokens.empty()) throw TreeFormatError("empty constituent '" + node.label + "'");
    if (!node.children.empty())
        for (const auto& c : node.children)
            if (!c.is_leaf() && c.children.empty()) throw TreeFormatError("childless phrase");
    return node;
}

}  // namespace detail

inline ParseTree from_sexpr(const std::string& s) {
    std::size_t i = 0;
    int next_token = 0;
    ParseTree t = detail::parse_sexpr_at(s, i, next_token);
    while (i < s.size()) {
        if (!std::isspace(static_cast<unsigned char>(s[i]))) throw TreeFormatError("trailing content");
        ++i;
    }
    return t;
}

/// Structural invariants: ordered disjoint child spans covering the parent,
/// non-empty leaves, mixed leaf/phrase children allowed.
inline bool check_tree_invariants(const ParseTree& t, std::string* why = nullptr) {
    auto fail = [&](const std::string& m) {
        if (why) *why = m;
        return false;
    };
    if (t.tokens.empty()) return fail("node covers no tokens");
    if (t.is_leaf()) return true;
    int pos = t.span_begin;
    std::size_t tok = 0;
    for (const auto& c : t.children) {
        if (c.span_begin != pos) return fail("child spans not contiguous");
        if (c.span_end <= c.span_begin) return fail("empty child span");
        pos = c.span_end;
        for (const auto& w : c.tokens) {
            if (tok >= t.tokens.size() || t.tokens[tok] != w) return fail("child tokens disagree with parent");
            ++tok;
        }
        if (!check_tree_invariants(c, why)) return false;
    }
    if (pos != t.span_end || tok != t.tokens.size()) return fail("children do not cover parent span");
    return true;
}

/// Preorder enumeration of phrase nodes (non-leaves). Index 0 is the root.
inline void collect_phrases(const ParseTree& t, std::vector<const ParseTree*>& out) {
    if (t.is_leaf()) return;
    out.push_back(&t);
    for (const auto& c : t.children) collect_phrases(c, out);
}

inline std::vector<const ParseTree*> phrase_nodes(const ParseTree& t) {
    std::vector<const ParseTree*> out;
    collect_phrases(t, out);
    return out;
}

}  // namespace lgx
