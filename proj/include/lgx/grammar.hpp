#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "lgx/parse_tree.hpp"

namespace lgx {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnknownToken : ParseError {
    std::string word;
    explicit UnknownToken(const std::string& w) : ParseError("unknown token '" + w + "'"), word(w) {}
};

struct NoParse : ParseError {
    explicit NoParse(const std::string& text) : ParseError("no parse for '" + text + "'") {}
};

struct AmbiguousParse : ParseError {
    explicit AmbiguousParse(const std::string& text)
        : ParseError("multiple parses for '" + text + "'") {}
};

struct Rule {
    std::string lhs;
    std::vector<std::string> rhs;  // phrase symbols and/or preterminal tags
};

/// Context-free grammar with a word-level lexicon and an exhaustive CKY
/// recognizer. Rules may have 2..4 symbols on the right; they are binarized
/// internally and the intermediates spliced back out of returned trees.
class Grammar {
public:
    std::string root = "VP";

    void add_word(const std::string& tag, const std::string& word) {
        tags_by_word_[word].insert(tag);
    }

    void add_rule(const std::string& lhs, std::vector<std::string> rhs) {
        if (rhs.size() < 2 || rhs.size() > 4)
            throw std::invalid_argument("rule arity must be 2..4");
        rules_.push_back(Rule{lhs, std::move(rhs)});
        binarized_.clear();
    }

    bool knows_word(const std::string& word) const { return tags_by_word_.count(word) > 0; }

    const std::vector<Rule>& rules() const { return rules_; }

    /// Number of distinct parses of the token sequence (0, 1, or 2 meaning
    /// "more than one"; counting saturates, only uniqueness matters here).
    std::size_t count_parses(const std::vector<std::string>& tokens) const {
        Chart chart = run_cky(tokens);
        auto it = chart[cell(0, tokens.size())].find(root);
        if (it == chart[cell(0, tokens.size())].end()) return 0;
        return count_in(chart, 0, tokens.size(), root);
    }

    ParseTree parse(const std::vector<std::string>& tokens) const {
        if (tokens.empty()) throw NoParse("");
        for (const auto& w : tokens)
            if (!knows_word(w)) throw UnknownToken(w);
        Chart chart = run_cky(tokens);
        const auto& top = chart[cell(0, tokens.size())];
        auto it = top.find(root);
        if (it == top.end()) throw NoParse(join(tokens));
        if (count_in(chart, 0, tokens.size(), root) > 1) throw AmbiguousParse(join(tokens));
        ParseTree t = build(chart, tokens, 0, static_cast<int>(tokens.size()), root);
        flatten(t);
        index_spans(t, 0);
        return t;
    }

    ParseTree parse(const std::string& text) const { return parse(tokenize(text)); }

private:
    struct Edge {
        std::string left, right;  // right empty for a lexical edge
        int split = 0;
    };
    using Cell = std::map<std::string, std::vector<Edge>>;
    using Chart = std::vector<Cell>;

    struct BinRule {
        std::string lhs, r1, r2;
    };

    std::map<std::string, std::set<std::string>> tags_by_word_;
    std::vector<Rule> rules_;
    mutable std::vector<BinRule> binarized_;
    mutable std::size_t n_ = 0;

    static std::string join(const std::vector<std::string>& toks) {
        std::string s;
        for (std::size_t i = 0; i < toks.size(); ++i) {
            if (i) s += ' ';
            s += toks[i];
        }
        return s;
    }

    std::size_t cell(std::size_t i, std::size_t j) const { return i * (n_ + 1) + j; }

    void binarize() const {
        binarized_.clear();
        int next = 0;
        for (const auto& r : rules_) {
            if (r.rhs.size() == 2) {
                binarized_.push_back({r.lhs, r.rhs[0], r.rhs[1]});
                continue;
            }
            std::string prev = r.lhs;
            for (std::size_t k = 0; k + 2 < r.rhs.size(); ++k) {
                std::string mid = "@" + std::to_string(next++);
                binarized_.push_back({prev, r.rhs[k], mid});
                prev = mid;
            }
            binarized_.push_back({prev, r.rhs[r.rhs.size() - 2], r.rhs.back()});
        }
    }

    Chart run_cky(const std::vector<std::string>& tokens) const {
        if (binarized_.empty()) binarize();
        n_ = tokens.size();
        Chart chart(cell(n_, n_) + 1);
        for (std::size_t i = 0; i < n_; ++i) {
            auto it = tags_by_word_.find(tokens[i]);
            if (it == tags_by_word_.end()) throw UnknownToken(tokens[i]);
            for (const auto& tag : it->second) chart[cell(i, i + 1)][tag].push_back({tokens[i], "", -1});
        }
        for (std::size_t len = 2; len <= n_; ++len)
            for (std::size_t i = 0; i + len <= n_; ++i)
                for (std::size_t k = i + 1; k < i + len; ++k) {
                    const Cell& lc = chart[cell(i, k)];
                    const Cell& rc = chart[cell(k, i + len)];
                    if (lc.empty() || rc.empty()) continue;
                    for (const auto& br : binarized_)
                        if (lc.count(br.r1) && rc.count(br.r2))
                            chart[cell(i, i + len)][br.lhs].push_back(
                                {br.r1, br.r2, static_cast<int>(k)});
                }
        return chart;
    }

    std::size_t count_in(const Chart& chart, std::size_t i, std::size_t j,
                         const std::string& sym) const {
        auto it = chart[cell(i, j)].find(sym);
        if (it == chart[cell(i, j)].end()) return 0;
        std::size_t total = 0;
        for (const Edge& e : it->second) {
            if (e.split < 0) {
                ++total;
            } else {
                std::size_t l = count_in(chart, i, static_cast<std::size_t>(e.split), e.left);
                std::size_t r = count_in(chart, static_cast<std::size_t>(e.split), j, e.right);
                total += l * r;
            }
            if (total > 1) return 2;
        }
        return total;
    }

    ParseTree build(const Chart& chart, const std::vector<std::string>& tokens, int i, int j,
                    const std::string& sym) const {
        const Edge& e = chart[cell(i, j)].at(sym).front();
        ParseTree t;
        t.label = sym;
        if (e.split < 0) {
            t.tokens = {tokens[i]};
            return t;
        }
        t.children.push_back(build(chart, tokens, i, e.split, e.left));
        t.children.push_back(build(chart, tokens, e.split, j, e.right));
        for (const auto& c : t.children)
            t.tokens.insert(t.tokens.end(), c.tokens.begin(), c.tokens.end());
        return t;
    }

    static void flatten(ParseTree& t) {
        std::vector<ParseTree> out;
        for (auto& c : t.children) {
            flatten(c);
            if (!c.label.empty() && c.label[0] == '@') {
                for (auto& g : c.children) out.push_back(std::move(g));
            } else {
                out.push_back(std::move(c));
            }
        }
        t.children = std::move(out);
    }

    static int index_spans(ParseTree& t, int begin) {
        t.span_begin = begin;
        if (t.is_leaf()) {
            t.span_end = begin + static_cast<int>(t.tokens.size());
            return t.span_end;
        }
        int pos = begin;
        for (auto& c : t.children) pos = index_spans(c, pos);
        t.span_end = pos;
        return pos;
    }
};

/// Phrase-rule skeleton of the instruction grammar plus its closed-class
/// words. Open classes (nouns, adjectives, verbs, prepositions) are added
/// from a vocabulary.
inline Grammar standard_grammar() {
    Grammar g;
    g.root = "VP";
    g.add_rule("VP", {"VB", "NP"});
    g.add_rule("VP", {"VB", "RP", "NP"});
    g.add_rule("VP", {"VB", "TO", "NP"});
    g.add_rule("NP", {"DT", "NN"});
    g.add_rule("NP", {"DT", "JJ", "NN"});
    g.add_rule("NP", {"DT", "NN", "PP"});
    g.add_rule("NP", {"DT", "JJ", "NN", "PP"});
    g.add_rule("NP", {"DT", "NML"});
    g.add_rule("NP", {"DT", "JJ", "NML"});
    g.add_rule("NP", {"DT", "NML", "PP"});
    g.add_rule("NP", {"DT", "JJ", "NML", "PP"});
    g.add_rule("NML", {"NN", "NN"});
    g.add_rule("PP", {"IN", "NP"});
    g.add_rule("PP", {"RB", "IN", "NP"});
    g.add_word("DT", "the");
    g.add_word("DT", "a");
    g.add_word("TO", "to");
    g.add_word("RP", "up");
    g.add_word("IN", "of");
    return g;
}

}  // namespace lgx
