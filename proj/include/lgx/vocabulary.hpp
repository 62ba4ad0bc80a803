#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lgx/grammar.hpp"
#include "lgx/parse_tree.hpp"

namespace lgx {

struct TypeEntry {
    std::string name;
    double footprint = 0.15;  // half-extent in metres, used by the simulator
    std::vector<std::string> lemmas;
};

struct RelationEntry {
    std::string name;                  // inside, near, left_of, right_of
    std::vector<std::string> lemmas;   // surface prepositions, possibly multiword
};

struct VerbEntry {
    std::string name;                  // retrieve, pickup, navigate
    std::vector<std::string> lemmas;
};

struct NounReading {
    std::string type;
    std::string color;  // empty when the phrase has no adjective
};

/// Closed world of object types, colors, spatial relations and verbs. Drives
/// grammar construction, grounding-space generation and the simulator's
/// object catalogue.
class Vocabulary {
public:
    std::vector<TypeEntry> types;
    std::vector<std::string> colors;
    std::vector<RelationEntry> relations;
    std::vector<VerbEntry> verbs;

    int type_index(const std::string& name) const {
        for (std::size_t i = 0; i < types.size(); ++i)
            if (types[i].name == name) return static_cast<int>(i);
        return -1;
    }

    bool has_color(const std::string& c) const {
        for (const auto& k : colors)
            if (k == c) return true;
        return false;
    }

    const TypeEntry* type_for_lemma(const std::string& phrase) const {
        for (const auto& t : types)
            for (const auto& l : t.lemmas)
                if (l == phrase) return &t;
        return nullptr;
    }

    const RelationEntry* relation_for_lemma(const std::string& phrase) const {
        for (const auto& r : relations)
            for (const auto& l : r.lemmas)
                if (l == phrase) return &r;
        return nullptr;
    }

    const VerbEntry* verb_for_lemma(const std::string& phrase) const {
        for (const auto& v : verbs)
            for (const auto& l : v.lemmas)
                if (l == phrase) return &v;
        return nullptr;
    }

    /// Instruction grammar: standard phrase rules plus this vocabulary's
    /// open-class words. Multiword lemmas split into the tag sequences the
    /// rules expect (NN NN compounds, VB+RP, VB+TO, RB+of).
    Grammar make_grammar() const {
        Grammar g = standard_grammar();
        for (const auto& t : types)
            for (const auto& l : t.lemmas)
                for (const auto& w : tokenize(l)) g.add_word("NN", w);
        for (const auto& c : colors) g.add_word("JJ", c);
        for (const auto& r : relations)
            for (const auto& l : r.lemmas) {
                auto words = tokenize(l);
                if (words.size() == 1) {
                    g.add_word("IN", words[0]);
                } else if (words.size() == 2 && words[1] == "of") {
                    g.add_word("RB", words[0]);
                } else {
                    throw std::invalid_argument("unsupported relation lemma '" + l + "'");
                }
            }
        for (const auto& v : verbs)
            for (const auto& l : v.lemmas) {
                auto words = tokenize(l);
                g.add_word("VB", words[0]);
                if (words.size() == 2 && words[1] != "up" && words[1] != "to")
                    throw std::invalid_argument("unsupported verb lemma '" + l + "'");
            }
        return g;
    }

    static Vocabulary load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open vocabulary file: " + path);
        Vocabulary v;
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[' && line.back() == ']') {
                section = line.substr(1, line.size() - 2);
                continue;
            }
            auto fields = split_pipe(line);
            try {
                if (section == "types") {
                    TypeEntry t;
                    t.name = fields.at(0);
                    t.footprint = std::stod(fields.at(1));
                    t.lemmas = split_comma(fields.at(2));
                    v.types.push_back(t);
                } else if (section == "colors") {
                    v.colors.push_back(fields.at(0));
                } else if (section == "relations") {
                    v.relations.push_back({fields.at(0), split_comma(fields.at(1))});
                } else if (section == "verbs") {
                    v.verbs.push_back({fields.at(0), split_comma(fields.at(1))});
                } else {
                    throw std::runtime_error("entry outside a known section");
                }
            } catch (const std::exception& e) {
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
        return v;
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write vocabulary file: " + path);
        out << "[types]\n";
        for (const auto& t : types)
            out << t.name << " | " << t.footprint << " | " << join_comma(t.lemmas) << "\n";
        out << "\n[colors]\n";
        for (const auto& c : colors) out << c << "\n";
        out << "\n[relations]\n";
        for (const auto& r : relations) out << r.name << " | " << join_comma(r.lemmas) << "\n";
        out << "\n[verbs]\n";
        for (const auto& v : verbs) out << v.name << " | " << join_comma(v.lemmas) << "\n";
    }

    /// Shipped desk-scale catalogue.
    static Vocabulary builtin() {
        Vocabulary v;
        auto add = [&](const std::string& n, double fp, std::vector<std::string> lem) {
            v.types.push_back({n, fp, std::move(lem)});
        };
        add("ball", 0.15, {"ball"});
        add("box", 0.50, {"box"});
        add("crackers_box", 0.20, {"crackers box"});
        add("drill", 0.20, {"drill"});
        add("hammer", 0.15, {"hammer"});
        add("mug", 0.10, {"mug"});
        add("bottle", 0.10, {"bottle"});
        add("can", 0.08, {"can"});
        add("banana", 0.10, {"banana"});
        add("apple", 0.08, {"apple"});
        add("scissors", 0.10, {"scissors"});
        add("cup", 0.10, {"cup"});
        add("plate", 0.15, {"plate"});
        add("bowl", 0.12, {"bowl"});
        add("marker", 0.06, {"marker"});
        add("book", 0.15, {"book"});
        v.colors = {"red", "green", "blue", "yellow", "brown", "white"};
        v.relations.push_back({"inside", {"inside", "in", "from"}});
        v.relations.push_back({"near", {"near"}});
        v.relations.push_back({"left_of", {"left of"}});
        v.relations.push_back({"right_of", {"right of"}});
        v.verbs.push_back({"retrieve", {"retrieve", "get"}});
        v.verbs.push_back({"pickup", {"pick up"}});
        v.verbs.push_back({"navigate", {"go to", "drive to"}});
        return v;
    }

private:
    static std::string trim(const std::string& s) {
        std::size_t a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        std::size_t b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }

    static std::vector<std::string> split_pipe(const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        for (char c : s) {
            if (c == '|') {
                out.push_back(trim(cur));
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        out.push_back(trim(cur));
        return out;
    }

    static std::vector<std::string> split_comma(const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        for (char c : s) {
            if (c == ',') {
                out.push_back(trim(cur));
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        if (!trim(cur).empty()) out.push_back(trim(cur));
        return out;
    }

    static std::string join_comma(const std::vector<std::string>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += ", ";
            s += v[i];
        }
        return s;
    }
};

/// Noun phrase reading: color adjective plus noun words resolved against the
/// type lemmas. Returns nothing when the nouns name no known type.
inline std::optional<NounReading> read_np(const ParseTree& np, const Vocabulary& vocab) {
    NounReading r;
    std::string noun;
    for (const auto& c : np.children) {
        if (!c.is_leaf() && c.label != "NML") continue;
        if (c.label == "JJ") {
            r.color = c.tokens.front();
        } else if (c.label == "NN" || c.label == "NML") {
            for (const auto& w : c.tokens) {
                if (!noun.empty()) noun += ' ';
                noun += w;
            }
        }
    }
    const TypeEntry* t = vocab.type_for_lemma(noun);
    if (!t) return std::nullopt;
    r.type = t->name;
    return r;
}

/// Relation named by a prepositional phrase ("left of ..." reads as left_of,
/// "from ..." as inside).
inline std::optional<std::string> read_pp_relation(const ParseTree& pp, const Vocabulary& vocab) {
    std::string prep;
    for (const auto& w : pp.own_words()) {
        if (!prep.empty()) prep += ' ';
        prep += w;
    }
    const RelationEntry* r = vocab.relation_for_lemma(prep);
    if (!r) return std::nullopt;
    return r->name;
}

/// Behavior verb named by the clause head ("pick up" reads as pickup).
inline std::optional<std::string> read_vp_verb(const ParseTree& vp, const Vocabulary& vocab) {
    std::string head;
    for (const auto& w : vp.own_words()) {
        if (!head.empty()) head += ' ';
        head += w;
    }
    const VerbEntry* v = vocab.verb_for_lemma(head);
    if (!v) return std::nullopt;
    return v->name;
}

}  // namespace lgx
