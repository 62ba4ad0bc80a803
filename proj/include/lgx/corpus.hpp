#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lgx/grammar.hpp"
#include "lgx/parse_tree.hpp"
#include "lgx/vocabulary.hpp"

namespace lgx {

/// Flat semantics of one instruction: a behavior verb, a figure noun phrase
/// and at most one relation to a landmark noun phrase.
struct InstructionMeaning {
    std::string verb;
    NounReading figure;
    std::string relation;  // empty when the figure phrase has no modifier
    NounReading landmark;

    bool has_relation() const { return !relation.empty(); }
};

inline const ParseTree* find_child(const ParseTree& t, const std::string& label) {
    for (const auto& c : t.children)
        if (c.label == label) return &c;
    return nullptr;
}

/// Reads the clause; throws when the structure is outside the supported
/// shape (one relation hop at most) or the words name nothing in the
/// vocabulary.
inline InstructionMeaning read_meaning(const ParseTree& root, const Vocabulary& vocab) {
    InstructionMeaning m;
    auto verb = read_vp_verb(root, vocab);
    if (!verb) throw std::runtime_error("unknown verb in '" + root.text() + "'");
    m.verb = *verb;
    const ParseTree* np = find_child(root, "NP");
    if (!np) throw std::runtime_error("clause has no object phrase");
    auto fig = read_np(*np, vocab);
    if (!fig) throw std::runtime_error("unknown object in '" + np->text() + "'");
    m.figure = *fig;
    if (const ParseTree* pp = find_child(*np, "PP")) {
        auto rel = read_pp_relation(*pp, vocab);
        if (!rel) throw std::runtime_error("unknown relation in '" + pp->text() + "'");
        m.relation = *rel;
        const ParseTree* lm = find_child(*pp, "NP");
        if (!lm) throw std::runtime_error("relation has no landmark phrase");
        auto lr = read_np(*lm, vocab);
        if (!lr) throw std::runtime_error("unknown landmark in '" + lm->text() + "'");
        m.landmark = *lr;
        if (find_child(*lm, "PP"))
            throw std::runtime_error("nested relations unsupported: '" + root.text() + "'");
    }
    return m;
}

inline std::vector<std::string> load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        auto toks = tokenize(line);
        if (toks.empty()) continue;
        std::string t;
        for (std::size_t i = 0; i < toks.size(); ++i) {
            if (i) t += ' ';
            t += toks[i];
        }
        out.push_back(t);
    }
    return out;
}

inline void save_corpus(const std::vector<std::string>& lines, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write corpus file: " + path);
    for (const auto& l : lines) out << l << "\n";
}

/// Template-expanded training set over the built-in vocabulary. Every type,
/// verb lemma, relation lemma and color shows up at least twice so held-out
/// evaluation never faces a word seen zero times.
inline std::vector<std::string> builtin_corpus(const Vocabulary& vocab) {
    std::vector<std::string> out;
    auto lemma = [&](const std::string& type) { return vocab.types[static_cast<std::size_t>(
        vocab.type_index(type))].lemmas.front(); };
    for (const auto& t : vocab.types) out.push_back("go to the " + t.lemmas.front());
    for (const auto& t : vocab.types) out.push_back("retrieve the " + t.lemmas.front());
    for (const auto& t : {"box", "mug", "book", "plate"})
        out.push_back(std::string("drive to the ") + lemma(t));
    for (const auto& t : {"drill", "banana", "cup", "hammer"})
        out.push_back(std::string("get the ") + lemma(t));
    for (const auto& t : {"crackers_box", "marker", "scissors", "bowl"})
        out.push_back(std::string("pick up the ") + lemma(t));

    out.push_back("retrieve the ball inside the box");
    out.push_back("pick up the crackers box inside the box");
    out.push_back("retrieve the apple inside the bowl");
    out.push_back("get the can inside the box");
    out.push_back("retrieve the marker inside the mug");
    out.push_back("retrieve the banana inside the bowl");
    out.push_back("retrieve the apple in the bowl");
    out.push_back("get the marker in the cup");
    out.push_back("get the drill from the box");
    out.push_back("retrieve the hammer from the box");
    out.push_back("go to the mug near the book");
    out.push_back("go to the bottle near the plate");
    out.push_back("retrieve the apple near the bowl");
    out.push_back("drive to the box near the plate");
    out.push_back("go to the cup left of the plate");
    out.push_back("retrieve the bottle left of the box");
    out.push_back("go to the can right of the box");
    out.push_back("retrieve the book right of the plate");

    out.push_back("retrieve the red ball");
    out.push_back("go to the red mug");
    out.push_back("retrieve the green book");
    out.push_back("go to the green bottle");
    out.push_back("pick up the blue mug");
    out.push_back("go to the blue ball");
    out.push_back("retrieve the yellow banana");
    out.push_back("go to the yellow cup");
    out.push_back("retrieve the brown box");
    out.push_back("go to the brown book");
    out.push_back("retrieve the white plate");
    out.push_back("go to the white bowl");
    return out;
}

inline std::vector<ParseTree> parse_corpus(const std::vector<std::string>& lines,
                                           const Grammar& grammar) {
    std::vector<ParseTree> out;
    out.reserve(lines.size());
    for (const auto& l : lines) out.push_back(grammar.parse(l));
    return out;
}

}  // namespace lgx
