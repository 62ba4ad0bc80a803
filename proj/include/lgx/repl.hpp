#pragma once

// Line-oriented console for poking at the language stack without running a
// scenario: parse instructions, inspect detector selections, annotations,
// and behavior groundings against a synthetic world.

#include <iostream>
#include <sstream>
#include <string>

#include "lgx/corpus.hpp"
#include "lgx/heads.hpp"
#include "lgx/models.hpp"

namespace lgx {

inline void repl_help(std::ostream& out) {
    out << "commands:\n"
           "  parse <instruction>      show the parse tree\n"
           "  detectors <instruction>  detectors the instruction asks for\n"
           "  annotate <instruction>   map annotations with scores\n"
           "  ground <instruction>     behaviors against a synthetic world\n"
           "  help                     this text\n"
           "  quit                     leave\n";
}

inline bool repl_eval(const Models& models, const std::string& line, std::ostream& out) {
    std::istringstream ss(line);
    std::string cmd;
    ss >> cmd;
    if (cmd.empty()) return true;
    std::string rest;
    std::getline(ss, rest);
    std::size_t at = rest.find_first_not_of(" \t");
    rest = at == std::string::npos ? std::string() : rest.substr(at);

    if (cmd == "quit" || cmd == "exit") return false;
    if (cmd == "help") {
        repl_help(out);
        return true;
    }
    try {
        if (cmd == "parse") {
            out << to_sexpr(models.grammar.parse(rest)) << "\n";
        } else if (cmd == "detectors") {
            ParseTree t = models.grammar.parse(rest);
            for (const auto& d : models.detector.select(t)) out << d << "\n";
        } else if (cmd == "annotate") {
            ParseTree t = models.grammar.parse(rest);
            AnnotationSet ann = models.annotation.infer(t);
            for (const auto& a : ann.types)
                out << "type " << a.type << " " << a.score << "\n";
            for (const auto& r : ann.relations)
                out << "rel " << r.rel << "(" << r.fig << "," << r.lm << ") " << r.score
                    << "\n";
        } else if (cmd == "ground") {
            ParseTree t = models.grammar.parse(rest);
            SynthWorld w = synth_world(t, models.vocab);
            auto cands = models.behavior.infer(t, w.graph, w.viewer);
            for (const auto& c : cands) {
                const Node& n = w.graph.node(c.goal);
                out << c.btype << " -> node " << c.goal << " (" << n.type
                    << (n.color.empty() ? "" : "," + n.color) << ") " << c.likelihood
                    << "\n";
            }
        } else {
            out << "unknown command; try help\n";
        }
    } catch (const std::exception& e) {
        out << "error: " << e.what() << "\n";
    }
    return true;
}

inline int run_repl(const Models& models, std::istream& in, std::ostream& out) {
    out << "language-guided exploration console; help for commands\n";
    std::string line;
    while (out << "> " << std::flush, std::getline(in, line)) {
        if (!repl_eval(models, line, out)) break;
    }
    out << "\n";
    return 0;
}

}  // namespace lgx
