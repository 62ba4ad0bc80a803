#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "lgx/symbols.hpp"

namespace lgx {

using FeatureVec = std::vector<std::string>;
using Weights = std::unordered_map<std::string, double>;

struct TooLarge : std::runtime_error {
    explicit TooLarge(const std::string& what) : std::runtime_error("state space too large: " + what) {}
};

inline double weight_dot(const Weights& w, const FeatureVec& f) {
    double z = 0.0;
    for (const auto& k : f) {
        auto it = w.find(k);
        if (it != w.end()) z += it->second;
    }
    return z;
}

inline double log_sigmoid(double z) {
    return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// One phrase of the factor graph: its candidate symbols with precomputed
/// static features, plus tree structure. Nodes are stored in preorder with
/// the root at index 0.
struct DcgNode {
    int parent = -1;
    std::vector<int> children;
    std::string label;               // phrase category, informational
    std::vector<std::string> words;  // phrase feature words
    std::vector<GroundingSymbol> symbols;
    std::vector<FeatureVec> static_feats;  // parallel to symbols
};

struct DcgGraph {
    std::vector<DcgNode> nodes;

    std::size_t total_symbols() const {
        std::size_t n = 0;
        for (const auto& nd : nodes) n += nd.symbols.size();
        return n;
    }

    void check() const {
        if (nodes.empty()) throw std::logic_error("empty factor graph");
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (nodes[i].symbols.size() != nodes[i].static_feats.size())
                throw std::logic_error("features not parallel to symbols");
            for (int c : nodes[i].children)
                if (c <= static_cast<int>(i) || nodes[static_cast<std::size_t>(c)].parent != static_cast<int>(i))
                    throw std::logic_error("nodes not in preorder");
        }
    }
};

/// Per node, per candidate symbol: 1 when the correspondence holds.
using Assignment = std::vector<std::vector<std::uint8_t>>;

using ChildAssign = std::vector<const std::vector<std::uint8_t>*>;  // aligned with node.children

/// Hook for features that depend on the child phrases' assignments.
class FeatureModel {
public:
    virtual ~FeatureModel() = default;
    virtual void dynamic_features(const DcgGraph&, int /*node*/, int /*sym*/, const ChildAssign&,
                                  FeatureVec& /*out*/) const {}
};

template <class Fn>
inline void for_each_true_child_symbol(const DcgGraph& g, int node, const ChildAssign& ca, Fn&& fn) {
    const DcgNode& nd = g.nodes[static_cast<std::size_t>(node)];
    for (std::size_t c = 0; c < nd.children.size(); ++c) {
        const DcgNode& ch = g.nodes[static_cast<std::size_t>(nd.children[c])];
        const auto& a = *ca[c];
        for (std::size_t j = 0; j < ch.symbols.size(); ++j)
            if (a[j]) fn(nd.children[c], ch.symbols[j]);
    }
}

struct BeamEntry {
    double log_score = 0.0;           // joint log likelihood of the subtree
    std::vector<std::uint8_t> own;    // this phrase's assignment
    std::vector<int> child_choice;    // beam index picked per child
    std::vector<std::uint8_t> pre;    // preorder flattening, the tie-break key
};

/// True when a beats b: higher score, ties to the lexicographically smaller
/// preorder assignment (false before true).
inline bool beam_better(const BeamEntry& a, const BeamEntry& b) {
    if (a.log_score != b.log_score) return a.log_score > b.log_score;
    return a.pre < b.pre;
}

struct DcgResult {
    Assignment map_assign;
    double map_log_score = 0.0;
    std::vector<std::vector<BeamEntry>> beams;  // per node, best first
};

namespace detail {

inline double factor_z(const DcgGraph& g, const FeatureModel& fm, const Weights& w, int node,
                       int sym, const ChildAssign& ca, double static_z) {
    FeatureVec dyn;
    fm.dynamic_features(g, node, sym, ca, dyn);
    return static_z + weight_dot(w, dyn);
}

}  // namespace detail

/// Bottom-up beam inference. Each phrase keeps up to `beam_width` candidate
/// assignments scored jointly with the subtree below; `beam_width` 0 keeps
/// everything, which is exact. Finite beams extend each child combination
/// with the per-symbol optimum and its nearest single flips, so width 1 is
/// greedy.
inline DcgResult dcg_infer(const DcgGraph& g, const FeatureModel& fm, const Weights& w,
                           int beam_width = 8) {
    g.check();
    bool exact = beam_width <= 0;
    std::vector<std::vector<double>> static_z(g.nodes.size());
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        for (const auto& f : g.nodes[i].static_feats)
            static_z[i].push_back(weight_dot(w, f));

    DcgResult res;
    res.beams.resize(g.nodes.size());

    for (int ni = static_cast<int>(g.nodes.size()) - 1; ni >= 0; --ni) {
        const DcgNode& nd = g.nodes[static_cast<std::size_t>(ni)];
        std::size_t nsym = nd.symbols.size();
        if (exact && nsym > 20) throw TooLarge("phrase has " + std::to_string(nsym) + " symbols");

        std::vector<BeamEntry> out;
        std::vector<int> combo(nd.children.size(), 0);
        bool combos_done = false;
        while (!combos_done) {
            double child_score = 0.0;
            ChildAssign ca(nd.children.size());
            for (std::size_t c = 0; c < nd.children.size(); ++c) {
                const BeamEntry& e =
                    res.beams[static_cast<std::size_t>(nd.children[c])][static_cast<std::size_t>(combo[c])];
                child_score += e.log_score;
                ca[c] = &e.own;
            }

            std::vector<double> z(nsym);
            for (std::size_t j = 0; j < nsym; ++j)
                z[j] = detail::factor_z(g, fm, w, ni, static_cast<int>(j), ca,
                                        static_z[static_cast<std::size_t>(ni)][j]);

            auto finish = [&](BeamEntry&& e) {
                e.child_choice.assign(combo.begin(), combo.end());
                e.pre = e.own;
                for (std::size_t c = 0; c < nd.children.size(); ++c) {
                    const BeamEntry& ce = res.beams[static_cast<std::size_t>(
                        nd.children[c])][static_cast<std::size_t>(combo[c])];
                    e.pre.insert(e.pre.end(), ce.pre.begin(), ce.pre.end());
                }
                out.push_back(std::move(e));
            };

            if (exact) {
                std::uint64_t total = std::uint64_t{1} << nsym;
                for (std::uint64_t m = 0; m < total; ++m) {
                    BeamEntry e;
                    e.own.resize(nsym);
                    double s = child_score;
                    for (std::size_t j = 0; j < nsym; ++j) {
                        bool on = (m >> (nsym - 1 - j)) & 1;  // leading symbol most significant
                        e.own[j] = on ? 1 : 0;
                        s += log_sigmoid(on ? z[j] : -z[j]);
                    }
                    e.log_score = s;
                    finish(std::move(e));
                }
            } else {
                BeamEntry best;
                best.own.resize(nsym);
                double s = child_score;
                std::vector<std::pair<double, std::size_t>> deltas;  // |z|, symbol
                for (std::size_t j = 0; j < nsym; ++j) {
                    best.own[j] = z[j] > 0.0 ? 1 : 0;  // exact zero prefers false
                    s += log_sigmoid(best.own[j] ? z[j] : -z[j]);
                    deltas.emplace_back(std::fabs(z[j]), j);
                }
                best.log_score = s;
                std::sort(deltas.begin(), deltas.end());
                for (int k = 0; k < beam_width - 1 && k < static_cast<int>(nsym); ++k) {
                    BeamEntry flip = best;
                    std::size_t j = deltas[static_cast<std::size_t>(k)].second;
                    flip.own[j] ^= 1;
                    flip.log_score -= deltas[static_cast<std::size_t>(k)].first;
                    finish(std::move(flip));
                }
                finish(std::move(best));
            }

            combos_done = true;
            for (std::size_t c = 0; c < nd.children.size(); ++c) {
                if (++combo[c] < static_cast<int>(res.beams[static_cast<std::size_t>(nd.children[c])].size())) {
                    combos_done = false;
                    break;
                }
                combo[c] = 0;
            }
            if (nd.children.empty()) break;
        }

        std::sort(out.begin(), out.end(), beam_better);
        if (!exact && static_cast<int>(out.size()) > beam_width)
            out.resize(static_cast<std::size_t>(beam_width));
        res.beams[static_cast<std::size_t>(ni)] = std::move(out);
    }

    res.map_assign.resize(g.nodes.size());
    double total = res.beams[0].front().log_score;
    std::vector<std::pair<int, int>> stack{{0, 0}};  // node, beam index
    while (!stack.empty()) {
        auto [ni, bi] = stack.back();
        stack.pop_back();
        const BeamEntry& e = res.beams[static_cast<std::size_t>(ni)][static_cast<std::size_t>(bi)];
        res.map_assign[static_cast<std::size_t>(ni)] = e.own;
        const DcgNode& nd = g.nodes[static_cast<std::size_t>(ni)];
        for (std::size_t c = 0; c < nd.children.size(); ++c)
            stack.emplace_back(nd.children[c], e.child_choice[c]);
    }
    res.map_log_score = total;
    return res;
}

/// Exhaustive joint argmax over every correspondence variable. Refuses
/// graphs beyond 2^24 joint configurations. Same tie rule as the beam:
/// first (lexicographically smallest preorder vector) wins, replacement only
/// on strictly higher score.
inline std::pair<Assignment, double> dcg_brute_force(const DcgGraph& g, const FeatureModel& fm,
                                                     const Weights& w) {
    g.check();
    std::size_t total = g.total_symbols();
    if (total > 24) throw TooLarge(std::to_string(total) + " correspondence variables");

    std::vector<std::vector<double>> static_z(g.nodes.size());
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        for (const auto& f : g.nodes[i].static_feats)
            static_z[i].push_back(weight_dot(w, f));

    Assignment assign(g.nodes.size()), best_assign;
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        assign[i].assign(g.nodes[i].symbols.size(), 0);

    double best = 0.0;
    bool have_best = false;

    // score via the same child-first recursion the beam uses
    auto score_node = [&](auto&& self, int ni) -> double {
        const DcgNode& nd = g.nodes[static_cast<std::size_t>(ni)];
        double s = 0.0;
        ChildAssign ca(nd.children.size());
        for (std::size_t c = 0; c < nd.children.size(); ++c) {
            s += self(self, nd.children[c]);
            ca[c] = &assign[static_cast<std::size_t>(nd.children[c])];
        }
        for (std::size_t j = 0; j < nd.symbols.size(); ++j) {
            double z = detail::factor_z(g, fm, w, ni, static_cast<int>(j), ca,
                                        static_z[static_cast<std::size_t>(ni)][j]);
            s += log_sigmoid(assign[static_cast<std::size_t>(ni)][j] ? z : -z);
        }
        return s;
    };

    std::uint64_t count = std::uint64_t{1} << total;
    for (std::uint64_t m = 0; m < count; ++m) {
        std::size_t bit = 0;
        for (std::size_t i = 0; i < g.nodes.size(); ++i)
            for (std::size_t j = 0; j < assign[i].size(); ++j, ++bit)
                assign[i][j] = (m >> (total - 1 - bit)) & 1 ? 1 : 0;
        double s = score_node(score_node, 0);
        if (!have_best || s > best) {
            best = s;
            best_assign = assign;
            have_best = true;
        }
    }
    return {best_assign, best};
}

/// Posterior that one symbol holds, marginalized over the retained child
/// combinations weighted by their subtree scores. Exact for childless
/// phrases; beam weighted otherwise.
inline double symbol_marginal(const DcgGraph& g, const FeatureModel& fm, const Weights& w,
                              const std::vector<std::vector<BeamEntry>>& beams, int node, int sym) {
    const DcgNode& nd = g.nodes[static_cast<std::size_t>(node)];
    double static_z = weight_dot(w, nd.static_feats[static_cast<std::size_t>(sym)]);
    if (nd.children.empty()) {
        ChildAssign none;
        return sigmoid(detail::factor_z(g, fm, w, node, sym, none, static_z));
    }
    std::vector<int> combo(nd.children.size(), 0);
    std::vector<double> combo_log;
    std::vector<double> combo_p;
    bool done = false;
    while (!done) {
        double cl = 0.0;
        ChildAssign ca(nd.children.size());
        for (std::size_t c = 0; c < nd.children.size(); ++c) {
            const BeamEntry& e =
                beams[static_cast<std::size_t>(nd.children[c])][static_cast<std::size_t>(combo[c])];
            cl += e.log_score;
            ca[c] = &e.own;
        }
        combo_log.push_back(cl);
        combo_p.push_back(sigmoid(detail::factor_z(g, fm, w, node, sym, ca, static_z)));
        done = true;
        for (std::size_t c = 0; c < nd.children.size(); ++c) {
            if (++combo[c] < static_cast<int>(beams[static_cast<std::size_t>(nd.children[c])].size())) {
                done = false;
                break;
            }
            combo[c] = 0;
        }
    }
    double mx = *std::max_element(combo_log.begin(), combo_log.end());
    double zsum = 0.0;
    for (double cl : combo_log) zsum += std::exp(cl - mx);
    double p = 0.0;
    for (std::size_t i = 0; i < combo_log.size(); ++i)
        p += std::exp(combo_log[i] - mx) / zsum * combo_p[i];
    return p;
}

}  // namespace lgx
