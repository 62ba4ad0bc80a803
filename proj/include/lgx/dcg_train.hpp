#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "lgx/dcg.hpp"
#include "lgx/rng.hpp"

namespace lgx {

/// One training instance. `features` supplies the example's dynamic
/// features (and owns whatever world they consult); null means the graph
/// has static features only.
struct TrainExample {
    DcgGraph graph;
    Assignment gold;
    std::shared_ptr<const FeatureModel> features;
};

inline const FeatureModel& example_features(const TrainExample& ex) {
    static const FeatureModel none;
    return ex.features ? *ex.features : none;
}

struct TrainOptions {
    double learning_rate = 0.1;
    double l2 = 1e-3;
    int epochs = 500;
    std::uint64_t seed = 0;  // drives the per-epoch factor shuffle
};

struct TrainResult {
    double objective = 0.0;
    int epochs = 0;
};

namespace detail {

inline FeatureVec factor_features(const DcgGraph& g, const FeatureModel& fm, int node, int sym,
                                  const Assignment& assign) {
    const DcgNode& nd = g.nodes[static_cast<std::size_t>(node)];
    FeatureVec f = nd.static_feats[static_cast<std::size_t>(sym)];
    ChildAssign ca(nd.children.size());
    for (std::size_t c = 0; c < nd.children.size(); ++c)
        ca[c] = &assign[static_cast<std::size_t>(nd.children[c])];
    fm.dynamic_features(g, node, sym, ca, f);
    return f;
}

inline std::vector<const TrainExample*> example_ptrs(const std::vector<TrainExample>& v) {
    std::vector<const TrainExample*> out;
    out.reserve(v.size());
    for (const auto& e : v) out.push_back(&e);
    return out;
}

}  // namespace detail

/// Sum over factors of the conditional log likelihood of the gold
/// correspondences, children clamped to gold, minus the L2 penalty.
inline double train_objective(const std::vector<const TrainExample*>& examples, const Weights& w,
                              double l2) {
    double obj = 0.0;
    for (const TrainExample* ex : examples)
        for (std::size_t ni = 0; ni < ex->graph.nodes.size(); ++ni)
            for (std::size_t j = 0; j < ex->graph.nodes[ni].symbols.size(); ++j) {
                FeatureVec f = detail::factor_features(ex->graph, example_features(*ex),
                                                       static_cast<int>(ni), static_cast<int>(j),
                                                       ex->gold);
                double z = weight_dot(w, f);
                obj += log_sigmoid(ex->gold[ni][j] ? z : -z);
            }
    for (const auto& [k, v] : w) obj -= l2 * v * v;
    return obj;
}

inline Weights train_gradient(const std::vector<const TrainExample*>& examples, const Weights& w,
                              double l2) {
    Weights grad;
    for (const TrainExample* ex : examples)
        for (std::size_t ni = 0; ni < ex->graph.nodes.size(); ++ni)
            for (std::size_t j = 0; j < ex->graph.nodes[ni].symbols.size(); ++j) {
                FeatureVec f = detail::factor_features(ex->graph, example_features(*ex),
                                                       static_cast<int>(ni), static_cast<int>(j),
                                                       ex->gold);
                double z = weight_dot(w, f);
                double r = ex->gold[ni][j] ? sigmoid(-z) : -sigmoid(z);
                for (const auto& k : f) grad[k] += r;
            }
    for (const auto& [k, v] : w) grad[k] -= 2.0 * l2 * v;
    return grad;
}

/// Training-time view of the factor set: gold children are fixed, so every
/// factor's feature vector is constant and can be interned once.
struct CompiledTraining {
    struct Factor {
        std::vector<int> feats;
        std::uint8_t gold = 0;
    };
    std::vector<std::string> names;  // feature id -> name
    std::vector<Factor> factors;

    static CompiledTraining compile(const std::vector<const TrainExample*>& examples) {
        CompiledTraining ct;
        std::unordered_map<std::string, int> index;
        for (const TrainExample* ex : examples)
            for (std::size_t ni = 0; ni < ex->graph.nodes.size(); ++ni)
                for (std::size_t j = 0; j < ex->graph.nodes[ni].symbols.size(); ++j) {
                    Factor fac;
                    fac.gold = ex->gold[ni][j];
                    for (const auto& k : detail::factor_features(ex->graph, example_features(*ex),
                                                                 static_cast<int>(ni),
                                                                 static_cast<int>(j), ex->gold)) {
                        auto [it, fresh] = index.emplace(k, static_cast<int>(ct.names.size()));
                        if (fresh) ct.names.push_back(k);
                        fac.feats.push_back(it->second);
                    }
                    ct.factors.push_back(std::move(fac));
                }
        return ct;
    }

    double objective(const std::vector<double>& w, double l2) const {
        double obj = 0.0;
        for (const auto& f : factors) {
            double z = 0.0;
            for (int id : f.feats) z += w[static_cast<std::size_t>(id)];
            obj += log_sigmoid(f.gold ? z : -z);
        }
        for (double v : w) obj -= l2 * v * v;
        return obj;
    }

    void gradient(const std::vector<double>& w, double l2, std::vector<double>& grad) const {
        grad.assign(w.size(), 0.0);
        for (const auto& f : factors) {
            double z = 0.0;
            for (int id : f.feats) z += w[static_cast<std::size_t>(id)];
            double r = f.gold ? sigmoid(-z) : -sigmoid(z);
            for (int id : f.feats) grad[static_cast<std::size_t>(id)] += r;
        }
        for (std::size_t i = 0; i < w.size(); ++i) grad[i] -= 2.0 * l2 * w[i];
    }
};

/// Per-factor stochastic gradient ascent from the weights passed in
/// (typically empty, meaning zero). Each epoch visits every factor once in a
/// seeded shuffle and applies the L2 decay at the end, so identical options
/// give bit-identical weights.
inline TrainResult train_weights(const std::vector<const TrainExample*>& examples, Weights& w,
                                 const TrainOptions& opt = {}) {
    CompiledTraining ct = CompiledTraining::compile(examples);
    std::vector<double> dense(ct.names.size(), 0.0);
    for (std::size_t i = 0; i < ct.names.size(); ++i) {
        auto it = w.find(ct.names[i]);
        if (it != w.end()) dense[i] = it->second;
    }
    std::vector<std::size_t> order(ct.factors.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_seed(opt.seed, 0x7261696e));
    TrainResult res;
    for (int e = 0; e < opt.epochs; ++e) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.uniform_index(i)]);
        for (std::size_t i : order) {
            const auto& f = ct.factors[i];
            double z = 0.0;
            for (int id : f.feats) z += dense[static_cast<std::size_t>(id)];
            double r = opt.learning_rate * (f.gold ? sigmoid(-z) : -sigmoid(z));
            for (int id : f.feats) dense[static_cast<std::size_t>(id)] += r;
        }
        double decay = 1.0 - opt.learning_rate * 2.0 * opt.l2;
        for (double& v : dense) v *= decay;
        res.epochs = e + 1;
    }
    for (std::size_t i = 0; i < ct.names.size(); ++i) w[ct.names[i]] = dense[i];
    res.objective = ct.objective(dense, opt.l2);
    return res;
}

inline TrainResult train_weights(const std::vector<TrainExample>& examples, Weights& w,
                                 const TrainOptions& opt = {}) {
    return train_weights(detail::example_ptrs(examples), w, opt);
}

/// Largest relative disagreement between the analytic gradient and central
/// differences over every feature touched by the examples.
inline double gradient_check(const std::vector<TrainExample>& examples, const Weights& w, double l2,
                             double h = 1e-5) {
    auto ptrs = detail::example_ptrs(examples);
    Weights analytic = train_gradient(ptrs, w, l2);
    double worst = 0.0;
    for (const auto& [k, g] : analytic) {
        Weights wp = w, wm = w;
        wp[k] += h;
        wm[k] -= h;
        double numeric =
            (train_objective(ptrs, wp, l2) - train_objective(ptrs, wm, l2)) / (2.0 * h);
        double scale = std::max({1.0, std::fabs(g), std::fabs(numeric)});
        worst = std::max(worst, std::fabs(g - numeric) / scale);
    }
    return worst;
}

inline void save_weights(const Weights& w, const std::string& path) {
    std::map<std::string, double> sorted(w.begin(), w.end());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << std::setprecision(17);
    for (const auto& [k, v] : sorted) out << k << "\t" << v << "\n";
}

inline Weights load_weights(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    Weights w;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) throw std::runtime_error("bad model line: " + line);
        w[line.substr(0, tab)] = std::stod(line.substr(tab + 1));
    }
    return w;
}

}  // namespace lgx
