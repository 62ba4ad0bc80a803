#pragma once

// Bundle of everything the runtime needs to ground language: vocabulary,
// grammar, and the three trained heads.  Training runs from a corpus of
// instructions; the result round-trips through a plain directory of text
// files so the bench can ship frozen weights.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lgx/corpus.hpp"
#include "lgx/dcg_train.hpp"
#include "lgx/grammar.hpp"
#include "lgx/heads.hpp"
#include "lgx/registry.hpp"
#include "lgx/vocabulary.hpp"

namespace lgx {

struct Models {
    Vocabulary vocab;
    Grammar grammar;
    DetectorHead detector;
    AnnotationHead annotation;
    BehaviorHead behavior;

    static Models untrained(const Vocabulary& vocab, const Registry& registry) {
        Models m;
        m.vocab = vocab;
        m.grammar = vocab.make_grammar();
        m.detector.detector_names = registry.names();
        m.annotation.vocab = vocab;
        m.behavior.vocab = vocab;
        return m;
    }

    void train(const std::vector<ParseTree>& corpus, const TrainOptions& opt = TrainOptions()) {
        train_weights(detector.make_examples(corpus, vocab), detector.weights, opt);
        train_weights(annotation.make_examples(corpus), annotation.weights, opt);
        train_weights(behavior.make_examples(corpus), behavior.weights, opt);
    }

    void save(const std::string& dir) const {
        std::filesystem::create_directories(dir);
        vocab.save(dir + "/vocabulary.txt");
        {
            std::ofstream out(dir + "/detectors.txt");
            for (const auto& n : detector.detector_names) out << n << "\n";
        }
        save_weights(detector.weights, dir + "/detector.weights");
        save_weights(annotation.weights, dir + "/annotation.weights");
        save_weights(behavior.weights, dir + "/behavior.weights");
    }

    static Models load(const std::string& dir) {
        Models m;
        m.vocab = Vocabulary::load(dir + "/vocabulary.txt");
        m.grammar = m.vocab.make_grammar();
        std::ifstream in(dir + "/detectors.txt");
        if (!in) throw std::runtime_error("missing detectors.txt in " + dir);
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) m.detector.detector_names.push_back(line);
        m.detector.weights = load_weights(dir + "/detector.weights");
        m.annotation.vocab = m.vocab;
        m.annotation.weights = load_weights(dir + "/annotation.weights");
        m.behavior.vocab = m.vocab;
        m.behavior.weights = load_weights(dir + "/behavior.weights");
        return m;
    }
};

/// Train the full bundle from the built-in corpus.
inline Models train_builtin_models(const Vocabulary& vocab, const Registry& registry,
                                   const TrainOptions& opt = TrainOptions()) {
    Models m = Models::untrained(vocab, registry);
    std::vector<ParseTree> corpus = parse_corpus(builtin_corpus(vocab), m.grammar);
    m.train(corpus, opt);
    return m;
}

}  // namespace lgx
