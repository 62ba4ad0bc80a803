// Regenerates the shipped training corpus and data artifacts.  Run from the
// repo root after touching the builtin vocabulary, registries or scenarios:
//
//   build/tools/gen_corpus data
//
// Writes corpus.txt, registry/*.reg, scenarios/*.json and a trained model
// bundle under models/.

#include <cstdio>
#include <filesystem>

#include "lgx/lgx.hpp"

int main(int argc, char** argv) {
    using namespace lgx;
    std::string out = argc > 1 ? argv[1] : "data";
    std::filesystem::create_directories(out + "/registry");
    std::filesystem::create_directories(out + "/scenarios");

    Vocabulary vocab = Vocabulary::builtin();
    std::vector<std::string> corpus = builtin_corpus(vocab);
    save_corpus(corpus, out + "/corpus.txt");
    std::printf("corpus.txt: %zu instructions\n", corpus.size());

    Registry::builtin_indoor().save(out + "/registry/indoor.reg");
    Registry::builtin_outdoor().save(out + "/registry/outdoor.reg");

    save_scenario(controlled_indoor_scenario(), out + "/scenarios/controlled_indoor.json");
    save_scenario(exploratory_outdoor_scenario(), out + "/scenarios/exploratory_outdoor.json");

    Models m = Models::untrained(vocab, Registry::builtin_indoor());
    std::vector<ParseTree> trees = parse_corpus(corpus, m.grammar);
    std::printf("training heads on %zu parses\n", trees.size());
    m.train(trees, TrainOptions{});
    m.save(out + "/models");
    std::printf("model bundle written to %s/models\n", out.c_str());
    return 0;
}
