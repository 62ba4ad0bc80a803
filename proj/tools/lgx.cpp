// lgx command line: train the grounding heads, run single trials, compare
// adaptive against exhaustive perception across seeds, or poke at a live
// scenario from a prompt.
//
//   lgx train --head all --out data/models
//   lgx run --scenario controlled_indoor --mode AP --seed 0 --trace
//   lgx compare --scenario controlled_indoor --seeds 0,1,2,3,4 --out results
//   lgx repl --scenario controlled_indoor
//
// compare exits 0 when every efficiency trend holds, 2 when one fails, and
// 1 on any error, so it can gate a CI job.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lgx/lgx.hpp"

namespace fs = std::filesystem;
using namespace lgx;

#ifndef LGX_DATA_DIR
#define LGX_DATA_DIR "data"
#endif

namespace {

std::string default_models_dir() { return std::string(LGX_DATA_DIR) + "/models"; }

Scenario resolve_scenario(const std::string& arg) {
    if (arg == "controlled_indoor") return controlled_indoor_scenario();
    if (arg == "exploratory_outdoor") return exploratory_outdoor_scenario();
    if (fs::exists(arg)) return load_scenario(arg);
    std::string shipped = std::string(LGX_DATA_DIR) + "/scenarios/" + arg + ".json";
    if (fs::exists(shipped)) return load_scenario(shipped);
    throw ScenarioError("unknown scenario: " + arg);
}

Registry resolve_registry(const std::string& arg) {
    if (arg == "indoor") return Registry::builtin_indoor();
    if (arg == "outdoor") return Registry::builtin_outdoor();
    return Registry::load(arg);
}

PerceptionMode resolve_mode(std::string m) {
    std::transform(m.begin(), m.end(), m.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (m == "ap" || m == "adaptive") return PerceptionMode::Adaptive;
    if (m == "ep" || m == "exhaustive") return PerceptionMode::Exhaustive;
    throw std::runtime_error("mode must be AP or EP");
}

const char* mode_tag(PerceptionMode m) { return m == PerceptionMode::Adaptive ? "AP" : "EP"; }

std::vector<ParseTree> corpus_trees(const std::string& corpus_path, const Models& m) {
    std::vector<std::string> lines;
    if (!corpus_path.empty())
        lines = load_corpus(corpus_path);
    else if (fs::exists(std::string(LGX_DATA_DIR) + "/corpus.txt"))
        lines = load_corpus(std::string(LGX_DATA_DIR) + "/corpus.txt");
    else
        lines = builtin_corpus(m.vocab);
    return parse_corpus(lines, m.grammar);
}

/// Shipped weights when present, otherwise a fresh training run so the tool
/// works from a bare checkout.
Models obtain_models(const std::string& dir, const TrainOptions& opt) {
    if (fs::exists(dir + "/vocabulary.txt")) return Models::load(dir);
    std::fprintf(stderr, "note: no model bundle at %s, training from the shipped corpus\n",
                 dir.c_str());
    Models m = Models::untrained(Vocabulary::builtin(), Registry::builtin_indoor());
    m.train(corpus_trees("", m), opt);
    return m;
}

void write_csv_header(std::ostream& out) {
    out << "scenario,mode,seed,avg_behavior_inf_time_per_world_s,"
           "avg_perception_loop_period_s,replay_time_s,task1_time_s,task2_time_s,"
           "total_detected_objects,cycles,success\n";
}

void write_csv_row(std::ostream& out, const RunMetrics& m) {
    double t1 = m.tasks.size() > 0 ? m.tasks[0].completed_time : -1.0;
    double t2 = m.tasks.size() > 1 ? m.tasks[1].completed_time : -1.0;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%s,%llu,%.6f,%.6f,%.6f,%.3f,%.3f,%d,%d,%d\n",
                  m.scenario.c_str(), mode_tag(m.mode),
                  static_cast<unsigned long long>(m.seed), m.mean_behavior_time,
                  m.mean_loop_cost, m.replay_cost, t1, t2, m.objects_confirmed, m.cycles,
                  m.completed_all ? 1 : 0);
    out << buf;
}

void print_run(const RunMetrics& m, bool trace) {
    std::printf("%s %s seed=%llu: %s in %d cycles, %.1f simulated s\n", m.scenario.c_str(),
                mode_tag(m.mode), static_cast<unsigned long long>(m.seed),
                m.completed_all ? "completed" : "cycle cap hit", m.cycles, m.sim_time);
    std::printf("  loop %.3f s/cycle, behavior inf %.4f s/world, replay %.2f s, %d objects\n",
                m.mean_loop_cost, m.mean_behavior_time, m.replay_cost, m.objects_confirmed);
    for (std::size_t i = 0; i < m.tasks.size(); ++i)
        std::printf("  task %zu '%s' done at %.1f s (cycle %d)\n", i + 1,
                    m.tasks[i].instruction.c_str(), m.tasks[i].completed_time,
                    m.tasks[i].completed_cycle);
    if (trace)
        for (const auto& e : m.trace) std::printf("  %s\n", e.to_string().c_str());
}

struct TrendReport {
    std::string text;
    bool pass = true;

    void check(const std::string& name, bool ok, const std::string& detail) {
        text += std::string(ok ? "pass" : "FAIL") + "  " + name + ": " + detail + "\n";
        pass = pass && ok;
    }
};

int cmd_compare(const std::string& scenario_arg, std::vector<int> seeds,
                const std::string& models_dir, const std::string& out_dir, int max_cycles,
                const TrainOptions& topt) {
    if (seeds.size() < 3) throw std::runtime_error("compare needs at least 3 seeds");
    Scenario scn = resolve_scenario(scenario_arg);
    Models models = obtain_models(models_dir, topt);
    BenchOptions opt;
    opt.max_cycles = max_cycles;

    fs::create_directories(out_dir);
    std::ofstream csv(out_dir + "/metrics.csv");
    write_csv_header(csv);

    std::vector<RunMetrics> ap, ep;
    for (PerceptionMode mode : {PerceptionMode::Adaptive, PerceptionMode::Exhaustive}) {
        for (int seed : seeds) {
            RunMetrics m =
                run_scenario(scn, models, mode, static_cast<std::uint64_t>(seed), opt);
            write_csv_row(csv, m);
            char name[256];
            std::snprintf(name, sizeof(name), "%s/trajectory_%s_%s_%d.svg", out_dir.c_str(),
                          m.scenario.c_str(), mode_tag(mode), seed);
            write_svg(name, scn, m.trajectory, m.final_map);
            (mode == PerceptionMode::Adaptive ? ap : ep).push_back(std::move(m));
        }
    }

    BenchSummary sa = summarize(ap), se = summarize(ep);
    std::string table = format_comparison(sa, se);
    std::printf("%s", table.c_str());

    TrendReport rep;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%.3f vs %.3f s/cycle", sa.mean_loop_cost,
                  se.mean_loop_cost);
    rep.check("adaptive loop period <= 0.25 x exhaustive",
              sa.mean_loop_cost <= 0.25 * se.mean_loop_cost, buf);
    std::snprintf(buf, sizeof(buf), "%.1f vs %.1f objects", sa.mean_objects, se.mean_objects);
    rep.check("adaptive maps fewer objects", sa.mean_objects < se.mean_objects, buf);
    std::snprintf(buf, sizeof(buf), "%.1f vs %.1f s", sa.mean_task1_time, se.mean_task1_time);
    rep.check("adaptive finishes task 1 sooner", sa.mean_task1_time < se.mean_task1_time, buf);
    bool ep_zero = true;
    for (const auto& r : ep) ep_zero = ep_zero && r.replay_cost == 0.0;
    rep.check("exhaustive never replays", ep_zero, "replay bill must be identically zero");
    if (scn.script.size() > 1) {
        bool ap_replays = true;
        for (const auto& r : ap) ap_replays = ap_replays && r.replay_cost > 0.0;
        std::snprintf(buf, sizeof(buf), "mean %.2f s", sa.mean_replay_cost);
        rep.check("adaptive pays for replay on the second command", ap_replays, buf);
    }

    std::ofstream report(out_dir + "/report.txt");
    report << table << "\n" << rep.text;
    std::printf("\n%s", rep.text.c_str());
    std::printf("wrote %s/metrics.csv, report.txt and %zu trajectory svgs\n", out_dir.c_str(),
                ap.size() + ep.size());
    return rep.pass ? 0 : 2;
}

int cmd_repl(const std::string& scenario_arg, const std::string& mode_arg,
             std::uint64_t seed, const std::string& models_dir, const TrainOptions& topt) {
    Models models = obtain_models(models_dir, topt);
    if (scenario_arg.empty()) {
        // no world attached: language stack only
        repl_help(std::cout);
        std::string line;
        std::cout << "lgx> " << std::flush;
        while (std::getline(std::cin, line)) {
            if (!repl_eval(models, line, std::cout)) return 0;
            std::cout << "lgx> " << std::flush;
        }
        return 0;
    }

    Scenario scn = resolve_scenario(scenario_arg);
    Registry reg = scenario_registry(scn);
    SimWorld world(scn, reg, models.vocab, seed, WorldOptions{});
    PerceptionPipeline pipeline(reg, resolve_mode(mode_arg));
    FilterConfig fc;
    fc.num_particles = scn.particles;
    fc.sensor_range = reg.range;
    ParticleFilter filter(fc, seed);
    Executive exec(world, pipeline, filter, models);
    std::size_t trace_shown = 0;

    std::cout << "scenario " << scn.name << " (" << mode_tag(pipeline.mode())
              << "), commands: say <instruction> | step [n] | map | metrics | quit\n"
              << "plus the language console: parse / detectors / annotate / ground\n";
    std::string line;
    std::cout << "lgx> " << std::flush;
    while (std::getline(std::cin, line)) {
        std::istringstream ss(line);
        std::string cmd;
        ss >> cmd;
        try {
            if (cmd == "quit" || cmd == "exit") break;
            if (cmd == "say") {
                std::string rest;
                std::getline(ss, rest);
                std::size_t at = rest.find_first_not_of(" \t");
                exec.say(at == std::string::npos ? rest : rest.substr(at));
                std::cout << "queued; step to let the robot work on it\n";
            } else if (cmd == "step") {
                int n = 1;
                ss >> n;
                for (int i = 0; i < n; ++i) exec.step();
                for (; trace_shown < exec.trace().size(); ++trace_shown)
                    std::cout << "  " << exec.trace()[trace_shown].to_string() << "\n";
                Pose2 r = world.robot();
                std::cout << "cycle " << exec.cycle() << ", robot (" << r.x << ", " << r.y
                          << ")\n";
            } else if (cmd == "map") {
                SemanticGraph m = filter.marginal_map();
                for (const auto& n : m.nodes) {
                    if (n.kind != NodeKind::Object || n.state == NodeState::Removed) continue;
                    Vec2 p = m.object_position(n.id);
                    std::printf("  %-12s (%6.2f,%6.2f) %s existence %.2f\n", n.type.c_str(),
                                p.x, p.y,
                                n.state == NodeState::Confirmed ? "confirmed" : "hypothesized",
                                n.existence);
                }
            } else if (cmd == "metrics") {
                std::printf("cycle %d  sim %.1f s  loop %.3f s/cycle  replay %.2f s  tasks "
                            "%zu done\n",
                            exec.cycle(), exec.sim_time(),
                            exec.cycle() ? exec.classifier_cost() / exec.cycle() : 0.0,
                            exec.replay_cost(), exec.tasks().size());
            } else if (cmd == "help") {
                std::cout << "say <instruction> | step [n] | map | metrics | quit\n";
                repl_help(std::cout);
            } else if (!cmd.empty()) {
                if (!repl_eval(models, line, std::cout)) break;
            }
        } catch (const std::exception& e) {
            std::cout << "error: " << e.what() << "\n";
        }
        std::cout << "lgx> " << std::flush;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"language-guided exploration bench"};
    app.require_subcommand(1);

    TrainOptions topt;
    std::string corpus_path, out_path, head = "all", registry_arg = "indoor";
    std::string scenario_arg, mode_arg = "AP", models_dir = default_models_dir();
    std::string csv_path, svg_path, out_dir = "results";
    std::uint64_t seed = 0;
    int max_cycles = 2000;
    bool trace = false;
    std::vector<int> seeds = {0, 1, 2, 3, 4};

    CLI::App* train = app.add_subcommand("train", "fit the grounding heads from a corpus");
    train->add_option("--head", head, "detector | annotation | behavior | all")
        ->check(CLI::IsMember({"detector", "annotation", "behavior", "all"}));
    train->add_option("--corpus", corpus_path, "instruction corpus (default: shipped)");
    train->add_option("--out", out_path, "model bundle dir, or weights file for one head");
    train->add_option("--registry", registry_arg, "indoor | outdoor | registry file");
    train->add_option("--epochs", topt.epochs);
    train->add_option("--lr", topt.learning_rate);
    train->add_option("--l2", topt.l2);
    train->add_option("--seed", topt.seed);

    CLI::App* run = app.add_subcommand("run", "one trial of one scenario");
    run->add_option("--scenario", scenario_arg, "builtin name or scenario json")->required();
    run->add_option("--mode", mode_arg, "AP | EP");
    run->add_option("--seed", seed);
    run->add_option("--models", models_dir, "trained model bundle");
    run->add_option("--max-cycles", max_cycles);
    run->add_option("--csv", csv_path, "append the metrics row here");
    run->add_option("--svg", svg_path, "write trajectory + final map");
    run->add_flag("--trace", trace, "print the event trace");

    CLI::App* compare = app.add_subcommand("compare", "adaptive vs exhaustive across seeds");
    compare->add_option("--scenario", scenario_arg, "builtin name or scenario json")
        ->required();
    compare->add_option("--seeds", seeds, "seed list")->delimiter(',');
    compare->add_option("--models", models_dir, "trained model bundle");
    compare->add_option("--out", out_dir, "output directory");
    compare->add_option("--max-cycles", max_cycles);

    CLI::App* repl = app.add_subcommand("repl", "interactive session");
    repl->add_option("--scenario", scenario_arg, "attach a live scenario");
    repl->add_option("--mode", mode_arg, "AP | EP");
    repl->add_option("--seed", seed);
    repl->add_option("--models", models_dir, "trained model bundle");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) {
            Models m = Models::untrained(Vocabulary::builtin(), resolve_registry(registry_arg));
            std::vector<ParseTree> trees = corpus_trees(corpus_path, m);
            std::printf("training on %zu instructions, %d epochs\n", trees.size(), topt.epochs);
            if (head == "all") {
                m.train(trees, topt);
                if (out_path.empty()) out_path = default_models_dir();
                m.save(out_path);
                std::printf("wrote model bundle to %s\n", out_path.c_str());
            } else {
                Weights w;
                if (head == "detector")
                    train_weights(m.detector.make_examples(trees, m.vocab), w, topt);
                else if (head == "annotation")
                    train_weights(m.annotation.make_examples(trees), w, topt);
                else
                    train_weights(m.behavior.make_examples(trees), w, topt);
                if (out_path.empty()) out_path = head + ".weights";
                save_weights(w, out_path);
                std::printf("wrote %zu weights to %s\n", w.size(), out_path.c_str());
            }
            return 0;
        }
        if (run->parsed()) {
            Scenario scn = resolve_scenario(scenario_arg);
            Models models = obtain_models(models_dir, topt);
            BenchOptions opt;
            opt.max_cycles = max_cycles;
            RunMetrics m = run_scenario(scn, models, resolve_mode(mode_arg), seed, opt);
            print_run(m, trace);
            if (!csv_path.empty()) {
                bool fresh = !fs::exists(csv_path);
                std::ofstream csv(csv_path, std::ios::app);
                if (fresh) write_csv_header(csv);
                write_csv_row(csv, m);
            }
            if (!svg_path.empty()) write_svg(svg_path, scn, m.trajectory, m.final_map);
            return 0;
        }
        if (compare->parsed())
            return cmd_compare(scenario_arg, seeds, models_dir, out_dir, max_cycles, topt);
        if (repl->parsed()) return cmd_repl(scenario_arg, mode_arg, seed, models_dir, topt);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
