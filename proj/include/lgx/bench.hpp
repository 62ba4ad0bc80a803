#pragma once

// Scenario bench: run one (scenario, perception mode, seed) cell, collect
// the numbers the efficiency story is told with, and print side-by-side
// comparisons across modes and seeds.

#include <cstdio>
#include <string>
#include <vector>

#include "lgx/executive.hpp"
#include "lgx/models.hpp"
#include "lgx/particle_filter.hpp"
#include "lgx/perception.hpp"
#include "lgx/simworld.hpp"

namespace lgx {

struct BenchOptions {
    int max_cycles = 2000;
    WorldOptions world;            // noise profile
    ExecutiveConfig executive;
};

struct RunMetrics {
    std::string scenario;
    PerceptionMode mode = PerceptionMode::Adaptive;
    std::uint64_t seed = 0;

    bool completed_all = false;
    int cycles = 0;
    double sim_time = 0.0;
    double classifier_cost = 0.0;   // per-cycle loop costs, summed
    double replay_cost = 0.0;
    double mean_loop_cost = 0.0;
    double behavior_time = 0.0;     // modeled grounding time, summed
    double mean_behavior_time = 0.0;  // per grounding pass over one world
    int objects_confirmed = 0;
    int behavior_inferences = 0;
    std::vector<TaskRecord> tasks;
    std::vector<TraceEvent> trace;
    std::vector<Pose2> trajectory;
    SemanticGraph final_map;
};

inline Registry scenario_registry(const Scenario& s) {
    return s.registry == "outdoor" ? Registry::builtin_outdoor() : Registry::builtin_indoor();
}

inline RunMetrics run_scenario(const Scenario& scenario, const Models& models,
                               PerceptionMode mode, std::uint64_t seed,
                               const BenchOptions& opt = BenchOptions()) {
    Registry reg = scenario_registry(scenario);
    SimWorld world(scenario, reg, models.vocab, seed, opt.world);
    PerceptionPipeline pipeline(reg, mode);

    FilterConfig fc;
    fc.num_particles = scenario.particles;
    fc.sensor_range = reg.range;
    fc.sensor_fov = opt.world.sensor_fov;
    fc.inspection_radius = opt.world.inspection_radius;
    ParticleFilter filter(fc, seed);

    Executive exec(world, pipeline, filter, models, opt.executive);
    auto result = exec.run(opt.max_cycles);

    RunMetrics m;
    m.scenario = scenario.name;
    m.mode = mode;
    m.seed = seed;
    m.completed_all = result.completed_all;
    m.cycles = result.cycles;
    m.sim_time = exec.sim_time();
    m.classifier_cost = exec.classifier_cost();
    m.replay_cost = exec.replay_cost();
    m.mean_loop_cost = m.cycles > 0 ? m.classifier_cost / m.cycles : 0.0;
    m.behavior_time = exec.behavior_time();
    m.behavior_inferences = exec.behavior_inferences();
    m.mean_behavior_time =
        m.behavior_inferences > 0 ? m.behavior_time / m.behavior_inferences : 0.0;
    m.tasks = exec.tasks();
    m.trace = exec.trace();
    m.trajectory = exec.trajectory();
    m.final_map = filter.marginal_map();
    for (const auto& n : m.final_map.nodes)
        if (n.kind == NodeKind::Object && n.state == NodeState::Confirmed)
            ++m.objects_confirmed;
    return m;
}

struct BenchSummary {
    std::string scenario;
    PerceptionMode mode;
    int runs = 0;
    int completed = 0;
    double mean_sim_time = 0.0;
    double mean_cycles = 0.0;
    double mean_loop_cost = 0.0;
    double mean_classifier_cost = 0.0;
    double mean_replay_cost = 0.0;
    double mean_behavior_time = 0.0;
    double mean_objects = 0.0;
    double mean_task1_time = 0.0;
};

inline BenchSummary summarize(const std::vector<RunMetrics>& runs) {
    BenchSummary s;
    if (runs.empty()) return s;
    s.scenario = runs.front().scenario;
    s.mode = runs.front().mode;
    for (const auto& r : runs) {
        ++s.runs;
        if (r.completed_all) ++s.completed;
        s.mean_sim_time += r.sim_time;
        s.mean_cycles += r.cycles;
        s.mean_loop_cost += r.mean_loop_cost;
        s.mean_classifier_cost += r.classifier_cost;
        s.mean_replay_cost += r.replay_cost;
        s.mean_behavior_time += r.mean_behavior_time;
        s.mean_objects += r.objects_confirmed;
        if (!r.tasks.empty()) s.mean_task1_time += r.tasks.front().completed_time;
    }
    double n = static_cast<double>(s.runs);
    s.mean_sim_time /= n;
    s.mean_cycles /= n;
    s.mean_loop_cost /= n;
    s.mean_classifier_cost /= n;
    s.mean_replay_cost /= n;
    s.mean_behavior_time /= n;
    s.mean_objects /= n;
    s.mean_task1_time /= n;
    return s;
}

inline std::string format_comparison(const BenchSummary& ap, const BenchSummary& ep) {
    char buf[1024];
    std::string out;
    std::snprintf(buf, sizeof(buf), "scenario: %s (%d seeds)\n", ap.scenario.c_str(), ap.runs);
    out += buf;
    std::snprintf(buf, sizeof(buf), "%-28s %12s %12s\n", "", "adaptive", "exhaustive");
    out += buf;
    auto row = [&](const char* name, double a, double e) {
        std::snprintf(buf, sizeof(buf), "%-28s %12.3f %12.3f\n", name, a, e);
        out += buf;
    };
    row("completed runs", ap.completed, ep.completed);
    row("mean cycles", ap.mean_cycles, ep.mean_cycles);
    row("mean sim time [s]", ap.mean_sim_time, ep.mean_sim_time);
    row("behavior inf time [s/world]", ap.mean_behavior_time, ep.mean_behavior_time);
    row("mean loop cost [s/cycle]", ap.mean_loop_cost, ep.mean_loop_cost);
    row("mean classifier time [s]", ap.mean_classifier_cost, ep.mean_classifier_cost);
    row("mean replay time [s]", ap.mean_replay_cost, ep.mean_replay_cost);
    row("mean task-1 time [s]", ap.mean_task1_time, ep.mean_task1_time);
    row("mean objects mapped", ap.mean_objects, ep.mean_objects);
    return out;
}

}  // namespace lgx
