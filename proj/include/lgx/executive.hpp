#pragma once

// Closed-loop controller: issues scripted instructions, steers the robot,
// runs perception and the particle filter, grounds behaviors against each
// particle, and picks the next goal by expected utility.  One step() call
// is one control cycle; simulated time advances by the cost model, not by
// wall clock.

#include <cmath>
#include <cstdio>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lgx/heads.hpp"
#include "lgx/models.hpp"
#include "lgx/particle_filter.hpp"
#include "lgx/perception.hpp"
#include "lgx/planner.hpp"
#include "lgx/simworld.hpp"

namespace lgx {

/// Goal attractiveness falls off with distance as a broad Gaussian.
inline double psi(double dist) { return std::exp(-dist * dist / 10.0); }

/// Greedy rule: closer, likelier, heavier wins.  A pure product, so the
/// winner is indifferent to any common rescaling of the particle weights.
inline double behavior_score(double dist, double likelihood, double weight) {
    return psi(dist) * likelihood * weight;
}

struct ExecutiveConfig {
    double step_length = 0.3;      // metres per cycle along the path
    double turn_step = 0.7853981633974483;  // scan increment, 45 degrees
    double speed = 1.0;            // metres per second
    double turn_time = 0.3;        // seconds per full scan increment
    double completion_radius = 1.0;
    double approach_radius = 0.7;
    // inspections park tighter than frontier visits: the robot must end up
    // inside the true inspection radius even after estimate error
    double inspect_approach = 0.55;  // stop driving and face the goal
    double goal_shift_replan = 0.5;
    // act only on confident groundings; with the referent missing from the
    // map the head falls back to the best wrong candidate at a visibly
    // lower likelihood (about 0.80 against 0.87 and up for a present
    // referent), and the right response there is to keep searching
    double min_likelihood = 0.85;
    double explore_min_dist = 1.0;  // commit to frontiers at least this far out
    int scan_steps = 8;            // full turn at each exploration station
    // cycles spent parked at an unconfirmed goal before writing it off;
    // negative information usually prunes sooner, but a particle whose
    // estimates drifted can hold a guess the robot cannot disprove from here
    int inspect_patience = 12;
    // consecutive failed grasps before the goal node is refuted; the arm
    // reaching through a confirmed estimate and closing on nothing means the
    // map frame slid, and standing there will not fix it
    int pick_patience = 6;
    int stuck_limit = 50;          // cycles without progress before replanning
    int solve_interval = 25;       // estimator housekeeping period
    double behavior_time_base = 0.011;     // seconds per grounding pass
    double behavior_time_per_node = 0.001; // plus per candidate node
};

struct TraceEvent {
    int cycle = 0;
    std::string kind;   // issue, replay, plant, prune, refute, select, explore, complete
    std::string what;
    Vec2 pos;

    std::string to_string() const {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "[%d] %s %s (%.2f,%.2f)", cycle, kind.c_str(),
                      what.c_str(), pos.x, pos.y);
        return buf;
    }
};

struct TaskRecord {
    std::string instruction;
    std::string btype;
    int issued_cycle = -1;
    int completed_cycle = -1;
    double issued_time = 0.0;
    double completed_time = 0.0;
    double replay_cost = 0.0;
};

struct Selection {
    int particle = -1;
    int goal = -1;
    std::string btype;
    double score = 0.0;
    Vec2 goal_pos;
    Vec2 inspect_pos;  // where to stand: the container estimate for contained goals

    bool valid() const { return particle >= 0; }
    // selections agree when they mean the same physical target; node ids
    // differ across particles for the same object, so compare by kind and
    // place rather than identity
    bool same_target(const Selection& o, double tol) const {
        return btype == o.btype && distance(goal_pos, o.goal_pos) <= tol;
    }
};

class Executive {
public:
    Executive(SimWorld& world, PerceptionPipeline& pipeline, ParticleFilter& filter,
              const Models& models, const ExecutiveConfig& cfg = ExecutiveConfig())
        : world_(world), pipeline_(pipeline), filter_(filter), models_(models), cfg_(cfg),
          grid_(world.scenario().width, world.scenario().height) {
        for (const auto& w : world_.scenario().walls)
            grid_.block_rect(w.x0, w.y0, w.x1, w.y1, true);
        filter_.init(world_.robot());
        last_position_ = world_.robot().position();
        scan_remaining_ = cfg_.scan_steps;  // look around before moving anywhere
    }

    int cycle() const { return cycle_; }
    double sim_time() const { return time_; }
    double classifier_cost() const { return classifier_cost_; }
    double replay_cost() const { return replay_cost_; }
    double behavior_time() const { return behavior_time_; }
    int behavior_inferences() const { return behavior_inferences_; }
    const std::vector<TaskRecord>& tasks() const { return done_tasks_; }
    const std::vector<TraceEvent>& trace() const { return trace_; }
    const OccupancyGrid& grid() const { return grid_; }
    const std::vector<Pose2>& trajectory() const { return trajectory_; }
    const Selection& selection() const { return selection_; }

    bool finished() const {
        return !task_ && said_.empty() && script_next_ >= world_.scenario().script.size();
    }

    /// Queue an instruction as if the script contained it next; it is
    /// issued once the current task (if any) completes.  Parses eagerly so
    /// a bad utterance reports NoParse here instead of poisoning the queue.
    void say(const std::string& text) {
        models_.grammar.parse(text);
        said_.push_back(text);
    }

    /// Run one control cycle.  Returns false once every scripted task has
    /// completed.  The cycle itself runs regardless, so an interactive
    /// session can keep sensing and mapping with nothing left to do.
    bool step() {
        maybe_issue();
        Pose2 delta = move();
        int pose_index = filter_.predict(delta);
        SenseResult sensed = pipeline_.sense(world_, cycle_, pose_index);
        time_ += sensed.cost;
        classifier_cost_ += sensed.cost;
        UpdateStats stats =
            filter_.update(sensed.detections, pose_index, cycle_, pipeline_.active(), true);
        note_map_events(stats);
        int planted = 0;
        if (task_) {
            planted = filter_.apply_annotations(annotations_, models_.vocab, cycle_);
            if (planted > 0) {
                dirty_ = true;
                note_plants();
            }
        }
        bool solve_due = stats.new_nodes > 0 || stats.pruned > 0 || planted > 0 ||
                         replayed_ || cycle_ % cfg_.solve_interval == 0;
        replayed_ = false;
        if (solve_due) filter_.solve_metric();
        if (filter_.maybe_resample()) dirty_ = true;
        if (stats.new_nodes > 0 || stats.pruned > 0) dirty_ = true;
        grid_.mark_seen(estimate_pose(), world_.range(), world_.fov());
        if (task_) {
            if (dirty_) reground();
            reselect();
            check_patience();
            check_completion();
            check_stuck();
        }
        trajectory_.push_back(world_.robot());
        ++cycle_;
        return !finished();
    }

    struct RunResult {
        bool completed_all = false;
        int cycles = 0;
    };

    RunResult run(int max_cycles) {
        while (cycle_ < max_cycles && !finished()) step();
        return {finished(), cycle_};
    }

private:
    void maybe_issue() {
        if (task_) return;
        std::string instruction;
        if (!said_.empty()) {
            instruction = said_.front();
            said_.pop_front();
        } else if (script_next_ < world_.scenario().script.size()) {
            const ScriptEvent& ev = world_.scenario().script[script_next_];
            if (cycle_ < ev.at_cycle) return;
            ++script_next_;
            instruction = ev.instruction;
        } else {
            return;
        }

        tree_ = models_.grammar.parse(instruction);
        std::vector<std::string> wanted = models_.detector.select(tree_);
        std::vector<std::string> added = pipeline_.configure(wanted);
        annotations_ = models_.annotation.infer(tree_);

        TaskRecord t;
        t.instruction = instruction;
        t.issued_cycle = cycle_;
        t.issued_time = time_;
        task_ = t;

        std::string detail = instruction + " | detectors=";
        for (std::size_t i = 0; i < wanted.size(); ++i)
            detail += (i ? "," : "") + wanted[i];
        log(cycle_, "issue", detail, world_.robot().position());

        if (!added.empty()) {
            ReplayResult rep = pipeline_.replay(added);
            if (rep.frames > 0) {
                std::map<int, std::vector<RawSighting>> by_pose;
                for (const auto& [pose_index, s] : rep.detections)
                    by_pose[pose_index].push_back(s);
                for (const auto& [pose_index, dets] : by_pose)
                    filter_.update(dets, pose_index, cycle_, pipeline_.active(), false);
                time_ += rep.cost;
                replay_cost_ += rep.cost;
                task_->replay_cost = rep.cost;
                replayed_ = true;
                dirty_ = true;
                char buf[128];
                std::snprintf(buf, sizeof(buf), "frames=%d detections=%zu cost=%.3f",
                              rep.frames, rep.detections.size(), rep.cost);
                log(cycle_, "replay", buf, world_.robot().position());
            }
        }
        selection_ = Selection{};
        path_.clear();
        dead_frontiers_.clear();
        dirty_ = true;
        progress_cycle_ = cycle_;
    }

    Pose2 move() {
        Pose2 before = world_.robot();
        if (!path_.empty()) {
            double budget = cfg_.step_length;
            Vec2 at = before.position();
            Vec2 heading_dir{std::cos(before.theta), std::sin(before.theta)};
            while (budget > 1e-9 && !path_.empty()) {
                Vec2 to = path_.front() - at;
                double d = to.norm();
                if (d < 1e-9) {
                    path_.pop_front();
                    continue;
                }
                if (d <= budget) {
                    at = path_.front();
                    path_.pop_front();
                    budget -= d;
                    heading_dir = to;
                } else {
                    at = at + Vec2{to.x / d * budget, to.y / d * budget};
                    heading_dir = to;
                    budget = 0.0;
                }
            }
            double heading = std::atan2(heading_dir.y, heading_dir.x);
            world_.move_to(Pose2{at.x, at.y, heading});
            double moved = distance(before.position(), at);
            time_ += moved / cfg_.speed;
        } else if (selection_.valid()) {
            face(selection_.goal_pos);
        } else if (scan_remaining_ > 0) {
            --scan_remaining_;
            world_.turn(cfg_.turn_step);
            time_ += cfg_.turn_time;
        } else if (explore_goal_) {
            face(*explore_goal_);
        } else {
            world_.turn(cfg_.turn_step);
            time_ += cfg_.turn_time;
        }
        return before.between(world_.robot());
    }

    void face(const Vec2& target) {
        Pose2 r = world_.robot();
        if (distance(r.position(), target) < 1e-6) return;
        double want = std::atan2(target.y - r.y, target.x - r.x);
        double dtheta = wrap_angle(want - r.theta);
        if (std::abs(dtheta) < 1e-6) return;
        double turn = std::clamp(dtheta, -cfg_.turn_step, cfg_.turn_step);
        world_.turn(turn);
        time_ += cfg_.turn_time * std::abs(turn) / cfg_.turn_step;
    }

    Pose2 estimate_pose() const {
        const auto& ps = filter_.particles();
        std::size_t best = 0;
        for (std::size_t i = 1; i < ps.size(); ++i)
            if (ps[i].log_weight > ps[best].log_weight) best = i;
        return ps[best].graph.robot_pose();
    }

    void reground() {
        candidates_.clear();
        const auto& ps = filter_.particles();
        candidates_.resize(ps.size());
        for (std::size_t i = 0; i < ps.size(); ++i) {
            const SemanticGraph& g = ps[i].graph;
            int live = static_cast<int>(g.live_objects().size());
            double dt = cfg_.behavior_time_base + cfg_.behavior_time_per_node * live;
            time_ += dt;
            behavior_time_ += dt;
            ++behavior_inferences_;
            if (live == 0) continue;
            candidates_[i] = models_.behavior.infer(tree_, g, g.robot_pose());
        }
        dirty_ = false;
    }

    void reselect() {
        Selection best;
        const auto& ps = filter_.particles();
        for (std::size_t i = 0; i < ps.size() && i < candidates_.size(); ++i) {
            const SemanticGraph& g = ps[i].graph;
            double w = std::exp(ps[i].log_weight);
            Pose2 robot = g.robot_pose();
            for (const auto& c : candidates_[i]) {
                if (c.likelihood < cfg_.min_likelihood) continue;
                if (c.goal < 0 || c.goal >= static_cast<int>(g.nodes.size())) continue;
                if (!g.is_live_object(c.goal) || g.node(c.goal).carried) continue;
                Vec2 at = g.object_position(c.goal);
                double score =
                    behavior_score(distance(robot.position(), at), c.likelihood, w);
                if (score > best.score) {
                    best.particle = static_cast<int>(i);
                    best.goal = c.goal;
                    best.btype = c.btype;
                    best.score = score;
                    best.goal_pos = at;
                    // a contained goal is checked from its container, so
                    // stand there rather than at the guessed point
                    best.inspect_pos = at;
                    int box = g.node(c.goal).container;
                    if (box >= 0 && g.is_live_object(box))
                        best.inspect_pos = g.object_position(box);
                }
            }
        }
        if (!best.valid()) {
            selection_ = Selection{};
            explore();
            return;
        }
        explore_goal_.reset();
        scan_remaining_ = 0;
        bool changed =
            !selection_.valid() || !selection_.same_target(best, cfg_.goal_shift_replan);
        selection_ = best;
        if (changed) {
            log(cycle_, "select", best.btype, best.goal_pos);
            progress_cycle_ = cycle_;
            camped_cycles_ = 0;
            failed_picks_ = 0;
            plan_to(selection_.inspect_pos, cfg_.inspect_approach);
        } else if (need_path()) {
            plan_to(selection_.inspect_pos, cfg_.inspect_approach);
        }
    }

    bool need_path() const {
        if (!path_.empty()) return false;
        return distance(world_.robot().position(), selection_.inspect_pos) >
               cfg_.inspect_approach + 1e-9;
    }

    void explore() {
        if (scan_remaining_ > 0) return;  // sweeping the current station
        if (explore_goal_) {
            if (!path_.empty()) return;  // en route
            if (distance(world_.robot().position(), *explore_goal_) <=
                cfg_.approach_radius) {
                explore_goal_.reset();
                scan_remaining_ = cfg_.scan_steps;  // arrived; sweep before moving on
                return;
            }
            plan_to(*explore_goal_);  // path was dropped; try again or give up
            if (!path_.empty()) return;
            dead_frontiers_.insert(frontier_key(*explore_goal_));
            explore_goal_.reset();
        }
        // walk the frontier list nearest first; remember the ones that cannot
        // be planned to, or the same cell gets picked forever
        Vec2 from = estimate_pose().position();
        auto cells = grid_.frontier_cells(from, cfg_.explore_min_dist);
        for (const Vec2& c : cells) {
            if (dead_frontiers_.count(frontier_key(c))) continue;
            plan_to(c);
            if (path_.empty() &&
                distance(world_.robot().position(), c) > cfg_.approach_radius) {
                dead_frontiers_.insert(frontier_key(c));
                continue;
            }
            explore_goal_ = c;
            starved_ = 0;
            log(cycle_, "explore", "frontier", c);
            return;
        }
        if (!cells.empty() && ++starved_ < 3) {
            // everything left is blacklisted; estimates may have moved, so
            // retry with a clean slate a few times before giving up
            dead_frontiers_.clear();
            return;
        }
        // nowhere left to look. If an unresolved task pruned its way through
        // every landmark, one of those verdicts may be a boundary-case
        // mistake: free all but the freshest and check them again.
        if (!task_ || selection_.valid()) return;
        int freed = 0;
        for (const auto& r : annotations_.relations)
            freed += filter_.retire_stale_exclusions(r.fig);
        if (freed > 0) {
            log(cycle_, "amnesty", "revisit pruned landmarks", world_.robot().position());
            dirty_ = true;
        }
    }

    std::pair<int, int> frontier_key(const Vec2& c) const { return grid_.cell_of(c); }

    void plan_to(const Vec2& goal) { plan_to(goal, cfg_.approach_radius); }

    void plan_to(const Vec2& goal, double approach) {
        grid_.reset_dynamic();
        const auto& ps = filter_.particles();
        std::size_t best = 0;
        for (std::size_t i = 1; i < ps.size(); ++i)
            if (ps[i].log_weight > ps[best].log_weight) best = i;
        const SemanticGraph& g = ps[best].graph;
        for (int id : g.live_objects()) {
            const Node& n = g.node(id);
            if (n.state != NodeState::Confirmed || n.carried) continue;
            if (n.extent < filter_.config().container_extent) continue;
            if (distance(g.object_position(id), goal) <= n.extent + 1e-9) continue;
            grid_.block_disc(g.object_position(id), n.extent);
        }
        auto plan = astar(grid_, world_.robot().position(), goal);
        path_.clear();
        if (!plan) return;
        for (const auto& w : plan->waypoints) path_.push_back(w);
        // drop waypoints inside the approach radius of the goal
        while (!path_.empty() &&
               distance(path_.back(), goal) + 1e-9 < approach - grid_.resolution())
            path_.pop_back();
        if (!path_.empty()) path_.pop_front();  // first waypoint is the robot cell
    }

    void check_completion() {
        if (!task_ || !selection_.valid()) return;
        const auto& ps = filter_.particles();
        const SemanticGraph& g = ps[static_cast<std::size_t>(selection_.particle)].graph;
        if (!g.is_live_object(selection_.goal)) return;
        const Node& n = g.node(selection_.goal);
        if (n.state != NodeState::Confirmed) return;
        Vec2 at = g.object_position(selection_.goal);
        if (distance(world_.robot().position(), at) > cfg_.completion_radius) {
            failed_picks_ = 0;
            return;
        }
        if (selection_.btype != "navigate") {
            if (world_.pick(n.type) < 0) {
                if (++failed_picks_ <= cfg_.pick_patience) return;
                // the estimate is confirmed and the arm still finds nothing;
                // drop the node everywhere and go looking again
                filter_.refute(n.type, at, filter_.config().match_radius, cycle_);
                log(cycle_, "refute", n.type, at);
                failed_picks_ = 0;
                selection_ = Selection{};
                path_.clear();
                dirty_ = true;
                return;
            }
            failed_picks_ = 0;
            filter_.mark_carried(n.type, at);
        }
        task_->btype = selection_.btype;
        task_->completed_cycle = cycle_;
        task_->completed_time = time_;
        log(cycle_, "complete", task_->btype + " " + task_->instruction, at);
        done_tasks_.push_back(*task_);
        task_.reset();
        annotations_ = AnnotationSet{};
        selection_ = Selection{};
        candidates_.clear();
        path_.clear();
        explore_goal_.reset();
        dirty_ = true;
    }

    // When the goal estimate and the real world disagree the robot can camp
    // next to a hypothesis that never confirms (the filter thinks the spot is
    // out of view of the container it is tied to). Give up after a while and
    // retire that guess everywhere so selection moves on.
    void check_patience() {
        if (!selection_.valid()) { camped_cycles_ = 0; return; }
        const auto& ps = filter_.particles();
        const SemanticGraph& g = ps[static_cast<std::size_t>(selection_.particle)].graph;
        if (!g.is_live_object(selection_.goal) ||
            g.node(selection_.goal).state == NodeState::Confirmed) {
            camped_cycles_ = 0;
            return;
        }
        if (distance(world_.robot().position(), selection_.goal_pos) >
            cfg_.completion_radius) {
            camped_cycles_ = 0;
            return;
        }
        if (++camped_cycles_ <= cfg_.inspect_patience) return;
        std::string type = g.node(selection_.goal).type;
        int n = filter_.force_prune(type, selection_.goal_pos,
                                    filter_.config().match_radius, cycle_);
        if (n > 0) log_once("prune", type, selection_.goal_pos);
        camped_cycles_ = 0;
        selection_ = Selection{};
        path_.clear();
        dirty_ = true;
    }

    void check_stuck() {
        Vec2 now = world_.robot().position();
        if (distance(now, last_position_) > 0.1) {
            last_position_ = now;
            progress_cycle_ = cycle_;
            return;
        }
        if (cycle_ - progress_cycle_ <= cfg_.stuck_limit) return;
        progress_cycle_ = cycle_;
        path_.clear();
        explore_goal_.reset();
        dead_frontiers_.clear();  // estimates moved; dead cells may be live now
        dirty_ = true;            // rebuild candidates and try again
    }

    void note_map_events(const UpdateStats& stats) {
        for (const auto& [type, pos] : stats.pruned_at)
            log_once("prune", type, pos);
        for (const auto& [type, pos] : stats.confirmed_at)
            log_once("confirm", type, pos);
    }

    void note_plants() {
        // report hypotheses from the heaviest particle so the trace shows
        // one coherent story
        const auto& ps = filter_.particles();
        std::size_t best = 0;
        for (std::size_t i = 1; i < ps.size(); ++i)
            if (ps[i].log_weight > ps[best].log_weight) best = i;
        const SemanticGraph& g = ps[best].graph;
        for (const auto& n : g.nodes) {
            if (n.kind != NodeKind::Object || n.state != NodeState::Hypothesized) continue;
            log_once("plant", n.type, n.position);
        }
    }

    void log(int cycle, const std::string& kind, const std::string& what, const Vec2& pos) {
        trace_.push_back(TraceEvent{cycle, kind, what, pos});
    }

    void log_once(const std::string& kind, const std::string& what, const Vec2& pos) {
        char key[160];
        std::snprintf(key, sizeof(key), "%s|%s|%.0f|%.0f", kind.c_str(), what.c_str(),
                      pos.x * 2.0, pos.y * 2.0);
        if (!logged_.insert(key).second) return;
        log(cycle_, kind, what, pos);
    }

    SimWorld& world_;
    PerceptionPipeline& pipeline_;
    ParticleFilter& filter_;
    const Models& models_;
    ExecutiveConfig cfg_;
    OccupancyGrid grid_;

    int cycle_ = 0;
    double time_ = 0.0;
    double classifier_cost_ = 0.0;
    double replay_cost_ = 0.0;
    double behavior_time_ = 0.0;
    int behavior_inferences_ = 0;
    bool dirty_ = false;
    bool replayed_ = false;

    std::size_t script_next_ = 0;
    std::deque<std::string> said_;
    std::optional<TaskRecord> task_;
    ParseTree tree_;
    AnnotationSet annotations_;
    std::vector<std::vector<BehaviorCandidate>> candidates_;
    Selection selection_;
    std::deque<Vec2> path_;
    std::optional<Vec2> explore_goal_;
    std::vector<TaskRecord> done_tasks_;
    std::vector<TraceEvent> trace_;
    std::vector<Pose2> trajectory_;
    std::set<std::string> logged_;
    std::set<std::pair<int, int>> dead_frontiers_;
    Vec2 last_position_;
    int progress_cycle_ = 0;
    int scan_remaining_ = 0;
    int camped_cycles_ = 0;
    int failed_picks_ = 0;
    int starved_ = 0;
};

}  // namespace lgx
