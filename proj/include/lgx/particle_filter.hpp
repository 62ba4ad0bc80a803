#pragma once

// Rao-Blackwellized particle filter over semantic graphs.  Each particle
// carries a full graph (sampled trajectory plus conditioned object map),
// a log weight, and its own random stream.  Data association is greedy
// nearest neighbour inside a chi-square gate; language annotations inject
// hypothesized nodes that negative information can later retire.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lgx/eif.hpp"
#include "lgx/geometry.hpp"
#include "lgx/heads.hpp"
#include "lgx/rng.hpp"
#include "lgx/semantic_graph.hpp"
#include "lgx/simworld.hpp"
#include "lgx/vocabulary.hpp"

namespace lgx {

struct DegenerateWeights : std::runtime_error {
    DegenerateWeights() : std::runtime_error("all particle weights underflowed") {}
};

struct FilterConfig {
    int num_particles = 10;

    // motion model; residual slip after wheel odometry, kept small because
    // heading error integrates into lateral map drift over long drives
    double odom_sigma_xy = 0.005;
    double odom_sigma_theta = 0.002;

    // measurement model; the third dimension is the unobserved orientation
    // of a detection, carried at a vacuous spread so the innovation stays
    // rank 3 alongside the chi-square(3) gate
    double meas_sigma = 0.15;
    double yaw_sigma = 10.0;
    double gate = 11.345;                 // chi-square(3) at 0.99

    double new_node_loglik = std::log(0.05);
    double miss_logprob = std::log(0.3);  // in-view hypothesis not detected
    int miss_limit = 3;

    // sensor geometry, mirrored from the world so negative information can
    // reason about what should have been seen
    double sensor_range = 4.5;
    double sensor_fov = 1.5707963267948966;
    double inspection_radius = 1.0;

    double container_extent = 0.3;        // nodes at least this big can contain
    double match_radius = 1.0;            // cross-particle identity for existence
    double hypothesis_prior_sigma = 1.0;  // anchor strength for hypothesized nodes
    double visibility_margin = 0.2;       // shrink for the expected-visible test
    double anchor_sigma_xy = 1e-3;        // initial pose prior
    double anchor_sigma_theta = 1e-3;
    double dirichlet = 0.1;               // type pseudo-count floor
};

struct Particle {
    SemanticGraph graph;
    double log_weight = 0.0;
    std::uint64_t stream = 0;
    Rng rng;
    // pose node id per sensing step; object-node counts differ between
    // particles, so graphs are addressed by step index rather than raw id
    std::vector<int> pose_ids;
    // (figure type, landmark node) -> cycle the hypothesis was disconfirmed;
    // annotation re-application must not recreate them, though stale entries
    // can be amnestied once the search runs out of other places to look
    std::map<std::pair<std::string, int>, int> exclusions;
};

struct UpdateStats {
    int associations = 0;
    int new_nodes = 0;
    int misses = 0;
    int pruned = 0;
    // map edits worth narrating, gathered across particles
    std::vector<std::pair<std::string, Vec2>> pruned_at;
    std::vector<std::pair<std::string, Vec2>> confirmed_at;
};

class ParticleFilter {
public:
    ParticleFilter(const FilterConfig& config, std::uint64_t seed)
        : cfg_(config), seed_(seed), rng_(derive_seed(seed, 0x70666c74ULL)) {
        if (cfg_.num_particles < 1) throw std::invalid_argument("need at least one particle");
        particles_.resize(static_cast<std::size_t>(cfg_.num_particles));
        for (auto& p : particles_) {
            p.stream = next_stream_++;
            p.rng = Rng(derive_seed(seed_, p.stream, 0x70617274ULL));
            p.log_weight = -std::log(static_cast<double>(cfg_.num_particles));
        }
    }

    const FilterConfig& config() const { return cfg_; }
    std::vector<Particle>& particles() { return particles_; }
    const std::vector<Particle>& particles() const { return particles_; }

    void init(const Pose2& start) {
        for (auto& p : particles_) {
            int id = p.graph.add_pose(start);
            p.graph.add_pose_prior(id, start, cfg_.anchor_sigma_xy, cfg_.anchor_sigma_theta);
            p.pose_ids.push_back(id);
        }
    }

    /// Append a pose node per particle, each proposing its own perturbation
    /// of the commanded motion.  Returns the step index of the new pose,
    /// shared by all particles.
    int predict(const Pose2& delta) {
        for (auto& p : particles_) {
            Pose2 noisy{delta.x + cfg_.odom_sigma_xy * p.rng.normal(),
                        delta.y + cfg_.odom_sigma_xy * p.rng.normal(),
                        wrap_angle(delta.theta + cfg_.odom_sigma_theta * p.rng.normal())};
            int prev = p.graph.last_pose;
            Pose2 pose = p.graph.node(prev).pose.compose(noisy);
            int cur = p.graph.add_pose(pose);
            p.graph.add_odom(prev, cur, noisy, cfg_.odom_sigma_xy, cfg_.odom_sigma_theta);
            p.pose_ids.push_back(cur);
        }
        return static_cast<int>(particles_.front().pose_ids.size()) - 1;
    }

    /// Fold a frame of detections into every particle.  Detections are body
    /// frame at pose step `pose_index`.  When `reweight` is set the
    /// association, new-node, and negative-information terms move the
    /// particle weights and the ensemble is renormalized; replayed history
    /// passes false and only edits the maps.  Negative information applies
    /// only to current frames (a replayed detector says nothing about what
    /// it missed).
    UpdateStats update(const std::vector<RawSighting>& detections, int pose_index, int cycle,
                       const std::vector<std::string>& active_detectors, bool reweight) {
        UpdateStats stats;
        std::set<std::string> active(active_detectors.begin(), active_detectors.end());
        for (auto& p : particles_) {
            double dlw = 0.0;
            int pose_node = p.pose_ids.at(static_cast<std::size_t>(pose_index));
            Pose2 sensed_from = p.graph.node(pose_node).pose;
            std::set<int> touched;
            for (const auto& det : detections) {
                Vec2 zw = sensed_from.transform_from(det.body);
                int best = -1;
                double best_d2 = cfg_.gate;
                for (int id : p.graph.live_objects()) {
                    const Node& n = p.graph.node(id);
                    if (n.type != det.type || n.carried || touched.count(id)) continue;
                    Vec2 dp = zw - p.graph.object_position(id);
                    double d2 = (dp.x * dp.x + dp.y * dp.y) /
                                (cfg_.meas_sigma * cfg_.meas_sigma);
                    if (d2 < best_d2) {
                        best_d2 = d2;
                        best = id;
                    }
                }
                if (best >= 0) {
                    Node& n = p.graph.node(best);
                    if (n.state == NodeState::Hypothesized)
                        stats.confirmed_at.emplace_back(n.type, zw);
                    n.state = NodeState::Confirmed;
                    n.miss_count = 0;
                    n.type_counts[det.type] += 1.0;
                    if (n.color.empty()) n.color = det.color;
                    if (n.container < 0) n.container = containing_node(p.graph, zw, best);
                    p.graph.add_obs(pose_node, best, det.body, cfg_.meas_sigma);
                    touched.insert(best);
                    ++stats.associations;
                    double det_s = cfg_.meas_sigma * cfg_.meas_sigma * cfg_.meas_sigma *
                                   cfg_.meas_sigma * cfg_.yaw_sigma * cfg_.yaw_sigma;
                    dlw += -0.5 * (best_d2 +
                                   std::log(8.0 * kPi * kPi * kPi * det_s));
                } else {
                    int id = p.graph.add_object(det.type, det.color, zw,
                                                NodeState::Confirmed, cycle, det.extent);
                    Node& n = p.graph.node(id);
                    n.type_counts[det.type] += 1.0;
                    n.container = containing_node(p.graph, zw, id);
                    p.graph.add_obs(pose_node, id, det.body, cfg_.meas_sigma);
                    touched.insert(id);
                    ++stats.new_nodes;
                    dlw += cfg_.new_node_loglik;
                }
            }
            if (reweight) {
                for (int id : p.graph.live_objects()) {
                    Node& n = p.graph.node(id);
                    if (n.state != NodeState::Hypothesized || touched.count(id)) continue;
                    if (!active.count(n.type)) continue;
                    if (!expected_visible(p.graph, sensed_from, n)) continue;
                    n.miss_count += 1;
                    dlw += cfg_.miss_logprob;
                    ++stats.misses;
                    if (n.miss_count >= cfg_.miss_limit) {
                        n.state = NodeState::Removed;
                        if (n.container >= 0) p.exclusions[{n.type, n.container}] = cycle;
                        ++stats.pruned;
                        stats.pruned_at.emplace_back(n.type, n.position);
                    }
                }
                p.log_weight += dlw;
            }
        }
        if (reweight) normalize();
        return stats;
    }

    /// Plant hypothesized figure nodes for relation annotations whose figure
    /// is not yet represented.  A hypothesis needs a live landmark of the
    /// stated type and attaches at its estimate; excluded (figure, landmark)
    /// pairs stay retired.  Type-only annotations add nothing here; unseen
    /// types are the planner's problem, not the map's.
    int apply_annotations(const AnnotationSet& ann, const Vocabulary& vocab, int cycle) {
        int added = 0;
        for (auto& p : particles_) {
            Pose2 viewer = p.graph.robot_pose();
            for (const auto& r : ann.relations) {
                if (satisfied(p.graph, r)) continue;
                int lm = -1;
                for (int id : p.graph.live_objects()) {
                    const Node& n = p.graph.node(id);
                    if (n.type != r.lm || n.carried) continue;
                    if (p.exclusions.count({r.fig, id})) continue;
                    if (lm < 0 || closer(p.graph, viewer, id, lm)) lm = id;
                }
                if (lm < 0) continue;
                Vec2 at = hypothesis_position(p.graph, r.rel, lm, viewer);
                double extent = 0.15;
                int ti = vocab.type_index(r.fig);
                if (ti >= 0) extent = vocab.types[ti].footprint;
                int id = p.graph.add_object(r.fig, "", at, NodeState::Hypothesized, cycle,
                                            extent);
                if (r.rel == "inside") p.graph.node(id).container = lm;
                // tether the guess to its landmark so it rides along as the
                // landmark estimate sharpens
                p.graph.add_rel_point(lm, id, at - p.graph.object_position(lm),
                                      cfg_.hypothesis_prior_sigma);
                ++added;
            }
        }
        return added;
    }

    /// Retire hypothesized nodes of `type` near `at` in every particle.
    /// The executive calls this when it has inspected a guess long enough
    /// without confirmation; per-particle negative information normally gets
    /// there first, but estimate spread can leave stragglers behind.
    int force_prune(const std::string& type, const Vec2& at, double radius, int cycle) {
        int pruned = 0;
        for (auto& p : particles_) {
            for (int id : p.graph.live_objects()) {
                Node& n = p.graph.node(id);
                if (n.state != NodeState::Hypothesized || n.type != type) continue;
                if (distance(p.graph.object_position(id), at) > radius) continue;
                n.state = NodeState::Removed;
                if (n.container >= 0) p.exclusions[{n.type, n.container}] = cycle;
                ++pruned;
            }
        }
        return pruned;
    }

    /// Remove live nodes of `type` near `at` regardless of state.  A grasp
    /// that closes on empty air is stronger evidence than any detector: the
    /// object is not where the map says, confirmed or not.  Contained nodes
    /// leave an exclusion so the same guess is not replanted immediately.
    int refute(const std::string& type, const Vec2& at, double radius, int cycle) {
        int removed = 0;
        for (auto& p : particles_) {
            for (int id : p.graph.live_objects()) {
                Node& n = p.graph.node(id);
                if (n.type != type || n.carried) continue;
                if (distance(p.graph.object_position(id), at) > radius) continue;
                n.state = NodeState::Removed;
                if (n.container >= 0) p.exclusions[{n.type, n.container}] = cycle;
                ++removed;
            }
        }
        return removed;
    }

    /// Free every exclusion for `fig` except the most recent one, in every
    /// particle. Called when the search space is exhausted: the freshest
    /// verdict stays trusted, older ones get a second look. Returns entries
    /// erased.
    int retire_stale_exclusions(const std::string& fig) {
        int erased = 0;
        for (auto& p : particles_) {
            int newest = -1;
            for (const auto& [key, cyc] : p.exclusions)
                if (key.first == fig && cyc > newest) newest = cyc;
            if (newest < 0) continue;
            bool kept = false;
            for (auto it = p.exclusions.begin(); it != p.exclusions.end();) {
                if (it->first.first != fig) {
                    ++it;
                    continue;
                }
                if (!kept && it->second == newest) {
                    kept = true;
                    ++it;
                    continue;
                }
                it = p.exclusions.erase(it);
                ++erased;
            }
        }
        return erased;
    }

    /// One incremental estimator sweep per particle; particles whose graphs
    /// gained no edges since the last sweep are skipped.
    void solve_metric() {
        for (auto& p : particles_) {
            if (p.graph.solved_edges >= static_cast<int>(p.graph.edges.size())) continue;
            Eif::solve(p.graph);
        }
    }

    double ess() const {
        double s2 = 0.0;
        for (const auto& p : particles_) {
            double w = std::exp(p.log_weight);
            s2 += w * w;
        }
        return 1.0 / s2;
    }

    double weight_sum() const {
        double s = 0.0;
        for (const auto& p : particles_) s += std::exp(p.log_weight);
        return s;
    }

    /// Systematic resampling when the effective sample size drops below
    /// half the ensemble.  Children restart at uniform weight with fresh
    /// random streams so duplicated particles diverge again.
    bool maybe_resample() {
        double n = static_cast<double>(particles_.size());
        if (ess() >= n / 2.0) return false;
        double u = rng_.uniform();
        std::vector<Particle> next;
        next.reserve(particles_.size());
        double cum = std::exp(particles_[0].log_weight);
        std::size_t j = 0;
        for (std::size_t i = 0; i < particles_.size(); ++i) {
            double target = (static_cast<double>(i) + u) / n;
            while (target > cum && j + 1 < particles_.size()) {
                ++j;
                cum += std::exp(particles_[j].log_weight);
            }
            Particle child = particles_[j];
            child.log_weight = -std::log(n);
            child.stream = next_stream_++;
            child.rng = Rng(derive_seed(seed_, child.stream, 0x70617274ULL));
            next.push_back(std::move(child));
        }
        particles_ = std::move(next);
        return true;
    }

    /// Copy of the heaviest particle's graph with cross-particle existence
    /// marginals: each object's existence is the total weight of particles
    /// holding a live object of the same type within the match radius.
    SemanticGraph marginal_map() const {
        std::size_t best = 0;
        for (std::size_t i = 1; i < particles_.size(); ++i)
            if (particles_[i].log_weight > particles_[best].log_weight) best = i;
        SemanticGraph g = particles_[best].graph;
        for (auto& n : g.nodes) {
            if (n.kind != NodeKind::Object || n.state == NodeState::Removed) continue;
            double mass = 0.0;
            for (const auto& p : particles_) {
                bool found = false;
                for (int id : p.graph.live_objects()) {
                    const Node& m = p.graph.node(id);
                    if (m.type == n.type &&
                        distance(p.graph.object_position(id), g.object_position(n.id)) <=
                            cfg_.match_radius) {
                        found = true;
                        break;
                    }
                }
                if (found) mass += std::exp(p.log_weight);
            }
            n.existence = mass;
        }
        return g;
    }

    /// Posterior over an object node's class from its detection pseudo-counts
    /// under a symmetric Dirichlet prior across `num_types` classes.
    double type_posterior(const Node& n, const std::string& type, int num_types) const {
        double total = 0.0;
        for (const auto& [k, v] : n.type_counts) total += v;
        double count = 0.0;
        auto it = n.type_counts.find(type);
        if (it != n.type_counts.end()) count = it->second;
        return (count + cfg_.dirichlet) /
               (total + cfg_.dirichlet * static_cast<double>(num_types));
    }

    /// Mark the node carried in every particle: the goal estimate is matched
    /// by type within the match radius.  Also marks the world-truth pick.
    void mark_carried(const std::string& type, const Vec2& at) {
        for (auto& p : particles_) {
            int best = -1;
            double best_d = cfg_.match_radius;
            for (int id : p.graph.live_objects()) {
                const Node& n = p.graph.node(id);
                if (n.type != type || n.carried) continue;
                double d = distance(p.graph.object_position(id), at);
                if (d <= best_d) {
                    best_d = d;
                    best = id;
                }
            }
            if (best >= 0) p.graph.node(best).carried = true;
        }
    }

private:
    static constexpr double kPi = 3.14159265358979323846;

    void normalize() {
        double mx = -std::numeric_limits<double>::infinity();
        for (const auto& p : particles_) mx = std::max(mx, p.log_weight);
        if (!std::isfinite(mx)) throw DegenerateWeights();
        double s = 0.0;
        for (const auto& p : particles_) s += std::exp(p.log_weight - mx);
        double log_z = mx + std::log(s);
        for (auto& p : particles_) p.log_weight -= log_z;
    }

    int containing_node(const SemanticGraph& g, const Vec2& at, int self) const {
        for (int id : g.live_objects()) {
            if (id == self) continue;
            const Node& n = g.node(id);
            if (n.extent < cfg_.container_extent || n.carried) continue;
            if (distance(g.object_position(id), at) <= n.extent) return id;
        }
        return -1;
    }

    // Negative information is only trustworthy away from sensing boundaries.
    // The world applies range, cone and inspection rules to true positions;
    // this test only has estimates, so it shrinks every limit by a margin to
    // keep estimate error from turning a boundary case into a false miss.
    bool expected_visible(const SemanticGraph& g, const Pose2& from, const Node& n) const {
        Vec2 at = n.position;
        if (n.container >= 0) {
            if (!g.is_live_object(n.container)) return false;
            at = g.object_position(n.container);
            if (distance(from.position(), at) >
                cfg_.inspection_radius - cfg_.visibility_margin)
                return false;
        }
        if (distance(from.position(), at) > cfg_.sensor_range - cfg_.visibility_margin)
            return false;
        double rel = wrap_angle(bearing_to(from, at) - from.theta);
        return std::abs(rel) <= cfg_.sensor_fov / 2.0 - 0.1;
    }

    // An annotation needs no new hypothesis while the relation already holds
    // somewhere in the map, or while an earlier guess for the same figure is
    // still live and untested.
    bool satisfied(const SemanticGraph& g, const RelationAnnotation& r) const {
        Pose2 viewer = g.robot_pose();
        for (int fig : g.live_objects()) {
            if (g.node(fig).type != r.fig) continue;
            if (g.node(fig).state == NodeState::Hypothesized) return true;
            for (int lm : g.live_objects()) {
                if (lm == fig || g.node(lm).type != r.lm) continue;
                if (rel_holds(g, r.rel, fig, lm, viewer)) return true;
            }
        }
        return false;
    }

    bool closer(const SemanticGraph& g, const Pose2& viewer, int a, int b) const {
        return distance(viewer.position(), g.object_position(a)) <
               distance(viewer.position(), g.object_position(b));
    }

    Vec2 hypothesis_position(const SemanticGraph& g, const std::string& rel, int lm,
                             const Pose2& viewer) const {
        Vec2 at = g.object_position(lm);
        if (rel == "inside") return at;
        Vec2 to_lm = at - viewer.position();
        double norm = to_lm.norm();
        Vec2 dir = norm > 1e-9 ? Vec2{to_lm.x / norm, to_lm.y / norm} : Vec2{1.0, 0.0};
        if (rel == "near") return at + Vec2{dir.x, dir.y};
        Vec2 left{-dir.y, dir.x};
        if (rel == "left_of") return at + left;
        if (rel == "right_of") return at - left;
        return at;
    }

    FilterConfig cfg_;
    std::uint64_t seed_;
    Rng rng_;
    std::uint64_t next_stream_ = 0;
    std::vector<Particle> particles_;
};

}  // namespace lgx
