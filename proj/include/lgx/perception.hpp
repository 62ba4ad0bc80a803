#pragma once

// Perception front end.  Wraps the raw world sightings with a classifier
// schedule: adaptive mode runs only the detectors the language requested,
// exhaustive mode runs everything in the registry every cycle.  Each frame
// of raw sightings is kept in a bounded log so that newly activated
// detectors can be replayed over recent history instead of re-visiting.

#include <algorithm>
#include <deque>
#include <set>
#include <string>
#include <vector>

#include "lgx/registry.hpp"
#include "lgx/simworld.hpp"

namespace lgx {

enum class PerceptionMode { Adaptive, Exhaustive };

inline const char* mode_name(PerceptionMode m) {
    return m == PerceptionMode::Adaptive ? "adaptive" : "exhaustive";
}

// One sensing cycle as remembered for replay: everything physically in view,
// regardless of which classifiers were active at the time.
struct ObservationFrame {
    int cycle = 0;
    int pose_node = -1;     // pose vertex the frame anchors to in every particle
    std::vector<RawSighting> sightings;
};

struct SenseResult {
    std::vector<RawSighting> detections;   // sightings passing the active set
    double cost = 0.0;                     // seconds of classifier time
};

struct ReplayResult {
    // detections recovered from logged frames, tagged with the pose vertex
    // they were sensed from
    std::vector<std::pair<int, RawSighting>> detections;
    double cost = 0.0;
    int frames = 0;
};

class PerceptionPipeline {
public:
    static constexpr std::size_t kLogCapacity = 64;

    PerceptionPipeline(const Registry& registry, PerceptionMode mode)
        : registry_(registry), mode_(mode) {
        if (mode_ == PerceptionMode::Exhaustive)
            active_ = registry_.names();
    }

    PerceptionMode mode() const { return mode_; }
    const Registry& registry() const { return registry_; }
    const std::vector<std::string>& active() const { return active_; }

    bool is_active(const std::string& name) const {
        return std::find(active_.begin(), active_.end(), name) != active_.end();
    }

    // Adaptive mode swaps the running set for the requested one; detectors
    // shared with the previous instruction stay warm.  Exhaustive mode
    // already runs everything, so the request is a no-op.  Returns the
    // detectors that are newly active, which is what replay should cover.
    std::vector<std::string> configure(const std::vector<std::string>& detectors) {
        for (const auto& d : detectors)
            if (!registry_.has(d)) throw UnknownClassifier(d);
        if (mode_ == PerceptionMode::Exhaustive) return {};
        std::vector<std::string> added;
        for (const auto& d : detectors)
            if (!is_active(d)) added.push_back(d);
        active_ = detectors;
        return added;
    }

    // Per-cycle classifier bill: fixed acquisition overhead plus the cost of
    // each active detector.  Summed in registry order so the figure is
    // bit-for-bit reproducible.
    double loop_cost() const {
        double c = registry_.base_cost;
        for (const auto& name : registry_.names())
            if (is_active(name)) c += registry_.cost_of(name);
        return c;
    }

    SenseResult sense(SimWorld& world, int cycle, int pose_node) {
        ObservationFrame frame;
        frame.cycle = cycle;
        frame.pose_node = pose_node;
        frame.sightings = world.sense_raw();
        log_.push_back(frame);
        if (log_.size() > kLogCapacity) log_.pop_front();

        SenseResult r;
        r.cost = loop_cost();
        for (const auto& s : frame.sightings)
            if (is_active(s.type)) r.detections.push_back(s);
        return r;
    }

    // Run newly added detectors over the logged frames.  No fresh sensing
    // happens: sightings the robot never physically made cannot be recovered,
    // and no new dropout is applied because the log already reflects what the
    // camera caught.  Costs bill per frame per added detector.
    ReplayResult replay(const std::vector<std::string>& added) const {
        ReplayResult r;
        if (added.empty() || log_.empty()) return r;
        double per_frame = 0.0;
        for (const auto& name : registry_.names())
            if (std::find(added.begin(), added.end(), name) != added.end())
                per_frame += registry_.cost_of(name);
        std::set<std::string> want(added.begin(), added.end());
        for (const auto& frame : log_) {
            ++r.frames;
            r.cost += per_frame;
            for (const auto& s : frame.sightings)
                if (want.count(s.type))
                    r.detections.emplace_back(frame.pose_node, s);
        }
        return r;
    }

    const std::deque<ObservationFrame>& log() const { return log_; }

private:
    Registry registry_;
    PerceptionMode mode_;
    std::vector<std::string> active_;
    std::deque<ObservationFrame> log_;
};

}  // namespace lgx
