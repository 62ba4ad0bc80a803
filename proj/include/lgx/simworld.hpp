#pragma once

// Scenario descriptions and the kinematic ground-truth world used by the
// bench harness.  The world is deliberately simple: ideal motion, a fixed
// sensor cone, optional detection noise and dropout.  All stochastic
// behaviour flows through one seeded stream so runs replay bit for bit.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lgx/geometry.hpp"
#include "lgx/registry.hpp"
#include "lgx/rng.hpp"
#include "lgx/vocabulary.hpp"

namespace lgx {

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SimObject {
    std::string name;        // unique instance label, e.g. "ball_a"
    std::string type;
    std::string color;       // empty when unremarkable
    Vec2 position;
    int container = -1;      // index of enclosing object, -1 for none
};

struct Wall {
    // axis-aligned blocked rectangle
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    bool contains(const Vec2& p) const {
        return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
    }
};

struct ScriptEvent {
    int at_cycle = 0;        // earliest cycle the instruction may be issued
    std::string instruction;
};

struct Scenario {
    std::string name;
    double width = 10.0;
    double height = 10.0;
    Pose2 start;
    std::string registry = "indoor";   // "indoor" or "outdoor"
    int particles = 10;
    std::vector<SimObject> objects;
    std::vector<Wall> walls;
    std::vector<ScriptEvent> script;

    int object_index(const std::string& name) const {
        for (std::size_t i = 0; i < objects.size(); ++i)
            if (objects[i].name == name) return static_cast<int>(i);
        return -1;
    }
};

inline void to_json(nlohmann::json& j, const Scenario& s) {
    j = nlohmann::json::object();
    j["name"] = s.name;
    j["width"] = s.width;
    j["height"] = s.height;
    j["start"] = {s.start.x, s.start.y, s.start.theta};
    j["registry"] = s.registry;
    j["particles"] = s.particles;
    j["objects"] = nlohmann::json::array();
    for (const auto& o : s.objects) {
        nlohmann::json jo;
        jo["name"] = o.name;
        jo["type"] = o.type;
        if (!o.color.empty()) jo["color"] = o.color;
        jo["position"] = {o.position.x, o.position.y};
        if (o.container >= 0) jo["container"] = s.objects[o.container].name;
        j["objects"].push_back(jo);
    }
    j["walls"] = nlohmann::json::array();
    for (const auto& w : s.walls)
        j["walls"].push_back({w.x0, w.y0, w.x1, w.y1});
    j["script"] = nlohmann::json::array();
    for (const auto& e : s.script)
        j["script"].push_back({{"at_cycle", e.at_cycle}, {"instruction", e.instruction}});
}

inline void from_json(const nlohmann::json& j, Scenario& s) {
    s = Scenario{};
    s.name = j.at("name").get<std::string>();
    s.width = j.at("width").get<double>();
    s.height = j.at("height").get<double>();
    auto st = j.at("start");
    s.start = Pose2{st.at(0).get<double>(), st.at(1).get<double>(),
                    st.size() > 2 ? st.at(2).get<double>() : 0.0};
    if (j.contains("registry")) s.registry = j.at("registry").get<std::string>();
    if (j.contains("particles")) s.particles = j.at("particles").get<int>();
    for (const auto& jo : j.value("objects", nlohmann::json::array())) {
        SimObject o;
        o.name = jo.at("name").get<std::string>();
        o.type = jo.at("type").get<std::string>();
        o.color = jo.value("color", std::string());
        o.position = Vec2{jo.at("position").at(0).get<double>(),
                          jo.at("position").at(1).get<double>()};
        s.objects.push_back(o);
    }
    // containers resolve by name after all objects exist
    std::size_t k = 0;
    for (const auto& jo : j.value("objects", nlohmann::json::array())) {
        if (jo.contains("container")) {
            int ci = s.object_index(jo.at("container").get<std::string>());
            if (ci < 0)
                throw ScenarioError("unknown container: " +
                                    jo.at("container").get<std::string>());
            s.objects[k].container = ci;
        }
        ++k;
    }
    for (const auto& jw : j.value("walls", nlohmann::json::array()))
        s.walls.push_back(Wall{jw.at(0).get<double>(), jw.at(1).get<double>(),
                               jw.at(2).get<double>(), jw.at(3).get<double>()});
    for (const auto& je : j.value("script", nlohmann::json::array()))
        s.script.push_back(ScriptEvent{je.value("at_cycle", 0),
                                       je.at("instruction").get<std::string>()});
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario: " + path);
    nlohmann::json j;
    try {
        in >> j;
        return j.get<Scenario>();
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioError("bad scenario " + path + ": " + e.what());
    }
}

inline void save_scenario(const Scenario& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ScenarioError("cannot write scenario: " + path);
    nlohmann::json j = s;
    out << j.dump(2) << "\n";
}

// Cluttered office floor.  Two candidate boxes: box_a sits on the direct
// route from the start and holds crackers (a decoy for "retrieve the ball
// inside the box"), box_b in the far corner holds the ball.
inline Scenario controlled_indoor_scenario() {
    Scenario s;
    s.name = "controlled_indoor";
    s.width = 16.0;
    s.height = 12.0;
    s.start = Pose2{2.5, 6.0, 0.0};
    s.registry = "indoor";
    s.particles = 10;
    auto add = [&](const std::string& name, const std::string& type,
                   const std::string& color, double x, double y,
                   const std::string& container = "") {
        SimObject o;
        o.name = name;
        o.type = type;
        o.color = color;
        o.position = Vec2{x, y};
        if (!container.empty()) {
            o.container = s.object_index(container);
            if (o.container < 0) throw ScenarioError("bad container " + container);
        }
        s.objects.push_back(o);
    };
    add("box_a", "box", "brown", 4.0, 6.0);
    add("crackers_a", "crackers_box", "", 4.05, 6.0, "box_a");
    add("box_b", "box", "brown", 12.5, 6.5);
    add("ball_a", "ball", "red", 12.55, 6.5, "box_b");
    add("mug_a", "mug", "blue", 3.0, 8.5);
    add("book_a", "book", "red", 5.5, 9.0);
    add("plate_a", "plate", "white", 6.5, 3.0);
    add("bottle_a", "bottle", "green", 7.5, 10.0);
    add("cup_a", "cup", "white", 8.0, 2.0);
    add("banana_a", "banana", "yellow", 9.0, 9.5);
    add("apple_a", "apple", "red", 9.5, 3.5);
    add("scissors_a", "scissors", "", 10.0, 10.5);
    add("drill_a", "drill", "", 10.5, 2.5);
    add("hammer_a", "hammer", "", 11.0, 9.0);
    add("can_a", "can", "", 11.5, 3.0);
    add("marker_a", "marker", "blue", 12.0, 10.0);
    add("bowl_a", "bowl", "green", 13.0, 3.5);
    add("mug_b", "mug", "red", 13.5, 9.5);
    add("book_b", "book", "brown", 14.0, 4.5);
    add("cup_b", "cup", "yellow", 2.0, 3.0);
    add("can_b", "can", "", 5.0, 1.5);
    add("apple_b", "apple", "green", 14.0, 7.5);
    add("bottle_b", "bottle", "", 3.5, 10.5);
    add("plate_b", "plate", "", 9.0, 6.0);
    s.script.push_back(ScriptEvent{0, "retrieve the ball inside the box"});
    s.script.push_back(ScriptEvent{0, "pick up the crackers box inside the box"});
    return s;
}

// Sparse yard.  Longer sight lines, fewer objects, more travel per find.
inline Scenario exploratory_outdoor_scenario() {
    Scenario s;
    s.name = "exploratory_outdoor";
    s.width = 24.0;
    s.height = 20.0;
    s.start = Pose2{2.0, 2.0, 0.7853981633974483};
    s.registry = "outdoor";
    s.particles = 20;
    auto add = [&](const std::string& name, const std::string& type,
                   const std::string& color, double x, double y,
                   const std::string& container = "") {
        SimObject o;
        o.name = name;
        o.type = type;
        o.color = color;
        o.position = Vec2{x, y};
        if (!container.empty()) o.container = s.object_index(container);
        s.objects.push_back(o);
    };
    add("box_a", "box", "", 7.0, 14.0);
    add("box_b", "box", "brown", 18.0, 5.0);
    add("ball_a", "ball", "green", 18.1, 5.0, "box_b");
    add("crackers_a", "crackers_box", "", 14.5, 10.5);
    add("hammer_a", "hammer", "", 12.0, 9.0);
    add("bottle_a", "bottle", "", 4.0, 11.0);
    add("can_a", "can", "", 15.0, 17.0);
    add("bowl_a", "bowl", "", 10.0, 3.0);
    add("book_a", "book", "", 21.0, 10.0);
    add("cup_a", "cup", "red", 3.0, 17.0);
    add("marker_a", "marker", "", 16.0, 12.0);
    s.script.push_back(ScriptEvent{0, "retrieve the ball inside the box"});
    s.script.push_back(ScriptEvent{0, "go to the crackers box"});
    return s;
}

// One detection handed to the filter.  Positions are body frame relative to
// the true robot pose at sense time; the filter re-anchors them at each
// particle's own pose estimate.  truth is bookkeeping for traces only and
// must never inform data association.
struct RawSighting {
    std::string type;
    std::string color;
    double extent = 0.1;
    Vec2 body;
    int truth = -1;
};

struct WorldOptions {
    double sensor_fov = 1.5707963267948966;   // full cone angle, 90 degrees
    double inspection_radius = 1.0;           // contained objects visible inside this
    double detection_sigma = 0.03;            // position noise, metres
    double dropout = 0.05;                    // per-sighting miss probability
    double speed = 1.0;                       // metres per second
    double pick_radius = 1.0;                 // retrieve/pickup reach
};

class SimWorld {
public:
    SimWorld(const Scenario& scenario, const Registry& registry,
             const Vocabulary& vocab, std::uint64_t seed,
             const WorldOptions& opt = WorldOptions())
        : scenario_(scenario), opt_(opt), range_(registry.range),
          robot_(scenario.start), rng_(derive_seed(seed, 0x776f726cULL)) {
        objects_ = scenario.objects;
        carried_.assign(objects_.size(), 0);
        extents_.reserve(objects_.size());
        for (const auto& o : objects_) {
            int ti = vocab.type_index(o.type);
            if (ti < 0) throw ScenarioError("scenario type not in vocabulary: " + o.type);
            extents_.push_back(vocab.types[ti].footprint);
        }
    }

    const Scenario& scenario() const { return scenario_; }
    const Pose2& robot() const { return robot_; }
    double range() const { return range_; }
    double fov() const { return opt_.sensor_fov; }
    const WorldOptions& options() const { return opt_; }

    bool carried(int idx) const { return carried_.at(static_cast<std::size_t>(idx)) != 0; }

    Vec2 object_position(int idx) const {
        return carried(idx) ? robot_.position()
                            : objects_[static_cast<std::size_t>(idx)].position;
    }

    // Ideal kinematics: the robot lands exactly on the commanded pose.
    // Returns the body-frame motion since the previous pose, which is what
    // the filter treats as the odometry measurement.
    Pose2 move_to(const Pose2& target) {
        Pose2 delta = robot_.between(target);
        robot_ = target;
        return delta;
    }

    Pose2 turn(double dtheta) {
        return move_to(Pose2{robot_.x, robot_.y, wrap_angle(robot_.theta + dtheta)});
    }

    bool in_view(const Vec2& p) const {
        double d = distance(robot_.position(), p);
        if (d > range_) return false;
        double rel = wrap_angle(bearing_to(robot_, p) - robot_.theta);
        return std::abs(rel) <= opt_.sensor_fov / 2.0;
    }

    bool visible(int idx) const {
        const auto& o = objects_[static_cast<std::size_t>(idx)];
        if (carried(idx)) return false;
        if (o.container >= 0) {
            if (carried(o.container)) return false;
            if (!in_view(object_position(o.container))) return false;
            return distance(robot_.position(), object_position(o.container)) <=
                   opt_.inspection_radius;
        }
        return in_view(o.position);
    }

    // Every physically visible object this cycle, before any classifier
    // filtering.  Dropout and noise draws are consumed in object order so a
    // fixed trajectory yields a fixed detection stream.
    std::vector<RawSighting> sense_raw() {
        std::vector<RawSighting> out;
        for (std::size_t i = 0; i < objects_.size(); ++i) {
            if (!visible(static_cast<int>(i))) continue;
            if (opt_.dropout > 0 && rng_.uniform() < opt_.dropout) continue;
            Vec2 p = objects_[i].position;
            if (opt_.detection_sigma > 0) {
                p.x += opt_.detection_sigma * rng_.normal();
                p.y += opt_.detection_sigma * rng_.normal();
            }
            RawSighting s;
            s.type = objects_[i].type;
            s.color = objects_[i].color;
            s.extent = extents_[i];
            s.body = robot_.transform_to(p);
            s.truth = static_cast<int>(i);
            out.push_back(s);
        }
        return out;
    }

    // Attach the nearest matching object within reach.  Returns its index,
    // or -1 when nothing qualifies.
    int pick(const std::string& type) {
        int best = -1;
        double best_d = opt_.pick_radius;
        for (std::size_t i = 0; i < objects_.size(); ++i) {
            if (objects_[i].type != type || carried(static_cast<int>(i))) continue;
            double d = distance(robot_.position(), objects_[i].position);
            const auto& o = objects_[i];
            if (o.container >= 0)
                d = std::min(d, distance(robot_.position(),
                                         objects_[static_cast<std::size_t>(o.container)].position));
            if (d <= best_d) {
                best_d = d;
                best = static_cast<int>(i);
            }
        }
        if (best >= 0) carried_[static_cast<std::size_t>(best)] = 1;
        return best;
    }

    bool inside_bounds(const Vec2& p) const {
        if (p.x < 0 || p.y < 0 || p.x > scenario_.width || p.y > scenario_.height)
            return false;
        for (const auto& w : scenario_.walls)
            if (w.contains(p)) return false;
        return true;
    }

private:
    Scenario scenario_;
    WorldOptions opt_;
    double range_;
    Pose2 robot_;
    Rng rng_;
    std::vector<SimObject> objects_;
    std::vector<double> extents_;
    std::vector<std::uint8_t> carried_;
};

}  // namespace lgx
