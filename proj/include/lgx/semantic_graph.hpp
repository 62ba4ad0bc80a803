#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "lgx/geometry.hpp"

namespace lgx {

enum class NodeKind { Pose, Object };

enum class NodeState {
    Hypothesized,  // posited from language, not yet observed
    Confirmed,     // backed by at least one detection
    Removed,       // disconfirmed hypothesis, kept as a tombstone
};

struct Node {
    int id = -1;
    NodeKind kind = NodeKind::Object;
    NodeState state = NodeState::Confirmed;
    std::string type;   // object class; empty for poses
    std::string color;  // empty when unknown
    double extent = 0.15;
    Vec2 position;      // object estimate
    Pose2 pose;         // pose estimate
    std::map<std::string, double> type_counts;  // detection pseudo-counts
    int container = -1;     // id of the node this object sits inside, -1 if none
    int miss_count = 0;     // consecutive in-view cycles without a detection
    int created_cycle = 0;
    bool carried = false;   // picked up and travelling with the robot
    double existence = 1.0; // filled in on marginal-map copies
};

enum class EdgeKind {
    PosePrior,  // anchors pose a
    PointPrior, // anchors object a (weak, for language-posited nodes)
    Odom,       // relative pose, pose a -> pose b, in a's frame
    Obs,        // object b seen from pose a, position in a's body frame
    RelPoint,   // expected world offset from object a to object b
};

struct Edge {
    EdgeKind kind = EdgeKind::Obs;
    int a = -1, b = -1;
    Pose2 zpose;          // PosePrior, Odom
    Vec2 zpoint;          // PointPrior, Obs, RelPoint
    double info_xy = 1.0; // diagonal information on the planar components
    double info_theta = 1.0;
};

inline constexpr double kNearRadius = 2.0;     // metres; "near" means within this
inline constexpr double kSideWindow = 2.5;     // lateral relations only bind this close

/// One particle's world model: an anchored pose chain, object nodes in
/// confirmed or hypothesized state, and the constraints tying them together.
/// Estimates live on the nodes; solving is the information filter's job.
struct SemanticGraph {
    std::vector<Node> nodes;
    std::vector<Edge> edges;
    int last_pose = -1;
    int solved_edges = 0;  // prefix of `edges` already folded into estimates

    int add_pose(const Pose2& estimate) {
        Node n;
        n.id = static_cast<int>(nodes.size());
        n.kind = NodeKind::Pose;
        n.pose = estimate;
        nodes.push_back(n);
        last_pose = n.id;
        return n.id;
    }

    int add_object(const std::string& type, const std::string& color, const Vec2& estimate,
                   NodeState state, int cycle, double extent = 0.15) {
        Node n;
        n.id = static_cast<int>(nodes.size());
        n.kind = NodeKind::Object;
        n.state = state;
        n.type = type;
        n.color = color;
        n.extent = extent;
        n.position = estimate;
        n.created_cycle = cycle;
        nodes.push_back(n);
        return n.id;
    }

    void add_pose_prior(int node, const Pose2& z, double sigma_xy, double sigma_theta) {
        edges.push_back({EdgeKind::PosePrior, node, -1, z, {}, 1.0 / (sigma_xy * sigma_xy),
                         1.0 / (sigma_theta * sigma_theta)});
    }

    void add_point_prior(int node, const Vec2& z, double sigma) {
        edges.push_back({EdgeKind::PointPrior, node, -1, {}, z, 1.0 / (sigma * sigma), 0.0});
    }

    void add_odom(int from, int to, const Pose2& rel, double sigma_xy, double sigma_theta) {
        edges.push_back({EdgeKind::Odom, from, to, rel, {}, 1.0 / (sigma_xy * sigma_xy),
                         1.0 / (sigma_theta * sigma_theta)});
    }

    void add_obs(int pose, int object, const Vec2& body_frame_z, double sigma) {
        edges.push_back({EdgeKind::Obs, pose, object, {}, body_frame_z, 1.0 / (sigma * sigma), 0.0});
    }

    void add_rel_point(int from_obj, int to_obj, const Vec2& offset, double sigma) {
        edges.push_back({EdgeKind::RelPoint, from_obj, to_obj, {}, offset, 1.0 / (sigma * sigma), 0.0});
    }

    const Node& node(int id) const { return nodes.at(static_cast<std::size_t>(id)); }
    Node& node(int id) { return nodes.at(static_cast<std::size_t>(id)); }

    Pose2 robot_pose() const {
        if (last_pose < 0) throw std::logic_error("graph has no pose nodes");
        return node(last_pose).pose;
    }

    bool is_live_object(int id) const {
        const Node& n = node(id);
        return n.kind == NodeKind::Object && n.state != NodeState::Removed;
    }

    std::vector<int> live_objects() const {
        std::vector<int> out;
        for (const auto& n : nodes)
            if (n.kind == NodeKind::Object && n.state != NodeState::Removed) out.push_back(n.id);
        return out;
    }

    int count_objects(NodeState state) const {
        int c = 0;
        for (const auto& n : nodes)
            if (n.kind == NodeKind::Object && n.state == state) ++c;
        return c;
    }

    Vec2 object_position(int id) const {
        const Node& n = node(id);
        if (n.carried && last_pose >= 0) return node(last_pose).pose.position();
        return n.position;
    }
};

/// Geometric truth of a spatial relation between two object nodes, judged
/// from the current estimates. Lateral relations are viewer relative.
inline bool rel_holds(const SemanticGraph& g, const std::string& rel, int fig, int lm,
                      const Pose2& viewer) {
    if (fig == lm) return false;
    const Node& f = g.node(fig);
    const Node& l = g.node(lm);
    if (f.kind != NodeKind::Object || l.kind != NodeKind::Object) return false;
    Vec2 pf = g.object_position(fig);
    Vec2 pl = g.object_position(lm);
    double d = (pf - pl).norm();
    if (rel == "inside") return f.container == lm || d <= l.extent;
    if (rel == "near") return d <= kNearRadius;
    if (rel == "left_of" || rel == "right_of") {
        if (d > kSideWindow) return false;
        Vec2 to_lm = pl - viewer.position();
        Vec2 to_fig = pf - viewer.position();
        double cross = to_lm.x * to_fig.y - to_lm.y * to_fig.x;
        return rel == "left_of" ? cross > 0.0 : cross < 0.0;
    }
    return false;
}

}  // namespace lgx
