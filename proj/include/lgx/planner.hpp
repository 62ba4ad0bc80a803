#pragma once

// Coverage-aware grid planning.  The executive keeps one occupancy grid per
// run: static walls plus container-sized map estimates are blocked, and a
// seen mask grows with the sensor cone to drive frontier exploration.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <tuple>
#include <utility>
#include <vector>

#include "lgx/geometry.hpp"

namespace lgx {

class OccupancyGrid {
public:
    OccupancyGrid() = default;

    OccupancyGrid(double width, double height, double resolution = 0.25)
        : res_(resolution),
          nx_(std::max(1, static_cast<int>(std::ceil(width / resolution)))),
          ny_(std::max(1, static_cast<int>(std::ceil(height / resolution)))),
          blocked_(static_cast<std::size_t>(nx_ * ny_), 0),
          static_blocked_(static_cast<std::size_t>(nx_ * ny_), 0),
          seen_(static_cast<std::size_t>(nx_ * ny_), 0) {}

    double resolution() const { return res_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int size() const { return nx_ * ny_; }

    int index(int cx, int cy) const { return cy * nx_ + cx; }
    bool in_grid(int cx, int cy) const { return cx >= 0 && cx < nx_ && cy >= 0 && cy < ny_; }

    Vec2 center(int cx, int cy) const {
        return Vec2{(static_cast<double>(cx) + 0.5) * res_,
                    (static_cast<double>(cy) + 0.5) * res_};
    }

    std::pair<int, int> cell_of(const Vec2& p) const {
        int cx = std::clamp(static_cast<int>(std::floor(p.x / res_)), 0, nx_ - 1);
        int cy = std::clamp(static_cast<int>(std::floor(p.y / res_)), 0, ny_ - 1);
        return {cx, cy};
    }

    bool blocked(int cx, int cy) const {
        return blocked_[static_cast<std::size_t>(index(cx, cy))] != 0;
    }
    bool seen(int cx, int cy) const {
        return seen_[static_cast<std::size_t>(index(cx, cy))] != 0;
    }

    void block_cell(int cx, int cy, bool permanent = false) {
        if (!in_grid(cx, cy)) return;
        blocked_[static_cast<std::size_t>(index(cx, cy))] = 1;
        if (permanent) static_blocked_[static_cast<std::size_t>(index(cx, cy))] = 1;
    }

    void block_rect(double x0, double y0, double x1, double y1, bool permanent = false) {
        auto [ax, ay] = cell_of(Vec2{x0, y0});
        auto [bx, by] = cell_of(Vec2{x1, y1});
        for (int cy = ay; cy <= by; ++cy)
            for (int cx = ax; cx <= bx; ++cx) block_cell(cx, cy, permanent);
    }

    void block_disc(const Vec2& at, double radius) {
        auto [ax, ay] = cell_of(at - Vec2{radius, radius});
        auto [bx, by] = cell_of(at + Vec2{radius, radius});
        for (int cy = ay; cy <= by; ++cy)
            for (int cx = ax; cx <= bx; ++cx)
                if (distance(center(cx, cy), at) <= radius) block_cell(cx, cy);
    }

    // drop per-cycle obstacles, keep walls
    void reset_dynamic() { blocked_ = static_blocked_; }

    void mark_seen(const Pose2& from, double range, double fov) {
        auto [ax, ay] = cell_of(from.position() - Vec2{range, range});
        auto [bx, by] = cell_of(from.position() + Vec2{range, range});
        for (int cy = ay; cy <= by; ++cy)
            for (int cx = ax; cx <= bx; ++cx) {
                Vec2 c = center(cx, cy);
                if (distance(c, from.position()) > range) continue;
                double rel = wrap_angle(bearing_to(from, c) - from.theta);
                if (std::abs(rel) <= fov / 2.0)
                    seen_[static_cast<std::size_t>(index(cx, cy))] = 1;
            }
    }

    double seen_fraction() const {
        int n = 0;
        for (auto v : seen_) n += v;
        return static_cast<double>(n) / static_cast<double>(size());
    }

    // Frontier: a seen free cell with an unseen free 8-neighbour.  Cells come
    // back nearest first; ties break on cell order so every run walks the
    // same list.
    std::vector<Vec2> frontier_cells(const Vec2& from, double min_dist = 0.5) const {
        std::vector<std::pair<double, int>> found;
        for (int cy = 0; cy < ny_; ++cy)
            for (int cx = 0; cx < nx_; ++cx) {
                if (blocked(cx, cy) || !seen(cx, cy)) continue;
                bool frontier = false;
                for (int dy = -1; dy <= 1 && !frontier; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        int ux = cx + dx, uy = cy + dy;
                        if (in_grid(ux, uy) && !seen(ux, uy) && !blocked(ux, uy)) {
                            frontier = true;
                            break;
                        }
                    }
                if (!frontier) continue;
                double d = distance(center(cx, cy), from);
                if (d < min_dist) continue;
                found.emplace_back(d, index(cx, cy));
            }
        std::sort(found.begin(), found.end());
        std::vector<Vec2> out;
        out.reserve(found.size());
        for (const auto& [d, idx] : found) out.push_back(center(idx % nx_, idx / nx_));
        return out;
    }

    std::optional<Vec2> nearest_frontier(const Vec2& from, double min_dist = 0.5) const {
        auto cells = frontier_cells(from, min_dist);
        if (cells.empty()) return std::nullopt;
        return cells.front();
    }

    // Nearest unblocked cell to `p`, breadth first over rings.
    std::optional<std::pair<int, int>> nearest_free(const Vec2& p) const {
        auto [sx, sy] = cell_of(p);
        if (!blocked(sx, sy)) return {{sx, sy}};
        int max_r = std::max(nx_, ny_);
        for (int r = 1; r <= max_r; ++r) {
            std::optional<std::pair<int, int>> best;
            double best_d = 0.0;
            for (int cy = sy - r; cy <= sy + r; ++cy)
                for (int cx = sx - r; cx <= sx + r; ++cx) {
                    if (std::max(std::abs(cx - sx), std::abs(cy - sy)) != r) continue;
                    if (!in_grid(cx, cy) || blocked(cx, cy)) continue;
                    double d = distance(center(cx, cy), p);
                    if (!best || d < best_d) {
                        best = {{cx, cy}};
                        best_d = d;
                    }
                }
            if (best) return best;
        }
        return std::nullopt;
    }

private:
    double res_ = 0.25;
    int nx_ = 0, ny_ = 0;
    std::vector<std::uint8_t> blocked_;
    std::vector<std::uint8_t> static_blocked_;
    std::vector<std::uint8_t> seen_;
};

struct PlanResult {
    std::vector<Vec2> waypoints;  // cell centres, start first
    double cost = 0.0;            // metres
};

/// 8-connected A* with the octile heuristic.  Start and goal snap to their
/// nearest free cells.  Returns nothing when no route exists.
inline std::optional<PlanResult> astar(const OccupancyGrid& grid, const Vec2& start,
                                       const Vec2& goal) {
    auto s = grid.nearest_free(start);
    auto g = grid.nearest_free(goal);
    if (!s || !g) return std::nullopt;
    int si = grid.index(s->first, s->second);
    int gi = grid.index(g->first, g->second);

    const double res = grid.resolution();
    const double kDiag = 1.4142135623730951;
    auto heuristic = [&](int cx, int cy) {
        double ax = std::abs(cx - g->first), ay = std::abs(cy - g->second);
        return res * (std::max(ax, ay) + (kDiag - 1.0) * std::min(ax, ay));
    };

    std::vector<double> dist(static_cast<std::size_t>(grid.size()),
                             std::numeric_limits<double>::infinity());
    std::vector<int> parent(static_cast<std::size_t>(grid.size()), -1);
    std::vector<std::uint8_t> closed(static_cast<std::size_t>(grid.size()), 0);

    using Item = std::tuple<double, double, int>;  // f, g, cell (ties by cell)
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> open;
    dist[static_cast<std::size_t>(si)] = 0.0;
    open.push({heuristic(s->first, s->second), 0.0, si});

    const int dxs[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    const int dys[8] = {0, 0, 1, -1, 1, -1, 1, -1};

    while (!open.empty()) {
        auto [f, gc, cell] = open.top();
        open.pop();
        if (closed[static_cast<std::size_t>(cell)]) continue;
        closed[static_cast<std::size_t>(cell)] = 1;
        if (cell == gi) break;
        int cx = cell % grid.nx(), cy = cell / grid.nx();
        for (int k = 0; k < 8; ++k) {
            int ux = cx + dxs[k], uy = cy + dys[k];
            if (!grid.in_grid(ux, uy) || grid.blocked(ux, uy)) continue;
            int ui = grid.index(ux, uy);
            if (closed[static_cast<std::size_t>(ui)]) continue;
            double step = (k < 4 ? res : res * kDiag);
            double nd = gc + step;
            if (nd < dist[static_cast<std::size_t>(ui)]) {
                dist[static_cast<std::size_t>(ui)] = nd;
                parent[static_cast<std::size_t>(ui)] = cell;
                open.push({nd + heuristic(ux, uy), nd, ui});
            }
        }
    }

    if (!std::isfinite(dist[static_cast<std::size_t>(gi)])) return std::nullopt;
    PlanResult out;
    out.cost = dist[static_cast<std::size_t>(gi)];
    std::vector<int> cells;
    for (int c = gi; c != -1; c = parent[static_cast<std::size_t>(c)]) cells.push_back(c);
    std::reverse(cells.begin(), cells.end());
    out.waypoints.reserve(cells.size());
    for (int c : cells) out.waypoints.push_back(grid.center(c % grid.nx(), c / grid.nx()));
    return out;
}

}  // namespace lgx
