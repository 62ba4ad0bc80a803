#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "lgx/semantic_graph.hpp"

namespace lgx {

struct SingularSystem : std::runtime_error {
    explicit SingularSystem(const std::string& why)
        : std::runtime_error("information matrix not solvable: " + why) {}
};

struct SolveStats {
    int iterations = 0;
    double last_step = 0.0;  // infinity norm of the final state update
    double chi2 = 0.0;       // weighted squared residual after the last step
};

/// Sparse information-form estimator over a semantic graph. Pose nodes carry
/// three degrees of freedom, object nodes two; removed nodes and their edges
/// stay out of the system. Each call relinearizes at the current estimates,
/// so the default single iteration behaves as an incremental filter update
/// while `batch()` polishes to convergence.
class Eif {
public:
    struct Options {
        int max_iterations = 1;
        double tol = 1e-10;
    };

    static SolveStats solve(SemanticGraph& g) { return solve(g, Options()); }

    static SolveStats solve(SemanticGraph& g, const Options& opt) {
        std::vector<int> offset(g.nodes.size(), -1);
        int dim = 0;
        bool have_pose = false;
        for (const auto& n : g.nodes) {
            if (n.kind == NodeKind::Object && n.state == NodeState::Removed) continue;
            offset[static_cast<std::size_t>(n.id)] = dim;
            dim += n.kind == NodeKind::Pose ? 3 : 2;
            have_pose = have_pose || n.kind == NodeKind::Pose;
        }
        if (dim == 0) {
            g.solved_edges = static_cast<int>(g.edges.size());
            return {};
        }
        if (have_pose) {
            bool anchored = false;
            for (const auto& e : g.edges) anchored = anchored || e.kind == EdgeKind::PosePrior;
            if (!anchored) throw SingularSystem("pose chain has no prior");
        }

        SolveStats stats;
        for (int it = 0; it < opt.max_iterations; ++it) {
            std::vector<Eigen::Triplet<double>> trips;
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
            double chi2 = 0.0;

            auto add_block = [&](int row0, int col0, const Eigen::MatrixXd& m) {
                for (int r = 0; r < m.rows(); ++r)
                    for (int c = 0; c < m.cols(); ++c)
                        if (m(r, c) != 0.0) trips.emplace_back(row0 + r, col0 + c, m(r, c));
            };

            for (const auto& e : g.edges) {
                int oa = e.a >= 0 ? offset[static_cast<std::size_t>(e.a)] : -1;
                int ob = e.b >= 0 ? offset[static_cast<std::size_t>(e.b)] : -1;
                switch (e.kind) {
                    case EdgeKind::PosePrior: {
                        if (oa < 0) break;
                        const Pose2& p = g.node(e.a).pose;
                        Eigen::Vector3d err(p.x - e.zpose.x, p.y - e.zpose.y,
                                            wrap_angle(p.theta - e.zpose.theta));
                        Eigen::Vector3d w(e.info_xy, e.info_xy, e.info_theta);
                        add_block(oa, oa, w.asDiagonal());
                        rhs.segment<3>(oa) -= w.cwiseProduct(err);
                        chi2 += err.dot(w.cwiseProduct(err));
                        break;
                    }
                    case EdgeKind::PointPrior: {
                        if (oa < 0) break;
                        const Vec2& x = g.node(e.a).position;
                        Eigen::Vector2d err(x.x - e.zpoint.x, x.y - e.zpoint.y);
                        add_block(oa, oa, Eigen::Matrix2d::Identity() * e.info_xy);
                        rhs.segment<2>(oa) -= e.info_xy * err;
                        chi2 += e.info_xy * err.squaredNorm();
                        break;
                    }
                    case EdgeKind::Odom: {
                        if (oa < 0 || ob < 0) break;
                        const Pose2& pa = g.node(e.a).pose;
                        const Pose2& pb = g.node(e.b).pose;
                        Pose2 pred = pa.between(pb);
                        Eigen::Vector3d err(pred.x - e.zpose.x, pred.y - e.zpose.y,
                                            wrap_angle(pred.theta - e.zpose.theta));
                        double c = std::cos(pa.theta), s = std::sin(pa.theta);
                        Eigen::Matrix3d Ja = Eigen::Matrix3d::Zero(), Jb = Eigen::Matrix3d::Zero();
                        Ja << -c, -s, pred.y, s, -c, -pred.x, 0, 0, -1;
                        Jb << c, s, 0, -s, c, 0, 0, 0, 1;
                        Eigen::Vector3d w(e.info_xy, e.info_xy, e.info_theta);
                        Eigen::Matrix3d L = w.asDiagonal();
                        add_block(oa, oa, Ja.transpose() * L * Ja);
                        add_block(oa, ob, Ja.transpose() * L * Jb);
                        add_block(ob, oa, Jb.transpose() * L * Ja);
                        add_block(ob, ob, Jb.transpose() * L * Jb);
                        rhs.segment<3>(oa) -= Ja.transpose() * (w.cwiseProduct(err));
                        rhs.segment<3>(ob) -= Jb.transpose() * (w.cwiseProduct(err));
                        chi2 += err.dot(w.cwiseProduct(err));
                        break;
                    }
                    case EdgeKind::Obs: {
                        if (oa < 0 || ob < 0) break;
                        const Pose2& pa = g.node(e.a).pose;
                        const Vec2& xb = g.node(e.b).position;
                        Vec2 pred = pa.transform_to(xb);
                        Eigen::Vector2d err(pred.x - e.zpoint.x, pred.y - e.zpoint.y);
                        double c = std::cos(pa.theta), s = std::sin(pa.theta);
                        Eigen::Matrix<double, 2, 3> Ja;
                        Ja << -c, -s, pred.y, s, -c, -pred.x;
                        Eigen::Matrix2d Jb;
                        Jb << c, s, -s, c;
                        add_block(oa, oa, Ja.transpose() * Ja * e.info_xy);
                        add_block(oa, ob, Ja.transpose() * Jb * e.info_xy);
                        add_block(ob, oa, Jb.transpose() * Ja * e.info_xy);
                        add_block(ob, ob, Jb.transpose() * Jb * e.info_xy);
                        rhs.segment<3>(oa) -= Ja.transpose() * err * e.info_xy;
                        rhs.segment<2>(ob) -= Jb.transpose() * err * e.info_xy;
                        chi2 += e.info_xy * err.squaredNorm();
                        break;
                    }
                    case EdgeKind::RelPoint: {
                        if (oa < 0 || ob < 0) break;
                        const Vec2& xa = g.node(e.a).position;
                        const Vec2& xb = g.node(e.b).position;
                        Eigen::Vector2d err(xb.x - xa.x - e.zpoint.x, xb.y - xa.y - e.zpoint.y);
                        Eigen::Matrix2d I = Eigen::Matrix2d::Identity() * e.info_xy;
                        add_block(oa, oa, I);
                        add_block(ob, ob, I);
                        add_block(oa, ob, -I);
                        add_block(ob, oa, -I);
                        rhs.segment<2>(oa) += e.info_xy * err;
                        rhs.segment<2>(ob) -= e.info_xy * err;
                        chi2 += e.info_xy * err.squaredNorm();
                        break;
                    }
                }
            }

            Eigen::SparseMatrix<double> H(dim, dim);
            H.setFromTriplets(trips.begin(), trips.end());
            Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(H);
            if (ldlt.info() != Eigen::Success) throw SingularSystem("factorization failed");
            Eigen::VectorXd dx = ldlt.solve(rhs);
            if (ldlt.info() != Eigen::Success || !dx.allFinite())
                throw SingularSystem("solve failed");

            for (auto& n : g.nodes) {
                int o = offset[static_cast<std::size_t>(n.id)];
                if (o < 0) continue;
                if (n.kind == NodeKind::Pose) {
                    n.pose.x += dx[o];
                    n.pose.y += dx[o + 1];
                    n.pose.theta = wrap_angle(n.pose.theta + dx[o + 2]);
                } else {
                    n.position.x += dx[o];
                    n.position.y += dx[o + 1];
                }
            }

            stats.iterations = it + 1;
            stats.last_step = dx.size() ? dx.cwiseAbs().maxCoeff() : 0.0;
            stats.chi2 = chi2;
            if (stats.last_step < opt.tol) break;
        }
        g.solved_edges = static_cast<int>(g.edges.size());
        return stats;
    }

    static SolveStats batch(SemanticGraph& g) {
        Options opt;
        opt.max_iterations = 50;
        return solve(g, opt);
    }
};

}  // namespace lgx
