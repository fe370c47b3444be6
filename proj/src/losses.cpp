#include "cddrive/losses.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cddrive {

std::pair<double, int> wta_loss(const std::vector<Trajectory>& candidates, const Trajectory& gt,
                                bool include_heading) {
    if (candidates.empty()) throw std::invalid_argument("wta_loss: empty candidate list");
    int winner = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double d = l2_distance(candidates[i], gt, include_heading);
        if (d < best) {
            best = d;
            winner = static_cast<int>(i);
        }
    }
    const Trajectory& w = candidates[static_cast<std::size_t>(winner)];
    double acc = 0.0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        acc += std::abs(w.points[i].x - gt.points[i].x);
        acc += std::abs(w.points[i].y - gt.points[i].y);
        acc += std::abs(w.points[i].psi - gt.points[i].psi);
    }
    return {acc / static_cast<double>(gt.size()), winner};
}

Eigen::VectorXd imitation_targets(const std::vector<Trajectory>& candidates, const Trajectory& gt,
                                  bool include_heading) {
    if (candidates.empty()) throw std::invalid_argument("imitation_targets: empty candidates");
    Eigen::VectorXd neg_d(static_cast<Eigen::Index>(candidates.size()));
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        neg_d(static_cast<Eigen::Index>(i)) = -l2_distance(candidates[i], gt, include_heading);
    }
    const double m = neg_d.maxCoeff();
    Eigen::VectorXd e = (neg_d.array() - m).exp().matrix();
    return e / e.sum();
}

Eigen::VectorXd imitation_targets(const Vocabulary& vocab, const Trajectory& gt,
                                  bool include_heading) {
    return imitation_targets(vocab.anchors, gt, include_heading);
}

double imitation_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& target) {
    if (pred.size() != target.size()) throw std::invalid_argument("imitation_loss: size mismatch");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
        acc -= target(i) * std::log(std::max(pred(i), 1e-12));
    }
    return acc;
}

double simulation_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
        throw std::invalid_argument("simulation_loss: shape mismatch");
    }
    double acc = 0.0;
    for (Eigen::Index i = 0; i < pred.rows(); ++i) {
        for (Eigen::Index j = 0; j < pred.cols(); ++j) {
            const double p = std::clamp(pred(i, j), 1e-12, 1.0 - 1e-12);
            acc -= target(i, j) * std::log(p) + (1.0 - target(i, j)) * std::log(1.0 - p);
        }
    }
    return acc / static_cast<double>(pred.size());
}

double focal_loss(const Eigen::VectorXd& pred, const OccupancyGrid& target, double gamma,
                  double alpha) {
    if (pred.size() != target.cells.size()) throw std::invalid_argument("focal_loss: size mismatch");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
        const double p = std::clamp(pred(i), 1e-12, 1.0 - 1e-12);
        const double pt = target.cells(i) > 0.5 ? p : 1.0 - p;
        acc -= alpha * std::pow(1.0 - pt, gamma) * std::log(pt);
    }
    return acc / static_cast<double>(pred.size());
}

Eigen::VectorXd focal_loss_grad(const Eigen::VectorXd& pred, const OccupancyGrid& target,
                                double gamma, double alpha) {
    Eigen::VectorXd g(pred.size());
    const double inv = 1.0 / static_cast<double>(pred.size());
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
        const double p = std::clamp(pred(i), 1e-12, 1.0 - 1e-12);
        const bool pos = target.cells(i) > 0.5;
        const double pt = pos ? p : 1.0 - p;
        // d/dpt of -alpha (1-pt)^gamma log pt
        double dpt;
        if (gamma == 0.0) {
            dpt = -alpha / pt;
        } else {
            dpt = alpha * (gamma * std::pow(1.0 - pt, gamma - 1.0) * std::log(pt) -
                           std::pow(1.0 - pt, gamma) / pt);
        }
        g(i) = inv * (pos ? dpt : -dpt);
    }
    return g;
}

double total_loss(const LossParts& parts, const LossWeights& w) {
    const double vals[6] = {parts.traj, parts.im, parts.sim, parts.lwm, parts.bev, parts.agent};
    for (double v : vals) {
        if (!std::isfinite(v)) throw std::runtime_error("total_loss: non-finite component");
    }
    return w.lambda_traj * parts.traj + w.lambda_im * parts.im + w.lambda_sim * parts.sim +
           w.lambda_lwm * parts.lwm + w.lambda_bev * parts.bev + w.lambda_agent * parts.agent;
}

}  // namespace cddrive
