#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "cddrive/config.hpp"
#include "cddrive/trajectory.hpp"
#include "cddrive/world_model.hpp"

namespace cddrive {

// Winner = argmin l2 distance to gt (ties break low); loss = per-waypoint
// mean of the winner's stacked |dx| + |dy| + |dpsi| deviations.
std::pair<double, int> wta_loss(const std::vector<Trajectory>& candidates, const Trajectory& gt,
                                bool include_heading = true);

// Soft target softmax(-distance) over a candidate list, max-subtracted.
Eigen::VectorXd imitation_targets(const std::vector<Trajectory>& candidates, const Trajectory& gt,
                                  bool include_heading = true);
Eigen::VectorXd imitation_targets(const Vocabulary& vocab, const Trajectory& gt,
                                  bool include_heading = true);

// Cross entropy -sum target * log(pred), predictions clamped at 1e-12.
double imitation_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& target);

// Mean elementwise binary cross entropy over candidates and metric heads.
double simulation_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target);

// Mean over cells of -alpha * (1 - p_true)^gamma * log(p_true).
double focal_loss(const Eigen::VectorXd& pred, const OccupancyGrid& target, double gamma = 2.0,
                  double alpha = 0.25);
// dL/d pred for the focal loss above.
Eigen::VectorXd focal_loss_grad(const Eigen::VectorXd& pred, const OccupancyGrid& target,
                                double gamma = 2.0, double alpha = 0.25);

struct LossParts {
    double traj = 0.0;
    double im = 0.0;
    double sim = 0.0;
    double lwm = 0.0;
    double bev = 0.0;
    double agent = 0.0;
};

// Weighted sum with the configured lambdas; throws on non-finite parts.
double total_loss(const LossParts& parts, const LossWeights& w);

}  // namespace cddrive
