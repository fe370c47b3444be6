#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "cddrive/trajectory.hpp"

namespace cddrive {

struct NoiseSchedule {
    int T = 0;
    Eigen::VectorXd alpha;      // alpha[t-1] = alpha_t, t = 1..T
    Eigen::VectorXd alpha_bar;  // alpha_bar[t-1] = prod_{s<=t} alpha_s
    int t_truncate = 0;
    int ddim_stride = 1;

    // Linear beta schedule, alpha_t = 1 - beta_t.
    static NoiseSchedule linear_beta(int T, double beta_start, double beta_end, int t_truncate,
                                     int ddim_stride);

    double abar(int t) const;  // alpha_bar at step t, with abar(0) = 1
    void validate() const;
};

// sqrt(abar_t) * p0 + sqrt(1 - abar_t) * eps
Eigen::MatrixXd forward_noise(const NoiseSchedule& sched, const Eigen::MatrixXd& p0, int t,
                              const Eigen::MatrixXd& eps);

// Forward noising at t_truncate with HATNA-adapted noise.
Eigen::MatrixXd truncated_init(const NoiseSchedule& sched, const Eigen::MatrixXd& anchor,
                               const Eigen::MatrixXd& eps_adapted);

// Deterministic DDIM (eta = 0): p_{t_prev} = a * p_t + b * p0_hat.
// At t_prev = 0 this reduces to (a, b) = (0, 1).
std::pair<double, double> ddim_coeffs(const NoiseSchedule& sched, int t, int t_prev);

Eigen::MatrixXd ddim_step(const NoiseSchedule& sched, const Eigen::MatrixXd& p_t,
                          const Eigen::MatrixXd& p0_hat, int t, int t_prev);

// (t, t_prev) pairs visited by the truncated reverse pass.
std::vector<std::pair<int, int>> ddim_timesteps(const NoiseSchedule& sched);

// Predicts the refinement delta for the current noisy positions at step t.
using RefineFn = std::function<Eigen::MatrixXd(const Eigen::MatrixXd& p_t, int t)>;
// Heading sequence, already squashed to (-pi, pi) by the heading head.
using HeadingFn = std::function<Eigen::VectorXd(const Eigen::MatrixXd& p_t, int t)>;

struct DenoiseResult {
    Eigen::MatrixXd positions;  // n x 2
    Eigen::VectorXd headings;   // n, already squashed to (-pi, pi)
};

// Truncated init + anchor-refinement DDIM loop. Headings come from the
// heading head evaluated at the final denoising step.
DenoiseResult denoise_anchor(const NoiseSchedule& sched, const RefineFn& refine,
                             const HeadingFn& heading, const Eigen::MatrixXd& anchor,
                             const Eigen::MatrixXd& eps_adapted);

}  // namespace cddrive
