#pragma once

#include <Eigen/Dense>

namespace cddrive {

// Horizon-aware noise adapter: temporal low-pass smoothing of the injected
// noise followed by a monotone per-waypoint scale with a learnable log gain.
struct HatnaConfig {
    int kernel_size = 5;
    double kernel_sigma = 1.25;  // kernel_size / 4
    double alpha = 1.0;
    double epsilon = 1e-6;
    Eigen::VectorXd gain_log;  // length n, default zero

    static HatnaConfig defaults(int n);
};

// Symmetric normalized Gaussian kernel (sums to 1).
Eigen::VectorXd gaussian_kernel(int size, double sigma);

// Convolve each column along the waypoint axis, replicate padding.
Eigen::MatrixXd hatna_smooth(const HatnaConfig& cfg, const Eigen::MatrixXd& noise);

// s_i = (i/(n-1) + eps)^alpha * exp(g_i)
Eigen::VectorXd hatna_scale_profile(const HatnaConfig& cfg, int n);

// smooth(noise) with row i scaled by s_i.
Eigen::MatrixXd hatna_adapt(const HatnaConfig& cfg, const Eigen::MatrixXd& noise);

// Gradient of a loss wrt gain_log given dL/d(adapted output).
Eigen::VectorXd hatna_gain_grad(const HatnaConfig& cfg, const Eigen::MatrixXd& noise,
                                const Eigen::MatrixXd& d_out);

}  // namespace cddrive
