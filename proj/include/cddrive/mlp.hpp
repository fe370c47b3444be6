#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

namespace cddrive {

struct Linear {
    Eigen::MatrixXd W;
    Eigen::VectorXd b;
};

// Fully-connected stack with SiLU between layers; the last layer is
// activated only when activate_last is set (used for trunk features).
struct Mlp {
    std::vector<Linear> layers;
    bool activate_last = false;
};

struct MlpCache {
    Eigen::VectorXd input;
    std::vector<Eigen::VectorXd> pre;   // pre-activation per layer
    std::vector<Eigen::VectorXd> post;  // layer outputs after activation
};

double silu(double x);
double silu_grad(double x);

Eigen::VectorXd linear_forward(const Linear& l, const Eigen::VectorXd& x);
// Accumulates parameter grads into g; returns dL/dx.
Eigen::VectorXd linear_backward(const Linear& l, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& dy, Linear& g);

Eigen::VectorXd mlp_forward(const Mlp& m, const Eigen::VectorXd& x, MlpCache* cache = nullptr);
Eigen::VectorXd mlp_backward(const Mlp& m, const MlpCache& cache, const Eigen::VectorXd& dy,
                             Mlp& grads);

Linear linear_zeros(int out, int in);
Linear linear_init(int out, int in, std::mt19937_64& rng);
Mlp mlp_zeros_like(const Mlp& m);

}  // namespace cddrive
