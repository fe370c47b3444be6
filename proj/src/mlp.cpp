#include "cddrive/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace cddrive {

double silu(double x) { return x / (1.0 + std::exp(-x)); }

double silu_grad(double x) {
    const double s = 1.0 / (1.0 + std::exp(-x));
    return s * (1.0 + x * (1.0 - s));
}

Eigen::VectorXd linear_forward(const Linear& l, const Eigen::VectorXd& x) {
    if (l.W.cols() != x.size()) throw std::invalid_argument("linear_forward: shape mismatch");
    return l.W * x + l.b;
}

Eigen::VectorXd linear_backward(const Linear& l, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& dy, Linear& g) {
    g.W.noalias() += dy * x.transpose();
    g.b += dy;
    return l.W.transpose() * dy;
}

Eigen::VectorXd mlp_forward(const Mlp& m, const Eigen::VectorXd& x, MlpCache* cache) {
    Eigen::VectorXd h = x;
    if (cache) {
        cache->input = x;
        cache->pre.clear();
        cache->post.clear();
    }
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        Eigen::VectorXd pre = linear_forward(m.layers[i], h);
        const bool act = (i + 1 < m.layers.size()) || m.activate_last;
        Eigen::VectorXd post = act ? pre.unaryExpr([](double v) { return silu(v); }) : pre;
        if (cache) {
            cache->pre.push_back(pre);
            cache->post.push_back(post);
        }
        h = std::move(post);
    }
    return h;
}

Eigen::VectorXd mlp_backward(const Mlp& m, const MlpCache& cache, const Eigen::VectorXd& dy,
                             Mlp& grads) {
    Eigen::VectorXd d = dy;
    for (std::size_t idx = m.layers.size(); idx-- > 0;) {
        const bool act = (idx + 1 < m.layers.size()) || m.activate_last;
        if (act) {
            d = d.cwiseProduct(
                cache.pre[idx].unaryExpr([](double v) { return silu_grad(v); }));
        }
        const Eigen::VectorXd& x = idx == 0 ? cache.input : cache.post[idx - 1];
        d = linear_backward(m.layers[idx], x, d, grads.layers[idx]);
    }
    return d;
}

Linear linear_zeros(int out, int in) {
    return {Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)};
}

Linear linear_init(int out, int in, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / in));
    Linear l = linear_zeros(out, in);
    for (Eigen::Index i = 0; i < l.W.rows(); ++i) {
        for (Eigen::Index j = 0; j < l.W.cols(); ++j) l.W(i, j) = dist(rng);
    }
    return l;
}

Mlp mlp_zeros_like(const Mlp& m) {
    Mlp z;
    z.activate_last = m.activate_last;
    for (const auto& l : m.layers) {
        z.layers.push_back(linear_zeros(static_cast<int>(l.W.rows()), static_cast<int>(l.W.cols())));
    }
    return z;
}

}  // namespace cddrive
