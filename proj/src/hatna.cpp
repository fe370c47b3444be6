#include "cddrive/hatna.hpp"

#include <cmath>
#include <stdexcept>

namespace cddrive {

HatnaConfig HatnaConfig::defaults(int n) {
    HatnaConfig cfg;
    cfg.kernel_sigma = cfg.kernel_size / 4.0;
    cfg.gain_log = Eigen::VectorXd::Zero(n);
    return cfg;
}

Eigen::VectorXd gaussian_kernel(int size, double sigma) {
    if (size < 1 || size % 2 == 0) throw std::invalid_argument("gaussian_kernel: size must be odd");
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_kernel: sigma must be positive");
    Eigen::VectorXd k(size);
    const int r = size / 2;
    for (int j = -r; j <= r; ++j) {
        k(j + r) = std::exp(-0.5 * (j * j) / (sigma * sigma));
    }
    return k / k.sum();
}

Eigen::MatrixXd hatna_smooth(const HatnaConfig& cfg, const Eigen::MatrixXd& noise) {
    const Eigen::VectorXd k = gaussian_kernel(cfg.kernel_size, cfg.kernel_sigma);
    const int r = cfg.kernel_size / 2;
    const Eigen::Index n = noise.rows();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, noise.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int j = -r; j <= r; ++j) {
            Eigen::Index src = i + j;
            if (src < 0) src = 0;          // replicate padding
            if (src >= n) src = n - 1;
            out.row(i) += k(j + r) * noise.row(src);
        }
    }
    return out;
}

Eigen::VectorXd hatna_scale_profile(const HatnaConfig& cfg, int n) {
    if (n < 2) throw std::invalid_argument("hatna_scale_profile: n must be >= 2");
    Eigen::VectorXd s(n);
    for (int i = 0; i < n; ++i) {
        const double base = std::pow(static_cast<double>(i) / (n - 1) + cfg.epsilon, cfg.alpha);
        const double gain = (cfg.gain_log.size() == n) ? std::exp(cfg.gain_log(i)) : 1.0;
        s(i) = base * gain;
    }
    return s;
}

Eigen::MatrixXd hatna_adapt(const HatnaConfig& cfg, const Eigen::MatrixXd& noise) {
    const Eigen::VectorXd s = hatna_scale_profile(cfg, static_cast<int>(noise.rows()));
    return s.asDiagonal() * hatna_smooth(cfg, noise);
}

Eigen::VectorXd hatna_gain_grad(const HatnaConfig& cfg, const Eigen::MatrixXd& noise,
                                const Eigen::MatrixXd& d_out) {
    // out_{i,d} = smooth(noise)_{i,d} * s_i with ds_i/dg_i = s_i.
    const Eigen::MatrixXd sm = hatna_smooth(cfg, noise);
    const Eigen::VectorXd s = hatna_scale_profile(cfg, static_cast<int>(noise.rows()));
    Eigen::VectorXd g(noise.rows());
    for (Eigen::Index i = 0; i < noise.rows(); ++i) {
        g(i) = s(i) * sm.row(i).dot(d_out.row(i));
    }
    return g;
}

}  // namespace cddrive
