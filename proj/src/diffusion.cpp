#include "cddrive/diffusion.hpp"

#include <cmath>
#include <stdexcept>

namespace cddrive {

NoiseSchedule NoiseSchedule::linear_beta(int T, double beta_start, double beta_end, int t_truncate,
                                         int ddim_stride) {
    NoiseSchedule s;
    s.T = T;
    s.t_truncate = t_truncate;
    s.ddim_stride = ddim_stride;
    s.alpha.resize(T);
    s.alpha_bar.resize(T);
    double prod = 1.0;
    for (int t = 1; t <= T; ++t) {
        const double beta = beta_start + (beta_end - beta_start) * (t - 1) / std::max(1, T - 1);
        s.alpha(t - 1) = 1.0 - beta;
        prod *= s.alpha(t - 1);
        s.alpha_bar(t - 1) = prod;
    }
    s.validate();
    return s;
}

double NoiseSchedule::abar(int t) const {
    if (t == 0) return 1.0;
    if (t < 1 || t > T) throw std::invalid_argument("abar: step out of range");
    return alpha_bar(t - 1);
}

void NoiseSchedule::validate() const {
    if (T < 1 || alpha.size() != T || alpha_bar.size() != T) {
        throw std::invalid_argument("schedule: bad shapes");
    }
    double prod = 1.0;
    for (int t = 0; t < T; ++t) {
        if (!(alpha(t) > 0.0 && alpha(t) < 1.0)) {
            throw std::invalid_argument("schedule: alpha out of (0,1)");
        }
        prod *= alpha(t);
        if (std::abs(prod - alpha_bar(t)) > 1e-14 * std::max(1.0, std::abs(prod))) {
            throw std::invalid_argument("schedule: alpha_bar mismatch");
        }
        if (t > 0 && !(alpha_bar(t) < alpha_bar(t - 1))) {
            throw std::invalid_argument("schedule: alpha_bar not strictly decreasing");
        }
    }
    if (t_truncate < 1 || t_truncate > T / 4) {
        throw std::invalid_argument("schedule: t_truncate must satisfy 1 <= t_tr <= T/4");
    }
    if (ddim_stride < 1) throw std::invalid_argument("schedule: stride must be >= 1");
}

Eigen::MatrixXd forward_noise(const NoiseSchedule& sched, const Eigen::MatrixXd& p0, int t,
                              const Eigen::MatrixXd& eps) {
    if (t < 0 || t > sched.T) throw std::invalid_argument("forward_noise: step out of range");
    if (eps.rows() != p0.rows() || eps.cols() != p0.cols()) {
        throw std::invalid_argument("forward_noise: shape mismatch");
    }
    const double ab = sched.abar(t);
    return std::sqrt(ab) * p0 + std::sqrt(1.0 - ab) * eps;
}

Eigen::MatrixXd truncated_init(const NoiseSchedule& sched, const Eigen::MatrixXd& anchor,
                               const Eigen::MatrixXd& eps_adapted) {
    return forward_noise(sched, anchor, sched.t_truncate, eps_adapted);
}

std::pair<double, double> ddim_coeffs(const NoiseSchedule& sched, int t, int t_prev) {
    if (t_prev >= t) throw std::invalid_argument("ddim_step: t_prev must be < t");
    if (t_prev == 0) return {0.0, 1.0};
    const double ab_t = sched.abar(t);
    const double ab_prev = sched.abar(t_prev);
    const double a = std::sqrt((1.0 - ab_prev) / (1.0 - ab_t));
    const double b = std::sqrt(ab_prev) - a * std::sqrt(ab_t);
    return {a, b};
}

Eigen::MatrixXd ddim_step(const NoiseSchedule& sched, const Eigen::MatrixXd& p_t,
                          const Eigen::MatrixXd& p0_hat, int t, int t_prev) {
    const auto [a, b] = ddim_coeffs(sched, t, t_prev);
    return a * p_t + b * p0_hat;
}

std::vector<std::pair<int, int>> ddim_timesteps(const NoiseSchedule& sched) {
    std::vector<std::pair<int, int>> steps;
    int t = sched.t_truncate;
    while (t > 0) {
        const int t_prev = std::max(t - sched.ddim_stride, 0);
        steps.emplace_back(t, t_prev);
        t = t_prev;
    }
    return steps;
}

DenoiseResult denoise_anchor(const NoiseSchedule& sched, const RefineFn& refine,
                             const HeadingFn& heading, const Eigen::MatrixXd& anchor,
                             const Eigen::MatrixXd& eps_adapted) {
    Eigen::MatrixXd p = truncated_init(sched, anchor, eps_adapted);
    const auto steps = ddim_timesteps(sched);
    DenoiseResult out;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto [t, t_prev] = steps[i];
        const Eigen::MatrixXd p0_hat = anchor + refine(p, t);
        if (i + 1 == steps.size()) {
            out.headings = heading(p, t);
        }
        p = ddim_step(sched, p, p0_hat, t, t_prev);
    }
    out.positions = p;
    return out;
}

}  // namespace cddrive
