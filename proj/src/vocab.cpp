#include "cddrive/vocab.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <set>

namespace cddrive {

namespace {

Eigen::VectorXd flatten_positions(const Trajectory& t) {
    Eigen::VectorXd v(2 * static_cast<Eigen::Index>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i) {
        v(2 * static_cast<Eigen::Index>(i)) = t.points[i].x;
        v(2 * static_cast<Eigen::Index>(i) + 1) = t.points[i].y;
    }
    return v;
}

}  // namespace

Vocabulary build_vocabulary(const std::vector<Trajectory>& experts, int k,
                            unsigned long long seed, int max_iters) {
    if (experts.empty()) throw std::invalid_argument("build_vocabulary: empty input");
    const std::size_t n = experts[0].size();
    const double dt = experts[0].horizon_dt;
    for (const auto& e : experts) {
        if (e.size() != n) throw std::invalid_argument("build_vocabulary: length mismatch");
    }

    std::vector<Eigen::VectorXd> pts;
    pts.reserve(experts.size());
    for (const auto& e : experts) pts.push_back(flatten_positions(e));

    // Count distinct points (exact comparison; experts are generated data).
    {
        std::set<std::vector<double>> distinct;
        for (const auto& p : pts) distinct.insert({p.data(), p.data() + p.size()});
        if (k <= 0 || static_cast<std::size_t>(k) > distinct.size()) {
            throw std::invalid_argument("build_vocabulary: k exceeds distinct expert count");
        }
    }

    std::mt19937_64 rng(seed);
    const std::size_t m = pts.size();

    // kmeans++ seeding.
    std::vector<Eigen::VectorXd> centers;
    centers.reserve(static_cast<std::size_t>(k));
    {
        std::uniform_int_distribution<std::size_t> pick(0, m - 1);
        centers.push_back(pts[pick(rng)]);
        std::vector<double> d2(m);
        while (centers.size() < static_cast<std::size_t>(k)) {
            double total = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                double best = std::numeric_limits<double>::infinity();
                for (const auto& c : centers) best = std::min(best, (pts[i] - c).squaredNorm());
                d2[i] = best;
                total += best;
            }
            std::uniform_real_distribution<double> u(0.0, total);
            double r = u(rng);
            std::size_t chosen = m - 1;
            for (std::size_t i = 0; i < m; ++i) {
                r -= d2[i];
                if (r <= 0.0) {
                    chosen = i;
                    break;
                }
            }
            centers.push_back(pts[chosen]);
        }
    }

    std::vector<int> assign(m, -1);
    for (int iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < m; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = (pts[i] - centers[static_cast<std::size_t>(c)]).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;

        std::vector<Eigen::VectorXd> sums(static_cast<std::size_t>(k),
                                          Eigen::VectorXd::Zero(pts[0].size()));
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < m; ++i) {
            sums[static_cast<std::size_t>(assign[i])] += pts[i];
            ++counts[static_cast<std::size_t>(assign[i])];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                centers[static_cast<std::size_t>(c)] =
                    sums[static_cast<std::size_t>(c)] / counts[static_cast<std::size_t>(c)];
            } else {
                // Reseed an empty cluster with the farthest point.
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < m; ++i) {
                    const double d =
                        (pts[i] - centers[static_cast<std::size_t>(assign[i])]).squaredNorm();
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                centers[static_cast<std::size_t>(c)] = pts[far];
                assign[far] = c;
            }
        }
    }

    Vocabulary v;
    v.k = k;
    v.seed = seed;
    for (int c = 0; c < k; ++c) {
        PositionSeq p(static_cast<Eigen::Index>(n), 2);
        for (std::size_t i = 0; i < n; ++i) {
            p(static_cast<Eigen::Index>(i), 0) = centers[static_cast<std::size_t>(c)](2 * static_cast<Eigen::Index>(i));
            p(static_cast<Eigen::Index>(i), 1) = centers[static_cast<std::size_t>(c)](2 * static_cast<Eigen::Index>(i) + 1);
        }
        v.anchors.push_back(make_trajectory(p, headings_from_positions(p), dt));
    }
    return v;
}

int nearest_anchor(const Vocabulary& vocab, const Trajectory& traj) {
    if (vocab.anchors.empty()) throw std::invalid_argument("nearest_anchor: empty vocabulary");
    const PositionSeq p = positions(traj);
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < vocab.anchors.size(); ++i) {
        const double d = position_l2(positions(vocab.anchors[i]), p);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

}  // namespace cddrive
