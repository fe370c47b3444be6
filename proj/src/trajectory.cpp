#include "cddrive/trajectory.hpp"

#include <nlohmann/json.hpp>

namespace cddrive {

double wrap_heading(double psi) {
    if (!std::isfinite(psi)) {
        throw std::invalid_argument("wrap_heading: non-finite heading");
    }
    double w = std::fmod(psi, 2.0 * kPi);
    if (w <= -kPi) w += 2.0 * kPi;
    if (w > kPi) w -= 2.0 * kPi;
    return w;
}

double l2_distance(const Trajectory& a, const Trajectory& b, bool include_heading) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("l2_distance: length mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double dx = a.points[i].x - b.points[i].x;
        const double dy = a.points[i].y - b.points[i].y;
        acc += dx * dx + dy * dy;
        if (include_heading) {
            const double dpsi = a.points[i].psi - b.points[i].psi;
            acc += dpsi * dpsi;
        }
    }
    return std::sqrt(acc);
}

double ade(const Trajectory& pred, const Trajectory& gt) {
    if (pred.size() != gt.size()) {
        throw std::invalid_argument("ade: length mismatch");
    }
    if (pred.size() == 0) {
        throw std::invalid_argument("ade: empty trajectory");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double dx = pred.points[i].x - gt.points[i].x;
        const double dy = pred.points[i].y - gt.points[i].y;
        acc += std::sqrt(dx * dx + dy * dy);
    }
    return acc / static_cast<double>(pred.size());
}

PositionSeq positions(const Trajectory& t) {
    PositionSeq p(static_cast<Eigen::Index>(t.size()), 2);
    for (std::size_t i = 0; i < t.size(); ++i) {
        p(static_cast<Eigen::Index>(i), 0) = t.points[i].x;
        p(static_cast<Eigen::Index>(i), 1) = t.points[i].y;
    }
    return p;
}

double position_l2(const PositionSeq& a, const PositionSeq& b) {
    if (a.rows() != b.rows()) {
        throw std::invalid_argument("position_l2: length mismatch");
    }
    return (a - b).norm();
}

Trajectory make_trajectory(const PositionSeq& p, const Eigen::VectorXd& psi, double dt) {
    if (p.rows() != psi.size()) {
        throw std::invalid_argument("make_trajectory: shape mismatch");
    }
    Trajectory t;
    t.horizon_dt = dt;
    t.points.resize(static_cast<std::size_t>(p.rows()));
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        t.points[static_cast<std::size_t>(i)] = {p(i, 0), p(i, 1), wrap_heading(psi(i))};
    }
    return t;
}

Eigen::VectorXd headings_from_positions(const PositionSeq& p) {
    const Eigen::Index n = p.rows();
    Eigen::VectorXd psi(n);
    double prev = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (i + 1 < n) {
            const double dx = p(i + 1, 0) - p(i, 0);
            const double dy = p(i + 1, 1) - p(i, 1);
            if (dx * dx + dy * dy > 1e-18) {
                prev = std::atan2(dy, dx);
            }
        }
        psi(i) = prev;
    }
    return psi;
}

void validate_trajectory(const Trajectory& t) {
    if (t.points.empty()) {
        throw std::invalid_argument("trajectory: empty");
    }
    if (!(t.horizon_dt > 0.0)) {
        throw std::invalid_argument("trajectory: nonpositive horizon_dt");
    }
    for (const auto& w : t.points) {
        if (!std::isfinite(w.x) || !std::isfinite(w.y) || !std::isfinite(w.psi)) {
            throw std::invalid_argument("trajectory: non-finite waypoint");
        }
        if (w.psi <= -kPi || w.psi > kPi) {
            throw std::invalid_argument("trajectory: heading outside (-pi, pi]");
        }
    }
}

nlohmann::json trajectory_to_json(const Trajectory& t) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& w : t.points) {
        pts.push_back({w.x, w.y, w.psi});
    }
    return nlohmann::json{{"dt", t.horizon_dt}, {"points", std::move(pts)}};
}

Trajectory trajectory_from_json(const nlohmann::json& j) {
    Trajectory t;
    t.horizon_dt = j.at("dt").get<double>();
    for (const auto& p : j.at("points")) {
        t.points.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
    }
    validate_trajectory(t);
    return t;
}

nlohmann::json vocabulary_to_json(const Vocabulary& v) {
    nlohmann::json anchors = nlohmann::json::array();
    for (const auto& a : v.anchors) anchors.push_back(trajectory_to_json(a));
    return nlohmann::json{{"k", v.k}, {"seed", v.seed}, {"anchors", std::move(anchors)}};
}

Vocabulary vocabulary_from_json(const nlohmann::json& j) {
    Vocabulary v;
    v.k = j.at("k").get<int>();
    v.seed = j.at("seed").get<unsigned long long>();
    for (const auto& a : j.at("anchors")) v.anchors.push_back(trajectory_from_json(a));
    if (static_cast<int>(v.anchors.size()) != v.k) {
        throw std::invalid_argument("vocabulary: anchor count does not match k");
    }
    return v;
}

}  // namespace cddrive
