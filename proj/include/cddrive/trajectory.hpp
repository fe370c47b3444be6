#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace cddrive {

inline constexpr double kPi = 3.14159265358979323846;

struct Waypoint {
    double x = 0.0;
    double y = 0.0;
    double psi = 0.0;  // heading, radians in (-pi, pi]
};

// Planned trajectory: n future waypoints spaced horizon_dt seconds apart.
struct Trajectory {
    std::vector<Waypoint> points;
    double horizon_dt = 0.5;

    std::size_t size() const { return points.size(); }
};

// 2D position subsequence of a trajectory, one row per waypoint.
using PositionSeq = Eigen::Matrix<double, Eigen::Dynamic, 2>;

struct Vocabulary {
    std::vector<Trajectory> anchors;
    int k = 0;
    unsigned long long seed = 0;
};

// Wraps psi into (-pi, pi]. Throws on non-finite input.
double wrap_heading(double psi);

// Euclidean norm of stacked per-waypoint differences. include_heading
// selects stacked (x, y, psi) vs positions only.
double l2_distance(const Trajectory& a, const Trajectory& b, bool include_heading = true);

// Mean per-step 2D positional distance (heading excluded).
double ade(const Trajectory& pred, const Trajectory& gt);

PositionSeq positions(const Trajectory& t);
double position_l2(const PositionSeq& a, const PositionSeq& b);

// Rebuild a trajectory from a position matrix plus per-waypoint headings.
Trajectory make_trajectory(const PositionSeq& p, const Eigen::VectorXd& psi, double dt);

// Headings implied by consecutive position deltas (last repeated).
// Degenerate (near-zero) deltas reuse the previous heading.
Eigen::VectorXd headings_from_positions(const PositionSeq& p);

// Throws std::invalid_argument if any trajectory invariant is violated.
void validate_trajectory(const Trajectory& t);

nlohmann::json trajectory_to_json(const Trajectory& t);
Trajectory trajectory_from_json(const nlohmann::json& j);

nlohmann::json vocabulary_to_json(const Vocabulary& v);
Vocabulary vocabulary_from_json(const nlohmann::json& j);

}  // namespace cddrive
