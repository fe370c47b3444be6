#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cddrive/trajectory.hpp"

namespace cddrive {

struct EgoState {
    double x = 0.0;
    double y = 0.0;
    double psi = 0.0;
    double speed = 0.0;
};

// Constant-velocity agent with an axis-aligned square footprint of the
// given half extent.
struct Agent {
    double x = 0.0;
    double y = 0.0;
    double psi = 0.0;
    double speed = 0.0;
    double half_extent = 1.0;

    Eigen::Vector2d position_at(double t) const {
        return {x + speed * std::cos(psi) * t, y + speed * std::sin(psi) * t};
    }
};

struct Corridor {
    std::vector<Eigen::Vector2d> centerline;
    double half_width = 3.0;
};

enum class Difficulty { routine, interactive };

std::string difficulty_name(Difficulty d);
Difficulty difficulty_from_name(const std::string& s);

struct Scene {
    EgoState ego;
    std::vector<Agent> agents;
    Corridor corridor;
    Eigen::Vector2d goal_axis{1.0, 0.0};
    Trajectory expert;
    unsigned long long rng_seed = 0;
    Difficulty difficulty = Difficulty::routine;
};

struct SubMetrics {
    double nc = 0.0;
    double dac = 0.0;
    double ep = 0.0;
    double ttc = 0.0;
    double comf = 0.0;
};

// Rule thresholds for the sub-metric evaluator.
struct MetricParams {
    double ttc_threshold = 1.0;  // seconds
    double a_max = 3.0;          // m/s^2
    double r_max = 0.8;          // rad/s
    double ego_half = 1.0;       // ego square footprint half extent, m
};

struct SceneGenParams {
    int n = 8;
    double dt = 0.5;
    int max_attempts = 400;
    MetricParams metrics;
};

Scene generate_scene(unsigned long long seed, Difficulty difficulty,
                     const SceneGenParams& params = {});

inline constexpr int kSceneFeatureDim = 32;
inline constexpr int kMaxEncodedAgents = 4;

// Fixed-length ego-frame feature vector z. Layout:
//   [0]     ego speed
//   [1]     corridor half width
//   [2..5]  centerline tangent heading (ego frame) at 5/15/30/50 m ahead
//   [6..7]  goal progress axis (ego frame)
//   [8..31] up to 4 nearest agents, 6 values each:
//           rel x, rel y, rel vx, rel vy, half extent, valid flag
Eigen::VectorXd encode_scene(const Scene& scene);

SubMetrics evaluate_submetrics(const Scene& scene, const Trajectory& traj,
                               const MetricParams& params = {});

// NC * DAC * (5 EP + 5 TTC + 2 Comf) / 12
double pdms(const SubMetrics& m);

// NC * DAC * DDC * TLC * (5 EP + 5 TTC + 2 LK + 2 HC + 2 EC) / 16
double epdms(double nc, double dac, double ddc, double tlc, double ep,
             double ttc, double lk, double hc, double ec);

// Distance from a point to the corridor centerline polyline.
double centerline_distance(const Corridor& c, const Eigen::Vector2d& p);

nlohmann::json scene_to_json(const Scene& s);
Scene scene_from_json(const nlohmann::json& j);

// Line-delimited JSON corpus with a version header line.
void save_corpus(const std::vector<Scene>& scenes, const std::string& path);
std::vector<Scene> load_corpus(const std::string& path);

}  // namespace cddrive
