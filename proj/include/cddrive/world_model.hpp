#pragma once

#include <Eigen/Dense>

#include "cddrive/scenario.hpp"

namespace cddrive {

// Binary occupancy over a g x g ego-centered window, row-major cells
// (row = y axis, col = x axis of the ego frame).
struct OccupancyGrid {
    int g = 16;
    double cell = 2.0;
    Eigen::VectorXd cells;  // entries in {0, 1}
};

// Rasterize the scene at time horizon_step * expert dt: cells covered by an
// agent footprint or lying outside the corridor are marked 1. agents_only
// restricts marking to agent footprints (the agent supervision channel).
OccupancyGrid ground_truth_grid(const Scene& scene, int horizon_step, int g = 16,
                                double cell = 2.0, bool agents_only = false);

}  // namespace cddrive
