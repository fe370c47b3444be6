#pragma once

#include <vector>

#include "cddrive/trajectory.hpp"

namespace cddrive {

// K-means over trajectories flattened to 2n-dimensional position vectors.
// kmeans++ seeding, Lloyd iterations to an assignment fixed point (or cap),
// empty clusters reseeded with the farthest point. Center headings are
// recomputed from consecutive position deltas.
Vocabulary build_vocabulary(const std::vector<Trajectory>& experts, int k,
                            unsigned long long seed, int max_iters = 100);

// Argmin over anchors of position-sequence l2 distance; ties break low.
int nearest_anchor(const Vocabulary& vocab, const Trajectory& traj);

}  // namespace cddrive
