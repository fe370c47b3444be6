#include "cddrive/world_model.hpp"

#include <stdexcept>

namespace cddrive {

OccupancyGrid ground_truth_grid(const Scene& scene, int horizon_step, int g, double cell,
                                bool agents_only) {
    const int n = static_cast<int>(scene.expert.size());
    if (horizon_step < 0 || horizon_step > n) {
        throw std::invalid_argument("ground_truth_grid: step outside horizon");
    }
    const double t = horizon_step * scene.expert.horizon_dt;

    OccupancyGrid grid;
    grid.g = g;
    grid.cell = cell;
    grid.cells = Eigen::VectorXd::Zero(g * g);

    const Eigen::Vector2d ego{scene.ego.x, scene.ego.y};
    const double c = std::cos(scene.ego.psi);
    const double s = std::sin(scene.ego.psi);
    const double half = 0.5 * g * cell;

    for (int r = 0; r < g; ++r) {
        for (int col = 0; col < g; ++col) {
            const double ex = (col + 0.5) * cell - half;
            const double ey = (r + 0.5) * cell - half;
            const Eigen::Vector2d world = ego + Eigen::Vector2d{c * ex - s * ey, s * ex + c * ey};

            bool occupied = false;
            for (const auto& a : scene.agents) {
                const Eigen::Vector2d pa = a.position_at(t);
                if (std::abs(world.x() - pa.x()) <= a.half_extent &&
                    std::abs(world.y() - pa.y()) <= a.half_extent) {
                    occupied = true;
                    break;
                }
            }
            if (!occupied && !agents_only) {
                occupied = centerline_distance(scene.corridor, world) > scene.corridor.half_width;
            }
            if (occupied) grid.cells(r * g + col) = 1.0;
        }
    }
    return grid;
}

}  // namespace cddrive
