#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

namespace cddrive {

struct LossWeights {
    double lambda_traj = 4.0;
    double lambda_im = 0.01;
    double lambda_sim = 0.1;
    double lambda_lwm = 0.1;
    double lambda_bev = 10.0;
    double lambda_agent = 0.1;
};

struct ScoreWeights {
    double w_im = 0.05;
    double w_nc = 0.5;
    double w_dac = 0.5;
    double w_ep = 1.0;
    double w_ttc = 1.0;
    double w_comf = 1.0;
};

enum class RefinerKind { diffusion, regression };

std::string refiner_name(RefinerKind r);
RefinerKind refiner_from_name(const std::string& s);

// Every constant of a run, serialized into checkpoints for exact replay.
struct RunConfig {
    // trajectory
    int n = 8;
    double dt = 0.5;
    bool heading_in_distance = true;

    // vocabulary
    int k = 256;

    // scene encoding / metrics
    double ttc_threshold = 1.0;
    double a_max = 3.0;
    double r_max = 0.8;
    double ego_half = 1.0;

    // network
    int d_z = 32;
    int hidden = 128;
    int d_t = 16;

    // diffusion schedule
    int T = 100;
    double beta_start = 1e-4;
    double beta_end = 0.05;
    int t_truncate = 24;
    int ddim_stride = 8;

    // HATNA
    bool hatna_enabled = true;
    int hatna_kernel_size = 5;
    double hatna_alpha = 1.0;
    double hatna_epsilon = 1e-6;

    RefinerKind refiner = RefinerKind::diffusion;

    // world model grid
    int grid_g = 16;
    double grid_cell = 2.0;

    // training
    int train_steps = 3000;
    double lr = 1e-3;
    double lr_min = 1e-5;
    int warmup_steps = 100;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    unsigned long long seed = 0;

    LossWeights loss;
    ScoreWeights score;
};

nlohmann::json run_config_to_json(const RunConfig& c);
RunConfig run_config_from_json(const nlohmann::json& j);

// FNV-1a over the canonical config dump; echoed into checkpoints.
unsigned long long config_hash(const RunConfig& c);

}  // namespace cddrive
