#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cddrive/config.hpp"
#include "cddrive/diffusion.hpp"
#include "cddrive/hatna.hpp"
#include "cddrive/mlp.hpp"
#include "cddrive/trajectory.hpp"

namespace cddrive {

// Refinement / heading trunk plus the candidate scorer.
struct DenoiserNet {
    Mlp trunk;         // in: 2n + d_z + d_t, SiLU-activated feature
    Linear head_dp;    // feature -> 2n
    Linear head_psi;   // feature -> n heading logits
    Mlp scorer;        // in: 3n + 2 d_z, SiLU-activated feature
    Linear head_score; // feature -> 6 logits (im, NC, DAC, EP, TTC, Comf)
};

// Latent rollout and the occupancy decoders.
struct WorldModelNet {
    Mlp rollout;       // in: d_z + 3n -> d_z latent (linear output)
    Linear decode;     // latent -> G*G occupancy logits
    Linear agent_head; // latent -> G*G agent-channel logits
    Linear bev_head;   // z -> G*G current-frame logits
};

struct PlannerModel {
    RunConfig cfg;
    NoiseSchedule sched;
    HatnaConfig hatna;
    DenoiserNet den;
    WorldModelNet wm;
};

PlannerModel make_model(const RunConfig& cfg);
// Same shapes as m, all parameters zero (gradient accumulator).
PlannerModel zeros_like(const PlannerModel& m);

// Flat views over every learnable parameter (fixed traversal order,
// HATNA log gains included).
struct ParamBlock {
    double* data;
    long size;
};
std::vector<ParamBlock> collect_params(PlannerModel& m);

Eigen::VectorXd timestep_embedding(int t, int dim);

struct DenoiserCache {
    MlpCache trunk;
    Eigen::VectorXd feature;
    Eigen::VectorXd psi_tanh;  // tanh of heading logits
};

struct DenoiserOut {
    Eigen::MatrixXd dp;       // n x 2
    Eigen::VectorXd psi;      // n, squashed by pi*tanh
};

DenoiserOut denoiser_forward(const PlannerModel& m, const Eigen::MatrixXd& p_t,
                             const Eigen::VectorXd& z, int t, DenoiserCache* cache = nullptr);

// d_dp is dL/d dp, d_psi is dL/d psi (post-squash). Returns dL/d p_t.
Eigen::MatrixXd denoiser_backward(const PlannerModel& m, const DenoiserCache& cache,
                                  const Eigen::MatrixXd& d_dp, const Eigen::VectorXd& d_psi,
                                  PlannerModel& grads);

Eigen::VectorXd flatten_trajectory(const Trajectory& t);  // x0,y0,psi0,...

struct ScorerCache {
    MlpCache scorer;
    Eigen::VectorXd feature;
};

// Raw 6 logits for one candidate; set-level softmax/sigmoid applied by callers.
Eigen::VectorXd scorer_forward(const PlannerModel& m, const Eigen::VectorXd& cand_flat,
                               const Eigen::VectorXd& z, const Eigen::VectorXd& z_rollout,
                               ScorerCache* cache = nullptr);

// Returns dL/d input (cand ++ z ++ z_rollout).
Eigen::VectorXd scorer_backward(const PlannerModel& m, const ScorerCache& cache,
                                const Eigen::VectorXd& d_logits, PlannerModel& grads);

struct RolloutCache {
    MlpCache rollout;
};

Eigen::VectorXd wm_rollout(const PlannerModel& m, const Eigen::VectorXd& z,
                           const Eigen::VectorXd& cand_flat, RolloutCache* cache = nullptr);
Eigen::VectorXd wm_rollout_backward(const PlannerModel& m, const RolloutCache& cache,
                                    const Eigen::VectorXd& d_latent, PlannerModel& grads);

// Per-cell occupancy probabilities.
Eigen::VectorXd wm_decode_grid(const PlannerModel& m, const Eigen::VectorXd& latent);

nlohmann::json model_to_json(const PlannerModel& m);
PlannerModel model_from_json(const nlohmann::json& j);

// Atomic (write-temp-then-rename) checkpoint IO.
void save_checkpoint(const PlannerModel& m, const std::string& path);
PlannerModel load_checkpoint(const std::string& path);

}  // namespace cddrive
