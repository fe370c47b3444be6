#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cddrive/model.hpp"
#include "cddrive/scenario.hpp"
#include "cddrive/vocab.hpp"

namespace cddrive {

enum class CandidateMode { vocab_only, diffusion_only, unified };

std::string mode_name(CandidateMode m);
CandidateMode mode_from_name(const std::string& s);

struct Candidate {
    Trajectory traj;
    bool from_vocab = false;
    int anchor_index = -1;
};

struct CandidateSet {
    std::vector<Candidate> items;
};

// Scene-adapted candidates: one refined trajectory per anchor. Diffusion
// refiners run the truncated DDIM loop on HATNA-adapted noise; the
// regression refiner is a single forward pass from the anchor.
std::vector<Trajectory> refine_candidates(const PlannerModel& model, const Vocabulary& vocab,
                                          const Eigen::VectorXd& z, unsigned long long seed);

CandidateSet build_candidates(CandidateMode mode, const Vocabulary& vocab,
                              const PlannerModel* model, const Scene& scene,
                              unsigned long long seed);

// Scores every candidate (vocab and refined alike) through one code path.
// Returns an m x 6 matrix: column 0 is the imitation score softmaxed
// jointly over the set, columns 1..5 are per-candidate sigmoids.
Eigen::MatrixXd score_candidate_set(const PlannerModel& model, const Eigen::VectorXd& z,
                                    const CandidateSet& set);

// Weighted-sum decision rule; ties break toward the lowest index.
std::pair<int, Trajectory> decide(const CandidateSet& set, const Eigen::MatrixXd& scores,
                                  const ScoreWeights& w);

struct ModeStats {
    int count = 0;
    double mean_pdms = 0.0;
    double mean_nc = 0.0;
    double mean_dac = 0.0;
    double mean_ep = 0.0;
    double mean_ttc = 0.0;
    double mean_comf = 0.0;
    double mean_ade = 0.0;          // decided trajectory vs expert
    double mean_refined_min_ade = 0.0;  // best refined candidate vs expert
};

struct EvalReport {
    std::string mode;
    std::string refiner;
    bool hatna_enabled = false;
    int n_scenes = 0;
    ModeStats overall;
    ModeStats routine;
    ModeStats interactive;
    // Mean second-difference magnitude of refined candidate positions.
    double kink_stat = 0.0;
};

EvalReport evaluate(const std::vector<Scene>& corpus, CandidateMode mode,
                    const PlannerModel& model, const Vocabulary& vocab, const ScoreWeights& w,
                    unsigned long long seed);

nlohmann::json report_to_json(const EvalReport& r);

// Mean second-difference magnitude of a trajectory's positions.
double kink_statistic(const Trajectory& t);

// Static SVG: corridor, agents, expert (green), selected vocabulary
// candidate (red), paired diffusion candidate (blue).
void plot_scene(const Scene& scene, const CandidateSet& set, int decided,
                const std::string& path);

}  // namespace cddrive
