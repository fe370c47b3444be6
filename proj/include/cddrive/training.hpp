#pragma once

#include <string>
#include <vector>

#include "cddrive/losses.hpp"
#include "cddrive/model.hpp"
#include "cddrive/scenario.hpp"
#include "cddrive/vocab.hpp"

namespace cddrive {

// One joint forward/backward over a scene: diffusion (or regression)
// candidate generation with WTA supervision, union-set scoring losses,
// world-model and auxiliary focal losses. Gradients are accumulated into
// `grads` already weighted by the loss lambdas.
LossParts training_step_losses(const PlannerModel& model, const Scene& scene,
                               const Vocabulary& vocab, unsigned long long noise_seed,
                               PlannerModel& grads);

// Linear warmup then cosine decay to lr_min.
double lr_at(const RunConfig& cfg, int step);

// Seeded training loop over the corpus with an Adam optimizer. Writes
// line-delimited loss records to curve_path when non-empty.
PlannerModel train(const RunConfig& cfg, const std::vector<Scene>& corpus,
                   const Vocabulary& vocab, const std::string& curve_path = "");

}  // namespace cddrive
