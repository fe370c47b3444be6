#include "cddrive/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "cddrive/diffusion.hpp"
#include "cddrive/pipeline.hpp"

namespace cddrive {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

Eigen::MatrixXd sample_noise(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd eps(n, 2);
    for (int i = 0; i < n; ++i) {
        eps(i, 0) = gauss(rng);
        eps(i, 1) = gauss(rng);
    }
    return eps;
}

// Unrolled refinement graph for one anchor.
struct CandGraph {
    Eigen::MatrixXd eps;  // raw noise (diffusion only)
    std::vector<DenoiserCache> caches;
    Trajectory traj;
};

Eigen::VectorXd sigmoid(const Eigen::VectorXd& x) {
    return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

}  // namespace

double lr_at(const RunConfig& cfg, int step) {
    if (step < cfg.warmup_steps) {
        return cfg.lr * (step + 1) / std::max(1, cfg.warmup_steps);
    }
    const int span = std::max(1, cfg.train_steps - cfg.warmup_steps);
    const double u = static_cast<double>(step - cfg.warmup_steps) / span;
    return cfg.lr_min + 0.5 * (cfg.lr - cfg.lr_min) * (1.0 + std::cos(kPi * std::min(u, 1.0)));
}

LossParts training_step_losses(const PlannerModel& model, const Scene& scene,
                               const Vocabulary& vocab, unsigned long long noise_seed,
                               PlannerModel& grads) {
    const RunConfig& cfg = model.cfg;
    const int n = cfg.n;
    const int K = static_cast<int>(vocab.anchors.size());
    const Eigen::VectorXd z = encode_scene(scene);
    const Trajectory& gt = scene.expert;
    const MetricParams mp{cfg.ttc_threshold, cfg.a_max, cfg.r_max, cfg.ego_half};
    const LossWeights& lw = cfg.loss;

    std::mt19937_64 rng(noise_seed);
    const auto steps = ddim_timesteps(model.sched);
    const bool regression = cfg.refiner == RefinerKind::regression;

    // --- refined candidates with cached forward passes ---
    std::vector<CandGraph> graphs(static_cast<std::size_t>(K));
    std::vector<Trajectory> refined(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        CandGraph& g = graphs[static_cast<std::size_t>(k)];
        const Eigen::MatrixXd anchor = positions(vocab.anchors[static_cast<std::size_t>(k)]);
        Eigen::MatrixXd p_final;
        Eigen::VectorXd psi;
        if (regression) {
            g.caches.resize(1);
            const DenoiserOut out = denoiser_forward(model, anchor, z, 0, &g.caches[0]);
            p_final = anchor + out.dp;
            psi = out.psi;
        } else {
            g.eps = sample_noise(rng, n);
            const Eigen::MatrixXd eps_used =
                cfg.hatna_enabled ? hatna_adapt(model.hatna, g.eps) : g.eps;
            Eigen::MatrixXd p = truncated_init(model.sched, anchor, eps_used);
            g.caches.resize(steps.size());
            for (std::size_t s = 0; s < steps.size(); ++s) {
                const auto [t, t_prev] = steps[s];
                const DenoiserOut out = denoiser_forward(model, p, z, t, &g.caches[s]);
                if (s + 1 == steps.size()) psi = out.psi;
                p = ddim_step(model.sched, p, anchor + out.dp, t, t_prev);
            }
            p_final = p;
        }
        Eigen::VectorXd wrapped(psi.size());
        for (Eigen::Index i = 0; i < psi.size(); ++i) wrapped(i) = wrap_heading(psi(i));
        refined[static_cast<std::size_t>(k)] = make_trajectory(p_final, wrapped, cfg.dt);
        g.traj = refined[static_cast<std::size_t>(k)];
    }

    LossParts parts;

    // --- WTA trajectory loss on the refined candidates ---
    const auto [traj_loss, winner] = wta_loss(refined, gt, cfg.heading_in_distance);
    parts.traj = traj_loss;
    {
        const CandGraph& g = graphs[static_cast<std::size_t>(winner)];
        Eigen::MatrixXd d_pos(n, 2);
        Eigen::VectorXd d_psi(n);
        const double scale = lw.lambda_traj / n;
        for (int i = 0; i < n; ++i) {
            d_pos(i, 0) = scale * sign(g.traj.points[static_cast<std::size_t>(i)].x -
                                       gt.points[static_cast<std::size_t>(i)].x);
            d_pos(i, 1) = scale * sign(g.traj.points[static_cast<std::size_t>(i)].y -
                                       gt.points[static_cast<std::size_t>(i)].y);
            d_psi(i) = scale * sign(g.traj.points[static_cast<std::size_t>(i)].psi -
                                    gt.points[static_cast<std::size_t>(i)].psi);
        }
        if (regression) {
            denoiser_backward(model, g.caches[0], d_pos, d_psi, grads);
        } else {
            Eigen::MatrixXd d_out = d_pos;  // dL/d output of the last ddim step
            for (std::size_t s = steps.size(); s-- > 0;) {
                const auto [t, t_prev] = steps[s];
                const auto [a, b] = ddim_coeffs(model.sched, t, t_prev);
                const Eigen::MatrixXd d_dp = b * d_out;
                const Eigen::VectorXd d_psi_s =
                    (s + 1 == steps.size()) ? d_psi : Eigen::VectorXd();
                Eigen::MatrixXd d_p = denoiser_backward(model, g.caches[s], d_dp, d_psi_s, grads);
                d_p += a * d_out;
                d_out = std::move(d_p);
            }
            // d_out is now dL/d p_init; chain into the HATNA gains.
            if (cfg.hatna_enabled) {
                const double coef = std::sqrt(1.0 - model.sched.abar(model.sched.t_truncate));
                grads.hatna.gain_log +=
                    hatna_gain_grad(model.hatna, g.eps, (coef * d_out).eval());
            }
        }
    }

    // --- union candidate set scoring (vocabulary first, refined second) ---
    std::vector<Trajectory> unionset;
    unionset.reserve(static_cast<std::size_t>(2 * K));
    for (const auto& a : vocab.anchors) unionset.push_back(a);
    for (const auto& r : refined) unionset.push_back(r);
    const int mc = static_cast<int>(unionset.size());
    const int winner_idx = K + winner;

    std::vector<Eigen::VectorXd> flats(static_cast<std::size_t>(mc));
    std::vector<RolloutCache> rcaches(static_cast<std::size_t>(mc));
    std::vector<ScorerCache> scaches(static_cast<std::size_t>(mc));
    std::vector<Eigen::VectorXd> latents(static_cast<std::size_t>(mc));
    Eigen::MatrixXd logits(mc, 6);
    for (int i = 0; i < mc; ++i) {
        flats[static_cast<std::size_t>(i)] = flatten_trajectory(unionset[static_cast<std::size_t>(i)]);
        latents[static_cast<std::size_t>(i)] =
            wm_rollout(model, z, flats[static_cast<std::size_t>(i)], &rcaches[static_cast<std::size_t>(i)]);
        logits.row(i) = scorer_forward(model, flats[static_cast<std::size_t>(i)], z,
                                       latents[static_cast<std::size_t>(i)],
                                       &scaches[static_cast<std::size_t>(i)])
                            .transpose();
    }

    // Imitation CE over the joint softmax.
    const Eigen::VectorXd target_im = imitation_targets(unionset, gt, cfg.heading_in_distance);
    Eigen::VectorXd pred_im;
    {
        const double mx = logits.col(0).maxCoeff();
        Eigen::VectorXd e = (logits.col(0).array() - mx).exp().matrix();
        pred_im = e / e.sum();
    }
    parts.im = imitation_loss(pred_im, target_im);

    // Simulation BCE against the evaluator's true sub-metrics.
    Eigen::MatrixXd sim_target(mc, 5);
    Eigen::MatrixXd sim_pred(mc, 5);
    for (int i = 0; i < mc; ++i) {
        const SubMetrics sm = evaluate_submetrics(scene, unionset[static_cast<std::size_t>(i)], mp);
        sim_target.row(i) << sm.nc, sm.dac, sm.ep, sm.ttc, sm.comf;
        sim_pred.row(i) = sigmoid(logits.row(i).segment(1, 5).transpose()).transpose();
    }
    parts.sim = simulation_loss(sim_pred, sim_target);

    // --- world-model and auxiliary focal losses ---
    const OccupancyGrid grid_future = ground_truth_grid(scene, n, cfg.grid_g, cfg.grid_cell);
    const OccupancyGrid grid_agents = ground_truth_grid(scene, n, cfg.grid_g, cfg.grid_cell, true);
    const OccupancyGrid grid_now = ground_truth_grid(scene, 0, cfg.grid_g, cfg.grid_cell);

    const Eigen::VectorXd& latent_w = latents[static_cast<std::size_t>(winner_idx)];
    const Eigen::VectorXd lwm_logits = linear_forward(model.wm.decode, latent_w);
    const Eigen::VectorXd lwm_probs = sigmoid(lwm_logits);
    parts.lwm = focal_loss(lwm_probs, grid_future);

    const Eigen::VectorXd agent_logits = linear_forward(model.wm.agent_head, latent_w);
    const Eigen::VectorXd agent_probs = sigmoid(agent_logits);
    parts.agent = focal_loss(agent_probs, grid_agents);

    const Eigen::VectorXd bev_logits = linear_forward(model.wm.bev_head, z);
    const Eigen::VectorXd bev_probs = sigmoid(bev_logits);
    parts.bev = focal_loss(bev_probs, grid_now);

    // Backward: decoder heads into the winner's latent.
    Eigen::VectorXd d_latent_extra = Eigen::VectorXd::Zero(cfg.d_z);
    {
        const Eigen::VectorXd d_logits =
            (lw.lambda_lwm * focal_loss_grad(lwm_probs, grid_future).array() *
             lwm_probs.array() * (1.0 - lwm_probs.array()))
                .matrix();
        d_latent_extra += linear_backward(model.wm.decode, latent_w, d_logits, grads.wm.decode);
    }
    {
        const Eigen::VectorXd d_logits =
            (lw.lambda_agent * focal_loss_grad(agent_probs, grid_agents).array() *
             agent_probs.array() * (1.0 - agent_probs.array()))
                .matrix();
        d_latent_extra +=
            linear_backward(model.wm.agent_head, latent_w, d_logits, grads.wm.agent_head);
    }
    {
        const Eigen::VectorXd d_logits =
            (lw.lambda_bev * focal_loss_grad(bev_probs, grid_now).array() * bev_probs.array() *
             (1.0 - bev_probs.array()))
                .matrix();
        linear_backward(model.wm.bev_head, z, d_logits, grads.wm.bev_head);
    }

    // Backward through the scorer and rollout for every candidate.
    const double sim_scale = lw.lambda_sim / static_cast<double>(mc * 5);
    for (int i = 0; i < mc; ++i) {
        Eigen::VectorXd d_logits(6);
        d_logits(0) = lw.lambda_im * (pred_im(i) - target_im(i));
        for (int j = 0; j < 5; ++j) {
            d_logits(1 + j) = sim_scale * (sim_pred(i, j) - sim_target(i, j));
        }
        const Eigen::VectorXd d_in =
            scorer_backward(model, scaches[static_cast<std::size_t>(i)], d_logits, grads);
        Eigen::VectorXd d_latent = d_in.tail(cfg.d_z);
        if (i == winner_idx) d_latent += d_latent_extra;
        wm_rollout_backward(model, rcaches[static_cast<std::size_t>(i)], d_latent, grads);
    }

    return parts;
}

PlannerModel train(const RunConfig& cfg_in, const std::vector<Scene>& corpus,
                   const Vocabulary& vocab, const std::string& curve_path) {
    if (corpus.empty()) throw std::invalid_argument("train: empty corpus");
    RunConfig cfg = cfg_in;
    cfg.k = static_cast<int>(vocab.anchors.size());
    PlannerModel model = make_model(cfg);
    PlannerModel grads = zeros_like(model);

    auto params = collect_params(model);
    auto gparams = collect_params(grads);
    long total = 0;
    for (const auto& b : params) total += b.size;
    Eigen::VectorXd m1 = Eigen::VectorXd::Zero(total);
    Eigen::VectorXd m2 = Eigen::VectorXd::Zero(total);

    std::ofstream curve;
    if (!curve_path.empty()) {
        curve.open(curve_path, std::ios::binary);
        if (!curve) throw std::runtime_error("train: cannot open " + curve_path);
    }

    std::mt19937_64 order_rng(cfg.seed ^ 0x853C49E6748FEA9BULL);
    std::vector<std::size_t> perm(corpus.size());
    std::iota(perm.begin(), perm.end(), 0);

    for (int step = 0; step < cfg.train_steps; ++step) {
        if (step % static_cast<int>(corpus.size()) == 0) {
            std::shuffle(perm.begin(), perm.end(), order_rng);
        }
        const Scene& scene = perm[static_cast<std::size_t>(step) % corpus.size()] < corpus.size()
                                 ? corpus[perm[static_cast<std::size_t>(step) % corpus.size()]]
                                 : corpus[0];

        for (auto& b : gparams) std::fill(b.data, b.data + b.size, 0.0);
        const unsigned long long noise_seed =
            cfg.seed * 0x9E3779B97F4A7C15ULL + static_cast<unsigned long long>(step) + 1;
        const LossParts parts = training_step_losses(model, scene, vocab, noise_seed, grads);
        const double total_l = total_loss(parts, cfg.loss);
        if (total_l > 1e6) {
            throw std::runtime_error("train: diverged at step " + std::to_string(step) +
                                     " (loss " + std::to_string(total_l) + ")");
        }

        const double lr = lr_at(cfg, step);
        const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
        const double c1 = 1.0 - std::pow(b1, step + 1);
        const double c2 = 1.0 - std::pow(b2, step + 1);
        long off = 0;
        for (std::size_t bi = 0; bi < params.size(); ++bi) {
            double* p = params[bi].data;
            const double* g = gparams[bi].data;
            for (long i = 0; i < params[bi].size; ++i) {
                const double gi = g[i];
                m1(off + i) = b1 * m1(off + i) + (1.0 - b1) * gi;
                m2(off + i) = b2 * m2(off + i) + (1.0 - b2) * gi * gi;
                const double mh = m1(off + i) / c1;
                const double vh = m2(off + i) / c2;
                p[i] -= lr * mh / (std::sqrt(vh) + cfg.adam_eps);
            }
            off += params[bi].size;
        }

        if (curve.is_open()) {
            curve << nlohmann::json{{"step", step},
                                    {"traj", parts.traj},
                                    {"im", parts.im},
                                    {"sim", parts.sim},
                                    {"lwm", parts.lwm},
                                    {"bev", parts.bev},
                                    {"agent", parts.agent},
                                    {"total", total_l},
                                    {"lr", lr}}
                         .dump()
                  << "\n";
        }
    }
    return model;
}

}  // namespace cddrive
