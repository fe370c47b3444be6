// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria 6-8 run a real (seeded, CPU, minutes-scale) training and
// check trend directions on a held-out corpus.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "cddrive/pipeline.hpp"
#include "cddrive/training.hpp"
#include "cddrive/vocab.hpp"

using namespace cddrive;

namespace {

int g_failures = 0;

void report(int idx, const char* name, bool ok, const std::string& detail = "") {
    std::printf("%s criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", idx, name,
                detail.empty() ? "" : " — ", detail.c_str());
    if (!ok) ++g_failures;
}

void run(int idx, const char* name, const std::function<std::pair<bool, std::string>()>& body) {
    try {
        const auto [ok, detail] = body();
        report(idx, name, ok, detail);
    } catch (const std::exception& e) {
        report(idx, name, false, std::string("exception: ") + e.what());
    }
}

Eigen::MatrixXd randn(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd m(n, 2);
    for (int i = 0; i < n; ++i) {
        m(i, 0) = g(rng);
        m(i, 1) = g(rng);
    }
    return m;
}

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

Trajectory random_traj(std::mt19937_64& rng, int n = 8) {
    std::uniform_real_distribution<double> pos(-10.0, 10.0);
    std::uniform_real_distribution<double> head(-3.0, 3.0);
    Trajectory t;
    t.horizon_dt = 0.5;
    for (int i = 0; i < n; ++i) t.points.push_back({pos(rng), pos(rng), wrap_heading(head(rng))});
    return t;
}

std::vector<Scene> make_corpus(int count, double interactive_frac, unsigned long long seed) {
    std::vector<Scene> out;
    const int n_inter = static_cast<int>(std::lround(count * interactive_frac));
    for (int i = 0; i < count; ++i) {
        out.push_back(generate_scene(seed + static_cast<unsigned long long>(i),
                                     i < n_inter ? Difficulty::interactive : Difficulty::routine));
    }
    return out;
}

Vocabulary corpus_vocab(const std::vector<Scene>& corpus, int k, unsigned long long seed) {
    std::vector<Trajectory> experts;
    for (const auto& s : corpus) experts.push_back(s.expert);
    return build_vocabulary(experts, k, seed);
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

int main() {
    // ---------------------------------------------------------------- 1
    run(1, "score formulas match hand evaluation", []() -> std::pair<bool, std::string> {
        std::mt19937_64 rng(101);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < 100; ++i) {
            const SubMetrics m{u(rng), u(rng), u(rng), u(rng), u(rng)};
            const double want = m.nc * m.dac * (5 * m.ep + 5 * m.ttc + 2 * m.comf) / 12.0;
            if (std::abs(pdms(m) - want) > 1e-12) return {false, "pdms tuple mismatch"};
            const double nc = u(rng), dac = u(rng), ddc = u(rng), tlc = u(rng);
            const double ep = u(rng), ttc = u(rng), lk = u(rng), hc = u(rng), ec = u(rng);
            const double w2 =
                nc * dac * ddc * tlc * (5 * ep + 5 * ttc + 2 * lk + 2 * hc + 2 * ec) / 16.0;
            if (std::abs(epdms(nc, dac, ddc, tlc, ep, ttc, lk, hc, ec) - w2) > 1e-12) {
                return {false, "epdms tuple mismatch"};
            }
        }
        // coefficient recovery via unit probes
        const bool coeffs = std::abs(pdms({1, 1, 1, 0, 0}) * 12 - 5) < 1e-12 &&
                            std::abs(pdms({1, 1, 0, 1, 0}) * 12 - 5) < 1e-12 &&
                            std::abs(pdms({1, 1, 0, 0, 1}) * 12 - 2) < 1e-12 &&
                            std::abs(epdms(1, 1, 1, 1, 1, 0, 0, 0, 0) * 16 - 5) < 1e-12 &&
                            std::abs(epdms(1, 1, 1, 1, 0, 1, 0, 0, 0) * 16 - 5) < 1e-12 &&
                            std::abs(epdms(1, 1, 1, 1, 0, 0, 1, 0, 0) * 16 - 2) < 1e-12 &&
                            std::abs(epdms(1, 1, 1, 1, 0, 0, 0, 1, 0) * 16 - 2) < 1e-12 &&
                            std::abs(epdms(1, 1, 1, 1, 0, 0, 0, 0, 1) * 16 - 2) < 1e-12;
        return {coeffs, coeffs ? "100 tuples + coefficient probes" : "coefficient probe failed"};
    });

    // ---------------------------------------------------------------- 2
    run(2, "diffusion algebra", []() -> std::pair<bool, std::string> {
        const NoiseSchedule s = NoiseSchedule::linear_beta(100, 1e-4, 0.05, 24, 8);
        std::mt19937_64 rng(102);
        std::normal_distribution<double> g(0.0, 1.0);

        // Monte Carlo: iterate the one-step kernel t times vs the closed form.
        const int t = 24, trials = 10000;
        const double p0 = 1.75;
        double sum = 0.0, sum2 = 0.0;
        for (int trial = 0; trial < trials; ++trial) {
            double p = p0;
            for (int step = 1; step <= t; ++step) {
                p = std::sqrt(s.alpha(step - 1)) * p + std::sqrt(1 - s.alpha(step - 1)) * g(rng);
            }
            sum += p;
            sum2 += p * p;
        }
        const double mean = sum / trials, var = sum2 / trials - mean * mean;
        const double want_mean = std::sqrt(s.abar(t)) * p0, want_var = 1.0 - s.abar(t);
        if (std::abs(mean - want_mean) > 3 * std::sqrt(want_var / trials)) {
            return {false, "MC mean outside 3 SE"};
        }
        if (std::abs(var - want_var) > 3 * want_var * std::sqrt(2.0 / trials)) {
            return {false, "MC variance outside 3 SE"};
        }

        // DDIM reconstruction identity.
        const Eigen::MatrixXd p0m = randn(rng, 8) * 5.0;
        const Eigen::MatrixXd eps = randn(rng, 8);
        for (auto [tt, tp] : ddim_timesteps(s)) {
            const Eigen::MatrixXd pt = forward_noise(s, p0m, tt, eps);
            const Eigen::MatrixXd want =
                tp == 0 ? p0m : Eigen::MatrixXd(forward_noise(s, p0m, tp, eps));
            if ((ddim_step(s, pt, p0m, tt, tp) - want).cwiseAbs().maxCoeff() > 1e-10) {
                return {false, "ddim reconstruction > 1e-10"};
            }
        }

        // Zero refiner is the identity on anchors.
        const Eigen::MatrixXd anchor = randn(rng, 8) * 10.0;
        const DenoiseResult r = denoise_anchor(
            s, [](const Eigen::MatrixXd& p, int) { return Eigen::MatrixXd::Zero(p.rows(), 2).eval(); },
            [](const Eigen::MatrixXd& p, int) { return Eigen::VectorXd::Zero(p.rows()).eval(); },
            anchor, eps);
        if ((r.positions - anchor).cwiseAbs().maxCoeff() > 1e-12) {
            return {false, "zero refiner not identity"};
        }
        return {true, "MC within 3 SE; DDIM identity <= 1e-10; zero-refiner identity"};
    });

    // ---------------------------------------------------------------- 3
    run(3, "noise adaptation properties", []() -> std::pair<bool, std::string> {
        HatnaConfig cfg = HatnaConfig::defaults(8);
        const Eigen::VectorXd k = gaussian_kernel(cfg.kernel_size, cfg.kernel_sigma);
        if (std::abs(k.sum() - 1.0) > 1e-12) return {false, "kernel not normalized"};

        Eigen::MatrixXd c = Eigen::MatrixXd::Constant(8, 2, 0.4);
        if ((hatna_smooth(cfg, c) - c).cwiseAbs().maxCoeff() > 1e-12) {
            return {false, "constant not a fixed point"};
        }

        HatnaConfig flat = cfg;
        flat.epsilon = 0.0;
        const Eigen::VectorXd prof = hatna_scale_profile(flat, 8);
        for (int i = 0; i < 8; ++i) {
            if (std::abs(prof(i) - i / 7.0) > 1e-12) return {false, "scale profile mismatch"};
        }

        std::mt19937_64 rng(103);
        const Eigen::MatrixXd u = randn(rng, 8), v = randn(rng, 8);
        const Eigen::MatrixXd lhs = hatna_adapt(cfg, 2.5 * u - 0.75 * v);
        const Eigen::MatrixXd rhs = 2.5 * hatna_adapt(cfg, u) - 0.75 * hatna_adapt(cfg, v);
        if ((lhs - rhs).cwiseAbs().maxCoeff() > 1e-12) return {false, "adapt not linear"};

        double near = 0.0, far = 0.0;
        for (int i = 0; i < 10000; ++i) {
            const Eigen::MatrixXd out = hatna_adapt(cfg, randn(rng, 8));
            near += out.topRows(4).norm();
            far += out.bottomRows(4).norm();
        }
        if (!(far > near)) return {false, "far-horizon noise not dominant"};
        return {true, "kernel/fixed point/profile/linearity/horizon ordering"};
    });

    // ---------------------------------------------------------------- 4
    run(4, "gradients match finite differences", []() -> std::pair<bool, std::string> {
        RunConfig cfg;
        cfg.hidden = 16;
        cfg.k = 4;
        cfg.seed = 104;
        PlannerModel m = make_model(cfg);
        std::mt19937_64 rng(104);
        m.den.head_dp = linear_init(2 * cfg.n, cfg.hidden, rng);
        m.den.head_psi = linear_init(cfg.n, cfg.hidden, rng);
        m.den.head_score = linear_init(6, cfg.hidden, rng);
        const double h = 1e-5, tol = 1e-4;
        int checked = 0;

        // denoiser: trunk + refinement + heading heads
        {
            const Eigen::MatrixXd p = randn(rng, cfg.n);
            const Eigen::VectorXd z = Eigen::VectorXd::Random(cfg.d_z);
            const Eigen::MatrixXd d_dp = randn(rng, cfg.n);
            const Eigen::VectorXd d_psi = Eigen::VectorXd::Random(cfg.n);
            DenoiserCache cache;
            denoiser_forward(m, p, z, 8, &cache);
            PlannerModel grads = zeros_like(m);
            denoiser_backward(m, cache, d_dp, d_psi, grads);
            auto loss = [&](const PlannerModel& mm) {
                const DenoiserOut o = denoiser_forward(mm, p, z, 8);
                return (o.dp.array() * d_dp.array()).sum() + o.psi.dot(d_psi);
            };
            auto probe = [&](double* param, double analytic) {
                const double keep = *param;
                *param = keep + h;
                const double lp = loss(m);
                *param = keep - h;
                const double lm = loss(m);
                *param = keep;
                ++checked;
                return rel_err(analytic, (lp - lm) / (2 * h)) <= tol;
            };
            for (int i = 0; i < 20; ++i) {
                const int r = (i * 5) % 16, c = (i * 13) % static_cast<int>(m.den.trunk.layers[0].W.cols());
                if (!probe(&m.den.trunk.layers[0].W(r, c), grads.den.trunk.layers[0].W(r, c))) {
                    return {false, "trunk gradient probe failed"};
                }
            }
            for (int i = 0; i < 20; ++i) {
                const int r = i % (2 * cfg.n), c = (i * 7) % cfg.hidden;
                if (!probe(&m.den.head_dp.W(r, c), grads.den.head_dp.W(r, c))) {
                    return {false, "refinement head probe failed"};
                }
                const int rp = i % cfg.n;
                if (!probe(&m.den.head_psi.W(rp, c), grads.den.head_psi.W(rp, c))) {
                    return {false, "heading head probe failed"};
                }
            }
        }

        // scorer + rollout
        {
            const Eigen::VectorXd cand = Eigen::VectorXd::Random(3 * cfg.n);
            const Eigen::VectorXd z = Eigen::VectorXd::Random(cfg.d_z);
            const Eigen::VectorXd d_logits = Eigen::VectorXd::Random(6);
            const Eigen::VectorXd d_latent = Eigen::VectorXd::Random(cfg.d_z);
            RolloutCache rcache;
            const Eigen::VectorXd zr = wm_rollout(m, z, cand, &rcache);
            ScorerCache scache;
            scorer_forward(m, cand, z, zr, &scache);
            PlannerModel grads = zeros_like(m);
            const Eigen::VectorXd d_in = scorer_backward(m, scache, d_logits, grads);
            wm_rollout_backward(m, rcache, d_latent + d_in.tail(cfg.d_z), grads);
            auto loss = [&](const PlannerModel& mm) {
                const Eigen::VectorXd latent = wm_rollout(mm, z, cand);
                return scorer_forward(mm, cand, z, latent).dot(d_logits) + latent.dot(d_latent);
            };
            auto probe = [&](double* param, double analytic) {
                const double keep = *param;
                *param = keep + h;
                const double lp = loss(m);
                *param = keep - h;
                const double lm = loss(m);
                *param = keep;
                ++checked;
                return rel_err(analytic, (lp - lm) / (2 * h)) <= tol;
            };
            for (int i = 0; i < 20; ++i) {
                const int r = i % 6, c = (i * 3) % cfg.hidden;
                if (!probe(&m.den.head_score.W(r, c), grads.den.head_score.W(r, c))) {
                    return {false, "score head probe failed"};
                }
                const int rr = (i * 5) % cfg.d_z;
                const int rc = (i * 11) % static_cast<int>(m.wm.rollout.layers[0].W.cols());
                if (!probe(&m.wm.rollout.layers[0].W((i * 3) % 16, rc),
                           grads.wm.rollout.layers[0].W((i * 3) % 16, rc))) {
                    return {false, "rollout gradient probe failed"};
                }
                (void)rr;
            }
        }

        // occupancy decoders (linear heads through the focal-style dot loss)
        {
            const Eigen::VectorXd latent = Eigen::VectorXd::Random(cfg.d_z);
            const Eigen::VectorXd dy = Eigen::VectorXd::Random(cfg.grid_g * cfg.grid_g);
            for (Linear* head : {&m.wm.decode, &m.wm.agent_head, &m.wm.bev_head}) {
                Linear grad = linear_zeros(static_cast<int>(head->W.rows()),
                                           static_cast<int>(head->W.cols()));
                linear_backward(*head, latent.head(head->W.cols()), dy, grad);
                for (int i = 0; i < 20; ++i) {
                    const int r = (i * 37) % static_cast<int>(head->W.rows());
                    const int c = (i * 3) % static_cast<int>(head->W.cols());
                    const double keep = head->W(r, c);
                    head->W(r, c) = keep + h;
                    const double lp = linear_forward(*head, latent.head(head->W.cols())).dot(dy);
                    head->W(r, c) = keep - h;
                    const double lm = linear_forward(*head, latent.head(head->W.cols())).dot(dy);
                    head->W(r, c) = keep;
                    ++checked;
                    if (rel_err(grad.W(r, c), (lp - lm) / (2 * h)) > tol) {
                        return {false, "decoder head probe failed"};
                    }
                }
            }
        }

        // HATNA gains through the full refinement chain (trajectory loss only;
        // the gains receive gradient from no other loss).
        {
            const Scene scene = generate_scene(900, Difficulty::interactive);
            const Vocabulary vocab = corpus_vocab(make_corpus(32, 0.5, 700), cfg.k, 3);
            PlannerModel mm = make_model(cfg);
            std::mt19937_64 wrng(105);
            // non-trivial weights so the chain is exercised
            mm.den.head_dp = linear_init(2 * cfg.n, cfg.hidden, wrng);
            for (auto& wv : mm.den.head_dp.W.reshaped()) wv *= 0.1;
            mm.hatna.gain_log = Eigen::VectorXd::Random(cfg.n) * 0.2;
            PlannerModel grads = zeros_like(mm);
            training_step_losses(mm, scene, vocab, 42, grads);
            auto traj_loss = [&](PlannerModel& model) {
                PlannerModel scratch = zeros_like(model);
                return model.cfg.loss.lambda_traj *
                       training_step_losses(model, scene, vocab, 42, scratch).traj;
            };
            for (int i = 0; i < 20; ++i) {
                const int idx = i % cfg.n;
                const double keep = mm.hatna.gain_log(idx);
                mm.hatna.gain_log(idx) = keep + h;
                const double lp = traj_loss(mm);
                mm.hatna.gain_log(idx) = keep - h;
                const double lm = traj_loss(mm);
                mm.hatna.gain_log(idx) = keep;
                ++checked;
                if (rel_err(grads.hatna.gain_log(idx), (lp - lm) / (2 * h)) > tol) {
                    return {false, "noise-gain probe failed"};
                }
            }
        }
        return {true, std::to_string(checked) + " probes, rel err <= 1e-4"};
    });

    // ---------------------------------------------------------------- 5
    run(5, "loss definitions", []() -> std::pair<bool, std::string> {
        std::mt19937_64 rng(106);
        // imitation targets: distribution + shift invariance (max-subtracted
        // implementation equals the unshifted softmax oracle)
        const Trajectory gt = random_traj(rng);
        std::vector<Trajectory> cands;
        for (int i = 0; i < 12; ++i) cands.push_back(random_traj(rng));
        const Eigen::VectorXd r = imitation_targets(cands, gt);
        if (std::abs(r.sum() - 1.0) > 1e-12 || r.minCoeff() < 0.0) {
            return {false, "targets not a distribution"};
        }
        Eigen::VectorXd d(12);
        for (int i = 0; i < 12; ++i) d(i) = l2_distance(cands[static_cast<std::size_t>(i)], gt);
        const Eigen::VectorXd e = (-d.array()).exp();
        if (((e / e.sum()) - r).cwiseAbs().maxCoeff() > 1e-9) {
            return {false, "targets differ from softmax oracle"};
        }

        // focal(gamma=0, alpha=1) == BCE
        OccupancyGrid grid;
        grid.g = 4;
        grid.cells.resize(16);
        for (int i = 0; i < 16; ++i) grid.cells(i) = (i % 3 == 0) ? 1.0 : 0.0;
        const Eigen::VectorXd pred = (Eigen::VectorXd::Random(16).array() * 0.45 + 0.5).matrix();
        double bce = 0.0;
        for (int i = 0; i < 16; ++i) {
            bce += -grid.cells(i) * std::log(pred(i)) - (1 - grid.cells(i)) * std::log(1 - pred(i));
        }
        if (std::abs(focal_loss(pred, grid, 0.0, 1.0) - bce / 16.0) > 1e-10) {
            return {false, "focal(0,1) != BCE"};
        }

        if (std::abs(total_loss({1, 1, 1, 1, 1, 1}, LossWeights{}) - 14.31) > 1e-12) {
            return {false, "unit-part total != 14.31"};
        }

        std::uniform_int_distribution<int> nc(1, 10);
        for (int trial = 0; trial < 1000; ++trial) {
            const Trajectory g2 = random_traj(rng);
            std::vector<Trajectory> set;
            const int m = nc(rng);
            for (int i = 0; i < m; ++i) set.push_back(random_traj(rng));
            int best = 0;
            double bd = 1e30;
            for (int i = 0; i < m; ++i) {
                const double dd = l2_distance(set[static_cast<std::size_t>(i)], g2);
                if (dd < bd) {
                    bd = dd;
                    best = i;
                }
            }
            if (wta_loss(set, g2).second != best) return {false, "WTA winner mismatch"};
        }
        return {true, "targets/focal/total/WTA brute force"};
    });

    // ------------------------------------------------------- 6, 7, 8 setup
    // Frozen seeds; one diffusion training run is shared by criteria 6 and 7,
    // one regression run serves criterion 8. Held-out corpus seeds are
    // disjoint from the training corpus seeds.
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<Scene> train_corpus = make_corpus(300, 0.5, 100);
    const std::vector<Scene> heldout = make_corpus(500, 0.5, 9000);
    const Vocabulary vocab = corpus_vocab(train_corpus, 8, 3);
    RunConfig cfg;
    cfg.k = 8;
    cfg.seed = 5;
    cfg.train_steps = 3000;

    PlannerModel full;
    PlannerModel regr;
    bool trained = true;
    std::string train_err;
    try {
        full = train(cfg, train_corpus, vocab);
        RunConfig cfg_r = cfg;
        cfg_r.refiner = RefinerKind::regression;
        regr = train(cfg_r, train_corpus, vocab);
    } catch (const std::exception& e) {
        trained = false;
        train_err = e.what();
    }
    const double train_minutes =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;

    run(6, "candidate-set ablation trend", [&]() -> std::pair<bool, std::string> {
        if (!trained) return {false, "training failed: " + train_err};
        if (train_minutes > 15.0) return {false, "training exceeded 15 minutes"};
        const double pv =
            evaluate(heldout, CandidateMode::vocab_only, full, vocab, cfg.score, 5).overall.mean_pdms;
        const double pd =
            evaluate(heldout, CandidateMode::diffusion_only, full, vocab, cfg.score, 5).overall.mean_pdms;
        const double pu =
            evaluate(heldout, CandidateMode::unified, full, vocab, cfg.score, 5).overall.mean_pdms;
        char buf[160];
        std::snprintf(buf, sizeof buf, "PDMS unified %.4f > diffusion %.4f > vocab %.4f (%.1f min)",
                      pu, pd, pv, train_minutes);
        return {pu > pd && pd > pv && pu >= pv + 0.01, buf};
    });

    run(7, "noise-adaptation ablation trend", [&]() -> std::pair<bool, std::string> {
        if (!trained) return {false, "training failed: " + train_err};
        // Same trained weights, adaptation toggled at sampling time: isolates
        // the mechanism from run-to-run training variance.
        PlannerModel raw = full;
        raw.cfg.hatna_enabled = false;
        const EvalReport on =
            evaluate(heldout, CandidateMode::diffusion_only, full, vocab, cfg.score, 5);
        const EvalReport off =
            evaluate(heldout, CandidateMode::diffusion_only, raw, vocab, cfg.score, 5);
        char buf[160];
        std::snprintf(buf, sizeof buf, "Comf %.4f vs %.4f; kink %.6f vs %.6f",
                      on.overall.mean_comf, off.overall.mean_comf, on.kink_stat, off.kink_stat);
        return {on.overall.mean_comf >= off.overall.mean_comf && on.kink_stat < off.kink_stat, buf};
    });

    run(8, "refiner comparison trend", [&]() -> std::pair<bool, std::string> {
        if (!trained) return {false, "training failed: " + train_err};
        const double ade_diff =
            evaluate(heldout, CandidateMode::diffusion_only, full, vocab, cfg.score, 5)
                .interactive.mean_refined_min_ade;
        const double ade_regr =
            evaluate(heldout, CandidateMode::diffusion_only, regr, vocab, cfg.score, 5)
                .interactive.mean_refined_min_ade;
        char buf[120];
        std::snprintf(buf, sizeof buf, "interactive candidate ADE diffusion %.4f < regression %.4f",
                      ade_diff, ade_regr);
        return {ade_diff < ade_regr, buf};
    });

    // ---------------------------------------------------------------- 9
    run(9, "bit-identical artifacts", []() -> std::pair<bool, std::string> {
        // gen-data
        const std::vector<Scene> c1 = make_corpus(20, 0.5, 777);
        const std::vector<Scene> c2 = make_corpus(20, 0.5, 777);
        save_corpus(c1, "acc_corpus_1.jsonl");
        save_corpus(c2, "acc_corpus_2.jsonl");
        const bool gen_ok = slurp("acc_corpus_1.jsonl") == slurp("acc_corpus_2.jsonl");

        // train
        const Vocabulary v = corpus_vocab(c1, 4, 3);
        RunConfig cfg;
        cfg.hidden = 32;
        cfg.k = 4;
        cfg.seed = 9;
        cfg.train_steps = 120;
        const PlannerModel m1 = train(cfg, c1, v);
        const PlannerModel m2 = train(cfg, c1, v);
        save_checkpoint(m1, "acc_ckpt_1.json");
        save_checkpoint(m2, "acc_ckpt_2.json");
        const bool train_ok = slurp("acc_ckpt_1.json") == slurp("acc_ckpt_2.json");

        // eval
        const std::string r1 =
            report_to_json(evaluate(c1, CandidateMode::unified, m1, v, cfg.score, 4)).dump(2);
        const std::string r2 =
            report_to_json(evaluate(c1, CandidateMode::unified, m2, v, cfg.score, 4)).dump(2);
        const bool eval_ok = r1 == r2;
        for (const char* f : {"acc_corpus_1.jsonl", "acc_corpus_2.jsonl", "acc_ckpt_1.json",
                              "acc_ckpt_2.json"}) {
            std::remove(f);
        }
        std::string detail = std::string("gen-data ") + (gen_ok ? "ok" : "DIFFERS") + ", train " +
                             (train_ok ? "ok" : "DIFFERS") + ", eval " + (eval_ok ? "ok" : "DIFFERS");
        return {gen_ok && train_ok && eval_ok, detail};
    });

    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all 9 criteria passed\n");
    return 0;
}
