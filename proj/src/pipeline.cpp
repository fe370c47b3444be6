#include "cddrive/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace cddrive {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

Eigen::MatrixXd sample_noise(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd eps(n, 2);
    for (int i = 0; i < n; ++i) {
        eps(i, 0) = gauss(rng);
        eps(i, 1) = gauss(rng);
    }
    return eps;
}

ModeStats finalize(ModeStats s) {
    if (s.count == 0) return s;
    const double inv = 1.0 / s.count;
    s.mean_pdms *= inv;
    s.mean_nc *= inv;
    s.mean_dac *= inv;
    s.mean_ep *= inv;
    s.mean_ttc *= inv;
    s.mean_comf *= inv;
    s.mean_ade *= inv;
    s.mean_refined_min_ade *= inv;
    return s;
}

nlohmann::ordered_json stats_to_json(const ModeStats& s) {
    return nlohmann::ordered_json{{"count", s.count},
                                  {"mean_pdms", s.mean_pdms},
                                  {"mean_nc", s.mean_nc},
                                  {"mean_dac", s.mean_dac},
                                  {"mean_ep", s.mean_ep},
                                  {"mean_ttc", s.mean_ttc},
                                  {"mean_comf", s.mean_comf},
                                  {"mean_ade", s.mean_ade},
                                  {"mean_refined_min_ade", s.mean_refined_min_ade}};
}

}  // namespace

std::string mode_name(CandidateMode m) {
    switch (m) {
        case CandidateMode::vocab_only: return "vocab_only";
        case CandidateMode::diffusion_only: return "diffusion_only";
        default: return "unified";
    }
}

CandidateMode mode_from_name(const std::string& s) {
    if (s == "vocab_only") return CandidateMode::vocab_only;
    if (s == "diffusion_only") return CandidateMode::diffusion_only;
    if (s == "unified") return CandidateMode::unified;
    throw std::invalid_argument("unknown candidate mode: " + s);
}

std::vector<Trajectory> refine_candidates(const PlannerModel& model, const Vocabulary& vocab,
                                          const Eigen::VectorXd& z, unsigned long long seed) {
    std::mt19937_64 rng(seed ^ 0xC2B2AE3D27D4EB4FULL);
    std::vector<Trajectory> out;
    out.reserve(vocab.anchors.size());
    for (const auto& anchor_traj : vocab.anchors) {
        const Eigen::MatrixXd anchor = positions(anchor_traj);
        if (model.cfg.refiner == RefinerKind::regression) {
            const DenoiserOut o = denoiser_forward(model, anchor, z, 0);
            Eigen::VectorXd psi(o.psi.size());
            for (Eigen::Index i = 0; i < psi.size(); ++i) psi(i) = wrap_heading(o.psi(i));
            out.push_back(make_trajectory(anchor + o.dp, psi, model.cfg.dt));
            continue;
        }
        const Eigen::MatrixXd eps = sample_noise(rng, model.cfg.n);
        const Eigen::MatrixXd eps_used =
            model.cfg.hatna_enabled ? hatna_adapt(model.hatna, eps) : eps;
        const DenoiseResult r = denoise_anchor(
            model.sched,
            [&](const Eigen::MatrixXd& p_t, int t) { return denoiser_forward(model, p_t, z, t).dp; },
            [&](const Eigen::MatrixXd& p_t, int t) { return denoiser_forward(model, p_t, z, t).psi; },
            anchor, eps_used);
        Eigen::VectorXd psi(r.headings.size());
        for (Eigen::Index i = 0; i < psi.size(); ++i) psi(i) = wrap_heading(r.headings(i));
        out.push_back(make_trajectory(r.positions, psi, model.cfg.dt));
    }
    return out;
}

CandidateSet build_candidates(CandidateMode mode, const Vocabulary& vocab,
                              const PlannerModel* model, const Scene& scene,
                              unsigned long long seed) {
    CandidateSet set;
    if (mode != CandidateMode::diffusion_only) {
        for (std::size_t i = 0; i < vocab.anchors.size(); ++i) {
            set.items.push_back({vocab.anchors[i], true, static_cast<int>(i)});
        }
    }
    if (mode != CandidateMode::vocab_only) {
        if (!model) throw std::invalid_argument("build_candidates: model required for refinement");
        const Eigen::VectorXd z = encode_scene(scene);
        const auto refined = refine_candidates(*model, vocab, z, seed ^ scene.rng_seed);
        for (std::size_t i = 0; i < refined.size(); ++i) {
            set.items.push_back({refined[i], false, static_cast<int>(i)});
        }
    }
    return set;
}

Eigen::MatrixXd score_candidate_set(const PlannerModel& model, const Eigen::VectorXd& z,
                                    const CandidateSet& set) {
    const Eigen::Index m = static_cast<Eigen::Index>(set.items.size());
    if (m == 0) throw std::invalid_argument("score_candidate_set: empty set");
    Eigen::MatrixXd logits(m, 6);
    for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::VectorXd flat = flatten_trajectory(set.items[static_cast<std::size_t>(i)].traj);
        const Eigen::VectorXd z_roll = wm_rollout(model, z, flat);
        logits.row(i) = scorer_forward(model, flat, z, z_roll).transpose();
    }
    Eigen::MatrixXd scores(m, 6);
    // Imitation: softmax jointly over the whole set.
    const double mx = logits.col(0).maxCoeff();
    Eigen::VectorXd e = (logits.col(0).array() - mx).exp().matrix();
    scores.col(0) = e / e.sum();
    for (int j = 1; j < 6; ++j) {
        scores.col(j) = (1.0 / (1.0 + (-logits.col(j).array()).exp())).matrix();
    }
    return scores;
}

std::pair<int, Trajectory> decide(const CandidateSet& set, const Eigen::MatrixXd& scores,
                                  const ScoreWeights& w) {
    if (set.items.empty()) throw std::invalid_argument("decide: empty candidate set");
    if (scores.rows() != static_cast<Eigen::Index>(set.items.size())) {
        throw std::invalid_argument("decide: score count mismatch");
    }
    Eigen::VectorXd wv(6);
    wv << w.w_im, w.w_nc, w.w_dac, w.w_ep, w.w_ttc, w.w_comf;
    int best = 0;
    double best_s = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        const double s = scores.row(i).dot(wv);
        if (s > best_s) {
            best_s = s;
            best = static_cast<int>(i);
        }
    }
    return {best, set.items[static_cast<std::size_t>(best)].traj};
}

double kink_statistic(const Trajectory& t) {
    const PositionSeq p = positions(t);
    if (p.rows() < 3) return 0.0;
    double acc = 0.0;
    for (Eigen::Index i = 1; i + 1 < p.rows(); ++i) {
        acc += (p.row(i + 1) - 2.0 * p.row(i) + p.row(i - 1)).norm();
    }
    return acc / static_cast<double>(p.rows() - 2);
}

EvalReport evaluate(const std::vector<Scene>& corpus, CandidateMode mode,
                    const PlannerModel& model, const Vocabulary& vocab, const ScoreWeights& w,
                    unsigned long long seed) {
    EvalReport rep;
    rep.mode = mode_name(mode);
    rep.refiner = refiner_name(model.cfg.refiner);
    rep.hatna_enabled = model.cfg.hatna_enabled;
    rep.n_scenes = static_cast<int>(corpus.size());

    MetricParams mp{model.cfg.ttc_threshold, model.cfg.a_max, model.cfg.r_max, model.cfg.ego_half};
    double kink_acc = 0.0;
    long kink_count = 0;

    for (const auto& scene : corpus) {
        const CandidateSet set = build_candidates(mode, vocab, &model, scene, seed);
        const Eigen::VectorXd z = encode_scene(scene);
        const Eigen::MatrixXd scores = score_candidate_set(model, z, set);
        const auto [idx, traj] = decide(set, scores, w);
        const SubMetrics sm = evaluate_submetrics(scene, traj, mp);

        double refined_min_ade = 0.0;
        bool has_refined = false;
        for (const auto& c : set.items) {
            if (c.from_vocab) continue;
            const double a = ade(c.traj, scene.expert);
            refined_min_ade = has_refined ? std::min(refined_min_ade, a) : a;
            has_refined = true;
            kink_acc += kink_statistic(c.traj);
            ++kink_count;
        }

        auto add = [&](ModeStats& s) {
            ++s.count;
            s.mean_pdms += pdms(sm);
            s.mean_nc += sm.nc;
            s.mean_dac += sm.dac;
            s.mean_ep += sm.ep;
            s.mean_ttc += sm.ttc;
            s.mean_comf += sm.comf;
            s.mean_ade += ade(traj, scene.expert);
            s.mean_refined_min_ade += refined_min_ade;
        };
        add(rep.overall);
        add(scene.difficulty == Difficulty::routine ? rep.routine : rep.interactive);
    }

    rep.overall = finalize(rep.overall);
    rep.routine = finalize(rep.routine);
    rep.interactive = finalize(rep.interactive);
    rep.kink_stat = kink_count > 0 ? kink_acc / static_cast<double>(kink_count) : 0.0;
    return rep;
}

nlohmann::json report_to_json(const EvalReport& r) {
    return nlohmann::ordered_json{{"schema_version", 1},
                                  {"mode", r.mode},
                                  {"refiner", r.refiner},
                                  {"hatna_enabled", r.hatna_enabled},
                                  {"n_scenes", r.n_scenes},
                                  {"overall", stats_to_json(r.overall)},
                                  {"routine", stats_to_json(r.routine)},
                                  {"interactive", stats_to_json(r.interactive)},
                                  {"kink_stat", r.kink_stat}};
}

void plot_scene(const Scene& scene, const CandidateSet& set, int decided,
                const std::string& path) {
    const double scale = 8.0;
    const double x0 = -15.0, x1 = 75.0, y0 = -30.0, y1 = 30.0;
    auto px = [&](double x) { return fmt((x - x0) * scale); };
    auto py = [&](double y) { return fmt((y1 - y) * scale); };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt((x1 - x0) * scale)
        << "\" height=\"" << fmt((y1 - y0) * scale) << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Corridor band: centerline offset by +/- half width.
    if (scene.corridor.centerline.size() >= 2) {
        std::ostringstream pts;
        const auto& cl = scene.corridor.centerline;
        auto normal_at = [&](std::size_t i) {
            const std::size_t a = i == 0 ? 0 : i - 1;
            const std::size_t b = i + 1 < cl.size() ? i + 1 : i;
            Eigen::Vector2d d = cl[b] - cl[a];
            d.normalize();
            return Eigen::Vector2d{-d.y(), d.x()};
        };
        for (std::size_t i = 0; i < cl.size(); ++i) {
            const Eigen::Vector2d p = cl[i] + scene.corridor.half_width * normal_at(i);
            pts << px(p.x()) << "," << py(p.y()) << " ";
        }
        for (std::size_t i = cl.size(); i-- > 0;) {
            const Eigen::Vector2d p = cl[i] - scene.corridor.half_width * normal_at(i);
            pts << px(p.x()) << "," << py(p.y()) << " ";
        }
        svg << "<polygon points=\"" << pts.str() << "\" fill=\"#eeeeee\" stroke=\"#bbbbbb\"/>\n";
    }

    for (const auto& a : scene.agents) {
        svg << "<rect x=\"" << px(a.x - a.half_extent) << "\" y=\"" << py(a.y + a.half_extent)
            << "\" width=\"" << fmt(2.0 * a.half_extent * scale) << "\" height=\""
            << fmt(2.0 * a.half_extent * scale) << "\" fill=\"#666666\"/>\n";
        const Eigen::Vector2d tip = a.position_at(2.0);
        svg << "<line x1=\"" << px(a.x) << "\" y1=\"" << py(a.y) << "\" x2=\"" << px(tip.x())
            << "\" y2=\"" << py(tip.y()) << "\" stroke=\"#666666\" stroke-dasharray=\"4,3\"/>\n";
    }

    auto polyline = [&](const Trajectory& t, const std::string& color, const std::string& width) {
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width
            << "\" points=\"" << px(scene.ego.x) << "," << py(scene.ego.y) << " ";
        for (const auto& p : t.points) svg << px(p.x) << "," << py(p.y) << " ";
        svg << "\"/>\n";
    };

    polyline(scene.expert, "green", "2.5");

    if (decided >= 0 && decided < static_cast<int>(set.items.size())) {
        const int anchor_idx = set.items[static_cast<std::size_t>(decided)].anchor_index;
        for (const auto& c : set.items) {
            if (c.anchor_index != anchor_idx) continue;
            polyline(c.traj, c.from_vocab ? "red" : "blue", "1.8");
        }
    }

    svg << "<circle cx=\"" << px(scene.ego.x) << "\" cy=\"" << py(scene.ego.y)
        << "\" r=\"5\" fill=\"black\"/>\n";
    svg << "</svg>\n";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("plot_scene: cannot open " + path);
    out << svg.str();
    if (!out) throw std::runtime_error("plot_scene: write failed for " + path);
}

}  // namespace cddrive
