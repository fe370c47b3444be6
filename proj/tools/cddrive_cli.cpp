// Command-line front end: synthetic scene generation, vocabulary building,
// training, evaluation, the full ablation grid, and SVG plots.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cddrive/pipeline.hpp"
#include "cddrive/training.hpp"
#include "cddrive/vocab.hpp"

namespace fs = std::filesystem;
using namespace cddrive;

namespace {

std::vector<Scene> gen_scenes(int count, double interactive_frac, unsigned long long seed,
                              const SceneGenParams& params) {
    std::vector<Scene> out;
    out.reserve(static_cast<std::size_t>(count));
    const int n_inter = static_cast<int>(std::lround(count * interactive_frac));
    for (int i = 0; i < count; ++i) {
        const Difficulty d = i < n_inter ? Difficulty::interactive : Difficulty::routine;
        out.push_back(generate_scene(seed + static_cast<unsigned long long>(i), d, params));
    }
    return out;
}

Vocabulary vocab_from_corpus(const std::vector<Scene>& corpus, int k, unsigned long long seed) {
    std::vector<Trajectory> experts;
    experts.reserve(corpus.size());
    for (const auto& s : corpus) experts.push_back(s.expert);
    return build_vocabulary(experts, k, seed);
}

void write_json(const nlohmann::json& j, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << j.dump(2) << "\n";
    }
    fs::rename(tmp, path);
}

Vocabulary load_vocab(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    nlohmann::json j;
    in >> j;
    return vocabulary_from_json(j);
}

EvalReport run_eval(const std::vector<Scene>& corpus, const std::string& mode,
                    const PlannerModel& model, const Vocabulary& vocab,
                    unsigned long long seed, const std::string& out) {
    const EvalReport r =
        evaluate(corpus, mode_from_name(mode), model, vocab, model.cfg.score, seed);
    if (!out.empty()) write_json(report_to_json(r), out);
    std::printf("%-14s pdms=%.4f routine=%.4f interactive=%.4f ade=%.3f kink=%.4f\n",
                r.mode.c_str(), r.overall.mean_pdms, r.routine.mean_pdms,
                r.interactive.mean_pdms, r.overall.mean_ade, r.kink_stat);
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cddrive: vocabulary + diffusion trajectory planning on synthetic scenes"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic scene corpus");
    std::string gen_out = "corpus.jsonl";
    int gen_count = 100;
    double gen_frac = 0.5;
    unsigned long long gen_seed = 1;
    gen->add_option("--out", gen_out, "Output corpus path (jsonl)");
    gen->add_option("--count", gen_count, "Number of scenes")->check(CLI::PositiveNumber);
    gen->add_option("--interactive-frac", gen_frac, "Fraction of interactive scenes")
        ->check(CLI::Range(0.0, 1.0));
    gen->add_option("--seed", gen_seed, "Base seed (scene i uses seed+i)");
    std::vector<unsigned long long> gen_range;
    gen->add_option("--seed-range", gen_range, "Explicit seed range lo hi (overrides --seed/--count)")
        ->expected(2);

    // build-vocab
    auto* bv = app.add_subcommand("build-vocab", "Cluster expert trajectories into anchors");
    std::string bv_corpus, bv_out = "vocab.json";
    int bv_k = 32;
    unsigned long long bv_seed = 1;
    bv->add_option("--corpus", bv_corpus, "Scene corpus (jsonl)")->required();
    bv->add_option("--out", bv_out, "Output vocabulary path");
    bv->add_option("--k", bv_k, "Vocabulary size")->check(CLI::PositiveNumber);
    bv->add_option("--seed", bv_seed, "Clustering seed");

    // train
    auto* tr = app.add_subcommand("train", "Train the planner on a corpus");
    std::string tr_corpus, tr_vocab, tr_out = "model.json", tr_curve, tr_refiner = "diffusion";
    int tr_steps = -1;
    unsigned long long tr_seed = 1;
    bool tr_no_hatna = false;
    tr->add_option("--corpus", tr_corpus, "Scene corpus (jsonl)")->required();
    tr->add_option("--vocab", tr_vocab, "Vocabulary path")->required();
    tr->add_option("--out", tr_out, "Checkpoint output path");
    tr->add_option("--curve", tr_curve, "Loss-curve output path (jsonl)");
    tr->add_option("--steps", tr_steps, "Training steps (default from config)");
    tr->add_option("--seed", tr_seed, "Training seed");
    tr->add_option("--refiner", tr_refiner, "Refiner: diffusion | regression");
    tr->add_flag("--no-hatna", tr_no_hatna, "Disable noise adaptation");

    // eval
    auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a corpus");
    std::string ev_corpus, ev_vocab, ev_model, ev_out, ev_mode = "unified";
    unsigned long long ev_seed = 1;
    ev->add_option("--corpus", ev_corpus, "Scene corpus (jsonl)")->required();
    ev->add_option("--vocab", ev_vocab, "Vocabulary path")->required();
    ev->add_option("--model", ev_model, "Checkpoint path")->required();
    ev->add_option("--mode", ev_mode, "Candidates: vocab_only | diffusion_only | unified");
    ev->add_option("--out", ev_out, "Report output path (json)");
    ev->add_option("--seed", ev_seed, "Refinement noise seed");
    bool ev_no_hatna = false;
    ev->add_flag("--no-hatna", ev_no_hatna, "Disable noise adaptation at sampling time");

    // ablate
    auto* ab = app.add_subcommand("ablate", "Train and evaluate the full ablation grid");
    std::string ab_corpus, ab_vocab, ab_out = "ablation";
    int ab_steps = -1;
    unsigned long long ab_seed = 1;
    ab->add_option("--corpus", ab_corpus, "Scene corpus (jsonl)")->required();
    ab->add_option("--vocab", ab_vocab, "Vocabulary path")->required();
    ab->add_option("--out", ab_out, "Output directory");
    ab->add_option("--steps", ab_steps, "Training steps (default from config)");
    ab->add_option("--seed", ab_seed, "Seed for training and evaluation");

    // plot
    auto* pl = app.add_subcommand("plot", "Render one scene with candidates to SVG");
    std::string pl_corpus, pl_vocab, pl_model, pl_out = "scene.svg", pl_mode = "unified";
    int pl_index = 0;
    unsigned long long pl_seed = 1;
    pl->add_option("--corpus", pl_corpus, "Scene corpus (jsonl)")->required();
    pl->add_option("--vocab", pl_vocab, "Vocabulary path")->required();
    pl->add_option("--model", pl_model, "Checkpoint path")->required();
    pl->add_option("--index", pl_index, "Scene index");
    pl->add_option("--mode", pl_mode, "Candidate mode");
    pl->add_option("--out", pl_out, "SVG output path");
    pl->add_option("--seed", pl_seed, "Refinement noise seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            if (gen_range.size() == 2) {
                if (gen_range[1] <= gen_range[0]) throw std::runtime_error("empty --seed-range");
                gen_seed = gen_range[0];
                gen_count = static_cast<int>(gen_range[1] - gen_range[0]);
            }
            const auto scenes = gen_scenes(gen_count, gen_frac, gen_seed, SceneGenParams{});
            save_corpus(scenes, gen_out);
            std::printf("wrote %zu scenes to %s\n", scenes.size(), gen_out.c_str());
        } else if (bv->parsed()) {
            const auto corpus = load_corpus(bv_corpus);
            const Vocabulary v = vocab_from_corpus(corpus, bv_k, bv_seed);
            write_json(vocabulary_to_json(v), bv_out);
            std::printf("wrote %d anchors to %s\n", v.k, bv_out.c_str());
        } else if (tr->parsed()) {
            const auto corpus = load_corpus(tr_corpus);
            const Vocabulary v = load_vocab(tr_vocab);
            RunConfig cfg;
            cfg.seed = tr_seed;
            cfg.hatna_enabled = !tr_no_hatna;
            cfg.refiner = refiner_from_name(tr_refiner);
            if (tr_steps > 0) cfg.train_steps = tr_steps;
            const PlannerModel model = train(cfg, corpus, v, tr_curve);
            save_checkpoint(model, tr_out);
            std::printf("trained %d steps, checkpoint %s\n", cfg.train_steps, tr_out.c_str());
        } else if (ev->parsed()) {
            const auto corpus = load_corpus(ev_corpus);
            const Vocabulary v = load_vocab(ev_vocab);
            PlannerModel model = load_checkpoint(ev_model);
            if (ev_no_hatna) model.cfg.hatna_enabled = false;
            run_eval(corpus, ev_mode, model, v, ev_seed, ev_out);
        } else if (ab->parsed()) {
            const auto corpus = load_corpus(ab_corpus);
            const Vocabulary v = load_vocab(ab_vocab);
            fs::create_directories(ab_out);
            RunConfig cfg;
            cfg.seed = ab_seed;
            if (ab_steps > 0) cfg.train_steps = ab_steps;

            std::printf("training default (diffusion + adaptive noise)...\n");
            const PlannerModel full = train(cfg, corpus, v);
            save_checkpoint(full, ab_out + "/model_full.json");

            RunConfig cfg_nh = cfg;
            cfg_nh.hatna_enabled = false;
            std::printf("training without noise adaptation...\n");
            const PlannerModel no_hatna = train(cfg_nh, corpus, v);
            save_checkpoint(no_hatna, ab_out + "/model_no_hatna.json");

            RunConfig cfg_rg = cfg;
            cfg_rg.refiner = RefinerKind::regression;
            std::printf("training regression refiner...\n");
            const PlannerModel regr = train(cfg_rg, corpus, v);
            save_checkpoint(regr, ab_out + "/model_regression.json");

            for (const char* m : {"vocab_only", "diffusion_only", "unified"}) {
                run_eval(corpus, m, full, v, ab_seed, ab_out + "/report_" + m + ".json");
            }
            run_eval(corpus, "diffusion_only", no_hatna, v, ab_seed,
                     ab_out + "/report_no_hatna.json");
            run_eval(corpus, "diffusion_only", regr, v, ab_seed,
                     ab_out + "/report_regression.json");
        } else if (pl->parsed()) {
            const auto corpus = load_corpus(pl_corpus);
            if (pl_index < 0 || pl_index >= static_cast<int>(corpus.size())) {
                throw std::runtime_error("scene index out of range");
            }
            const Vocabulary v = load_vocab(pl_vocab);
            const PlannerModel model = load_checkpoint(pl_model);
            const Scene& scene = corpus[static_cast<std::size_t>(pl_index)];
            const CandidateSet set =
                build_candidates(mode_from_name(pl_mode), v, &model, scene, pl_seed);
            const Eigen::VectorXd z = encode_scene(scene);
            const Eigen::MatrixXd scores = score_candidate_set(model, z, set);
            const auto [idx, traj] = decide(set, scores, model.cfg.score);
            plot_scene(scene, set, idx, pl_out);
            std::printf("wrote %s (decided candidate %d)\n", pl_out.c_str(), idx);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
