#include "cddrive/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace cddrive {

namespace {

nlohmann::json linear_to_json(const Linear& l) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < l.W.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < l.W.cols(); ++j) row.push_back(l.W(i, j));
        rows.push_back(std::move(row));
    }
    nlohmann::json b = nlohmann::json::array();
    for (Eigen::Index i = 0; i < l.b.size(); ++i) b.push_back(l.b(i));
    return {{"W", std::move(rows)}, {"b", std::move(b)}};
}

Linear linear_from_json(const nlohmann::json& j) {
    const auto& rows = j.at("W");
    const auto& b = j.at("b");
    Linear l = linear_zeros(static_cast<int>(rows.size()),
                            rows.empty() ? 0 : static_cast<int>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < rows[i].size(); ++c) {
            l.W(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                rows[i][c].get<double>();
        }
    }
    for (std::size_t i = 0; i < b.size(); ++i) l.b(static_cast<Eigen::Index>(i)) = b[i].get<double>();
    return l;
}

nlohmann::json mlp_to_json(const Mlp& m) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : m.layers) layers.push_back(linear_to_json(l));
    return {{"layers", std::move(layers)}, {"activate_last", m.activate_last}};
}

Mlp mlp_from_json(const nlohmann::json& j) {
    Mlp m;
    m.activate_last = j.at("activate_last").get<bool>();
    for (const auto& l : j.at("layers")) m.layers.push_back(linear_from_json(l));
    return m;
}

void push_linear(std::vector<ParamBlock>& out, Linear& l) {
    out.push_back({l.W.data(), static_cast<long>(l.W.size())});
    out.push_back({l.b.data(), static_cast<long>(l.b.size())});
}

void push_mlp(std::vector<ParamBlock>& out, Mlp& m) {
    for (auto& l : m.layers) push_linear(out, l);
}

}  // namespace

PlannerModel make_model(const RunConfig& cfg) {
    PlannerModel m;
    m.cfg = cfg;
    m.sched = NoiseSchedule::linear_beta(cfg.T, cfg.beta_start, cfg.beta_end, cfg.t_truncate,
                                         cfg.ddim_stride);
    m.hatna.kernel_size = cfg.hatna_kernel_size;
    m.hatna.kernel_sigma = cfg.hatna_kernel_size / 4.0;
    m.hatna.alpha = cfg.hatna_alpha;
    m.hatna.epsilon = cfg.hatna_epsilon;
    m.hatna.gain_log = Eigen::VectorXd::Zero(cfg.n);

    std::mt19937_64 rng(cfg.seed ^ 0xA5A5A5A5DEADBEEFULL);
    const int trunk_in = 2 * cfg.n + cfg.d_z + cfg.d_t;
    m.den.trunk.activate_last = true;
    m.den.trunk.layers = {linear_init(cfg.hidden, trunk_in, rng),
                          linear_init(cfg.hidden, cfg.hidden, rng)};
    m.den.head_dp = linear_zeros(2 * cfg.n, cfg.hidden);
    m.den.head_psi = linear_zeros(cfg.n, cfg.hidden);

    const int scorer_in = 3 * cfg.n + 2 * cfg.d_z;
    m.den.scorer.activate_last = true;
    m.den.scorer.layers = {linear_init(cfg.hidden, scorer_in, rng),
                           linear_init(cfg.hidden, cfg.hidden, rng)};
    m.den.head_score = linear_zeros(6, cfg.hidden);

    const int roll_in = cfg.d_z + 3 * cfg.n;
    m.wm.rollout.activate_last = false;
    m.wm.rollout.layers = {linear_init(cfg.hidden, roll_in, rng),
                           linear_init(cfg.d_z, cfg.hidden, rng)};
    const int cells = cfg.grid_g * cfg.grid_g;
    m.wm.decode = linear_init(cells, cfg.d_z, rng);
    m.wm.agent_head = linear_init(cells, cfg.d_z, rng);
    m.wm.bev_head = linear_init(cells, cfg.d_z, rng);
    return m;
}

PlannerModel zeros_like(const PlannerModel& m) {
    PlannerModel z = m;
    z.hatna.gain_log.setZero();
    auto zero_linear = [](Linear& l) {
        l.W.setZero();
        l.b.setZero();
    };
    auto zero_mlp = [&](Mlp& mm) {
        for (auto& l : mm.layers) zero_linear(l);
    };
    zero_mlp(z.den.trunk);
    zero_linear(z.den.head_dp);
    zero_linear(z.den.head_psi);
    zero_mlp(z.den.scorer);
    zero_linear(z.den.head_score);
    zero_mlp(z.wm.rollout);
    zero_linear(z.wm.decode);
    zero_linear(z.wm.agent_head);
    zero_linear(z.wm.bev_head);
    return z;
}

std::vector<ParamBlock> collect_params(PlannerModel& m) {
    std::vector<ParamBlock> out;
    push_mlp(out, m.den.trunk);
    push_linear(out, m.den.head_dp);
    push_linear(out, m.den.head_psi);
    push_mlp(out, m.den.scorer);
    push_linear(out, m.den.head_score);
    push_mlp(out, m.wm.rollout);
    push_linear(out, m.wm.decode);
    push_linear(out, m.wm.agent_head);
    push_linear(out, m.wm.bev_head);
    out.push_back({m.hatna.gain_log.data(), static_cast<long>(m.hatna.gain_log.size())});
    return out;
}

Eigen::VectorXd timestep_embedding(int t, int dim) {
    Eigen::VectorXd e(dim);
    const int half = dim / 2;
    for (int i = 0; i < half; ++i) {
        const double freq = std::pow(10000.0, -static_cast<double>(i) / half);
        e(2 * i) = std::sin(t * freq);
        e(2 * i + 1) = std::cos(t * freq);
    }
    if (dim % 2 == 1) e(dim - 1) = 0.0;
    return e;
}

DenoiserOut denoiser_forward(const PlannerModel& m, const Eigen::MatrixXd& p_t,
                             const Eigen::VectorXd& z, int t, DenoiserCache* cache) {
    const int n = m.cfg.n;
    if (p_t.rows() != n || p_t.cols() != 2 || z.size() != m.cfg.d_z) {
        throw std::invalid_argument("denoiser_forward: shape mismatch");
    }
    Eigen::VectorXd in(2 * n + m.cfg.d_z + m.cfg.d_t);
    for (int i = 0; i < n; ++i) {
        in(2 * i) = p_t(i, 0);
        in(2 * i + 1) = p_t(i, 1);
    }
    in.segment(2 * n, m.cfg.d_z) = z;
    in.segment(2 * n + m.cfg.d_z, m.cfg.d_t) = timestep_embedding(t, m.cfg.d_t);

    MlpCache local;
    MlpCache* tc = cache ? &cache->trunk : &local;
    const Eigen::VectorXd feat = mlp_forward(m.den.trunk, in, tc);
    const Eigen::VectorXd dp_flat = linear_forward(m.den.head_dp, feat);
    const Eigen::VectorXd psi_logits = linear_forward(m.den.head_psi, feat);
    const Eigen::VectorXd psi_tanh = psi_logits.array().tanh().matrix();

    if (cache) {
        cache->feature = feat;
        cache->psi_tanh = psi_tanh;
    }

    DenoiserOut out;
    out.dp.resize(n, 2);
    for (int i = 0; i < n; ++i) {
        out.dp(i, 0) = dp_flat(2 * i);
        out.dp(i, 1) = dp_flat(2 * i + 1);
    }
    // tanh can round to exactly +-1 in double; keep psi strictly inside
    // (-pi, pi) so downstream wrap_heading never sees the boundary.
    const double lim = std::nextafter(kPi, 0.0);
    out.psi = (kPi * psi_tanh.array()).min(lim).max(-lim).matrix();
    return out;
}

Eigen::MatrixXd denoiser_backward(const PlannerModel& m, const DenoiserCache& cache,
                                  const Eigen::MatrixXd& d_dp, const Eigen::VectorXd& d_psi,
                                  PlannerModel& grads) {
    const int n = m.cfg.n;
    Eigen::VectorXd d_dp_flat = Eigen::VectorXd::Zero(2 * n);
    if (d_dp.size() > 0) {
        for (int i = 0; i < n; ++i) {
            d_dp_flat(2 * i) = d_dp(i, 0);
            d_dp_flat(2 * i + 1) = d_dp(i, 1);
        }
    }
    Eigen::VectorXd d_feat =
        linear_backward(m.den.head_dp, cache.feature, d_dp_flat, grads.den.head_dp);
    if (d_psi.size() > 0) {
        // psi = pi * tanh(logits)
        const Eigen::VectorXd d_logits =
            (d_psi.array() * kPi * (1.0 - cache.psi_tanh.array().square())).matrix();
        d_feat += linear_backward(m.den.head_psi, cache.feature, d_logits, grads.den.head_psi);
    }
    const Eigen::VectorXd d_in = mlp_backward(m.den.trunk, cache.trunk, d_feat, grads.den.trunk);

    Eigen::MatrixXd d_pt(n, 2);
    for (int i = 0; i < n; ++i) {
        d_pt(i, 0) = d_in(2 * i);
        d_pt(i, 1) = d_in(2 * i + 1);
    }
    return d_pt;
}

Eigen::VectorXd flatten_trajectory(const Trajectory& t) {
    Eigen::VectorXd v(3 * static_cast<Eigen::Index>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i) {
        v(3 * static_cast<Eigen::Index>(i)) = t.points[i].x;
        v(3 * static_cast<Eigen::Index>(i) + 1) = t.points[i].y;
        v(3 * static_cast<Eigen::Index>(i) + 2) = t.points[i].psi;
    }
    return v;
}

Eigen::VectorXd scorer_forward(const PlannerModel& m, const Eigen::VectorXd& cand_flat,
                               const Eigen::VectorXd& z, const Eigen::VectorXd& z_rollout,
                               ScorerCache* cache) {
    if (cand_flat.size() != 3 * m.cfg.n || z.size() != m.cfg.d_z ||
        z_rollout.size() != m.cfg.d_z) {
        throw std::invalid_argument("scorer_forward: shape mismatch");
    }
    Eigen::VectorXd in(cand_flat.size() + 2 * m.cfg.d_z);
    in << cand_flat, z, z_rollout;
    MlpCache local;
    MlpCache* sc = cache ? &cache->scorer : &local;
    const Eigen::VectorXd feat = mlp_forward(m.den.scorer, in, sc);
    if (cache) cache->feature = feat;
    return linear_forward(m.den.head_score, feat);
}

Eigen::VectorXd scorer_backward(const PlannerModel& m, const ScorerCache& cache,
                                const Eigen::VectorXd& d_logits, PlannerModel& grads) {
    const Eigen::VectorXd d_feat =
        linear_backward(m.den.head_score, cache.feature, d_logits, grads.den.head_score);
    return mlp_backward(m.den.scorer, cache.scorer, d_feat, grads.den.scorer);
}

Eigen::VectorXd wm_rollout(const PlannerModel& m, const Eigen::VectorXd& z,
                           const Eigen::VectorXd& cand_flat, RolloutCache* cache) {
    if (z.size() != m.cfg.d_z || cand_flat.size() != 3 * m.cfg.n) {
        throw std::invalid_argument("wm_rollout: shape mismatch");
    }
    Eigen::VectorXd in(z.size() + cand_flat.size());
    in << z, cand_flat;
    MlpCache local;
    MlpCache* rc = cache ? &cache->rollout : &local;
    return mlp_forward(m.wm.rollout, in, rc);
}

Eigen::VectorXd wm_rollout_backward(const PlannerModel& m, const RolloutCache& cache,
                                    const Eigen::VectorXd& d_latent, PlannerModel& grads) {
    return mlp_backward(m.wm.rollout, cache.rollout, d_latent, grads.wm.rollout);
}

Eigen::VectorXd wm_decode_grid(const PlannerModel& m, const Eigen::VectorXd& latent) {
    const Eigen::VectorXd logits = linear_forward(m.wm.decode, latent);
    return (1.0 / (1.0 + (-logits.array()).exp())).matrix();
}

nlohmann::json model_to_json(const PlannerModel& m) {
    nlohmann::json gains = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.hatna.gain_log.size(); ++i) gains.push_back(m.hatna.gain_log(i));
    return nlohmann::json{{"format", "cddrive-checkpoint"},
                          {"version", 1},
                          {"config", run_config_to_json(m.cfg)},
                          {"config_hash", config_hash(m.cfg)},
                          {"hatna_gain_log", std::move(gains)},
                          {"denoiser",
                           {{"trunk", mlp_to_json(m.den.trunk)},
                            {"head_dp", linear_to_json(m.den.head_dp)},
                            {"head_psi", linear_to_json(m.den.head_psi)},
                            {"scorer", mlp_to_json(m.den.scorer)},
                            {"head_score", linear_to_json(m.den.head_score)}}},
                          {"world_model",
                           {{"rollout", mlp_to_json(m.wm.rollout)},
                            {"decode", linear_to_json(m.wm.decode)},
                            {"agent_head", linear_to_json(m.wm.agent_head)},
                            {"bev_head", linear_to_json(m.wm.bev_head)}}}};
}

PlannerModel model_from_json(const nlohmann::json& j) {
    if (j.at("format") != "cddrive-checkpoint" || j.at("version") != 1) {
        throw std::runtime_error("model_from_json: unsupported checkpoint format");
    }
    PlannerModel m = make_model(run_config_from_json(j.at("config")));
    const auto& gains = j.at("hatna_gain_log");
    for (std::size_t i = 0; i < gains.size(); ++i) {
        m.hatna.gain_log(static_cast<Eigen::Index>(i)) = gains[i].get<double>();
    }
    const auto& d = j.at("denoiser");
    m.den.trunk = mlp_from_json(d.at("trunk"));
    m.den.head_dp = linear_from_json(d.at("head_dp"));
    m.den.head_psi = linear_from_json(d.at("head_psi"));
    m.den.scorer = mlp_from_json(d.at("scorer"));
    m.den.head_score = linear_from_json(d.at("head_score"));
    const auto& w = j.at("world_model");
    m.wm.rollout = mlp_from_json(w.at("rollout"));
    m.wm.decode = linear_from_json(w.at("decode"));
    m.wm.agent_head = linear_from_json(w.at("agent_head"));
    m.wm.bev_head = linear_from_json(w.at("bev_head"));
    return m;
}

void save_checkpoint(const PlannerModel& m, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("save_checkpoint: cannot open " + tmp);
        out << model_to_json(m).dump();
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw std::runtime_error("save_checkpoint: rename failed for " + path);
    }
}

PlannerModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
    nlohmann::json j;
    in >> j;
    return model_from_json(j);
}

}  // namespace cddrive
