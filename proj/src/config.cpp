#include "cddrive/config.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

namespace cddrive {

std::string refiner_name(RefinerKind r) {
    return r == RefinerKind::diffusion ? "diffusion" : "regression";
}

RefinerKind refiner_from_name(const std::string& s) {
    if (s == "diffusion") return RefinerKind::diffusion;
    if (s == "regression") return RefinerKind::regression;
    throw std::invalid_argument("unknown refiner: " + s);
}

nlohmann::json run_config_to_json(const RunConfig& c) {
    return nlohmann::json{
        {"version", 1},
        {"n", c.n},
        {"dt", c.dt},
        {"heading_in_distance", c.heading_in_distance},
        {"k", c.k},
        {"ttc_threshold", c.ttc_threshold},
        {"a_max", c.a_max},
        {"r_max", c.r_max},
        {"ego_half", c.ego_half},
        {"d_z", c.d_z},
        {"hidden", c.hidden},
        {"d_t", c.d_t},
        {"T", c.T},
        {"beta_start", c.beta_start},
        {"beta_end", c.beta_end},
        {"t_truncate", c.t_truncate},
        {"ddim_stride", c.ddim_stride},
        {"hatna_enabled", c.hatna_enabled},
        {"hatna_kernel_size", c.hatna_kernel_size},
        {"hatna_alpha", c.hatna_alpha},
        {"hatna_epsilon", c.hatna_epsilon},
        {"refiner", refiner_name(c.refiner)},
        {"grid_g", c.grid_g},
        {"grid_cell", c.grid_cell},
        {"train_steps", c.train_steps},
        {"lr", c.lr},
        {"lr_min", c.lr_min},
        {"warmup_steps", c.warmup_steps},
        {"adam_beta1", c.adam_beta1},
        {"adam_beta2", c.adam_beta2},
        {"adam_eps", c.adam_eps},
        {"seed", c.seed},
        {"loss",
         {{"lambda_traj", c.loss.lambda_traj},
          {"lambda_im", c.loss.lambda_im},
          {"lambda_sim", c.loss.lambda_sim},
          {"lambda_lwm", c.loss.lambda_lwm},
          {"lambda_bev", c.loss.lambda_bev},
          {"lambda_agent", c.loss.lambda_agent}}},
        {"score",
         {{"w_im", c.score.w_im},
          {"w_nc", c.score.w_nc},
          {"w_dac", c.score.w_dac},
          {"w_ep", c.score.w_ep},
          {"w_ttc", c.score.w_ttc},
          {"w_comf", c.score.w_comf}}}};
}

RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig c;
    c.n = j.at("n").get<int>();
    c.dt = j.at("dt").get<double>();
    c.heading_in_distance = j.at("heading_in_distance").get<bool>();
    c.k = j.at("k").get<int>();
    c.ttc_threshold = j.at("ttc_threshold").get<double>();
    c.a_max = j.at("a_max").get<double>();
    c.r_max = j.at("r_max").get<double>();
    c.ego_half = j.at("ego_half").get<double>();
    c.d_z = j.at("d_z").get<int>();
    c.hidden = j.at("hidden").get<int>();
    c.d_t = j.at("d_t").get<int>();
    c.T = j.at("T").get<int>();
    c.beta_start = j.at("beta_start").get<double>();
    c.beta_end = j.at("beta_end").get<double>();
    c.t_truncate = j.at("t_truncate").get<int>();
    c.ddim_stride = j.at("ddim_stride").get<int>();
    c.hatna_enabled = j.at("hatna_enabled").get<bool>();
    c.hatna_kernel_size = j.at("hatna_kernel_size").get<int>();
    c.hatna_alpha = j.at("hatna_alpha").get<double>();
    c.hatna_epsilon = j.at("hatna_epsilon").get<double>();
    c.refiner = refiner_from_name(j.at("refiner").get<std::string>());
    c.grid_g = j.at("grid_g").get<int>();
    c.grid_cell = j.at("grid_cell").get<double>();
    c.train_steps = j.at("train_steps").get<int>();
    c.lr = j.at("lr").get<double>();
    c.lr_min = j.at("lr_min").get<double>();
    c.warmup_steps = j.at("warmup_steps").get<int>();
    c.adam_beta1 = j.at("adam_beta1").get<double>();
    c.adam_beta2 = j.at("adam_beta2").get<double>();
    c.adam_eps = j.at("adam_eps").get<double>();
    c.seed = j.at("seed").get<unsigned long long>();
    const auto& l = j.at("loss");
    c.loss = {l.at("lambda_traj").get<double>(), l.at("lambda_im").get<double>(),
              l.at("lambda_sim").get<double>(),  l.at("lambda_lwm").get<double>(),
              l.at("lambda_bev").get<double>(),  l.at("lambda_agent").get<double>()};
    const auto& s = j.at("score");
    c.score = {s.at("w_im").get<double>(),  s.at("w_nc").get<double>(),
               s.at("w_dac").get<double>(), s.at("w_ep").get<double>(),
               s.at("w_ttc").get<double>(), s.at("w_comf").get<double>()};
    return c;
}

unsigned long long config_hash(const RunConfig& c) {
    const std::string s = run_config_to_json(c).dump();
    unsigned long long h = 14695981039346656037ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace cddrive
