#include "cddrive/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

namespace cddrive {

namespace {

// Arc-length bookkeeping for a polyline.
struct PolyRef {
    const std::vector<Eigen::Vector2d>& pts;
    std::vector<double> cum;

    explicit PolyRef(const std::vector<Eigen::Vector2d>& p) : pts(p) {
        cum.resize(pts.size(), 0.0);
        for (std::size_t i = 1; i < pts.size(); ++i) {
            cum[i] = cum[i - 1] + (pts[i] - pts[i - 1]).norm();
        }
    }

    double total() const { return cum.back(); }

    Eigen::Vector2d point_at(double s) const {
        if (s <= 0.0) return pts.front();
        if (s >= total()) return pts.back();
        const auto it = std::upper_bound(cum.begin(), cum.end(), s);
        const std::size_t i = static_cast<std::size_t>(it - cum.begin());
        const double seg = cum[i] - cum[i - 1];
        const double u = seg > 0.0 ? (s - cum[i - 1]) / seg : 0.0;
        return pts[i - 1] + u * (pts[i] - pts[i - 1]);
    }

    double tangent_heading_at(double s) const {
        std::size_t i = 1;
        if (s > 0.0) {
            const auto it = std::upper_bound(cum.begin(), cum.end(), std::min(s, total() - 1e-9));
            i = std::max<std::size_t>(1, static_cast<std::size_t>(it - cum.begin()));
        }
        const Eigen::Vector2d d = pts[i] - pts[i - 1];
        return std::atan2(d.y(), d.x());
    }

    // Arc length of the projection of p onto the polyline.
    double project(const Eigen::Vector2d& p) const {
        double best = 1e300;
        double best_s = 0.0;
        for (std::size_t i = 1; i < pts.size(); ++i) {
            const Eigen::Vector2d a = pts[i - 1];
            const Eigen::Vector2d d = pts[i] - pts[i - 1];
            const double len2 = d.squaredNorm();
            double u = len2 > 0.0 ? (p - a).dot(d) / len2 : 0.0;
            u = std::clamp(u, 0.0, 1.0);
            const Eigen::Vector2d q = a + u * d;
            const double dist = (p - q).squaredNorm();
            if (dist < best) {
                best = dist;
                best_s = cum[i - 1] + u * std::sqrt(len2);
            }
        }
        return best_s;
    }
};

std::vector<Eigen::Vector2d> make_arc_centerline(double kappa, double s_min, double s_max,
                                                 double step) {
    std::vector<Eigen::Vector2d> pts;
    for (double s = s_min; s <= s_max + 1e-9; s += step) {
        if (std::abs(kappa) < 1e-9) {
            pts.emplace_back(s, 0.0);
        } else {
            pts.emplace_back(std::sin(kappa * s) / kappa, (1.0 - std::cos(kappa * s)) / kappa);
        }
    }
    return pts;
}

double smoothstep(double u) { return u * u * (3.0 - 2.0 * u); }

// Candidate expert maneuver: ramp speed toward sigma * v0 and blend a
// lateral offset L along the corridor normal.
Trajectory build_maneuver(const PolyRef& center, const EgoState& ego, double sigma, double L,
                          int n, double dt) {
    const double accel_ramp = 2.0;  // m/s^2 speed adjustment rate
    double v = ego.speed;
    double s = center.project({ego.x, ego.y});
    PositionSeq p(n, 2);
    for (int i = 1; i <= n; ++i) {
        const double target = sigma * ego.speed;
        const double dv = std::clamp(target - v, -accel_ramp * dt, accel_ramp * dt);
        v += dv;
        s += v * dt;
        const double u = static_cast<double>(i) / n;
        const double off = L * smoothstep(u);
        const Eigen::Vector2d base = center.point_at(s);
        const double th = center.tangent_heading_at(s);
        const Eigen::Vector2d normal{-std::sin(th), std::cos(th)};
        const Eigen::Vector2d q = base + off * normal;
        p(i - 1, 0) = q.x();
        p(i - 1, 1) = q.y();
    }
    return make_trajectory(p, headings_from_positions(p), dt);
}

bool all_ones(const SubMetrics& m) {
    return m.nc == 1.0 && m.dac == 1.0 && m.ep == 1.0 && m.ttc == 1.0 && m.comf == 1.0;
}

// Does the agent's straight-line extrapolation come within the corridor
// half width of the centerline during the horizon?
bool crosses_corridor(const PolyRef& center, const Agent& a, double half_width, double horizon) {
    for (double t = 0.0; t <= horizon + 1e-9; t += 0.1) {
        const Eigen::Vector2d p = a.position_at(t);
        const Eigen::Vector2d proj = center.point_at(center.project(p));
        if ((p - proj).norm() <= half_width) return true;
    }
    return false;
}

}  // namespace

std::string difficulty_name(Difficulty d) {
    return d == Difficulty::routine ? "routine" : "interactive";
}

Difficulty difficulty_from_name(const std::string& s) {
    if (s == "routine") return Difficulty::routine;
    if (s == "interactive") return Difficulty::interactive;
    throw std::invalid_argument("unknown difficulty: " + s);
}

double centerline_distance(const Corridor& c, const Eigen::Vector2d& p) {
    PolyRef ref(c.centerline);
    return (p - ref.point_at(ref.project(p))).norm();
}

SubMetrics evaluate_submetrics(const Scene& scene, const Trajectory& traj,
                               const MetricParams& params) {
    const int n = static_cast<int>(traj.size());
    const double dt = traj.horizon_dt;
    SubMetrics m;

    // Ego positions at times 0, dt, ..., n*dt.
    std::vector<Eigen::Vector2d> q(static_cast<std::size_t>(n) + 1);
    q[0] = {scene.ego.x, scene.ego.y};
    for (int i = 0; i < n; ++i) q[static_cast<std::size_t>(i) + 1] = {traj.points[i].x, traj.points[i].y};

    // NC: axis-aligned square footprints must never overlap at waypoint times.
    m.nc = 1.0;
    for (int i = 1; i <= n; ++i) {
        const double t = i * dt;
        for (const auto& a : scene.agents) {
            const Eigen::Vector2d pa = a.position_at(t);
            const double reach = a.half_extent + params.ego_half;
            if (std::abs(q[i].x() - pa.x()) < reach && std::abs(q[i].y() - pa.y()) < reach) {
                m.nc = 0.0;
            }
        }
    }

    // DAC: lateral offset from the centerline within the half width.
    m.dac = 1.0;
    {
        PolyRef ref(scene.corridor.centerline);
        for (int i = 1; i <= n; ++i) {
            const double d = (q[i] - ref.point_at(ref.project(q[i]))).norm();
            if (d > scene.corridor.half_width) m.dac = 0.0;
        }
    }

    // EP: progress along the goal axis relative to the expert.
    {
        const Eigen::Vector2d start{scene.ego.x, scene.ego.y};
        const Eigen::Vector2d end{traj.points.back().x, traj.points.back().y};
        const Eigen::Vector2d xend{scene.expert.points.back().x, scene.expert.points.back().y};
        const double prog = (end - start).dot(scene.goal_axis);
        const double xprog = (xend - start).dot(scene.goal_axis);
        m.ep = xprog > 1e-9 ? std::clamp(prog / xprog, 0.0, 1.0) : 1.0;
    }

    // TTC: per agent and step, Chebyshev gap over closing speed >= threshold.
    m.ttc = 1.0;
    for (const auto& a : scene.agents) {
        std::vector<double> gap(static_cast<std::size_t>(n) + 1);
        for (int i = 0; i <= n; ++i) {
            const Eigen::Vector2d pa = a.position_at(i * dt);
            const double cheb = std::max(std::abs(q[i].x() - pa.x()), std::abs(q[i].y() - pa.y()));
            gap[i] = cheb - (a.half_extent + params.ego_half);
        }
        for (int i = 0; i < n; ++i) {
            if (gap[i] < 0.0) m.ttc = 0.0;
            const double closing = (gap[i] - gap[i + 1]) / dt;
            if (closing > 1e-9 && gap[i] / closing < params.ttc_threshold) m.ttc = 0.0;
        }
    }

    // Comf: bounded acceleration and yaw rate along the discretized motion.
    m.comf = 1.0;
    {
        std::vector<Eigen::Vector2d> vel(static_cast<std::size_t>(n) + 1);
        vel[0] = scene.ego.speed * Eigen::Vector2d{std::cos(scene.ego.psi), std::sin(scene.ego.psi)};
        for (int i = 0; i < n; ++i) vel[static_cast<std::size_t>(i) + 1] = (q[i + 1] - q[i]) / dt;
        for (int i = 0; i < n; ++i) {
            if ((vel[i + 1] - vel[i]).norm() / dt > params.a_max) m.comf = 0.0;
        }
        double prev_psi = scene.ego.psi;
        for (int i = 0; i < n; ++i) {
            const double rate = wrap_heading(traj.points[i].psi - prev_psi) / dt;
            if (std::abs(rate) > params.r_max) m.comf = 0.0;
            prev_psi = traj.points[i].psi;
        }
    }

    return m;
}

double pdms(const SubMetrics& m) {
    return m.nc * m.dac * (5.0 * m.ep + 5.0 * m.ttc + 2.0 * m.comf) / 12.0;
}

double epdms(double nc, double dac, double ddc, double tlc, double ep, double ttc, double lk,
             double hc, double ec) {
    return nc * dac * ddc * tlc * (5.0 * ep + 5.0 * ttc + 2.0 * lk + 2.0 * hc + 2.0 * ec) / 16.0;
}

Scene generate_scene(unsigned long long seed, Difficulty difficulty,
                     const SceneGenParams& params) {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL +
                        (difficulty == Difficulty::interactive ? 0x6A09E667F3BCC909ULL : 0ULL));
    auto uniform = [&rng](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    auto uniform_int = [&rng](int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng);
    };

    const double horizon = params.n * params.dt;

    for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
        Scene s;
        s.rng_seed = seed;
        s.difficulty = difficulty;
        s.ego = {0.0, 0.0, 0.0, uniform(5.0, 10.0)};
        s.goal_axis = {1.0, 0.0};

        const double kappa = uniform(-0.012, 0.012);
        s.corridor.half_width = uniform(2.8, 4.0);
        s.corridor.centerline = make_arc_centerline(kappa, -10.0, 80.0, 1.0);
        PolyRef center(s.corridor.centerline);

        if (difficulty == Difficulty::routine) {
            const int n_agents = uniform_int(0, 1);
            for (int i = 0; i < n_agents; ++i) {
                const double sa = s.ego.speed * horizon + uniform(20.0, 40.0);
                const Eigen::Vector2d p = center.point_at(center.project({0, 0}) + sa);
                Agent a;
                a.x = p.x();
                a.y = p.y();
                a.psi = center.tangent_heading_at(center.project(p));
                a.speed = uniform(3.0, 8.0);
                a.half_extent = uniform(0.8, 1.4);
                s.agents.push_back(a);
            }
        } else {
            const int n_agents = uniform_int(2, 4);
            const double s0 = center.project({0, 0});
            for (int i = 0; i < n_agents; ++i) {
                const double t_c = uniform(1.0, 3.2);
                const double sc = s0 + s.ego.speed * t_c * uniform(0.8, 1.05);
                const double th = center.tangent_heading_at(sc);
                const Eigen::Vector2d normal{-std::sin(th), std::cos(th)};
                const Eigen::Vector2d cross =
                    center.point_at(sc) + uniform(-0.3, 0.3) * s.corridor.half_width * normal;
                Agent a;
                a.speed = uniform(2.5, 7.0);
                a.half_extent = uniform(0.8, 1.4);
                const double side = uniform(0.0, 1.0) < 0.5 ? 1.0 : -1.0;
                const double approach = th + side * (kPi / 2.0 + uniform(-0.4, 0.4));
                const Eigen::Vector2d start =
                    cross - a.speed * t_c * Eigen::Vector2d{std::cos(approach), std::sin(approach)};
                a.x = start.x();
                a.y = start.y();
                a.psi = approach;
                s.agents.push_back(a);
            }
            int crossing = 0;
            for (const auto& a : s.agents) {
                if (crosses_corridor(center, a, s.corridor.half_width, horizon)) ++crossing;
            }
            if (crossing < 2) continue;
        }

        // Expert search over a small maneuver grid, least deviation first.
        const double margin = 1.2;
        std::vector<std::pair<double, double>> maneuvers;
        for (double sigma : {1.0, 0.85, 0.7, 0.55, 0.4, 0.25}) {
            for (double L : {0.0, 0.7, -0.7, 1.4, -1.4, 2.1, -2.1}) {
                if (std::abs(L) > s.corridor.half_width - margin) continue;
                maneuvers.emplace_back(sigma, L);
            }
        }
        std::stable_sort(maneuvers.begin(), maneuvers.end(), [](const auto& a, const auto& b) {
            return (1.0 - a.first) + 0.25 * std::abs(a.second) <
                   (1.0 - b.first) + 0.25 * std::abs(b.second);
        });

        auto passes = [&](const Trajectory& t) {
            Scene probe = s;
            probe.expert = t;
            return all_ones(evaluate_submetrics(probe, t, params.metrics));
        };

        const Trajectory trivial = build_maneuver(center, s.ego, 1.0, 0.0, params.n, params.dt);
        const bool trivial_ok = passes(trivial);

        if (difficulty == Difficulty::routine) {
            if (!trivial_ok) continue;
            s.expert = trivial;
            return s;
        }

        // Interactive scenes must force the expert off the trivial profile.
        if (trivial_ok) continue;
        bool found = false;
        for (const auto& [sigma, L] : maneuvers) {
            if (sigma == 1.0 && L == 0.0) continue;
            const Trajectory t = build_maneuver(center, s.ego, sigma, L, params.n, params.dt);
            if (passes(t)) {
                s.expert = t;
                found = true;
                break;
            }
        }
        if (found) return s;
    }
    throw std::runtime_error("generate_scene: retry budget exhausted for seed " +
                             std::to_string(seed));
}

Eigen::VectorXd encode_scene(const Scene& scene) {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(kSceneFeatureDim);
    const Eigen::Vector2d ego_pos{scene.ego.x, scene.ego.y};
    const double c = std::cos(-scene.ego.psi);
    const double sn = std::sin(-scene.ego.psi);
    Eigen::Matrix2d rot;
    rot << c, -sn, sn, c;

    z(0) = scene.ego.speed;
    z(1) = scene.corridor.half_width;

    PolyRef center(scene.corridor.centerline);
    const double s0 = center.project(ego_pos);
    const double lookahead[4] = {5.0, 15.0, 30.0, 50.0};
    for (int i = 0; i < 4; ++i) {
        z(2 + i) = wrap_heading(center.tangent_heading_at(s0 + lookahead[i]) - scene.ego.psi);
    }

    const Eigen::Vector2d goal = rot * scene.goal_axis;
    z(6) = goal.x();
    z(7) = goal.y();

    std::vector<std::size_t> order(scene.agents.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double da = (Eigen::Vector2d{scene.agents[a].x, scene.agents[a].y} - ego_pos).squaredNorm();
        const double db = (Eigen::Vector2d{scene.agents[b].x, scene.agents[b].y} - ego_pos).squaredNorm();
        return da < db;
    });

    const int count = std::min<int>(kMaxEncodedAgents, static_cast<int>(order.size()));
    for (int i = 0; i < count; ++i) {
        const Agent& a = scene.agents[order[static_cast<std::size_t>(i)]];
        const Eigen::Vector2d rel = rot * (Eigen::Vector2d{a.x, a.y} - ego_pos);
        const Eigen::Vector2d vel =
            rot * (a.speed * Eigen::Vector2d{std::cos(a.psi), std::sin(a.psi)});
        const int base = 8 + 6 * i;
        z(base + 0) = rel.x();
        z(base + 1) = rel.y();
        z(base + 2) = vel.x();
        z(base + 3) = vel.y();
        z(base + 4) = a.half_extent;
        z(base + 5) = 1.0;
    }
    return z;
}

nlohmann::json scene_to_json(const Scene& s) {
    nlohmann::json cl = nlohmann::json::array();
    for (const auto& p : s.corridor.centerline) cl.push_back({p.x(), p.y()});
    nlohmann::json agents = nlohmann::json::array();
    for (const auto& a : s.agents) {
        agents.push_back({{"x", a.x},
                          {"y", a.y},
                          {"psi", a.psi},
                          {"speed", a.speed},
                          {"half_extent", a.half_extent}});
    }
    return nlohmann::json{
        {"ego", {{"x", s.ego.x}, {"y", s.ego.y}, {"psi", s.ego.psi}, {"speed", s.ego.speed}}},
        {"agents", std::move(agents)},
        {"corridor", {{"centerline", std::move(cl)}, {"half_width", s.corridor.half_width}}},
        {"goal_axis", {s.goal_axis.x(), s.goal_axis.y()}},
        {"expert", trajectory_to_json(s.expert)},
        {"rng_seed", s.rng_seed},
        {"difficulty", difficulty_name(s.difficulty)}};
}

Scene scene_from_json(const nlohmann::json& j) {
    Scene s;
    s.ego = {j.at("ego").at("x").get<double>(), j.at("ego").at("y").get<double>(),
             j.at("ego").at("psi").get<double>(), j.at("ego").at("speed").get<double>()};
    for (const auto& a : j.at("agents")) {
        s.agents.push_back({a.at("x").get<double>(), a.at("y").get<double>(),
                            a.at("psi").get<double>(), a.at("speed").get<double>(),
                            a.at("half_extent").get<double>()});
    }
    for (const auto& p : j.at("corridor").at("centerline")) {
        s.corridor.centerline.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    }
    s.corridor.half_width = j.at("corridor").at("half_width").get<double>();
    s.goal_axis = {j.at("goal_axis").at(0).get<double>(), j.at("goal_axis").at(1).get<double>()};
    s.expert = trajectory_from_json(j.at("expert"));
    s.rng_seed = j.at("rng_seed").get<unsigned long long>();
    s.difficulty = difficulty_from_name(j.at("difficulty").get<std::string>());
    return s;
}

void save_corpus(const std::vector<Scene>& scenes, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_corpus: cannot open " + path);
    out << nlohmann::json{{"format", "cddrive-scene-corpus"},
                          {"version", 1},
                          {"count", scenes.size()}}
               .dump()
        << "\n";
    for (const auto& s : scenes) out << scene_to_json(s).dump() << "\n";
}

std::vector<Scene> load_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_corpus: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_corpus: empty file");
    const auto header = nlohmann::json::parse(line);
    if (header.at("format") != "cddrive-scene-corpus" || header.at("version") != 1) {
        throw std::runtime_error("load_corpus: unsupported corpus format");
    }
    std::vector<Scene> scenes;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        scenes.push_back(scene_from_json(nlohmann::json::parse(line)));
    }
    return scenes;
}

}  // namespace cddrive
