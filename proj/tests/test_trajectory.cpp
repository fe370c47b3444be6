#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "cddrive/trajectory.hpp"

using namespace cddrive;

namespace {

Trajectory random_traj(std::mt19937_64& rng, int n = 8) {
    std::uniform_real_distribution<double> pos(-20.0, 20.0);
    std::uniform_real_distribution<double> head(-3.0, 3.0);
    Trajectory t;
    t.horizon_dt = 0.5;
    for (int i = 0; i < n; ++i) t.points.push_back({pos(rng), pos(rng), wrap_heading(head(rng))});
    return t;
}

}  // namespace

TEST_CASE("wrap_heading maps into (-pi, pi]") {
    CHECK(wrap_heading(0.0) == 0.0);
    CHECK(wrap_heading(kPi) == doctest::Approx(kPi));
    CHECK(wrap_heading(-kPi) == doctest::Approx(kPi));  // boundary maps to +pi
    CHECK(wrap_heading(3 * kPi) == doctest::Approx(kPi));

    // -7pi: add 2pi repeatedly until in range -> pi
    double oracle = -7.0 * kPi;
    while (oracle <= -kPi) oracle += 2.0 * kPi;
    CHECK(wrap_heading(-7.0 * kPi) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(oracle == doctest::Approx(kPi));

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> big(-100.0, 100.0);
    for (int i = 0; i < 1000; ++i) {
        const double w = wrap_heading(big(rng));
        CHECK(w > -kPi);
        CHECK(w <= kPi);
    }
    CHECK_THROWS_AS(wrap_heading(std::nan("")), std::invalid_argument);
    CHECK_THROWS_AS(wrap_heading(INFINITY), std::invalid_argument);
}

TEST_CASE("l2_distance matches per-coordinate sum-of-squares oracle") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        const Trajectory a = random_traj(rng), b = random_traj(rng);
        double ss = 0.0, ss_pos = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double dx = a.points[i].x - b.points[i].x;
            const double dy = a.points[i].y - b.points[i].y;
            const double dp = a.points[i].psi - b.points[i].psi;
            ss_pos += dx * dx + dy * dy;
            ss += dx * dx + dy * dy + dp * dp;
        }
        CHECK(l2_distance(a, b, true) == doctest::Approx(std::sqrt(ss)).epsilon(1e-12));
        CHECK(l2_distance(a, b, false) == doctest::Approx(std::sqrt(ss_pos)).epsilon(1e-12));
    }
    const Trajectory a = random_traj(rng);
    CHECK(l2_distance(a, a) == 0.0);
}

TEST_CASE("ade matches per-step brute-force oracle") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const Trajectory a = random_traj(rng), b = random_traj(rng);
        double sum = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            sum += std::hypot(a.points[i].x - b.points[i].x, a.points[i].y - b.points[i].y);
        }
        CHECK(ade(a, b) == doctest::Approx(sum / static_cast<double>(a.size())).epsilon(1e-12));
    }
}

TEST_CASE("positions / make_trajectory round trip") {
    std::mt19937_64 rng(4);
    const Trajectory t = random_traj(rng);
    const PositionSeq p = positions(t);
    Eigen::VectorXd psi(static_cast<int>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i) psi(static_cast<int>(i)) = t.points[i].psi;
    const Trajectory back = make_trajectory(p, psi, t.horizon_dt);
    CHECK(l2_distance(t, back) == doctest::Approx(0.0));
    CHECK(back.horizon_dt == t.horizon_dt);
}

TEST_CASE("headings_from_positions follows deltas, last repeated") {
    PositionSeq p(4, 2);
    p << 0, 0, 1, 0, 1, 1, 1, 1;  // right, up, degenerate
    const Eigen::VectorXd psi = headings_from_positions(p);
    CHECK(psi(0) == doctest::Approx(0.0));
    CHECK(psi(1) == doctest::Approx(kPi / 2));
    CHECK(psi(2) == doctest::Approx(kPi / 2));  // zero delta reuses previous
    CHECK(psi(3) == doctest::Approx(kPi / 2));  // last repeated
}

TEST_CASE("validate_trajectory rejects bad inputs") {
    Trajectory t;
    t.horizon_dt = 0.5;
    CHECK_THROWS_AS(validate_trajectory(t), std::invalid_argument);  // empty
    t.points.push_back({0, 0, 0});
    CHECK_NOTHROW(validate_trajectory(t));
    t.points.push_back({std::nan(""), 0, 0});
    CHECK_THROWS_AS(validate_trajectory(t), std::invalid_argument);
    t.points[1] = {1, 0, 5.0};  // heading out of range
    CHECK_THROWS_AS(validate_trajectory(t), std::invalid_argument);
    t.points[1] = {1, 0, 0};
    t.horizon_dt = 0.0;
    CHECK_THROWS_AS(validate_trajectory(t), std::invalid_argument);
}

TEST_CASE("trajectory and vocabulary JSON round trip exactly") {
    std::mt19937_64 rng(5);
    const Trajectory t = random_traj(rng);
    const Trajectory back = trajectory_from_json(trajectory_to_json(t));
    REQUIRE(back.size() == t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(back.points[i].x == t.points[i].x);
        CHECK(back.points[i].y == t.points[i].y);
        CHECK(back.points[i].psi == t.points[i].psi);
    }
    Vocabulary v;
    v.k = 3;
    v.seed = 42;
    for (int i = 0; i < 3; ++i) v.anchors.push_back(random_traj(rng));
    const Vocabulary vb = vocabulary_from_json(vocabulary_to_json(v));
    CHECK(vb.k == v.k);
    CHECK(vb.seed == v.seed);
    REQUIRE(vb.anchors.size() == v.anchors.size());
    for (std::size_t i = 0; i < v.anchors.size(); ++i) {
        CHECK(l2_distance(vb.anchors[i], v.anchors[i]) == 0.0);
    }
}
