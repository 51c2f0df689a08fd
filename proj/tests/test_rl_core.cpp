#include <doctest.h>

#include <cmath>
#include <random>

#include "metatune/environments.hpp"
#include "metatune/errors.hpp"
#include "metatune/rl_core.hpp"
#include "oracles.hpp"

using namespace metatune;

namespace {

Policy constant(int a) {
    return [a](const Observation&) { return a; };
}

Policy scripted(std::vector<int> actions) {
    auto step = std::make_shared<std::size_t>(0);
    return [actions = std::move(actions), step](const Observation&) { return actions[(*step)++ % actions.size()]; };
}

// Return of one DeepSea action sequence, from the reward rules alone.
double deep_sea_path_return(int n, const std::vector<int>& rights) {
    int col = 0;
    double total = 0.0;
    for (std::size_t r = 0; r < rights.size(); ++r) {
        if (rights[r]) {
            total -= 0.01 / n;
            col = std::min(col + 1, n - 1);
        } else {
            col = std::max(col - 1, 0);
        }
        if (r + 1 == rights.size() && rights[r] && col == n - 1) total += 1.0;
    }
    return total;
}

}  // namespace

TEST_CASE("discounted_return") {
    const std::vector<double> ones{1, 1, 1};
    CHECK(discounted_return(ones, 0.0) == 1.0);
    CHECK(discounted_return(ones, 0.5) == 1.75);
    CHECK_THROWS_AS(discounted_return(ones, 1.0), DomainError);
    CHECK_THROWS_AS(discounted_return(ones, -0.1), DomainError);

    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> r(20);
    for (auto& x : r) x = u(gen);
    double acc = 0.0;
    for (auto it = r.rbegin(); it != r.rend(); ++it) acc = *it + 0.9 * acc;
    CHECK(std::abs(discounted_return(r, 0.9) - acc) < 1e-12);
}

TEST_CASE("gridworld examples") {
    GridWorld g2(2, 2, 1.0, -0.1);
    g2.reset();
    const auto t = run_episode(g2, scripted({1, 2}));
    CHECK(t.size() == 2);
    CHECK(t.episode_return == doctest::Approx(-0.1 + 1.0));

    GridWorld g(5, 5, 1.0, -0.1);
    auto obs = g.reset();
    const auto bump = g.step(0);
    CHECK(bump.observation.id == obs.id);
    CHECK(bump.reward == -0.1);
    CHECK_FALSE(bump.done);

    const auto vi = oracle::grid_value_iteration(5, 5, 1.0, -0.1, 0.9999999);
    CHECK(vi.value[0] == doctest::Approx(7 * -0.1 + 1.0).epsilon(1e-5));
    CHECK(g.optimal_return() == doctest::Approx(7 * -0.1 + 1.0));
    // Follow an oracle-optimal policy.
    const auto path = run_episode(g, [&](const Observation& o) { return vi.optimal_actions[o.id].front(); });
    CHECK(path.episode_return == doctest::Approx(g.optimal_return()));
}

TEST_CASE("environment contract: caps, invalid actions, finished episodes") {
    GridWorld g(3, 3);
    g.reset();
    CHECK_THROWS_AS(g.step(4), DomainError);
    const auto looping = run_episode(g, constant(0));
    CHECK(looping.size() == static_cast<std::size_t>(g.step_cap()));
    CHECK(looping.transitions.back().done);
    CHECK_THROWS_AS(g.step(0), DomainError);

    DeepSea d(4, false, Rng(1));
    const auto tr = run_episode(d, constant(1));
    CHECK(tr.size() == 3);
    for (std::size_t i = 0; i + 1 < tr.size(); ++i) CHECK_FALSE(tr.transitions[i].done);
    double sum = 0.0;
    for (const auto& x : tr.transitions) sum += x.reward;
    CHECK(std::abs(sum - tr.episode_return) < 1e-9);
}

TEST_CASE("deep sea examples") {
    DeepSea d(4, false, Rng(0));
    CHECK(run_episode(d, constant(1)).episode_return == doctest::Approx(3 * -0.0025 + 1.0));
    CHECK(run_episode(d, constant(0)).episode_return == 0.0);

    DeepSea d2(2, false, Rng(0));
    const double right = run_episode(d2, constant(1)).episode_return;
    const double left = run_episode(d2, constant(0)).episode_return;
    CHECK(right > left);
}

TEST_CASE("deep sea optimum by policy enumeration") {
    for (int n = 2; n <= 6; ++n) {
        DeepSea d(n, false, Rng(0));
        double best = -1e9;
        for (int mask = 0; mask < (1 << (n - 1)); ++mask) {
            std::vector<int> actions;
            for (int k = 0; k < n - 1; ++k) actions.push_back((mask >> k) & 1);
            const double got = run_episode(d, scripted(actions)).episode_return;
            CHECK(got == doctest::Approx(deep_sea_path_return(n, actions)));
            best = std::max(best, got);
        }
        CHECK(best == doctest::Approx(1.0 - 0.01 * (n - 1) / n));
        CHECK(d.optimal_return() == doctest::Approx(best));
    }
}

TEST_CASE("random policy on deep sea matches path enumeration") {
    const int n = 4;
    double expected = 0.0;
    for (int mask = 0; mask < 8; ++mask) {
        std::vector<int> a{mask & 1, (mask >> 1) & 1, (mask >> 2) & 1};
        expected += deep_sea_path_return(n, a) / 8.0;
    }
    DeepSea d(n, false, Rng(2));
    std::mt19937_64 gen(5);
    const auto res = evaluate_policy(d, [&](const Observation&) { return static_cast<int>(gen() & 1); }, 10000);
    CHECK(std::abs(res.mean - expected) < 0.05);
}

TEST_CASE("stochastic deep sea is reproducible") {
    DeepSea a(5, true, Rng(9)), b(5, true, Rng(9));
    for (int e = 0; e < 20; ++e) {
        const auto ta = run_episode(a, constant(1));
        const auto tb = run_episode(b, constant(1));
        CHECK(ta == tb);
    }
}

TEST_CASE("umbrella examples") {
    for (std::uint64_t s = 0; s < 10; ++s) {
        Umbrella u(1, 2, Rng(s));
        const auto obs = u.reset();
        REQUIRE(obs.features.size() == 5);
        const bool need = obs.features[0] == 1.0;
        const auto right = u.step(need ? 1 : 0);
        CHECK(right.done);
        CHECK(right.reward == 1.0);
        u.reset();
        const bool need2 = u.forecast();
        const auto wrong = u.step(need2 ? 0 : 1);
        CHECK(wrong.reward == -1.0);
    }

    Umbrella u(3, 0, Rng(4));
    double sum = 0.0;
    const int episodes = 100000;
    for (int e = 0; e < episodes; ++e) {
        u.reset();
        for (int t = 0; t < 2; ++t) sum += u.step(t % 2).reward;
        u.step(0);
    }
    CHECK(std::abs(sum / (2.0 * episodes)) < 0.02);
}

TEST_CASE("evaluate_policy and feature vectors") {
    GridWorld g(2, 2);
    const auto res = evaluate_policy(g, scripted({1, 2}), 4);
    for (double r : res.episode_returns) CHECK(r == doctest::Approx(0.9));
    CHECK(res.mean == doctest::Approx(0.9));
    CHECK(res.max == doctest::Approx(0.9));
    CHECK_THROWS_AS(evaluate_policy(g, constant(1), 0), DomainError);

    const auto onehot = feature_vector(Observation{2, {}}, 4);
    CHECK(onehot == std::vector<double>{0, 0, 1, 0});
    CHECK(feature_vector(Observation{0, {0.5, 1.0}}, 4) == std::vector<double>{0.5, 1.0});
}

TEST_CASE("environment factory") {
    EnvConfig c;
    c.kind = EnvKind::gridworld;
    CHECK(make_environment(c, Rng(0))->name() == "gridworld");
    c.kind = EnvKind::umbrella;
    c.chain_length = 0;
    CHECK_THROWS_AS(make_environment(c, Rng(0)), ConfigError);
    CHECK(parse_env_kind(to_string(EnvKind::deep_sea)) == EnvKind::deep_sea);
}
