#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "metatune/acquisition.hpp"
#include "metatune/errors.hpp"

using namespace metatune;

namespace {

// E[max(G - f, 0)], G ~ N(mean, std^2), with its standard error.
std::pair<double, double> monte_carlo_ei(double mean, double std, double f_star, int samples, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double v = std::max(mean + std * z(gen) - f_star, 0.0);
        s += v;
        s2 += v * v;
    }
    const double m = s / samples;
    const double var = s2 / samples - m * m;
    return {m, std::sqrt(std::max(var, 0.0) / samples)};
}

HyperparamSpace space2() { return HyperparamSpace({{"a", 0.0, 1.0, Scale::linear}, {"b", 1e-3, 1.0, Scale::log10}}); }

}  // namespace

TEST_CASE("normal pdf and cdf") {
    CHECK(normal_pdf(0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)));
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(normal_cdf(-40.0) >= 0.0);
}

TEST_CASE("expected improvement examples") {
    CHECK(expected_improvement(0.3, 0.0, 0.3) == 0.0);
    CHECK(expected_improvement(1.0, 0.0, 0.0) == 1.0);
    CHECK(expected_improvement(-1.0, 0.0, 0.0) == 0.0);
    const double closed = expected_improvement(0.0, 1.0, 0.0);
    CHECK(closed == doctest::Approx(0.3989422804014327));
    const auto [mc, se] = monte_carlo_ei(0.0, 1.0, 0.0, 1000000, 17);
    CHECK(std::abs(closed - mc) < 3.0 * se);
}

TEST_CASE("expected improvement is non-negative and monotone") {
    for (double f = -1.0; f <= 1.0; f += 0.5) {
        for (double s = 0.0; s <= 2.0; s += 0.25) {
            double prev = -1.0;
            for (double m = -3.0; m <= 3.0; m += 0.1) {
                const double ei = expected_improvement(m, s, f);
                REQUIRE(ei >= 0.0);
                REQUIRE(ei >= std::max(0.0, m - f) - 1e-12);
                REQUIRE(ei >= prev - 1e-15);
                prev = ei;
            }
        }
        for (double m = -3.0; m <= f; m += 0.25) {
            double prev = -1.0;
            for (double s = 0.0; s <= 3.0; s += 0.1) {
                const double ei = expected_improvement(m, s, f);
                REQUIRE(ei >= prev - 1e-15);
                prev = ei;
            }
        }
    }
}

TEST_CASE("lhs stratification") {
    Rng rng(2);
    const auto four = lhs_unit(2, 4, rng);
    for (std::size_t d = 0; d < 2; ++d) {
        std::vector<int> q(4, 0);
        for (const auto& p : four) ++q[static_cast<std::size_t>(p[d] * 4.0)];
        for (int c : q) CHECK(c == 1);
    }
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        for (std::size_t n : {1u, 2u, 10u, 37u, 64u}) {
            for (std::size_t d : {1u, 3u, 8u}) {
                Rng r(seed);
                const auto pts = lhs_unit(d, n, r);
                REQUIRE(pts.size() == n);
                for (std::size_t k = 0; k < d; ++k) {
                    std::vector<int> occupancy(n, 0);
                    for (const auto& p : pts) {
                        REQUIRE(p[k] >= 0.0);
                        REQUIRE(p[k] < 1.0);
                        ++occupancy[static_cast<std::size_t>(p[k] * static_cast<double>(n))];
                    }
                    for (int c : occupancy) REQUIRE(c == 1);
                }
            }
        }
    }
    Rng r(1);
    CHECK_THROWS_AS(lhs_unit(2, 0, r), DomainError);
    const auto theta = lhs_sample(space2(), 5, r);
    for (const auto& t : theta) {
        CHECK(t[1] >= 1e-3);
        CHECK(t[1] <= 1.0);
    }
}

TEST_CASE("top_m_candidates with the prior sentinel takes the first m by index") {
    const auto model = GPModel::prior(2);
    Rng rng(4);
    const auto batch = lhs_unit(2, 30, rng);
    const auto top = top_m_candidates(model, space2(), batch, 0.0, 5);
    REQUIRE(top.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(top[i].batch_index == i);
    CHECK_THROWS_AS(top_m_candidates(model, space2(), batch, 0.0, 31), ShapeError);
}

TEST_CASE("top_m_candidates matches a full sort of EI") {
    Rng rng(6);
    ObservationDataset data;
    for (int i = 0; i < 8; ++i) data.add({rng.uniform(), rng.uniform()}, rng.normal());
    const auto model = GPModel::fit(data, 2);
    const double f_star = *std::max_element(data.outputs.begin(), data.outputs.end());
    const auto batch = lhs_unit(2, 200, rng);

    struct Row {
        double ei, sd;
        std::size_t idx;
    };
    std::vector<Row> rows;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto p = model.predict(batch[i]);
        const double sd = std::sqrt(p.variance);
        rows.push_back({expected_improvement(p.mean, sd, f_star), sd, i});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.ei != b.ei) return a.ei > b.ei;
        if (a.sd != b.sd) return a.sd > b.sd;
        return a.idx < b.idx;
    });
    const auto all = top_m_candidates(model, space2(), batch, f_star, 200);
    for (std::size_t i = 0; i < 200; ++i) REQUIRE(all[i].batch_index == rows[i].idx);
    const auto ten = top_m_candidates(model, space2(), batch, f_star, 10);
    for (std::size_t i = 0; i < 10; ++i) CHECK(ten[i].batch_index == rows[i].idx);
    for (const auto& c : ten) CHECK(c.ei >= 0.0);
}

TEST_CASE("ThetaVector batches keep the caller's vectors") {
    const auto space = space2();
    const std::vector<ThetaVector> batch{ThetaVector{{0.1, 0.01}}, ThetaVector{{0.9, 0.5}}};
    const auto top = top_m_candidates(GPModel::prior(2), space, batch, 0.0, 2);
    CHECK(top[0].theta == batch[0]);
    CHECK(top[1].theta == batch[1]);
}

TEST_CASE("candidate batch samplers") {
    Rng a(3), b(3);
    CHECK(candidate_batch(CandidateSampler::lhs, 3, 50, a) == candidate_batch(CandidateSampler::lhs, 3, 50, b));
    const auto u = candidate_batch(CandidateSampler::uniform, 3, 50, a);
    CHECK(u.size() == 50);
}
