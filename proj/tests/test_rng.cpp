#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "metatune/errors.hpp"
#include "metatune/rng.hpp"

using namespace metatune;

TEST_CASE("same seed gives the same stream") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a() == b());
    Rng c(43);
    Rng d(42);
    int same = 0;
    for (int i = 0; i < 100; ++i) same += c() == d();
    CHECK(same == 0);
}

TEST_CASE("derive does not advance the parent and is keyed by name and index") {
    Rng root(7);
    const auto before = root.position();
    Rng x = root.derive("agent");
    Rng y = root.derive("agent");
    Rng z = root.derive("env");
    Rng w = root.derive("agent", 1);
    CHECK(root.position() == before);
    CHECK(x() == y());
    Rng x2 = root.derive("agent");
    const auto first = x2();
    CHECK(first != z());
    CHECK(first != w());
}

TEST_CASE("uniform lies in [0,1) with mean near one half") {
    Rng r(1);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("uniform_index is unbiased over a small range") {
    Rng r(3);
    std::vector<int> counts(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) ++counts[r.uniform_index(7)];
    for (const int c : counts) CHECK(std::abs(c / double(n) - 1.0 / 7.0) < 0.01);
    CHECK_THROWS_AS(r.uniform_index(0), DomainError);
}

TEST_CASE("normal has zero mean and unit variance") {
    Rng r(5);
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        s += z;
        s2 += z * z;
    }
    const double mean = s / n;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(s2 / n - mean * mean - 1.0) < 0.02);
}

TEST_CASE("shuffle is a permutation") {
    Rng r(9);
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    shuffle(v, r);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i) CHECK(sorted[i] == i);
}

TEST_CASE("fnv1a64 known vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}
