#include <doctest.h>

#include "censreg/breakdown.hpp"
#include "censreg/rng.hpp"

#include <cmath>
#include <vector>

using namespace censreg;

namespace {

CensoredSample general_position_sample(StreamRng& rng, std::size_t n,
                                       std::size_t censored) {
    std::vector<CensoredObservation> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        rows[i].covariates = {1.0, rng.normal()};
        rows[i].response = 1.5 * rows[i].covariates[1] + rng.normal();
        rows[i].event = i < censored ? 0 : 1;
    }
    rows.back().event = 1;
    return CensoredSample::from_rows(rows, true);
}

}  // namespace

TEST_CASE("q for simple regression in general position is one") {
    StreamRng rng(61);
    auto sample = general_position_sample(rng, 40, 10);
    const auto [q, exact] = compute_q(sample);
    CHECK(q == 1);
    CHECK(exact);
}

TEST_CASE("q counts shared covariate positions") {
    // three points with the same covariate value lie on one line through the
    // origin in (intercept, x) space
    std::vector<CensoredObservation> rows;
    StreamRng rng(67);
    for (int i = 0; i < 6; ++i) rows.push_back({1.0 * i, {1.0, 0.1 * i + 1.0}, 1});
    rows.push_back({0.0, {1.0, 4.0}, 1});
    rows.push_back({1.0, {1.0, 4.0}, 1});
    rows.push_back({2.0, {1.0, 4.0}, 1});
    auto sample = CensoredSample::from_rows(rows, true);
    const auto [q, exact] = compute_q(sample);
    CHECK(q == 3);
    CHECK(exact);
}

TEST_CASE("q for a single-covariate design counts zeros") {
    std::vector<CensoredObservation> rows{{1.0, {0.0}, 1},
                                          {2.0, {1.0}, 1},
                                          {3.0, {0.0}, 1},
                                          {4.0, {2.0}, 1}};
    auto sample = CensoredSample::from_rows(rows, false);
    const auto [q, exact] = compute_q(sample);
    CHECK(q == 2);
    CHECK(exact);
}

TEST_CASE("bound arithmetic reproduces the worked example") {
    StreamRng rng(71);
    auto sample = general_position_sample(rng, 100, 32);
    const auto report = breakdown_bound(sample, 0.5);
    CHECK(report.q == 1);
    CHECK(report.censored == 32);
    CHECK(report.k0 == doctest::Approx(17.0));
    CHECK(report.gamma_bound == doctest::Approx(0.17));
    CHECK(report.optimal_bound == doctest::Approx(0.175));

    // uncensored limit: n = 1000, b/a = (1 - q/n)/2 pushes the bound to one
    // half
    auto big = general_position_sample(rng, 1000, 0);
    const auto limit = breakdown_bound(big, (1.0 - 1.0 / 1000.0) / 2.0);
    CHECK(limit.gamma_bound == doctest::Approx(0.4995).epsilon(1e-10));

    CHECK_THROWS_AS(breakdown_bound(sample, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(breakdown_bound(sample, 1.0), std::invalid_argument);
}

TEST_CASE("the bound is maximized near b/a = (1 - q/n)/2 and decreases in m and q") {
    StreamRng rng(73);
    for (int rep = 0; rep < 5; ++rep) {
        const double n = 50 + 10.0 * rep;
        const double q = 1 + rep;
        const double m = 5.0 * rep;
        auto k0 = [&](double r) {
            return std::min(n * (1.0 - r) - q - m, n * r - m);
        };
        const double best_r = (1.0 - q / n) / 2.0;
        const double best = k0(best_r);
        for (double r = 0.05; r < 0.95; r += 0.01) CHECK(k0(r) <= best + 1e-9);
    }

    StreamRng rng2(79);
    auto sample = general_position_sample(rng2, 60, 10);
    const auto base = breakdown_bound(sample, 0.5);
    auto more_censored = general_position_sample(rng2, 60, 20);
    const auto worse = breakdown_bound(more_censored, 0.5);
    CHECK(worse.gamma_bound <= base.gamma_bound + 1e-12);
}

TEST_CASE("probe: zero replacements displace nothing; gross corruption moves least squares") {
    StreamRng rng(83);
    auto sample = general_position_sample(rng, 40, 10);
    SearchConfig cfg;
    cfg.n_candidates = 80;
    cfg.seed = 17;

    const auto zero = empirical_breakdown_probe(sample, EstimatorKind::ls, cfg, 0,
                                                {1e2, 1e4});
    CHECK(zero.max_displacement == doctest::Approx(0.0));

    // replacing most of the sample breaks least squares monotonically
    const auto broken = empirical_breakdown_probe(sample, EstimatorKind::ls, cfg, 30,
                                                  {1e2, 1e4, 1e6});
    REQUIRE(broken.displacement.size() == 3);
    CHECK(broken.displacement[0] < broken.displacement[1]);
    CHECK(broken.displacement[1] < broken.displacement[2]);
    CHECK(broken.displacement[2] > 1e4);
}
