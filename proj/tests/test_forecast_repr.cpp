#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "epifor/common.hpp"
#include "epifor/forecast.hpp"

using namespace epifor;

namespace {

/// Independent quantile oracle: type-1 inverse empirical CDF.
double sample_quantile_oracle(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const auto n = static_cast<double>(v.size());
    auto idx = static_cast<std::size_t>(std::max(1.0, std::ceil(n * p)));
    idx = std::min(idx, v.size());
    return v[idx - 1];
}

BinnedForecast random_density(rng::Engine& eng, std::size_t bins) {
    BinnedForecast d;
    double edge = rng::uniform01(eng) * 10.0;
    d.edges.push_back(edge);
    double mass = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
        edge += 0.2 + rng::uniform01(eng) * 3.0;
        d.edges.push_back(edge);
        d.probs.push_back(0.05 + rng::uniform01(eng));
        mass += d.probs.back();
    }
    for (auto& p : d.probs) p /= mass;
    return d;
}

/// Mean absolute loss of guessing v against a binned density, by fine
/// within-bin integration.
double abs_loss(const BinnedForecast& d, double v) {
    double total = 0.0;
    for (std::size_t b = 0; b < d.probs.size(); ++b) {
        const double lo = d.edges[b], hi = d.edges[b + 1];
        const long steps = 2000;
        double acc = 0.0;
        for (long i = 0; i < steps; ++i) {
            const double x = lo + (hi - lo) * (static_cast<double>(i) + 0.5) /
                                      static_cast<double>(steps);
            acc += std::abs(x - v);
        }
        total += d.probs[b] * acc / static_cast<double>(steps);
    }
    return total;
}

} // namespace

TEST_CASE("validate flags bad densities and passes good ones") {
    BinnedForecast ok{{0.0, 1.0, 2.0}, {0.5, 0.5}};
    CHECK(validate(ok).ok());

    BinnedForecast short_mass{{0.0, 1.0, 2.0}, {0.49, 0.49}};
    const auto r1 = validate(short_mass);
    REQUIRE_FALSE(r1.ok());
    CHECK(r1.violations.front().find("mass 0.98") != std::string::npos);

    BinnedForecast bad_edges{{0.0, 1.0, 1.0}, {0.5, 0.5}};
    const auto r2 = validate(bad_edges);
    REQUIRE_FALSE(r2.ok());
    CHECK(r2.violations.front() == "edges not strictly increasing");

    BinnedForecast below{{-1.0, 0.0, 1.0}, {0.25, 0.75}};
    CHECK(validate(below).ok());
    CHECK_FALSE(validate(below, /*require_nonnegative_support=*/true).ok());

    SampleForecast empty{{}};
    CHECK_FALSE(validate(empty).ok());
    SampleForecast nan{{0.0, std::nan("")}};
    CHECK_FALSE(validate(nan).ok());
    SampleForecast negative{{-1.0, 2.0}};
    CHECK(validate(negative).ok());
    CHECK_FALSE(validate(negative, true).ok());
}

TEST_CASE("point summaries: median and mean of samples") {
    SampleForecast s{{1.0, 2.0, 100.0}};
    CHECK(point_from_density(s, PointLoss::Absolute).value == 2.0);
    CHECK(point_from_density(s, PointLoss::Squared).value ==
          doctest::Approx(103.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("point summary of a single uniform bin is its midpoint") {
    BinnedForecast d{{0.0, 2.0}, {1.0}};
    CHECK(point_from_density(d, PointLoss::Squared).value == doctest::Approx(1.0));
    CHECK(point_from_density(d, PointLoss::Absolute).value == doctest::Approx(1.0));
}

TEST_CASE("even sample counts take the midpoint of the central pair") {
    SampleForecast s{{4.0, 1.0, 3.0, 2.0}};
    CHECK(point_from_density(s, PointLoss::Absolute).value == 2.5);
}

TEST_CASE("interval from a single uniform bin interpolates linearly") {
    BinnedForecast d{{0.0, 100.0}, {1.0}};
    const auto iv = interval_from_density(d, 0.1);
    CHECK(iv.alpha == 0.1);
    CHECK(iv.lower == doctest::Approx(5.0));
    CHECK(iv.upper == doctest::Approx(95.0));
}

TEST_CASE("degenerate samples give a zero-width interval") {
    SampleForecast s{{7.0, 7.0, 7.0}};
    const auto iv = interval_from_density(s, 0.42);
    CHECK(iv.lower == 7.0);
    CHECK(iv.upper == 7.0);
}

TEST_CASE("interval endpoints of samples 1..100 at alpha 0.05") {
    SampleForecast s;
    for (int i = 1; i <= 100; ++i) s.samples.push_back(i);
    const auto iv = interval_from_density(s, 0.05);
    CHECK(iv.lower == sample_quantile_oracle(s.samples, 0.025));
    CHECK(iv.upper == sample_quantile_oracle(s.samples, 0.975));
    CHECK(iv.lower == 3.0);
    CHECK(iv.upper == 98.0);
}

TEST_CASE("sample quantiles match the order-statistic oracle") {
    rng::Engine eng(77);
    for (int rep = 0; rep < 20; ++rep) {
        SampleForecast s;
        const std::size_t n = 1 + rng::below(eng, 40);
        for (std::size_t i = 0; i < n; ++i) s.samples.push_back(rng::uniform01(eng) * 50.0);
        for (double p : {0.01, 0.25, 0.5, 0.9, 0.99}) {
            CHECK(quantile(s, p) == sample_quantile_oracle(s.samples, p));
        }
    }
}

TEST_CASE("cdf of a uniform bin is linear") {
    BinnedForecast d{{0.0, 1.0}, {1.0}};
    CHECK(cdf_at(d, 0.25) == doctest::Approx(0.25));
    CHECK(cdf_at(d, -1.0) == 0.0);
    CHECK(cdf_at(d, 2.0) == 1.0);
}

TEST_CASE("cdf of samples counts the fraction at or below z") {
    SampleForecast s{{0.0, 2.0}};
    CHECK(cdf_at(s, 1.0) == 0.5);
    CHECK(cdf_at(s, -0.5) == 0.0);
    CHECK(cdf_at(s, 2.0) == 1.0);
}

TEST_CASE("cdf is non-decreasing with limits 0 and 1") {
    rng::Engine eng(11);
    for (int rep = 0; rep < 10; ++rep) {
        const auto d = random_density(eng, 1 + rng::below(eng, 6));
        double prev = cdf_at(d, d.edges.front() - 1.0);
        CHECK(prev == 0.0);
        for (double z = d.edges.front() - 0.5; z <= d.edges.back() + 0.5; z += 0.05) {
            const double cur = cdf_at(d, z);
            CHECK(cur >= prev);
            prev = cur;
        }
        CHECK(cdf_at(d, d.edges.back() + 1.0) == 1.0);
    }
}

TEST_CASE("binned quantile inverts the cdf") {
    rng::Engine eng(23);
    for (int rep = 0; rep < 10; ++rep) {
        const auto d = random_density(eng, 2 + rng::below(eng, 5));
        for (double p : {0.05, 0.3, 0.5, 0.77, 0.95}) {
            const double q = quantile(d, p);
            CHECK(cdf_at(d, q) == doctest::Approx(p).epsilon(1e-9));
        }
    }
}

TEST_CASE("absolute-loss point summary minimizes mean absolute loss") {
    rng::Engine eng(5);
    for (int rep = 0; rep < 8; ++rep) {
        const auto d = random_density(eng, 3 + rng::below(eng, 4));
        const double med = point_from_density(d, PointLoss::Absolute).value;
        const double at_median = abs_loss(d, med);
        for (double frac : {0.1, 0.3, 0.45, 0.55, 0.7, 0.9}) {
            const double v =
                d.edges.front() + frac * (d.edges.back() - d.edges.front());
            CHECK(at_median <= abs_loss(d, v) + 1e-6);
        }
    }
}

TEST_CASE("intervals are nested as alpha grows") {
    rng::Engine eng(31);
    for (int rep = 0; rep < 10; ++rep) {
        const auto d = random_density(eng, 2 + rng::below(eng, 6));
        const auto wide = interval_from_density(d, 0.05);
        const auto narrow = interval_from_density(d, 0.5);
        CHECK(wide.lower <= narrow.lower);
        CHECK(wide.upper >= narrow.upper);
    }
}

TEST_CASE("interval endpoints reject alpha outside (0,1)") {
    BinnedForecast d{{0.0, 1.0}, {1.0}};
    CHECK_THROWS_AS(interval_from_density(d, 0.0), ArgumentError);
    CHECK_THROWS_AS(interval_from_density(d, 1.0), ArgumentError);
}

TEST_CASE("bin_index uses half-open bins with the last bin closed") {
    BinnedForecast d{{0.0, 1.0, 2.0}, {0.5, 0.5}};
    CHECK(bin_index(d, 0.0) == 0);
    CHECK(bin_index(d, 1.0) == 1);
    CHECK(bin_index(d, 2.0) == 1);
    CHECK(bin_index(d, -0.1) == -1);
    CHECK(bin_index(d, 2.1) == -1);
}

TEST_CASE("density_mean weights bin midpoints by mass") {
    BinnedForecast d{{0.0, 2.0, 6.0}, {0.25, 0.75}};
    CHECK(density_mean(d) == doctest::Approx(0.25 * 1.0 + 0.75 * 4.0));
}
