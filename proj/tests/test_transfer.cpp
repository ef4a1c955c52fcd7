#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "stockload/transfer.hpp"
#include "test_support.hpp"

using namespace stockload;
using test_support::make_series;
using test_support::scratch_dir;
using test_support::seasonal_temp;

namespace {

weather::DegreeDaySeries year_dd(int year, const std::function<double(std::size_t)>& temp) {
    return weather::hourly_degree_days(make_series("z", year, temp), weather::kDefaultBaseC);
}

// Independent oracle: least squares through Cramer's rule on the normal
// equations, a different solve path than the library's elimination.
struct OracleFit {
    double c0, c1, c2;
};

OracleFit cramer_quadratic(const std::vector<double>& x, const std::vector<double>& y) {
    double s[5] = {0, 0, 0, 0, 0};
    double t[3] = {0, 0, 0};
    for (std::size_t i = 0; i < x.size(); ++i) {
        double p = 1.0;
        for (int k = 0; k <= 4; ++k) {
            s[k] += p;
            if (k <= 2) t[k] += p * y[i];
            p *= x[i];
        }
    }
    auto det3 = [](double a, double b, double c, double d, double e, double f, double g,
                   double h, double i) {
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
    };
    const double d = det3(s[0], s[1], s[2], s[1], s[2], s[3], s[2], s[3], s[4]);
    REQUIRE(std::abs(d) > 1e-12);
    const double d0 = det3(t[0], s[1], s[2], t[1], s[2], s[3], t[2], s[3], s[4]);
    const double d1 = det3(s[0], t[0], s[2], s[1], t[1], s[3], s[2], t[2], s[4]);
    const double d2 = det3(s[0], s[1], t[0], s[1], s[2], t[1], s[2], s[3], t[2]);
    return {d0 / d, d1 / d, d2 / d};
}

double rss(const std::vector<double>& x, const std::vector<double>& y,
           const transfer::QuadFit& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.c0 + f.c1 * x[i] + f.c2 * x[i] * x[i]);
        acc += r * r;
    }
    return acc;
}

// Demand built from a known per-bucket polynomial of the degree days, so fits
// have an analytic answer.
struct SynthYear {
    weather::DegreeDaySeries dd;
    std::vector<double> heating, cooling, other;
};

SynthYear polynomial_year(int year, double a0, double a1, double a2) {
    SynthYear s;
    s.dd = year_dd(year, seasonal_temp);
    for (std::size_t h = 0; h < s.dd.timestamps.size(); ++h) {
        const double x = s.dd.hdd[h];
        const double c = s.dd.cdd[h];
        s.heating.push_back(a0 + a1 * x + a2 * x * x);
        s.cooling.push_back(1.0 + 2.0 * c);
        s.other.push_back(transfer::bucket_index(s.dd.timestamps[h]) < 24 ? 10.0 : 7.0);
    }
    return s;
}

}  // namespace

TEST_CASE("bucket index splits hour of week into 48 day-class slots") {
    // 2021-02-15 is a Monday, 2021-02-13 a Saturday.
    CHECK(transfer::bucket_index(civil_to_epoch(2021, 2, 15, 0)) == 0);
    CHECK(transfer::bucket_index(civil_to_epoch(2021, 2, 15, 23)) == 23);
    CHECK(transfer::bucket_index(civil_to_epoch(2021, 2, 13, 0)) == 24);
    CHECK(transfer::bucket_index(civil_to_epoch(2021, 2, 14, 11)) == 35);
    CHECK(transfer::bucket_key(0) == "weekday-00");
    CHECK(transfer::bucket_key(47) == "weekend-23");
    CHECK(transfer::parse_bucket_key("weekend-05") == 29);
    CHECK_THROWS_AS(transfer::parse_bucket_key("midweek-05"), DataError);
    CHECK_THROWS_AS(transfer::parse_bucket_key("weekday-24"), DataError);
}

TEST_CASE("quadratic coefficients are recovered from exact polynomial data") {
    const auto s = polynomial_year(2021, 2.0, 3.0, 0.5);
    const auto reg = transfer::fit_transfer(s.heating, s.cooling, s.other, s.dd);
    for (int b = 0; b < transfer::kBuckets; ++b) {
        CAPTURE(b);
        CHECK(reg.heating[b].degree == 2);
        CHECK_THAT(reg.heating[b].c0, Catch::Matchers::WithinAbs(2.0, 1e-6));
        CHECK_THAT(reg.heating[b].c1, Catch::Matchers::WithinAbs(3.0, 1e-6));
        CHECK_THAT(reg.heating[b].c2, Catch::Matchers::WithinAbs(0.5, 1e-6));
        // Linear cooling data still solves exactly under the quadratic model.
        CHECK_THAT(reg.cooling[b].c0, Catch::Matchers::WithinAbs(1.0, 1e-6));
        CHECK_THAT(reg.cooling[b].c1, Catch::Matchers::WithinAbs(2.0, 1e-6));
    }
    CHECK(reg.warnings.empty());
    // "other" keeps the per-bucket averages.
    CHECK_THAT(reg.other_mw[3], Catch::Matchers::WithinAbs(10.0, 1e-12));
    CHECK_THAT(reg.other_mw[27], Catch::Matchers::WithinAbs(7.0, 1e-12));
}

TEST_CASE("fitted coefficients match a brute-force normal-equations oracle") {
    auto s = polynomial_year(2021, 5.0, 1.0, 0.2);
    std::mt19937_64 rng(77);
    std::normal_distribution<double> noise(0.0, 0.4);
    for (auto& v : s.heating) v = std::max(0.0, v + noise(rng));
    const auto reg = transfer::fit_transfer(s.heating, s.cooling, s.other, s.dd);

    // Rebuild each bucket's sample and solve independently.
    std::array<std::vector<double>, transfer::kBuckets> xs, ys;
    for (std::size_t h = 0; h < s.dd.timestamps.size(); ++h) {
        const int b = transfer::bucket_index(s.dd.timestamps[h]);
        xs[b].push_back(s.dd.hdd[h]);
        ys[b].push_back(s.heating[h]);
    }
    for (int b = 0; b < transfer::kBuckets; ++b) {
        CAPTURE(b);
        const auto oracle = cramer_quadratic(xs[b], ys[b]);
        const double scale = std::max({1.0, std::abs(oracle.c0), std::abs(oracle.c1),
                                       std::abs(oracle.c2)});
        CHECK(std::abs(reg.heating[b].c0 - oracle.c0) / scale < 1e-6);
        CHECK(std::abs(reg.heating[b].c1 - oracle.c1) / scale < 1e-6);
        CHECK(std::abs(reg.heating[b].c2 - oracle.c2) / scale < 1e-6);
        // Fit range spans the observed regressors.
        CHECK(reg.heating[b].x_min == *std::min_element(xs[b].begin(), xs[b].end()));
        CHECK(reg.heating[b].x_max == *std::max_element(xs[b].begin(), xs[b].end()));
    }
}

TEST_CASE("fit residuals never exceed the best constant fit") {
    auto s = polynomial_year(2021, 3.0, 2.0, 0.1);
    std::mt19937_64 rng(911);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (auto& v : s.heating) v = std::max(0.0, v + noise(rng));
    const auto reg = transfer::fit_transfer(s.heating, s.cooling, s.other, s.dd);

    std::array<std::vector<double>, transfer::kBuckets> xs, ys;
    for (std::size_t h = 0; h < s.dd.timestamps.size(); ++h) {
        const int b = transfer::bucket_index(s.dd.timestamps[h]);
        xs[b].push_back(s.dd.hdd[h]);
        ys[b].push_back(s.heating[h]);
    }
    for (int b = 0; b < transfer::kBuckets; ++b) {
        CAPTURE(b);
        double mean = 0.0;
        for (double v : ys[b]) mean += v;
        mean /= double(ys[b].size());
        transfer::QuadFit constant;
        constant.c0 = mean;
        constant.c1 = constant.c2 = 0.0;
        CHECK(rss(xs[b], ys[b], reg.heating[b]) <= rss(xs[b], ys[b], constant) + 1e-9);
    }
}

TEST_CASE("constant demand fits to the constant with zero slope and curvature") {
    auto s = polynomial_year(2021, 0.0, 0.0, 0.0);
    for (auto& v : s.heating) v = 42.0;
    const auto reg = transfer::fit_transfer(s.heating, s.cooling, s.other, s.dd);
    for (int b = 0; b < transfer::kBuckets; ++b) {
        CAPTURE(b);
        CHECK_THAT(reg.heating[b].c0, Catch::Matchers::WithinAbs(42.0, 1e-6));
        CHECK_THAT(reg.heating[b].c1, Catch::Matchers::WithinAbs(0.0, 1e-6));
        CHECK_THAT(reg.heating[b].c2, Catch::Matchers::WithinAbs(0.0, 1e-6));
    }
}

TEST_CASE("degenerate regressors fall back to lower degree with a warning") {
    SECTION("single distinct value gives a constant fit") {
        // Flat 25 C: hdd is identically zero, cdd identically (25-18.5)/24.
        const auto dd = year_dd(2021, [](std::size_t) { return 25.0; });
        std::vector<double> heating(dd.timestamps.size(), 6.0);
        std::vector<double> cooling(dd.timestamps.size(), 9.0);
        std::vector<double> other(dd.timestamps.size(), 1.0);
        const auto reg = transfer::fit_transfer(heating, cooling, other, dd);
        CHECK(reg.heating[0].degree == 0);
        CHECK_THAT(reg.heating[0].c0, Catch::Matchers::WithinAbs(6.0, 1e-12));
        CHECK(reg.cooling[0].degree == 0);
        CHECK_THAT(reg.cooling[0].c0, Catch::Matchers::WithinAbs(9.0, 1e-12));
        CHECK_FALSE(reg.warnings.empty());
        CHECK_THAT(reg.warnings.front(), Catch::Matchers::ContainsSubstring("distinct"));
    }
    SECTION("two distinct values give a linear fit through both") {
        // Alternate 10 C / 14 C by day so every bucket sees exactly two hdd values.
        const auto dd = year_dd(2021, [](std::size_t h) { return (h / 24) % 2 ? 10.0 : 14.0; });
        std::vector<double> heating, cooling(dd.timestamps.size(), 0.0),
            other(dd.timestamps.size(), 0.0);
        for (double x : dd.hdd) heating.push_back(5.0 + 2.0 * x);
        const auto reg = transfer::fit_transfer(heating, cooling, other, dd);
        CHECK(reg.heating[0].degree == 1);
        CHECK_THAT(reg.heating[0].c0, Catch::Matchers::WithinAbs(5.0, 1e-9));
        CHECK_THAT(reg.heating[0].c1, Catch::Matchers::WithinAbs(2.0, 1e-9));
        CHECK_THAT(reg.heating[0].c2, Catch::Matchers::WithinAbs(0.0, 1e-12));
        CHECK_FALSE(reg.warnings.empty());
    }
}

TEST_CASE("application clamps at zero and flags extrapolation") {
    const auto s = polynomial_year(2021, 2.0, 3.0, 0.5);
    auto reg = transfer::fit_transfer(s.heating, s.cooling, s.other, s.dd);

    SECTION("zero heating degree days evaluate to max(0, c0)") {
        reg.heating[0].c0 = -4.0;  // force a negative intercept
        reg.heating[0].x_min = 0.0;
        weather::DegreeDaySeries dd;
        dd.base_temperature = weather::kDefaultBaseC;
        dd.timestamps = {civil_to_epoch(2021, 2, 15, 0)};  // Monday 00:00 -> bucket 0
        dd.hdd = {0.0};
        dd.cdd = {0.0};
        const auto out = transfer::apply_transfer(reg, dd);
        CHECK(out.heating_mw[0] == 0.0);
        CHECK(out.heating_mw[0] == std::max(0.0, reg.heating[0].c0));
    }

    SECTION("regressors outside the fitted range are evaluated but flagged") {
        weather::DegreeDaySeries dd;
        dd.base_temperature = weather::kDefaultBaseC;
        const double big = reg.heating[0].x_max + 0.5;
        dd.timestamps = {civil_to_epoch(2021, 2, 15, 0), civil_to_epoch(2021, 2, 16, 0)};
        dd.hdd = {big, reg.heating[0].x_max};
        dd.cdd = {0.0, 0.0};
        const auto out = transfer::apply_transfer(reg, dd);
        CHECK(out.extrapolated[0] == 1);
        CHECK_THAT(out.heating_mw[0],
                   Catch::Matchers::WithinRel(2.0 + 3.0 * big + 0.5 * big * big, 1e-9));
    }

    SECTION("all outputs are nonnegative under a random application year") {
        const auto dd = year_dd(2019, [](std::size_t h) { return seasonal_temp(h) - 6.0; });
        const auto out = transfer::apply_transfer(reg, dd);
        for (std::size_t h = 0; h < out.heating_mw.size(); ++h) {
            REQUIRE(out.heating_mw[h] >= 0.0);
            REQUIRE(out.cooling_mw[h] >= 0.0);
            REQUIRE(out.other_mw[h] >= 0.0);
        }
    }
}

TEST_CASE("same-year application reproduces the fitted values") {
    auto s = polynomial_year(2021, 4.0, 2.0, 0.3);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0.0, 0.5);
    for (auto& v : s.heating) v = std::max(0.0, v + noise(rng));
    const auto reg = transfer::fit_transfer(s.heating, s.cooling, s.other, s.dd);
    const auto out = transfer::apply_transfer(reg, s.dd);
    for (std::size_t h = 0; h < s.dd.timestamps.size(); ++h) {
        const int b = transfer::bucket_index(s.dd.timestamps[h]);
        const transfer::QuadFit& f = reg.heating[b];
        const double x = s.dd.hdd[h];
        const double fitted = std::max(0.0, f.c0 + f.c1 * x + f.c2 * x * x);
        REQUIRE_THAT(out.heating_mw[h], Catch::Matchers::WithinAbs(fitted, 1e-9));
        // Fitting-year regressors are inside the fit range by construction.
        REQUIRE(out.extrapolated[h] == 0);
    }
}

TEST_CASE("applying the same regression twice is idempotent") {
    const auto s = polynomial_year(2021, 2.0, 3.0, 0.5);
    const auto reg = transfer::fit_transfer(s.heating, s.cooling, s.other, s.dd);
    const auto dd2 = year_dd(2018, [](std::size_t h) { return seasonal_temp(h) + 1.5; });
    const auto a = transfer::apply_transfer(reg, dd2);
    const auto b = transfer::apply_transfer(reg, dd2);
    CHECK(a.heating_mw == b.heating_mw);
    CHECK(a.cooling_mw == b.cooling_mw);
    CHECK(a.other_mw == b.other_mw);
    CHECK(a.extrapolated == b.extrapolated);
}

TEST_CASE("misaligned demand series are rejected") {
    const auto s = polynomial_year(2021, 2.0, 3.0, 0.5);
    auto heating = s.heating;
    heating.pop_back();
    CHECK_THROWS_AS(transfer::fit_transfer(heating, s.cooling, s.other, s.dd), DataError);
}

TEST_CASE("regression sets survive a JSON round trip") {
    const auto s = polynomial_year(2021, 2.0, 3.0, 0.5);
    auto reg = transfer::fit_transfer(s.heating, s.cooling, s.other, s.dd);
    reg.warnings.push_back("synthetic warning");
    const auto dir = scratch_dir("transfer");
    transfer::save_regression(reg, dir / "reg.json");
    const auto loaded = transfer::load_regression(dir / "reg.json");
    for (int b = 0; b < transfer::kBuckets; ++b) {
        REQUIRE(loaded.heating[b].c0 == reg.heating[b].c0);
        REQUIRE(loaded.heating[b].c1 == reg.heating[b].c1);
        REQUIRE(loaded.heating[b].c2 == reg.heating[b].c2);
        REQUIRE(loaded.heating[b].degree == reg.heating[b].degree);
        REQUIRE(loaded.heating[b].x_min == reg.heating[b].x_min);
        REQUIRE(loaded.heating[b].x_max == reg.heating[b].x_max);
        REQUIRE(loaded.cooling[b].c0 == reg.cooling[b].c0);
        REQUIRE(loaded.other_mw[b] == reg.other_mw[b]);
    }
    CHECK(loaded.warnings == reg.warnings);

    SECTION("missing buckets are rejected") {
        auto j = transfer::regression_to_json(reg);
        j["heating"].erase("weekday-07");
        CHECK_THROWS_AS(transfer::regression_from_json(j), DataError);
    }
}
