#pragma once

// Weather-year demand transfer: fit per-hour-of-week quadratic regressions of
// heating demand on HDD and cooling demand on CDD in one year, then evaluate
// them under another year's degree days. 48 buckets per end use (weekday and
// weekend x 24 hours); the "other" end use carries per-bucket annual averages.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stockload/core.hpp"
#include "stockload/weather.hpp"

namespace stockload::transfer {

inline constexpr int kBuckets = 48;  // weekday 0..23, weekend 24..47

inline int bucket_index(EpochSeconds t) {
    const bool weekend = iso_weekday(t) >= 6;
    return (weekend ? 24 : 0) + epoch_to_civil(t).hour;
}

inline std::string bucket_key(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%s-%02d", index < 24 ? "weekday" : "weekend", index % 24);
    return buf;
}

inline int parse_bucket_key(const std::string& key) {
    const auto dash = key.find('-');
    if (dash == std::string::npos) throw DataError("bad bucket key '" + key + "'");
    const std::string klass = key.substr(0, dash);
    const int hour = int(parse_double(key.substr(dash + 1), "bucket key '" + key + "'"));
    if ((klass != "weekday" && klass != "weekend") || hour < 0 || hour > 23) {
        throw DataError("bad bucket key '" + key + "'");
    }
    return (klass == "weekend" ? 24 : 0) + hour;
}

struct QuadFit {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
    int degree = 2;  // 2 quadratic, 1 linear, 0 constant (degraded fits)
    double x_min = 0.0, x_max = 0.0;  // regressor range seen during fitting

    double evaluate(double x) const { return std::max(0.0, c0 + c1 * x + c2 * x * x); }
};

struct HourOfWeekRegressionSet {
    std::array<QuadFit, kBuckets> heating;  // regressor: hourly HDD
    std::array<QuadFit, kBuckets> cooling;  // regressor: hourly CDD
    std::array<double, kBuckets> other_mw{};  // per-bucket annual averages
    std::vector<std::string> warnings;      // degraded-fit records

    void validate() const {
        for (double v : other_mw) {
            if (v < 0.0) throw DataError("regression set: negative 'other' average");
        }
        for (const auto* fits : {&heating, &cooling}) {
            for (const auto& f : *fits) {
                if (f.degree < 0 || f.degree > 2) throw DataError("regression degree out of range");
                if (f.x_min > f.x_max) throw DataError("regression fit range inverted");
            }
        }
    }
};

namespace detail {

// Gaussian elimination with partial pivoting on the (degree+1)-sized normal
// equations. Returns false when the system is numerically singular.
inline bool solve_normal_equations(int degree, const double sx[5], const double sxy[3],
                                   double coeff[3]) {
    const int n = degree + 1;
    double a[3][4];
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) a[r][c] = sx[r + c];
        a[r][n] = sxy[r];
    }
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (std::abs(a[pivot][col]) < 1e-12) return false;
        if (pivot != col) {
            for (int c = 0; c <= n; ++c) std::swap(a[pivot][c], a[col][c]);
        }
        for (int r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c <= n; ++c) a[r][c] -= f * a[col][c];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double acc = a[r][n];
        for (int c = r + 1; c < n; ++c) acc -= a[r][c] * coeff[c];
        coeff[r] = acc / a[r][r];
    }
    for (int r = n; r < 3; ++r) coeff[r] = 0.0;
    return true;
}

inline std::size_t count_distinct(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    return std::unique(xs.begin(), xs.end()) - xs.begin();
}

inline QuadFit fit_bucket(const std::vector<double>& x, const std::vector<double>& y,
                          const std::string& label, std::vector<std::string>& warnings) {
    if (x.empty()) throw DataError("transfer fit: empty bucket " + label);
    QuadFit fit;
    fit.x_min = *std::min_element(x.begin(), x.end());
    fit.x_max = *std::max_element(x.begin(), x.end());
    const std::size_t distinct = count_distinct(x);
    int degree = distinct >= 3 ? 2 : distinct == 2 ? 1 : 0;
    if (degree < 2) {
        warnings.push_back(label + ": only " + std::to_string(distinct)
                           + " distinct regressor values, degraded to degree "
                           + std::to_string(degree));
    }
    double sx[5] = {0, 0, 0, 0, 0};
    double sxy[3] = {0, 0, 0};
    for (std::size_t i = 0; i < x.size(); ++i) {
        double p = 1.0;
        for (int k = 0; k <= 4; ++k) {
            sx[k] += p;
            if (k <= 2) sxy[k] += p * y[i];
            p *= x[i];
        }
    }
    double coeff[3];
    while (degree > 0 && !solve_normal_equations(degree, sx, sxy, coeff)) {
        --degree;
        warnings.push_back(label + ": singular normal equations, degraded to degree "
                           + std::to_string(degree));
    }
    if (degree == 0) {
        coeff[0] = sxy[0] / sx[0];  // plain mean
        coeff[1] = coeff[2] = 0.0;
    }
    fit.degree = degree;
    fit.c0 = coeff[0];
    fit.c1 = coeff[1];
    fit.c2 = coeff[2];
    return fit;
}

}  // namespace detail

// Fit heating on HDD and cooling on CDD per bucket; "other" keeps bucket
// means. Day classes come from the degree-day series timestamps.
inline HourOfWeekRegressionSet fit_transfer(const std::vector<double>& heating_mw,
                                            const std::vector<double>& cooling_mw,
                                            const std::vector<double>& other_mw,
                                            const weather::DegreeDaySeries& dd) {
    const std::size_t n = dd.timestamps.size();
    if (heating_mw.size() != n || cooling_mw.size() != n || other_mw.size() != n) {
        throw DataError("fit_transfer: demand series misaligned with degree days");
    }
    std::array<std::vector<double>, kBuckets> hx, hy, cx, cy, ov;
    for (std::size_t h = 0; h < n; ++h) {
        const int b = bucket_index(dd.timestamps[h]);
        hx[b].push_back(dd.hdd[h]);
        hy[b].push_back(heating_mw[h]);
        cx[b].push_back(dd.cdd[h]);
        cy[b].push_back(cooling_mw[h]);
        ov[b].push_back(other_mw[h]);
    }
    HourOfWeekRegressionSet reg;
    for (int b = 0; b < kBuckets; ++b) {
        reg.heating[b] = detail::fit_bucket(hx[b], hy[b], "heating " + bucket_key(b),
                                            reg.warnings);
        reg.cooling[b] = detail::fit_bucket(cx[b], cy[b], "cooling " + bucket_key(b),
                                            reg.warnings);
        if (ov[b].empty()) throw DataError("fit_transfer: empty bucket " + bucket_key(b));
        double sum = 0.0;
        for (double v : ov[b]) sum += v;
        reg.other_mw[b] = sum / double(ov[b].size());
    }
    reg.validate();
    return reg;
}

struct TransferredDemand {
    std::vector<double> heating_mw;
    std::vector<double> cooling_mw;
    std::vector<double> other_mw;
    std::vector<char> extrapolated;  // 1 where any regressor left its fitted range
};

inline TransferredDemand apply_transfer(const HourOfWeekRegressionSet& reg,
                                        const weather::DegreeDaySeries& dd) {
    reg.validate();
    TransferredDemand out;
    const std::size_t n = dd.timestamps.size();
    out.heating_mw.reserve(n);
    out.cooling_mw.reserve(n);
    out.other_mw.reserve(n);
    out.extrapolated.reserve(n);
    for (std::size_t h = 0; h < n; ++h) {
        const int b = bucket_index(dd.timestamps[h]);
        const QuadFit& hf = reg.heating[b];
        const QuadFit& cf = reg.cooling[b];
        out.heating_mw.push_back(hf.evaluate(dd.hdd[h]));
        out.cooling_mw.push_back(cf.evaluate(dd.cdd[h]));
        out.other_mw.push_back(reg.other_mw[b]);
        const bool outside = dd.hdd[h] < hf.x_min || dd.hdd[h] > hf.x_max
                             || dd.cdd[h] < cf.x_min || dd.cdd[h] > cf.x_max;
        out.extrapolated.push_back(outside ? 1 : 0);
    }
    return out;
}

// --- JSON -----------------------------------------------------------------

inline nlohmann::json regression_to_json(const HourOfWeekRegressionSet& reg) {
    nlohmann::json j;
    auto dump_fits = [](const std::array<QuadFit, kBuckets>& fits) {
        nlohmann::json out;
        for (int b = 0; b < kBuckets; ++b) {
            const QuadFit& f = fits[b];
            out[bucket_key(b)] = {{"coefficients", {f.c0, f.c1, f.c2}},
                                  {"degree", f.degree},
                                  {"fit_range", {f.x_min, f.x_max}}};
        }
        return out;
    };
    j["heating"] = dump_fits(reg.heating);
    j["cooling"] = dump_fits(reg.cooling);
    for (int b = 0; b < kBuckets; ++b) j["other"][bucket_key(b)] = reg.other_mw[b];
    j["warnings"] = reg.warnings;
    return j;
}

inline HourOfWeekRegressionSet regression_from_json(const nlohmann::json& j) {
    HourOfWeekRegressionSet reg;
    try {
        auto read_fits = [](const nlohmann::json& src, std::array<QuadFit, kBuckets>& fits) {
            std::array<bool, kBuckets> seen{};
            for (const auto& [key, val] : src.items()) {
                const int b = parse_bucket_key(key);
                QuadFit f;
                f.c0 = val.at("coefficients").at(0).get<double>();
                f.c1 = val.at("coefficients").at(1).get<double>();
                f.c2 = val.at("coefficients").at(2).get<double>();
                f.degree = val.at("degree").get<int>();
                f.x_min = val.at("fit_range").at(0).get<double>();
                f.x_max = val.at("fit_range").at(1).get<double>();
                fits[b] = f;
                seen[b] = true;
            }
            for (int b = 0; b < kBuckets; ++b) {
                if (!seen[b]) throw DataError("regression set missing bucket " + bucket_key(b));
            }
        };
        read_fits(j.at("heating"), reg.heating);
        read_fits(j.at("cooling"), reg.cooling);
        std::array<bool, kBuckets> seen{};
        for (const auto& [key, val] : j.at("other").items()) {
            const int b = parse_bucket_key(key);
            reg.other_mw[b] = val.get<double>();
            seen[b] = true;
        }
        for (int b = 0; b < kBuckets; ++b) {
            if (!seen[b]) throw DataError("regression set missing 'other' bucket " + bucket_key(b));
        }
        for (const auto& w : j.value("warnings", nlohmann::json::array())) {
            reg.warnings.push_back(w.get<std::string>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("regression set: ") + e.what());
    }
    reg.validate();
    return reg;
}

inline void save_regression(const HourOfWeekRegressionSet& reg,
                            const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open file for writing: " + path.string());
    out << regression_to_json(reg).dump(2) << '\n';
}

inline HourOfWeekRegressionSet load_regression(const std::filesystem::path& path) {
    try {
        return regression_from_json(nlohmann::json::parse(read_file_to_string(path)));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

}  // namespace stockload::transfer
