#pragma once

// Monthly bias calibration: per-sector multiplicative factors that scale
// modeled demand so each month's total matches the served-load record.
// February is excluded from its own fit (the event month must not calibrate
// itself away) and borrows January's factor instead.

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stockload/core.hpp"
#include "stockload/csv.hpp"
#include "stockload/stock.hpp"

namespace stockload::calibration {

struct MonthlyBiasFactors {
    stock::Sector sector = stock::Sector::residential;
    std::array<double, 13> factors{};    // index 1..12; [0] unused
    std::array<int, 13> provenance{};    // source month for each factor (2 -> 1)

    void validate() const {
        for (int m = 1; m <= 12; ++m) {
            if (!(factors[m] > 0.0)) {
                throw DataError("calibration factor for month " + std::to_string(m)
                                + " must be positive");
            }
            const int src = provenance[m];
            if (src < 1 || src > 12) throw DataError("calibration provenance out of range");
        }
        if (provenance[2] != 1) throw DataError("February must borrow January's factor");
    }
};

// factor[m] = sum(served in m) / sum(modeled in m), except factor[2] = factor[1].
inline MonthlyBiasFactors compute_factors(const std::vector<EpochSeconds>& timestamps,
                                          const std::vector<double>& modeled_mw,
                                          const std::vector<double>& served_mw,
                                          stock::Sector sector) {
    if (timestamps.size() != modeled_mw.size() || timestamps.size() != served_mw.size()) {
        throw DataError("compute_factors: series misaligned");
    }
    std::array<double, 13> modeled_sum{}, served_sum{};
    std::array<bool, 13> seen{};
    for (std::size_t h = 0; h < timestamps.size(); ++h) {
        const int m = month_of(timestamps[h]);
        modeled_sum[m] += modeled_mw[h];
        served_sum[m] += served_mw[h];
        seen[m] = true;
    }
    MonthlyBiasFactors out;
    out.sector = sector;
    for (int m = 1; m <= 12; ++m) {
        if (m == 2) continue;
        if (!seen[m]) {
            throw DataError("calibration: no hours in month " + std::to_string(m));
        }
        if (modeled_sum[m] <= 0.0) {
            throw DataError("calibration: modeled demand for month " + std::to_string(m)
                            + " sums to zero");
        }
        out.factors[m] = served_sum[m] / modeled_sum[m];
        out.provenance[m] = m;
    }
    out.factors[2] = out.factors[1];
    out.provenance[2] = 1;
    out.validate();
    return out;
}

inline std::vector<double> apply_factors(const MonthlyBiasFactors& factors,
                                         const std::vector<EpochSeconds>& timestamps,
                                         const std::vector<double>& mw) {
    factors.validate();
    if (timestamps.size() != mw.size()) throw DataError("apply_factors: series misaligned");
    std::vector<double> out;
    out.reserve(mw.size());
    for (std::size_t h = 0; h < mw.size(); ++h) {
        out.push_back(mw[h] * factors.factors[month_of(timestamps[h])]);
    }
    return out;
}

// --- served-load record -----------------------------------------------------

struct ServedLoad {
    std::vector<EpochSeconds> timestamps;
    std::vector<double> mw;
};

// CSV columns: timestamp,sector,served_mw. Rows may interleave sectors; each
// sector's rows must form a strict hourly ascending grid.
inline std::map<stock::Sector, ServedLoad> load_served_csv(const std::filesystem::path& path) {
    const csv::Table table = csv::read_table(path);
    const std::size_t t_col = table.column("timestamp");
    const std::size_t s_col = table.column("sector");
    const std::size_t v_col = table.column("served_mw");
    std::map<stock::Sector, ServedLoad> out;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const std::string where = path.string() + ":" + std::to_string(table.line_of_row(i));
        const stock::Sector sector = stock::parse_sector(row[s_col]);
        ServedLoad& series = out[sector];
        EpochSeconds t = 0;
        try {
            t = parse_timestamp(row[t_col]);
        } catch (const DataError& e) {
            throw DataError(where + ": " + e.what());
        }
        if (!series.timestamps.empty()
            && t != series.timestamps.back() + kSecondsPerHour) {
            throw DataError(where + ": served-load rows for "
                            + stock::to_string(sector) + " must be hourly and ascending");
        }
        const double mw = table.number(i, v_col);
        if (mw < 0.0) throw DataError(where + ": served_mw must be nonnegative");
        series.timestamps.push_back(t);
        series.mw.push_back(mw);
    }
    if (out.empty()) throw DataError(path.string() + ": no served-load rows");
    return out;
}

// --- JSON --------------------------------------------------------------------

inline nlohmann::json factors_to_json(const MonthlyBiasFactors& f) {
    nlohmann::json j;
    j["sector"] = stock::to_string(f.sector);
    for (int m = 1; m <= 12; ++m) {
        char key[8];
        std::snprintf(key, sizeof(key), "%02d", m);
        j["factors"][key] = f.factors[m];
        j["provenance"][key] = f.provenance[m];
    }
    return j;
}

inline MonthlyBiasFactors factors_from_json(const nlohmann::json& j) {
    MonthlyBiasFactors f;
    try {
        f.sector = stock::parse_sector(j.at("sector").get<std::string>());
        for (int m = 1; m <= 12; ++m) {
            char key[8];
            std::snprintf(key, sizeof(key), "%02d", m);
            f.factors[m] = j.at("factors").at(key).get<double>();
            f.provenance[m] = j.at("provenance").at(key).get<int>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("calibration factors: ") + e.what());
    }
    f.validate();
    return f;
}

}  // namespace stockload::calibration
