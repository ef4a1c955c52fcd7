#pragma once

// Hourly weather ingestion and degree-day metrics.
//
// Degree-day convention: hourly HDD = max(0, base - T) / 24, so that summing
// the 24 hourly values of a constant-temperature day gives the familiar daily
// degree-day figure. All downstream regressions and the mean-temperature
// metric (base - 24*hdd) assume this convention.

#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "stockload/core.hpp"
#include "stockload/csv.hpp"

namespace stockload::weather {

inline constexpr double kDefaultBaseC = 18.5;  // typical thermostat setpoint, °C

enum class WeatherFormat { epw, simple_csv };

struct ZoneWeatherSeries {
    std::string zone_id;
    std::string station_id;
    int year = 0;
    std::vector<EpochSeconds> timestamps;  // local standard time, hourly
    std::vector<double> dry_bulb;          // °C

    void validate() const {
        if (timestamps.size() != dry_bulb.size()) {
            throw DataError("weather series '" + zone_id + "': timestamp/temperature length mismatch");
        }
        const std::size_t expected = hours_in_year(year);
        if (timestamps.size() != expected) {
            throw DataError("weather series '" + zone_id + "': expected "
                            + std::to_string(expected) + " hours for year "
                            + std::to_string(year) + ", got " + std::to_string(timestamps.size()));
        }
        const EpochSeconds start = civil_to_epoch(year, 1, 1, 0);
        for (std::size_t i = 0; i < timestamps.size(); ++i) {
            if (timestamps[i] != start + EpochSeconds(i) * kSecondsPerHour) {
                throw DataError("weather series '" + zone_id + "': hour " + std::to_string(i)
                                + " is not on the hourly grid (gap or duplicate)");
            }
            if (!(dry_bulb[i] >= -60.0 && dry_bulb[i] <= 60.0)) {
                throw DataError("weather series '" + zone_id + "': dry bulb "
                                + format_double(dry_bulb[i]) + " °C at "
                                + format_timestamp(timestamps[i]) + " outside [-60, 60]");
            }
        }
    }

    static std::size_t hours_in_year(int year) {
        const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
        return leap ? 8784 : 8760;
    }
};

struct PopulationWeightSet {
    std::map<std::string, double> weights;  // zone_id -> fraction, sums to 1

    void validate() const {
        double sum = 0.0;
        for (const auto& [zone, w] : weights) {
            if (w < 0.0) throw DataError("population weight for zone '" + zone + "' is negative");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw DataError("population weights sum to " + format_double(sum) + ", expected 1.0");
        }
    }
};

struct DegreeDaySeries {
    double base_temperature = kDefaultBaseC;  // °C
    std::vector<EpochSeconds> timestamps;
    std::vector<double> hdd;  // hourly heating degree days, >= 0
    std::vector<double> cdd;  // hourly cooling degree days, >= 0
};

// Mean-temperature inverse metric: base - 24*hdd. Hours with zero system HDD
// sit at the base temperature and are flagged since the metric cannot see
// cooling conditions there.
struct MeanTemperatureSeries {
    double base_temperature = kDefaultBaseC;
    std::vector<EpochSeconds> timestamps;
    std::vector<double> mean_c;
    std::vector<char> cooling_not_captured;  // 1 where hdd == 0
};

namespace detail {

inline ZoneWeatherSeries parse_epw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path.string());
    ZoneWeatherSeries s;
    s.zone_id = path.stem().string();
    std::string line;
    std::size_t lineno = 0;
    // 8 header rows: LOCATION, DESIGN CONDITIONS, TYPICAL/EXTREME PERIODS,
    // GROUND TEMPERATURES, HOLIDAYS/DST, COMMENTS 1, COMMENTS 2, DATA PERIODS.
    for (int i = 0; i < 8; ++i) {
        if (!std::getline(in, line)) {
            throw DataError(path.string() + ": truncated EPW header (expected 8 rows)");
        }
        ++lineno;
        if (i == 0) {
            const auto cells = csv::split_line(line);
            if (cells.empty() || cells[0] != "LOCATION") {
                throw DataError(path.string() + ":1: expected LOCATION header row");
            }
            if (cells.size() > 5 && !cells[5].empty()) s.station_id = cells[5];  // WMO number
            else if (cells.size() > 1) s.station_id = cells[1];
        }
    }
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto cells = csv::split_line(line);
        const std::string ctx = path.string() + ":" + std::to_string(lineno);
        if (cells.size() < 7) {
            throw DataError(ctx + ": expected at least 7 fields, got " + std::to_string(cells.size()));
        }
        const int y = int(parse_double(cells[0], ctx));
        const int mo = int(parse_double(cells[1], ctx));
        const int d = int(parse_double(cells[2], ctx));
        const int h = int(parse_double(cells[3], ctx));  // EPW hour 1..24 = hour ending
        if (h < 1 || h > 24) throw DataError(ctx + ": EPW hour field must be 1..24");
        if (first) {
            s.year = y;
            first = false;
        }
        s.timestamps.push_back(civil_to_epoch(y, mo, d, h - 1));
        s.dry_bulb.push_back(parse_double(cells[6], ctx));  // dry bulb, °C
    }
    s.validate();
    return s;
}

inline ZoneWeatherSeries parse_simple_csv(const std::filesystem::path& path) {
    const csv::Table t = csv::read_table(path);
    const std::size_t c_ts = t.column("timestamp");
    const std::size_t c_db = t.column("dry_bulb_c");
    ZoneWeatherSeries s;
    s.zone_id = path.stem().string();
    s.station_id = path.stem().string();
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        try {
            s.timestamps.push_back(parse_timestamp(t.rows[i][c_ts]));
        } catch (const DataError& e) {
            throw DataError(path.string() + ":" + std::to_string(t.line_of_row(i)) + ": " + e.what());
        }
        s.dry_bulb.push_back(t.number(i, c_db));
    }
    if (s.timestamps.empty()) throw DataError(path.string() + ": no data rows");
    s.year = epoch_to_civil(s.timestamps.front()).year;
    s.validate();
    return s;
}

}  // namespace detail

inline ZoneWeatherSeries parse_weather_file(const std::filesystem::path& path, WeatherFormat format,
                                            const std::string& zone_id = "") {
    ZoneWeatherSeries s = (format == WeatherFormat::epw) ? detail::parse_epw(path)
                                                         : detail::parse_simple_csv(path);
    if (!zone_id.empty()) s.zone_id = zone_id;
    return s;
}

// Infer format from extension: ".epw" -> epw, anything else -> simple_csv.
inline WeatherFormat format_from_path(const std::filesystem::path& path) {
    return path.extension() == ".epw" ? WeatherFormat::epw : WeatherFormat::simple_csv;
}

inline DegreeDaySeries hourly_degree_days(const ZoneWeatherSeries& series, double base = kDefaultBaseC) {
    DegreeDaySeries dd;
    dd.base_temperature = base;
    dd.timestamps = series.timestamps;
    dd.hdd.reserve(series.dry_bulb.size());
    dd.cdd.reserve(series.dry_bulb.size());
    for (double t : series.dry_bulb) {
        dd.hdd.push_back(t < base ? (base - t) / 24.0 : 0.0);
        dd.cdd.push_back(t > base ? (t - base) / 24.0 : 0.0);
    }
    return dd;
}

inline DegreeDaySeries population_weighted_dd(const std::map<std::string, DegreeDaySeries>& per_zone,
                                              const PopulationWeightSet& weights) {
    weights.validate();
    if (per_zone.empty()) throw DataError("population_weighted_dd: no zone series");
    if (per_zone.size() != weights.weights.size()) {
        throw DataError("population_weighted_dd: " + std::to_string(per_zone.size())
                        + " zone series vs " + std::to_string(weights.weights.size()) + " weights");
    }
    const DegreeDaySeries& ref = per_zone.begin()->second;
    DegreeDaySeries out;
    out.base_temperature = ref.base_temperature;
    out.timestamps = ref.timestamps;
    out.hdd.assign(ref.hdd.size(), 0.0);
    out.cdd.assign(ref.cdd.size(), 0.0);
    // std::map iteration is key-sorted, so the accumulation order (and hence
    // the floating-point result) does not depend on insertion order.
    for (const auto& [zone, dd] : per_zone) {
        const auto it = weights.weights.find(zone);
        if (it == weights.weights.end()) {
            throw DataError("population_weighted_dd: no weight for zone '" + zone + "'");
        }
        if (dd.base_temperature != ref.base_temperature) {
            throw DataError("population_weighted_dd: zone '" + zone + "' base "
                            + format_double(dd.base_temperature) + " differs from "
                            + format_double(ref.base_temperature));
        }
        if (dd.timestamps != ref.timestamps) {
            throw DataError("population_weighted_dd: zone '" + zone + "' timestamps misaligned");
        }
        const double w = it->second;
        for (std::size_t h = 0; h < out.hdd.size(); ++h) {
            out.hdd[h] += w * dd.hdd[h];
            out.cdd[h] += w * dd.cdd[h];
        }
    }
    return out;
}

inline MeanTemperatureSeries mean_temperature(const DegreeDaySeries& system_hdd) {
    MeanTemperatureSeries m;
    m.base_temperature = system_hdd.base_temperature;
    m.timestamps = system_hdd.timestamps;
    m.mean_c.reserve(system_hdd.hdd.size());
    m.cooling_not_captured.reserve(system_hdd.hdd.size());
    for (double hdd : system_hdd.hdd) {
        m.mean_c.push_back(system_hdd.base_temperature - 24.0 * hdd);
        m.cooling_not_captured.push_back(hdd == 0.0 ? 1 : 0);
    }
    return m;
}

// CSV `zone_id,population`; weights are populations normalized to sum 1.
inline PopulationWeightSet load_population_weights(const std::filesystem::path& path) {
    const csv::Table t = csv::read_table(path);
    const std::size_t c_zone = t.column("zone_id");
    const std::size_t c_pop = t.column("population");
    PopulationWeightSet w;
    double total = 0.0;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const std::string& zone = t.rows[i][c_zone];
        const double pop = t.number(i, c_pop);
        if (pop < 0.0) {
            throw DataError(path.string() + ":" + std::to_string(t.line_of_row(i))
                            + ": negative population");
        }
        if (!w.weights.emplace(zone, pop).second) {
            throw DataError(path.string() + ":" + std::to_string(t.line_of_row(i))
                            + ": duplicate zone_id '" + zone + "'");
        }
        total += pop;
    }
    if (total <= 0.0) throw DataError(path.string() + ": total population is zero");
    for (auto& [zone, v] : w.weights) v /= total;
    return w;
}

}  // namespace stockload::weather
