#pragma once

// Grid-side analytics: sector decomposition of served load, scenario demand
// composition, demand estimation behind load shed, shortfall reports, daily
// peak seasonality, and temperature scatter data.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stockload/core.hpp"
#include "stockload/csv.hpp"

namespace stockload::grid {

struct GridSeries {
    std::vector<EpochSeconds> timestamps;
    std::vector<double> served_mw;
    std::vector<double> available_generation_mw;
    std::vector<double> requested_shed_mw;
    // ERCOT's estimate of load that could not be served; present only for some
    // hours. estimated load without shed = served + unserved estimate.
    std::vector<double> estimated_unserved_mw;
    std::vector<char> has_unserved_estimate;

    std::size_t hours() const { return timestamps.size(); }

    bool shed_requested(std::size_t h) const { return requested_shed_mw[h] > 0.0; }

    double estimated_load_without_shed(std::size_t h) const {
        if (!has_unserved_estimate[h]) {
            throw DataError("no unserved-load estimate at "
                            + format_timestamp(timestamps[h]));
        }
        return served_mw[h] + estimated_unserved_mw[h];
    }

    void validate() const {
        const std::size_t n = timestamps.size();
        if (n == 0) throw DataError("grid series is empty");
        if (served_mw.size() != n || available_generation_mw.size() != n
            || requested_shed_mw.size() != n || estimated_unserved_mw.size() != n
            || has_unserved_estimate.size() != n) {
            throw DataError("grid series columns misaligned");
        }
        for (std::size_t h = 0; h < n; ++h) {
            if (h > 0 && timestamps[h] != timestamps[h - 1] + kSecondsPerHour) {
                throw DataError("grid series must be hourly and ascending at "
                                + format_timestamp(timestamps[h]));
            }
            if (served_mw[h] < 0.0 || available_generation_mw[h] < 0.0
                || requested_shed_mw[h] < 0.0
                || (has_unserved_estimate[h] && estimated_unserved_mw[h] < 0.0)) {
                throw DataError("grid series has a negative value at "
                                + format_timestamp(timestamps[h]));
            }
        }
    }
};

struct SectoralFractions {
    std::vector<EpochSeconds> timestamps;
    std::vector<double> residential;
    std::vector<double> commercial;
    std::vector<double> industrial;

    void validate() const {
        const std::size_t n = timestamps.size();
        if (residential.size() != n || commercial.size() != n || industrial.size() != n) {
            throw DataError("sector fractions misaligned");
        }
        for (std::size_t h = 0; h < n; ++h) {
            const double r = residential[h], c = commercial[h], i = industrial[h];
            if (r < 0 || r > 1 || c < 0 || c > 1 || i < 0 || i > 1) {
                throw DataError("sector fraction out of [0,1] at "
                                + format_timestamp(timestamps[h]));
            }
            if (std::abs(r + c + i - 1.0) > 1e-9) {
                throw DataError("sector fractions do not sum to 1 at "
                                + format_timestamp(timestamps[h]));
            }
        }
    }
};

struct SectorSeries {
    std::vector<double> residential_mw;
    std::vector<double> commercial_mw;
    std::vector<double> industrial_mw;
};

// Residential and commercial take fraction * served; industrial takes the
// remainder so the three add back to served load bit-for-bit.
inline SectorSeries decompose_sectors(const GridSeries& grid,
                                      const SectoralFractions& fractions) {
    grid.validate();
    fractions.validate();
    if (fractions.timestamps != grid.timestamps) {
        throw DataError("sector fractions do not cover the grid series hours");
    }
    SectorSeries out;
    const std::size_t n = grid.hours();
    out.residential_mw.reserve(n);
    out.commercial_mw.reserve(n);
    out.industrial_mw.reserve(n);
    for (std::size_t h = 0; h < n; ++h) {
        const double served = grid.served_mw[h];
        const double res = fractions.residential[h] * served;
        const double com = fractions.commercial[h] * served;
        // The remainder re-rounds when summed back; nudge it by single ulps
        // (at most one step in practice) until res + com + ind == served
        // bit-for-bit.
        const double partial = res + com;
        double ind = served - partial;
        while (partial + ind > served) {
            ind = std::nextafter(ind, -std::numeric_limits<double>::infinity());
        }
        while (partial + ind < served) {
            ind = std::nextafter(ind, std::numeric_limits<double>::infinity());
        }
        out.residential_mw.push_back(res);
        out.commercial_mw.push_back(com);
        out.industrial_mw.push_back(ind);
    }
    return out;
}

inline std::vector<double> compose_demand(const std::vector<double>& res_mw,
                                          const std::vector<double>& com_mw,
                                          const std::vector<double>& industrial_mw) {
    if (res_mw.size() != com_mw.size() || res_mw.size() != industrial_mw.size()) {
        throw DataError("compose_demand: series misaligned");
    }
    std::vector<double> out;
    out.reserve(res_mw.size());
    for (std::size_t h = 0; h < res_mw.size(); ++h) {
        out.push_back(res_mw[h] + com_mw[h] + industrial_mw[h]);
    }
    return out;
}

// Demand is the unserved-corrected estimate during shed hours, served load
// otherwise. A shed hour without an estimate is an input defect.
inline std::vector<double> ercot_estimated_demand(const GridSeries& grid) {
    grid.validate();
    std::vector<double> out;
    out.reserve(grid.hours());
    for (std::size_t h = 0; h < grid.hours(); ++h) {
        out.push_back(grid.shed_requested(h) ? grid.estimated_load_without_shed(h)
                                             : grid.served_mw[h]);
    }
    return out;
}

struct HourWindow {
    EpochSeconds begin = 0;  // first hour, inclusive
    EpochSeconds end = 0;    // last hour, inclusive
};

struct ShortfallReport {
    std::string scenario;
    std::size_t shortfall_hours = 0;
    double peak_mw = 0.0;
    double peak_pct_of_demand = 0.0;  // fraction in [0,1], at the peak hour
    double total_gwh = 0.0;
    EpochSeconds peak_hour = 0;  // meaningful when shortfall_hours > 0
};

// Shortfall = max(0, demand - available generation), counted only in hours
// where shed was requested, restricted to the window.
inline ShortfallReport shortfall(const std::string& scenario,
                                 const std::vector<double>& demand_mw,
                                 const GridSeries& grid, const HourWindow& window) {
    grid.validate();
    if (demand_mw.size() != grid.hours()) throw DataError("shortfall: demand misaligned");
    if (window.begin > window.end) throw DataError("shortfall: window is empty");
    ShortfallReport report;
    report.scenario = scenario;
    bool any_hour = false;
    double total_mwh = 0.0;
    for (std::size_t h = 0; h < grid.hours(); ++h) {
        const EpochSeconds t = grid.timestamps[h];
        if (t < window.begin || t > window.end) continue;
        any_hour = true;
        if (!grid.shed_requested(h)) continue;
        const double gap = demand_mw[h] - grid.available_generation_mw[h];
        if (gap <= 0.0) continue;
        ++report.shortfall_hours;
        total_mwh += gap;
        if (gap > report.peak_mw) {
            report.peak_mw = gap;
            report.peak_hour = t;
            report.peak_pct_of_demand = demand_mw[h] > 0.0 ? gap / demand_mw[h] : 0.0;
        }
    }
    if (!any_hour) throw DataError("shortfall: window outside the grid series");
    report.total_gwh = total_mwh / 1000.0;
    return report;
}

// Reference row: ERCOT's own requested shed treated as the shortfall, with
// the percent taken against estimated demand at the peak-shed hour.
inline ShortfallReport requested_shed_report(const GridSeries& grid,
                                             const HourWindow& window) {
    grid.validate();
    if (window.begin > window.end) throw DataError("requested shed: window is empty");
    ShortfallReport report;
    report.scenario = "requested_shed";
    bool any_hour = false;
    double total_mwh = 0.0;
    for (std::size_t h = 0; h < grid.hours(); ++h) {
        const EpochSeconds t = grid.timestamps[h];
        if (t < window.begin || t > window.end) continue;
        any_hour = true;
        const double shed = grid.requested_shed_mw[h];
        if (shed <= 0.0) continue;
        ++report.shortfall_hours;
        total_mwh += shed;
        if (shed > report.peak_mw) {
            report.peak_mw = shed;
            report.peak_hour = t;
            const double demand = grid.estimated_load_without_shed(h);
            report.peak_pct_of_demand = demand > 0.0 ? shed / demand : 0.0;
        }
    }
    if (!any_hour) throw DataError("requested shed: window outside the grid series");
    report.total_gwh = total_mwh / 1000.0;
    return report;
}

// First and last hour with requested shed; nullopt when shed never happens.
inline std::optional<HourWindow> shed_event_window(const GridSeries& grid) {
    grid.validate();
    std::optional<HourWindow> window;
    for (std::size_t h = 0; h < grid.hours(); ++h) {
        if (!grid.shed_requested(h)) continue;
        if (!window) window = HourWindow{grid.timestamps[h], grid.timestamps[h]};
        window->end = grid.timestamps[h];
    }
    return window;
}

inline nlohmann::json shortfall_to_json(const ShortfallReport& r) {
    nlohmann::json j;
    j["scenario"] = r.scenario;
    j["shortfall_hours"] = r.shortfall_hours;
    j["peak_mw"] = r.peak_mw;
    j["peak_pct_of_demand"] = r.peak_pct_of_demand;
    j["total_gwh"] = r.total_gwh;
    j["peak_hour"] = r.shortfall_hours > 0 ? format_timestamp(r.peak_hour) : "";
    return j;
}

// --- daily peaks and seasonality -------------------------------------------

struct DailyPeaks {
    std::vector<EpochSeconds> days;  // local midnight of each complete day
    std::vector<double> peak_mw;
    std::vector<std::string> warnings;  // partial days dropped at the edges
};

inline DailyPeaks daily_peaks(const std::vector<EpochSeconds>& timestamps,
                              const std::vector<double>& demand_mw) {
    if (timestamps.size() != demand_mw.size()) throw DataError("daily_peaks: misaligned");
    DailyPeaks out;
    std::map<EpochSeconds, std::pair<double, int>> by_day;  // day -> (max, hours)
    for (std::size_t h = 0; h < timestamps.size(); ++h) {
        auto& slot = by_day[day_start(timestamps[h])];
        if (slot.second == 0 || demand_mw[h] > slot.first) slot.first = demand_mw[h];
        ++slot.second;
    }
    for (const auto& [day, slot] : by_day) {
        if (slot.second < 24) {
            out.warnings.push_back("partial day " + format_timestamp(day).substr(0, 10)
                                   + " (" + std::to_string(slot.second)
                                   + " hours) excluded");
            continue;
        }
        out.days.push_back(day);
        out.peak_mw.push_back(slot.first);
    }
    return out;
}

struct SeasonalSummary {
    double summer_min_mw = 0.0, summer_max_mw = 0.0;  // Jun-Aug daily peaks
    double winter_min_mw = 0.0, winter_max_mw = 0.0;  // Dec, Jan, Feb daily peaks
    double shoulder_avg_mw = 0.0;                     // Mar-May, Sep-Nov average
    double summer_range_mw() const { return summer_max_mw - summer_min_mw; }
    double winter_range_mw() const { return winter_max_mw - winter_min_mw; }
};

inline SeasonalSummary seasonal_summary(const DailyPeaks& peaks) {
    SeasonalSummary s;
    bool summer_seen = false, winter_seen = false;
    double shoulder_sum = 0.0;
    std::size_t shoulder_n = 0;
    for (std::size_t i = 0; i < peaks.days.size(); ++i) {
        const int m = month_of(peaks.days[i]);
        const double v = peaks.peak_mw[i];
        if (m >= 6 && m <= 8) {
            s.summer_min_mw = summer_seen ? std::min(s.summer_min_mw, v) : v;
            s.summer_max_mw = summer_seen ? std::max(s.summer_max_mw, v) : v;
            summer_seen = true;
        } else if (m == 12 || m <= 2) {
            s.winter_min_mw = winter_seen ? std::min(s.winter_min_mw, v) : v;
            s.winter_max_mw = winter_seen ? std::max(s.winter_max_mw, v) : v;
            winter_seen = true;
        } else {
            shoulder_sum += v;
            ++shoulder_n;
        }
    }
    if (shoulder_n > 0) s.shoulder_avg_mw = shoulder_sum / double(shoulder_n);
    return s;
}

// --- temperature scatters ----------------------------------------------------

struct ScatterPoint {
    double temperature_c = 0.0;
    double value = 0.0;
};

struct SavingsScatter {
    std::vector<ScatterPoint> points;  // value = fractional savings vs baseline
    std::size_t skipped_zero_baseline = 0;
};

inline SavingsScatter savings_scatter(const std::vector<double>& scenario_mw,
                                      const std::vector<double>& baseline_mw,
                                      const std::vector<double>& mean_temp_c) {
    if (scenario_mw.size() != baseline_mw.size()
        || scenario_mw.size() != mean_temp_c.size()) {
        throw DataError("savings_scatter: series misaligned");
    }
    SavingsScatter out;
    out.points.reserve(scenario_mw.size());
    for (std::size_t h = 0; h < scenario_mw.size(); ++h) {
        if (baseline_mw[h] == 0.0) {
            ++out.skipped_zero_baseline;
            continue;
        }
        out.points.push_back(
            {mean_temp_c[h], (baseline_mw[h] - scenario_mw[h]) / baseline_mw[h]});
    }
    return out;
}

// Crossover temperature between a scenario and the baseline: bin hours into
// 1 degC buckets of mean temperature, average demand per bin, and report the
// midpoint of the warmest bin where the scenario exceeds the baseline and
// every colder populated bin does too. nullopt when the scenario never takes
// over at the cold end.
inline std::optional<double> crossover_temperature(const std::vector<double>& scenario_mw,
                                                   const std::vector<double>& baseline_mw,
                                                   const std::vector<double>& mean_temp_c) {
    if (scenario_mw.size() != baseline_mw.size()
        || scenario_mw.size() != mean_temp_c.size()) {
        throw DataError("crossover_temperature: series misaligned");
    }
    std::map<int, std::pair<double, double>> bins;  // floor(temp) -> (sum scen, sum base)
    for (std::size_t h = 0; h < scenario_mw.size(); ++h) {
        const int bin = int(std::floor(mean_temp_c[h]));
        bins[bin].first += scenario_mw[h];
        bins[bin].second += baseline_mw[h];
    }
    std::optional<double> crossover;
    for (const auto& [bin, sums] : bins) {  // coldest to warmest
        if (sums.first > sums.second) {
            crossover = double(bin) + 0.5;  // still exceeding at this bin
        } else {
            break;  // scenario fell below baseline; colder run ended
        }
    }
    return crossover;
}

// --- CSV ---------------------------------------------------------------------

// Columns: timestamp,served_mw,available_generation_mw,requested_shed_mw,
// estimated_unserved_mw. The last column may be empty on hours without an
// estimate.
inline GridSeries load_grid_csv(const std::filesystem::path& path) {
    const csv::Table table = csv::read_table(path);
    const std::size_t t_col = table.column("timestamp");
    const std::size_t served_col = table.column("served_mw");
    const std::size_t gen_col = table.column("available_generation_mw");
    const std::size_t shed_col = table.column("requested_shed_mw");
    const std::size_t est_col = table.column("estimated_unserved_mw");
    GridSeries g;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const std::string where = path.string() + ":" + std::to_string(table.line_of_row(i));
        try {
            g.timestamps.push_back(parse_timestamp(table.rows[i][t_col]));
        } catch (const DataError& e) {
            throw DataError(where + ": " + e.what());
        }
        g.served_mw.push_back(table.number(i, served_col));
        g.available_generation_mw.push_back(table.number(i, gen_col));
        g.requested_shed_mw.push_back(table.number(i, shed_col));
        const std::string& est = table.rows[i][est_col];
        if (est.empty()) {
            g.estimated_unserved_mw.push_back(0.0);
            g.has_unserved_estimate.push_back(0);
        } else {
            g.estimated_unserved_mw.push_back(table.number(i, est_col));
            g.has_unserved_estimate.push_back(1);
        }
    }
    g.validate();
    return g;
}

// Columns: timestamp,res_frac,com_frac,ind_frac.
inline SectoralFractions load_fractions_csv(const std::filesystem::path& path) {
    const csv::Table table = csv::read_table(path);
    const std::size_t t_col = table.column("timestamp");
    const std::size_t r_col = table.column("res_frac");
    const std::size_t c_col = table.column("com_frac");
    const std::size_t i_col = table.column("ind_frac");
    SectoralFractions f;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const std::string where = path.string() + ":" + std::to_string(table.line_of_row(i));
        try {
            f.timestamps.push_back(parse_timestamp(table.rows[i][t_col]));
        } catch (const DataError& e) {
            throw DataError(where + ": " + e.what());
        }
        f.residential.push_back(table.number(i, r_col));
        f.commercial.push_back(table.number(i, c_col));
        f.industrial.push_back(table.number(i, i_col));
    }
    f.validate();
    return f;
}

}  // namespace stockload::grid
