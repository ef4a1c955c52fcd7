#pragma once

// End-to-end orchestration: load a JSON run configuration, drive
// sample -> retrofit -> simulate -> aggregate -> (transfer) -> calibrate ->
// compose, and write the demand, shortfall, and report artifacts with a
// content-hash manifest.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stockload/calibration.hpp"
#include "stockload/core.hpp"
#include "stockload/csv.hpp"
#include "stockload/grid.hpp"
#include "stockload/retrofit.hpp"
#include "stockload/simulation.hpp"
#include "stockload/stock.hpp"
#include "stockload/svg.hpp"
#include "stockload/transfer.hpp"
#include "stockload/weather.hpp"

namespace stockload::pipeline {

// --- configuration -----------------------------------------------------------

struct TransferConfig {
    // Source-year weather per zone; the sector is simulated under this year,
    // regressions are fitted there and applied to the analysis year.
    std::map<std::string, std::filesystem::path> zone_weather;
};

struct RunConfig {
    std::filesystem::path config_path;  // where the JSON came from (hashed into manifests)
    std::uint64_t seed = 1;
    std::size_t sample_size = 1000;  // buildings per sector
    double base_temperature_c = weather::kDefaultBaseC;
    int analysis_month = 2;
    std::map<std::string, std::filesystem::path> zone_weather;
    std::filesystem::path population_csv;
    std::filesystem::path grid_csv;
    std::filesystem::path fractions_csv;
    std::map<stock::Sector, std::filesystem::path> distributions;
    std::vector<std::filesystem::path> package_files;
    std::vector<retrofit::Scenario> scenarios;
    std::map<stock::Sector, TransferConfig> transfer;
    std::vector<std::size_t> convergence_sizes = {500, 1000, 2000, 5000, 10000};
    std::map<std::string, sim::ZoneDesignTemps> design_temperatures;
    std::filesystem::path out_dir = "out";

    void validate() const {
        if (sample_size < 1) throw ConfigError("sample_size must be at least 1");
        if (analysis_month < 1 || analysis_month > 12) {
            throw ConfigError("analysis_month must be 1..12");
        }
        if (zone_weather.empty()) throw ConfigError("no weather files configured");
        if (scenarios.empty()) throw ConfigError("no scenarios configured");
        std::set<retrofit::Scenario> seen;
        for (auto s : scenarios) {
            if (!seen.insert(s).second) {
                throw ConfigError("scenario listed twice: " + retrofit::to_string(s));
            }
        }
        auto must_exist = [](const std::filesystem::path& p, const char* what) {
            if (p.empty()) throw ConfigError(std::string(what) + " not configured");
            if (!std::filesystem::exists(p)) {
                throw ConfigError(std::string(what) + " does not exist: " + p.string());
            }
        };
        for (const auto& [zone, path] : zone_weather) {
            must_exist(path, ("weather file for zone " + zone).c_str());
        }
        must_exist(population_csv, "population_csv");
        must_exist(grid_csv, "grid_csv");
        must_exist(fractions_csv, "fractions_csv");
        for (const auto& [sector, path] : distributions) {
            must_exist(path, ("distribution for " + stock::to_string(sector)).c_str());
        }
        // The demand composition is residential + commercial + industrial, so
        // both building sectors must be configured.
        if (distributions.find(stock::Sector::residential) == distributions.end()
            || distributions.find(stock::Sector::commercial) == distributions.end()) {
            throw ConfigError("distributions must cover residential and commercial");
        }
        for (const auto& p : package_files) must_exist(p, "package file");
        for (const auto& [sector, t] : transfer) {
            if (t.zone_weather.empty()) {
                throw ConfigError("transfer for " + stock::to_string(sector)
                                  + " has no weather files");
            }
            for (const auto& [zone, path] : t.zone_weather) {
                must_exist(path, ("transfer weather for zone " + zone).c_str());
            }
        }
        for (std::size_t i = 1; i < convergence_sizes.size(); ++i) {
            if (convergence_sizes[i] < convergence_sizes[i - 1]) {
                throw ConfigError("convergence_sizes must be ascending");
            }
        }
    }
};

namespace detail {

inline std::filesystem::path resolve(const std::filesystem::path& base,
                                     const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

}  // namespace detail

// Paths inside the file are resolved relative to the file's directory.
inline RunConfig load_config(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file_to_string(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    RunConfig c;
    c.config_path = path;
    const std::filesystem::path base = path.parent_path();
    try {
        if (j.value("schema_version", kSchemaVersion) != kSchemaVersion) {
            throw ConfigError(path.string() + ": unsupported schema_version");
        }
        c.seed = j.value("seed", std::uint64_t(1));
        c.sample_size = j.value("sample_size", std::size_t(1000));
        c.base_temperature_c = j.value("base_temperature_c", weather::kDefaultBaseC);
        c.analysis_month = j.value("analysis_month", 2);
        for (const auto& [zone, file] : j.at("weather").items()) {
            c.zone_weather[zone] = detail::resolve(base, file.get<std::string>());
        }
        c.population_csv = detail::resolve(base, j.at("population_csv").get<std::string>());
        c.grid_csv = detail::resolve(base, j.at("grid_csv").get<std::string>());
        c.fractions_csv = detail::resolve(base, j.at("fractions_csv").get<std::string>());
        for (const auto& [sector, file] : j.at("distributions").items()) {
            c.distributions[stock::parse_sector(sector)] =
                detail::resolve(base, file.get<std::string>());
        }
        for (const auto& file : j.value("packages", nlohmann::json::array())) {
            c.package_files.push_back(detail::resolve(base, file.get<std::string>()));
        }
        for (const auto& name : j.at("scenarios")) {
            c.scenarios.push_back(retrofit::parse_scenario(name.get<std::string>()));
        }
        if (j.contains("transfer")) {
            for (const auto& [sector, block] : j.at("transfer").items()) {
                TransferConfig t;
                for (const auto& [zone, file] : block.at("weather").items()) {
                    t.zone_weather[zone] = detail::resolve(base, file.get<std::string>());
                }
                c.transfer[stock::parse_sector(sector)] = t;
            }
        }
        if (j.contains("convergence_sizes")) {
            c.convergence_sizes.clear();
            for (const auto& n : j.at("convergence_sizes")) {
                c.convergence_sizes.push_back(n.get<std::size_t>());
            }
        }
        if (j.contains("design_temperatures")) {
            for (const auto& [zone, block] : j.at("design_temperatures").items()) {
                c.design_temperatures[zone] = {block.at("heating_c").get<double>(),
                                               block.at("cooling_c").get<double>()};
            }
        }
        if (j.contains("out_dir")) {
            c.out_dir = detail::resolve(base, j.at("out_dir").get<std::string>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    c.validate();
    return c;
}

// --- loaded inputs -------------------------------------------------------------

// Design temperatures for zones the config does not pin: mild Gulf defaults.
inline constexpr sim::ZoneDesignTemps kDefaultDesign{-5.0, 36.0};

struct LoadedInputs {
    std::map<std::string, weather::ZoneWeatherSeries> zone_weather;
    weather::PopulationWeightSet population;
    weather::DegreeDaySeries dd;             // population-weighted, analysis year
    weather::MeanTemperatureSeries mean_temp;
    grid::GridSeries grid;
    grid::SectoralFractions fractions;
    grid::SectorSeries sector_served;        // decomposed served load
    std::map<stock::Sector, stock::ArchetypeDistribution> distributions;
    std::vector<retrofit::RetrofitPackage> packages;
    sim::SimulationParams sim_params;
};

namespace detail {

inline std::map<std::string, weather::ZoneWeatherSeries> load_zone_weather(
    const std::map<std::string, std::filesystem::path>& files) {
    std::map<std::string, weather::ZoneWeatherSeries> out;
    for (const auto& [zone, path] : files) {
        out[zone] = weather::parse_weather_file(path, weather::format_from_path(path), zone);
    }
    return out;
}

inline weather::DegreeDaySeries weighted_dd(
    const std::map<std::string, weather::ZoneWeatherSeries>& zones,
    const weather::PopulationWeightSet& population, double base) {
    std::map<std::string, weather::DegreeDaySeries> per_zone;
    for (const auto& [zone, series] : zones) {
        per_zone[zone] = weather::hourly_degree_days(series, base);
    }
    return weather::population_weighted_dd(per_zone, population);
}

}  // namespace detail

inline LoadedInputs load_inputs(const RunConfig& config) {
    config.validate();
    LoadedInputs in;
    in.zone_weather = detail::load_zone_weather(config.zone_weather);
    in.population = weather::load_population_weights(config.population_csv);
    in.dd = detail::weighted_dd(in.zone_weather, in.population, config.base_temperature_c);
    in.mean_temp = weather::mean_temperature(in.dd);
    in.grid = grid::load_grid_csv(config.grid_csv);
    if (in.grid.timestamps != in.dd.timestamps) {
        throw DataError("grid series hours do not match the weather year");
    }
    in.fractions = grid::load_fractions_csv(config.fractions_csv);
    in.sector_served = grid::decompose_sectors(in.grid, in.fractions);
    for (const auto& [sector, path] : config.distributions) {
        auto dist = stock::load_distribution(path);
        if (dist.sector != sector) {
            throw ConfigError(path.string() + ": distribution sector mismatch");
        }
        in.distributions.emplace(sector, std::move(dist));
    }
    for (const auto& path : config.package_files) {
        for (auto& p : retrofit::load_package_file(path)) in.packages.push_back(std::move(p));
    }
    const bool needs_packages =
        std::any_of(config.scenarios.begin(), config.scenarios.end(),
                    [](retrofit::Scenario s) { return s != retrofit::Scenario::baseline; });
    if (needs_packages) retrofit::validate_package_family(in.packages);
    for (const auto& [zone, series] : in.zone_weather) {
        (void)series;
        const auto it = config.design_temperatures.find(zone);
        in.sim_params.design_temperatures[zone] =
            it != config.design_temperatures.end() ? it->second : kDefaultDesign;
    }
    return in;
}

// --- scenario demand ------------------------------------------------------------

struct ScenarioDemand {
    retrofit::Scenario scenario = retrofit::Scenario::baseline;
    // Calibrated end-use series per sector, MW.
    std::map<stock::Sector, sim::SectorDemand> sectors;
    std::vector<double> industrial_mw;
    std::vector<double> total_mw;  // sector electricity + industrial

    std::vector<double> sector_total_mw(stock::Sector s) const {
        const auto& d = sectors.at(s);
        std::vector<double> out;
        out.reserve(d.hours());
        for (std::size_t h = 0; h < d.hours(); ++h) {
            out.push_back(d.heating_mw[h] + d.cooling_mw[h] + d.other_mw[h]);
        }
        return out;
    }
};

struct SimulationResult {
    std::vector<ScenarioDemand> scenarios;  // config order
    std::map<stock::Sector, calibration::MonthlyBiasFactors> factors;
    std::map<stock::Sector, transfer::HourOfWeekRegressionSet> regressions;  // transferred sectors
};

namespace detail {

// Stable per-sector seed offsets keep residential and commercial streams
// distinct while staying reproducible from the single config seed.
inline std::uint64_t sector_seed(std::uint64_t seed, stock::Sector sector) {
    return seed + (sector == stock::Sector::commercial ? 0x9e3779b97f4a7c15ULL : 0);
}

inline void scale_in_place(std::vector<double>& mw,
                           const std::vector<EpochSeconds>& timestamps,
                           const calibration::MonthlyBiasFactors& factors) {
    for (std::size_t h = 0; h < mw.size(); ++h) {
        mw[h] *= factors.factors[month_of(timestamps[h])];
    }
}

}  // namespace detail

// Simulate every configured scenario: per sector, the baseline stock is
// sampled once and retrofitted per scenario; a transfer-configured sector is
// refitted per scenario under the source year and evaluated under the
// analysis year. Calibration factors come from the baseline run and are
// shared across scenarios.
inline SimulationResult simulate_scenarios(const RunConfig& config, const LoadedInputs& in,
                                           unsigned threads = 1) {
    if (std::find(config.scenarios.begin(), config.scenarios.end(),
                  retrofit::Scenario::baseline) == config.scenarios.end()) {
        throw ConfigError("scenario list must include baseline (calibration anchor)");
    }
    SimulationResult result;

    struct SectorWork {
        std::vector<stock::BuildingSample> baseline;
        std::map<std::string, weather::ZoneWeatherSeries> transfer_weather;
        weather::DegreeDaySeries transfer_dd;
        bool transferred = false;
    };
    std::map<stock::Sector, SectorWork> work;
    for (const auto& [sector, dist] : in.distributions) {
        SectorWork w;
        w.baseline = stock::sample_stock(dist, config.sample_size,
                                         detail::sector_seed(config.seed, sector));
        stock::assign_weights(w.baseline, dist.totals, dist.coverage_fraction);
        const auto t = config.transfer.find(sector);
        if (t != config.transfer.end()) {
            w.transferred = true;
            w.transfer_weather = detail::load_zone_weather(t->second.zone_weather);
            w.transfer_dd = detail::weighted_dd(w.transfer_weather, in.population,
                                                config.base_temperature_c);
        }
        work.emplace(sector, std::move(w));
    }

    // Uncalibrated sector series per scenario.
    std::map<retrofit::Scenario, std::map<stock::Sector, sim::SectorDemand>> modeled;
    for (const auto scenario : config.scenarios) {
        for (auto& [sector, w] : work) {
            const auto stock_for_scenario =
                retrofit::scenario_stock(w.baseline, scenario, in.packages);
            sim::SectorDemand demand;
            if (w.transferred) {
                const auto source = sim::simulate_and_aggregate(
                    stock_for_scenario, w.transfer_weather, in.sim_params, threads);
                const auto reg = transfer::fit_transfer(source.heating_mw, source.cooling_mw,
                                                        source.other_mw, w.transfer_dd);
                if (scenario == retrofit::Scenario::baseline) {
                    result.regressions.emplace(sector, reg);
                }
                const auto applied = transfer::apply_transfer(reg, in.dd);
                demand.heating_mw = applied.heating_mw;
                demand.cooling_mw = applied.cooling_mw;
                demand.other_mw = applied.other_mw;
                demand.gas_mwth.assign(applied.heating_mw.size(), 0.0);
                demand.unmet_mwth.assign(applied.heating_mw.size(), 0.0);
            } else {
                demand = sim::simulate_and_aggregate(stock_for_scenario, in.zone_weather,
                                                     in.sim_params, threads);
            }
            modeled[scenario].emplace(sector, std::move(demand));
        }
    }

    // Baseline calibration against the decomposed served load.
    for (const auto& [sector, w] : work) {
        (void)w;
        const auto& d = modeled.at(retrofit::Scenario::baseline).at(sector);
        std::vector<double> total;
        total.reserve(d.hours());
        for (std::size_t h = 0; h < d.hours(); ++h) {
            total.push_back(d.heating_mw[h] + d.cooling_mw[h] + d.other_mw[h]);
        }
        const std::vector<double>& served =
            sector == stock::Sector::residential ? in.sector_served.residential_mw
                                                 : in.sector_served.commercial_mw;
        result.factors.emplace(
            sector, calibration::compute_factors(in.dd.timestamps, total, served, sector));
    }

    // Calibrate and compose.
    for (const auto scenario : config.scenarios) {
        ScenarioDemand out;
        out.scenario = scenario;
        out.sectors = std::move(modeled.at(scenario));
        for (auto& [sector, demand] : out.sectors) {
            const auto& f = result.factors.at(sector);
            detail::scale_in_place(demand.heating_mw, in.dd.timestamps, f);
            detail::scale_in_place(demand.cooling_mw, in.dd.timestamps, f);
            detail::scale_in_place(demand.other_mw, in.dd.timestamps, f);
        }
        out.industrial_mw = in.sector_served.industrial_mw;
        std::vector<double> res = out.sector_total_mw(stock::Sector::residential);
        std::vector<double> com = out.sector_total_mw(stock::Sector::commercial);
        out.total_mw = grid::compose_demand(res, com, out.industrial_mw);
        result.scenarios.push_back(std::move(out));
    }
    return result;
}

// --- artifacts -------------------------------------------------------------------

inline const std::vector<std::string>& demand_csv_columns() {
    static const std::vector<std::string> cols = {
        "timestamp",      "res_heating_mw", "res_cooling_mw", "res_other_mw",
        "com_heating_mw", "com_cooling_mw", "com_other_mw",   "res_total_mw",
        "com_total_mw",   "industrial_mw",  "total_mw"};
    return cols;
}

inline void write_demand_csv(const std::filesystem::path& path,
                             const std::vector<EpochSeconds>& timestamps,
                             const ScenarioDemand& d) {
    csv::Writer w(path);
    w.row(demand_csv_columns());
    const auto& res = d.sectors.at(stock::Sector::residential);
    const auto& com = d.sectors.at(stock::Sector::commercial);
    for (std::size_t h = 0; h < timestamps.size(); ++h) {
        const double res_total = res.heating_mw[h] + res.cooling_mw[h] + res.other_mw[h];
        const double com_total = com.heating_mw[h] + com.cooling_mw[h] + com.other_mw[h];
        w.row({format_timestamp(timestamps[h]), format_double(res.heating_mw[h]),
               format_double(res.cooling_mw[h]), format_double(res.other_mw[h]),
               format_double(com.heating_mw[h]), format_double(com.cooling_mw[h]),
               format_double(com.other_mw[h]), format_double(res_total),
               format_double(com_total), format_double(d.industrial_mw[h]),
               format_double(d.total_mw[h])});
    }
}

struct DemandTable {
    std::vector<EpochSeconds> timestamps;
    std::map<std::string, std::vector<double>> columns;
};

inline DemandTable load_demand_csv(const std::filesystem::path& path) {
    const csv::Table t = csv::read_table(path);
    DemandTable out;
    const std::size_t t_col = t.column("timestamp");
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        try {
            out.timestamps.push_back(parse_timestamp(t.rows[i][t_col]));
        } catch (const DataError& e) {
            throw DataError(path.string() + ":" + std::to_string(t.line_of_row(i)) + ": "
                            + e.what());
        }
    }
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        if (c == t_col) continue;
        std::vector<double> col;
        col.reserve(t.rows.size());
        for (std::size_t i = 0; i < t.rows.size(); ++i) col.push_back(t.number(i, c));
        out.columns.emplace(t.header[c], std::move(col));
    }
    return out;
}

inline void write_weather_metrics_csv(const std::filesystem::path& path,
                                      const weather::DegreeDaySeries& dd,
                                      const weather::MeanTemperatureSeries& mean_temp) {
    csv::Writer w(path);
    w.row({"timestamp", "hdd", "cdd", "mean_temp_c", "cooling_not_captured"});
    for (std::size_t h = 0; h < dd.timestamps.size(); ++h) {
        w.row({format_timestamp(dd.timestamps[h]), format_double(dd.hdd[h]),
               format_double(dd.cdd[h]), format_double(mean_temp.mean_c[h]),
               mean_temp.cooling_not_captured[h] ? "1" : "0"});
    }
}

inline std::string demand_csv_name(retrofit::Scenario s) {
    return "demand_" + retrofit::to_string(s) + ".csv";
}

// Manifest: every artifact with its content hash. Re-running an identical
// config must reproduce every hash. Merges over an existing manifest so the
// subcommands can extend one another's runs.
inline void write_manifest(const RunConfig& config,
                           const std::vector<std::filesystem::path>& outputs) {
    const auto manifest_path = config.out_dir / "run_manifest.json";
    nlohmann::json j;
    if (std::filesystem::exists(manifest_path)) {
        try {
            j = nlohmann::json::parse(read_file_to_string(manifest_path));
        } catch (const nlohmann::json::exception&) {
            j = nlohmann::json::object();  // rebuild a corrupt manifest
        }
    }
    j["schema_version"] = kSchemaVersion;
    j["version"] = kVersion;
    j["seed"] = config.seed;
    j["config_hash"] = to_hex(hash_file(config.config_path));
    if (!j.contains("outputs")) j["outputs"] = nlohmann::json::object();
    for (const auto& p : outputs) {
        j["outputs"][p.filename().string()] = to_hex(hash_file(p));
    }
    std::ofstream out(manifest_path);
    if (!out) throw DataError("cannot open file for writing: " + manifest_path.string());
    out << j.dump(2) << '\n';
}

// --- subcommands -------------------------------------------------------------------

// Shared shortfall block (the shed reference row plus one row per scenario).
inline nlohmann::json shortfall_block(const RunConfig& config, const LoadedInputs& in,
                                      const std::vector<ScenarioDemand>& scenarios) {
    const auto window = grid::shed_event_window(in.grid);
    nlohmann::json block;
    if (!window) {
        block["event"] = nullptr;
        return block;
    }
    block["event"] = {{"begin", format_timestamp(window->begin)},
                      {"end", format_timestamp(window->end)}};
    block["rows"].push_back(
        grid::shortfall_to_json(grid::requested_shed_report(in.grid, *window)));
    for (const auto& s : scenarios) {
        auto r = grid::shortfall(retrofit::to_string(s.scenario), s.total_mw, in.grid, *window);
        block["rows"].push_back(grid::shortfall_to_json(r));
    }
    (void)config;
    return block;
}

inline std::vector<std::filesystem::path> run_simulate(const RunConfig& config,
                                                       unsigned threads = 1) {
    const LoadedInputs in = load_inputs(config);
    const SimulationResult result = simulate_scenarios(config, in, threads);
    std::filesystem::create_directories(config.out_dir);
    std::vector<std::filesystem::path> outputs;

    for (const auto& s : result.scenarios) {
        const auto path = config.out_dir / demand_csv_name(s.scenario);
        write_demand_csv(path, in.dd.timestamps, s);
        outputs.push_back(path);
    }

    const auto weather_path = config.out_dir / "weather_metrics.csv";
    write_weather_metrics_csv(weather_path, in.dd, in.mean_temp);
    outputs.push_back(weather_path);

    nlohmann::json cal;
    cal["schema_version"] = kSchemaVersion;
    for (const auto& [sector, f] : result.factors) {
        cal["sectors"][stock::to_string(sector)] = calibration::factors_to_json(f);
    }
    const auto cal_path = config.out_dir / "calibration_factors.json";
    {
        std::ofstream out(cal_path);
        if (!out) throw DataError("cannot open file for writing: " + cal_path.string());
        out << cal.dump(2) << '\n';
    }
    outputs.push_back(cal_path);

    for (const auto& [sector, reg] : result.regressions) {
        const auto reg_path =
            config.out_dir / ("transfer_" + stock::to_string(sector) + ".json");
        transfer::save_regression(reg, reg_path);
        outputs.push_back(reg_path);
    }

    nlohmann::json summary;
    summary["schema_version"] = kSchemaVersion;
    summary["seed"] = config.seed;
    summary["sample_size"] = config.sample_size;
    summary["hours"] = in.dd.timestamps.size();
    for (const auto& s : result.scenarios) {
        nlohmann::json row;
        double total_mwh = 0.0;
        for (double v : s.total_mw) total_mwh += v;
        row["total_gwh"] = total_mwh / 1000.0;
        for (const auto& [sector, d] : s.sectors) {
            double heating = 0, cooling = 0, other = 0, gas = 0, unmet = 0;
            for (std::size_t h = 0; h < d.hours(); ++h) {
                heating += d.heating_mw[h];
                cooling += d.cooling_mw[h];
                other += d.other_mw[h];
                gas += d.gas_mwth[h];
                unmet += d.unmet_mwth[h];
            }
            row["sectors"][stock::to_string(sector)] = {
                {"heating_gwh", heating / 1000.0}, {"cooling_gwh", cooling / 1000.0},
                {"other_gwh", other / 1000.0},     {"gas_gwh_thermal", gas / 1000.0},
                {"unmet_gwh_thermal", unmet / 1000.0}};
        }
        summary["scenarios"][retrofit::to_string(s.scenario)] = row;
    }
    summary["shortfall"] = shortfall_block(config, in, result.scenarios);
    const auto summary_path = config.out_dir / "summary.json";
    {
        std::ofstream out(summary_path);
        if (!out) throw DataError("cannot open file for writing: " + summary_path.string());
        out << summary.dump(2) << '\n';
    }
    outputs.push_back(summary_path);

    write_manifest(config, outputs);
    return outputs;
}

namespace detail {

// Demand CSVs for every configured scenario, produced by run_simulate.
inline std::map<retrofit::Scenario, DemandTable> load_scenario_tables(const RunConfig& config) {
    std::map<retrofit::Scenario, DemandTable> out;
    for (const auto scenario : config.scenarios) {
        const auto path = config.out_dir / demand_csv_name(scenario);
        if (!std::filesystem::exists(path)) {
            throw DataError("missing scenario demand CSV (run simulate first): "
                            + path.string());
        }
        out.emplace(scenario, load_demand_csv(path));
    }
    return out;
}

inline double hours_to_days(EpochSeconds t) { return double(t) / (24.0 * 3600.0); }

}  // namespace detail

inline std::vector<std::filesystem::path> run_shortfall(const RunConfig& config) {
    const LoadedInputs in = load_inputs(config);
    const auto tables = detail::load_scenario_tables(config);
    const auto window = grid::shed_event_window(in.grid);
    if (!window) throw DataError("grid series has no load-shed event to analyze");
    std::filesystem::create_directories(config.out_dir);
    std::vector<std::filesystem::path> outputs;

    nlohmann::json report;
    report["schema_version"] = kSchemaVersion;
    report["event"] = {{"begin", format_timestamp(window->begin)},
                       {"end", format_timestamp(window->end)}};
    report["rows"].push_back(
        grid::shortfall_to_json(grid::requested_shed_report(in.grid, *window)));

    // Hourly shortfall per scenario across the event window.
    std::vector<std::size_t> event_hours;
    for (std::size_t h = 0; h < in.grid.hours(); ++h) {
        if (in.grid.timestamps[h] >= window->begin && in.grid.timestamps[h] <= window->end) {
            event_hours.push_back(h);
        }
    }
    std::vector<std::string> header = {"timestamp", "requested_shed_mw"};
    for (const auto scenario : config.scenarios) {
        header.push_back(retrofit::to_string(scenario) + "_shortfall_mw");
    }
    std::map<retrofit::Scenario, std::vector<double>> hourly;
    for (const auto scenario : config.scenarios) {
        const auto& total = tables.at(scenario).columns.at("total_mw");
        if (total.size() != in.grid.hours()) {
            throw DataError("scenario demand CSV does not cover the grid year");
        }
        auto r = grid::shortfall(retrofit::to_string(scenario), total, in.grid, *window);
        report["rows"].push_back(grid::shortfall_to_json(r));
        std::vector<double> series;
        series.reserve(event_hours.size());
        for (const std::size_t h : event_hours) {
            const double gap = in.grid.shed_requested(h)
                                   ? std::max(0.0, total[h] - in.grid.available_generation_mw[h])
                                   : 0.0;
            series.push_back(gap);
        }
        hourly.emplace(scenario, std::move(series));
    }

    const auto report_path = config.out_dir / "shortfall_report.json";
    {
        std::ofstream out(report_path);
        if (!out) throw DataError("cannot open file for writing: " + report_path.string());
        out << report.dump(2) << '\n';
    }
    outputs.push_back(report_path);

    const auto csv_path = config.out_dir / "shortfall_hourly.csv";
    {
        csv::Writer w(csv_path);
        w.row(header);
        for (std::size_t i = 0; i < event_hours.size(); ++i) {
            const std::size_t h = event_hours[i];
            std::vector<std::string> row = {format_timestamp(in.grid.timestamps[h]),
                                            format_double(in.grid.requested_shed_mw[h])};
            for (const auto scenario : config.scenarios) {
                row.push_back(format_double(hourly.at(scenario)[i]));
            }
            w.row(row);
        }
    }
    outputs.push_back(csv_path);

    // Event-window line plot: hours on x, shortfall MW on y.
    std::vector<svg::Series> series;
    {
        svg::Series shed;
        shed.label = "requested shed";
        for (std::size_t i = 0; i < event_hours.size(); ++i) {
            shed.x.push_back(double(i));
            shed.y.push_back(in.grid.requested_shed_mw[event_hours[i]]);
        }
        series.push_back(std::move(shed));
    }
    for (const auto scenario : config.scenarios) {
        svg::Series s;
        s.label = retrofit::to_string(scenario);
        const auto& vals = hourly.at(scenario);
        for (std::size_t i = 0; i < vals.size(); ++i) {
            s.x.push_back(double(i));
            s.y.push_back(vals[i]);
        }
        series.push_back(std::move(s));
    }
    const auto svg_path = config.out_dir / "shortfall.svg";
    svg::write_plot(svg_path, series,
                    {"Hourly electricity shortfall over the shed event",
                     "event hour", "MW", 960, 540, false});
    outputs.push_back(svg_path);

    write_manifest(config, outputs);
    return outputs;
}

inline std::vector<std::filesystem::path> run_report(const RunConfig& config) {
    const LoadedInputs in = load_inputs(config);
    const auto tables = detail::load_scenario_tables(config);
    std::filesystem::create_directories(config.out_dir);
    std::vector<std::filesystem::path> outputs;
    const auto& timestamps = in.dd.timestamps;
    for (const auto& [scenario, table] : tables) {
        (void)scenario;
        if (table.timestamps != timestamps) {
            throw DataError("scenario demand CSV hours do not match the weather year");
        }
    }

    // End-use annual totals per scenario and sector.
    {
        csv::Writer w(config.out_dir / "enduse_annual.csv");
        w.row({"scenario", "sector", "end_use", "annual_gwh"});
        for (const auto scenario : config.scenarios) {
            const auto& cols = tables.at(scenario).columns;
            for (const char* sector : {"res", "com"}) {
                for (const char* use : {"heating", "cooling", "other"}) {
                    const auto& col =
                        cols.at(std::string(sector) + "_" + use + "_mw");
                    double sum = 0.0;
                    for (double v : col) sum += v;
                    w.row({retrofit::to_string(scenario),
                           sector == std::string("res") ? "residential" : "commercial",
                           use, format_double(sum / 1000.0)});
                }
            }
        }
    }
    outputs.push_back(config.out_dir / "enduse_annual.csv");

    // Hourly totals with mean temperature.
    {
        csv::Writer w(config.out_dir / "hourly_demand.csv");
        std::vector<std::string> header = {"timestamp", "mean_temp_c"};
        for (const auto scenario : config.scenarios) {
            header.push_back(retrofit::to_string(scenario) + "_total_mw");
        }
        w.row(header);
        for (std::size_t h = 0; h < timestamps.size(); ++h) {
            std::vector<std::string> row = {format_timestamp(timestamps[h]),
                                            format_double(in.mean_temp.mean_c[h])};
            for (const auto scenario : config.scenarios) {
                row.push_back(format_double(tables.at(scenario).columns.at("total_mw")[h]));
            }
            w.row(row);
        }
    }
    outputs.push_back(config.out_dir / "hourly_demand.csv");

    // Analysis-month scatters: temperature vs demand, temperature vs savings.
    std::vector<std::size_t> month_hours;
    for (std::size_t h = 0; h < timestamps.size(); ++h) {
        if (month_of(timestamps[h]) == config.analysis_month) month_hours.push_back(h);
    }
    {
        csv::Writer w(config.out_dir / "temperature_demand.csv");
        std::vector<std::string> header = {"mean_temp_c"};
        for (const auto scenario : config.scenarios) {
            header.push_back(retrofit::to_string(scenario) + "_total_mw");
        }
        w.row(header);
        for (const std::size_t h : month_hours) {
            std::vector<std::string> row = {format_double(in.mean_temp.mean_c[h])};
            for (const auto scenario : config.scenarios) {
                row.push_back(format_double(tables.at(scenario).columns.at("total_mw")[h]));
            }
            w.row(row);
        }
    }
    outputs.push_back(config.out_dir / "temperature_demand.csv");

    const bool has_baseline =
        tables.find(retrofit::Scenario::baseline) != tables.end();
    nlohmann::json summary;
    summary["schema_version"] = kSchemaVersion;
    if (has_baseline) {
        // Savings limited to the building sectors (res+com), the quantity the
        // scenarios actually change.
        auto building_mw = [&](retrofit::Scenario s) {
            const auto& cols = tables.at(s).columns;
            const auto& res = cols.at("res_total_mw");
            const auto& com = cols.at("com_total_mw");
            std::vector<double> out;
            out.reserve(res.size());
            for (std::size_t h = 0; h < res.size(); ++h) out.push_back(res[h] + com[h]);
            return out;
        };
        const auto baseline_building = building_mw(retrofit::Scenario::baseline);
        const auto& baseline_total =
            tables.at(retrofit::Scenario::baseline).columns.at("total_mw");

        csv::Writer w(config.out_dir / "temperature_savings.csv");
        std::vector<std::string> header = {"mean_temp_c"};
        std::map<retrofit::Scenario, std::vector<double>> building;
        for (const auto scenario : config.scenarios) {
            if (scenario == retrofit::Scenario::baseline) continue;
            header.push_back(retrofit::to_string(scenario) + "_savings_frac");
            building.emplace(scenario, building_mw(scenario));
        }
        w.row(header);
        for (const std::size_t h : month_hours) {
            std::vector<std::string> row = {format_double(in.mean_temp.mean_c[h])};
            for (const auto scenario : config.scenarios) {
                if (scenario == retrofit::Scenario::baseline) continue;
                const double base = baseline_building[h];
                const double frac =
                    base > 0.0 ? (base - building.at(scenario)[h]) / base : 0.0;
                row.push_back(format_double(frac));
            }
            w.row(row);
        }
        outputs.push_back(config.out_dir / "temperature_savings.csv");

        for (const auto scenario : config.scenarios) {
            if (scenario == retrofit::Scenario::baseline) continue;
            const auto crossover = grid::crossover_temperature(
                tables.at(scenario).columns.at("total_mw"), baseline_total,
                in.mean_temp.mean_c);
            summary["crossover_temperature_c"][retrofit::to_string(scenario)] =
                crossover ? nlohmann::json(*crossover) : nlohmann::json(nullptr);
        }
    }

    // Daily peaks with seasonal summaries.
    {
        csv::Writer w(config.out_dir / "daily_peaks.csv");
        std::vector<std::string> header = {"date"};
        for (const auto scenario : config.scenarios) {
            header.push_back(retrofit::to_string(scenario) + "_peak_mw");
        }
        w.row(header);
        std::map<retrofit::Scenario, grid::DailyPeaks> peaks;
        for (const auto scenario : config.scenarios) {
            peaks.emplace(scenario,
                          grid::daily_peaks(timestamps,
                                            tables.at(scenario).columns.at("total_mw")));
        }
        const auto& first = peaks.at(config.scenarios.front());
        for (std::size_t i = 0; i < first.days.size(); ++i) {
            std::vector<std::string> row = {format_timestamp(first.days[i]).substr(0, 10)};
            for (const auto scenario : config.scenarios) {
                row.push_back(format_double(peaks.at(scenario).peak_mw[i]));
            }
            w.row(row);
        }
        for (const auto scenario : config.scenarios) {
            const auto s = grid::seasonal_summary(peaks.at(scenario));
            summary["seasonal"][retrofit::to_string(scenario)] = {
                {"summer_min_mw", s.summer_min_mw}, {"summer_max_mw", s.summer_max_mw},
                {"winter_min_mw", s.winter_min_mw}, {"winter_max_mw", s.winter_max_mw},
                {"summer_range_mw", s.summer_range_mw()},
                {"winter_range_mw", s.winter_range_mw()},
                {"shoulder_avg_mw", s.shoulder_avg_mw}};
        }
    }
    outputs.push_back(config.out_dir / "daily_peaks.csv");

    const auto summary_path = config.out_dir / "report_summary.json";
    {
        std::ofstream out(summary_path);
        if (!out) throw DataError("cannot open file for writing: " + summary_path.string());
        out << summary.dump(2) << '\n';
    }
    outputs.push_back(summary_path);

    // SVG renderings.
    {
        std::vector<svg::Series> series;
        for (const auto scenario : config.scenarios) {
            svg::Series s;
            s.label = retrofit::to_string(scenario);
            const auto& total = tables.at(scenario).columns.at("total_mw");
            for (const std::size_t h : month_hours) {
                s.x.push_back(detail::hours_to_days(timestamps[h] - timestamps[month_hours.front()]));
                s.y.push_back(total[h]);
            }
            series.push_back(std::move(s));
        }
        svg::write_plot(config.out_dir / "demand_month.svg", series,
                        {"System demand, analysis month", "day of month", "MW",
                         960, 540, false});
        outputs.push_back(config.out_dir / "demand_month.svg");
    }
    {
        std::vector<svg::Series> series;
        for (const auto scenario : config.scenarios) {
            svg::Series s;
            s.label = retrofit::to_string(scenario);
            const auto& total = tables.at(scenario).columns.at("total_mw");
            for (const std::size_t h : month_hours) {
                s.x.push_back(in.mean_temp.mean_c[h]);
                s.y.push_back(total[h]);
            }
            series.push_back(std::move(s));
        }
        svg::write_plot(config.out_dir / "temperature_demand.svg", series,
                        {"System demand vs mean temperature", "mean temperature (degC)",
                         "MW", 960, 540, true});
        outputs.push_back(config.out_dir / "temperature_demand.svg");
    }
    {
        std::vector<svg::Series> series;
        for (const auto scenario : config.scenarios) {
            svg::Series s;
            s.label = retrofit::to_string(scenario);
            const auto& total = tables.at(scenario).columns.at("total_mw");
            const auto peaks = grid::daily_peaks(timestamps, total);
            for (std::size_t i = 0; i < peaks.days.size(); ++i) {
                s.x.push_back(detail::hours_to_days(peaks.days[i] - timestamps.front()));
                s.y.push_back(peaks.peak_mw[i]);
            }
            series.push_back(std::move(s));
        }
        svg::write_plot(config.out_dir / "daily_peaks.svg", series,
                        {"Daily peak demand", "day of year", "MW", 960, 540, false});
        outputs.push_back(config.out_dir / "daily_peaks.svg");
    }

    write_manifest(config, outputs);
    return outputs;
}

// Fit hour-of-week regressions for every transfer-configured sector without
// running the full scenario matrix.
inline std::vector<std::filesystem::path> run_fit_transfer(const RunConfig& config,
                                                           unsigned threads = 1) {
    if (config.transfer.empty()) {
        throw ConfigError("no transfer block configured; nothing to fit");
    }
    const LoadedInputs in = load_inputs(config);
    std::filesystem::create_directories(config.out_dir);
    std::vector<std::filesystem::path> outputs;
    for (const auto& [sector, t] : config.transfer) {
        const auto& dist = in.distributions.at(sector);
        auto samples = stock::sample_stock(dist, config.sample_size,
                                           detail::sector_seed(config.seed, sector));
        stock::assign_weights(samples, dist.totals, dist.coverage_fraction);
        const auto weather_by_zone = detail::load_zone_weather(t.zone_weather);
        const auto dd = detail::weighted_dd(weather_by_zone, in.population,
                                            config.base_temperature_c);
        const auto demand =
            sim::simulate_and_aggregate(samples, weather_by_zone, in.sim_params, threads);
        const auto reg = transfer::fit_transfer(demand.heating_mw, demand.cooling_mw,
                                                demand.other_mw, dd);
        const auto path = config.out_dir / ("transfer_" + stock::to_string(sector) + ".json");
        transfer::save_regression(reg, path);
        outputs.push_back(path);
    }
    write_manifest(config, outputs);
    return outputs;
}

// Sample-size convergence of mean annual per-building electricity.
inline std::vector<std::filesystem::path> run_convergence(const RunConfig& config) {
    const LoadedInputs in = load_inputs(config);
    std::filesystem::create_directories(config.out_dir);
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    csv::Writer w(config.out_dir / "convergence.csv");
    w.row({"sector", "sample_size", "mean_annual_kwh", "rel_change_from_previous"});
    for (const auto& [sector, dist] : in.distributions) {
        const auto scan = stock::convergence_scan(
            dist, config.convergence_sizes, detail::sector_seed(config.seed, sector),
            [&](const stock::BuildingSample& b) {
                const auto it = in.zone_weather.find(b.zone_id);
                if (it == in.zone_weather.end()) {
                    throw ConfigError("no weather configured for zone " + b.zone_id);
                }
                return sim::annual_electricity_kwh(
                    sim::simulate_building(b, it->second, in.sim_params));
            });
        double prev = 0.0;
        bool first = true;
        for (const auto& [n, mean] : scan) {
            const double rel = first ? 0.0 : std::abs(mean - prev) / prev;
            w.row({stock::to_string(sector), std::to_string(n), format_double(mean),
                   format_double(rel)});
            j["sectors"][stock::to_string(sector)][std::to_string(n)] = {
                {"mean_annual_kwh", mean}, {"rel_change_from_previous", rel}};
            prev = mean;
            first = false;
        }
    }
    w.close();
    const auto json_path = config.out_dir / "convergence.json";
    {
        std::ofstream out(json_path);
        if (!out) throw DataError("cannot open file for writing: " + json_path.string());
        out << j.dump(2) << '\n';
    }
    write_manifest(config, {config.out_dir / "convergence.csv", json_path});
    return {config.out_dir / "convergence.csv", json_path};
}

// Loads everything the config references so broken inputs fail fast.
inline void run_validate(const RunConfig& config) { (void)load_inputs(config); }

}  // namespace stockload::pipeline
