// Deterministic generator for the shipped synthetic input corpus.
//
// Writes, under a data root (default "data", override with argv[1]):
//   fixtures/weather_2021/<zone>.csv   analysis year with a deep mid-February
//                                      cold snap (unique minimum -14.2 °C)
//   fixtures/weather_2018/<zone>.csv   mild reference year for demand transfer
//   fixtures/population.csv            zone populations (weighting)
//   fixtures/grid_2021.csv             served load, available generation,
//                                      requested shed, unserved estimates
//   fixtures/fractions.csv             hourly sectoral shares of served load
//   texas_like/residential.json        residential stock marginals
//   texas_like/commercial.json         commercial stock marginals
//   texas_like/packages/*.json         retrofit package definitions
//   texas_like/uri.json                four-scenario run config
//   texas_like/uri_transfer.json       same, commercial fitted on the 2018 year
//   texas_like/mini.json               tiny-sample config for quick runs
//
// Everything is closed-form; re-running reproduces every file byte for byte.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stockload/core.hpp"
#include "stockload/csv.hpp"

namespace fs = std::filesystem;
using stockload::EpochSeconds;
using stockload::civil_to_epoch;
using stockload::epoch_to_civil;
using stockload::format_double;
using stockload::format_timestamp;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Zone {
    const char* id;
    double population;
    double offset_c;  // shift relative to the system-wide trace in mild weather
};

// Population shares: 0.25, 0.07, 0.02, 0.03, 0.35, 0.08, 0.17, 0.03.
const std::vector<Zone>& zones() {
    static const std::vector<Zone> z = {
        {"coast", 6.50e6, 2.5},          {"east", 1.82e6, 0.5},
        {"far_west", 0.52e6, -1.0},      {"north", 0.78e6, -3.5},
        {"north_central", 9.10e6, -1.5}, {"south", 2.08e6, 3.5},
        {"south_central", 4.42e6, 1.0},  {"west", 0.78e6, -2.0},
    };
    return z;
}

struct Anchor {
    EpochSeconds t;
    double temp_c;
};

// Cold-snap trace for February 2021, piecewise linear between anchors. The
// global minimum (-14.2 °C) falls at 2021-02-16 06:00; the secondary low of
// -12.0 °C falls exactly 24 h earlier.
const std::vector<Anchor>& event_anchors() {
    static const std::vector<Anchor> a = {
        {civil_to_epoch(2021, 2, 12, 0), 8.5},    {civil_to_epoch(2021, 2, 13, 6), -1.0},
        {civil_to_epoch(2021, 2, 14, 6), -6.0},   {civil_to_epoch(2021, 2, 14, 18), -7.5},
        {civil_to_epoch(2021, 2, 15, 6), -12.0},  {civil_to_epoch(2021, 2, 15, 15), -9.5},
        {civil_to_epoch(2021, 2, 16, 6), -14.2},  {civil_to_epoch(2021, 2, 16, 15), -10.5},
        {civil_to_epoch(2021, 2, 17, 6), -12.5},  {civil_to_epoch(2021, 2, 17, 22), -8.0},
        {civil_to_epoch(2021, 2, 18, 12), -2.0},  {civil_to_epoch(2021, 2, 19, 12), 3.0},
        {civil_to_epoch(2021, 2, 20, 12), 12.0},
    };
    return a;
}

double interpolate_event(EpochSeconds t) {
    const auto& a = event_anchors();
    for (std::size_t i = 0; i + 1 < a.size(); ++i) {
        if (t >= a[i].t && t <= a[i + 1].t) {
            const double f = double(t - a[i].t) / double(a[i + 1].t - a[i].t);
            return a[i].temp_c + f * (a[i + 1].temp_c - a[i].temp_c);
        }
    }
    throw stockload::InternalError("event interpolation outside anchor range");
}

struct YearShape {
    int year;
    double mean_c;
    double amplitude_c;     // seasonal swing, coldest mid-January
    double diurnal_c;       // half daily swing, warmest 15:00
    bool cold_snap;         // February 2021 event trace
    double winter_dip_c;    // mild early-February dip (reference year)
};

// System-wide trace before zone offsets.
double common_temp(EpochSeconds t, EpochSeconds jan1, const YearShape& y) {
    if (y.cold_snap && t >= event_anchors().front().t && t <= event_anchors().back().t) {
        return interpolate_event(t);
    }
    const double d = double(t - jan1) / 86400.0;
    const int hod = epoch_to_civil(t).hour;
    double temp = y.mean_c - y.amplitude_c * std::cos(2.0 * kPi * (d - 13.0) / 365.25)
                  + y.diurnal_c * std::cos(2.0 * kPi * (hod - 15.0) / 24.0);
    if (y.winter_dip_c > 0.0 && d >= 30.0 && d <= 40.0) {
        temp -= y.winter_dip_c * std::sin(kPi * (d - 30.0) / 10.0);
    }
    return temp;
}

// Zone offsets fade out in deep cold so the snap hits the whole system
// uniformly: full offset above +8 °C, none below -2 °C.
double zone_temp(double common, double offset) {
    const double w = std::clamp((common + 2.0) / 10.0, 0.0, 1.0);
    return common + offset * w;
}

std::vector<EpochSeconds> hourly_year(int year) {
    const EpochSeconds start = civil_to_epoch(year, 1, 1, 0);
    const EpochSeconds end = civil_to_epoch(year + 1, 1, 1, 0);
    std::vector<EpochSeconds> out;
    out.reserve(std::size_t((end - start) / 3600));
    for (EpochSeconds t = start; t < end; t += 3600) out.push_back(t);
    return out;
}

void write_weather(const fs::path& dir, const YearShape& shape) {
    fs::create_directories(dir);
    const EpochSeconds jan1 = civil_to_epoch(shape.year, 1, 1, 0);
    const std::vector<EpochSeconds> hours = hourly_year(shape.year);
    for (const Zone& z : zones()) {
        stockload::csv::Writer w(dir / (std::string(z.id) + ".csv"));
        w.row({"timestamp", "dry_bulb_c"});
        for (EpochSeconds t : hours) {
            const double common = common_temp(t, jan1, shape);
            w.row({format_timestamp(t), format_double(zone_temp(common, z.offset_c))});
        }
        w.close();
    }
}

double weighted_mean_temp(EpochSeconds t, EpochSeconds jan1, const YearShape& shape) {
    double pop = 0.0, sum = 0.0;
    const double common = common_temp(t, jan1, shape);
    for (const Zone& z : zones()) {
        pop += z.population;
        sum += z.population * zone_temp(common, z.offset_c);
    }
    return sum / pop;
}

void write_population(const fs::path& path) {
    stockload::csv::Writer w(path);
    w.row({"zone_id", "population"});
    for (const Zone& z : zones()) w.row({z.id, format_double(z.population)});
    w.close();
}

void write_fractions(const fs::path& path) {
    stockload::csv::Writer w(path);
    w.row({"timestamp", "res_frac", "com_frac", "ind_frac"});
    for (EpochSeconds t : hourly_year(2021)) {
        w.row({format_timestamp(t), "0.5", "0.33", "0.17"});
    }
    w.close();
}

// Grid trace. Load shed runs 2021-02-15 00:00 through 2021-02-17 22:00
// (71 hours): 20,000 MW requested at the 2021-02-16 06:00 peak and 14,000 MW
// at the other 70 hours, integrating to exactly 1,000,000 MWh. Served load at
// the peak hour is pinned so that served + unserved reconstructs an estimated
// demand of 20000/0.294 MW, i.e. the requested shed is 29.4 % of it.
void write_grid(const fs::path& path, const YearShape& shape) {
    const EpochSeconds jan1 = civil_to_epoch(2021, 1, 1, 0);
    const EpochSeconds shed_first = civil_to_epoch(2021, 2, 15, 0);
    const EpochSeconds shed_last = civil_to_epoch(2021, 2, 17, 22);
    const EpochSeconds shed_peak = civil_to_epoch(2021, 2, 16, 6);
    const double demand_at_peak = 20000.0 / 0.294;

    stockload::csv::Writer w(path);
    w.row({"timestamp", "served_mw", "available_generation_mw", "requested_shed_mw",
           "estimated_unserved_mw"});
    for (EpochSeconds t : hourly_year(2021)) {
        const double temp = weighted_mean_temp(t, jan1, shape);
        const int hod = epoch_to_civil(t).hour;
        double estimated = 36500.0 + 1080.0 * std::max(0.0, 16.5 - temp)
                           + 1150.0 * std::max(0.0, temp - 21.0)
                           + 2300.0 * std::cos(2.0 * kPi * (hod - 16.0) / 24.0);
        double shed = 0.0;
        if (t >= shed_first && t <= shed_last) shed = (t == shed_peak) ? 20000.0 : 14000.0;
        if (t == shed_peak) estimated = demand_at_peak;
        const double served = estimated - shed;
        const double generation = shed > 0.0 ? served : served * 1.06 + 6000.0;
        w.row({format_timestamp(t), format_double(served), format_double(generation),
               format_double(shed), shed > 0.0 ? format_double(shed) : ""});
    }
    w.close();
}

// --- stock distributions ----------------------------------------------------

nlohmann::json marginal(nlohmann::json values, nlohmann::json probabilities) {
    return {{"values", std::move(values)}, {"probabilities", std::move(probabilities)}};
}

nlohmann::json zone_marginal() {
    nlohmann::json values = nlohmann::json::array();
    nlohmann::json probs = nlohmann::json::array();
    double pop = 0.0;
    for (const Zone& z : zones()) pop += z.population;
    for (const Zone& z : zones()) {
        values.push_back(z.id);
        probs.push_back(z.population / pop);
    }
    return marginal(std::move(values), std::move(probs));
}

// 60 % of homes heat electrically (12 % resistance, 48 % air-source heat
// pumps); 14 % of ceilings already meet the R-38-equivalent target.
nlohmann::json residential_distribution() {
    nlohmann::json m;
    m["zone"] = zone_marginal();
    m["floor_area_m2"] = marginal({110, 150, 190, 240}, {0.25, 0.30, 0.25, 0.20});
    m["ceiling_r"] = marginal({2.2893, 3.8742, 5.283, 6.6918}, {0.30, 0.30, 0.26, 0.14});
    m["wall_r"] = marginal({1.9371, 2.2893, 3.3459}, {0.50, 0.30, 0.20});
    m["ach50"] = marginal({5, 8, 12, 18}, {0.15, 0.25, 0.35, 0.25});
    m["duct_leakage_fraction"] = marginal({0.05, 0.12, 0.20, 0.30}, {0.20, 0.30, 0.30, 0.20});
    m["duct_r"] = marginal({0.7045, 1.0568, 1.4088}, {0.40, 0.35, 0.25});
    m["heating_system"] = marginal(
        {
            {{"kind", "electric_resistance"}},
            {{"kind", "ashp"}, {"efficiency", 7.7}, {"supplemental", "electric_resistance"}},
            {{"kind", "gas_furnace"}, {"efficiency", 0.80}},
            {{"kind", "gas_furnace"}, {"efficiency", 0.92}},
        },
        {0.12, 0.48, 0.25, 0.15});
    m["cooling_seer"] = marginal({10, 13, 15, 18}, {0.25, 0.40, 0.25, 0.10});
    m["heat_setpoint_c"] = marginal({20, 21, 22}, {0.40, 0.40, 0.20});
    m["cool_setpoint_c"] = marginal({23.5, 24.5, 25.5}, {0.30, 0.40, 0.30});
    m["internal_gains_w_per_m2"] = marginal({2.5, 3.5, 5.0}, {0.40, 0.40, 0.20});
    m["lighting_power_density_w_per_m2"] = marginal({4, 6, 9}, {0.30, 0.40, 0.30});
    return {{"sector", "residential"},
            {"totals", 10.4e6},
            {"coverage_fraction", 1.0},
            {"marginals", std::move(m)}};
}

nlohmann::json commercial_distribution() {
    nlohmann::json m;
    m["zone"] = zone_marginal();
    m["building_type"] = marginal({"office", "retail", "warehouse", "education", "lodging"},
                                  {0.30, 0.25, 0.20, 0.15, 0.10});
    m["floor_area_m2"] = marginal({800, 2000, 5000, 12000}, {0.30, 0.30, 0.25, 0.15});
    m["ceiling_r"] = marginal({2.2893, 3.3459, 5.283}, {0.40, 0.35, 0.25});
    m["wall_r"] = marginal({1.4088, 2.2893, 3.3459}, {0.40, 0.40, 0.20});
    m["ach50"] = marginal({4, 8, 14}, {0.30, 0.40, 0.30});
    m["duct_leakage_fraction"] = marginal({0.08, 0.15, 0.25}, {0.40, 0.40, 0.20});
    m["duct_r"] = marginal({0.7045, 1.0568, 1.4088}, {0.40, 0.40, 0.20});
    m["heating_system"] = marginal(
        {
            {{"kind", "commercial_hp_rtu"},
             {"efficiency", 7.0},
             {"supplemental", "electric_resistance"}},
            {{"kind", "electric_resistance"}},
            {{"kind", "hp_boiler"}, {"efficiency", 8.5}, {"supplemental", "electric_resistance"}},
            {{"kind", "gas_furnace"}, {"efficiency", 0.80}},
            {{"kind", "gas_boiler"}, {"efficiency", 0.82}},
        },
        {0.25, 0.15, 0.10, 0.35, 0.15});
    m["cooling_seer"] = marginal({11, 13, 16}, {0.30, 0.40, 0.30});
    m["heat_setpoint_c"] = marginal({20, 21}, {0.50, 0.50});
    m["cool_setpoint_c"] = marginal({23.5, 24.5}, {0.50, 0.50});
    m["internal_gains_w_per_m2"] = marginal({8, 12, 18}, {0.30, 0.40, 0.30});
    m["lighting_power_density_w_per_m2"] = marginal({8, 11, 14}, {0.30, 0.40, 0.30});
    return {{"sector", "commercial"},
            {"totals", 3.4e8},
            {"coverage_fraction", 0.64},
            {"marginals", std::move(m)}};
}

// --- retrofit packages -------------------------------------------------------

nlohmann::json measure(const char* parameter, double target, const char* direction) {
    return {{"parameter", parameter}, {"target", target}, {"direction", direction}};
}

// Moderate envelope tune-up (attic top-up, air sealing, duct sealing and
// wrap); they are defaults, not survey data, and every value is
// user-overridable.
nlohmann::json efficiency_measures_res() {
    return nlohmann::json::array({
        measure("ceiling_r", 5.283, "at_least"),
        measure("ach50", 10.0, "at_most"),
        measure("duct_leakage_fraction", 0.15, "at_most"),
        measure("duct_r", 1.0568, "at_least"),
    });
}

nlohmann::json efficiency_measures_com() {
    return nlohmann::json::array({
        measure("ceiling_r", 4.0, "at_least"),
        measure("ach50", 6.0, "at_most"),
        measure("duct_leakage_fraction", 0.12, "at_most"),
        measure("duct_r", 1.0568, "at_least"),
    });
}

// Cold-climate replacement units with explicit COP anchors; the swap also
// brings the cooling side up to a modern SEER floor.
nlohmann::json electrification_rules_res() {
    return nlohmann::json::array({{
        {"applies_to", {"gas_furnace", "electric_resistance", "ashp"}},
        {"replacement",
         {{"kind", "ashp"},
          {"efficiency", 9.5},
          {"cop_47", 4.0},
          {"cop_17", 2.5},
          {"supplemental", "electric_resistance"}}},
        {"min_cooling_seer", 16.0},
    }});
}

nlohmann::json electrification_rules_com() {
    return nlohmann::json::array({
        {
            {"applies_to", {"gas_boiler", "hp_boiler"}},
            {"replacement",
             {{"kind", "hp_boiler"},
              {"efficiency", 9.5},
              {"cop_47", 4.0},
              {"cop_17", 2.5},
              {"supplemental", "electric_resistance"}}},
        },
        {
            {"applies_to", {"gas_furnace", "electric_resistance", "commercial_hp_rtu"}},
            {"replacement",
             {{"kind", "commercial_hp_rtu"},
              {"efficiency", 9.0},
              {"cop_47", 3.9},
              {"cop_17", 2.3},
              {"supplemental", "electric_resistance"}}},
            {"min_cooling_seer", 15.0},
        },
    });
}

nlohmann::json efficiency_package() {
    return {{"name", "efficiency"},
            {"residential",
             {{"measures", efficiency_measures_res()}, {"lighting_power_multiplier", 0.92}}},
            {"commercial",
             {{"measures", efficiency_measures_com()}, {"lighting_power_multiplier", 0.92}}}};
}

nlohmann::json electrification_package() {
    return {{"name", "electrification"},
            {"residential", {{"heating_replacement", electrification_rules_res()}}},
            {"commercial", {{"heating_replacement", electrification_rules_com()}}}};
}

// Exactly the union of the two single packages, per sector.
nlohmann::json combined_package() {
    return {{"name", "efficiency_electrification"},
            {"residential",
             {{"measures", efficiency_measures_res()},
              {"lighting_power_multiplier", 0.92},
              {"heating_replacement", electrification_rules_res()}}},
            {"commercial",
             {{"measures", efficiency_measures_com()},
              {"lighting_power_multiplier", 0.92},
              {"heating_replacement", electrification_rules_com()}}}};
}

// --- run configs --------------------------------------------------------------

nlohmann::json weather_block(const std::string& prefix) {
    nlohmann::json j;
    for (const Zone& z : zones()) j[z.id] = prefix + z.id + ".csv";
    return j;
}

nlohmann::json run_config(std::size_t sample_size, bool with_transfer) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["seed"] = 20210215;
    j["sample_size"] = sample_size;
    j["base_temperature_c"] = 18.5;
    j["analysis_month"] = 2;
    j["weather"] = weather_block("../fixtures/weather_2021/");
    j["population_csv"] = "../fixtures/population.csv";
    j["grid_csv"] = "../fixtures/grid_2021.csv";
    j["fractions_csv"] = "../fixtures/fractions.csv";
    j["distributions"] = {{"residential", "residential.json"}, {"commercial", "commercial.json"}};
    j["packages"] = {"packages/efficiency.json", "packages/electrification.json",
                     "packages/efficiency_electrification.json"};
    j["scenarios"] = {"baseline", "efficiency", "electrification", "efficiency_electrification"};
    j["convergence_sizes"] = {500, 1000, 2000, 5000, 10000};
    if (with_transfer) {
        j["transfer"] = {{"commercial", {{"weather", weather_block("../fixtures/weather_2018/")}}}};
    }
    j["out_dir"] = "out";
    return j;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    out << j.dump(2) << "\n";
    if (!out) throw stockload::DataError("failed to write " + path.string());
}

}  // namespace

int main(int argc, char** argv) {
    try {
        const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::path("data");
        const fs::path fixtures = root / "fixtures";
        const fs::path texas = root / "texas_like";
        fs::create_directories(fixtures);
        fs::create_directories(texas / "packages");

        const YearShape analysis{2021, 20.2, 9.8, 4.3, true, 0.0};
        const YearShape reference{2018, 19.6, 10.2, 4.4, false, 7.0};

        write_weather(fixtures / "weather_2021", analysis);
        write_weather(fixtures / "weather_2018", reference);
        write_population(fixtures / "population.csv");
        write_fractions(fixtures / "fractions.csv");
        write_grid(fixtures / "grid_2021.csv", analysis);

        write_json(texas / "residential.json", residential_distribution());
        write_json(texas / "commercial.json", commercial_distribution());
        write_json(texas / "packages" / "efficiency.json", efficiency_package());
        write_json(texas / "packages" / "electrification.json", electrification_package());
        write_json(texas / "packages" / "efficiency_electrification.json", combined_package());
        write_json(texas / "uri.json", run_config(2500, false));
        write_json(texas / "uri_transfer.json", run_config(2500, true));
        write_json(texas / "mini.json", run_config(40, false));

        std::printf("fixtures written under %s\n", root.string().c_str());
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
