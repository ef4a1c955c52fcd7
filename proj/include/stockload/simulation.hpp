#pragma once

// Simplified single-zone hourly building simulation.
//
// Each hour is an independent steady-state balance: conductive and
// infiltration losses against the thermostat setpoints, offset by internal
// gains, with no thermal mass. Loads the equipment cannot serve are recorded
// as unmet thermal energy rather than fed back into an indoor-temperature
// state. This trades indoor-dynamics fidelity for reproducibility; aggregate
// stock-level trends are the quantity of interest.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "stockload/core.hpp"
#include "stockload/csv.hpp"
#include "stockload/stock.hpp"
#include "stockload/weather.hpp"

namespace stockload::sim {

using stock::BuildingSample;
using stock::Fuel;
using stock::HvacKind;
using stock::Sector;
using stock::SupplementalKind;

inline constexpr double kSeerToCop = 0.293;  // Wh per Btu: SEER (Btu/Wh) -> COP

struct ZoneDesignTemps {
    double heating_c = 0.0;  // e.g. 99th-percentile cold hour
    double cooling_c = 0.0;  // e.g. 99th-percentile hot hour
};

struct SimulationParams {
    double wall_height_m = 3.0;
    double ach50_divisor = 20.0;            // natural ACH = ACH50 / divisor
    double air_heat_j_per_m3k = 1206.0;     // volumetric heat capacity of air
    double duct_loss_coefficient = 0.07;    // conduction loss fraction = coeff / duct_r
    double gas_fan_share = 0.03;            // air-handler electricity per unit served gas heat
    double sizing_margin = 1.25;
    double min_capacity_kw = 1.0;
    std::map<std::string, ZoneDesignTemps> design_temperatures;  // zone_id ->
};

struct EnvelopeSpec {
    double ua_envelope_w_per_k = 0.0;      // ceiling + walls
    double infiltration_ua_w_per_k = 0.0;  // air leakage expressed as a conductance
    double duct_distribution_efficiency = 1.0;  // (0, 1]
    double floor_area_m2 = 0.0;

    double ua_total() const { return ua_envelope_w_per_k + infiltration_ua_w_per_k; }

    void validate() const {
        if (ua_envelope_w_per_k < 0.0 || infiltration_ua_w_per_k < 0.0) {
            throw InternalError("envelope conductances must be nonnegative");
        }
        if (!(duct_distribution_efficiency > 0.0 && duct_distribution_efficiency <= 1.0)) {
            throw InternalError("duct distribution efficiency must be in (0, 1]");
        }
    }
};

struct HvacSystem {
    HvacKind kind = HvacKind::electric_resistance;
    double heating_capacity_kw = 0.0;  // kW_th; heat pumps: rated at 8.3 °C
    double cooling_capacity_kw = 0.0;  // kW_th
    double cooling_seer = 0.0;         // Btu/Wh
    double heating_rating = 1.0;       // HSPF (Btu/Wh), AFUE fraction, or 1.0
    double cop_47 = 3.8;               // COP at 8.3 °C
    double cop_17 = 2.2;               // COP at -8.3 °C
    double ashp_cutoff_c = -17.8;      // compressor shut-off (0 °F)
    SupplementalKind supplemental = SupplementalKind::none;
    double supplemental_efficiency = 1.0;

    void validate() const {
        if (heating_capacity_kw <= 0.0 || cooling_capacity_kw <= 0.0) {
            throw InternalError("HVAC capacities must be positive after auto-sizing");
        }
        if (cooling_seer <= 0.0) throw InternalError("SEER must be positive");
        if (heating_rating <= 0.0) throw InternalError("heating rating must be positive");
        if (stock::is_gas_fired(kind) && heating_rating > 1.0) {
            throw InternalError("gas heating rating is an AFUE fraction");
        }
    }
};

struct ThermalLoads {
    std::vector<double> heating_kwh_th;  // at the equipment, duct losses included
    std::vector<double> cooling_kwh_th;
};

struct HourlyEndUseDemand {
    std::vector<double> heating_kwh_e;
    std::vector<double> cooling_kwh_e;
    std::vector<double> other_kwh_e;
    std::vector<double> gas_kwh_th;
    std::vector<double> unmet_kwh_th;
    // Served thermal energy, kept so energy accounting (served + unmet ==
    // requested) stays checkable after the fact.
    std::vector<double> served_heating_kwh_th;
    std::vector<double> served_cooling_kwh_th;
};

// Hour-of-day occupancy/usage multipliers scaling plug and lighting power.
// Fixed shapes: residential peaks in the evening, commercial during business
// hours; weekends are flatter.
inline double occupancy_multiplier(Sector sector, bool weekend, int hour) {
    static constexpr double res_wd[24] = {0.45, 0.45, 0.45, 0.45, 0.45, 0.5, 0.7,  0.8,
                                          0.7,  0.55, 0.5,  0.5,  0.5,  0.5, 0.5,  0.55,
                                          0.65, 0.8,  0.95, 1.0,  1.0,  0.9, 0.7,  0.55};
    static constexpr double res_we[24] = {0.5,  0.5,  0.5,  0.45, 0.45, 0.5, 0.55, 0.65,
                                          0.75, 0.8,  0.8,  0.75, 0.7,  0.7, 0.7,  0.7,
                                          0.75, 0.85, 0.95, 1.0,  1.0,  0.9, 0.75, 0.6};
    static constexpr double com_wd[24] = {0.35, 0.35, 0.35, 0.35, 0.35, 0.4,  0.55, 0.75,
                                          0.95, 1.0,  1.0,  1.0,  1.0,  1.0,  1.0,  1.0,
                                          0.95, 0.85, 0.7,  0.55, 0.45, 0.4,  0.35, 0.35};
    static constexpr double com_we[24] = {0.35, 0.35, 0.35, 0.35, 0.35, 0.35, 0.4,  0.45,
                                          0.5,  0.55, 0.55, 0.55, 0.55, 0.5,  0.5,  0.45,
                                          0.45, 0.4,  0.4,  0.4,  0.35, 0.35, 0.35, 0.35};
    if (sector == Sector::residential) return weekend ? res_we[hour] : res_wd[hour];
    return weekend ? com_we[hour] : com_wd[hour];
}

inline EnvelopeSpec derive_envelope(const BuildingSample& b,
                                    const SimulationParams& params = {}) {
    if (b.floor_area_m2 <= 0.0 || b.ceiling_r <= 0.0 || b.wall_r <= 0.0 || b.duct_r <= 0.0) {
        throw InternalError("building '" + b.building_id + "' has nonpositive envelope parameters");
    }
    EnvelopeSpec env;
    env.floor_area_m2 = b.floor_area_m2;
    // Square footprint approximation for the wall area.
    const double side = std::sqrt(b.floor_area_m2);
    const double wall_area = 4.0 * side * params.wall_height_m;
    env.ua_envelope_w_per_k = b.floor_area_m2 / b.ceiling_r + wall_area / b.wall_r;
    const double volume = b.floor_area_m2 * params.wall_height_m;
    const double natural_ach = b.ach50 / params.ach50_divisor;
    env.infiltration_ua_w_per_k = natural_ach * volume * params.air_heat_j_per_m3k / 3600.0;
    const double conduction_loss =
        std::min(0.5, params.duct_loss_coefficient / b.duct_r);
    env.duct_distribution_efficiency = (1.0 - b.duct_leakage_fraction) * (1.0 - conduction_loss);
    env.validate();
    return env;
}

// Internal electric load (plug + lighting) in watts for one hour; doubles as
// the interior heat gain.
inline double internal_load_w(const BuildingSample& b, bool weekend, int hour) {
    const double mult = occupancy_multiplier(b.sector, weekend, hour);
    return (b.internal_gains_w_per_m2 + b.lighting_power_density_w_per_m2) * mult
           * b.floor_area_m2;
}

inline ThermalLoads thermal_load(const BuildingSample& b,
                                 const weather::ZoneWeatherSeries& weather,
                                 const SimulationParams& params = {}) {
    const EnvelopeSpec env = derive_envelope(b, params);
    const double ua = env.ua_total();
    ThermalLoads loads;
    loads.heating_kwh_th.reserve(weather.dry_bulb.size());
    loads.cooling_kwh_th.reserve(weather.dry_bulb.size());
    for (std::size_t h = 0; h < weather.dry_bulb.size(); ++h) {
        const bool weekend = iso_weekday(weather.timestamps[h]) >= 6;
        const int hod = epoch_to_civil(weather.timestamps[h]).hour;
        const double gains = internal_load_w(b, weekend, hod);
        const double t = weather.dry_bulb[h];
        const double heat_w = std::max(0.0, ua * (b.heat_setpoint_c - t) - gains);
        const double cool_w = std::max(0.0, ua * (t - b.cool_setpoint_c) + gains);
        loads.heating_kwh_th.push_back(heat_w / 1000.0 / env.duct_distribution_efficiency);
        loads.cooling_kwh_th.push_back(cool_w / 1000.0 / env.duct_distribution_efficiency);
    }
    return loads;
}

inline HvacSystem autosize(const BuildingSample& b, const SimulationParams& params = {}) {
    const auto it = params.design_temperatures.find(b.zone_id);
    if (it == params.design_temperatures.end()) {
        throw ConfigError("no design temperatures configured for zone '" + b.zone_id + "'");
    }
    const EnvelopeSpec env = derive_envelope(b, params);
    const double ua = env.ua_total();
    HvacSystem sys;
    sys.kind = b.heating.kind;
    sys.cooling_seer = b.cooling_seer;
    sys.heating_rating = b.heating.efficiency;
    sys.ashp_cutoff_c = b.heating.ashp_cutoff_c;
    sys.supplemental = b.heating.supplemental;
    sys.supplemental_efficiency = b.heating.supplemental_efficiency;
    if (stock::is_heat_pump(b.heating.kind)) {
        // Anchors default to the unit's HSPF scaled against a 9.3-HSPF
        // reference curve (COP 3.8 at 8.3 °C, 2.2 at -8.3 °C).
        sys.cop_47 = b.heating.cop_47 > 0.0 ? b.heating.cop_47 : 3.8 * b.heating.efficiency / 9.3;
        sys.cop_17 = b.heating.cop_17 > 0.0 ? b.heating.cop_17 : 2.2 * b.heating.efficiency / 9.3;
    }
    // Design heating load excludes gains (design night); cooling includes the
    // peak internal load since hot-afternoon peaks coincide with usage.
    const double heat_w = ua * std::max(0.0, b.heat_setpoint_c - it->second.heating_c);
    const double peak_gains = (b.internal_gains_w_per_m2 + b.lighting_power_density_w_per_m2)
                              * b.floor_area_m2;
    const double cool_w = ua * std::max(0.0, it->second.cooling_c - b.cool_setpoint_c) + peak_gains;
    sys.heating_capacity_kw =
        std::max(params.min_capacity_kw, params.sizing_margin * heat_w / 1000.0
                                             / env.duct_distribution_efficiency);
    sys.cooling_capacity_kw =
        std::max(params.min_capacity_kw, params.sizing_margin * cool_w / 1000.0
                                             / env.duct_distribution_efficiency);
    sys.validate();
    return sys;
}

struct CopPoint {
    double cop = 0.0;                // 0 below the cutoff
    double capacity_fraction = 0.0;  // of rated (8.3 °C) capacity
};

inline CopPoint heat_pump_cop(const HvacSystem& sys, double t_out_c) {
    if (!stock::is_heat_pump(sys.kind)) {
        throw InternalError("heat_pump_cop called for non-heat-pump kind '"
                            + stock::to_string(sys.kind) + "'");
    }
    if (t_out_c < sys.ashp_cutoff_c) return {0.0, 0.0};
    CopPoint p;
    // Linear through (8.3, cop_47) and (-8.3, cop_17), extrapolated, floor 1.
    const double slope = (sys.cop_47 - sys.cop_17) / (8.3 - (-8.3));
    p.cop = std::max(1.0, sys.cop_17 + slope * (t_out_c - (-8.3)));
    // Available capacity shrinks as it gets colder: 1.0 at 8.3 °C down to
    // 0.55 at -17.8 °C, clamped to [0.55, 1.15].
    const double cap_slope = (1.0 - 0.55) / (8.3 - (-17.8));
    p.capacity_fraction = std::clamp(1.0 + cap_slope * (t_out_c - 8.3), 0.55, 1.15);
    return p;
}

inline HourlyEndUseDemand hvac_electricity(const ThermalLoads& loads, const HvacSystem& sys,
                                           const weather::ZoneWeatherSeries& weather,
                                           const SimulationParams& params = {}) {
    const std::size_t n = weather.dry_bulb.size();
    if (loads.heating_kwh_th.size() != n || loads.cooling_kwh_th.size() != n) {
        throw InternalError("hvac_electricity: loads and weather misaligned");
    }
    sys.validate();
    HourlyEndUseDemand d;
    for (auto* v : {&d.heating_kwh_e, &d.cooling_kwh_e, &d.other_kwh_e, &d.gas_kwh_th,
                    &d.unmet_kwh_th, &d.served_heating_kwh_th, &d.served_cooling_kwh_th}) {
        v->assign(n, 0.0);
    }
    const double cooling_cop = sys.cooling_seer * kSeerToCop;
    for (std::size_t h = 0; h < n; ++h) {
        const double t = weather.dry_bulb[h];
        const double load = loads.heating_kwh_th[h];
        double served = 0.0;
        switch (sys.kind) {
            case HvacKind::electric_resistance: {
                served = std::min(load, sys.heating_capacity_kw);
                d.heating_kwh_e[h] += served;
                break;
            }
            case HvacKind::gas_furnace:
            case HvacKind::gas_boiler: {
                served = std::min(load, sys.heating_capacity_kw);
                d.gas_kwh_th[h] += served / sys.heating_rating;
                d.heating_kwh_e[h] += params.gas_fan_share * served;  // air handler
                break;
            }
            case HvacKind::ashp:
            case HvacKind::commercial_hp_rtu:
            case HvacKind::hp_boiler: {
                const CopPoint p = heat_pump_cop(sys, t);
                const double hp_served = std::min(load, p.capacity_fraction
                                                            * sys.heating_capacity_kw);
                if (hp_served > 0.0) d.heating_kwh_e[h] += hp_served / p.cop;
                // Supplemental tops the unit back up to rated capacity, so a
                // derated heat pump never out-delivers the equivalent
                // resistance system; below the cutoff it carries everything.
                const double supp_cap = std::max(0.0, sys.heating_capacity_kw - hp_served);
                double supp = 0.0;
                if (sys.supplemental != SupplementalKind::none) {
                    supp = std::min(load - hp_served, supp_cap);
                    if (sys.supplemental == SupplementalKind::electric_resistance) {
                        d.heating_kwh_e[h] += supp;
                    } else {
                        d.gas_kwh_th[h] += supp / sys.supplemental_efficiency;
                    }
                }
                served = hp_served + supp;
                break;
            }
        }
        d.served_heating_kwh_th[h] = served;
        d.unmet_kwh_th[h] += load - served;

        const double cool_load = loads.cooling_kwh_th[h];
        const double cool_served = std::min(cool_load, sys.cooling_capacity_kw);
        d.cooling_kwh_e[h] += cool_served / cooling_cop;
        d.served_cooling_kwh_th[h] = cool_served;
        d.unmet_kwh_th[h] += cool_load - cool_served;
    }
    return d;
}

inline HourlyEndUseDemand simulate_building(const BuildingSample& b,
                                            const weather::ZoneWeatherSeries& weather,
                                            const SimulationParams& params = {}) {
    const ThermalLoads loads = thermal_load(b, weather, params);
    const HvacSystem sys = autosize(b, params);
    HourlyEndUseDemand d = hvac_electricity(loads, sys, weather, params);
    for (std::size_t h = 0; h < weather.dry_bulb.size(); ++h) {
        const bool weekend = iso_weekday(weather.timestamps[h]) >= 6;
        const int hod = epoch_to_civil(weather.timestamps[h]).hour;
        d.other_kwh_e[h] = internal_load_w(b, weekend, hod) / 1000.0;
    }
    return d;
}

// Weighted sector aggregate, MW per hour.
struct SectorDemand {
    std::vector<double> heating_mw;
    std::vector<double> cooling_mw;
    std::vector<double> other_mw;
    std::vector<double> gas_mwth;
    std::vector<double> unmet_mwth;

    std::size_t hours() const { return heating_mw.size(); }
};

namespace detail {

// Chunked deterministic reduction. Buildings are processed in building_id
// order in fixed chunks of 64; per-chunk partial sums are folded in chunk
// order. The result is bit-identical for any thread count and any input
// permutation.
inline constexpr std::size_t kAggregationChunk = 64;

struct ChunkPartial {
    std::vector<double> series[5];
};

template <typename DemandOfIndex>
SectorDemand reduce_in_chunks(std::vector<std::size_t> order, std::size_t hours,
                              DemandOfIndex&& demand_of, unsigned threads) {
    const std::size_t n_chunks = (order.size() + kAggregationChunk - 1) / kAggregationChunk;
    std::vector<ChunkPartial> partials(n_chunks);
    std::atomic<std::size_t> next_chunk{0};
    auto work = [&]() {
        while (true) {
            const std::size_t c = next_chunk.fetch_add(1);
            if (c >= n_chunks) return;
            ChunkPartial& p = partials[c];
            for (auto& s : p.series) s.assign(hours, 0.0);
            const std::size_t lo = c * kAggregationChunk;
            const std::size_t hi = std::min(order.size(), lo + kAggregationChunk);
            for (std::size_t i = lo; i < hi; ++i) {
                demand_of(order[i], p);
            }
        }
    };
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    SectorDemand out;
    std::vector<double>* series[5] = {&out.heating_mw, &out.cooling_mw, &out.other_mw,
                                      &out.gas_mwth, &out.unmet_mwth};
    for (auto* s : series) s->assign(hours, 0.0);
    for (const ChunkPartial& p : partials) {
        for (int k = 0; k < 5; ++k) {
            for (std::size_t h = 0; h < hours; ++h) (*series[k])[h] += p.series[k][h];
        }
    }
    return out;
}

inline std::vector<std::size_t> id_sorted_order(const std::vector<BuildingSample>& samples) {
    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return samples[a].building_id < samples[b].building_id;
    });
    return order;
}

inline void add_weighted(const BuildingSample& b, const HourlyEndUseDemand& d, ChunkPartial& p) {
    const double f = stock::replication_factor(b) / 1000.0;  // kWh -> MWh(=MW over 1 h)
    const std::vector<double>* src[5] = {&d.heating_kwh_e, &d.cooling_kwh_e, &d.other_kwh_e,
                                         &d.gas_kwh_th, &d.unmet_kwh_th};
    for (int k = 0; k < 5; ++k) {
        for (std::size_t h = 0; h < p.series[k].size(); ++h) {
            p.series[k][h] += f * (*src[k])[h];
        }
    }
}

}  // namespace detail

inline SectorDemand aggregate_sector(const std::vector<BuildingSample>& samples,
                                     const std::vector<HourlyEndUseDemand>& demands,
                                     unsigned threads = 1) {
    if (samples.size() != demands.size()) {
        throw InternalError("aggregate_sector: samples/demands length mismatch");
    }
    if (samples.empty()) throw InternalError("aggregate_sector: empty input");
    const std::size_t hours = demands.front().heating_kwh_e.size();
    for (const auto& d : demands) {
        if (d.heating_kwh_e.size() != hours || d.cooling_kwh_e.size() != hours
            || d.other_kwh_e.size() != hours || d.gas_kwh_th.size() != hours
            || d.unmet_kwh_th.size() != hours) {
            throw InternalError("aggregate_sector: misaligned demand series");
        }
    }
    return detail::reduce_in_chunks(
        detail::id_sorted_order(samples), hours,
        [&](std::size_t i, detail::ChunkPartial& p) { detail::add_weighted(samples[i], demands[i], p); },
        threads);
}

// Simulate-and-fold in one pass so 10k buildings never hold 10k full-year
// demand series in memory at once.
inline SectorDemand simulate_and_aggregate(
    const std::vector<BuildingSample>& samples,
    const std::map<std::string, weather::ZoneWeatherSeries>& weather_by_zone,
    const SimulationParams& params = {}, unsigned threads = 1) {
    if (samples.empty()) throw InternalError("simulate_and_aggregate: empty sample set");
    std::size_t hours = 0;
    for (const auto& b : samples) {
        const auto it = weather_by_zone.find(b.zone_id);
        if (it == weather_by_zone.end()) {
            throw ConfigError("no weather series for zone '" + b.zone_id + "'");
        }
        hours = it->second.dry_bulb.size();
    }
    return detail::reduce_in_chunks(
        detail::id_sorted_order(samples), hours,
        [&](std::size_t i, detail::ChunkPartial& p) {
            const BuildingSample& b = samples[i];
            const HourlyEndUseDemand d =
                simulate_building(b, weather_by_zone.at(b.zone_id), params);
            detail::add_weighted(b, d, p);
        },
        threads);
}

// Debug dump: one row per hour of a single building's demand.
inline void write_demand_csv(const HourlyEndUseDemand& d, const std::filesystem::path& path) {
    csv::Writer w(path);
    w.row({"hour", "heating_kwh_e", "cooling_kwh_e", "other_kwh_e", "gas_kwh_th", "unmet_kwh_th"});
    for (std::size_t h = 0; h < d.heating_kwh_e.size(); ++h) {
        w.row({std::to_string(h), format_double(d.heating_kwh_e[h]),
               format_double(d.cooling_kwh_e[h]), format_double(d.other_kwh_e[h]),
               format_double(d.gas_kwh_th[h]), format_double(d.unmet_kwh_th[h])});
    }
    w.close();
}

// Annual per-building electricity, the convergence-scan metric.
inline double annual_electricity_kwh(const HourlyEndUseDemand& d) {
    double sum = 0.0;
    for (std::size_t h = 0; h < d.heating_kwh_e.size(); ++h) {
        sum += d.heating_kwh_e[h] + d.cooling_kwh_e[h] + d.other_kwh_e[h];
    }
    return sum;
}

}  // namespace stockload::sim
