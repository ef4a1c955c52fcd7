#pragma once

// Synthetic building-stock sampling from configurable marginal distributions.
//
// Marginals are sampled independently (no joint structure). Determinism
// contract: identical (distribution, n, seed) yields bit-identical samples on
// any platform. Draws use std::mt19937_64 (bit-stable per the C++ standard)
// with uniform doubles built as (x >> 11) * 2^-53, ordered by sorted
// parameter name and then building index, so neither marginal declaration
// order nor std::uniform_* implementation details can perturb results.

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "stockload/core.hpp"
#include "stockload/csv.hpp"

namespace stockload::stock {

enum class Sector { residential, commercial };

enum class HvacKind {
    electric_resistance,
    gas_furnace,
    ashp,                // residential air-source heat pump
    commercial_hp_rtu,   // heat-pump rooftop unit
    hp_boiler,           // heat-pump boiler
    gas_boiler,
};

enum class Fuel { electricity, natural_gas };

enum class SupplementalKind { none, electric_resistance, gas };

inline bool is_heat_pump(HvacKind k) {
    return k == HvacKind::ashp || k == HvacKind::commercial_hp_rtu || k == HvacKind::hp_boiler;
}

inline bool is_gas_fired(HvacKind k) {
    return k == HvacKind::gas_furnace || k == HvacKind::gas_boiler;
}

inline std::string to_string(Sector s) {
    return s == Sector::residential ? "residential" : "commercial";
}

inline Sector parse_sector(const std::string& s) {
    if (s == "residential") return Sector::residential;
    if (s == "commercial") return Sector::commercial;
    throw ConfigError("unknown sector '" + s + "'");
}

inline std::string to_string(HvacKind k) {
    switch (k) {
        case HvacKind::electric_resistance: return "electric_resistance";
        case HvacKind::gas_furnace: return "gas_furnace";
        case HvacKind::ashp: return "ashp";
        case HvacKind::commercial_hp_rtu: return "commercial_hp_rtu";
        case HvacKind::hp_boiler: return "hp_boiler";
        case HvacKind::gas_boiler: return "gas_boiler";
    }
    throw InternalError("unhandled HvacKind");
}

inline HvacKind parse_hvac_kind(const std::string& s) {
    if (s == "electric_resistance") return HvacKind::electric_resistance;
    if (s == "gas_furnace") return HvacKind::gas_furnace;
    if (s == "ashp") return HvacKind::ashp;
    if (s == "commercial_hp_rtu") return HvacKind::commercial_hp_rtu;
    if (s == "hp_boiler") return HvacKind::hp_boiler;
    if (s == "gas_boiler") return HvacKind::gas_boiler;
    throw ConfigError("unknown heating kind '" + s + "'");
}

inline std::string to_string(Fuel f) {
    return f == Fuel::electricity ? "electricity" : "natural_gas";
}

inline std::string to_string(SupplementalKind k) {
    switch (k) {
        case SupplementalKind::none: return "none";
        case SupplementalKind::electric_resistance: return "electric_resistance";
        case SupplementalKind::gas: return "gas";
    }
    throw InternalError("unhandled SupplementalKind");
}

inline SupplementalKind parse_supplemental(const std::string& s) {
    if (s == "none") return SupplementalKind::none;
    if (s == "electric_resistance") return SupplementalKind::electric_resistance;
    if (s == "gas") return SupplementalKind::gas;
    throw ConfigError("unknown supplemental heat kind '" + s + "'");
}

// R-value unit note: all R-values are SI (m²K/W). Converting from the
// imperial ratings common in US practice: R_SI = 0.1761 * R_imperial, so
// e.g. imperial R-38 ceiling insulation is 6.69 m²K/W.
inline constexpr double kRValueImperialToSi = 0.1761;

struct HeatingSystemSpec {
    HvacKind kind = HvacKind::electric_resistance;
    Fuel fuel = Fuel::electricity;
    // resistance: 1.0; gas furnace/boiler: AFUE (0..1]; heat pumps: HSPF (Btu/Wh).
    double efficiency = 1.0;
    SupplementalKind supplemental = SupplementalKind::none;
    double supplemental_efficiency = 1.0;  // AFUE when supplemental == gas
    double cop_47 = 0.0;  // COP at 8.3 °C (47 °F); 0 means derive from HSPF
    double cop_17 = 0.0;  // COP at -8.3 °C (17 °F); 0 means derive from HSPF
    double ashp_cutoff_c = -17.8;  // compressor shut-off, 0 °F

    bool operator==(const HeatingSystemSpec&) const = default;

    void validate() const {
        if (efficiency <= 0.0) throw ConfigError("heating efficiency must be positive");
        if (is_gas_fired(kind)) {
            if (fuel != Fuel::natural_gas) {
                throw ConfigError("heating kind '" + to_string(kind) + "' must burn natural_gas");
            }
            if (efficiency > 1.0) {
                throw ConfigError("gas heating efficiency is an AFUE fraction, got "
                                  + format_double(efficiency));
            }
        } else if (fuel != Fuel::electricity) {
            throw ConfigError("heating kind '" + to_string(kind) + "' must be electric");
        }
        if (kind == HvacKind::electric_resistance && efficiency != 1.0) {
            throw ConfigError("electric resistance heating efficiency must be 1.0");
        }
        if (is_heat_pump(kind)) {
            if (cop_47 < 0.0 || cop_17 < 0.0) throw ConfigError("COP anchors must be nonnegative");
            if (cop_47 > 0.0 && cop_17 > 0.0 && cop_17 > cop_47) {
                throw ConfigError("cop_17 must not exceed cop_47");
            }
        } else if (supplemental != SupplementalKind::none) {
            throw ConfigError("supplemental heat only applies to heat pumps");
        }
        if (supplemental == SupplementalKind::gas
            && (supplemental_efficiency <= 0.0 || supplemental_efficiency > 1.0)) {
            throw ConfigError("gas supplemental efficiency is an AFUE fraction");
        }
    }
};

struct BuildingSample {
    std::string building_id;
    Sector sector = Sector::residential;
    std::string zone_id;
    std::string building_type;  // commercial only; empty for residential
    double floor_area_m2 = 0.0;
    double ceiling_r = 0.0;  // SI m²K/W
    double wall_r = 0.0;     // SI m²K/W
    double ach50 = 0.0;      // air changes/hour at 50 Pa
    double duct_leakage_fraction = 0.0;
    double duct_r = 0.0;     // SI m²K/W
    HeatingSystemSpec heating;
    double cooling_seer = 0.0;  // Btu/Wh
    double heat_setpoint_c = 0.0;
    double cool_setpoint_c = 0.0;
    double internal_gains_w_per_m2 = 0.0;  // plug + occupant gains, excl. lighting
    double lighting_power_density_w_per_m2 = 0.0;
    bool has_led_lighting = false;
    // Residential: number of real buildings represented. Commercial: m² of
    // floorspace represented (aggregation divides by floor_area_m2).
    double weight = 1.0;
};

using ParamValue = std::variant<double, std::string, HeatingSystemSpec>;

struct Marginal {
    std::vector<ParamValue> values;
    std::vector<double> probabilities;
};

// Marginal parameter names accepted in distribution configs.
inline const std::vector<std::string>& known_parameters() {
    static const std::vector<std::string> names = {
        "zone", "building_type", "floor_area_m2", "ceiling_r", "wall_r", "ach50",
        "duct_leakage_fraction", "duct_r", "heating_system", "cooling_seer",
        "heat_setpoint_c", "cool_setpoint_c", "internal_gains_w_per_m2",
        "lighting_power_density_w_per_m2",
    };
    return names;
}

struct ArchetypeDistribution {
    Sector sector = Sector::residential;
    // residential: building count; commercial: modeled floorspace m² (the
    // covered share, before the coverage_fraction scale-up).
    double totals = 0.0;
    double coverage_fraction = 1.0;
    std::map<std::string, Marginal> marginals;

    void validate() const {
        if (totals <= 0.0) throw ConfigError("distribution totals must be positive");
        if (!(coverage_fraction > 0.0 && coverage_fraction <= 1.0)) {
            throw ConfigError("coverage_fraction must be in (0, 1]");
        }
        for (const std::string& name : known_parameters()) {
            const bool required = name != "building_type" || sector == Sector::commercial;
            if (required && !marginals.count(name)) {
                throw ConfigError("missing marginal '" + name + "'");
            }
        }
        if (sector == Sector::residential && marginals.count("building_type")) {
            throw ConfigError("building_type marginal is commercial-only");
        }
        for (const auto& [name, m] : marginals) {
            validate_marginal(name, m);
        }
        // Independent sampling can pair any heat setpoint with any cool
        // setpoint, so the ordering must hold across the full supports.
        double max_heat = -1e9, min_cool = 1e9;
        for (const auto& v : marginals.at("heat_setpoint_c").values) {
            max_heat = std::max(max_heat, std::get<double>(v));
        }
        for (const auto& v : marginals.at("cool_setpoint_c").values) {
            min_cool = std::min(min_cool, std::get<double>(v));
        }
        if (max_heat >= min_cool) {
            throw ConfigError("heat_setpoint_c values must all lie below cool_setpoint_c values");
        }
    }

private:
    static void validate_marginal(const std::string& name, const Marginal& m) {
        if (m.values.empty()) throw ConfigError("marginal '" + name + "' is empty");
        if (m.values.size() != m.probabilities.size()) {
            throw ConfigError("marginal '" + name + "': values/probabilities length mismatch");
        }
        double sum = 0.0;
        for (double p : m.probabilities) {
            if (p < 0.0) throw ConfigError("marginal '" + name + "': negative probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw ConfigError("marginal '" + name + "': probabilities sum to "
                              + format_double(sum) + ", expected 1.0");
        }
        const bool is_string = name == "zone" || name == "building_type";
        const bool is_system = name == "heating_system";
        for (const auto& v : m.values) {
            if (is_string) {
                if (!std::holds_alternative<std::string>(v) || std::get<std::string>(v).empty()) {
                    throw ConfigError("marginal '" + name + "': expected nonempty string values");
                }
            } else if (is_system) {
                if (!std::holds_alternative<HeatingSystemSpec>(v)) {
                    throw ConfigError("marginal 'heating_system': expected system objects");
                }
                std::get<HeatingSystemSpec>(v).validate();
            } else {
                if (!std::holds_alternative<double>(v)) {
                    throw ConfigError("marginal '" + name + "': expected numeric values");
                }
                const double x = std::get<double>(v);
                const bool fraction = name == "duct_leakage_fraction";
                const bool gains = name == "internal_gains_w_per_m2"
                                   || name == "lighting_power_density_w_per_m2";
                const bool setpoint = name == "heat_setpoint_c" || name == "cool_setpoint_c";
                if (fraction) {
                    if (x < 0.0 || x >= 1.0) {
                        throw ConfigError("duct_leakage_fraction must be in [0, 1)");
                    }
                } else if (gains) {
                    if (x < 0.0) throw ConfigError("marginal '" + name + "': negative value");
                } else if (!setpoint && x <= 0.0) {
                    throw ConfigError("marginal '" + name + "': values must be positive");
                }
            }
        }
    }
};

namespace detail {

// Uniform double in [0, 1) from the top 53 bits; avoids the
// implementation-defined behaviour of std::uniform_real_distribution.
inline double next_u01(std::mt19937_64& rng) {
    return double(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t draw_index(const Marginal& m, double u) {
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < m.probabilities.size(); ++i) {
        cum += m.probabilities[i];
        if (u < cum) return i;
    }
    return m.probabilities.size() - 1;
}

inline void assign(BuildingSample& b, const std::string& name, const ParamValue& v) {
    if (name == "zone") b.zone_id = std::get<std::string>(v);
    else if (name == "building_type") b.building_type = std::get<std::string>(v);
    else if (name == "floor_area_m2") b.floor_area_m2 = std::get<double>(v);
    else if (name == "ceiling_r") b.ceiling_r = std::get<double>(v);
    else if (name == "wall_r") b.wall_r = std::get<double>(v);
    else if (name == "ach50") b.ach50 = std::get<double>(v);
    else if (name == "duct_leakage_fraction") b.duct_leakage_fraction = std::get<double>(v);
    else if (name == "duct_r") b.duct_r = std::get<double>(v);
    else if (name == "heating_system") b.heating = std::get<HeatingSystemSpec>(v);
    else if (name == "cooling_seer") b.cooling_seer = std::get<double>(v);
    else if (name == "heat_setpoint_c") b.heat_setpoint_c = std::get<double>(v);
    else if (name == "cool_setpoint_c") b.cool_setpoint_c = std::get<double>(v);
    else if (name == "internal_gains_w_per_m2") b.internal_gains_w_per_m2 = std::get<double>(v);
    else if (name == "lighting_power_density_w_per_m2") {
        b.lighting_power_density_w_per_m2 = std::get<double>(v);
    } else {
        throw ConfigError("unknown marginal '" + name + "'");
    }
}

}  // namespace detail

inline std::vector<BuildingSample> sample_stock(const ArchetypeDistribution& dist, std::size_t n,
                                                std::uint64_t seed) {
    if (n == 0) throw ConfigError("sample size must be at least 1");
    dist.validate();
    std::vector<BuildingSample> out(n);
    const char* prefix = dist.sector == Sector::residential ? "res-" : "com-";
    for (std::size_t i = 0; i < n; ++i) {
        char id[32];
        std::snprintf(id, sizeof(id), "%s%06zu", prefix, i + 1);
        out[i].building_id = id;
        out[i].sector = dist.sector;
    }
    std::mt19937_64 rng(seed);
    // std::map iterates in sorted key order: parameter-major, building-minor.
    for (const auto& [name, marginal] : dist.marginals) {
        for (std::size_t i = 0; i < n; ++i) {
            const double u = detail::next_u01(rng);
            detail::assign(out[i], name, marginal.values[detail::draw_index(marginal, u)]);
        }
    }
    return out;
}

// Residential: every building represents sector_total/(n*coverage) real
// buildings. Commercial: sector_total is modeled floorspace (m²); each
// building represents floorspace proportional to its own area, scaled by
// 1/coverage so the covered share stands in for the whole sector.
inline void assign_weights(std::vector<BuildingSample>& samples, double sector_total,
                           double coverage_fraction) {
    if (samples.empty()) throw ConfigError("assign_weights: no samples");
    if (sector_total <= 0.0) throw ConfigError("assign_weights: sector_total must be positive");
    if (!(coverage_fraction > 0.0 && coverage_fraction <= 1.0)) {
        throw ConfigError("assign_weights: coverage_fraction must be in (0, 1]");
    }
    if (samples.front().sector == Sector::residential) {
        const double w = sector_total / (double(samples.size()) * coverage_fraction);
        for (auto& b : samples) b.weight = w;
    } else {
        double total_area = 0.0;
        for (const auto& b : samples) total_area += b.floor_area_m2;
        if (total_area <= 0.0) throw ConfigError("assign_weights: zero total floor area");
        for (auto& b : samples) {
            b.weight = sector_total * b.floor_area_m2 / (total_area * coverage_fraction);
        }
    }
}

// Replication multiplier used by aggregation: how many copies of this exact
// building the sample row stands for.
inline double replication_factor(const BuildingSample& b) {
    return b.sector == Sector::commercial ? b.weight / b.floor_area_m2 : b.weight;
}

template <typename AnnualKwhFn>
std::map<std::size_t, double> convergence_scan(const ArchetypeDistribution& dist,
                                               const std::vector<std::size_t>& sizes,
                                               std::uint64_t seed, AnnualKwhFn&& annual_kwh) {
    if (sizes.empty()) throw ConfigError("convergence_scan: no sizes");
    for (std::size_t i = 1; i < sizes.size(); ++i) {
        if (sizes[i] < sizes[i - 1]) throw ConfigError("convergence_scan: sizes must be ascending");
    }
    std::map<std::size_t, double> out;
    for (std::size_t n : sizes) {
        const std::vector<BuildingSample> samples = sample_stock(dist, n, seed);
        double sum = 0.0;
        for (const auto& b : samples) sum += annual_kwh(b);
        out[n] = sum / double(n);
    }
    return out;
}

// --- JSON config ---------------------------------------------------------

inline HeatingSystemSpec heating_system_from_json(const nlohmann::json& j) {
    HeatingSystemSpec h;
    if (!j.is_object() || !j.contains("kind")) {
        throw ConfigError("heating_system values must be objects with a 'kind'");
    }
    h.kind = parse_hvac_kind(j.at("kind").get<std::string>());
    h.fuel = is_gas_fired(h.kind) ? Fuel::natural_gas : Fuel::electricity;
    h.efficiency = j.value("efficiency", h.kind == HvacKind::electric_resistance ? 1.0 : 0.0);
    if (j.contains("supplemental")) {
        h.supplemental = parse_supplemental(j.at("supplemental").get<std::string>());
    }
    h.supplemental_efficiency = j.value("supplemental_efficiency", 1.0);
    h.cop_47 = j.value("cop_47", 0.0);
    h.cop_17 = j.value("cop_17", 0.0);
    h.ashp_cutoff_c = j.value("ashp_cutoff_c", -17.8);
    h.validate();
    return h;
}

inline nlohmann::json heating_system_to_json(const HeatingSystemSpec& h) {
    nlohmann::json j{{"kind", to_string(h.kind)}, {"efficiency", h.efficiency}};
    if (h.supplemental != SupplementalKind::none) {
        j["supplemental"] = to_string(h.supplemental);
        if (h.supplemental == SupplementalKind::gas) {
            j["supplemental_efficiency"] = h.supplemental_efficiency;
        }
    }
    if (h.cop_47 > 0.0) j["cop_47"] = h.cop_47;
    if (h.cop_17 > 0.0) j["cop_17"] = h.cop_17;
    if (h.ashp_cutoff_c != -17.8) j["ashp_cutoff_c"] = h.ashp_cutoff_c;
    return j;
}

inline ArchetypeDistribution distribution_from_json(const nlohmann::json& j) {
    ArchetypeDistribution d;
    try {
        d.sector = parse_sector(j.at("sector").get<std::string>());
        d.totals = j.at("totals").get<double>();
        d.coverage_fraction = j.value("coverage_fraction", 1.0);
        for (const auto& [name, spec] : j.at("marginals").items()) {
            Marginal m;
            const auto& values = spec.at("values");
            const auto& probs = spec.at("probabilities");
            for (const auto& v : values) {
                if (name == "heating_system") m.values.emplace_back(heating_system_from_json(v));
                else if (v.is_string()) m.values.emplace_back(v.get<std::string>());
                else m.values.emplace_back(v.get<double>());
            }
            for (const auto& p : probs) m.probabilities.push_back(p.get<double>());
            d.marginals.emplace(name, std::move(m));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("distribution config: ") + e.what());
    }
    d.validate();
    return d;
}

inline ArchetypeDistribution load_distribution(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file_to_string(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    try {
        return distribution_from_json(j);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

// One row per building, all parameters plus weight.
inline void dump_samples(const std::vector<BuildingSample>& samples,
                         const std::filesystem::path& path) {
    csv::Writer w(path);
    w.row({"building_id", "sector", "zone_id", "building_type", "floor_area_m2", "ceiling_r",
           "wall_r", "ach50", "duct_leakage_fraction", "duct_r", "heating_kind", "heating_fuel",
           "heating_efficiency", "heating_supplemental", "heating_supplemental_efficiency",
           "heating_cop_47", "heating_cop_17", "heating_ashp_cutoff_c", "cooling_seer",
           "heat_setpoint_c", "cool_setpoint_c", "internal_gains_w_per_m2",
           "lighting_power_density_w_per_m2", "has_led_lighting", "weight"});
    for (const auto& b : samples) {
        w.row({b.building_id, to_string(b.sector), b.zone_id, b.building_type,
               format_double(b.floor_area_m2), format_double(b.ceiling_r),
               format_double(b.wall_r), format_double(b.ach50),
               format_double(b.duct_leakage_fraction), format_double(b.duct_r),
               to_string(b.heating.kind), to_string(b.heating.fuel),
               format_double(b.heating.efficiency), to_string(b.heating.supplemental),
               format_double(b.heating.supplemental_efficiency), format_double(b.heating.cop_47),
               format_double(b.heating.cop_17), format_double(b.heating.ashp_cutoff_c),
               format_double(b.cooling_seer), format_double(b.heat_setpoint_c),
               format_double(b.cool_setpoint_c), format_double(b.internal_gains_w_per_m2),
               format_double(b.lighting_power_density_w_per_m2),
               b.has_led_lighting ? "1" : "0", format_double(b.weight)});
    }
    w.close();
}

}  // namespace stockload::stock
