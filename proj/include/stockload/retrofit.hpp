#pragma once

// Upgrade packages with only-if-worse semantics: a measure changes a
// parameter only when the existing value is strictly less efficient than the
// target, and heating electrification replaces a system only when it is
// fossil-fired or electrically less efficient than the replacement.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stockload/core.hpp"
#include "stockload/stock.hpp"

namespace stockload::retrofit {

using stock::BuildingSample;
using stock::HeatingSystemSpec;
using stock::HvacKind;
using stock::Sector;
using stock::SupplementalKind;

enum class Scenario { baseline, efficiency, electrification, efficiency_electrification };

inline std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::baseline: return "baseline";
        case Scenario::efficiency: return "efficiency";
        case Scenario::electrification: return "electrification";
        case Scenario::efficiency_electrification: return "efficiency_electrification";
    }
    throw InternalError("unhandled Scenario");
}

inline Scenario parse_scenario(const std::string& s) {
    if (s == "baseline") return Scenario::baseline;
    if (s == "efficiency") return Scenario::efficiency;
    if (s == "electrification") return Scenario::electrification;
    if (s == "efficiency_electrification") return Scenario::efficiency_electrification;
    throw ConfigError("unknown scenario '" + s + "'");
}

inline const std::vector<Scenario>& all_scenarios() {
    static const std::vector<Scenario> v{Scenario::baseline, Scenario::efficiency,
                                         Scenario::electrification,
                                         Scenario::efficiency_electrification};
    return v;
}

// Upgrade direction: at_least raises a too-low value (R-values, SEER),
// at_most lowers a too-high one (ACH50, duct leakage).
enum class Direction { at_least, at_most };

struct Measure {
    std::string parameter;
    double target = 0.0;
    Direction direction = Direction::at_least;

    bool operator==(const Measure&) const = default;
};

struct HeatingRule {
    std::vector<HvacKind> applies_to;
    HeatingSystemSpec replacement;
    double min_cooling_seer = 0.0;  // replacement also serves cooling

    bool operator==(const HeatingRule&) const = default;
};

// Heating efficiency on a common Btu/Wh scale for the replace-or-keep
// decision: electric resistance is COP 1 (3.413 Btu/Wh), heat pumps use their
// HSPF rating. Gas systems are replaced unconditionally, so they never enter
// this comparison.
inline double hspf_equivalent(const HeatingSystemSpec& h) {
    if (h.kind == HvacKind::electric_resistance) return 3.413;
    if (stock::is_heat_pump(h.kind)) return h.efficiency;
    throw InternalError("hspf_equivalent: gas systems have no electric equivalent");
}

inline const std::vector<std::string>& retrofittable_parameters() {
    static const std::vector<std::string> names = {
        "ceiling_r", "wall_r", "ach50", "duct_leakage_fraction", "duct_r", "cooling_seer",
    };
    return names;
}

struct RetrofitPackage {
    Scenario name = Scenario::efficiency;
    Sector sector = Sector::residential;
    std::vector<Measure> measures;
    // < 1 swaps interior lighting (applied once per building, tracked by the
    // has_led_lighting flag so reapplication cannot compound).
    double lighting_power_multiplier = 1.0;
    std::vector<HeatingRule> heating_rules;

    void validate() const {
        if (name == Scenario::baseline) {
            throw ConfigError("baseline is the absence of a package");
        }
        for (const auto& m : measures) {
            bool known = false;
            for (const auto& p : retrofittable_parameters()) known |= (p == m.parameter);
            if (!known) {
                throw ConfigError("measure parameter '" + m.parameter
                                  + "' is not retrofittable for sector "
                                  + stock::to_string(sector));
            }
            if (m.parameter == "duct_leakage_fraction") {
                if (m.target < 0.0 || m.target >= 1.0) {
                    throw ConfigError("duct_leakage_fraction target must be in [0, 1)");
                }
            } else if (m.target <= 0.0) {
                throw ConfigError("measure target for '" + m.parameter + "' must be positive");
            }
        }
        if (lighting_power_multiplier <= 0.0 || lighting_power_multiplier > 1.0) {
            throw ConfigError("lighting_power_multiplier must be in (0, 1]");
        }
        for (const auto& rule : heating_rules) {
            if (rule.applies_to.empty()) throw ConfigError("heating rule applies to no kinds");
            rule.replacement.validate();
            if (!stock::is_heat_pump(rule.replacement.kind)) {
                throw ConfigError("heating replacements must be heat pumps");
            }
            if (rule.replacement.supplemental != SupplementalKind::electric_resistance) {
                throw ConfigError("retrofit heat pumps carry electric-resistance supplemental");
            }
        }
    }
};

namespace detail {

inline double& numeric_field(BuildingSample& b, const std::string& name) {
    if (name == "ceiling_r") return b.ceiling_r;
    if (name == "wall_r") return b.wall_r;
    if (name == "ach50") return b.ach50;
    if (name == "duct_leakage_fraction") return b.duct_leakage_fraction;
    if (name == "duct_r") return b.duct_r;
    if (name == "cooling_seer") return b.cooling_seer;
    throw ConfigError("unknown retrofit parameter '" + name + "'");
}

}  // namespace detail

inline BuildingSample apply_package(const BuildingSample& sample, const RetrofitPackage& pkg) {
    if (sample.sector != pkg.sector) {
        throw ConfigError("package '" + to_string(pkg.name) + "' targets "
                          + stock::to_string(pkg.sector) + " but building '"
                          + sample.building_id + "' is " + stock::to_string(sample.sector));
    }
    BuildingSample out = sample;
    for (const auto& m : pkg.measures) {
        double& field = detail::numeric_field(out, m.parameter);
        if (m.direction == Direction::at_least ? field < m.target : field > m.target) {
            field = m.target;
        }
    }
    if (pkg.lighting_power_multiplier < 1.0 && !out.has_led_lighting) {
        out.lighting_power_density_w_per_m2 *= pkg.lighting_power_multiplier;
        out.has_led_lighting = true;
    }
    for (const auto& rule : pkg.heating_rules) {
        bool matches_kind = false;
        for (HvacKind k : rule.applies_to) matches_kind |= (k == out.heating.kind);
        if (!matches_kind) continue;
        const bool replace =
            stock::is_gas_fired(out.heating.kind)
            || hspf_equivalent(out.heating) < hspf_equivalent(rule.replacement);
        if (replace) {
            out.heating = rule.replacement;
            if (out.cooling_seer < rule.min_cooling_seer) out.cooling_seer = rule.min_cooling_seer;
        }
        break;  // first matching rule decides
    }
    // Electrification also retires fossil backup on heat pumps it keeps.
    if (!pkg.heating_rules.empty() && stock::is_heat_pump(out.heating.kind)
        && out.heating.supplemental == SupplementalKind::gas) {
        out.heating.supplemental = SupplementalKind::electric_resistance;
        out.heating.supplemental_efficiency = 1.0;
    }
    return out;
}

inline const RetrofitPackage& find_package(const std::vector<RetrofitPackage>& packages,
                                           Scenario scenario, Sector sector) {
    for (const auto& p : packages) {
        if (p.name == scenario && p.sector == sector) return p;
    }
    throw ConfigError("no '" + to_string(scenario) + "' package for sector "
                      + stock::to_string(sector));
}

inline std::vector<BuildingSample> scenario_stock(const std::vector<BuildingSample>& samples,
                                                  Scenario scenario,
                                                  const std::vector<RetrofitPackage>& packages) {
    if (scenario == Scenario::baseline) return samples;
    std::vector<BuildingSample> out;
    out.reserve(samples.size());
    for (const auto& b : samples) {
        out.push_back(apply_package(b, find_package(packages, scenario, b.sector)));
    }
    return out;
}

// The combined package must be exactly the union of the other two, per
// sector: efficiency's measures and lighting plus electrification's heating
// rules, with no extras.
inline void validate_package_family(const std::vector<RetrofitPackage>& packages) {
    for (Sector sector : {Sector::residential, Sector::commercial}) {
        const RetrofitPackage* eff = nullptr;
        const RetrofitPackage* elec = nullptr;
        const RetrofitPackage* both = nullptr;
        for (const auto& p : packages) {
            if (p.sector != sector) continue;
            if (p.name == Scenario::efficiency) eff = &p;
            if (p.name == Scenario::electrification) elec = &p;
            if (p.name == Scenario::efficiency_electrification) both = &p;
        }
        if (!eff && !elec && !both) continue;  // sector not configured at all
        if (!eff || !elec || !both) {
            throw ConfigError("incomplete package family for sector " + stock::to_string(sector));
        }
        std::vector<Measure> expected = eff->measures;
        expected.insert(expected.end(), elec->measures.begin(), elec->measures.end());
        const bool sides_disjoint =
            eff->heating_rules.empty() && elec->lighting_power_multiplier == 1.0;
        if (!sides_disjoint || both->measures != expected
            || both->lighting_power_multiplier != eff->lighting_power_multiplier
            || both->heating_rules != elec->heating_rules) {
            throw ConfigError("efficiency_electrification package is not the union of "
                              "efficiency and electrification for sector "
                              + stock::to_string(sector));
        }
    }
}

// --- JSON -----------------------------------------------------------------

inline Measure measure_from_json(const nlohmann::json& j) {
    Measure m;
    m.parameter = j.at("parameter").get<std::string>();
    m.target = j.at("target").get<double>();
    const std::string dir = j.at("direction").get<std::string>();
    if (dir == "at_least") m.direction = Direction::at_least;
    else if (dir == "at_most") m.direction = Direction::at_most;
    else throw ConfigError("unknown measure direction '" + dir + "'");
    return m;
}

inline RetrofitPackage package_from_json(Scenario name, Sector sector, const nlohmann::json& j) {
    RetrofitPackage p;
    p.name = name;
    p.sector = sector;
    for (const auto& m : j.value("measures", nlohmann::json::array())) {
        p.measures.push_back(measure_from_json(m));
    }
    p.lighting_power_multiplier = j.value("lighting_power_multiplier", 1.0);
    for (const auto& r : j.value("heating_replacement", nlohmann::json::array())) {
        HeatingRule rule;
        for (const auto& k : r.at("applies_to")) {
            rule.applies_to.push_back(stock::parse_hvac_kind(k.get<std::string>()));
        }
        rule.replacement = stock::heating_system_from_json(r.at("replacement"));
        if (stock::is_heat_pump(rule.replacement.kind)
            && rule.replacement.supplemental == SupplementalKind::none) {
            rule.replacement.supplemental = SupplementalKind::electric_resistance;
        }
        rule.min_cooling_seer = r.value("min_cooling_seer", 0.0);
        p.heating_rules.push_back(std::move(rule));
    }
    p.validate();
    return p;
}

// One file defines one named package, with a block per sector.
inline std::vector<RetrofitPackage> load_package_file(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file_to_string(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    try {
        const Scenario name = parse_scenario(j.at("name").get<std::string>());
        std::vector<RetrofitPackage> out;
        for (Sector sector : {Sector::residential, Sector::commercial}) {
            const std::string key = stock::to_string(sector);
            if (j.contains(key)) out.push_back(package_from_json(name, sector, j.at(key)));
        }
        if (out.empty()) throw ConfigError("no sector blocks");
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

}  // namespace stockload::retrofit
