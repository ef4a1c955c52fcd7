#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "stockload/retrofit.hpp"
#include "stockload/simulation.hpp"
#include "test_support.hpp"

using namespace stockload;
using namespace stockload::retrofit;
using stock::BuildingSample;
using stock::Fuel;
using stock::HeatingSystemSpec;
using stock::HvacKind;
using stock::Sector;
using stock::SupplementalKind;

namespace {

std::vector<RetrofitPackage> canonical_packages() {
    std::vector<RetrofitPackage> all;
    for (const char* file : {"efficiency.json", "electrification.json",
                             "efficiency_electrification.json"}) {
        auto loaded = load_package_file(test_support::source_dir() / "data" / "packages" / file);
        all.insert(all.end(), loaded.begin(), loaded.end());
    }
    validate_package_family(all);
    return all;
}

BuildingSample leaky_gas_house() {
    BuildingSample b;
    b.building_id = "res-000001";
    b.sector = Sector::residential;
    b.zone_id = "z";
    b.floor_area_m2 = 160.0;
    b.ceiling_r = 13.0 * 0.1761;  // imperial R-13
    b.wall_r = 2.3;
    b.ach50 = 15.0;
    b.duct_leakage_fraction = 0.2;
    b.duct_r = 0.7;
    b.heating.kind = HvacKind::gas_furnace;
    b.heating.fuel = Fuel::natural_gas;
    b.heating.efficiency = 0.8;
    b.cooling_seer = 13.0;
    b.heat_setpoint_c = 20.0;
    b.cool_setpoint_c = 24.0;
    b.internal_gains_w_per_m2 = 3.0;
    b.lighting_power_density_w_per_m2 = 5.0;
    b.weight = 1860.0;
    return b;
}

BuildingSample random_building(std::mt19937_64& rng, Sector sector) {
    auto uni = [&](double lo, double hi) {
        return lo + (hi - lo) * (double(rng() >> 11) * 0x1.0p-53);
    };
    BuildingSample b = leaky_gas_house();
    b.sector = sector;
    if (sector == Sector::commercial) {
        b.building_id = "com-000001";
        b.building_type = "small_office";
        b.floor_area_m2 = uni(400, 5000);
    } else {
        b.floor_area_m2 = uni(80, 400);
    }
    b.ceiling_r = uni(0.5, 9.0);
    b.wall_r = uni(0.5, 5.0);
    b.ach50 = uni(2.0, 25.0);
    b.duct_leakage_fraction = uni(0.0, 0.4);
    b.duct_r = uni(0.3, 2.0);
    b.cooling_seer = uni(10.0, 20.0);
    b.lighting_power_density_w_per_m2 = uni(2.0, 14.0);
    const std::uint64_t pick = rng() % (sector == Sector::residential ? 3 : 4);
    b.heating = HeatingSystemSpec{};
    if (sector == Sector::residential) {
        if (pick == 1) {
            b.heating.kind = HvacKind::gas_furnace;
            b.heating.fuel = Fuel::natural_gas;
            b.heating.efficiency = uni(0.6, 0.98);
        } else if (pick == 2) {
            b.heating.kind = HvacKind::ashp;
            b.heating.efficiency = uni(6.8, 11.0);
            b.heating.supplemental = rng() % 2 ? SupplementalKind::electric_resistance
                                               : SupplementalKind::gas;
            b.heating.supplemental_efficiency = 0.8;
        }
    } else {
        if (pick == 1) {
            b.heating.kind = HvacKind::gas_furnace;
            b.heating.fuel = Fuel::natural_gas;
            b.heating.efficiency = uni(0.6, 0.95);
        } else if (pick == 2) {
            b.heating.kind = HvacKind::gas_boiler;
            b.heating.fuel = Fuel::natural_gas;
            b.heating.efficiency = uni(0.6, 0.95);
        } else if (pick == 3) {
            b.heating.kind = HvacKind::commercial_hp_rtu;
            b.heating.efficiency = uni(6.8, 11.0);
            b.heating.supplemental = SupplementalKind::electric_resistance;
        }
    }
    return b;
}

bool buildings_equal(const BuildingSample& a, const BuildingSample& b) {
    return a.building_id == b.building_id && a.zone_id == b.zone_id
           && a.building_type == b.building_type && a.floor_area_m2 == b.floor_area_m2
           && a.ceiling_r == b.ceiling_r && a.wall_r == b.wall_r && a.ach50 == b.ach50
           && a.duct_leakage_fraction == b.duct_leakage_fraction && a.duct_r == b.duct_r
           && a.heating == b.heating && a.cooling_seer == b.cooling_seer
           && a.heat_setpoint_c == b.heat_setpoint_c && a.cool_setpoint_c == b.cool_setpoint_c
           && a.internal_gains_w_per_m2 == b.internal_gains_w_per_m2
           && a.lighting_power_density_w_per_m2 == b.lighting_power_density_w_per_m2
           && a.has_led_lighting == b.has_led_lighting && a.weight == b.weight;
}

}  // namespace

TEST_CASE("canonical packages load and form a consistent family") {
    const auto packages = canonical_packages();
    REQUIRE(packages.size() == 6);
    const auto& res_eff = find_package(packages, Scenario::efficiency, Sector::residential);
    CHECK(res_eff.measures.size() == 4);
    CHECK(res_eff.heating_rules.empty());
    const auto& res_elec = find_package(packages, Scenario::electrification, Sector::residential);
    CHECK(res_elec.measures.empty());
    REQUIRE(res_elec.heating_rules.size() == 1);
    CHECK(res_elec.heating_rules[0].replacement.kind == HvacKind::ashp);
    CHECK(res_elec.heating_rules[0].replacement.efficiency == 9.3);
    CHECK(res_elec.heating_rules[0].min_cooling_seer == 18.0);
    const auto& com_eff = find_package(packages, Scenario::efficiency, Sector::commercial);
    CHECK(com_eff.lighting_power_multiplier == 0.5);
}

TEST_CASE("only-if-worse: efficient parameters stay, inefficient ones upgrade") {
    const auto packages = canonical_packages();
    const auto& eff = find_package(packages, Scenario::efficiency, Sector::residential);

    BuildingSample good = leaky_gas_house();
    good.ceiling_r = 49.0 * 0.1761;  // imperial R-49, above the R-38 target
    const BuildingSample after_good = apply_package(good, eff);
    CHECK(after_good.ceiling_r == good.ceiling_r);

    BuildingSample bad = leaky_gas_house();  // R-13 ceiling, 15 ACH50
    const BuildingSample after_bad = apply_package(bad, eff);
    CHECK(after_bad.ceiling_r == 6.6918);
    CHECK(after_bad.ach50 == 7.0);
    CHECK(after_bad.duct_leakage_fraction == 0.075);
    CHECK(after_bad.duct_r == 1.4088);
    CHECK(after_bad.heating == bad.heating);  // efficiency leaves heating alone
    CHECK(after_bad.weight == bad.weight);
}

TEST_CASE("electrification swaps fossil and low-efficiency electric heat for ASHPs") {
    const auto packages = canonical_packages();
    const auto& elec = find_package(packages, Scenario::electrification, Sector::residential);

    SECTION("gas furnace is replaced regardless of AFUE") {
        BuildingSample b = leaky_gas_house();
        b.heating.efficiency = 0.98;
        const BuildingSample after = apply_package(b, elec);
        CHECK(after.heating.kind == HvacKind::ashp);
        CHECK(after.heating.efficiency == 9.3);
        CHECK(after.heating.supplemental == SupplementalKind::electric_resistance);
        CHECK(after.cooling_seer == 18.0);
        CHECK(after.ceiling_r == b.ceiling_r);  // envelope untouched
    }
    SECTION("electric resistance is replaced") {
        BuildingSample b = leaky_gas_house();
        b.heating = HeatingSystemSpec{};
        const BuildingSample after = apply_package(b, elec);
        CHECK(after.heating.kind == HvacKind::ashp);
    }
    SECTION("a lower-HSPF heat pump is replaced") {
        BuildingSample b = leaky_gas_house();
        b.heating = HeatingSystemSpec{};
        b.heating.kind = HvacKind::ashp;
        b.heating.efficiency = 7.7;
        b.heating.supplemental = SupplementalKind::electric_resistance;
        const BuildingSample after = apply_package(b, elec);
        CHECK(after.heating.efficiency == 9.3);
    }
    SECTION("a better heat pump is kept, including its SEER") {
        BuildingSample b = leaky_gas_house();
        b.heating = HeatingSystemSpec{};
        b.heating.kind = HvacKind::ashp;
        b.heating.efficiency = 10.5;
        b.heating.supplemental = SupplementalKind::electric_resistance;
        b.cooling_seer = 13.0;
        const BuildingSample after = apply_package(b, elec);
        CHECK(after.heating.efficiency == 10.5);
        CHECK(after.cooling_seer == 13.0);
    }
    SECTION("a kept heat pump has gas backup electrified") {
        BuildingSample b = leaky_gas_house();
        b.heating = HeatingSystemSpec{};
        b.heating.kind = HvacKind::ashp;
        b.heating.efficiency = 10.5;
        b.heating.supplemental = SupplementalKind::gas;
        b.heating.supplemental_efficiency = 0.8;
        const BuildingSample after = apply_package(b, elec);
        CHECK(after.heating.efficiency == 10.5);
        CHECK(after.heating.supplemental == SupplementalKind::electric_resistance);
    }
}

TEST_CASE("commercial electrification routes RTUs and boilers to their heat-pump kinds") {
    const auto packages = canonical_packages();
    const auto& elec = find_package(packages, Scenario::electrification, Sector::commercial);

    BuildingSample rtu = leaky_gas_house();
    rtu.sector = Sector::commercial;
    rtu.building_type = "retail";
    const BuildingSample after_rtu = apply_package(rtu, elec);
    CHECK(after_rtu.heating.kind == HvacKind::commercial_hp_rtu);
    CHECK(after_rtu.cooling_seer == 17.0);
    CHECK(after_rtu.heating.cop_47 == 4.2);

    BuildingSample boiler = rtu;
    boiler.heating.kind = HvacKind::gas_boiler;
    const BuildingSample after_boiler = apply_package(boiler, elec);
    CHECK(after_boiler.heating.kind == HvacKind::hp_boiler);
    CHECK(after_boiler.cooling_seer == rtu.cooling_seer);  // boiler rule has no SEER floor
}

TEST_CASE("LED measure halves lighting power exactly once") {
    const auto packages = canonical_packages();
    const auto& eff = find_package(packages, Scenario::efficiency, Sector::commercial);
    BuildingSample b = leaky_gas_house();
    b.sector = Sector::commercial;
    b.building_type = "retail";
    b.lighting_power_density_w_per_m2 = 12.0;
    const BuildingSample once = apply_package(b, eff);
    CHECK(once.lighting_power_density_w_per_m2 == 6.0);
    CHECK(once.has_led_lighting);
    const BuildingSample twice = apply_package(once, eff);
    CHECK(twice.lighting_power_density_w_per_m2 == 6.0);
}

TEST_CASE("applying any package twice equals applying it once") {
    const auto packages = canonical_packages();
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const Sector sector = trial % 2 ? Sector::commercial : Sector::residential;
        const BuildingSample b = random_building(rng, sector);
        for (Scenario s : {Scenario::efficiency, Scenario::electrification,
                           Scenario::efficiency_electrification}) {
            const auto& pkg = find_package(packages, s, sector);
            const BuildingSample once = apply_package(b, pkg);
            const BuildingSample twice = apply_package(once, pkg);
            REQUIRE(buildings_equal(once, twice));
        }
    }
}

TEST_CASE("combined package equals efficiency then electrification in either order") {
    const auto packages = canonical_packages();
    std::mt19937_64 rng(78);
    for (int trial = 0; trial < 100; ++trial) {
        const Sector sector = trial % 2 ? Sector::commercial : Sector::residential;
        const BuildingSample b = random_building(rng, sector);
        const auto& eff = find_package(packages, Scenario::efficiency, sector);
        const auto& elec = find_package(packages, Scenario::electrification, sector);
        const auto& both = find_package(packages, Scenario::efficiency_electrification, sector);
        const BuildingSample combined = apply_package(b, both);
        const BuildingSample ab = apply_package(apply_package(b, eff), elec);
        const BuildingSample ba = apply_package(apply_package(b, elec), eff);
        REQUIRE(buildings_equal(combined, ab));
        REQUIRE(buildings_equal(combined, ba));
    }
}

TEST_CASE("scenario_stock: baseline is identity, electrification clears fossil heat") {
    const auto packages = canonical_packages();
    std::mt19937_64 rng(79);
    std::vector<BuildingSample> stock_in;
    for (int i = 0; i < 60; ++i) stock_in.push_back(random_building(rng, Sector::residential));

    const auto base = scenario_stock(stock_in, Scenario::baseline, packages);
    REQUIRE(base.size() == stock_in.size());
    for (std::size_t i = 0; i < base.size(); ++i) REQUIRE(buildings_equal(base[i], stock_in[i]));

    const auto elec = scenario_stock(stock_in, Scenario::electrification, packages);
    for (const auto& b : elec) {
        CHECK(b.heating.fuel == Fuel::electricity);
        CHECK(b.heating.supplemental != SupplementalKind::gas);
    }
}

TEST_CASE("electrified stock burns zero gas when simulated") {
    const auto packages = canonical_packages();
    std::mt19937_64 rng(80);
    sim::SimulationParams p;
    p.design_temperatures["z"] = sim::ZoneDesignTemps{-10.0, 38.0};
    const auto w = test_support::make_series("z", 2021, test_support::seasonal_temp);
    for (int trial = 0; trial < 10; ++trial) {
        BuildingSample b = random_building(rng, Sector::residential);
        const BuildingSample after =
            apply_package(b, find_package(packages, Scenario::electrification,
                                          Sector::residential));
        const auto d = sim::simulate_building(after, w, p);
        for (double g : d.gas_kwh_th) REQUIRE(g == 0.0);
    }
}

TEST_CASE("efficiency package never increases hourly thermal load") {
    const auto packages = canonical_packages();
    std::mt19937_64 rng(81);
    sim::SimulationParams p;
    p.design_temperatures["z"] = sim::ZoneDesignTemps{-10.0, 38.0};
    const auto w = test_support::make_series("z", 2021, test_support::seasonal_temp);
    for (int trial = 0; trial < 10; ++trial) {
        const BuildingSample b = random_building(rng, Sector::residential);
        const BuildingSample after =
            apply_package(b, find_package(packages, Scenario::efficiency, Sector::residential));
        const auto before_loads = sim::thermal_load(b, w, p);
        const auto after_loads = sim::thermal_load(after, w, p);
        for (std::size_t h = 0; h < 8760; ++h) {
            REQUIRE(after_loads.heating_kwh_th[h] <= before_loads.heating_kwh_th[h] + 1e-12);
        }
    }
}

TEST_CASE("package validation rejects malformed definitions") {
    RetrofitPackage bad;
    bad.name = Scenario::efficiency;
    bad.measures.push_back(Measure{"paint_color", 1.0, Direction::at_least});
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    RetrofitPackage base;
    base.name = Scenario::baseline;
    CHECK_THROWS_AS(base.validate(), ConfigError);

    RetrofitPackage gas_supp;
    gas_supp.name = Scenario::electrification;
    HeatingRule rule;
    rule.applies_to = {HvacKind::gas_furnace};
    rule.replacement.kind = HvacKind::ashp;
    rule.replacement.efficiency = 9.3;
    rule.replacement.supplemental = SupplementalKind::gas;
    rule.replacement.supplemental_efficiency = 0.8;
    gas_supp.heating_rules.push_back(rule);
    CHECK_THROWS_AS(gas_supp.validate(), ConfigError);

    const auto packages = canonical_packages();
    BuildingSample res = leaky_gas_house();
    CHECK_THROWS_AS(
        apply_package(res, find_package(packages, Scenario::efficiency, Sector::commercial)),
        ConfigError);

    // A family whose combined package is missing a measure must fail.
    auto broken = packages;
    for (auto& p : broken) {
        if (p.name == Scenario::efficiency_electrification && p.sector == Sector::residential) {
            p.measures.pop_back();
        }
    }
    CHECK_THROWS_AS(validate_package_family(broken), ConfigError);
}