// stockload command-line interface: configuration-driven simulation of
// building-stock electricity demand and grid shortfall reporting.

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "stockload/pipeline.hpp"

namespace {

constexpr const char* kSchemaHelp = R"(File formats (CSV columns, hourly rows unless noted):
  demand_<scenario>.csv  timestamp,res_heating_mw,res_cooling_mw,res_other_mw,
                         com_heating_mw,com_cooling_mw,com_other_mw,
                         res_total_mw,com_total_mw,industrial_mw,total_mw
  weather_metrics.csv    timestamp,hdd,cdd,mean_temp_c,cooling_not_captured
  shortfall_hourly.csv   timestamp,requested_shed_mw,<scenario>_shortfall_mw...
  enduse_annual.csv      scenario,sector,end_use,annual_gwh (one row per combination)
  temperature_demand.csv mean_temp_c,<scenario>_total_mw... (analysis-month hours)
  temperature_savings.csv mean_temp_c,<scenario>_savings_frac... (analysis-month hours)
  daily_peaks.csv        date,<scenario>_peak_mw... (complete days only)
  convergence.csv        sector,sample_size,mean_annual_kwh,rel_change_from_previous
Inputs referenced by the config:
  grid series            timestamp,served_mw,available_generation_mw,
                         requested_shed_mw,estimated_unserved_mw (may be empty)
  sector fractions       timestamp,res_frac,com_frac,ind_frac
  population             zone_id,population
JSON outputs carry a schema_version field; run_manifest.json lists every
artifact with a content hash.
Exit codes: 0 success, 2 configuration error, 3 data error, 4 internal error.)";

void print_outputs(const std::vector<std::filesystem::path>& outputs) {
    for (const auto& p : outputs) std::printf("wrote %s\n", p.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stockload: building-stock electricity demand and grid shortfall analysis"};
    app.footer(kSchemaHelp);
    app.require_subcommand(1);
    app.fallthrough();  // accept global options written after the subcommand
    app.set_version_flag("--version", std::string(stockload::kVersion));

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    app.add_option("--config", config_path, "Run configuration JSON")
        ->required()
        ->check(CLI::ExistingFile);
    auto* out_opt = app.add_option("--out-dir", out_dir,
                                   "Output directory (overrides the config)");
    auto* seed_opt = app.add_option("--seed", seed, "Sampling seed (overrides the config)");
    app.add_option("--threads", threads,
                   "Worker threads; results are identical for any value")
        ->check(CLI::Range(1u, 256u));

    auto* simulate = app.add_subcommand(
        "simulate", "Sample, retrofit, simulate, calibrate, and write demand CSVs");
    auto* shortfall = app.add_subcommand(
        "shortfall", "Shortfall reports over the shed event (needs simulate outputs)");
    auto* report = app.add_subcommand(
        "report", "Figure data and SVG plots (needs simulate outputs)");
    auto* fit_transfer = app.add_subcommand(
        "fit-transfer", "Fit hour-of-week demand regressions for transfer-configured sectors");
    auto* convergence = app.add_subcommand(
        "convergence", "Mean annual consumption vs sample size");
    auto* validate = app.add_subcommand(
        "validate-config", "Load and validate every configured input, then exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // command-line misuse is a configuration error
    }

    try {
        stockload::pipeline::RunConfig config = stockload::pipeline::load_config(config_path);
        if (out_opt->count() > 0) config.out_dir = out_dir;
        if (seed_opt->count() > 0) config.seed = seed;

        if (simulate->parsed()) {
            print_outputs(stockload::pipeline::run_simulate(config, threads));
        } else if (shortfall->parsed()) {
            print_outputs(stockload::pipeline::run_shortfall(config));
        } else if (report->parsed()) {
            print_outputs(stockload::pipeline::run_report(config));
        } else if (fit_transfer->parsed()) {
            print_outputs(stockload::pipeline::run_fit_transfer(config, threads));
        } else if (convergence->parsed()) {
            print_outputs(stockload::pipeline::run_convergence(config));
        } else if (validate->parsed()) {
            stockload::pipeline::run_validate(config);
            std::printf("configuration ok\n");
        }
        return 0;
    } catch (const stockload::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const stockload::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const stockload::InternalError& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 4;
    }
}
