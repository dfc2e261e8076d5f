// driftcal: calibrate simulator parameters that drift across the application domain.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "driftcal/config.hpp"
#include "driftcal/log.hpp"
#include "driftcal/orchestrate.hpp"
#include "driftcal/report.hpp"

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "Override the configured seed");
    cmd->add_option("--out", c.out, "Override the output directory");
}

driftcal::RunConfig load(const Common& c, std::optional<driftcal::RunMode> mode) {
    driftcal::ConfigOverrides o;
    o.seed = c.seed;
    if (!c.out.empty()) o.output = c.out;
    o.mode = mode;
    return driftcal::load_config(c.config, o);
}

int print_report(const driftcal::RunReport& r, const std::filesystem::path& out) {
    std::cout << driftcal::format_report(r) << "outputs in " << out.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian calibration with input-dependent parameter discrepancy"};
    app.require_subcommand(1);
    bool quiet = false, verbose = false;
    app.add_flag("-q,--quiet", quiet, "Suppress warnings");
    app.add_flag("-v,--verbose", verbose, "Progress messages on stderr");
    app.footer("Set DRIFTCAL_THREADS to cap the number of concurrently running chains.");

    Common gen, fit, cal, cmp;
    add_common(app.add_subcommand("generate", "Generate a synthetic dataset"), gen);
    add_common(app.add_subcommand("fit-emulator", "Fit the GP emulator to a dataset"), fit);
    add_common(app.add_subcommand("calibrate", "Run the calibrator named by the config mode"), cal);
    add_common(app.add_subcommand("compare", "Run KOH and integrated-delta on the same data"), cmp);
    std::string run_dir;
    auto* rep = app.add_subcommand("report", "Summarise a finished run directory");
    rep->add_option("run_dir", run_dir, "Output directory of a previous run")->required()->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);
    driftcal::set_log_level(quiet ? driftcal::LogLevel::quiet
                                  : (verbose ? driftcal::LogLevel::info : driftcal::LogLevel::warning));

    try {
        if (app.got_subcommand("generate")) {
            const auto c = load(gen, driftcal::RunMode::generate);
            return print_report(driftcal::orchestrate(c), c.output);
        }
        if (app.got_subcommand("fit-emulator")) {
            const auto c = load(fit, std::nullopt);
            return print_report(driftcal::fit_emulator_only(c), c.output);
        }
        if (app.got_subcommand("calibrate")) {
            const auto c = load(cal, std::nullopt);
            if (c.mode == driftcal::RunMode::generate || c.mode == driftcal::RunMode::compare) {
                std::cerr << "calibrate needs mode koh, integrated_delta or combined; use the "
                          << driftcal::to_string(c.mode) << " subcommand\n";
                return 2;
            }
            return print_report(driftcal::orchestrate(c), c.output);
        }
        if (app.got_subcommand("compare")) {
            const auto c = load(cmp, driftcal::RunMode::compare);
            return print_report(driftcal::orchestrate(c), c.output);
        }
        if (app.got_subcommand("report")) {
            const std::filesystem::path p = std::filesystem::path(run_dir) / "report.json";
            std::ifstream is(p);
            if (!is) {
                std::cerr << "cannot read " << p.string() << '\n';
                return 1;
            }
            std::ostringstream ss;
            ss << is.rdbuf();
            std::cout << driftcal::format_report(driftcal::parse_report(ss.str()));
            return 0;
        }
    } catch (const driftcal::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
