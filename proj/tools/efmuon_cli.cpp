// Command-line driver: run experiments, verify property suites, evaluate the EF-M bound.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "efmuon/harness/experiment.hpp"
#include "efmuon/harness/verify.hpp"

namespace h = efmuon::harness;

namespace {

int cmd_run(const std::string& config_path, const std::string& preset_name, const std::string& out,
            std::optional<std::uint64_t> seed, const std::string& polar) {
    h::ExperimentConfig cfg;
    if (!preset_name.empty()) {
        auto p = h::preset(preset_name);
        if (!p) {
            std::cerr << "error: unknown preset '" << preset_name << "'\n";
            return h::kConfigError;
        }
        cfg = *p;
    }
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "error: cannot open " << config_path << "\n";
            return h::kConfigError;
        }
        std::stringstream ss;
        ss << in.rdbuf();
        cfg = h::parse_config(ss.str(), cfg);
    } else if (preset_name.empty()) {
        std::cerr << "error: run needs --config or --preset\n";
        return h::kConfigError;
    }
    if (!out.empty())
        cfg.out = out;
    if (seed)
        cfg.seed = *seed;
    if (!polar.empty())
        cfg.polar = polar;

    const auto res = h::run_experiment(cfg);
    std::ofstream csv(cfg.out, std::ios::binary);
    if (!csv) {
        std::cerr << "error: cannot write " << cfg.out << "\n";
        return h::kConfigError;
    }
    h::write_csv(csv, res.rows);
    std::ofstream side(cfg.out + ".json", std::ios::binary);
    side << res.resolved.dump(2) << '\n';
    std::fprintf(stderr, "wrote %zu rows to %s (c = %.17g, f_T = %.6g)\n", res.rows.size(), cfg.out.c_str(), res.c,
                 res.rows.back().f);
    return h::kOk;
}

int cmd_verify(const std::string& suite, std::optional<std::size_t> trials) {
    std::vector<h::Report> reports;
    if (suite == "all") {
        reports = h::run_all_suites(trials);
    } else {
        const auto names = h::suite_names();
        if (std::find(names.begin(), names.end(), suite) == names.end()) {
            std::cerr << "error: unknown suite '" << suite << "'\n";
            return h::kConfigError;
        }
        reports.push_back(h::run_suite(suite, trials));
    }
    bool ok = true;
    for (const auto& r : reports) {
        h::print_report(std::cout, r);
        ok = ok && r.passed();
    }
    return ok ? h::kOk : h::kPropertyFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EF-Muon counterexample and error-feedback toolkit"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run an experiment and write a CSV trace");
    std::string config_path, preset_name, out, polar;
    std::optional<std::uint64_t> seed;
    run->add_option("--config", config_path, "JSON config file");
    run->add_option("--preset", preset_name, "built-in configuration")
        ->check(CLI::IsMember(h::preset_names()));
    run->add_option("--out", out, "CSV output path (sidecar written to <out>.json)");
    run->add_option("--seed", seed, "random seed");
    run->add_option("--polar", polar, "polar backend")->check(CLI::IsMember({"exact", "ns"}));

    auto* verify = app.add_subcommand("verify", "run a property suite");
    std::string suite;
    std::optional<std::size_t> trials;
    verify->add_option("suite", suite, "reduction | compressor | lmo | cex1 | cex2 | ef-bound | polar | all")
        ->required();
    verify->add_option("--trials", trials, "randomized trials per check");

    auto* bound = app.add_subcommand("bound", "evaluate the EF-M anytime bound for lambda_t = 1/sqrt(t+1)");
    std::size_t T = 0;
    double delta = 1.0, beta = 0.0, sigma = 0.0, dist0 = 0.0;
    bound->add_option("--T", T)->required();
    bound->add_option("--delta", delta)->required();
    bound->add_option("--beta", beta)->required();
    bound->add_option("--sigma", sigma)->required();
    bound->add_option("--dist0", dist0)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? h::kOk : h::kConfigError;
    }

    try {
        if (*run)
            return cmd_run(config_path, preset_name, out, seed, polar);
        if (*verify)
            return cmd_verify(suite, trials);
        if (*bound) {
            std::printf("%.17g\n", efmuon::efm_bound(T, delta, beta, sigma, dist0));
            return h::kOk;
        }
    } catch (const h::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return h::kConfigError;
    } catch (const efmuon::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return h::kNumericalFailure;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return h::kConfigError;
    } catch (const std::logic_error& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return h::kConfigError;
    }
    return h::kOk;
}
