#include <fmt/format.h>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "wickshe/app/commands.hpp"
#include "wickshe/app/config.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfigError = 2;

int threads_from_env(int fallback) {
    const char* env = std::getenv("WICKSHE_THREADS");
    if (env == nullptr || *env == '\0') return fallback;
    try {
        std::size_t used = 0;
        const int v = std::stoi(env, &used);
        if (used != std::string(env).size() || v < 1) throw std::invalid_argument("range");
        return v;
    } catch (const std::exception&) {
        throw wickshe::app::ConfigError(fmt::format("WICKSHE_THREADS: expected a positive integer, got '{}'", env));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chaos, Feynman-Kac and regularity experiments for the Wick stochastic heat equation"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    int threads = 1;
    for (const auto& name : wickshe::app::subcommand_names()) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", config_path, "configuration file")->required();
        sub->add_option("--seed", seed, "master seed (overrides the config)");
        sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
        sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfigError;
    }
    const std::string subcommand = app.get_subcommands().front()->get_name();

    wickshe::app::RunConfig cfg;
    try {
        cfg = wickshe::app::parse_config(config_path);
        if (seed) cfg.seed = *seed;
        if (out_dir) cfg.output_dir = *out_dir;
        threads = threads_from_env(threads);
    } catch (const wickshe::app::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    }

    try {
        const auto report = wickshe::app::run_subcommand(subcommand, cfg, threads);
        for (const auto& c : report.checks)
            std::cout << fmt::format("{} {} value={:.6g} bound={:.6g}{}\n", c.pass ? "PASS" : "FAIL", c.name, c.value,
                                     c.bound, c.detail.empty() ? "" : " (" + c.detail + ")");
        std::cout << fmt::format("{}: {} checks, {} files, {:.2f} s -> {}\n", subcommand, report.checks.size(),
                                 report.files.size(), report.wall_time, cfg.output_dir);
        return report.all_pass() ? kExitOk : kExitCheckFailed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitCheckFailed;
    }
}
