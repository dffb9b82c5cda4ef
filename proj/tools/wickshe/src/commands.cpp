#include "wickshe/app/commands.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>

#include "context.hpp"

namespace wickshe::app {

namespace detail {

std::vector<double> probe_times(const RunConfig& cfg) {
    std::vector<double> ts;
    for (const auto& p : cfg.probes) ts.push_back(p.t);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
}

PropagatorSolution solve_propagator(const RunConfig& cfg, const TruncationSpec& spec, const InitialCondition& u0) {
    PropagatorGrid grid;
    grid.dt = cfg.propagator.dt;
    grid.dx = cfg.propagator.dx;
    grid.half_width = cfg.propagator.L;
    grid.richardson = cfg.propagator.richardson;
    const auto times = probe_times(cfg);
    return propagator_oracle(spec, u0, grid, times);
}

std::vector<ChaosCoefficients> coefficients_at_probes(const Context& ctx, const TruncationSpec& spec,
                                                      const InitialCondition& u0, bool derivative,
                                                      const std::string& method) {
    const auto& probes = ctx.cfg.probes;
    std::vector<ChaosCoefficients> out(probes.size());
    if (use_quadrature(method, spec.max_order)) {
        const auto opts = ctx.cfg.quadrature_options();
        parallel_for(probes.size(), ctx.threads, [&](std::size_t i) {
            const auto& p = probes[i];
            out[i] = derivative ? dx_coefficients(spec, p.t, p.x, u0, opts) : cs_coefficients(spec, p.t, p.x, u0, opts);
        });
    } else {
        const PropagatorSolution sol = solve_propagator(ctx.cfg, spec, u0);
        for (std::size_t i = 0; i < probes.size(); ++i)
            out[i] = derivative ? sol.dx_coefficients_at(probes[i].t, probes[i].x)
                                : sol.coefficients_at(probes[i].t, probes[i].x);
    }
    return out;
}

}  // namespace detail

const std::vector<std::string>& subcommand_names() {
    static const std::vector<std::string> names{"chaos", "derivative", "fk", "stransform-compare",
                                                "equivalence", "localtime", "regularity"};
    return names;
}

RunReport run_subcommand(const std::string& name, const RunConfig& cfg, int threads) {
    static const std::map<std::string, std::function<void(detail::Context&)>> table{
        {"chaos", detail::run_chaos},
        {"derivative", detail::run_derivative},
        {"fk", detail::run_fk},
        {"stransform-compare", detail::run_stransform},
        {"equivalence", detail::run_equivalence},
        {"localtime", detail::run_localtime},
        {"regularity", detail::run_regularity},
    };
    const auto it = table.find(name);
    if (it == table.end()) throw std::invalid_argument("unknown subcommand '" + name + "'");

    RunReport report;
    report.subcommand = name;
    report.seed = cfg.seed;
    report.threads = threads;
    report.config = echo_config(cfg);

    const std::filesystem::path out = cfg.output_dir;
    std::filesystem::create_directories(out);
    detail::Context ctx{cfg, std::max(threads, 1), out, report, StreamFactory(cfg.seed)};
    const auto start = std::chrono::steady_clock::now();
    try {
        it->second(ctx);
    } catch (const std::exception& e) {
        throw SubcommandError(name + ": " + e.what());
    }
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_report_json(report, out);
    return report;
}

}  // namespace wickshe::app
