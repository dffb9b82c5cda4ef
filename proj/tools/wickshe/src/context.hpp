#pragma once

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <thread>
#include <vector>

#include "wickshe/app/config.hpp"
#include "wickshe/app/report.hpp"
#include "wickshe/chaos.hpp"
#include "wickshe/feynman_kac.hpp"
#include "wickshe/propagator.hpp"
#include "wickshe/rng.hpp"

namespace wickshe::app::detail {

struct Context {
    const RunConfig& cfg;
    int threads;
    std::filesystem::path out;
    RunReport& report;
    StreamFactory streams;

    [[nodiscard]] McOptions mc() const {
        McOptions o;
        o.dt = cfg.mc.dt;
        o.n_paths = static_cast<std::size_t>(cfg.mc.n_paths);
        o.threads = threads;
        o.block_size = static_cast<std::size_t>(cfg.mc.block_size);
        return o;
    }
    // Level spacing for local-time histograms and noise grids.
    [[nodiscard]] double spacing() const { return cfg.mc.delta_a_factor * std::sqrt(cfg.mc.dt); }
    void emit(const std::string& name, const CsvTable& table) { emit_csv(report, out, name, table); }
};

// Runs body(i) for i < n on up to `threads` workers; the first exception is rethrown.
template <class F>
void parallel_for(std::size_t n, int threads, F&& body) {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr failure;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                body(i);
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
                return;
            }
        }
    };
    const int workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < workers; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
}

// Quadrature for orders <= 2 under `auto`, the propagator otherwise.
[[nodiscard]] inline bool use_quadrature(const std::string& method, int max_order) {
    if (method == "quadrature") return true;
    if (method == "propagator") return false;
    return max_order <= 2;
}

[[nodiscard]] std::vector<double> probe_times(const RunConfig& cfg);
[[nodiscard]] PropagatorSolution solve_propagator(const RunConfig& cfg, const TruncationSpec& spec,
                                                  const InitialCondition& u0);

// Coefficients of u (or of d/dx u) at every probe, by the configured method.
[[nodiscard]] std::vector<ChaosCoefficients> coefficients_at_probes(const Context& ctx, const TruncationSpec& spec,
                                                                    const InitialCondition& u0, bool derivative,
                                                                    const std::string& method);

// |a - b| relative to |reference|, falling back to absolute below `floor`.
[[nodiscard]] inline double scaled_error(double value, double reference, double floor) {
    return std::abs(value - reference) / std::max(std::abs(reference), floor);
}

void run_chaos(Context& ctx);
void run_derivative(Context& ctx);
void run_fk(Context& ctx);
void run_stransform(Context& ctx);
void run_equivalence(Context& ctx);
void run_localtime(Context& ctx);
void run_regularity(Context& ctx);

}  // namespace wickshe::app::detail
