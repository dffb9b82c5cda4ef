#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "context.hpp"

namespace wickshe::app::detail {

namespace {

// Coefficients whose reference magnitude is below this are compared absolutely.
constexpr double kRelativeFloor = 1e-9;

std::string probe_label(const SpaceTimePoint& p) { return fmt::format("t={:g},x={:g}", p.t, p.x); }

void add_coefficients(CsvTable& table, const ChaosCoefficients& c) {
    const auto p = c.point();
    for (const auto& [alpha, v] : c.values()) table.row().add(alpha.encode()).add(p.t).add(p.x).add(v);
}

}  // namespace

void run_chaos(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const InitialCondition u0 = cfg.initial_condition.build();
    const TruncationSpec spec = cfg.truncation;
    const bool quadrature_primary = use_quadrature(cfg.chaos.method, spec.max_order);
    const auto primary = coefficients_at_probes(ctx, spec, u0, false, cfg.chaos.method);

    CsvTable coeffs({"alpha_encoded", "t", "x", "value"});
    CsvTable summary({"t", "x", "order", "mass"});
    for (const auto& c : primary) {
        add_coefficients(coeffs, c);
        const auto masses = order_masses(c);
        for (std::size_t n = 0; n < masses.size(); ++n)
            summary.row().add(c.point().t).add(c.point().x).add(n).add(masses[n]);
    }

    // The mean field against the heat semigroup.
    const QuadratureGrid grid = cfg.grid();
    for (const auto& c : primary) {
        const auto p = c.point();
        const double ref = apply_heat_semigroup(u0, p.t, p.x, grid);
        const double err = scaled_error(c.get(MultiIndex{}), ref, kRelativeFloor);
        ctx.report.check("chaos.mean_field " + probe_label(p), err <= cfg.chaos.tolerance, err, cfg.chaos.tolerance);
    }

    // Orders <= 2 by both methods.
    const TruncationSpec low{std::min(spec.max_order, 2), spec.max_mode};
    std::vector<ChaosCoefficients> quad(cfg.probes.size()), prop(cfg.probes.size());
    if (quadrature_primary && spec.max_order <= 2) {
        quad = primary;
    } else {
        const auto opts = cfg.quadrature_options();
        parallel_for(cfg.probes.size(), ctx.threads, [&](std::size_t i) {
            quad[i] = cs_coefficients(low, cfg.probes[i].t, cfg.probes[i].x, u0, opts);
        });
    }
    if (!quadrature_primary) {
        prop = primary;
    } else {
        const PropagatorSolution sol = solve_propagator(cfg, low, u0);
        for (std::size_t i = 0; i < cfg.probes.size(); ++i)
            prop[i] = sol.coefficients_at(cfg.probes[i].t, cfg.probes[i].x);
    }

    CsvTable cross({"alpha_encoded", "t", "x", "quadrature", "propagator", "error"});
    for (std::size_t i = 0; i < cfg.probes.size(); ++i) {
        const auto p = cfg.probes[i];
        double worst = 0.0;
        for (const auto& [alpha, q] : quad[i].values()) {
            if (static_cast<int>(alpha.degree()) > low.max_order) continue;
            const double v = prop[i].get(alpha);
            const double err = scaled_error(v, q, kRelativeFloor);
            worst = std::max(worst, err);
            cross.row().add(alpha.encode()).add(p.t).add(p.x).add(q).add(v).add(err);
        }
        ctx.report.check("chaos.quadrature_vs_propagator " + probe_label(p), worst <= cfg.chaos.tolerance, worst,
                         cfg.chaos.tolerance);
    }

    ctx.emit("coefficients.csv", coeffs);
    ctx.emit("order_masses.csv", summary);
    ctx.emit("crosscheck.csv", cross);
}

void run_derivative(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const InitialCondition u0 = cfg.initial_condition.build();
    const TruncationSpec spec = cfg.truncation;
    const auto coeffs = coefficients_at_probes(ctx, spec, u0, true, cfg.derivative.method);

    CsvTable table({"alpha_encoded", "t", "x", "value"});
    for (const auto& c : coeffs) add_coefficients(table, c);

    CsvTable norms({"t", "x", "lambda", "order", "norm", "ratio", "partial_sum", "increment_share"});
    for (const auto& c : coeffs) {
        const auto p = c.point();
        for (double lambda : cfg.derivative.lambdas) {
            std::vector<double> v(static_cast<std::size_t>(spec.max_order) + 1);
            for (int n = 0; n <= spec.max_order; ++n) v[static_cast<std::size_t>(n)] = order_norm(c, n, lambda);
            double partial = 0.0;
            bool decreasing = true;
            double worst_step = -1.0;  // largest ratio_n - ratio_{n-1} over n >= 2, relative to ratio_{n-1}
            double prev_ratio = 0.0;
            for (std::size_t n = 0; n < v.size(); ++n) {
                partial += v[n];
                const double ratio = n + 1 < v.size() && v[n] > 0.0 ? v[n + 1] / v[n] : 0.0;
                norms.row().add(p.t).add(p.x).add(lambda).add(n).add(v[n]).add(ratio).add(partial);
                norms.add(partial > 0.0 ? v[n] / partial : 0.0);
                if (n + 1 < v.size() && n >= 1) {
                    if (n >= 2) {
                        worst_step = std::max(worst_step, (ratio - prev_ratio) / prev_ratio);
                        if (!(ratio < prev_ratio)) decreasing = false;
                    }
                    prev_ratio = ratio;
                }
            }
            const std::string label = fmt::format("{} lambda={:g}", probe_label(p), lambda);
            ctx.report.check("derivative.ratio_decreasing " + label, decreasing, worst_step, 0.0);
            const double share = partial > 0.0 ? v.back() / partial : 0.0;
            ctx.report.check("derivative.cauchy " + label, share <= cfg.derivative.cauchy_tolerance, share,
                             cfg.derivative.cauchy_tolerance);
        }
    }

    // eps -> 0 sequence for the first-mode coefficient.
    CsvTable eps({"alpha_encoded", "t", "x", "kind", "epsilon", "value"});
    const auto opts = cfg.quadrature_options();
    const MultiIndex first = MultiIndex::unit(1);
    std::vector<EpsilonSequence> seqs(cfg.probes.size());
    std::vector<double> limits(cfg.probes.size());
    parallel_for(cfg.probes.size(), ctx.threads, [&](std::size_t i) {
        const auto p = cfg.probes[i];
        const double eps0 = std::min(cfg.derivative.epsilon, p.t / 2.0);
        seqs[i] = dx_epsilon_sequence(first, p.t, p.x, u0, eps0, opts);
        limits[i] = dx_coefficient(first, p.t, p.x, u0, 0.0, opts);
    });
    for (std::size_t i = 0; i < cfg.probes.size(); ++i) {
        const auto p = cfg.probes[i];
        for (std::size_t k = 0; k < seqs[i].epsilons.size(); ++k)
            eps.row().add(first.encode()).add(p.t).add(p.x).add("cut").add(seqs[i].epsilons[k]).add(seqs[i].values[k]);
        eps.row().add(first.encode()).add(p.t).add(p.x).add("extrapolated").add(0.0).add(seqs[i].extrapolated);
        eps.row().add(first.encode()).add(p.t).add(p.x).add("direct").add(0.0).add(limits[i]);
        const double err = std::abs(seqs[i].extrapolated - limits[i]);
        ctx.report.check("derivative.epsilon_limit " + probe_label(p), err <= 1e-3, err, 1e-3);
    }

    ctx.emit("derivative_coefficients.csv", table);
    ctx.emit("order_norms.csv", norms);
    ctx.emit("epsilon_sequence.csv", eps);
}

}  // namespace wickshe::app::detail
