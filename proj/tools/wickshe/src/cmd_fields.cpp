#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "context.hpp"
#include "wickshe/regularity.hpp"

namespace wickshe::app::detail {

void run_equivalence(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const auto& eq = cfg.equivalence;
    const InitialCondition u0 = cfg.initial_condition.build();
    std::vector<double> axis(static_cast<std::size_t>(eq.grid));
    for (int i = 0; i < eq.grid; ++i)
        axis[static_cast<std::size_t>(i)] =
            eq.grid == 1 ? 0.5 * (eq.y_min + eq.y_max) : eq.y_min + (eq.y_max - eq.y_min) * i / (eq.grid - 1);

    CsvTable table({"t", "x", "order", "y", "feynman_kac", "multiple_wiener", "chaos_symmetrized"});
    for (const auto& p : cfg.probes) {
        for (int n = 1; n <= eq.max_order; ++n) {
            const WienerKernel fk = mw_kernel(n, p.t, p.x, u0, KernelForm::feynman_kac, eq.time_points);
            const WienerKernel mw = mw_kernel(n, p.t, p.x, u0, KernelForm::multiple_wiener, eq.time_points);
            const WienerKernel cs = mw_kernel(n, p.t, p.x, u0, KernelForm::chaos_symmetrized, eq.time_points);
            std::size_t total = 1;
            for (int k = 0; k < n; ++k) total *= axis.size();
            std::vector<double> a(total), b(total), c(total);
            std::vector<std::vector<double>> ys(total);
            for (std::size_t idx = 0; idx < total; ++idx) {
                std::size_t rest = idx;
                for (int k = 0; k < n; ++k) {
                    ys[idx].push_back(axis[rest % axis.size()]);
                    rest /= axis.size();
                }
            }
            parallel_for(total, ctx.threads, [&](std::size_t idx) {
                a[idx] = fk(ys[idx]);
                b[idx] = mw(ys[idx]);
                c[idx] = cs(ys[idx]);
            });
            double cs_gap = 0.0, mw_gap = 0.0, scale = 1.0;
            for (std::size_t idx = 0; idx < total; ++idx) {
                std::string y;
                for (std::size_t k = 0; k < ys[idx].size(); ++k) y += (k ? ";" : "") + format_real(ys[idx][k]);
                table.row().add(p.t).add(p.x).add(n).add(y).add(a[idx]).add(b[idx]).add(c[idx]);
                cs_gap = std::max(cs_gap, std::abs(a[idx] - c[idx]));
                mw_gap = std::max(mw_gap, std::abs(a[idx] - b[idx]));
                scale = std::max(scale, std::abs(a[idx]));
            }
            const std::string label = fmt::format("n={} t={:g},x={:g}", n, p.t, p.x);
            ctx.report.check("equivalence.fk_vs_chaos " + label, cs_gap <= eq.tolerance, cs_gap, eq.tolerance);
            const double exact_tol = 1e-12 * scale;
            ctx.report.check("equivalence.fk_vs_mw " + label, mw_gap <= exact_tol, mw_gap, exact_tol);
        }
    }
    ctx.emit("kernels.csv", table);
}

namespace {

struct CurveRequest {
    Field field;
    Direction direction;
    SpaceTimePoint base;
    bool checked;
    double lo;
    double hi;
};

}  // namespace

void run_regularity(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const auto& rg = cfg.regularity;
    const InitialCondition u0 = cfg.initial_condition.build();
    const double x0 = cfg.probes.front().x;
    const int order = std::min(cfg.truncation.max_order, FullModeSource::kMaxOrder);

    auto make_source = [&](Field field) -> std::unique_ptr<IncrementSource> {
        if (cfg.initial_condition.tag == "constant")
            return std::make_unique<FullModeSource>(cfg.initial_condition.value, field, order);
        const TruncationSpec spec{order, cfg.truncation.max_mode};
        const auto opts = cfg.quadrature_options();
        return std::make_unique<CoefficientSource>(
            [spec, u0, opts, field](SpaceTimePoint p) {
                return field == Field::solution ? cs_coefficients(spec, p.t, p.x, u0, opts)
                                                : dx_coefficients(spec, p.t, p.x, u0, opts);
            },
            spec);
    };
    const auto solution = make_source(Field::solution);
    const auto derivative = make_source(Field::derivative);

    const double inf = std::numeric_limits<double>::infinity();
    const std::vector<CurveRequest> requests{
        {Field::solution, Direction::time, {rg.time_base, x0}, true, 1.3, 1.7},
        {Field::derivative, Direction::space, {rg.space_t, x0}, true, 0.8, 1.2},
        {Field::derivative, Direction::time, {rg.time_base, x0}, true, 0.3, 0.7},
        {Field::solution, Direction::space, {rg.space_t, x0}, true, 1.8, inf},
        {Field::solution, Direction::time, {rg.informational_base, x0}, false, 1.3, 1.7},
        {Field::derivative, Direction::time, {rg.informational_base, x0}, false, 0.3, 0.7},
    };
    const auto lags = geometric_lags(rg.h_min, rg.h_max, rg.points);
    const GateOptions gate{rg.max_top_order_share, ctx.threads};

    CsvTable curves({"field", "direction", "base_t", "base_x", "h", "moment"});
    CsvTable fits({"field", "direction", "base_t", "base_x", "role", "status", "slope", "std_error", "r_squared",
                   "top_order_share", "target_lo", "target_hi"});
    for (const auto& req : requests) {
        const IncrementSource& src = req.field == Field::solution ? *solution : *derivative;
        const std::string field = to_string(req.field);
        const std::string dir = to_string(req.direction);
        const std::string role = req.checked ? "checked" : "informational";
        const std::string label = fmt::format("{}/{} base=({:g},{:g})", field, dir, req.base.t, req.base.x);
        fits.row().add(field).add(dir).add(req.base.t).add(req.base.x).add(role);
        try {
            const IncrementMomentCurve curve = increment_moments(src, req.base, req.direction, lags, gate);
            for (std::size_t i = 0; i < curve.lags.size(); ++i)
                curves.row().add(field).add(dir).add(req.base.t).add(req.base.x).add(curve.lags[i]).add(curve.moments[i]);
            const ExponentEstimate fit = fit_exponent(curve);
            const bool in_window = fit.slope >= req.lo && fit.slope <= req.hi;
            fits.add(fit.low_r_squared ? "low_r_squared" : "ok").add(fit.slope).add(fit.std_error).add(fit.r_squared);
            fits.add(curve.top_order_share).add(req.lo).add(req.hi);
            if (req.checked)
                ctx.report.check("regularity.slope " + label, in_window && !fit.low_r_squared, fit.slope,
                                 std::isfinite(req.hi) ? 0.5 * (req.lo + req.hi) : req.lo,
                                 fmt::format("window [{:g}, {:g}], R^2 {:.4f}, top-order share {:.4f}", req.lo, req.hi,
                                             fit.r_squared, curve.top_order_share));
        } catch (const TruncationGateError& e) {
            fits.add("gated").add("").add("").add("").add("").add(req.lo).add(req.hi);
            if (req.checked) ctx.report.check("regularity.slope " + label, false, 0.0, req.lo, e.what());
        }
    }
    ctx.emit("regularity_curves.csv", curves);
    ctx.emit("regularity_fits.csv", fits);
}

}  // namespace wickshe::app::detail
