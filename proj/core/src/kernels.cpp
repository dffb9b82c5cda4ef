#include "wickshe/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace wickshe {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;  // (2 pi)^{-1/2}
constexpr double kSemigroupWindow = 10.0;           // kernel standard deviations
constexpr double kTailTolerance = 1e-8;

void require_positive_time(double t, const char* who) {
    if (!(t > 0.0)) throw std::domain_error(std::string(who) + ": time must be positive");
}

}  // namespace

double heat_kernel(double t, double x) {
    require_positive_time(t, "heat_kernel");
    return kInvSqrt2Pi / std::sqrt(t) * std::exp(-x * x / (2.0 * t));
}

double heat_kernel_dx(double t, double x) {
    require_positive_time(t, "heat_kernel_dx");
    return -(x / t) * heat_kernel(t, x);
}

double dxp_cross_inner(double t1, double t2, double x1, double x2) {
    if (!(t1 > 0.0) || !(t2 > 0.0)) throw std::domain_error("dxp_cross_inner: times must be positive");
    const double T = t1 + t2;
    const double d2 = (x1 - x2) * (x1 - x2);
    return kInvSqrt2Pi * std::exp(-d2 / (2.0 * T)) * std::pow(T, -1.5) * (1.0 - d2 / T);
}

double heat_potential(double t, double z) {
    require_positive_time(t, "heat_potential");
    const double a = std::abs(z);
    return std::sqrt(2.0 * t / std::numbers::pi) * std::exp(-a * a / (2.0 * t)) -
           a * std::erfc(a / std::sqrt(2.0 * t));
}

double heat_potential_dz(double t, double z) {
    require_positive_time(t, "heat_potential_dz");
    if (z == 0.0) return 0.0;
    const double e = std::erfc(std::abs(z) / std::sqrt(2.0 * t));
    return z > 0.0 ? -e : e;
}

// ============================================================================
// Grid
// ============================================================================

QuadratureGrid::QuadratureGrid(double half_width, int panels) : half_width_(half_width), panels_(panels) {
    if (!(half_width > 0.0)) throw std::invalid_argument("QuadratureGrid: half width must be positive");
    if (panels < 1) throw std::invalid_argument("QuadratureGrid: need at least one panel");
    const double edges[2] = {-half_width, half_width};
    rule_ = composite_gauss(edges, panels, 16);
}

QuadratureGrid QuadratureGrid::covering(double max_abs_x, double horizon, int panels) {
    return {std::abs(max_abs_x) + 6.0 * std::sqrt(std::max(horizon, 0.0)) + 6.0, panels};
}

// ============================================================================
// Initial conditions
// ============================================================================

std::string to_string(InitialTag tag) {
    switch (tag) {
        case InitialTag::constant: return "constant";
        case InitialTag::sine: return "sine";
        case InitialTag::gaussian_bump: return "gaussian_bump";
        case InitialTag::tanh: return "tanh";
        case InitialTag::custom: return "custom";
    }
    return "custom";
}

InitialCondition InitialCondition::constant(double c) {
    InitialCondition u;
    u.evaluator = [c](double) { return c; };
    u.derivative_evaluator = [](double) { return 0.0; };
    u.sup_norm = std::abs(c);
    u.lipschitz_constant = 0.0;
    u.tag = InitialTag::constant;
    u.heat_flow = [c](double, double) { return c; };
    u.heat_flow_dx = [](double, double) { return 0.0; };
    return u;
}

InitialCondition InitialCondition::sine(double amplitude, double frequency) {
    const double a = amplitude;
    const double k = frequency;
    InitialCondition u;
    u.evaluator = [a, k](double x) { return a * std::sin(k * x); };
    u.derivative_evaluator = [a, k](double x) { return a * k * std::cos(k * x); };
    u.sup_norm = std::abs(a);
    u.lipschitz_constant = std::abs(a * k);
    u.tag = InitialTag::sine;
    u.heat_flow = [a, k](double t, double x) { return a * std::exp(-0.5 * k * k * t) * std::sin(k * x); };
    u.heat_flow_dx = [a, k](double t, double x) { return a * k * std::exp(-0.5 * k * k * t) * std::cos(k * x); };
    return u;
}

InitialCondition InitialCondition::gaussian_bump(double amplitude, double width) {
    if (!(width > 0.0)) throw std::invalid_argument("gaussian_bump: width must be positive");
    const double A = amplitude;
    const double w2 = width * width;
    InitialCondition u;
    u.evaluator = [A, w2](double x) { return A * std::exp(-x * x / (2.0 * w2)); };
    u.derivative_evaluator = [A, w2](double x) { return -A * x / w2 * std::exp(-x * x / (2.0 * w2)); };
    u.sup_norm = std::abs(A);
    u.lipschitz_constant = std::abs(A) / (std::sqrt(w2) * std::sqrt(std::numbers::e));
    u.tag = InitialTag::gaussian_bump;
    u.heat_flow = [A, w2](double t, double x) {
        const double v = w2 + t;
        return A * std::sqrt(w2 / v) * std::exp(-x * x / (2.0 * v));
    };
    u.heat_flow_dx = [A, w2](double t, double x) {
        const double v = w2 + t;
        return -A * x / v * std::sqrt(w2 / v) * std::exp(-x * x / (2.0 * v));
    };
    return u;
}

InitialCondition InitialCondition::tanh_profile(double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("tanh_profile: scale must be positive");
    InitialCondition u;
    u.evaluator = [scale](double x) { return std::tanh(x / scale); };
    u.derivative_evaluator = [scale](double x) {
        const double c = std::cosh(x / scale);
        return 1.0 / (scale * c * c);
    };
    u.sup_norm = 1.0;
    u.lipschitz_constant = 1.0 / scale;
    u.tag = InitialTag::tanh;
    return u;
}

// ============================================================================
// Heat semigroup
// ============================================================================

namespace {

template <class Kernel>
double semigroup_on_grid(const InitialCondition& u0, double t, double x, const QuadratureGrid& grid, Kernel kernel,
                         const char* who) {
    require_positive_time(t, who);
    const double L = grid.half_width();
    const double sd = std::sqrt(t);
    if (L < std::abs(x) + 6.0 * sd)
        throw CoverageError(std::string(who) + ": grid half width " + std::to_string(L) + " does not cover |x| + 6 sqrt(t)");
    const double tail = u0.sup_norm * std::erfc((L - std::abs(x)) / (std::numbers::sqrt2 * sd));
    if (tail > kTailTolerance * std::max(1.0, u0.sup_norm))
        throw CoverageError(std::string(who) + ": truncation tail " + std::to_string(tail) + " exceeds tolerance");

    const double lo = std::max(-L, x - kSemigroupWindow * sd);
    const double hi = std::min(L, x + kSemigroupWindow * sd);
    const int panels = std::max(8, static_cast<int>(std::ceil(grid.panels() * (hi - lo) / (2.0 * L))));
    const double edges[2] = {lo, hi};
    const Rule1D rule = composite_gauss(edges, panels, 16);
    return rule.integrate([&](double y) { return kernel(t, x - y) * u0(y); });
}

}  // namespace

double apply_heat_semigroup(const InitialCondition& u0, double t, double x, const QuadratureGrid& grid) {
    return semigroup_on_grid(u0, t, x, grid, [](double s, double z) { return heat_kernel(s, z); },
                             "apply_heat_semigroup");
}

double heat_semigroup_dx(const InitialCondition& u0, double t, double x, const QuadratureGrid& grid) {
    return semigroup_on_grid(u0, t, x, grid, [](double s, double z) { return heat_kernel_dx(s, z); },
                             "heat_semigroup_dx");
}

namespace {

// Composite Gauss-Legendre on [-9, 9] in units of the standard deviation,
// weighted by the standard normal density. Unlike Gauss-Hermite it keeps its
// accuracy for integrands with poles near the real axis (tanh).
const Rule1D& gaussian_weighted_rule(int nodes) {
    static std::map<int, Rule1D> cache;
    static std::mutex m;
    std::lock_guard lock(m);
    auto it = cache.find(nodes);
    if (it == cache.end()) {
        const double edges[2] = {-9.0, 9.0};
        Rule1D r = composite_gauss(edges, std::max(1, nodes / 16), 16);
        for (std::size_t i = 0; i < r.nodes.size(); ++i)
            r.weights[i] *= std::exp(-0.5 * r.nodes[i] * r.nodes[i]) / std::sqrt(2.0 * std::numbers::pi);
        it = cache.emplace(nodes, std::move(r)).first;
    }
    return it->second;
}

}  // namespace

double heat_flow_value(const InitialCondition& u0, double t, double y, int flow_nodes) {
    if (t <= 0.0) return u0(y);
    if (u0.heat_flow) return u0.heat_flow(t, y);
    const double sd = std::sqrt(t);
    return gaussian_weighted_rule(flow_nodes).integrate([&](double z) { return u0(y + sd * z); });
}

double heat_flow_dx_value(const InitialCondition& u0, double t, double y, int flow_nodes) {
    if (u0.heat_flow_dx && t > 0.0) return u0.heat_flow_dx(t, y);
    if (!u0.has_derivative()) throw std::invalid_argument("heat_flow_dx_value: initial condition has no derivative");
    if (t <= 0.0) return u0.derivative_evaluator(y);
    const double sd = std::sqrt(t);
    return gaussian_weighted_rule(flow_nodes).integrate([&](double z) { return u0.derivative_evaluator(y + sd * z); });
}

}  // namespace wickshe
