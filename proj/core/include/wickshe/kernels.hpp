#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wickshe/quadrature.hpp"

namespace wickshe {

// p(t,x) = (2 pi t)^{-1/2} exp(-x^2 / 2t)
[[nodiscard]] double heat_kernel(double t, double x);
[[nodiscard]] double heat_kernel_dx(double t, double x);

// int dz d/dx p(t1, x1 - z) d/dx p(t2, x2 - z), closed form.
[[nodiscard]] double dxp_cross_inner(double t1, double t2, double x1, double x2);

// K_t(z) = int_0^t p(s, z) ds, the expected local time at level z of a
// Brownian motion started at 0.
[[nodiscard]] double heat_potential(double t, double z);
// d/dz K_t(z) = -sgn(z) erfc(|z| / sqrt(2t)); 0 at z = 0.
[[nodiscard]] double heat_potential_dz(double t, double z);

class CoverageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class QuadratureGrid {
public:
    // Composite Gauss-Legendre on [-L, L], `panels` panels of 16 nodes.
    QuadratureGrid(double half_width, int panels);

    // L = max|x| + 6 sqrt(T) + 6
    static QuadratureGrid covering(double max_abs_x, double horizon, int panels = 64);

    [[nodiscard]] double half_width() const { return half_width_; }
    [[nodiscard]] int panels() const { return panels_; }
    [[nodiscard]] const std::vector<double>& nodes() const { return rule_.nodes; }
    [[nodiscard]] const std::vector<double>& weights() const { return rule_.weights; }

    template <class F>
    [[nodiscard]] double integrate(F&& f) const {
        return rule_.integrate(std::forward<F>(f));
    }

private:
    double half_width_;
    int panels_;
    Rule1D rule_;
};

enum class InitialTag { constant, sine, gaussian_bump, tanh, custom };

[[nodiscard]] std::string to_string(InitialTag tag);

struct InitialCondition {
    std::function<double(double)> evaluator;
    std::function<double(double)> derivative_evaluator;  // may be empty
    double sup_norm = 0.0;
    std::optional<double> lipschitz_constant;
    InitialTag tag = InitialTag::custom;
    // Closed-form heat flow (P_t u0)(x) and its x-derivative, when known.
    std::function<double(double, double)> heat_flow;
    std::function<double(double, double)> heat_flow_dx;

    [[nodiscard]] double operator()(double x) const { return evaluator(x); }
    [[nodiscard]] bool has_derivative() const { return static_cast<bool>(derivative_evaluator); }

    static InitialCondition constant(double c = 1.0);
    static InitialCondition sine(double amplitude = 1.0, double frequency = 1.0);
    static InitialCondition gaussian_bump(double amplitude = 1.0, double width = 1.0);
    static InitialCondition tanh_profile(double scale = 1.0);
};

// u_(0)(t,x) = int p(t, x-y) u0(y) dy on the grid.
[[nodiscard]] double apply_heat_semigroup(const InitialCondition& u0, double t, double x, const QuadratureGrid& grid);
// d/dx of the above, through the differentiated kernel.
[[nodiscard]] double heat_semigroup_dx(const InitialCondition& u0, double t, double x, const QuadratureGrid& grid);

// (P_t u0)(y) for internal use: closed form when available, otherwise
// a composite Gaussian-weighted rule with `flow_nodes` nodes. t = 0 returns u0(y).
[[nodiscard]] double heat_flow_value(const InitialCondition& u0, double t, double y, int flow_nodes = 256);
[[nodiscard]] double heat_flow_dx_value(const InitialCondition& u0, double t, double y, int flow_nodes = 256);

}  // namespace wickshe
