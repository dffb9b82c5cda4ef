#pragma once

#include <functional>
#include <span>
#include <vector>

namespace wickshe {

struct Rule1D {
    std::vector<double> nodes;
    std::vector<double> weights;

    template <class F>
    [[nodiscard]] double integrate(F&& f) const {
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
        return s;
    }
};

// n-point Gauss-Legendre on [-1, 1].
[[nodiscard]] const Rule1D& gauss_legendre(int n);

// Probabilists' Gauss-Hermite: sum w_i f(x_i) ~ E f(Z), Z ~ N(0,1).
[[nodiscard]] const Rule1D& gauss_hermite(int n);

// Composite Gauss-Legendre over consecutive breakpoints, `panels` equal
// panels per interval, `per_panel` nodes each.
[[nodiscard]] Rule1D composite_gauss(std::span<const double> breakpoints, int panels, int per_panel = 16);

// Composite rule on [a, b] whose panel widths grow geometrically away from
// the singular endpoint(s); `grading` > 1 is the algebraic mesh exponent.
enum class GradedEnd { left, right, both };
[[nodiscard]] Rule1D graded_gauss(double a, double b, int points, double grading, GradedEnd end);

// ============================================================================
// Simplex quadrature on T^n_[0,t] = {0 <= s_1 <= ... <= s_n <= t}
// ============================================================================

inline constexpr int kSimplexOrderCap = 4;

struct SimplexSpec {
    int order = 1;
    double horizon = 1.0;
    int points_per_axis = 24;
    double grading = 2.0;
};

// Tensor rule on the simplex: node k has coordinates s[k*n .. k*n+n-1]
// (sorted increasingly) and weight w[k].
struct SimplexRule {
    int order = 0;
    std::vector<double> s;
    std::vector<double> w;
    [[nodiscard]] std::size_t size() const { return w.size(); }
    [[nodiscard]] std::span<const double> node(std::size_t k) const {
        return {s.data() + k * static_cast<std::size_t>(order), static_cast<std::size_t>(order)};
    }
};

[[nodiscard]] SimplexRule make_simplex_rule(const SimplexSpec& spec);

[[nodiscard]] double simplex_quadrature(const SimplexSpec& spec,
                                        const std::function<double(std::span<const double>)>& integrand);

}  // namespace wickshe
