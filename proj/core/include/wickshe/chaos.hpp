#pragma once

#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "wickshe/basis.hpp"
#include "wickshe/kernels.hpp"

namespace wickshe {

struct SpaceTimePoint {
    double t = 0.0;
    double x = 0.0;
    friend bool operator==(const SpaceTimePoint&, const SpaceTimePoint&) = default;
};

class ChaosCoefficients {
public:
    using Map = std::map<MultiIndex, double, GradedLess>;

    ChaosCoefficients() = default;
    ChaosCoefficients(SpaceTimePoint point, TruncationSpec spec) : point_(point), spec_(spec) {}

    void set(const MultiIndex& alpha, double value);
    void add(const MultiIndex& alpha, double value);
    [[nodiscard]] double get(const MultiIndex& alpha) const;

    [[nodiscard]] const Map& values() const { return values_; }
    [[nodiscard]] SpaceTimePoint point() const { return point_; }
    [[nodiscard]] const TruncationSpec& spec() const { return spec_; }
    [[nodiscard]] std::size_t size() const { return values_.size(); }

private:
    SpaceTimePoint point_{};
    TruncationSpec spec_{};
    Map values_;
};

class NonConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ChaosQuadratureOptions {
    int time_points = 24;     // per simplex axis
    int gh_nodes = 64;        // Gauss-Hermite nodes per spatial integral
    double grading = 2.0;
    int flow_nodes = 256;     // only used when u0 has no closed-form heat flow
    bool refinement_check = true;  // dx_coefficient: recompute with finer time mesh
    double refinement_tolerance = 1e-6;
};

// u_alpha(t,x) from the iterated heat-kernel formula (|alpha| <= 4).
[[nodiscard]] double cs_coefficient(const MultiIndex& alpha, double t, double x, const InitialCondition& u0,
                                    const ChaosQuadratureOptions& opts = {});

// K_alpha^eps(t,x), the chaos coefficient of d/dx u with the simplex cut at t - eps.
[[nodiscard]] double dx_coefficient(const MultiIndex& alpha, double t, double x, const InitialCondition& u0,
                                    double epsilon = 0.0, const ChaosQuadratureOptions& opts = {});

// All coefficients of the given spec at one point by quadrature (orders <= 4).
[[nodiscard]] ChaosCoefficients cs_coefficients(const TruncationSpec& spec, double t, double x,
                                                const InitialCondition& u0, const ChaosQuadratureOptions& opts = {});
[[nodiscard]] ChaosCoefficients dx_coefficients(const TruncationSpec& spec, double t, double x,
                                                const InitialCondition& u0, const ChaosQuadratureOptions& opts = {});

// Richardson extrapolation of K^eps over eps0, eps0/2, eps0/4, eps0/8 (error expansion in integer powers of eps).
struct EpsilonSequence {
    std::vector<double> epsilons;
    std::vector<double> values;
    double extrapolated = 0.0;
};
[[nodiscard]] EpsilonSequence dx_epsilon_sequence(const MultiIndex& alpha, double t, double x,
                                                  const InitialCondition& u0, double eps0 = 0.2,
                                                  const ChaosQuadratureOptions& opts = {});

// ============================================================================
// Multiple Wiener kernels
// ============================================================================

enum class KernelForm {
    feynman_kac,        // local-time ordering from x outward
    multiple_wiener,    // same integrand after r = t - s
    chaos_symmetrized,  // Sym F^CS, integrated on its own time nodes
};

struct WienerKernel {
    int order = 0;
    SpaceTimePoint point{};
    std::function<double(std::span<const double>)> evaluator;

    [[nodiscard]] double operator()(std::span<const double> y) const { return evaluator(y); }
};

inline constexpr int kKernelOrderCap = 3;

[[nodiscard]] WienerKernel mw_kernel(int n, double t, double x, const InitialCondition& u0,
                                     KernelForm form = KernelForm::feynman_kac, int time_points = 32);

// ============================================================================
// Algebra on truncated expansions
// ============================================================================

[[nodiscard]] double second_moment(const ChaosCoefficients& c);
// Per-degree masses sum_{|alpha| = n} c_alpha^2, n = 0..N.
[[nodiscard]] std::vector<double> order_masses(const ChaosCoefficients& c);
[[nodiscard]] double sample_realization(const ChaosCoefficients& c, const GaussianCoordinates& g);

struct WickProduct {
    ChaosCoefficients product;
    double dropped_mass = 0.0;  // sum of squares of the coefficients beyond degree N
};
[[nodiscard]] WickProduct wick_product(const ChaosCoefficients& F, const ChaosCoefficients& G);

[[nodiscard]] double s_transform_chaos(const ChaosCoefficients& c, std::span<const double> phi_modes);
// Contribution of each degree to the S-transform.
[[nodiscard]] std::vector<double> s_transform_terms(const ChaosCoefficients& c, std::span<const double> phi_modes);
// Geometric extrapolation of the per-degree Cauchy-Schwarz bounds beyond N.
[[nodiscard]] double s_transform_tail_estimate(const ChaosCoefficients& c, std::span<const double> phi_modes);

[[nodiscard]] double order_norm(const ChaosCoefficients& c, int n, double lambda);

// Coefficients of the stochastic exponential E(psi): prod psi_j^{a_j} / sqrt(a_j!).
[[nodiscard]] ChaosCoefficients stochastic_exponential(const TruncationSpec& spec, std::span<const double> psi);

}  // namespace wickshe
