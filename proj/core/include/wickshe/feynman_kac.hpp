#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "wickshe/basis.hpp"
#include "wickshe/kernels.hpp"
#include "wickshe/rng.hpp"

namespace wickshe {

// ============================================================================
// Paths and local time
// ============================================================================

struct BrownianPath {
    double t = 0.0;
    double dt = 0.0;
    std::vector<double> positions;  // B at t_0 = 0, t_1, ..., t_M = t

    [[nodiscard]] double start() const { return positions.front(); }
    [[nodiscard]] std::size_t steps() const { return positions.size() - 1; }
    // Length of step i (the last one may be shortened).
    [[nodiscard]] double step_length(std::size_t i) const;
    [[nodiscard]] std::vector<double> t_grid() const;
};

// Exact Gaussian skeleton; the last step is shortened so it ends at t.
[[nodiscard]] BrownianPath simulate_path(double t, double dt, double x, PhiloxEngine& engine);

// Uniform levels a_k = origin + k * spacing, k = 0..count-1.
struct LevelGrid {
    double origin = 0.0;
    double spacing = 0.0;
    std::size_t count = 0;

    [[nodiscard]] double level(std::size_t k) const { return origin + spacing * static_cast<double>(k); }
    [[nodiscard]] double front() const { return origin; }
    [[nodiscard]] double back() const { return level(count - 1); }
    // Levels centred on x (x itself is a level) covering x +- half_width.
    static LevelGrid centered(double x, double half_width, double spacing);
    [[nodiscard]] bool matches(const LevelGrid& other) const;
};

struct LocalTimeProfile {
    LevelGrid grid;
    std::vector<double> values;

    [[nodiscard]] double total() const;        // spacing * sum = t
    [[nodiscard]] double l2_squared() const;   // spacing * sum L^2
    // spacing * sum_k (L_k - L_{k-m})^2, levels outside the grid count as zero.
    [[nodiscard]] double shifted_increment(std::size_t m) const;
};

// Occupation histogram: bin k collects the step lengths of samples B_{t_i}
// (i < M) within spacing/2 of a_k, divided by the spacing.
[[nodiscard]] LocalTimeProfile local_time(const BrownianPath& path, const LevelGrid& grid);

// Left-endpoint Riemann sum of int_0^t phi(B_s) ds.
[[nodiscard]] double occupation_functional(const BrownianPath& path, const std::function<double(double)>& phi);

// ============================================================================
// Noise
// ============================================================================

enum class NoiseProvenance { grid_increments, mode_coordinates };

struct NoiseRealization {
    LevelGrid grid;
    std::vector<double> increments;  // dW over each level cell, variance = spacing
    GaussianCoordinates modes;       // W_{e_j} = sum_i e_j(a_i) dW_i
    NoiseProvenance provenance = NoiseProvenance::grid_increments;

    static NoiseRealization zero(const LevelGrid& grid, int max_mode);
};

[[nodiscard]] NoiseRealization sample_noise(const LevelGrid& grid, int max_mode, PhiloxEngine& engine);
// Grid view of the projected noise sum_j g_j e_j.
[[nodiscard]] NoiseRealization noise_from_modes(const LevelGrid& grid, const GaussianCoordinates& g);

struct PsiSample {
    double stochastic_integral = 0.0;  // sum L(a_i) dW_i
    double quadratic_term = 0.0;       // spacing/2 * sum L(a_i)^2
    [[nodiscard]] double value() const { return stochastic_integral - quadratic_term; }
};

[[nodiscard]] PsiSample psi_sample(const LocalTimeProfile& profile, const NoiseRealization& noise);

// ============================================================================
// Monte Carlo
// ============================================================================

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
};

struct McOptions {
    double dt = 1e-3;
    std::size_t n_paths = 100000;
    int threads = 1;
    std::size_t block_size = 1024;  // paths per reduction block
};

// Mean and standard error of k statistics over n independent items. The
// callback fills out[0..k) for item i; partial sums are formed per block and
// reduced in block order, so results do not depend on the thread count.
[[nodiscard]] std::vector<Estimate> ensemble_means(std::size_t n_items, std::size_t k, const McOptions& opts,
                                     const std::function<void(std::size_t, std::span<double>)>& sample);

struct TestFunction {
    std::function<double(double)> value;
    std::function<double(double)> derivative;
    double sup_norm = 0.0;

    [[nodiscard]] double operator()(double x) const { return value(x); }

    static TestFunction zero();
    static TestFunction constant(double c);
    static TestFunction hermite_mode(int j, double scale);
    static TestFunction gaussian_bump(double amplitude, double center, double width);
};

// Default level grid for noise seen by paths on [0, t] from x: x +- 8 sqrt(t).
[[nodiscard]] LevelGrid default_noise_grid(double t, double x, double spacing);

// One sample of u(t,x) given the noise: path average of u0(B_t) exp(Psi).
[[nodiscard]] Estimate fk_conditional_estimate(double t, double x, const InitialCondition& u0,
                                               const NoiseRealization& noise, const StreamFactory& streams,
                                               const McOptions& opts);

// S(u(t,x))(phi) = E u0(B_t) exp(int_0^t phi(B_s) ds).
[[nodiscard]] Estimate s_transform_mc(double t, double x, const InitialCondition& u0, const TestFunction& phi,
                                      const StreamFactory& streams, const McOptions& opts);

// S(d/dx u(t,x))(phi).
[[nodiscard]] Estimate s_transform_dx_mc(double t, double x, const InitialCondition& u0, const TestFunction& phi,
                                         const StreamFactory& streams, const McOptions& opts);

}  // namespace wickshe
