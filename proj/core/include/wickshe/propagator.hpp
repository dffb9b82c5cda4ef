#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "wickshe/basis.hpp"
#include "wickshe/chaos.hpp"
#include "wickshe/kernels.hpp"

namespace wickshe {

// Crank-Nicolson on [-L, L] with reflecting (Neumann) ends.
struct PropagatorGrid {
    double dt = 0.005;
    double dx = 0.05;
    double half_width = 12.0;
    // Combine with a second solve at dx/2, dt/2 to cancel the leading error.
    bool richardson = true;
    // Test hook: with forcing off every |alpha| >= 1 coefficient stays zero.
    bool forcing_enabled = true;
};

class InstabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PropagatorSolution {
public:
    PropagatorSolution(TruncationSpec spec, std::vector<MultiIndex> indices, std::vector<double> lattice,
                       std::vector<double> times, std::vector<double> data)
        : spec_(spec), indices_(std::move(indices)), lattice_(std::move(lattice)), times_(std::move(times)),
          data_(std::move(data)) {}

    [[nodiscard]] const TruncationSpec& spec() const { return spec_; }
    [[nodiscard]] const std::vector<MultiIndex>& indices() const { return indices_; }
    [[nodiscard]] const std::vector<double>& lattice() const { return lattice_; }
    [[nodiscard]] const std::vector<double>& times() const { return times_; }

    // u_alpha(times[snapshot], lattice[i]) for alpha = indices[alpha_index].
    [[nodiscard]] std::span<const double> values(std::size_t snapshot, std::size_t alpha_index) const;

    // Cubic interpolation off-lattice; `t` must be one of the snapshot times.
    [[nodiscard]] ChaosCoefficients coefficients_at(double t, double x) const;
    // d/dx of the coefficients (fourth-order differences, then interpolation).
    [[nodiscard]] ChaosCoefficients dx_coefficients_at(double t, double x) const;

private:
    [[nodiscard]] std::size_t snapshot_index(double t) const;
    [[nodiscard]] ChaosCoefficients sample(double t, double x, bool derivative) const;

    TruncationSpec spec_;
    std::vector<MultiIndex> indices_;
    std::vector<double> lattice_;
    std::vector<double> times_;
    std::vector<double> data_;  // [snapshot][alpha][node]
};

// Solves d/dt u_alpha = 1/2 u_alpha'' + sum_j sqrt(alpha_j) e_j u_{alpha - e_j},
// u_alpha(0) = u0 1{alpha = 0}, degree by degree.
[[nodiscard]] PropagatorSolution propagator_oracle(const TruncationSpec& spec, const InitialCondition& u0,
                                                   const PropagatorGrid& grid, std::span<const double> snapshot_times);

}  // namespace wickshe
