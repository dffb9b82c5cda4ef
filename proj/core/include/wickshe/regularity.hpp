#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wickshe/chaos.hpp"
#include "wickshe/feynman_kac.hpp"

namespace wickshe {

enum class Direction { space, time };
enum class Field { solution, derivative };

[[nodiscard]] std::string to_string(Direction d);
[[nodiscard]] std::string to_string(Field f);

// Per-degree second moments of chaos fields and of their increments.
class IncrementSource {
public:
    virtual ~IncrementSource() = default;
    // sum_{|alpha| = n} F_alpha(p)^2, n = 0..max_order().
    [[nodiscard]] virtual std::vector<double> point_masses(SpaceTimePoint p) const = 0;
    // sum_{|alpha| = n} (F_alpha(b) - F_alpha(a))^2.
    [[nodiscard]] virtual std::vector<double> increment_masses(SpaceTimePoint a, SpaceTimePoint b) const = 0;
    [[nodiscard]] virtual int max_order() const = 0;
};

// The literal sum over multi-indices of a coefficient supplier (quadrature or
// propagator). Suppliers are called once per distinct point.
class CoefficientSource final : public IncrementSource {
public:
    using Supplier = std::function<ChaosCoefficients(SpaceTimePoint)>;
    CoefficientSource(Supplier supplier, TruncationSpec spec) : supplier_(std::move(supplier)), spec_(spec) {}

    [[nodiscard]] std::vector<double> point_masses(SpaceTimePoint p) const override;
    [[nodiscard]] std::vector<double> increment_masses(SpaceTimePoint a, SpaceTimePoint b) const override;
    [[nodiscard]] int max_order() const override { return spec_.max_order; }

private:
    const ChaosCoefficients& at(SpaceTimePoint p) const;

    Supplier supplier_;
    TruncationSpec spec_;
    mutable std::mutex mutex_;
    mutable std::map<std::pair<double, double>, ChaosCoefficients> cache_;
};

struct FullModeOptions {
    int outer_points = 24;  // per piece of the 1-D / 2-D spatial rules
    int inner_points = 40;  // per piece of the kernel time integrals
    double reach = 9.0;     // spatial cut-off in units of sqrt(t)
};

// u0 = constant: orders 0..2 summed over all Hermite modes, i.e. n! ||F_n(b) - F_n(a)||^2
// from the closed-form order-1 kernel and a quadrature of the order-2 kernel.
class FullModeSource final : public IncrementSource {
public:
    static constexpr int kMaxOrder = 2;
    FullModeSource(double level, Field field, int max_order = 2, FullModeOptions opts = {});

    [[nodiscard]] std::vector<double> point_masses(SpaceTimePoint p) const override;
    [[nodiscard]] std::vector<double> increment_masses(SpaceTimePoint a, SpaceTimePoint b) const override;
    [[nodiscard]] int max_order() const override { return max_order_; }

    // Kernels, exposed for tests: F_1(t,x; y) and F_2(t,x; y1, y2).
    [[nodiscard]] double kernel1(double t, double x, double y) const;
    [[nodiscard]] double kernel2(double t, double x, double y1, double y2) const;

private:
    double level_;
    Field field_;
    int max_order_;
    FullModeOptions opts_;
};

// ============================================================================
// Moment curves and exponent fits
// ============================================================================

class TruncationGateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct IncrementMomentCurve {
    std::vector<double> lags;
    std::vector<double> moments;
    Direction direction = Direction::space;
    SpaceTimePoint base{};
    // Largest share of the top chaos degree in any probed field value or increment.
    double top_order_share = 0.0;
    bool monotone = true;
};

struct GateOptions {
    double max_top_order_share = 0.05;
    int threads = 1;
};

[[nodiscard]] IncrementMomentCurve increment_moments(const IncrementSource& field, SpaceTimePoint base,
                                                     Direction direction, std::span<const double> lags,
                                                     const GateOptions& gate = {});

struct ExponentEstimate {
    double slope = 0.0;
    double std_error = 0.0;
    double r_squared = 0.0;
    double h_min = 0.0;
    double h_max = 0.0;
    int n_points = 0;
    bool low_r_squared = false;  // R^2 < 0.98

    [[nodiscard]] double holder_exponent() const { return slope / 2.0; }
};

inline constexpr int kMinFitPoints = 6;

[[nodiscard]] ExponentEstimate fit_exponent(std::span<const double> lags, std::span<const double> moments);
[[nodiscard]] ExponentEstimate fit_exponent(const IncrementMomentCurve& curve);

// `points` lags spaced geometrically from h_min to h_max inclusive.
[[nodiscard]] std::vector<double> geometric_lags(double h_min, double h_max, int points);

// ============================================================================
// Local-time increments
// ============================================================================

// E int (L_a(t) - L_{a-h}(t))^2 da for a Brownian motion from 0,
// = 4 int_0^t (t - s)(p(s,0) - p(s,h)) ds.
[[nodiscard]] double local_time_increment_exact(double t, double h);

// Histogram spacing used for lag h: the largest h/m (m >= 2 integer) not above sqrt(dt).
[[nodiscard]] double local_time_spacing(double h, double dt);

struct LocalTimeIncrementRow {
    double h = 0.0;
    double ratio = 0.0;  // E int (L_a - L_{a-h})^2 da / h
    double std_error = 0.0;
    double spacing = 0.0;
    double exact_ratio = 0.0;
};

[[nodiscard]] std::vector<LocalTimeIncrementRow> local_time_increment_check(double t, std::span<const double> h_values,
                                                                           const StreamFactory& streams,
                                                                           const McOptions& opts);

}  // namespace wickshe
