#include "wickshe/regularity.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

namespace wickshe {

std::string to_string(Direction d) { return d == Direction::space ? "space" : "time"; }

std::string to_string(Field f) { return f == Field::solution ? "solution" : "derivative"; }

// ============================================================================
// Coefficient-backed source
// ============================================================================

const ChaosCoefficients& CoefficientSource::at(SpaceTimePoint p) const {
    const std::pair<double, double> key{p.t, p.x};
    {
        std::lock_guard lock(mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    ChaosCoefficients c = supplier_(p);
    if (!(c.spec() == spec_)) throw std::invalid_argument("CoefficientSource: supplier returned a different truncation");
    std::lock_guard lock(mutex_);
    return cache_.try_emplace(key, std::move(c)).first->second;
}

std::vector<double> CoefficientSource::point_masses(SpaceTimePoint p) const { return order_masses(at(p)); }

std::vector<double> CoefficientSource::increment_masses(SpaceTimePoint a, SpaceTimePoint b) const {
    const ChaosCoefficients& ca = at(a);
    const ChaosCoefficients& cb = at(b);
    std::vector<double> m(static_cast<std::size_t>(spec_.max_order) + 1, 0.0);
    for (const auto& [alpha, v] : cb.values()) {
        const double d = v - ca.get(alpha);
        m[alpha.degree()] += d * d;
    }
    for (const auto& [alpha, v] : ca.values())
        if (!cb.values().contains(alpha)) m[alpha.degree()] += v * v;
    return m;
}

// ============================================================================
// Moment curves
// ============================================================================

namespace {

double top_share(const std::vector<double>& masses) {
    double total = 0.0;
    for (double v : masses) total += v;
    return total > 0.0 ? masses.back() / total : 0.0;
}

template <class F>
void parallel_for(std::size_t n, int threads, F&& body) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
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
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

IncrementMomentCurve increment_moments(const IncrementSource& field, SpaceTimePoint base, Direction direction,
                                       std::span<const double> lags, const GateOptions& gate) {
    if (lags.empty()) throw std::invalid_argument("increment_moments: no lags");
    for (std::size_t i = 0; i < lags.size(); ++i) {
        if (!(lags[i] > 0.0)) throw std::invalid_argument("increment_moments: lags must be positive");
        if (i > 0 && !(lags[i] > lags[i - 1])) throw std::invalid_argument("increment_moments: lags must increase");
    }
    if (base.t < 0.0) throw std::invalid_argument("increment_moments: base time must be non-negative");

    IncrementMomentCurve curve;
    curve.lags.assign(lags.begin(), lags.end());
    curve.direction = direction;
    curve.base = base;
    const std::size_t n = lags.size();
    std::vector<std::vector<double>> inc(n);
    std::vector<std::vector<double>> at_far(n);
    parallel_for(n, gate.threads, [&](std::size_t i) {
        const SpaceTimePoint far = direction == Direction::space ? SpaceTimePoint{base.t, base.x + lags[i]}
                                                                 : SpaceTimePoint{base.t + lags[i], base.x};
        inc[i] = field.increment_masses(base, far);
        at_far[i] = field.point_masses(far);
    });

    double share = top_share(field.point_masses(base));
    curve.moments.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double total = 0.0;
        for (double v : inc[i]) total += v;
        curve.moments[i] = total;
        share = std::max({share, top_share(inc[i]), top_share(at_far[i])});
    }
    curve.top_order_share = share;
    if (field.max_order() > 0 && share > gate.max_top_order_share)
        throw TruncationGateError("increment_moments: degree-" + std::to_string(field.max_order()) + " share " +
                                  std::to_string(share) + " exceeds " + std::to_string(gate.max_top_order_share));
    for (std::size_t i = 1; i < n; ++i)
        if (curve.moments[i] < curve.moments[i - 1]) curve.monotone = false;
    return curve;
}

ExponentEstimate fit_exponent(std::span<const double> lags, std::span<const double> moments) {
    if (lags.size() != moments.size()) throw std::invalid_argument("fit_exponent: length mismatch");
    const std::size_t n = lags.size();
    if (n < static_cast<std::size_t>(kMinFitPoints))
        throw std::invalid_argument("fit_exponent: need at least " + std::to_string(kMinFitPoints) + " points");
    std::vector<double> X(n), Y(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(lags[i] > 0.0) || !(moments[i] > 0.0))
            throw std::domain_error("fit_exponent: lags and moments must be positive");
        X[i] = std::log(lags[i]);
        Y[i] = std::log(moments[i]);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += X[i];
        my += Y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (X[i] - mx) * (X[i] - mx);
        sxy += (X[i] - mx) * (Y[i] - my);
        syy += (Y[i] - my) * (Y[i] - my);
    }
    if (!(sxx > 0.0)) throw std::domain_error("fit_exponent: lags do not span a log range");
    if (!(syy > 1e-24 * std::max(1.0, my * my * static_cast<double>(n))))
        throw std::domain_error("fit_exponent: moments do not span a log range");

    ExponentEstimate e;
    e.slope = sxy / sxx;
    const double intercept = my - e.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = Y[i] - intercept - e.slope * X[i];
        sse += r * r;
    }
    e.r_squared = std::clamp(1.0 - sse / syy, 0.0, 1.0);
    e.std_error = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
    e.h_min = *std::min_element(lags.begin(), lags.end());
    e.h_max = *std::max_element(lags.begin(), lags.end());
    e.n_points = static_cast<int>(n);
    e.low_r_squared = e.r_squared < 0.98;
    return e;
}

ExponentEstimate fit_exponent(const IncrementMomentCurve& curve) { return fit_exponent(curve.lags, curve.moments); }

std::vector<double> geometric_lags(double h_min, double h_max, int points) {
    if (!(h_min > 0.0) || !(h_max > h_min) || points < 2)
        throw std::invalid_argument("geometric_lags: need 0 < h_min < h_max and >= 2 points");
    std::vector<double> h(static_cast<std::size_t>(points));
    const double r = std::log(h_max / h_min) / (points - 1);
    for (int i = 0; i < points; ++i) h[static_cast<std::size_t>(i)] = h_min * std::exp(r * i);
    h.front() = h_min;
    h.back() = h_max;
    return h;
}

// ============================================================================
// Local-time increments
// ============================================================================

double local_time_increment_exact(double t, double h) {
    if (!(t > 0.0)) throw std::invalid_argument("local_time_increment_exact: t must be positive");
    if (h == 0.0) return 0.0;
    // s = u^2 removes the s^{-1/2} endpoint behaviour of p(s, 0); the
    // remaining layer at u ~ |h| gets geometric breakpoints.
    const double root = std::sqrt(t);
    std::vector<double> edges{0.0};
    for (double b = std::abs(h) / 16.0; b < root; b *= 2.0) edges.push_back(b);
    edges.push_back(root);
    const Rule1D rule = composite_gauss(edges, 2, 16);
    const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    return 4.0 * rule.integrate([&](double u) {
        const double s = u * u;
        // (p(s,0) - p(s,h)) ds = c (1 - e^{-h^2/2s}) s^{-1/2} 2u du
        return (t - s) * c * 2.0 * (-std::expm1(-h * h / (2.0 * s)));
    });
}

double local_time_spacing(double h, double dt) {
    const double root = std::sqrt(dt);
    if (h < root) throw std::invalid_argument("local_time_increment_check: lag below the histogram resolution sqrt(dt)");
    const double m = std::max(2.0, std::ceil(h / root - 1e-12));
    return h / m;
}

std::vector<LocalTimeIncrementRow> local_time_increment_check(double t, std::span<const double> h_values,
                                                             const StreamFactory& streams, const McOptions& opts) {
    if (!(t > 0.0)) throw std::invalid_argument("local_time_increment_check: t must be positive");
    std::vector<LocalTimeIncrementRow> rows(h_values.size());
    std::vector<std::size_t> active;
    std::vector<LevelGrid> grids;
    std::vector<std::size_t> shifts;
    for (std::size_t i = 0; i < h_values.size(); ++i) {
        const double h = h_values[i];
        if (h < 0.0) throw std::invalid_argument("local_time_increment_check: negative lag");
        rows[i].h = h;
        if (h == 0.0) continue;
        const double da = local_time_spacing(h, opts.dt);
        rows[i].spacing = da;
        rows[i].exact_ratio = local_time_increment_exact(t, h) / h;
        active.push_back(i);
        grids.push_back(LevelGrid::centered(0.0, 8.0 * std::sqrt(t), da));
        shifts.push_back(static_cast<std::size_t>(std::lround(h / da)));
    }
    if (active.empty()) return rows;
    const auto est = ensemble_means(opts.n_paths, active.size(), opts, [&](std::size_t i, std::span<double> out) {
        PhiloxEngine eng = streams.engine("paths", i);
        const BrownianPath path = simulate_path(t, opts.dt, 0.0, eng);
        for (std::size_t k = 0; k < active.size(); ++k)
            out[k] = local_time(path, grids[k]).shifted_increment(shifts[k]) / h_values[active[k]];
    });
    for (std::size_t k = 0; k < active.size(); ++k) {
        rows[active[k]].ratio = est[k].value;
        rows[active[k]].std_error = est[k].std_error;
    }
    return rows;
}

}  // namespace wickshe
