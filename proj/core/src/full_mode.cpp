#include <algorithm>
#include <map>
#include <mutex>
#include <tuple>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "wickshe/regularity.hpp"

namespace wickshe {

namespace {

const Rule1D& unit_rule(int points, double grading, GradedEnd end) {
    static std::mutex m;
    static std::map<std::tuple<int, double, int>, Rule1D> cache;
    std::lock_guard lock(m);
    const auto key = std::make_tuple(points, grading, static_cast<int>(end));
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, graded_gauss(0.0, 1.0, points, grading, end)).first;
    return it->second;
}

template <class F>
double integrate_on(double lo, double hi, int points, double grading, GradedEnd end, F&& f) {
    const Rule1D& r = unit_rule(points, grading, end);
    const double w = hi - lo;
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * f(lo + w * r.nodes[i]);
    return w * s;
}

// G_t(a, b) = int_0^t p(r, a) K_{t-r}(b - a) dr, with r = t v^2.
double half_kernel(double t, double a, double b, int points) {
    const double c = b - a;
    const double pref = std::sqrt(2.0 * t / std::numbers::pi);
    auto integrand = [&](double v) {
        const double tau = t * (1.0 - v * v);
        if (tau <= 0.0) return 0.0;
        const double g = v > 0.0 ? std::exp(-a * a / (2.0 * t * v * v)) : 0.0;
        return pref * g * heat_potential(tau, c);
    };
    // The Gaussian factor switches on near v ~ |a| / sqrt(t).
    const double v1 = std::abs(a) / std::sqrt(t);
    if (v1 <= 1e-3 || v1 >= 0.9) return integrate_on(0.0, 1.0, points, 2.0, GradedEnd::right, integrand);
    return integrate_on(0.0, v1, points, 1.0, GradedEnd::right, integrand) +
           integrate_on(v1, 1.0, points, 2.0, GradedEnd::both, integrand);
}

// H_t(a, b) = int_0^t d/da p(r, a) K_{t-r}(b - a) dr
//           = -sgn(a) (2/sqrt(pi)) int_{|a|/sqrt(2t)}^inf exp(-z^2) K_{t - a^2/(2 z^2)}(b - a) dz.
double half_kernel_da(double t, double a, double b, int points) {
    if (a == 0.0) return 0.0;  // odd in a; the one-sided limits are -+K_t(b)
    const double c = b - a;
    const double z0 = std::abs(a) / std::sqrt(2.0 * t);
    const double z_end = z0 + 6.5;
    auto integrand = [&](double z) {
        const double tau = t - a * a / (2.0 * z * z);
        if (tau <= 0.0) return 0.0;
        return std::exp(-z * z) * heat_potential(tau, c);
    };
    double s = 0.0;
    if (z0 < 1.0) {
        const double z1 = z0 + std::max(2.0 * z0, 1e-12);
        s = integrate_on(z0, z1, points, 2.0, GradedEnd::both, integrand) +
            integrate_on(z1, z_end, points, 2.0, GradedEnd::left, integrand);
    } else {
        s = integrate_on(z0, z_end, points, 2.0, GradedEnd::left, integrand);
    }
    return (a > 0.0 ? -1.0 : 1.0) * (2.0 / std::sqrt(std::numbers::pi)) * s;
}

std::vector<double> sorted_breaks(std::vector<double> v, double lo, double hi) {
    v.push_back(lo);
    v.push_back(hi);
    std::vector<double> out;
    for (double p : v)
        if (p >= lo && p <= hi) out.push_back(p);
    std::sort(out.begin(), out.end());
    std::vector<double> uniq;
    for (double p : out)
        if (uniq.empty() || p - uniq.back() > 1e-13 * std::max(1.0, std::abs(p))) uniq.push_back(p);
    return uniq;
}

template <class F>
double piecewise_integral(const std::vector<double>& breaks, int points, F&& f) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
        s += integrate_on(breaks[i], breaks[i + 1], points, 2.0, GradedEnd::both, f);
    return s;
}

}  // namespace

FullModeSource::FullModeSource(double level, Field field, int max_order, FullModeOptions opts)
    : level_(level), field_(field), max_order_(max_order), opts_(opts) {
    if (max_order < 0 || max_order > kMaxOrder)
        throw std::invalid_argument("FullModeSource: orders 0.." + std::to_string(kMaxOrder) + " only");
}

double FullModeSource::kernel1(double t, double x, double y) const {
    if (t <= 0.0) return 0.0;
    const double z = y - x;
    return level_ * (field_ == Field::solution ? heat_potential(t, z) : -heat_potential_dz(t, z));
}

double FullModeSource::kernel2(double t, double x, double y1, double y2) const {
    if (t <= 0.0) return 0.0;
    const double a = y1 - x;
    const double b = y2 - x;
    const int m = opts_.inner_points;
    if (field_ == Field::solution) return level_ * 0.5 * (half_kernel(t, a, b, m) + half_kernel(t, b, a, m));
    return -level_ * 0.5 * (half_kernel_da(t, a, b, m) + half_kernel_da(t, b, a, m));
}

std::vector<double> FullModeSource::point_masses(SpaceTimePoint p) const {
    // F(a) = 0 at t = 0 for every order >= 1, and F_0 is the same at all points.
    std::vector<double> m = increment_masses({0.0, p.x}, p);
    m[0] = field_ == Field::solution ? level_ * level_ : 0.0;
    return m;
}

std::vector<double> FullModeSource::increment_masses(SpaceTimePoint pa, SpaceTimePoint pb) const {
    std::vector<double> m(static_cast<std::size_t>(max_order_) + 1, 0.0);
    const double tmax = std::max(pa.t, pb.t);
    if (!(tmax > 0.0)) return m;
    const double R = opts_.reach * std::sqrt(tmax);
    const double xlo = std::min(pa.x, pb.x) - R;
    const double xhi = std::max(pa.x, pb.x) + R;
    const int P = opts_.outer_points;

    if (max_order_ >= 1) {
        const auto br = sorted_breaks({pa.x, pb.x}, xlo, xhi);
        m[1] = piecewise_integral(br, P, [&](double y) {
            const double d = kernel1(pb.t, pb.x, y) - kernel1(pa.t, pa.x, y);
            return d * d;
        });
    }
    if (max_order_ >= 2) {
        // (y1, c = y2 - y1): the kernels kink on y1 = x, y1 + c = x and c = 0.
        const double shift = pb.x - pa.x;
        const auto cbr = sorted_breaks({0.0, shift, -shift}, -R, R);
        const double outer = piecewise_integral(cbr, P, [&](double c) {
            const auto ubr = sorted_breaks({pa.x, pb.x, pa.x - c, pb.x - c}, xlo, xhi);
            return piecewise_integral(ubr, P, [&](double y1) {
                const double d = kernel2(pb.t, pb.x, y1, y1 + c) - kernel2(pa.t, pa.x, y1, y1 + c);
                return d * d;
            });
        });
        m[2] = 2.0 * outer;
    }
    return m;
}

}  // namespace wickshe
