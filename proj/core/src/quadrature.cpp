#include "wickshe/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

namespace wickshe {

namespace {

Rule1D build_gauss_legendre(int n) {
    Rule1D r;
    const auto zeros = boost::math::legendre_p_zeros<double>(n);  // non-negative half
    std::vector<std::pair<double, double>> nw;
    for (double z : zeros) {
        const double dp = boost::math::legendre_p_prime(n, z);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        nw.emplace_back(z, w);
        if (z != 0.0) nw.emplace_back(-z, w);
    }
    std::sort(nw.begin(), nw.end());
    for (auto [x, w] : nw) {
        r.nodes.push_back(x);
        r.weights.push_back(w);
    }
    return r;
}

Rule1D build_gauss_hermite(int n) {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        jac(k, k - 1) = std::sqrt(static_cast<double>(k));
        jac(k - 1, k) = jac(k, k - 1);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
    Rule1D r;
    for (int i = 0; i < n; ++i) {
        r.nodes.push_back(es.eigenvalues()(i));
        const double v0 = es.eigenvectors()(0, i);
        r.weights.push_back(v0 * v0);
    }
    // symmetrize to remove eigen-solver asymmetry in the last digits
    for (int i = 0; i < n / 2; ++i) {
        const int k = n - 1 - i;
        const double x = 0.5 * (r.nodes[k] - r.nodes[i]);
        const double w = 0.5 * (r.weights[k] + r.weights[i]);
        r.nodes[i] = -x;
        r.nodes[k] = x;
        r.weights[i] = r.weights[k] = w;
    }
    if (n % 2 == 1) r.nodes[n / 2] = 0.0;
    return r;
}

const Rule1D& cached(std::map<int, Rule1D>& cache, std::mutex& m, int n, Rule1D (*build)(int)) {
    std::lock_guard lock(m);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build(n)).first;
    return it->second;
}

}  // namespace

const Rule1D& gauss_legendre(int n) {
    if (n < 1 || n > 512) throw std::invalid_argument("gauss_legendre: order out of range");
    static std::map<int, Rule1D> cache;
    static std::mutex m;
    return cached(cache, m, n, &build_gauss_legendre);
}

const Rule1D& gauss_hermite(int n) {
    if (n < 1 || n > 256) throw std::invalid_argument("gauss_hermite: order out of range");
    static std::map<int, Rule1D> cache;
    static std::mutex m;
    return cached(cache, m, n, &build_gauss_hermite);
}

Rule1D composite_gauss(std::span<const double> breakpoints, int panels, int per_panel) {
    if (breakpoints.size() < 2 || panels < 1) throw std::invalid_argument("composite_gauss: bad layout");
    const Rule1D& g = gauss_legendre(per_panel);
    Rule1D r;
    for (std::size_t b = 0; b + 1 < breakpoints.size(); ++b) {
        const double lo = breakpoints[b];
        const double hi = breakpoints[b + 1];
        if (!(hi > lo)) throw std::invalid_argument("composite_gauss: breakpoints must increase");
        const double width = (hi - lo) / panels;
        for (int p = 0; p < panels; ++p) {
            const double a = lo + p * width;
            const double half = 0.5 * width;
            for (std::size_t i = 0; i < g.nodes.size(); ++i) {
                r.nodes.push_back(a + half * (1.0 + g.nodes[i]));
                r.weights.push_back(half * g.weights[i]);
            }
        }
    }
    return r;
}

Rule1D graded_gauss(double a, double b, int points, double grading, GradedEnd end) {
    if (points < 2) throw std::invalid_argument("graded_gauss: need at least 2 points");
    if (grading < 1.0) throw std::invalid_argument("graded_gauss: grading exponent must be >= 1");
    const int panels = (points + 15) / 16;
    const int per_panel = (points + panels - 1) / panels;
    const double edges[2] = {0.0, 1.0};
    const Rule1D base = composite_gauss(edges, panels, per_panel);
    const double g = grading;

    Rule1D r;
    r.nodes.reserve(base.nodes.size());
    r.weights.reserve(base.nodes.size());
    for (std::size_t i = 0; i < base.nodes.size(); ++i) {
        const double v = base.nodes[i];
        double w = 0.0;
        double dw = 0.0;
        switch (end) {
            case GradedEnd::left:
                w = std::pow(v, g);
                dw = g * std::pow(v, g - 1.0);
                break;
            case GradedEnd::right:
                w = 1.0 - std::pow(1.0 - v, g);
                dw = g * std::pow(1.0 - v, g - 1.0);
                break;
            case GradedEnd::both:
                // Regularized incomplete beta I_v(g, g): polynomial for integer g,
                // with derivative ~ v^{g-1} (1-v)^{g-1} at the ends.
                w = boost::math::ibeta(g, g, v);
                dw = boost::math::ibeta_derivative(g, g, v);
                break;
        }
        r.nodes.push_back(a + (b - a) * w);
        r.weights.push_back((b - a) * dw * base.weights[i]);
    }
    return r;
}

// ============================================================================
// Simplex
// ============================================================================

SimplexRule make_simplex_rule(const SimplexSpec& spec) {
    const int n = spec.order;
    if (n < 1) throw std::invalid_argument("simplex_quadrature: order must be >= 1");
    if (n > kSimplexOrderCap)
        throw std::invalid_argument("simplex_quadrature: order " + std::to_string(n) + " exceeds the cap of " +
                                    std::to_string(kSimplexOrderCap));
    if (!(spec.horizon > 0.0)) throw std::invalid_argument("simplex_quadrature: horizon must be positive");

    // Duffy collapse: s_n = t w_n, s_i = s_{i+1} w_i. Every axis is graded at
    // both ends since gaps and s_1 can vanish there.
    const Rule1D axis = graded_gauss(0.0, 1.0, spec.points_per_axis, spec.grading, GradedEnd::both);
    const std::size_t m = axis.nodes.size();
    std::size_t total = 1;
    for (int i = 0; i < n; ++i) total *= m;

    SimplexRule rule;
    rule.order = n;
    rule.s.resize(total * static_cast<std::size_t>(n));
    rule.w.resize(total);
    std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
    for (std::size_t k = 0; k < total; ++k) {
        std::size_t rem = k;
        for (int i = 0; i < n; ++i) {
            idx[static_cast<std::size_t>(i)] = rem % m;
            rem /= m;
        }
        double* s = rule.s.data() + k * static_cast<std::size_t>(n);
        double upper = spec.horizon;
        double weight = 1.0;
        for (int i = n - 1; i >= 0; --i) {
            const std::size_t a = idx[static_cast<std::size_t>(i)];
            s[i] = upper * axis.nodes[a];
            weight *= upper * axis.weights[a];
            upper = s[i];
        }
        rule.w[k] = weight;
    }
    return rule;
}

double simplex_quadrature(const SimplexSpec& spec, const std::function<double(std::span<const double>)>& integrand) {
    const SimplexRule rule = make_simplex_rule(spec);
    double sum = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k) {
        const double f = integrand(rule.node(k));
        if (!std::isfinite(f)) throw std::domain_error("simplex_quadrature: non-finite integrand sample");
        sum += rule.w[k] * f;
    }
    return sum;
}

}  // namespace wickshe
