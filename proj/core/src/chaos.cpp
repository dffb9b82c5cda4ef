#include "wickshe/chaos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <string>

namespace wickshe {

// ============================================================================
// ChaosCoefficients
// ============================================================================

void ChaosCoefficients::set(const MultiIndex& alpha, double value) {
    if (!spec_.admits(alpha))
        throw std::out_of_range("ChaosCoefficients: index " + alpha.encode() + " outside the truncation");
    values_[alpha] = value;
}

void ChaosCoefficients::add(const MultiIndex& alpha, double value) {
    if (!spec_.admits(alpha))
        throw std::out_of_range("ChaosCoefficients: index " + alpha.encode() + " outside the truncation");
    values_[alpha] += value;
}

double ChaosCoefficients::get(const MultiIndex& alpha) const {
    auto it = values_.find(alpha);
    return it == values_.end() ? 0.0 : it->second;
}

// ============================================================================
// Iterated-kernel quadrature
// ============================================================================

namespace {

std::size_t ipow(std::size_t b, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

// Expectation over the Gaussian chain Y_n = x + sqrt(t - s_n) xi_n,
// Y_i = Y_{i+1} + sqrt(s_{i+1} - s_i) xi_i, of prod_i e_{k_i}(Y_i) * u_(0)(s_1, Y_1),
// for every mode tuple at once. Entry index is sum_i (k_i - 1) J^{i-1}.
struct Chain {
    int n = 0;
    int J = 0;
    double t = 0.0;
    const InitialCondition* u0 = nullptr;
    const Rule1D* gh = nullptr;
    int flow_nodes = 256;
    bool derivative = false;
    const double* s = nullptr;
    std::vector<std::vector<double>> evals;  // per level
    std::vector<std::vector<double>> sub;    // per level

    void accumulate(int level, double y_above, double* out) {
        const double upper = level == n ? t : s[level];
        const double sd = std::sqrt(std::max(upper - s[level - 1], 0.0));
        std::vector<double>& e = evals[static_cast<std::size_t>(level)];
        const std::size_t J_ = static_cast<std::size_t>(J);
        for (std::size_t q = 0; q < gh->nodes.size(); ++q) {
            const double xi = gh->nodes[q];
            double w = gh->weights[q];
            if (level == n && derivative) w *= xi / sd;
            const double y = y_above + sd * xi;
            hermite_functions(y, e);
            if (level == 1) {
                const double f = w * heat_flow_value(*u0, s[0], y, flow_nodes);
                for (std::size_t k = 0; k < J_; ++k) out[k] += f * e[k];
                continue;
            }
            std::vector<double>& below = sub[static_cast<std::size_t>(level)];
            std::fill(below.begin(), below.end(), 0.0);
            accumulate(level - 1, y, below.data());
            const std::size_t stride = below.size();
            for (std::size_t k = 0; k < J_; ++k) {
                const double f = w * e[k];
                double* dst = out + k * stride;
                for (std::size_t r = 0; r < stride; ++r) dst[r] += f * below[r];
            }
        }
    }
};

// T[k_1..k_n] = int_{T^n_[0, t - eps]} E[chain product] ds for all k in {1..J}^n.
std::vector<double> iterated_tensor(int n, int J, double t, double x, double eps, const InitialCondition& u0,
                                    const ChaosQuadratureOptions& opts, bool derivative, int time_points) {
    const double horizon = t - eps;
    if (!(horizon > 0.0)) throw std::invalid_argument("chaos quadrature: epsilon must be smaller than t");
    const SimplexRule rule = make_simplex_rule({n, horizon, time_points, opts.grading});

    Chain chain;
    chain.n = n;
    chain.J = J;
    chain.t = t;
    chain.u0 = &u0;
    chain.gh = &gauss_hermite(opts.gh_nodes);
    chain.flow_nodes = opts.flow_nodes;
    chain.derivative = derivative;
    chain.evals.assign(static_cast<std::size_t>(n) + 1, std::vector<double>(static_cast<std::size_t>(J)));
    chain.sub.resize(static_cast<std::size_t>(n) + 1);
    for (int l = 2; l <= n; ++l) chain.sub[static_cast<std::size_t>(l)].resize(ipow(static_cast<std::size_t>(J), l - 1));

    const std::size_t size = ipow(static_cast<std::size_t>(J), n);
    std::vector<double> total(size, 0.0);
    std::vector<double> local(size);
    for (std::size_t k = 0; k < rule.size(); ++k) {
        chain.s = rule.node(k).data();
        std::fill(local.begin(), local.end(), 0.0);
        chain.accumulate(n, x, local.data());
        for (std::size_t i = 0; i < size; ++i) total[i] += rule.w[k] * local[i];
    }
    for (double v : total)
        if (!std::isfinite(v)) throw std::domain_error("chaos quadrature: non-finite value");
    return total;
}

double contract(const MultiIndex& alpha, const std::vector<double>& tensor, int J) {
    double sum = 0.0;
    for (const auto& arr : distinct_arrangements(alpha)) {
        std::size_t idx = 0;
        std::size_t stride = 1;
        for (int k : arr) {
            idx += static_cast<std::size_t>(k - 1) * stride;
            stride *= static_cast<std::size_t>(J);
        }
        sum += tensor[idx];
    }
    return std::sqrt(alpha.factorial()) * sum;
}

void check_order(int n) {
    if (n > kSimplexOrderCap)
        throw std::invalid_argument("chaos quadrature: degree " + std::to_string(n) + " exceeds the cap of " +
                                    std::to_string(kSimplexOrderCap) + "; use propagator_oracle");
}

void check_time(double t) {
    if (!(t > 0.0)) throw std::domain_error("chaos quadrature: t must be positive");
}

double zeroth(double t, double x, const InitialCondition& u0, bool derivative) {
    const QuadratureGrid grid = QuadratureGrid::covering(x, t);
    return derivative ? heat_semigroup_dx(u0, t, x, grid) : apply_heat_semigroup(u0, t, x, grid);
}

int refined_points(int p) { return p + std::max(8, p / 2); }

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

double max_abs(const std::vector<double>& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

std::vector<double> derivative_tensor(int n, int J, double t, double x, double eps, const InitialCondition& u0,
                                      const ChaosQuadratureOptions& opts) {
    std::vector<double> T = iterated_tensor(n, J, t, x, eps, u0, opts, true, opts.time_points);
    if (opts.refinement_check) {
        const std::vector<double> fine =
            iterated_tensor(n, J, t, x, eps, u0, opts, true, refined_points(opts.time_points));
        const double diff = max_abs_diff(T, fine);
        if (diff > opts.refinement_tolerance * std::max(1.0, max_abs(fine)))
            throw NonConvergenceError("dx_coefficient: mesh refinement changed the value by " + std::to_string(diff));
        T = fine;
    }
    return T;
}

}  // namespace

double cs_coefficient(const MultiIndex& alpha, double t, double x, const InitialCondition& u0,
                      const ChaosQuadratureOptions& opts) {
    check_time(t);
    const int n = static_cast<int>(alpha.degree());
    check_order(n);
    if (n == 0) return zeroth(t, x, u0, false);
    const int J = alpha.max_mode();
    return contract(alpha, iterated_tensor(n, J, t, x, 0.0, u0, opts, false, opts.time_points), J);
}

double dx_coefficient(const MultiIndex& alpha, double t, double x, const InitialCondition& u0, double epsilon,
                      const ChaosQuadratureOptions& opts) {
    check_time(t);
    if (epsilon < 0.0) throw std::invalid_argument("dx_coefficient: epsilon must be non-negative");
    const int n = static_cast<int>(alpha.degree());
    check_order(n);
    if (n == 0) return zeroth(t, x, u0, true);
    const int J = alpha.max_mode();
    return contract(alpha, derivative_tensor(n, J, t, x, epsilon, u0, opts), J);
}

namespace {

ChaosCoefficients batch(const TruncationSpec& spec, double t, double x, const InitialCondition& u0,
                        const ChaosQuadratureOptions& opts, bool derivative) {
    check_time(t);
    check_order(spec.max_order);
    ChaosCoefficients out({t, x}, spec);
    out.set(MultiIndex{}, zeroth(t, x, u0, derivative));
    const int J = spec.max_mode;
    for (int n = 1; n <= spec.max_order; ++n) {
        const std::vector<double> T = derivative ? derivative_tensor(n, J, t, x, 0.0, u0, opts)
                                                 : iterated_tensor(n, J, t, x, 0.0, u0, opts, false, opts.time_points);
        for (const MultiIndex& a : enumerate_degree(n, J)) out.set(a, contract(a, T, J));
    }
    return out;
}

}  // namespace

ChaosCoefficients cs_coefficients(const TruncationSpec& spec, double t, double x, const InitialCondition& u0,
                                  const ChaosQuadratureOptions& opts) {
    return batch(spec, t, x, u0, opts, false);
}

ChaosCoefficients dx_coefficients(const TruncationSpec& spec, double t, double x, const InitialCondition& u0,
                                  const ChaosQuadratureOptions& opts) {
    return batch(spec, t, x, u0, opts, true);
}

EpsilonSequence dx_epsilon_sequence(const MultiIndex& alpha, double t, double x, const InitialCondition& u0,
                                    double eps0, const ChaosQuadratureOptions& opts) {
    if (!(eps0 > 0.0) || !(eps0 < t)) throw std::invalid_argument("dx_epsilon_sequence: need 0 < eps0 < t");
    EpsilonSequence seq;
    for (double e : {eps0, eps0 / 2.0, eps0 / 4.0, eps0 / 8.0}) {
        seq.epsilons.push_back(e);
        seq.values.push_back(dx_coefficient(alpha, t, x, u0, e, opts));
    }
    // Richardson table for K^e = K + a_1 e + a_2 e^2 + a_3 e^3 on halving steps.
    std::vector<double> r = seq.values;
    for (std::size_t j = 1; j < r.size(); ++j) {
        const double factor = std::ldexp(1.0, static_cast<int>(j)) - 1.0;
        for (std::size_t k = r.size() - 1; k >= j; --k) r[k] += (r[k] - r[k - 1]) / factor;
    }
    seq.extrapolated = r.back();
    return seq;
}

// ============================================================================
// Wiener kernels
// ============================================================================

namespace {

struct KernelRule {
    SimplexRule rule;
    std::vector<double> mirrored;  // t - s reversed, same weights
};

double permutation_sum(std::span<const double> y, const std::function<double(std::span<const double>)>& ordered) {
    std::vector<std::size_t> perm(y.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<double> ys(y.size());
    double sum = 0.0;
    double count = 0.0;
    do {
        for (std::size_t i = 0; i < y.size(); ++i) ys[i] = y[perm[i]];
        sum += ordered(ys);
        count += 1.0;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return sum / count;
}

}  // namespace

WienerKernel mw_kernel(int n, double t, double x, const InitialCondition& u0, KernelForm form, int time_points) {
    check_time(t);
    if (n < 0) throw std::invalid_argument("mw_kernel: order must be non-negative");
    if (n > kKernelOrderCap)
        throw std::invalid_argument("mw_kernel: order " + std::to_string(n) + " exceeds the cap of " +
                                    std::to_string(kKernelOrderCap));
    WienerKernel k;
    k.order = n;
    k.point = {t, x};
    if (n == 0) {
        const double v = zeroth(t, x, u0, false);
        k.evaluator = [v](std::span<const double> y) {
            if (!y.empty()) throw std::invalid_argument("WienerKernel: argument length differs from order");
            return v;
        };
        return k;
    }

    auto shared = std::make_shared<KernelRule>();
    shared->rule = make_simplex_rule({n, t, time_points, 2.0});
    const std::size_t nn = static_cast<std::size_t>(n);
    if (form == KernelForm::multiple_wiener) {
        shared->mirrored.resize(shared->rule.s.size());
        for (std::size_t q = 0; q < shared->rule.size(); ++q)
            for (std::size_t i = 0; i < nn; ++i)
                shared->mirrored[q * nn + i] = t - shared->rule.s[q * nn + (nn - 1 - i)];
    }
    const InitialCondition u = u0;

    k.evaluator = [shared, form, t, x, u, nn](std::span<const double> y) {
        if (y.size() != nn) throw std::invalid_argument("WienerKernel: argument length differs from order");
        const SimplexRule& rule = shared->rule;
        std::function<double(std::span<const double>)> ordered;
        if (form == KernelForm::feynman_kac) {
            // p(s_1, y_1 - x) prod p(s_{i+1} - s_i, y_{i+1} - y_i) u_(0)(t - s_n, y_n)
            ordered = [&](std::span<const double> ys) {
                double sum = 0.0;
                for (std::size_t q = 0; q < rule.size(); ++q) {
                    const double* s = rule.s.data() + q * nn;
                    double f = heat_kernel(s[0], ys[0] - x);
                    for (std::size_t i = 1; i < nn; ++i) f *= heat_kernel(s[i] - s[i - 1], ys[i] - ys[i - 1]);
                    f *= heat_flow_value(u, t - s[nn - 1], ys[nn - 1]);
                    sum += rule.w[q] * f;
                }
                return sum;
            };
        } else {
            // p(t - r_n, x - y_n) prod p(r_{i+1} - r_i, y_{i+1} - y_i) u_(0)(r_1, y_1)
            const double* nodes = form == KernelForm::multiple_wiener ? shared->mirrored.data() : rule.s.data();
            ordered = [&, nodes](std::span<const double> ys) {
                double sum = 0.0;
                for (std::size_t q = 0; q < rule.size(); ++q) {
                    const double* r = nodes + q * nn;
                    double f = heat_kernel(t - r[nn - 1], x - ys[nn - 1]);
                    for (std::size_t i = 1; i < nn; ++i) f *= heat_kernel(r[i] - r[i - 1], ys[i] - ys[i - 1]);
                    f *= heat_flow_value(u, r[0], ys[0]);
                    sum += rule.w[q] * f;
                }
                return sum;
            };
        }
        // The MW ordering lists the y's from the innermost time outward, so
        // reverse them to pair y_sigma(n) with the kernel at x like the FK form.
        if (form == KernelForm::multiple_wiener) {
            return permutation_sum(y, [&](std::span<const double> ys) {
                std::vector<double> rev(ys.rbegin(), ys.rend());
                return ordered(rev);
            });
        }
        return permutation_sum(y, ordered);
    };
    return k;
}

// ============================================================================
// Algebra
// ============================================================================

double second_moment(const ChaosCoefficients& c) {
    double s = 0.0;
    for (const auto& [a, v] : c.values()) s += v * v;
    return s;
}

std::vector<double> order_masses(const ChaosCoefficients& c) {
    std::vector<double> m(static_cast<std::size_t>(c.spec().max_order) + 1, 0.0);
    for (const auto& [a, v] : c.values()) m[a.degree()] += v * v;
    return m;
}

double sample_realization(const ChaosCoefficients& c, const GaussianCoordinates& g) {
    if (static_cast<int>(g.values.size()) < c.spec().max_mode)
        throw std::invalid_argument("sample_realization: fewer coordinates than max_mode");
    double s = 0.0;
    for (const auto& [a, v] : c.values()) s += v * sample_xi(a, g);
    return s;
}

WickProduct wick_product(const ChaosCoefficients& F, const ChaosCoefficients& G) {
    if (!(F.spec() == G.spec())) throw std::invalid_argument("wick_product: truncation specs differ");
    WickProduct out{ChaosCoefficients(F.point(), F.spec()), 0.0};
    // Terms are summed in sorted order so that F wick G and G wick F agree bit for bit.
    std::map<MultiIndex, std::vector<double>, GradedLess> terms;
    for (const auto& [a, fa] : F.values())
        for (const auto& [b, gb] : G.values()) {
            const MultiIndex g = a + b;
            terms[g].push_back(fa * gb * std::sqrt(g.factorial() / (a.factorial() * b.factorial())));
        }
    std::map<MultiIndex, double, GradedLess> dropped;
    for (auto& [g, list] : terms) {
        std::sort(list.begin(), list.end());
        double v = 0.0;
        for (double term : list) v += term;
        if (F.spec().admits(g))
            out.product.add(g, v);
        else
            dropped[g] = v;
    }
    for (const auto& [g, v] : dropped) out.dropped_mass += v * v;
    return out;
}

namespace {

double s_basis(const MultiIndex& a, std::span<const double> phi) {
    double v = 1.0;
    for (int j = 1; j <= a.max_mode(); ++j) {
        const unsigned k = a[j];
        double f = 1.0;
        for (unsigned m = 2; m <= k; ++m) f *= m;
        v *= std::pow(phi[static_cast<std::size_t>(j - 1)], static_cast<int>(k)) / std::sqrt(f);
    }
    return v;
}

void check_phi(const ChaosCoefficients& c, std::span<const double> phi) {
    if (static_cast<int>(phi.size()) < c.spec().max_mode)
        throw std::invalid_argument("s_transform_chaos: fewer phi modes than max_mode");
}

}  // namespace

double s_transform_chaos(const ChaosCoefficients& c, std::span<const double> phi_modes) {
    check_phi(c, phi_modes);
    double s = 0.0;
    for (const auto& [a, v] : c.values()) s += v * s_basis(a, phi_modes);
    return s;
}

std::vector<double> s_transform_terms(const ChaosCoefficients& c, std::span<const double> phi_modes) {
    check_phi(c, phi_modes);
    std::vector<double> terms(static_cast<std::size_t>(c.spec().max_order) + 1, 0.0);
    for (const auto& [a, v] : c.values()) terms[a.degree()] += v * s_basis(a, phi_modes);
    return terms;
}

double s_transform_tail_estimate(const ChaosCoefficients& c, std::span<const double> phi_modes) {
    check_phi(c, phi_modes);
    double norm2 = 0.0;
    for (int j = 0; j < c.spec().max_mode; ++j) norm2 += phi_modes[static_cast<std::size_t>(j)] * phi_modes[static_cast<std::size_t>(j)];
    const double norm = std::sqrt(norm2);
    const std::vector<double> mass = order_masses(c);
    const int N = c.spec().max_order;
    // |degree-n term| <= sqrt(mass_n) |phi|^n / sqrt(n!)
    std::vector<double> bound(mass.size());
    double fact = 1.0;
    for (int n = 0; n <= N; ++n) {
        if (n > 1) fact *= n;
        bound[static_cast<std::size_t>(n)] = std::sqrt(mass[static_cast<std::size_t>(n)]) * std::pow(norm, n) / std::sqrt(fact);
    }
    if (N < 2) return N == 0 ? 0.0 : bound[1];
    double rho = 0.0;
    for (int n = std::max(2, N - 1); n <= N; ++n) {
        const double prev = bound[static_cast<std::size_t>(n - 1)];
        const double cur = bound[static_cast<std::size_t>(n)];
        if (prev > 0.0) rho = std::max(rho, cur / prev);
    }
    if (rho >= 1.0) return std::numeric_limits<double>::infinity();
    return bound[static_cast<std::size_t>(N)] * rho / (1.0 - rho);
}

double order_norm(const ChaosCoefficients& c, int n, double lambda) {
    if (n < 0 || n > c.spec().max_order) throw std::out_of_range("order_norm: order outside the truncation");
    double s = 0.0;
    for (const auto& [a, v] : c.values())
        if (static_cast<int>(a.degree()) == n) s += v * v;
    return std::exp(2.0 * lambda * n) * s;
}

ChaosCoefficients stochastic_exponential(const TruncationSpec& spec, std::span<const double> psi) {
    if (static_cast<int>(psi.size()) < spec.max_mode)
        throw std::invalid_argument("stochastic_exponential: fewer coordinates than max_mode");
    ChaosCoefficients c({0.0, 0.0}, spec);
    for (const MultiIndex& a : enumerate_multiindices(spec)) c.set(a, s_basis(a, psi));
    return c;
}

}  // namespace wickshe
