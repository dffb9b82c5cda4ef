#include "wickshe/feynman_kac.hpp"

#include <boost/random/normal_distribution.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>

namespace wickshe {

// ============================================================================
// Paths and local time
// ============================================================================

double BrownianPath::step_length(std::size_t i) const {
    if (i + 1 < steps()) return dt;
    return t - dt * static_cast<double>(steps() - 1);
}

std::vector<double> BrownianPath::t_grid() const {
    std::vector<double> g(positions.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::min(t, dt * static_cast<double>(i));
    g.back() = t;
    return g;
}

BrownianPath simulate_path(double t, double dt, double x, PhiloxEngine& engine) {
    if (!(dt > 0.0)) throw std::invalid_argument("simulate_path: dt must be positive");
    if (!(t > 0.0)) throw std::invalid_argument("simulate_path: t must be positive");
    const auto M = static_cast<std::size_t>(std::max(1.0, std::ceil(t / dt - 1e-9)));
    BrownianPath path{t, dt, {}};
    path.positions.resize(M + 1);
    path.positions[0] = x;
    boost::random::normal_distribution<double> normal;
    const double sd = std::sqrt(dt);
    for (std::size_t i = 0; i + 1 < M; ++i) path.positions[i + 1] = path.positions[i] + sd * normal(engine);
    const double last = t - dt * static_cast<double>(M - 1);
    path.positions[M] = path.positions[M - 1] + std::sqrt(std::max(last, 0.0)) * normal(engine);
    return path;
}

LevelGrid LevelGrid::centered(double x, double half_width, double spacing) {
    if (!(spacing > 0.0) || !(half_width > 0.0))
        throw std::invalid_argument("LevelGrid: spacing and half width must be positive");
    const auto m = static_cast<std::size_t>(std::ceil(half_width / spacing - 1e-12));
    return {x - spacing * static_cast<double>(m), spacing, 2 * m + 1};
}

bool LevelGrid::matches(const LevelGrid& o) const {
    const double tol = 1e-12 * std::max(1.0, std::abs(origin));
    return count == o.count && std::abs(origin - o.origin) <= tol && std::abs(spacing - o.spacing) <= 1e-15 * spacing;
}

double LocalTimeProfile::total() const {
    double s = 0.0;
    for (double v : values) s += v;
    return grid.spacing * s;
}

double LocalTimeProfile::l2_squared() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return grid.spacing * s;
}

double LocalTimeProfile::shifted_increment(std::size_t m) const {
    const std::size_t n = values.size();
    double s = 0.0;
    for (std::size_t k = 0; k < n + m; ++k) {
        const double a = k < n ? values[k] : 0.0;
        const double b = k >= m && k - m < n ? values[k - m] : 0.0;
        s += (a - b) * (a - b);
    }
    return grid.spacing * s;
}

LocalTimeProfile local_time(const BrownianPath& path, const LevelGrid& grid) {
    if (grid.count == 0) throw std::invalid_argument("local_time: empty level grid");
    const auto [lo, hi] = std::minmax_element(path.positions.begin(), path.positions.end());
    const double margin = 3.0 * grid.spacing;
    if (*lo - margin < grid.front() || *hi + margin > grid.back())
        throw CoverageError("local_time: level grid does not cover the path range +- 3 spacing");
    LocalTimeProfile prof{grid, std::vector<double>(grid.count, 0.0)};
    const double inv = 1.0 / grid.spacing;
    for (std::size_t i = 0; i < path.steps(); ++i) {
        const auto k = static_cast<std::size_t>(std::lround((path.positions[i] - grid.origin) * inv));
        prof.values[k] += path.step_length(i);
    }
    for (double& v : prof.values) v *= inv;
    return prof;
}

double occupation_functional(const BrownianPath& path, const std::function<double(double)>& phi) {
    double s = 0.0;
    for (std::size_t i = 0; i < path.steps(); ++i) {
        const double f = phi(path.positions[i]);
        if (!std::isfinite(f)) throw std::domain_error("occupation_functional: non-finite phi value");
        s += path.step_length(i) * f;
    }
    return s;
}

// ============================================================================
// Noise
// ============================================================================

namespace {

void fill_modes(NoiseRealization& n, int max_mode) {
    const auto J = static_cast<std::size_t>(max_mode);
    n.modes.values.assign(J, 0.0);
    std::vector<double> e(J);
    for (std::size_t i = 0; i < n.grid.count; ++i) {
        hermite_functions(n.grid.level(i), e);
        for (std::size_t j = 0; j < J; ++j) n.modes.values[j] += e[j] * n.increments[i];
    }
}

}  // namespace

NoiseRealization NoiseRealization::zero(const LevelGrid& grid, int max_mode) {
    NoiseRealization n;
    n.grid = grid;
    n.increments.assign(grid.count, 0.0);
    n.modes.values.assign(static_cast<std::size_t>(max_mode), 0.0);
    return n;
}

NoiseRealization sample_noise(const LevelGrid& grid, int max_mode, PhiloxEngine& engine) {
    if (max_mode < 0) throw std::invalid_argument("sample_noise: negative mode count");
    NoiseRealization n;
    n.grid = grid;
    n.increments.resize(grid.count);
    boost::random::normal_distribution<double> normal;
    const double sd = std::sqrt(grid.spacing);
    for (double& v : n.increments) v = sd * normal(engine);
    fill_modes(n, max_mode);
    n.provenance = NoiseProvenance::grid_increments;
    return n;
}

NoiseRealization noise_from_modes(const LevelGrid& grid, const GaussianCoordinates& g) {
    NoiseRealization n;
    n.grid = grid;
    n.modes = g;
    n.provenance = NoiseProvenance::mode_coordinates;
    n.increments.assign(grid.count, 0.0);
    std::vector<double> e(g.values.size());
    for (std::size_t i = 0; i < grid.count; ++i) {
        hermite_functions(grid.level(i), e);
        double w = 0.0;
        for (std::size_t j = 0; j < e.size(); ++j) w += g.values[j] * e[j];
        n.increments[i] = grid.spacing * w;
    }
    return n;
}

PsiSample psi_sample(const LocalTimeProfile& profile, const NoiseRealization& noise) {
    if (!profile.grid.matches(noise.grid) || noise.increments.size() != profile.values.size())
        throw std::invalid_argument("psi_sample: noise grid differs from the profile grid");
    PsiSample s;
    for (std::size_t i = 0; i < profile.values.size(); ++i) s.stochastic_integral += profile.values[i] * noise.increments[i];
    s.quadratic_term = 0.5 * profile.l2_squared();
    return s;
}

// ============================================================================
// Ensembles
// ============================================================================

namespace {

struct BlockStats {
    std::size_t n = 0;
    std::vector<double> mean;
    std::vector<double> m2;
};

}  // namespace

std::vector<Estimate> ensemble_means(std::size_t n_items, std::size_t k, const McOptions& opts,
                                     const std::function<void(std::size_t, std::span<double>)>& sample) {
    if (n_items == 0) throw std::invalid_argument("ensemble_means: no items");
    const std::size_t B = std::max<std::size_t>(1, opts.block_size);
    const std::size_t blocks = (n_items + B - 1) / B;
    std::vector<BlockStats> stats(blocks);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};

    auto worker = [&] {
        std::vector<double> out(k);
        for (;;) {
            const std::size_t b = next.fetch_add(1);
            if (b >= blocks || failed.load()) return;
            BlockStats s{0, std::vector<double>(k, 0.0), std::vector<double>(k, 0.0)};
            try {
                for (std::size_t i = b * B; i < std::min(n_items, (b + 1) * B); ++i) {
                    std::fill(out.begin(), out.end(), 0.0);
                    sample(i, out);
                    ++s.n;
                    for (std::size_t q = 0; q < k; ++q) {
                        const double d = out[q] - s.mean[q];
                        s.mean[q] += d / static_cast<double>(s.n);
                        s.m2[q] += d * (out[q] - s.mean[q]);
                    }
                }
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
                return;
            }
            stats[b] = std::move(s);
        }
    };

    const int threads = std::max(1, opts.threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    // Chan et al. pairwise merge, strictly in block order.
    BlockStats acc{0, std::vector<double>(k, 0.0), std::vector<double>(k, 0.0)};
    for (const BlockStats& s : stats) {
        const auto na = static_cast<double>(acc.n);
        const auto nb = static_cast<double>(s.n);
        const double n = na + nb;
        for (std::size_t q = 0; q < k; ++q) {
            const double d = s.mean[q] - acc.mean[q];
            acc.mean[q] += d * nb / n;
            acc.m2[q] += s.m2[q] + d * d * na * nb / n;
        }
        acc.n += s.n;
    }
    std::vector<Estimate> est(k);
    for (std::size_t q = 0; q < k; ++q) {
        est[q].value = acc.mean[q];
        est[q].samples = acc.n;
        // Jackknife standard error of a mean, which reduces to s / sqrt(n).
        est[q].std_error = acc.n > 1 ? std::sqrt(acc.m2[q] / static_cast<double>(acc.n - 1) / static_cast<double>(acc.n)) : 0.0;
    }
    return est;
}

// ============================================================================
// Test functions
// ============================================================================

TestFunction TestFunction::zero() { return constant(0.0); }

TestFunction TestFunction::constant(double c) {
    return {[c](double) { return c; }, [](double) { return 0.0; }, std::abs(c)};
}

TestFunction TestFunction::hermite_mode(int j, double scale) {
    if (j < 1) throw std::invalid_argument("hermite_mode: j must be >= 1");
    // e_j is bounded by pi^{-1/4} (Cramer's inequality)
    return {[j, scale](double x) { return scale * hermite_function(j, x); },
            [j, scale](double x) { return scale * hermite_function_dx(j, x); },
            std::abs(scale) * 0.7511255444649425};
}

TestFunction TestFunction::gaussian_bump(double amplitude, double center, double width) {
    if (!(width > 0.0)) throw std::invalid_argument("gaussian_bump: width must be positive");
    const double w2 = width * width;
    return {[=](double x) { return amplitude * std::exp(-(x - center) * (x - center) / (2.0 * w2)); },
            [=](double x) {
                return -amplitude * (x - center) / w2 * std::exp(-(x - center) * (x - center) / (2.0 * w2));
            },
            std::abs(amplitude)};
}

// ============================================================================
// Feynman-Kac estimators
// ============================================================================

LevelGrid default_noise_grid(double t, double x, double spacing) {
    return LevelGrid::centered(x, 8.0 * std::sqrt(t), spacing);
}

namespace {

void require_paths(const McOptions& opts, const char* who) {
    if (opts.n_paths < 100) throw std::invalid_argument(std::string(who) + ": n_paths must be >= 100");
    if (!(opts.dt > 0.0)) throw std::invalid_argument(std::string(who) + ": dt must be positive");
}

}  // namespace

Estimate fk_conditional_estimate(double t, double x, const InitialCondition& u0, const NoiseRealization& noise,
                                 const StreamFactory& streams, const McOptions& opts) {
    require_paths(opts, "fk_conditional_estimate");
    auto est = ensemble_means(opts.n_paths, 1, opts, [&](std::size_t i, std::span<double> out) {
        PhiloxEngine eng = streams.engine("paths", i);
        const BrownianPath path = simulate_path(t, opts.dt, x, eng);
        const LocalTimeProfile prof = local_time(path, noise.grid);
        out[0] = u0(path.positions.back()) * std::exp(psi_sample(prof, noise).value());
    });
    if (est[0].std_error == 0.0 && u0.sup_norm > 0.0)
        throw std::runtime_error("fk_conditional_estimate: zero sample variance (degenerate random stream)");
    return est[0];
}

Estimate s_transform_mc(double t, double x, const InitialCondition& u0, const TestFunction& phi,
                        const StreamFactory& streams, const McOptions& opts) {
    require_paths(opts, "s_transform_mc");
    if (phi.sup_norm * t > 50.0) throw std::overflow_error("s_transform_mc: sup|phi| * t exceeds 50");
    return ensemble_means(opts.n_paths, 1, opts, [&](std::size_t i, std::span<double> out) {
        PhiloxEngine eng = streams.engine("paths", i);
        const BrownianPath path = simulate_path(t, opts.dt, x, eng);
        out[0] = u0(path.positions.back()) * std::exp(occupation_functional(path, phi.value));
    })[0];
}

Estimate s_transform_dx_mc(double t, double x, const InitialCondition& u0, const TestFunction& phi,
                           const StreamFactory& streams, const McOptions& opts) {
    require_paths(opts, "s_transform_dx_mc");
    if (!u0.has_derivative()) throw std::invalid_argument("s_transform_dx_mc: initial condition has no derivative");
    if (!phi.derivative) throw std::invalid_argument("s_transform_dx_mc: test function has no derivative");
    if (phi.sup_norm * t > 50.0) throw std::overflow_error("s_transform_dx_mc: sup|phi| * t exceeds 50");
    return ensemble_means(opts.n_paths, 1, opts, [&](std::size_t i, std::span<double> out) {
        PhiloxEngine eng = streams.engine("paths", i);
        const BrownianPath path = simulate_path(t, opts.dt, x, eng);
        double occ = 0.0;
        double docc = 0.0;
        for (std::size_t k = 0; k < path.steps(); ++k) {
            const double h = path.step_length(k);
            occ += h * phi.value(path.positions[k]);
            docc += h * phi.derivative(path.positions[k]);
        }
        const double end = path.positions.back();
        out[0] = std::exp(occ) * (u0.derivative_evaluator(end) + u0(end) * docc);
    })[0];
}

}  // namespace wickshe
