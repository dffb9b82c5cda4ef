#include "wickshe/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace wickshe {

namespace {

// Tridiagonal (I - lambda D) with D the Neumann second-difference stencil
// times dx^2, pre-factored for the Thomas sweep.
class CrankNicolsonStep {
public:
    CrankNicolsonStep(std::size_t size, double lambda) : lambda_(lambda), cprime_(size), inv_(size) {
        const double diag = 1.0 + 2.0 * lambda;
        const double off = -lambda;
        double upper0 = 2.0 * off;  // ghost node doubles the first coupling
        double denom = diag;
        inv_[0] = 1.0 / denom;
        cprime_[0] = upper0 * inv_[0];
        for (std::size_t i = 1; i < size; ++i) {
            const double lower = (i + 1 == size) ? 2.0 * off : off;
            const double upper = off;
            denom = diag - lower * cprime_[i - 1];
            inv_[i] = 1.0 / denom;
            cprime_[i] = upper * inv_[i];
        }
    }

    // rhs becomes the solution.
    void solve(std::vector<double>& rhs) const {
        const std::size_t n = rhs.size();
        const double off = -lambda_;
        rhs[0] *= inv_[0];
        for (std::size_t i = 1; i < n; ++i) {
            const double lower = (i + 1 == n) ? 2.0 * off : off;
            rhs[i] = (rhs[i] - lower * rhs[i - 1]) * inv_[i];
        }
        for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= cprime_[i] * rhs[i + 1];
    }

    // (I + lambda D) u
    void explicit_half(const double* u, std::size_t n, double* out) const {
        const double l = lambda_;
        out[0] = (1.0 - 2.0 * l) * u[0] + 2.0 * l * u[1];
        for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (1.0 - 2.0 * l) * u[i] + l * (u[i - 1] + u[i + 1]);
        out[n - 1] = (1.0 - 2.0 * l) * u[n - 1] + 2.0 * l * u[n - 2];
    }

private:
    double lambda_;
    std::vector<double> cprime_;
    std::vector<double> inv_;
};

struct Forcing {
    double weight;            // sqrt(alpha_j)
    std::size_t mode;         // j - 1
    std::size_t lower_index;  // position of alpha - e_j
};

}  // namespace

namespace {

PropagatorSolution crank_nicolson(const TruncationSpec& spec, const InitialCondition& u0, const PropagatorGrid& grid,
                                  std::span<const double> snapshot_times) {
    if (!(grid.dt > 0.0) || !(grid.dx > 0.0) || !(grid.half_width > 0.0))
        throw std::invalid_argument("propagator_oracle: dt, dx and L must be positive");
    const double cells = 2.0 * grid.half_width / grid.dx;
    const auto M = static_cast<std::size_t>(std::llround(cells));
    if (std::abs(cells - static_cast<double>(M)) > 1e-9 * cells || M < 4)
        throw std::invalid_argument("propagator_oracle: dx must divide 2L");
    std::vector<double> times(snapshot_times.begin(), snapshot_times.end());
    if (times.empty()) throw std::invalid_argument("propagator_oracle: no snapshot times");
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    if (!(times.front() > 0.0)) throw std::invalid_argument("propagator_oracle: snapshot times must be positive");

    const std::size_t nx = M + 1;
    std::vector<double> lattice(nx);
    for (std::size_t i = 0; i < nx; ++i) lattice[i] = -grid.half_width + grid.dx * static_cast<double>(i);

    const std::vector<MultiIndex> indices = enumerate_multiindices(spec);
    const std::size_t na = indices.size();
    std::map<MultiIndex, std::size_t, GradedLess> position;
    for (std::size_t a = 0; a < na; ++a) position.emplace(indices[a], a);

    std::vector<std::vector<Forcing>> forcing(na);
    for (std::size_t a = 0; a < na; ++a)
        for (int j = 1; j <= indices[a].max_mode(); ++j)
            if (indices[a][j] > 0)
                forcing[a].push_back({std::sqrt(static_cast<double>(indices[a][j])), static_cast<std::size_t>(j - 1),
                                      position.at(indices[a].lowered(j))});

    const auto J = static_cast<std::size_t>(spec.max_mode);
    std::vector<double> modes(J * nx);
    {
        std::vector<double> e(J);
        for (std::size_t i = 0; i < nx; ++i) {
            hermite_functions(lattice[i], e);
            for (std::size_t j = 0; j < J; ++j) modes[j * nx + i] = grid.forcing_enabled ? e[j] : 0.0;
        }
    }

    std::vector<double> cur(na * nx, 0.0);
    std::vector<double> next(na * nx, 0.0);
    for (std::size_t i = 0; i < nx; ++i) cur[i] = u0(lattice[i]);

    auto forcing_into = [&](const std::vector<double>& state, std::size_t a, double scale, double* out) {
        for (const Forcing& f : forcing[a]) {
            const double* lower = state.data() + f.lower_index * nx;
            const double* e = modes.data() + f.mode * nx;
            const double c = scale * f.weight;
            for (std::size_t i = 0; i < nx; ++i) out[i] += c * e[i] * lower[i];
        }
    };

    std::map<long long, CrankNicolsonStep> steppers;
    auto stepper_for = [&](double h) -> const CrankNicolsonStep& {
        const long long key = std::llround(h * 1e15);
        auto it = steppers.find(key);
        if (it == steppers.end())
            it = steppers.emplace(key, CrankNicolsonStep(nx, h / (4.0 * grid.dx * grid.dx))).first;
        return it->second;
    };

    std::vector<double> rhs(nx);
    auto step = [&](double h) {
        const CrankNicolsonStep& cn = stepper_for(h);
        for (std::size_t a = 0; a < na; ++a) {
            cn.explicit_half(cur.data() + a * nx, nx, rhs.data());
            // trapezoidal forcing: old lower levels and the freshly updated ones
            forcing_into(cur, a, 0.5 * h, rhs.data());
            forcing_into(next, a, 0.5 * h, rhs.data());
            cn.solve(rhs);
            std::copy(rhs.begin(), rhs.end(), next.begin() + static_cast<std::ptrdiff_t>(a * nx));
        }
        double peak = 0.0;
        for (double v : next) {
            if (!std::isfinite(v)) throw InstabilityError("propagator_oracle: non-finite value");
            peak = std::max(peak, std::abs(v));
        }
        if (peak > 1e12) throw InstabilityError("propagator_oracle: norm blow-up");
        std::swap(cur, next);
    };

    std::vector<double> data;
    data.reserve(times.size() * na * nx);
    double now = 0.0;
    for (double target : times) {
        while (target - now > 1e-12 * std::max(1.0, target)) {
            double h = std::min(grid.dt, target - now);
            if (target - now - h < 1e-9 * grid.dt) h = target - now;
            step(h);
            now += h;
        }
        now = target;
        data.insert(data.end(), cur.begin(), cur.end());
    }
    return {spec, indices, std::move(lattice), std::move(times), std::move(data)};
}

}  // namespace

PropagatorSolution propagator_oracle(const TruncationSpec& spec, const InitialCondition& u0,
                                     const PropagatorGrid& grid, std::span<const double> snapshot_times) {
    PropagatorGrid base = grid;
    base.richardson = false;
    PropagatorSolution coarse = crank_nicolson(spec, u0, base, snapshot_times);
    if (!grid.richardson) return coarse;

    // Second solve on the halved lattice; both errors are O(dx^2 + dt^2).
    PropagatorGrid half = base;
    half.dx *= 0.5;
    half.dt *= 0.5;
    const PropagatorSolution fine = crank_nicolson(spec, u0, half, snapshot_times);
    std::vector<double> data;
    const std::size_t nx = coarse.lattice().size();
    data.reserve(coarse.times().size() * coarse.indices().size() * nx);
    for (std::size_t k = 0; k < coarse.times().size(); ++k)
        for (std::size_t a = 0; a < coarse.indices().size(); ++a) {
            const auto c = coarse.values(k, a);
            const auto f = fine.values(k, a);
            for (std::size_t i = 0; i < nx; ++i) data.push_back((4.0 * f[2 * i] - c[i]) / 3.0);
        }
    return {spec, coarse.indices(), coarse.lattice(), coarse.times(), std::move(data)};
}

std::span<const double> PropagatorSolution::values(std::size_t snapshot, std::size_t alpha_index) const {
    const std::size_t nx = lattice_.size();
    if (snapshot >= times_.size() || alpha_index >= indices_.size())
        throw std::out_of_range("PropagatorSolution: index out of range");
    return {data_.data() + (snapshot * indices_.size() + alpha_index) * nx, nx};
}

std::size_t PropagatorSolution::snapshot_index(double t) const {
    for (std::size_t k = 0; k < times_.size(); ++k)
        if (std::abs(times_[k] - t) <= 1e-12 * std::max(1.0, t)) return k;
    throw std::invalid_argument("PropagatorSolution: t = " + std::to_string(t) + " is not a snapshot time");
}

namespace {

double lattice_derivative(std::span<const double> v, std::size_t i, double dx) {
    const std::size_t n = v.size();
    if (i == 0 || i + 1 == n) return 0.0;  // Neumann ends
    if (i >= 2 && i + 2 < n) return (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * dx);
    return (v[i + 1] - v[i - 1]) / (2.0 * dx);
}

}  // namespace

ChaosCoefficients PropagatorSolution::sample(double t, double x, bool derivative) const {
    const std::size_t k = snapshot_index(t);
    const double L = -lattice_.front();
    const double dx = lattice_[1] - lattice_[0];
    const std::size_t n = lattice_.size();
    if (std::abs(x) > L) throw CoverageError("PropagatorSolution: x outside the lattice");
    const double pos = (x + L) / dx;
    auto i0 = static_cast<std::size_t>(std::floor(pos));
    if (i0 >= n - 1) i0 = n - 2;
    const double frac = pos - static_cast<double>(i0);

    // Exact node hit, otherwise cubic Lagrange on the four nearest nodes.
    std::vector<std::pair<std::size_t, double>> stencil;
    if (std::abs(frac) < 1e-9) {
        stencil.emplace_back(i0, 1.0);
    } else if (std::abs(frac - 1.0) < 1e-9) {
        stencil.emplace_back(i0 + 1, 1.0);
    } else {
        std::size_t first = i0 == 0 ? 0 : i0 - 1;
        if (first + 3 >= n) first = n - 4;
        for (std::size_t a = 0; a < 4; ++a) {
            double w = 1.0;
            const double xa = static_cast<double>(first + a);
            for (std::size_t b = 0; b < 4; ++b)
                if (b != a) w *= (pos - static_cast<double>(first + b)) / (xa - static_cast<double>(first + b));
            stencil.emplace_back(first + a, w);
        }
    }

    ChaosCoefficients out({t, x}, spec_);
    for (std::size_t a = 0; a < indices_.size(); ++a) {
        const std::span<const double> v = values(k, a);
        double s = 0.0;
        for (auto [i, w] : stencil) s += w * (derivative ? lattice_derivative(v, i, dx) : v[i]);
        out.set(indices_[a], s);
    }
    return out;
}

ChaosCoefficients PropagatorSolution::coefficients_at(double t, double x) const { return sample(t, x, false); }

ChaosCoefficients PropagatorSolution::dx_coefficients_at(double t, double x) const { return sample(t, x, true); }

}  // namespace wickshe
