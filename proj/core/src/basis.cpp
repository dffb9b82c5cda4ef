#include "wickshe/basis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wickshe {

double hermite_poly(int n, double x) {
    if (n < 0) throw std::invalid_argument("hermite_poly: negative order");
    if (n == 0) return 1.0;
    double hm = 1.0;
    double h = x;
    for (int k = 1; k < n; ++k) {
        const double hp = x * h - k * hm;
        hm = h;
        h = hp;
    }
    return h;
}

void hermite_functions(double x, std::span<double> out) {
    if (out.empty()) return;
    out[0] = std::exp(-0.5 * x * x) / std::sqrt(std::sqrt(std::numbers::pi));
    if (out.size() == 1) return;
    out[1] = std::numbers::sqrt2 * x * out[0];
    for (std::size_t j = 2; j < out.size(); ++j) {
        // out[j] = e_{j+1}, built from e_j and e_{j-1}
        const double jj = static_cast<double>(j);
        out[j] = x * std::sqrt(2.0 / jj) * out[j - 1] - std::sqrt((jj - 1.0) / jj) * out[j - 2];
    }
}

void hermite_functions_dx(double x, std::span<double> values, std::span<double> derivs) {
    const std::size_t J = values.size();
    if (derivs.size() != J) throw std::invalid_argument("hermite_functions_dx: size mismatch");
    std::vector<double> e(J + 1);
    hermite_functions(x, e);
    for (std::size_t k = 0; k < J; ++k) {
        const double j = static_cast<double>(k + 1);
        const double below = k > 0 ? std::sqrt((j - 1.0) / 2.0) * e[k - 1] : 0.0;
        derivs[k] = below - std::sqrt(j / 2.0) * e[k + 1];
        values[k] = e[k];
    }
}

double hermite_function(int j, double x) {
    if (j < 1) throw std::invalid_argument("hermite_function: mode index must be >= 1");
    std::vector<double> e(static_cast<std::size_t>(j));
    hermite_functions(x, e);
    return e.back();
}

double hermite_function_dx(int j, double x) {
    if (j < 1) throw std::invalid_argument("hermite_function_dx: mode index must be >= 1");
    std::vector<double> v(static_cast<std::size_t>(j)), d(static_cast<std::size_t>(j));
    hermite_functions_dx(x, v, d);
    return d.back();
}

// ============================================================================
// MultiIndex
// ============================================================================

MultiIndex::MultiIndex(std::vector<unsigned> entries) : entries_(std::move(entries)) {
    while (!entries_.empty() && entries_.back() == 0) entries_.pop_back();
    for (unsigned a : entries_) degree_ += a;
}

MultiIndex MultiIndex::unit(int j, unsigned count) {
    if (j < 1) throw std::invalid_argument("MultiIndex::unit: mode index must be >= 1");
    std::vector<unsigned> e(static_cast<std::size_t>(j), 0u);
    e.back() = count;
    return MultiIndex(std::move(e));
}

unsigned MultiIndex::operator[](int j) const {
    if (j < 1 || j > max_mode()) return 0;
    return entries_[static_cast<std::size_t>(j - 1)];
}

double MultiIndex::factorial() const {
    double f = 1.0;
    for (unsigned a : entries_)
        for (unsigned k = 2; k <= a; ++k) f *= k;
    return f;
}

std::vector<int> MultiIndex::characteristic() const {
    std::vector<int> k;
    k.reserve(degree_);
    for (std::size_t j = 0; j < entries_.size(); ++j)
        k.insert(k.end(), entries_[j], static_cast<int>(j + 1));
    return k;
}

MultiIndex MultiIndex::raised(int j) const {
    if (j < 1) throw std::invalid_argument("MultiIndex::raised: mode index must be >= 1");
    std::vector<unsigned> e = entries_;
    if (static_cast<int>(e.size()) < j) e.resize(static_cast<std::size_t>(j), 0u);
    ++e[static_cast<std::size_t>(j - 1)];
    return MultiIndex(std::move(e));
}

MultiIndex MultiIndex::lowered(int j) const {
    if ((*this)[j] == 0) throw std::invalid_argument("MultiIndex::lowered: entry already zero");
    std::vector<unsigned> e = entries_;
    --e[static_cast<std::size_t>(j - 1)];
    return MultiIndex(std::move(e));
}

std::string MultiIndex::encode() const {
    if (is_zero()) return "0";
    std::string s;
    for (std::size_t j = 0; j < entries_.size(); ++j) {
        if (entries_[j] == 0) continue;
        if (!s.empty()) s += ';';
        s += std::to_string(j + 1);
        s += ':';
        s += std::to_string(entries_[j]);
    }
    return s;
}

MultiIndex MultiIndex::decode(std::string_view text) {
    if (text == "0" || text.empty()) return {};
    std::vector<unsigned> e;
    while (!text.empty()) {
        const auto semi = text.find(';');
        const std::string_view item = text.substr(0, semi);
        const auto colon = item.find(':');
        if (colon == std::string_view::npos) throw std::invalid_argument("MultiIndex::decode: missing ':'");
        int j = 0;
        unsigned c = 0;
        const auto r1 = std::from_chars(item.data(), item.data() + colon, j);
        const auto r2 = std::from_chars(item.data() + colon + 1, item.data() + item.size(), c);
        if (r1.ec != std::errc{} || r2.ec != std::errc{} || j < 1 ||
            r1.ptr != item.data() + colon || r2.ptr != item.data() + item.size())
            throw std::invalid_argument("MultiIndex::decode: malformed entry '" + std::string(item) + "'");
        if (static_cast<int>(e.size()) < j) e.resize(static_cast<std::size_t>(j), 0u);
        e[static_cast<std::size_t>(j - 1)] += c;
        if (semi == std::string_view::npos) break;
        text.remove_prefix(semi + 1);
    }
    return MultiIndex(std::move(e));
}

MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
    std::vector<unsigned> e(std::max(a.entries_.size(), b.entries_.size()), 0u);
    for (std::size_t j = 0; j < a.entries_.size(); ++j) e[j] += a.entries_[j];
    for (std::size_t j = 0; j < b.entries_.size(); ++j) e[j] += b.entries_[j];
    return MultiIndex(std::move(e));
}

bool GradedLess::operator()(const MultiIndex& a, const MultiIndex& b) const {
    if (a.degree() != b.degree()) return a.degree() < b.degree();
    const int J = std::max(a.max_mode(), b.max_mode());
    for (int j = 1; j <= J; ++j)
        if (a[j] != b[j]) return a[j] > b[j];
    return false;
}

// ============================================================================
// Enumeration
// ============================================================================

namespace {

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double b = 1.0;
    for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
    return std::round(b);
}

void compositions(int remaining, int pos, int J, std::vector<unsigned>& cur, std::vector<MultiIndex>& out) {
    if (pos == J - 1) {
        cur[static_cast<std::size_t>(pos)] = static_cast<unsigned>(remaining);
        out.emplace_back(cur);
        return;
    }
    for (int a = remaining; a >= 0; --a) {
        cur[static_cast<std::size_t>(pos)] = static_cast<unsigned>(a);
        compositions(remaining - a, pos + 1, J, cur, out);
    }
    cur[static_cast<std::size_t>(pos)] = 0;
}

}  // namespace

std::size_t TruncationSpec::count() const {
    double c = 0.0;
    for (int n = 0; n <= max_order; ++n) c += binomial(n + max_mode - 1, max_mode - 1);
    return static_cast<std::size_t>(c);
}

std::vector<MultiIndex> enumerate_degree(int n, int J) {
    if (n < 0 || J < 1) throw std::invalid_argument("enumerate_degree: need n >= 0 and J >= 1");
    std::vector<MultiIndex> out;
    std::vector<unsigned> cur(static_cast<std::size_t>(J), 0u);
    compositions(n, 0, J, cur, out);
    return out;
}

std::vector<MultiIndex> enumerate_multiindices(const TruncationSpec& spec, std::size_t cap) {
    if (spec.max_order < 0 || spec.max_mode < 1)
        throw std::invalid_argument("enumerate_multiindices: need N >= 0 and J >= 1");
    double total = 0.0;
    for (int n = 0; n <= spec.max_order; ++n) total += binomial(n + spec.max_mode - 1, spec.max_mode - 1);
    if (total > static_cast<double>(cap))
        throw std::length_error("enumerate_multiindices: " + std::to_string(static_cast<long long>(total)) +
                                " indices exceed the cap of " + std::to_string(cap));
    std::vector<MultiIndex> out;
    out.reserve(static_cast<std::size_t>(total));
    for (int n = 0; n <= spec.max_order; ++n) {
        auto level = enumerate_degree(n, spec.max_mode);
        out.insert(out.end(), std::make_move_iterator(level.begin()), std::make_move_iterator(level.end()));
    }
    return out;
}

std::vector<std::vector<int>> distinct_arrangements(const MultiIndex& alpha) {
    std::vector<int> k = alpha.characteristic();
    std::vector<std::vector<int>> out;
    do {
        out.push_back(k);
    } while (std::next_permutation(k.begin(), k.end()));
    return out;
}

double evaluate_sym_basis(const MultiIndex& alpha, std::span<const double> y) {
    const std::size_t n = alpha.degree();
    if (n == 0) throw std::invalid_argument("evaluate_sym_basis: degree must be >= 1");
    if (y.size() != n) throw std::invalid_argument("evaluate_sym_basis: argument length differs from |alpha|");
    const std::size_t J = static_cast<std::size_t>(alpha.max_mode());
    std::vector<double> table(n * J);
    for (std::size_t i = 0; i < n; ++i) hermite_functions(y[i], std::span<double>(table).subspan(i * J, J));

    std::vector<int> k = alpha.characteristic();
    double sum = 0.0;
    do {
        double prod = 1.0;
        for (std::size_t i = 0; i < n; ++i) prod *= table[i * J + static_cast<std::size_t>(k[i] - 1)];
        sum += prod;
    } while (std::next_permutation(k.begin(), k.end()));

    double nfact = 1.0;
    for (std::size_t i = 2; i <= n; ++i) nfact *= static_cast<double>(i);
    // each distinct arrangement stands for alpha! permutations
    return std::sqrt(alpha.factorial() / nfact) * sum;
}

double sample_xi(const MultiIndex& alpha, const GaussianCoordinates& g) {
    if (alpha.max_mode() > static_cast<int>(g.values.size()))
        throw std::invalid_argument("sample_xi: support exceeds coordinate length");
    double v = 1.0;
    for (int j = 1; j <= alpha.max_mode(); ++j) {
        const unsigned a = alpha[j];
        if (a == 0) continue;
        double f = 1.0;
        for (unsigned k = 2; k <= a; ++k) f *= k;
        v *= hermite_poly(static_cast<int>(a), g.values[static_cast<std::size_t>(j - 1)]) / std::sqrt(f);
    }
    return v;
}

}  // namespace wickshe
