#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wickshe {

// Probabilists' Hermite polynomial He_n.
[[nodiscard]] double hermite_poly(int n, double x);

// e_j for j >= 1, i.e. the standard (physicists' weight) Hermite function of
// order j-1. e_1(x) = pi^{-1/4} exp(-x^2/2).
[[nodiscard]] double hermite_function(int j, double x);
[[nodiscard]] double hermite_function_dx(int j, double x);

// out[j-1] = e_j(x) for j = 1..out.size().
void hermite_functions(double x, std::span<double> out);
// Values and first derivatives in one pass.
void hermite_functions_dx(double x, std::span<double> values, std::span<double> derivs);

// ============================================================================
// Multi-indices
// ============================================================================

class MultiIndex {
public:
    MultiIndex() = default;
    // entries[0] is alpha_1. Trailing zeros are trimmed.
    explicit MultiIndex(std::vector<unsigned> entries);

    static MultiIndex unit(int j, unsigned count = 1);

    // alpha_j, 1-based; zero outside the stored range.
    [[nodiscard]] unsigned operator[](int j) const;
    [[nodiscard]] int max_mode() const { return static_cast<int>(entries_.size()); }
    [[nodiscard]] unsigned degree() const { return degree_; }
    [[nodiscard]] bool is_zero() const { return degree_ == 0; }
    [[nodiscard]] double factorial() const;
    [[nodiscard]] std::vector<int> characteristic() const;
    [[nodiscard]] const std::vector<unsigned>& entries() const { return entries_; }

    [[nodiscard]] MultiIndex raised(int j) const;
    [[nodiscard]] MultiIndex lowered(int j) const;  // requires alpha_j > 0

    // "j:count;j:count"; the zero index encodes as "0".
    [[nodiscard]] std::string encode() const;
    static MultiIndex decode(std::string_view text);

    friend MultiIndex operator+(const MultiIndex& a, const MultiIndex& b);
    friend bool operator==(const MultiIndex& a, const MultiIndex& b) = default;

private:
    std::vector<unsigned> entries_;
    unsigned degree_ = 0;
};

// Graded order: by degree, then descending lexicographic on (alpha_1, alpha_2, ...).
struct GradedLess {
    bool operator()(const MultiIndex& a, const MultiIndex& b) const;
};

struct TruncationSpec {
    int max_order = 4;  // N
    int max_mode = 6;   // J

    [[nodiscard]] std::size_t count() const;
    [[nodiscard]] bool admits(const MultiIndex& alpha) const {
        return static_cast<int>(alpha.degree()) <= max_order && alpha.max_mode() <= max_mode;
    }
    friend bool operator==(const TruncationSpec&, const TruncationSpec&) = default;
};

inline constexpr std::size_t kDefaultEnumerationCap = 2'000'000;

[[nodiscard]] std::vector<MultiIndex> enumerate_multiindices(const TruncationSpec& spec,
                                                             std::size_t cap = kDefaultEnumerationCap);
// Indices of one exact degree n, same order as the full enumeration.
[[nodiscard]] std::vector<MultiIndex> enumerate_degree(int n, int J);

// Distinct arrangements of the characteristic vector k_alpha, each a vector of modes.
[[nodiscard]] std::vector<std::vector<int>> distinct_arrangements(const MultiIndex& alpha);

// Symmetric tensor basis element evaluated at y (|alpha| = y.size()).
[[nodiscard]] double evaluate_sym_basis(const MultiIndex& alpha, std::span<const double> y);

struct GaussianCoordinates {
    std::vector<double> values;  // W_{e_1}, ..., W_{e_J}
};

[[nodiscard]] double sample_xi(const MultiIndex& alpha, const GaussianCoordinates& g);

}  // namespace wickshe
