#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wickshe/basis.hpp"
#include "wickshe/kernels.hpp"

using namespace wickshe;

namespace {

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

TEST(Hermite, LowOrderPolynomialsMatchClosedForms) {
    for (double x : {-2.5, -0.3, 0.0, 0.7, 3.1}) {
        EXPECT_DOUBLE_EQ(hermite_poly(0, x), 1.0);
        EXPECT_DOUBLE_EQ(hermite_poly(1, x), x);
        EXPECT_NEAR(hermite_poly(2, x), x * x - 1.0, 1e-14);
        EXPECT_NEAR(hermite_poly(3, x), x * x * x - 3.0 * x, 1e-13);
        EXPECT_NEAR(hermite_poly(4, x), std::pow(x, 4) - 6.0 * x * x + 3.0, 1e-12);
    }
}

TEST(Hermite, AppellBinomialIdentity) {
    // He_n(x + y) = sum_k C(n,k) He_k(x) y^{n-k}, equivalent to He_n' = n He_{n-1}.
    for (int n = 0; n <= 10; ++n)
        for (double x : {-1.3, 0.2, 1.9})
            for (double y : {-0.7, 0.4}) {
                double s = 0.0;
                for (int k = 0; k <= n; ++k) s += binomial(n, k) * hermite_poly(k, x) * std::pow(y, n - k);
                EXPECT_NEAR(hermite_poly(n, x + y), s, 1e-9 * std::max(1.0, std::abs(s)));
            }
}

TEST(Hermite, FunctionsAreOrthonormal) {
    const QuadratureGrid grid(20.0, 64);
    for (int i = 1; i <= 8; ++i)
        for (int j = 1; j <= 8; ++j) {
            const double ip = grid.integrate([&](double y) { return hermite_function(i, y) * hermite_function(j, y); });
            EXPECT_NEAR(ip, i == j ? 1.0 : 0.0, 1e-10) << i << "," << j;
        }
}

TEST(Hermite, FirstFunctionValue) {
    EXPECT_NEAR(hermite_function(1, 0.0), std::pow(std::numbers::pi, -0.25), 1e-15);
    EXPECT_NEAR(hermite_function(1, 1.0), std::pow(std::numbers::pi, -0.25) * std::exp(-0.5), 1e-15);
}

TEST(Hermite, DerivativesMatchFiniteDifferences) {
    const double h = 1e-5;
    for (int j = 1; j <= 8; ++j)
        for (double x : {-2.0, -0.4, 0.0, 1.1}) {
            const double fd = (hermite_function(j, x + h) - hermite_function(j, x - h)) / (2.0 * h);
            EXPECT_NEAR(hermite_function_dx(j, x), fd, 1e-8);
        }
}

TEST(Hermite, BatchEvaluationAgreesWithScalar) {
    std::vector<double> v(7), d(7);
    hermite_functions_dx(0.8, v, d);
    for (int j = 1; j <= 7; ++j) {
        EXPECT_NEAR(v[static_cast<std::size_t>(j - 1)], hermite_function(j, 0.8), 1e-14);
        EXPECT_NEAR(d[static_cast<std::size_t>(j - 1)], hermite_function_dx(j, 0.8), 1e-13);
    }
}

TEST(MultiIndex, TrimsTrailingZerosAndReportsDegree) {
    const MultiIndex a({2, 0, 1, 0, 0});
    EXPECT_EQ(a.max_mode(), 3);
    EXPECT_EQ(a.degree(), 3u);
    EXPECT_EQ(a[1], 2u);
    EXPECT_EQ(a[2], 0u);
    EXPECT_EQ(a[9], 0u);
    EXPECT_DOUBLE_EQ(a.factorial(), 2.0);
    EXPECT_EQ(a.characteristic(), (std::vector<int>{1, 1, 3}));
}

TEST(MultiIndex, EncodeDecodeRoundTrip) {
    EXPECT_EQ(MultiIndex{}.encode(), "0");
    EXPECT_EQ(MultiIndex::decode("0"), MultiIndex{});
    const MultiIndex a({0, 3, 0, 1});
    EXPECT_EQ(MultiIndex::decode(a.encode()), a);
    EXPECT_THROW((void)MultiIndex::decode("3"), std::invalid_argument);
}

TEST(MultiIndex, RaiseLowerAndSum) {
    const MultiIndex a = MultiIndex::unit(2);
    EXPECT_EQ(a.raised(2), MultiIndex({0, 2}));
    EXPECT_EQ(a.lowered(2), MultiIndex{});
    EXPECT_EQ(a + MultiIndex::unit(1, 3), MultiIndex({3, 1}));
}

TEST(Enumeration, SmallCasesInGradedOrder) {
    const auto z = enumerate_multiindices({0, 5});
    ASSERT_EQ(z.size(), 1u);
    EXPECT_TRUE(z[0].is_zero());
    const auto one = enumerate_multiindices({1, 2});
    ASSERT_EQ(one.size(), 3u);
    EXPECT_EQ(one[0], MultiIndex{});
    EXPECT_EQ(one[1], MultiIndex({1, 0}));
    EXPECT_EQ(one[2], MultiIndex({0, 1}));
}

TEST(Enumeration, CountIsBinomialAndOrderIsGraded) {
    for (int N = 0; N <= 5; ++N)
        for (int J = 1; J <= 6; ++J) {
            const TruncationSpec spec{N, J};
            const auto all = enumerate_multiindices(spec);
            EXPECT_EQ(all.size(), spec.count());
            EXPECT_DOUBLE_EQ(static_cast<double>(all.size()), binomial(N + J, J));
            for (std::size_t i = 1; i < all.size(); ++i) EXPECT_TRUE(GradedLess{}(all[i - 1], all[i]));
            for (const auto& a : all) EXPECT_TRUE(spec.admits(a));
        }
}

TEST(Enumeration, CapIsEnforced) { EXPECT_THROW((void)enumerate_multiindices({10, 40}, 1000), std::length_error); }

TEST(Enumeration, DegreeSliceMatchesFullEnumeration) {
    const auto all = enumerate_multiindices({3, 4});
    std::vector<MultiIndex> deg2;
    for (const auto& a : all)
        if (a.degree() == 2) deg2.push_back(a);
    EXPECT_EQ(enumerate_degree(2, 4), deg2);
}

TEST(SymmetricBasis, ArrangementCountIsMultinomial) {
    EXPECT_EQ(distinct_arrangements(MultiIndex({2, 1})).size(), 3u);
    EXPECT_EQ(distinct_arrangements(MultiIndex({1, 1, 1})).size(), 6u);
    EXPECT_EQ(distinct_arrangements(MultiIndex({3})).size(), 1u);
}

TEST(SymmetricBasis, HasUnitNormAndIsOrthogonal) {
    // int int E_alpha E_beta dy1 dy2 = delta_{alpha beta} / 2! under the symmetric normalisation
    // used here: sum over all degree-2 indices of E_alpha(y)^2 integrates consistently.
    const QuadratureGrid grid(12.0, 24);
    const auto& nodes = grid.nodes();
    const auto& w = grid.weights();
    const MultiIndex a({2}), b({1, 1}), c({0, 2});
    auto inner = [&](const MultiIndex& p, const MultiIndex& q) {
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            for (std::size_t k = 0; k < nodes.size(); ++k) {
                const double y[2] = {nodes[i], nodes[k]};
                s += w[i] * w[k] * evaluate_sym_basis(p, y) * evaluate_sym_basis(q, y);
            }
        return s;
    };
    const double naa = inner(a, a);
    EXPECT_NEAR(inner(b, b), naa, 1e-10);
    EXPECT_NEAR(inner(c, c), naa, 1e-10);
    EXPECT_NEAR(inner(a, b), 0.0, 1e-10);
    EXPECT_NEAR(inner(b, c), 0.0, 1e-10);
}

TEST(SymmetricBasis, SampleXiIsNormalisedHermiteProduct) {
    GaussianCoordinates g{{0.3, -1.2, 0.5}};
    EXPECT_DOUBLE_EQ(sample_xi(MultiIndex{}, g), 1.0);
    EXPECT_NEAR(sample_xi(MultiIndex::unit(2), g), -1.2, 1e-15);
    EXPECT_NEAR(sample_xi(MultiIndex({2, 0, 1}), g), (0.09 - 1.0) / std::sqrt(2.0) * 0.5, 1e-14);
    EXPECT_THROW((void)sample_xi(MultiIndex({0, 0, 0, 1}), g), std::invalid_argument);
}
