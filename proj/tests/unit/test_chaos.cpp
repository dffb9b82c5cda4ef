#include <gtest/gtest.h>

#include <boost/random/normal_distribution.hpp>
#include <cmath>
#include <numbers>

#include "wickshe/chaos.hpp"
#include "wickshe/rng.hpp"

using namespace wickshe;

namespace {

ChaosCoefficients random_field(const TruncationSpec& spec, int max_degree, std::uint64_t seed) {
    ChaosCoefficients c({1.0, 0.0}, spec);
    PhiloxEngine eng(stream_key(seed, "field"), 0);
    boost::random::normal_distribution<double> normal;
    for (const auto& a : enumerate_multiindices(spec))
        if (static_cast<int>(a.degree()) <= max_degree) c.set(a, normal(eng) / (1.0 + a.degree()));
    return c;
}

double max_gap(const ChaosCoefficients& a, const ChaosCoefficients& b) {
    double m = 0.0;
    for (const auto& [alpha, v] : a.values()) m = std::max(m, std::abs(v - b.get(alpha)));
    for (const auto& [alpha, v] : b.values()) m = std::max(m, std::abs(v - a.get(alpha)));
    return m;
}

const double kU1Exact = std::pow(std::numbers::pi, -0.25) * 2.0 * (std::numbers::sqrt2 - 1.0);

}  // namespace

TEST(ChaosCoefficients, RejectsIndicesOutsideTheTruncation) {
    ChaosCoefficients c({1.0, 0.0}, {2, 3});
    EXPECT_NO_THROW(c.set(MultiIndex({1, 0, 1}), 1.0));
    EXPECT_THROW(c.set(MultiIndex({0, 0, 0, 1}), 1.0), std::out_of_range);
    EXPECT_THROW(c.add(MultiIndex({3}), 1.0), std::out_of_range);
    EXPECT_EQ(c.get(MultiIndex({2})), 0.0);
}

TEST(ChaosQuadrature, ZerothCoefficientIsTheHeatFlow) {
    const auto u0 = InitialCondition::sine();
    EXPECT_NEAR(cs_coefficient(MultiIndex{}, 0.7, 0.4, u0), std::exp(-0.35) * std::sin(0.4), 1e-12);
}

TEST(ChaosQuadrature, FirstModeMatchesClosedForm) {
    // u_(1)(t, 0; 1) = int_0^t (P_{t-s} e_1)(0) ds = pi^{-1/4} 2 (sqrt(1 + t) - 1)
    EXPECT_NEAR(cs_coefficient(MultiIndex::unit(1), 1.0, 0.0, InitialCondition::constant()), kU1Exact, 1e-9);
}

TEST(ChaosQuadrature, ParityZeroesOddModesAtTheOrigin) {
    // e_2 is odd and u0 = 1 is even, so the first-order coefficient vanishes at x = 0.
    EXPECT_NEAR(cs_coefficient(MultiIndex::unit(2), 1.0, 0.0, InitialCondition::constant()), 0.0, 1e-14);
}

TEST(ChaosQuadrature, BatchAgreesWithSingleCoefficients) {
    const auto u0 = InitialCondition::sine();
    const auto batch = cs_coefficients({2, 3}, 0.8, 0.2, u0);
    EXPECT_EQ(batch.size(), TruncationSpec({2, 3}).count());
    for (const auto& a : {MultiIndex{}, MultiIndex({0, 1}), MultiIndex({1, 0, 1}), MultiIndex({2})})
        EXPECT_NEAR(batch.get(a), cs_coefficient(a, 0.8, 0.2, u0), 1e-12) << a.encode();
}

TEST(ChaosQuadrature, DerivativeMatchesFiniteDifferenceInX) {
    const auto u0 = InitialCondition::sine();
    const double h = 1e-4;
    for (const auto& a : {MultiIndex::unit(1), MultiIndex({0, 1}), MultiIndex({1, 1}), MultiIndex({2})}) {
        const double fd = (cs_coefficient(a, 1.0, 0.3 + h, u0) - cs_coefficient(a, 1.0, 0.3 - h, u0)) / (2.0 * h);
        EXPECT_NEAR(dx_coefficient(a, 1.0, 0.3, u0), fd, 1e-6) << a.encode();
    }
}

TEST(ChaosQuadrature, DerivativeBatchMatchesSingle) {
    const auto u0 = InitialCondition::gaussian_bump(1.0, 0.8);
    const auto batch = dx_coefficients({2, 2}, 0.6, -0.1, u0);
    for (const auto& [a, v] : batch.values()) EXPECT_NEAR(v, dx_coefficient(a, 0.6, -0.1, u0), 1e-10) << a.encode();
}

TEST(ChaosQuadrature, EpsilonSequenceConvergesToTheLimit) {
    const auto u0 = InitialCondition::constant();
    const MultiIndex a = MultiIndex::unit(2);
    const auto seq = dx_epsilon_sequence(a, 1.0, 0.0, u0, 0.2);
    ASSERT_EQ(seq.values.size(), 4u);
    const double limit = dx_coefficient(a, 1.0, 0.0, u0);
    for (std::size_t k = 1; k < seq.values.size(); ++k)
        EXPECT_LT(std::abs(seq.values[k] - limit), std::abs(seq.values[k - 1] - limit));
    EXPECT_NEAR(seq.extrapolated, limit, 1e-4);
}

TEST(ChaosQuadrature, ZeroEpsilonCutEqualsFullDerivative) {
    const auto u0 = InitialCondition::sine();
    const MultiIndex a({1, 1});
    EXPECT_NEAR(dx_coefficient(a, 1.0, 0.5, u0, 1e-12), dx_coefficient(a, 1.0, 0.5, u0), 1e-6);
}

TEST(WienerKernels, FirstOrderIsTheHeatPotential) {
    const auto k = mw_kernel(1, 1.0, 0.2, InitialCondition::constant(2.0));
    const double at_x[1] = {0.2};
    EXPECT_NEAR(k(at_x), 2.0 * heat_potential(1.0, 0.0), 1e-12);
    for (double y : {-1.0, 0.9}) {
        const double arg[1] = {y};
        EXPECT_NEAR(k(arg), 2.0 * heat_potential(1.0, y - 0.2), 1e-6);
    }
}

TEST(WienerKernels, BoundaryLayerNearTheDiagonalConvergesWithTimeNodes) {
    // p(s, y - x) has a layer at s ~ (y - x)^2 that the fixed time rule resolves slowly.
    const auto u0 = InitialCondition::constant();
    const double y[1] = {0.02};
    const double exact = heat_potential(1.0, 0.02);
    const double coarse = std::abs(mw_kernel(1, 1.0, 0.0, u0, KernelForm::feynman_kac, 32)(y) - exact);
    const double fine = std::abs(mw_kernel(1, 1.0, 0.0, u0, KernelForm::feynman_kac, 128)(y) - exact);
    EXPECT_LT(fine, 0.1 * coarse);
    EXPECT_LT(fine, 1e-4);
}

TEST(WienerKernels, FirstOrderProjectsOntoTheCoefficient) {
    const auto u0 = InitialCondition::constant();
    const auto k = mw_kernel(1, 1.0, 0.0, u0, KernelForm::feynman_kac, 128);
    const QuadratureGrid grid(14.0, 32);
    const double proj = grid.integrate([&](double y) {
        const double arg[1] = {y};
        return k(arg) * hermite_function(1, y);
    });
    EXPECT_NEAR(proj, kU1Exact, 1e-5);
}

TEST(WienerKernels, RepresentationsAgree) {
    for (const auto& u0 : {InitialCondition::constant(), InitialCondition::sine()}) {
        for (int n = 1; n <= 2; ++n) {
            const auto fk = mw_kernel(n, 1.0, 0.3, u0, KernelForm::feynman_kac);
            const auto mw = mw_kernel(n, 1.0, 0.3, u0, KernelForm::multiple_wiener);
            const auto cs = mw_kernel(n, 1.0, 0.3, u0, KernelForm::chaos_symmetrized);
            for (double y1 : {-0.5, 0.3, 1.0})
                for (double y2 : {-0.2, 0.8}) {
                    const double y[2] = {y1, y2};
                    const std::span<const double> arg(y, static_cast<std::size_t>(n));
                    EXPECT_NEAR(fk(arg), mw(arg), 1e-12);
                    EXPECT_NEAR(fk(arg), cs(arg), 1e-4);
                }
        }
    }
}

TEST(WienerKernels, SecondOrderIsSymmetric) {
    const auto k = mw_kernel(2, 0.8, 0.1, InitialCondition::sine());
    const double a[2] = {0.4, -0.6}, b[2] = {-0.6, 0.4};
    EXPECT_NEAR(k(a), k(b), 1e-12);
}

TEST(WienerKernels, OrderCapIsEnforced) {
    EXPECT_THROW((void)mw_kernel(kKernelOrderCap + 1, 1.0, 0.0, InitialCondition::constant()), std::invalid_argument);
}

TEST(WickAlgebra, SquareOfFirstModeIsSecondHermite) {
    const TruncationSpec spec{3, 2};
    ChaosCoefficients xi({0.0, 0.0}, spec);
    xi.set(MultiIndex::unit(1), 1.0);
    const auto sq = wick_product(xi, xi);
    EXPECT_EQ(sq.dropped_mass, 0.0);
    EXPECT_EQ(sq.product.get(MultiIndex({2})), std::sqrt(2.0));
    for (const auto& [a, v] : sq.product.values())
        if (!(a == MultiIndex({2}))) EXPECT_EQ(v, 0.0);
}

TEST(WickAlgebra, STransformIsMultiplicativeBelowTruncation) {
    const TruncationSpec spec{4, 3};
    const auto F = random_field(spec, 2, 1);
    const auto G = random_field(spec, 2, 2);
    const auto FG = wick_product(F, G);
    EXPECT_EQ(FG.dropped_mass, 0.0);
    const double phi[3] = {0.3, -0.7, 0.2};
    EXPECT_NEAR(s_transform_chaos(FG.product, phi), s_transform_chaos(F, phi) * s_transform_chaos(G, phi), 1e-10);
}

TEST(WickAlgebra, CommutativeAndAssociativeBelowTruncation) {
    const TruncationSpec spec{3, 3};
    const auto F = random_field(spec, 1, 3);
    const auto G = random_field(spec, 1, 4);
    const auto H = random_field(spec, 1, 5);
    EXPECT_EQ(max_gap(wick_product(F, G).product, wick_product(G, F).product), 0.0);
    const auto left = wick_product(wick_product(F, G).product, H).product;
    const auto right = wick_product(F, wick_product(G, H).product).product;
    EXPECT_LE(max_gap(left, right), 1e-15);
}

TEST(WickAlgebra, ReportsDroppedMassAboveTruncation) {
    const TruncationSpec spec{2, 2};
    ChaosCoefficients F({0.0, 0.0}, spec);
    F.set(MultiIndex({2}), 1.0);
    EXPECT_GT(wick_product(F, F).dropped_mass, 0.0);
    ChaosCoefficients G({0.0, 0.0}, {2, 3});
    EXPECT_THROW((void)wick_product(F, G), std::invalid_argument);
}

TEST(STransform, StochasticExponentialGivesExponentialOfPairing) {
    const TruncationSpec spec{10, 2};
    const double psi[2] = {0.4, -0.3};
    const double phi[2] = {0.5, 0.2};
    const auto E = stochastic_exponential(spec, psi);
    EXPECT_NEAR(s_transform_chaos(E, phi), std::exp(0.4 * 0.5 - 0.3 * 0.2), 1e-12);
    const auto terms = s_transform_terms(E, phi);
    double sum = 0.0;
    for (double v : terms) sum += v;
    EXPECT_NEAR(sum, s_transform_chaos(E, phi), 1e-15);
}

TEST(STransform, TailEstimateShrinksWithOrder) {
    const double psi[2] = {0.4, -0.3};
    const double phi[2] = {0.5, 0.2};
    const double t4 = s_transform_tail_estimate(stochastic_exponential({4, 2}, psi), phi);
    const double t8 = s_transform_tail_estimate(stochastic_exponential({8, 2}, psi), phi);
    EXPECT_GT(t4, 0.0);
    EXPECT_LT(t8, t4);
    // the estimate bounds the actual remainder
    const double exact = std::exp(0.4 * 0.5 - 0.3 * 0.2);
    EXPECT_GE(t4, std::abs(exact - s_transform_chaos(stochastic_exponential({4, 2}, psi), phi)));
}

TEST(Moments, OrderMassesSumToSecondMoment) {
    const auto F = random_field({3, 3}, 3, 7);
    const auto m = order_masses(F);
    ASSERT_EQ(m.size(), 4u);
    double s = 0.0;
    for (double v : m) s += v;
    EXPECT_NEAR(s, second_moment(F), 1e-14);
    EXPECT_NEAR(order_norm(F, 2, 0.0), m[2], 1e-15);
    EXPECT_NEAR(order_norm(F, 2, 1.0), std::exp(4.0) * m[2], 1e-12);
}

TEST(Moments, RealizationsReproduceSecondMomentsAndIncrements) {
    // Chaos-side increment moments against Monte Carlo over the Gaussian coordinates.
    const auto u0 = InitialCondition::sine();
    const TruncationSpec spec{2, 4};
    const auto A = cs_coefficients(spec, 0.5, 0.1, u0);
    const auto B = cs_coefficients(spec, 0.5, 0.35, u0);
    double inc_exact = 0.0;
    for (const auto& [a, v] : B.values()) inc_exact += (v - A.get(a)) * (v - A.get(a));

    PhiloxEngine eng(stream_key(11, "coordinates"), 0);
    boost::random::normal_distribution<double> normal;
    const int n = 10000;
    double s1 = 0.0, s2 = 0.0, d1 = 0.0, d2 = 0.0;
    for (int i = 0; i < n; ++i) {
        GaussianCoordinates g{std::vector<double>(4)};
        for (auto& v : g.values) v = normal(eng);
        const double a = sample_realization(A, g);
        const double b = sample_realization(B, g);
        s1 += a * a;
        s2 += a * a * a * a;
        d1 += (b - a) * (b - a);
        d2 += std::pow(b - a, 4);
    }
    const double m = s1 / n, se = std::sqrt((s2 / n - m * m) / n);
    EXPECT_LE(std::abs(m - second_moment(A)), 3.0 * se);
    const double dm = d1 / n, dse = std::sqrt((d2 / n - dm * dm) / n);
    EXPECT_LE(std::abs(dm - inc_exact), 3.0 * dse);
}
