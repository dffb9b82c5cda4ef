#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "wickshe/regularity.hpp"

using namespace wickshe;

namespace {

// F_n increments with sum_n m_n(h) = h^slope split across degrees by `shares`.
class PowerLawSource final : public IncrementSource {
public:
    PowerLawSource(double slope, std::vector<double> shares) : slope_(slope), shares_(std::move(shares)) {}
    std::vector<double> point_masses(SpaceTimePoint) const override { return shares_; }
    std::vector<double> increment_masses(SpaceTimePoint a, SpaceTimePoint b) const override {
        const double h = std::abs(b.t - a.t) + std::abs(b.x - a.x);
        std::vector<double> m(shares_);
        for (double& v : m) v *= std::pow(h, slope_);
        return m;
    }
    int max_order() const override { return static_cast<int>(shares_.size()) - 1; }

private:
    double slope_;
    std::vector<double> shares_;
};

}  // namespace

TEST(FitExponent, RecoversAnExactPowerLaw) {
    const auto lags = geometric_lags(1.0 / 128.0, 0.125, 9);
    std::vector<double> m;
    for (double h : lags) m.push_back(3.0 * std::pow(h, 1.5));
    const auto e = fit_exponent(lags, m);
    EXPECT_NEAR(e.slope, 1.5, 1e-12);
    EXPECT_NEAR(e.r_squared, 1.0, 1e-12);
    EXPECT_NEAR(e.holder_exponent(), 0.75, 1e-12);
    EXPECT_FALSE(e.low_r_squared);
    EXPECT_EQ(e.n_points, 9);
    EXPECT_DOUBLE_EQ(e.h_min, 1.0 / 128.0);
}

TEST(FitExponent, RejectsShortOrDegenerateInput) {
    const std::vector<double> five{0.1, 0.2, 0.3, 0.4, 0.5};
    EXPECT_THROW((void)fit_exponent(five, five), std::invalid_argument);
    const std::vector<double> lags{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    const std::vector<double> flat(6, 2.0);
    EXPECT_THROW((void)fit_exponent(lags, flat), std::domain_error);
    std::vector<double> neg(6, 1.0);
    neg[2] = -1.0;
    EXPECT_THROW((void)fit_exponent(lags, neg), std::domain_error);
    const std::vector<double> same(6, 0.1);
    EXPECT_THROW((void)fit_exponent(same, lags), std::domain_error);
}

TEST(GeometricLags, EndpointsAndConstantRatio) {
    const auto h = geometric_lags(0.01, 0.16, 5);
    ASSERT_EQ(h.size(), 5u);
    EXPECT_EQ(h.front(), 0.01);
    EXPECT_EQ(h.back(), 0.16);
    for (std::size_t i = 1; i < h.size(); ++i) EXPECT_NEAR(h[i] / h[i - 1], 2.0, 1e-12);
    EXPECT_THROW((void)geometric_lags(0.1, 0.1, 5), std::invalid_argument);
}

TEST(IncrementMoments, CurveFollowsTheSourceAndPassesTheGate) {
    const PowerLawSource src(1.0, {1.0, 0.5, 0.01});
    const auto lags = geometric_lags(0.01, 0.1, 8);
    const auto curve = increment_moments(src, {1.0, 0.0}, Direction::space, lags);
    EXPECT_TRUE(curve.monotone);
    EXPECT_NEAR(curve.top_order_share, 0.01 / 1.51, 1e-12);
    EXPECT_NEAR(fit_exponent(curve).slope, 1.0, 1e-12);
}

TEST(IncrementMoments, GateRefusesHeavyTopOrder) {
    const PowerLawSource src(1.0, {1.0, 0.5, 0.5});
    const auto lags = geometric_lags(0.01, 0.1, 8);
    EXPECT_THROW((void)increment_moments(src, {1.0, 0.0}, Direction::time, lags), TruncationGateError);
    GateOptions loose;
    loose.max_top_order_share = 0.5;
    EXPECT_NO_THROW((void)increment_moments(src, {1.0, 0.0}, Direction::time, lags, loose));
}

TEST(IncrementMoments, ValidatesLags) {
    const PowerLawSource src(1.0, {1.0, 0.0});
    const std::vector<double> bad{0.1, 0.05};
    EXPECT_THROW((void)increment_moments(src, {1.0, 0.0}, Direction::space, bad), std::invalid_argument);
    const std::vector<double> none;
    EXPECT_THROW((void)increment_moments(src, {1.0, 0.0}, Direction::space, none), std::invalid_argument);
}

TEST(IncrementMoments, ThreadCountDoesNotChangeTheCurve) {
    const FullModeSource src(1.0, Field::derivative, 2);
    const auto lags = geometric_lags(0.01, 0.1, 6);
    const auto a = increment_moments(src, {0.2, 0.0}, Direction::space, lags, {0.05, 1});
    const auto b = increment_moments(src, {0.2, 0.0}, Direction::space, lags, {0.05, 3});
    EXPECT_EQ(a.moments, b.moments);
}

TEST(CoefficientSource, IncrementMassesAreDegreeWiseSquaredDifferences) {
    const TruncationSpec spec{2, 3};
    const auto u0 = InitialCondition::sine();
    const CoefficientSource src([&](SpaceTimePoint p) { return cs_coefficients(spec, p.t, p.x, u0); }, spec);
    const auto a = cs_coefficients(spec, 0.5, 0.1, u0);
    const auto b = cs_coefficients(spec, 0.5, 0.3, u0);
    std::vector<double> expect(3, 0.0);
    for (const auto& [alpha, v] : a.values()) expect[alpha.degree()] += std::pow(b.get(alpha) - v, 2);
    const auto got = src.increment_masses({0.5, 0.1}, {0.5, 0.3});
    for (std::size_t n = 0; n < 3; ++n) EXPECT_NEAR(got[n], expect[n], 1e-15);
    EXPECT_EQ(src.max_order(), 2);
}

TEST(FullMode, FirstOrderKernelIsTheScaledPotential) {
    const FullModeSource u(2.0, Field::solution);
    const FullModeSource du(2.0, Field::derivative);
    EXPECT_NEAR(u.kernel1(1.0, 0.3, -0.2), 2.0 * heat_potential(1.0, -0.5), 1e-15);
    EXPECT_NEAR(du.kernel1(1.0, 0.3, -0.2), -2.0 * heat_potential_dz(1.0, -0.5), 1e-15);
}

TEST(FullMode, SecondOrderKernelMatchesTheFeynmanKacKernel) {
    const FullModeSource src(1.0, Field::solution);
    const auto fk = mw_kernel(2, 1.0, 0.1, InitialCondition::constant(), KernelForm::feynman_kac, 48);
    for (auto [y1, y2] : {std::pair{0.4, -0.3}, std::pair{1.2, 0.5}, std::pair{-0.6, -0.9}}) {
        const double y[2] = {y1, y2};
        EXPECT_NEAR(src.kernel2(1.0, 0.1, y1, y2), fk(y), 1e-6);
    }
}

TEST(FullMode, DerivativeKernelMatchesFiniteDifference) {
    const FullModeSource u(1.0, Field::solution);
    const FullModeSource du(1.0, Field::derivative);
    const double h = 1e-5;
    for (auto [y1, y2] : {std::pair{0.4, -0.3}, std::pair{1.2, 0.5}}) {
        const double fd = (u.kernel2(1.0, 0.1 + h, y1, y2) - u.kernel2(1.0, 0.1 - h, y1, y2)) / (2.0 * h);
        EXPECT_NEAR(du.kernel2(1.0, 0.1, y1, y2), fd, 1e-6);
    }
}

TEST(FullMode, FiniteModeSumsApproachTheFullMass) {
    const FullModeSource full(1.0, Field::solution, 1);
    const double m_full = full.point_masses({1.0, 0.0})[1];
    const QuadratureGrid grid(14.0, 64);
    const double direct = grid.integrate([](double y) { return std::pow(heat_potential(1.0, y), 2); });
    EXPECT_NEAR(m_full, direct, 1e-6 * direct);
    double prev = 0.0;
    for (int J : {2, 6, 12}) {
        const auto c = cs_coefficients({1, J}, 1.0, 0.0, InitialCondition::constant());
        const double m = order_masses(c)[1];
        EXPECT_GE(m, prev);
        EXPECT_LE(m, m_full * (1.0 + 1e-9));
        prev = m;
    }
    EXPECT_GT(prev, 0.95 * m_full);
}

TEST(LocalTimeIncrements, ExactRatioTendsToFourT) {
    for (double t : {0.5, 1.0}) {
        EXPECT_NEAR(local_time_increment_exact(t, 1e-5) / 1e-5, 4.0 * t, 1e-3);
        EXPECT_LT(local_time_increment_exact(t, 0.2) / 0.2, local_time_increment_exact(t, 0.1) / 0.1);
    }
    EXPECT_EQ(local_time_increment_exact(1.0, 0.0), 0.0);
}

TEST(LocalTimeIncrements, SpacingRule) {
    EXPECT_NEAR(local_time_spacing(0.1, 1e-3), 0.025, 1e-15);
    EXPECT_NEAR(local_time_spacing(0.05, 1e-3), 0.025, 1e-15);
    EXPECT_NEAR(local_time_spacing(0.2, 1e-3), 0.2 / 7.0, 1e-15);
    EXPECT_THROW((void)local_time_spacing(0.01, 1e-3), std::invalid_argument);
}

TEST(LocalTimeIncrements, MonteCarloRowsTrackTheExactLaw) {
    McOptions opts;
    opts.n_paths = 3000;
    const std::vector<double> hs{0.0, 0.1};
    const auto rows = local_time_increment_check(1.0, hs, StreamFactory(3), opts);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].ratio, 0.0);
    EXPECT_NEAR(rows[1].ratio, rows[1].exact_ratio, 3.0 * rows[1].std_error + 0.1 * rows[1].exact_ratio);
    EXPECT_NEAR(rows[1].spacing, 0.025, 1e-15);
}
