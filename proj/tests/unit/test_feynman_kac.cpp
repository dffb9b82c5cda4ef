#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "wickshe/feynman_kac.hpp"

using namespace wickshe;

namespace {

McOptions small_mc(std::size_t n, int threads = 1) {
    McOptions o;
    o.n_paths = n;
    o.threads = threads;
    o.block_size = 64;
    return o;
}

}  // namespace

TEST(BrownianPath, HasTheRequestedGridAndStart) {
    PhiloxEngine eng(stream_key(1, "paths"), 0);
    const auto p = simulate_path(1.0025, 0.01, 0.4, eng);
    EXPECT_EQ(p.start(), 0.4);
    EXPECT_EQ(p.steps(), 101u);
    EXPECT_NEAR(p.step_length(100), 0.0025, 1e-12);
    EXPECT_NEAR(p.t_grid().back(), 1.0025, 1e-12);
    EXPECT_THROW((void)simulate_path(0.0, 0.01, 0.0, eng), std::invalid_argument);
}

TEST(LevelGrid, CenteredGridContainsTheCentre) {
    const auto g = LevelGrid::centered(0.3, 1.0, 0.25);
    EXPECT_EQ(g.count, 9u);
    EXPECT_NEAR(g.level(4), 0.3, 1e-15);
    EXPECT_LE(g.front(), -0.7 + 1e-12);
    EXPECT_GE(g.back(), 1.3 - 1e-12);
    EXPECT_TRUE(g.matches(LevelGrid::centered(0.3, 1.0, 0.25)));
    EXPECT_FALSE(g.matches(LevelGrid::centered(0.3, 1.0, 0.2)));
}

TEST(LocalTime, OccupationMassEqualsElapsedTime) {
    const auto grid = LevelGrid::centered(0.0, 8.0, 0.05);
    for (std::uint64_t i = 0; i < 20; ++i) {
        PhiloxEngine eng(stream_key(2, "paths"), i);
        const auto prof = local_time(simulate_path(1.0, 1e-3, 0.0, eng), grid);
        EXPECT_NEAR(prof.total(), 1.0, 1e-12);
    }
}

TEST(LocalTime, ShiftedIncrementOfZeroLagIsZero) {
    PhiloxEngine eng(stream_key(3, "paths"), 0);
    const auto prof = local_time(simulate_path(1.0, 1e-3, 0.0, eng), LevelGrid::centered(0.0, 8.0, 0.05));
    EXPECT_EQ(prof.shifted_increment(0), 0.0);
    // shifting by the full grid width compares against zeros on both sides
    EXPECT_NEAR(prof.shifted_increment(prof.grid.count), 2.0 * prof.l2_squared(), 1e-12);
}

TEST(LocalTime, NarrowGridRaisesCoverageError) {
    PhiloxEngine eng(stream_key(4, "paths"), 0);
    const auto path = simulate_path(1.0, 1e-3, 0.0, eng);
    EXPECT_THROW((void)local_time(path, LevelGrid::centered(0.0, 0.05, 0.05)), CoverageError);
}

TEST(LocalTime, OccupationFunctionalOfOneIsTime) {
    PhiloxEngine eng(stream_key(5, "paths"), 0);
    const auto path = simulate_path(0.7, 1e-3, 0.0, eng);
    EXPECT_NEAR(occupation_functional(path, [](double) { return 1.0; }), 0.7, 1e-12);
}

TEST(Noise, ModesAreProjectionsOfIncrements) {
    const auto grid = LevelGrid::centered(0.0, 8.0, 0.05);
    PhiloxEngine eng(stream_key(6, "noise"), 0);
    const auto noise = sample_noise(grid, 3, eng);
    ASSERT_EQ(noise.increments.size(), grid.count);
    for (int j = 1; j <= 3; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < grid.count; ++i) s += hermite_function(j, grid.level(i)) * noise.increments[i];
        EXPECT_NEAR(noise.modes.values[static_cast<std::size_t>(j - 1)], s, 1e-12);
    }
    const auto zero = NoiseRealization::zero(grid, 2);
    EXPECT_EQ(zero.modes.values.size(), 2u);
}

TEST(Noise, ModeViewReproducesCoordinatesOnAFineGrid) {
    const auto grid = LevelGrid::centered(0.0, 10.0, 0.01);
    const GaussianCoordinates g{{0.5, -1.0, 0.25}};
    const auto n = noise_from_modes(grid, g);
    EXPECT_EQ(n.provenance, NoiseProvenance::mode_coordinates);
    for (int j = 1; j <= 3; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < grid.count; ++i) s += hermite_function(j, grid.level(i)) * n.increments[i];
        EXPECT_NEAR(s, g.values[static_cast<std::size_t>(j - 1)], 1e-6);
    }
}

TEST(Psi, SplitsIntoIntegralAndCompensator) {
    const auto grid = LevelGrid::centered(0.0, 8.0, 0.05);
    PhiloxEngine pe(stream_key(7, "paths"), 0), ne(stream_key(7, "noise"), 0);
    const auto prof = local_time(simulate_path(1.0, 1e-3, 0.0, pe), grid);
    const auto noise = sample_noise(grid, 1, ne);
    const auto psi = psi_sample(prof, noise);
    EXPECT_NEAR(psi.quadratic_term, 0.5 * prof.l2_squared(), 1e-14);
    EXPECT_NEAR(psi.value(), psi.stochastic_integral - psi.quadratic_term, 0.0);
    EXPECT_THROW((void)psi_sample(prof, sample_noise(LevelGrid::centered(0.0, 8.0, 0.04), 1, ne)),
                 std::invalid_argument);
}

TEST(Ensemble, ResultsDoNotDependOnThreadCount) {
    auto stat = [](std::size_t i, std::span<double> out) {
        PhiloxEngine eng(stream_key(8, "paths"), i);
        out[0] = static_cast<double>(eng()) / 4294967296.0;
        out[1] = out[0] * out[0];
    };
    const auto a = ensemble_means(5000, 2, small_mc(5000, 1), stat);
    const auto b = ensemble_means(5000, 2, small_mc(5000, 3), stat);
    for (std::size_t k = 0; k < 2; ++k) {
        EXPECT_EQ(a[k].value, b[k].value);
        EXPECT_EQ(a[k].std_error, b[k].std_error);
        EXPECT_EQ(a[k].samples, 5000u);
    }
}

TEST(Ensemble, MeanAndStandardErrorOfAKnownSequence) {
    const auto e = ensemble_means(4, 1, small_mc(4), [](std::size_t i, std::span<double> out) {
        out[0] = static_cast<double>(i);  // 0 1 2 3
    })[0];
    EXPECT_DOUBLE_EQ(e.value, 1.5);
    EXPECT_NEAR(e.std_error, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
}

TEST(TestFunctions, SupNormsAreUpperBounds) {
    for (const auto& f : {TestFunction::hermite_mode(1, 0.5), TestFunction::hermite_mode(4, 1.0),
                          TestFunction::gaussian_bump(0.5, 0.3, 1.0), TestFunction::constant(-2.0)}) {
        double m = 0.0;
        for (double y = -10.0; y <= 10.0; y += 0.001) m = std::max(m, std::abs(f(y)));
        EXPECT_LE(m, f.sup_norm + 1e-12);
    }
}

TEST(STransformMc, ZeroTestFunctionGivesTheMeanField) {
    const StreamFactory streams(10);
    const auto e = s_transform_mc(1.0, 0.0, InitialCondition::constant(), TestFunction::zero(), streams, small_mc(200));
    EXPECT_DOUBLE_EQ(e.value, 1.0);
    EXPECT_EQ(e.std_error, 0.0);
}

TEST(STransformMc, ConstantTestFunctionScalesByExponential) {
    const StreamFactory streams(11);
    const auto e =
        s_transform_mc(0.5, 0.0, InitialCondition::constant(), TestFunction::constant(0.4), streams, small_mc(200));
    EXPECT_NEAR(e.value, std::exp(0.2), 1e-12);
}

TEST(FeynmanKac, ConditionalEstimateAveragesToTheHeatFlow) {
    const auto u0 = InitialCondition::sine();
    const StreamFactory streams(12);
    const auto grid = default_noise_grid(0.5, std::numbers::pi / 2.0, 2.0 * std::sqrt(1e-3));
    const int draws = 60;
    double s = 0.0, s2 = 0.0;
    for (int d = 0; d < draws; ++d) {
        PhiloxEngine eng = streams.engine("noise", static_cast<std::uint64_t>(d));
        const auto noise = sample_noise(grid, 1, eng);
        const auto e = fk_conditional_estimate(0.5, std::numbers::pi / 2.0, u0, noise,
                                               streams.child("draw" + std::to_string(d)), small_mc(400));
        s += e.value;
        s2 += e.value * e.value;
    }
    const double m = s / draws;
    const double se = std::sqrt((s2 / draws - m * m) / (draws - 1));
    EXPECT_NEAR(m, std::exp(-0.25), 3.0 * se);
}

TEST(FeynmanKac, RejectsTinyEnsembles) {
    const auto grid = default_noise_grid(1.0, 0.0, 0.06);
    const auto noise = NoiseRealization::zero(grid, 1);
    EXPECT_THROW((void)fk_conditional_estimate(1.0, 0.0, InitialCondition::constant(), noise, StreamFactory(1),
                                               small_mc(50)),
                 std::invalid_argument);
}
