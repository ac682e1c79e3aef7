#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qrf/directional.hpp"

using qrf::analytic_success_directional;
using qrf::closed_form_populations;
using qrf::ClosedFormRoute;
using qrf::cplx;
using qrf::DirectionalKraus;
using qrf::initial_slope_directional;
using qrf::kraus_directional;
using qrf::Matrix;
using qrf::optimal_directional_state;
using qrf::ProbabilityVector;
using qrf::SpinRFState;
using qrf::success_probability_directional;
using qrf::update_diagonal;
using qrf::update_full;

namespace {

SpinRFState diagonal_state(int two_j, std::vector<double> pops) {
    ProbabilityVector p;
    p.entries = std::move(pops);
    return SpinRFState::diagonal(two_j, std::move(p));
}

std::vector<double> iterate_populations(int two_j, std::vector<double> p, int n) {
    SpinRFState s = diagonal_state(two_j, std::move(p));
    for (int i = 0; i < n; ++i) s = update_diagonal(s);
    return s.populations().entries;
}

}  // namespace

// ---------------------------------------------------------------------------
// optimal state and Kraus operators
// ---------------------------------------------------------------------------

TEST(OptimalDirectionalState, AllPopulationAtTop) {
    for (int two_j : {1, 2, 200}) {
        const auto s = optimal_directional_state(two_j);
        const auto& p = s.populations().entries;
        ASSERT_EQ(p.size(), static_cast<std::size_t>(two_j) + 1);
        EXPECT_DOUBLE_EQ(p[0], 1.0);
        for (std::size_t x = 1; x < p.size(); ++x) EXPECT_DOUBLE_EQ(p[x], 0.0);
    }
    EXPECT_THROW(optimal_directional_state(0), std::invalid_argument);
    EXPECT_THROW(optimal_directional_state(-2), std::invalid_argument);
}

TEST(KrausDirectional, TableValuesAtJOne) {
    const auto k = kraus_directional(2);  // j = 1
    ASSERT_EQ(k.e00_plus.size(), 3u);
    EXPECT_NEAR(k.e00_plus[0], 1.0, 1e-15);
    EXPECT_NEAR(k.e00_plus[1], 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(k.e00_plus[2], 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(k.e11_minus[0], 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(k.e11_minus[1], 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(k.e11_minus[2], 0.0, 1e-15);
    // off-diagonal: sqrt(x(2j+1-x))/(2j+1) for x = 1, 2
    EXPECT_NEAR(k.e01[0], std::sqrt(2.0) / 3.0, 1e-15);
    EXPECT_NEAR(k.e01[1], std::sqrt(2.0) / 3.0, 1e-15);
    EXPECT_THROW(kraus_directional(0), std::invalid_argument);
}

TEST(KrausDirectional, ProjectorsMatchClebschGordanOracle) {
    for (int two_j : {1, 2, 7, 10}) {
        const auto k = kraus_directional(two_j);
        const Matrix plus = k.projector(+1);
        const Matrix minus = k.projector(-1);
        const Matrix oracle_plus = oracle::total_j_projector(two_j, two_j + 1);
        const Matrix oracle_minus = oracle::total_j_projector(two_j, two_j - 1);
        EXPECT_LE((plus - oracle_plus).max_abs(), 1e-12) << "two_j=" << two_j;
        EXPECT_LE((minus - oracle_minus).max_abs(), 1e-12) << "two_j=" << two_j;
    }
}

TEST(KrausDirectional, ProjectorAlgebra) {
    for (int two_j = 1; two_j <= 40; two_j += (two_j < 8 ? 1 : 7)) {
        const auto k = kraus_directional(two_j);
        const Matrix plus = k.projector(+1);
        const Matrix minus = k.projector(-1);
        const std::size_t d = 2 * (static_cast<std::size_t>(two_j) + 1);
        EXPECT_LE((plus * plus - plus).max_abs(), 1e-12) << "two_j=" << two_j;
        EXPECT_LE((minus * minus - minus).max_abs(), 1e-12) << "two_j=" << two_j;
        EXPECT_LE((plus * minus).max_abs(), 1e-12) << "two_j=" << two_j;
        EXPECT_LE((plus + minus - Matrix::identity(d)).max_abs(), 1e-12) << "two_j=" << two_j;
    }
}

// ---------------------------------------------------------------------------
// diagonal update
// ---------------------------------------------------------------------------

TEST(UpdateDiagonal, HandIteratedValuesAtJOne) {
    const auto p1 = iterate_populations(2, {1.0, 0.0, 0.0}, 1);
    EXPECT_NEAR(p1[0], 7.0 / 9.0, 1e-15);
    EXPECT_NEAR(p1[1], 2.0 / 9.0, 1e-15);
    EXPECT_NEAR(p1[2], 0.0, 1e-15);

    const auto p2 = iterate_populations(2, {7.0 / 9.0, 2.0 / 9.0, 0.0}, 1);
    EXPECT_NEAR(p2[0], 53.0 / 81.0, 1e-15);
    EXPECT_NEAR(p2[1], 24.0 / 81.0, 1e-15);
    EXPECT_NEAR(p2[2], 4.0 / 81.0, 1e-15);
}

TEST(UpdateDiagonal, MaximallyMixedIsStationary) {
    for (int two_j : {1, 2, 3, 9, 40}) {
        const std::size_t d = static_cast<std::size_t>(two_j) + 1;
        std::vector<double> uniform(d, 1.0 / static_cast<double>(d));
        const auto next = iterate_populations(two_j, uniform, 1);
        for (std::size_t x = 0; x < d; ++x)
            EXPECT_NEAR(next[x], uniform[x], 1e-15) << "two_j=" << two_j << " x=" << x;
    }
}

TEST(UpdateDiagonal, RequiresDiagonalRepresentation) {
    const auto full = optimal_directional_state(2).to_full();
    EXPECT_THROW(update_diagonal(full), std::invalid_argument);
    EXPECT_THROW(update_full(optimal_directional_state(2)), std::invalid_argument);
}

TEST(UpdateDiagonal, TracePreservedAndPositiveOverRandomStates) {
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const int two_j = 1 + static_cast<int>(rng() % 100);
        auto p = oracle::random_populations(rng, static_cast<std::size_t>(two_j) + 1);
        const auto next = iterate_populations(two_j, p, 3);
        double sum = 0.0;
        for (double v : next) {
            EXPECT_GE(v, -1e-12);
            sum += v;
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
    }
}

TEST(UpdateDiagonal, PositivityOverTenThousandSteps) {
    for (int two_j : {9, 200}) {  // j = 4.5 and j = 100
        SpinRFState s = optimal_directional_state(two_j);
        for (int n = 0; n < 10000; ++n) {
            s = update_diagonal(s);
            // SpinRFState::diagonal revalidates: entries >= -1e-12, sum 1e-10
        }
        const auto& p = s.populations().entries;
        for (double v : p) EXPECT_GE(v, -1e-12);
        EXPECT_NEAR(s.populations().sum(), 1.0, 1e-10);
    }
}

// ---------------------------------------------------------------------------
// full-matrix update
// ---------------------------------------------------------------------------

TEST(UpdateFull, MatchesDiagonalUpdateOnEmbeddedDiagonal) {
    std::mt19937 rng(7);
    for (int two_j : {1, 2, 5, 12}) {
        auto pops = oracle::random_populations(rng, static_cast<std::size_t>(two_j) + 1);
        const SpinRFState diag = diagonal_state(two_j, pops);
        const SpinRFState full = diag.to_full();
        const auto after_diag = update_diagonal(diag).populations().entries;
        const Matrix after_full = update_full(full).density_matrix();
        for (std::size_t x = 0; x <= static_cast<std::size_t>(two_j); ++x)
            EXPECT_NEAR(std::real(after_full(x, x)), after_diag[x], 1e-14);
    }
}

TEST(UpdateFull, DiagonalStatesStayDiagonal) {
    std::mt19937 rng(8);
    const int two_j = 9;
    auto pops = oracle::random_populations(rng, 10);
    SpinRFState s = diagonal_state(two_j, pops).to_full();
    for (int step = 0; step < 5; ++step) s = update_full(s);
    const Matrix& rho = s.density_matrix();
    for (std::size_t x = 0; x < rho.rows(); ++x) {
        for (std::size_t y = 0; y < rho.cols(); ++y) {
            if (x != y) {
                EXPECT_LE(std::abs(rho(x, y)), 1e-14);
            }
        }
    }
}

TEST(UpdateFull, BruteForceJointSpaceOracleAtJHalf) {
    // one step from |j,j><j,j| at j = 1/2 against Tr_S[sum_c Pi_c (rho x I/2) Pi_c]
    const SpinRFState s = optimal_directional_state(1).to_full();
    const Matrix updated = update_full(s).density_matrix();

    const auto k = kraus_directional(1);
    const Matrix brute =
        oracle::averaged_map_joint(s.density_matrix(), {k.projector(+1), k.projector(-1)});
    EXPECT_LE((updated - brute).max_abs(), 1e-14);
    EXPECT_NEAR(std::real(updated(0, 0)), 0.75, 1e-14);
    EXPECT_NEAR(std::real(updated(1, 1)), 0.25, 1e-14);
}

TEST(UpdateFull, BruteForceJointSpaceOracleOnRandomStates) {
    std::mt19937 rng(99);
    for (int two_j : {1, 2, 5}) {
        const auto k = kraus_directional(two_j);
        const std::vector<Matrix> projectors = {k.projector(+1), k.projector(-1)};
        for (int trial = 0; trial < 5; ++trial) {
            const Matrix rho =
                oracle::random_density_matrix(rng, static_cast<std::size_t>(two_j) + 1);
            const SpinRFState s = SpinRFState::full(two_j, rho);
            const Matrix updated = update_full(s).density_matrix();
            const Matrix brute = oracle::averaged_map_joint(rho, projectors);
            EXPECT_LE((updated - brute).max_abs(), 1e-13) << "two_j=" << two_j;
        }
    }
}

TEST(UpdateFull, PreservesTraceHermiticityPositivity) {
    std::mt19937 rng(123);
    for (int trial = 0; trial < 30; ++trial) {
        const int two_j = 1 + static_cast<int>(rng() % 12);
        const Matrix rho = oracle::random_density_matrix(rng, static_cast<std::size_t>(two_j) + 1);
        SpinRFState s = SpinRFState::full(two_j, rho);
        for (int step = 0; step < 3; ++step) s = update_full(s);
        const Matrix& out = s.density_matrix();
        EXPECT_NEAR(std::abs(out.trace()), 1.0, 1e-12);
        EXPECT_LE(out.hermiticity_error(), 1e-12);
        EXPECT_TRUE(qrf::is_positive_semidefinite(out, 1e-10));
    }
}

TEST(UpdateFull, MaximallyMixedIsStationary) {
    const int two_j = 5;
    const std::size_t d = 6;
    Matrix rho(d, d);
    for (std::size_t x = 0; x < d; ++x) rho(x, x) = 1.0 / static_cast<double>(d);
    const Matrix out = update_full(SpinRFState::full(two_j, rho)).density_matrix();
    EXPECT_LE((out - rho).max_abs(), 1e-15);
}

// ---------------------------------------------------------------------------
// success probability and the exact decay law
// ---------------------------------------------------------------------------

TEST(SuccessProbability, OptimalAndMixedValues) {
    for (int two_j : {1, 2, 9, 100}) {
        const double d = two_j + 1.0;
        EXPECT_NEAR(success_probability_directional(optimal_directional_state(two_j)),
                    1.0 - 1.0 / (2.0 * d), 1e-15);
        std::vector<double> uniform(static_cast<std::size_t>(two_j) + 1, 1.0 / d);
        EXPECT_NEAR(success_probability_directional(diagonal_state(two_j, uniform)), 0.5, 1e-14);
    }
    // j = 1 hand-iterated populations
    EXPECT_NEAR(success_probability_directional(diagonal_state(2, {7.0 / 9.0, 2.0 / 9.0, 0.0})),
                20.5 / 27.0, 1e-15);
}

TEST(AnalyticSuccess, MatchesHandValuesAtJOne) {
    EXPECT_NEAR(analytic_success_directional(2, 0), 5.0 / 6.0, 1e-15);
    EXPECT_NEAR(analytic_success_directional(2, 1), 20.5 / 27.0, 1e-15);
    EXPECT_NEAR(analytic_success_directional(2, 2), 170.5 / 243.0, 1e-15);
    EXPECT_THROW(analytic_success_directional(2, -1), std::invalid_argument);
}

TEST(AnalyticSuccess, MatchesIteratedRecurrence) {
    for (int two_j : {1, 2, 3, 4, 10, 20}) {
        SpinRFState s = optimal_directional_state(two_j);
        for (int n = 0; n <= 200; ++n) {
            EXPECT_NEAR(success_probability_directional(s), analytic_success_directional(two_j, n),
                        1e-12)
                << "two_j=" << two_j << " n=" << n;
            s = update_diagonal(s);
        }
    }
}

TEST(InitialSlope, FormulaAndConsistency) {
    EXPECT_NEAR(initial_slope_directional(2), -2.0 / 27.0, 1e-16);
    for (int two_j : {1, 2, 5, 40, 200}) {
        const auto s0 = optimal_directional_state(two_j);
        const auto s1 = update_diagonal(s0);
        const double simulated =
            success_probability_directional(s1) - success_probability_directional(s0);
        EXPECT_NEAR(simulated, initial_slope_directional(two_j), 1e-14) << "two_j=" << two_j;
    }
    // large-j bound: |R| <= 1/(4j^2)
    const int two_j = 2000;  // j = 1000
    const double j = 1000.0;
    EXPECT_LE(std::abs(initial_slope_directional(two_j)), 1.0 / (4.0 * j * j));
}

TEST(Monotonicity, SuccessProbabilityNeverIncreasesOnAlignedStates) {
    // Ps is monotone under the update on the useful branch Ps >= 1/2; states
    // with Ps < 1/2 are equivalent to aligned ones under relabeling the
    // outcomes (population mirror x -> 2j-x), so the generator maps them back.
    std::mt19937 rng(31337);
    for (int trial = 0; trial < 1000; ++trial) {
        const int two_j = 1 + static_cast<int>(rng() % 100);  // j <= 50
        auto pops = oracle::random_populations(rng, static_cast<std::size_t>(two_j) + 1);
        SpinRFState s = diagonal_state(two_j, pops);
        if (success_probability_directional(s) < 0.5) {
            std::reverse(pops.begin(), pops.end());
            s = diagonal_state(two_j, pops);
        }
        const double before = success_probability_directional(s);
        ASSERT_GE(before, 0.5);
        const double after = success_probability_directional(update_diagonal(s));
        EXPECT_LE(after, before + 1e-12);
    }
}

// ---------------------------------------------------------------------------
// closed-form populations (large-j limit)
// ---------------------------------------------------------------------------

TEST(ClosedFormPopulations, BaseCases) {
    const auto p0 = closed_form_populations(2000, 0);
    ASSERT_EQ(p0.entries.size(), 1u);
    EXPECT_DOUBLE_EQ(p0.entries[0], 1.0);

    for (int two_j : {200, 20000}) {
        const auto p1 = closed_form_populations(two_j, 1);
        ASSERT_EQ(p1.entries.size(), 2u);
        EXPECT_NEAR(p1.entries[0], 1.0 - 1.0 / two_j, 1e-14);
        EXPECT_NEAR(p1.entries[1], 1.0 / two_j, 1e-14);
    }
    EXPECT_THROW(closed_form_populations(200, -1), std::invalid_argument);
}

TEST(ClosedFormPopulations, MatchesLimitRecurrenceIteration) {
    // n = 50 at j = 10^4: direct finite-sum route vs 50 recurrence steps
    const auto direct = closed_form_populations(20000, 50, ClosedFormRoute::finite_sum);
    const auto iterated = closed_form_populations(20000, 50, ClosedFormRoute::recurrence);
    ASSERT_EQ(direct.entries.size(), iterated.entries.size());
    for (std::size_t x = 0; x < direct.entries.size(); ++x)
        EXPECT_NEAR(direct.entries[x], iterated.entries[x], 1e-9) << "x=" << x;
    EXPECT_TRUE(direct.is_valid());
}

TEST(ClosedFormPopulations, LongRunAtLargeJ) {
    const auto direct = closed_form_populations(2000000, 1000, ClosedFormRoute::finite_sum);
    const auto iterated = closed_form_populations(2000000, 1000, ClosedFormRoute::recurrence);
    for (std::size_t x = 0; x < direct.entries.size(); ++x)
        EXPECT_NEAR(direct.entries[x], iterated.entries[x], 1e-9);
    EXPECT_TRUE(direct.is_valid());
}

TEST(ClosedFormPopulations, FallsBackWhenIllConditioned) {
    // at j = n = 1000 the alternating sum cancels past the 1e-8 budget around
    // x ~ 20 while the limit recurrence is still stable: the automatic route
    // must switch over
    EXPECT_THROW(closed_form_populations(2000, 1000, ClosedFormRoute::finite_sum),
                 std::domain_error);
    const auto automatic = closed_form_populations(2000, 1000);
    const auto recurrence = closed_form_populations(2000, 1000, ClosedFormRoute::recurrence);
    ASSERT_EQ(automatic.entries.size(), recurrence.entries.size());
    for (std::size_t x = 0; x < automatic.entries.size(); ++x)
        EXPECT_DOUBLE_EQ(automatic.entries[x], recurrence.entries[x]);
}

// ---------------------------------------------------------------------------
// trace container
// ---------------------------------------------------------------------------

TEST(DegradationTrace, ValidationCatchesBadData) {
    qrf::DegradationTrace t;
    t.steps = {0, 1};
    t.success_probability = {0.8, 0.7};
    EXPECT_NO_THROW(t.validate());
    t.success_probability = {0.7, 0.8};  // increasing
    EXPECT_THROW(t.validate(), std::invalid_argument);
    t.success_probability = {0.8};
    EXPECT_THROW(t.validate(), std::invalid_argument);
    t.steps = {0};
    t.success_probability = {0.3};  // below 1/2
    EXPECT_THROW(t.validate(), std::invalid_argument);
}
