#include "inchsim/beam.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace inchsim;

namespace {

StackProperties table_props() {
    TrimorphStack s;
    s.piezo = {30e9, 3200.0, 300e-6, 0.31};
    s.epoxy = {1.5e9, 1100.0, 93e-6, std::nullopt};
    s.substrate = {203e9, 7900.0, 50.8e-6, 0.27};
    s.d31 = 460e-12;
    s.electrode_pitch = 500e-6;
    s.actuator_length = 0.1;
    s.width = 0.02;
    return derive_properties(s);
}

VoltageProfile three_profile(double v2, double v3, double v4, double L = 0.1) {
    VoltageProfile p;
    p.actuator_count = 3;
    p.actuator_length = L;
    p.voltages = {v2, v3, v4};
    p.bend_signs = {+1, -1, +1};
    return p;
}

}  // namespace

TEST(CurvatureFieldTest, SignsAndZeros) {
    StackProperties props = table_props();
    VoltageProfile p = VoltageProfile::paper_robot({0, 0, 0, 0, 0}, 0.1);
    CurvatureField f = curvature_field(p, props);
    for (double v : f.values) EXPECT_DOUBLE_EQ(v, 0.0);

    p = VoltageProfile::paper_robot({0, 300, -960, 300, 0}, 0.1);
    f = curvature_field(p, props);
    EXPECT_GT(f.values[1], 0.0);
    EXPECT_LT(f.values[2], 0.0);
    EXPECT_GT(f.values[3], 0.0);
    EXPECT_NEAR(f.values[2], -props.gamma * 960.0, 1e-15);

    VoltageProfile single;
    single.actuator_count = 1;
    single.actuator_length = 0.1;
    single.voltages = {200.0};
    single.bend_signs = {+1};
    f = curvature_field(single, props);
    ASSERT_EQ(f.values.size(), 1u);
    EXPECT_NEAR(f.values[0], props.gamma * 200.0, 1e-15);
}

TEST(PiezoParticular, MatchesThreeBranchClosedForm) {
    // centered three-actuator field reproduces the piecewise expression after
    // the x -> x + 3L/2 shift
    StackProperties props = table_props();
    const double L = 0.1;
    CurvatureField f = curvature_field(three_profile(90, -300, 90), props);
    // shift the domain to centered coordinates
    for (double& b : f.breakpoints) b -= 1.5 * L;
    PiecewiseQuartic Y = piezo_particular(f);
    const double k3 = props.gamma * 300.0, k4 = props.gamma * 90.0;
    auto closed = [&](double x) {
        if (std::abs(x) <= L / 2) return -0.5 * k3 * x * x;
        if (x > L / 2)
            return 0.5 * k4 * x * x - 0.5 * (k3 + k4) * L * x + 0.125 * (k3 + k4) * L * L;
        return 0.5 * k4 * x * x + 0.5 * (k3 + k4) * L * x + 0.125 * (k3 + k4) * L * L;
    };
    for (int i = 0; i <= 300; ++i) {
        const double x = -1.5 * L + 3.0 * L * i / 300.0;
        EXPECT_NEAR(Y.eval(x), closed(x), 1e-15);
    }
}

TEST(PiezoParticular, ZeroFieldAndSingleSpan) {
    CurvatureField zero{{0.0, 0.3}, {0.0}};
    PiecewiseQuartic Y0 = piezo_particular(zero);
    EXPECT_DOUBLE_EQ(Y0.eval(0.17), 0.0);

    CurvatureField cf{{0.0, 0.1}, {2.5}};
    PiecewiseQuartic Y = piezo_particular(cf);
    for (int i = 0; i <= 10; ++i) {
        const double x = 0.01 * i;
        EXPECT_NEAR(Y.eval(x), 0.5 * 2.5 * x * x, 1e-15);
    }
}

TEST(PiezoParticular, SecondDerivativeMatchesKappa) {
    StackProperties props = table_props();
    CurvatureField f = curvature_field(three_profile(120, -700, 120), props);
    PiecewiseQuartic Y = piezo_particular(f);
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> xs(0.0, 0.3);
    const double h = 1e-4 * 0.1;  // truncation-free for quadratics; above the FD cancellation floor
    for (int i = 0; i < 10000; ++i) {
        const double x = xs(rng);
        if (x < 2 * h || x > 0.3 - 2 * h) continue;
        // skip the immediate neighborhood of interfaces; kappa jumps there
        if (std::abs(x - 0.1) < 3 * h || std::abs(x - 0.2) < 3 * h) continue;
        const double fd = (Y.eval(x + h) - 2.0 * Y.eval(x) + Y.eval(x - h)) / (h * h);
        EXPECT_NEAR(fd, f.at(x), 1e-6 * std::abs(f.at(x)) + 1e-9);
    }
}

TEST(AssembleSegment, GoverningOdeHolds) {
    // every assembled shape satisfies d4y/dx4 = -qg/EI segment-wise (exact
    // coefficient identity in the quartic term)
    StackProperties props = table_props();
    CurvatureField f = curvature_field(three_profile(100, -400, 100), props);
    PiecewiseQuartic Y = piezo_particular(f);
    const double q = props.linear_density, EI = props.flexural_rigidity;
    PiecewiseQuartic y = assemble_segment(Y, q, kGravity, EI, {1e-4, -2e-3, 3e-2, 0.1},
                                          {PointLoad::mass(0.17, 0.011)});
    for (size_t i = 0; i < y.segment_count(); ++i)
        EXPECT_NEAR(y.segment_coef(i)[4], -q * kGravity / (24.0 * EI), 1e-18);
}

TEST(AssembleSegment, NoLoadsNoGravityKeepsBase) {
    CurvatureField cf{{0.0, 0.25}, {1.2}};
    PiecewiseQuartic Y = piezo_particular(cf);
    PiecewiseQuartic y = assemble_segment(Y, 0.0, kGravity, 1.0, {0, 0, 0, 0}, {});
    for (int i = 0; i <= 20; ++i) {
        const double x = 0.25 * i / 20.0;
        EXPECT_DOUBLE_EQ(y.eval(x), Y.eval(x));
    }
}

TEST(AssembleSegment, CantileverPointForceOracle) {
    // tip deflection under a point force F at x=a on a clamped-free beam
    // matches F a^2 (3x - a) / (6 EI) evaluated at the tip (classical formula)
    const double EI = 0.008, L = 0.1, F = -0.05, a = 0.04;
    CurvatureField cf{{0.0, L}, {0.0}};
    PiecewiseQuartic base = piezo_particular(cf);
    // clamp at 0, free at L: homogeneous part from M(L)=0, Q(L)=0
    const double c = F / (6.0 * EI);
    PiecewiseQuartic y = assemble_segment(base, 0.0, kGravity, EI, {0.0, 0.0, 6.0 * c * a, -6.0 * c},
                                          {PointLoad::force(a, F)});
    EXPECT_NEAR(y.eval(0.0), 0.0, 1e-18);
    EXPECT_NEAR(y.eval(0.0, 1), 0.0, 1e-18);
    const double tip_expect = F * a * a * (3.0 * L - a) / (6.0 * EI);
    EXPECT_NEAR(y.eval(L), tip_expect, 1e-15);
}

TEST(AssembleSegment, MassJumpExact) {
    const double EI = 0.0083, m = 0.025, x0 = 0.12;
    CurvatureField cf{{0.0, 0.3}, {0.7}};
    PiecewiseQuartic y = assemble_segment(piezo_particular(cf), 0.029, kGravity, EI,
                                          {0, 0, 0, 0}, {PointLoad::mass(x0, m)});
    const double jump = y.eval(x0, 3) - y.eval_left(x0, 3);
    EXPECT_NEAR(jump, -m * kGravity / EI, 1e-12 * std::abs(m * kGravity / EI));
}

TEST(AssembleSegment, LoadOutsideDomainThrows) {
    CurvatureField cf{{0.0, 0.1}, {0.0}};
    PiecewiseQuartic base = piezo_particular(cf);
    EXPECT_THROW(
        assemble_segment(base, 0.03, kGravity, 0.008, {0, 0, 0, 0}, {PointLoad::mass(0.2, 0.01)}),
        std::invalid_argument);
}

TEST(Evaluate, HornerRoundTrip) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    for (int rep = 0; rep < 50; ++rep) {
        const double a0 = coef(rng), a1 = coef(rng), a2 = coef(rng), a3 = coef(rng),
                     a4 = coef(rng);
        PiecewiseQuartic y(0.0, 0.5);
        y.add_monomials({a0, a1, a2, a3, a4});
        std::uniform_real_distribution<double> xs(0.0, 0.5);
        for (int i = 0; i < 40; ++i) {
            const double x = xs(rng);
            const double direct =
                a0 + a1 * x + 0.5 * a2 * x * x + a3 * x * x * x / 6.0 + a4 * x * x * x * x;
            EXPECT_NEAR(y.eval(x), direct, 1e-14 * (1.0 + std::abs(direct)));
        }
    }
}

TEST(Evaluate, OutsideDomainThrows) {
    PiecewiseQuartic y(0.0, 0.1);
    EXPECT_THROW(y.eval(0.2), std::out_of_range);
    EXPECT_THROW(y.eval(-0.01), std::out_of_range);
}

TEST(Evaluate, C1AcrossBreakpoints) {
    StackProperties props = table_props();
    CurvatureField f = curvature_field(three_profile(250, -900, 250), props);
    PiecewiseQuartic y = assemble_segment(piezo_particular(f), props.linear_density, kGravity,
                                          props.flexural_rigidity, {1e-3, -1e-2, 0.2, 1.0},
                                          {PointLoad::mass(0.23, 0.02)});
    for (double b : y.breakpoints()) {
        if (b <= y.lo() || b >= y.hi()) continue;
        EXPECT_NEAR(y.eval_left(b, 0), y.eval(b, 0), 1e-12);
        EXPECT_NEAR(y.eval_left(b, 1), y.eval(b, 1), 1e-12);
    }
}

TEST(Contraction, FlatAndQuadraticClosedForm) {
    PiecewiseQuartic flat(0.0, 0.5);
    EXPECT_DOUBLE_EQ(contraction_length(flat, 0.0, 0.5), 0.0);

    // y = 1/2 kappa x^2 over [0, s]: integral of (kappa x)^2 / 2 = kappa^2 s^3 / 6
    const double kappa = 0.8, s = 0.3;
    PiecewiseQuartic arc(0.0, s);
    arc.add_monomials({0, 0, kappa, 0, 0});
    EXPECT_NEAR(contraction_length(arc, 0.0, s), kappa * kappa * s * s * s / 6.0, 1e-12);
}

TEST(Contraction, SmallSlopeVsExactArc) {
    const double kappa = 0.9, s = 0.3;
    PiecewiseQuartic arc(0.0, s);
    arc.add_monomials({0, 0, kappa, 0, 0});
    const double approx = contraction_length(arc, 0.0, s);
    const double exact = contraction_length_exact(arc, 0.0, s);
    const double max_slope = kappa * s;
    EXPECT_NEAR(approx, exact, max_slope * max_slope * approx);
}

TEST(Contraction, WarnsOnSteepSlopes) {
    std::string captured;
    auto old = warn_handler();
    warn_handler() = [&captured](const std::string& m) { captured = m; };
    PiecewiseQuartic steep(0.0, 1.0);
    steep.add_monomials({0, 1.0, 0, 0, 0});  // slope 1 everywhere
    contraction_length(steep, 0.0, 1.0);
    warn_handler() = old;
    EXPECT_NE(captured.find("small-slope"), std::string::npos);
}

TEST(Linearity, VoltageScalingWithoutGravity) {
    StackProperties props = table_props();
    const double c = 2.7;
    CurvatureField f1 = curvature_field(three_profile(90, -300, 90), props);
    CurvatureField f2 = curvature_field(three_profile(c * 90, -c * 300, c * 90), props);
    PiecewiseQuartic y1 = assemble_segment(piezo_particular(f1), 0.0, kGravity,
                                           props.flexural_rigidity, {0, 0, 0, 0}, {});
    PiecewiseQuartic y2 = assemble_segment(piezo_particular(f2), 0.0, kGravity,
                                           props.flexural_rigidity, {0, 0, 0, 0}, {});
    for (int i = 0; i <= 60; ++i) {
        const double x = 0.3 * i / 60.0;
        EXPECT_NEAR(y2.eval(x), c * y1.eval(x), 1e-12);
    }
}
