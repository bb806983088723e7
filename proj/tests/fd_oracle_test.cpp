#include "inchsim/fd_oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace inchsim;

namespace {

StackProperties props_with(double d31, int bend_dir) {
    TrimorphStack s;
    s.piezo = {30e9, 3200.0, 300e-6, 0.31};
    s.epoxy = {1.5e9, 1100.0, 93e-6, std::nullopt};
    s.substrate = {203e9, 7900.0, 50.8e-6, 0.27};
    s.d31 = d31;
    s.electrode_pitch = 500e-6;
    s.actuator_length = 0.1;
    s.width = 0.02;
    s.bend_direction = bend_dir;
    return derive_properties(s);
}

StackProperties p1() { return props_with(460e-12, -1); }
StackProperties p2() { return props_with(170e-12, +1); }

VoltageProfile single_profile(double v, const StackProperties& pr) {
    VoltageProfile p;
    p.actuator_count = 1;
    p.actuator_length = pr.actuator_length;
    p.voltages = {v};
    p.bend_signs = {pr.bend_direction};
    return p;
}

double max_abs_diff(const FdSolution& fd, const PiecewiseQuartic& shape, double shift = 0.0) {
    double m = 0.0;
    for (size_t i = 0; i < fd.x.size(); ++i)
        m = std::max(m, std::abs(fd.y[i] - shape.eval(fd.x[i] + shift)));
    return m;
}

}  // namespace

TEST(FdOracle, ZeroVoltageFlat) {
    StackProperties pr = p1();
    VoltageProfile p = VoltageProfile::paper_robot({0, 0, 0, 0, 0}, 0.1);
    FdSolution fd = solve_fd_oracle(pr, p, {}, 2000);
    for (double v : fd.y) EXPECT_NEAR(v, 0.0, 1e-15);
    ASSERT_EQ(fd.topology.flat.size(), 1u);
}

TEST(FdOracle, ClampedSingleSweepAgreesWithClosedForm) {
    StackProperties pr = p2();
    FdOracleOptions opts;
    opts.clamp_left = true;
    const int n = 10000;
    const double h = pr.actuator_length / n;
    for (int i = 1; i <= 10; ++i) {
        const double V = 36.0 * i;
        ShapeSolution cf = solve_clamped_single(pr, V);
        FdSolution fd = solve_fd_oracle(pr, single_profile(V, pr), {}, n, opts);
        EXPECT_LT(max_abs_diff(fd, cf.shape), 1e-6) << "V=" << V;
        // suspended length from the contact set within two grid spacings
        double flat_end = 0.0;
        for (const Interval& f : fd.topology.flat) flat_end = std::max(flat_end, f.hi);
        for (double c : fd.topology.contact_points) flat_end = std::max(flat_end, c);
        const double s_fd = pr.actuator_length - flat_end;
        EXPECT_NEAR(s_fd, cf.suspended_lengths.at("L_SUS"), 2.0 * h + 1e-12) << "V=" << V;
    }
}

TEST(FdOracle, ThreeSymmetricCenterDisplacement) {
    StackProperties pr = p1();
    VoltageProfile p;
    p.actuator_count = 3;
    p.actuator_length = 0.1;
    p.bend_signs = {+1, -1, +1};
    for (double v3 : {30.0, 100.0, 400.0, 1000.0}) {
        p.voltages = {0.3 * v3, -v3, 0.3 * v3};
        ShapeSolution cf = solve_three_symmetric(pr, 0.3 * v3, -v3, 0.3 * v3);
        FdSolution fd = solve_fd_oracle(pr, p, {}, 10000);
        const double y0_fd = fd.eval(0.15);
        EXPECT_NEAR(cf.shape.eval(0.0), y0_fd, 1e-5) << "V3=" << v3;
        EXPECT_LT(max_abs_diff(fd, cf.shape, -0.15), 1e-5) << "V3=" << v3;
    }
}

TEST(FdOracle, RobotMatchesSpanSolver) {
    StackProperties pr = p1();
    VoltageProfile p = VoltageProfile::paper_robot({300, 300, -960, 300, 300}, 0.1);
    ShapeSolution cf = solve_robot(pr, p, {});
    FdSolution fd = solve_fd_oracle(pr, p, {}, 10000);
    EXPECT_LT(max_abs_diff(fd, cf.shape), 1e-5);
    ASSERT_EQ(fd.topology.contact_points.size() +
                  (fd.topology.flat.size() - 0),  // flats may absorb grid-wide points
              2u);
    const double h = 0.5 / 10000;
    EXPECT_NEAR(fd.topology.contact_points[0], cf.topology.contact_points[0], 2.5 * h);
    EXPECT_NEAR(fd.topology.contact_points[1], cf.topology.contact_points[1], 2.5 * h);
}

TEST(FdOracle, RobotWithPayloadsMatchesSpanSolver) {
    StackProperties pr = p1();
    VoltageProfile p = VoltageProfile::paper_robot({0, 300, -1500, 300, 300}, 0.1);
    const std::vector<PointLoad> payloads = {
        PointLoad::mass(0.0, 0.005), PointLoad::mass(0.1, 0.025), PointLoad::mass(0.4, 0.025),
        PointLoad::mass(0.5, 0.005)};
    ShapeSolution cf = solve_robot(pr, p, payloads);
    FdSolution fd = solve_fd_oracle(pr, p, payloads, 10000);
    EXPECT_LT(max_abs_diff(fd, cf.shape), 1e-5);
}

TEST(FdOracle, ForceBalance) {
    StackProperties pr = p1();
    VoltageProfile p = VoltageProfile::paper_robot({300, 300, -960, 300, 300}, 0.1);
    const std::vector<PointLoad> payloads = {PointLoad::mass(0.25, 0.01)};
    FdSolution fd = solve_fd_oracle(pr, p, payloads, 4000);
    double total = 0.0;
    for (double r : fd.reaction) total += r;
    const double weight = pr.qg() * 0.5 + 0.01 * kGravity;
    EXPECT_NEAR(total, weight, 1e-9 * weight);
}

TEST(FdOracle, RejectsTinyGrids) {
    StackProperties pr = p1();
    VoltageProfile p = VoltageProfile::paper_robot({0, 0, 0, 0, 0}, 0.1);
    EXPECT_THROW(solve_fd_oracle(pr, p, {}, 4), std::invalid_argument);
}
