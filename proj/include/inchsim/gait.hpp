#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "inchsim/contact.hpp"
#include "inchsim/groundforce.hpp"

namespace inchsim {

struct GaitStep {
    std::array<double, 5> voltages{};
    double dwell = 4.0;  // s, informational under the quasi-static model
};

struct GaitSequence {
    std::vector<GaitStep> steps;  // cyclic: the last step's successor is the first
    std::string label = "custom";

    void validate() const {
        if (steps.empty()) throw std::invalid_argument("GaitSequence: no steps");
    }
};

/// Fig.-18-style forward cycle: lift right, curl middle, swap the lifted end,
/// flatten. Four cyclic transitions per cycle.
inline GaitSequence forward_preset(double v_end = 300.0, double v_flank = 300.0,
                                   double v3 = -1500.0, double dwell = 4.0) {
    GaitSequence g;
    g.label = "forward";
    g.steps = {
        {{0, 0, 0, 0, v_end}, dwell},
        {{0, v_flank, v3, v_flank, v_end}, dwell},
        {{v_end, v_flank, v3, v_flank, 0}, dwell},
        {{v_end, 0, 0, 0, 0}, dwell},
    };
    return g;
}

inline GaitSequence backward_preset(double v_end = 300.0, double v_flank = 300.0,
                                    double v3 = -1500.0, double dwell = 4.0) {
    GaitSequence g = forward_preset(v_end, v_flank, v3, dwell);
    std::reverse(g.steps.begin(), g.steps.end());
    g.label = "backward";
    return g;
}

/// Control with neither end driven: curl and flatten only.
inline GaitSequence neither_preset(double v_flank = 300.0, double v3 = -1500.0,
                                   double dwell = 4.0) {
    GaitSequence g;
    g.label = "neither";
    g.steps = {
        {{0, 0, 0, 0, 0}, dwell},
        {{0, v_flank, v3, v_flank, 0}, dwell},
    };
    return g;
}

/// Control with both ends driven identically.
inline GaitSequence both_preset(double v_end = 300.0, double v_flank = 300.0,
                                double v3 = -1500.0, double dwell = 4.0) {
    GaitSequence g;
    g.label = "both";
    g.steps = {
        {{v_end, 0, 0, 0, v_end}, dwell},
        {{v_end, v_flank, v3, v_flank, v_end}, dwell},
    };
    return g;
}

struct PayloadLayout {
    std::vector<PointLoad> loads;

    static PayloadLayout none() { return {}; }

    static PayloadLayout ends(double mass_each, double total_length) {
        PayloadLayout p;
        p.loads = {PointLoad::mass(0.0, mass_each), PointLoad::mass(total_length, mass_each)};
        return p;
    }

    static PayloadLayout interfaces_12_45(double mass_each, double actuator_length) {
        PayloadLayout p;
        p.loads = {PointLoad::mass(actuator_length, mass_each),
                   PointLoad::mass(4.0 * actuator_length, mass_each)};
        return p;
    }

    static PayloadLayout middle_3(double mass, double actuator_length) {
        PayloadLayout p;
        p.loads = {PointLoad::mass(2.5 * actuator_length, mass)};
        return p;
    }

    /// Paper default for replication runs: 25 g on each 1/2 and 4/5 interface
    /// plus 5 g on each end.
    static PayloadLayout paper_default(double actuator_length) {
        PayloadLayout p;
        p.loads = {PointLoad::mass(actuator_length, 0.025),
                   PointLoad::mass(4.0 * actuator_length, 0.025),
                   PointLoad::mass(0.0, 0.005),
                   PointLoad::mass(5.0 * actuator_length, 0.005)};
        return p;
    }

    PayloadLayout& add(const PayloadLayout& other) {
        loads.insert(loads.end(), other.loads.begin(), other.loads.end());
        return *this;
    }

    void validate() const {
        for (const PointLoad& pl : loads)
            if (pl.kind == PointLoad::Kind::mass && pl.magnitude < 0.0)
                throw std::invalid_argument("PayloadLayout: negative mass");
    }
};

enum class AnchorSide { left, right, none };

inline const char* to_string(AnchorSide s) {
    switch (s) {
        case AnchorSide::left: return "left";
        case AnchorSide::right: return "right";
        default: return "none";
    }
}

/// The side whose half carries strictly more friction during the transition;
/// the lifted-end state dominates. `none` when the split is symmetric.
inline AnchorSide anchor_side(const ShapeSolution& before, const ShapeSolution& after,
                              double mu) {
    const double eps_f = 1e-9;
    const double split = 0.5 * (before.shape.lo() + before.shape.hi());
    auto imbalance = [mu, split](const ShapeSolution& s) {
        auto [l, r] = friction_forces(ground_force(s), mu, split);
        return l - r;
    };
    const double db = imbalance(before);
    const double da = imbalance(after);
    const double d = (std::abs(db) >= std::abs(da)) ? db : da;
    if (std::abs(d) < eps_f) return AnchorSide::none;
    return d > 0.0 ? AnchorSide::left : AnchorSide::right;
}

/// End displacements for one quasi-static transition. The anchored side stays
/// fixed; the free end absorbs the whole change of x-extent (contraction
/// pulls it inward). A symmetric transition splits the change evenly.
inline std::pair<double, double> step_displacement(const ShapeSolution& before,
                                                   const ShapeSolution& after,
                                                   AnchorSide anchor) {
    const double c_before = contraction_length(before.shape, before.shape.lo(), before.shape.hi());
    const double c_after = contraction_length(after.shape, after.shape.lo(), after.shape.hi());
    const double dc = c_after - c_before;
    switch (anchor) {
        case AnchorSide::left: return {0.0, -dc};
        case AnchorSide::right: return {dc, 0.0};
        default: return {0.5 * dc, -0.5 * dc};
    }
}

struct CycleResult {
    struct Transition {
        AnchorSide anchor = AnchorSide::none;
        double dx_left = 0.0, dx_right = 0.0;
        double x_fixed = 0.0;  // absolute position of the anchored end
    };
    std::vector<Transition> transitions;
    double net_dx = 0.0;      // net displacement of the tracked (right) end
    double fixed_point = 0.0;  // anchor position of the largest transition
    // sampled absolute end positions: (t_s, x_left, x_right) after each step
    std::vector<std::array<double, 3>> end_trajectories;
};

/// Runs one gait cycle: solves the contact problem per step, anchors by
/// friction asymmetry per transition and accumulates the end motion.
inline CycleResult run_cycle(const StackProperties& props, const GaitSequence& sequence,
                             const PayloadLayout& payloads, double mu) {
    sequence.validate();
    payloads.validate();
    const double X = 5.0 * props.actuator_length;
    if (props.voltage_range) {
        for (const GaitStep& st : sequence.steps)
            for (double v : st.voltages)
                if (v < props.voltage_range->first || v > props.voltage_range->second)
                    warn("gait step voltage " + std::to_string(v) +
                         " V outside the configured actuator range");
    }
    std::vector<ShapeSolution> sols;
    sols.reserve(sequence.steps.size());
    for (size_t i = 0; i < sequence.steps.size(); ++i) {
        const GaitStep& st = sequence.steps[i];
        VoltageProfile p = VoltageProfile::paper_robot(st.voltages, props.actuator_length);
        try {
            sols.push_back(solve_robot(props, p, payloads.loads));
        } catch (const SolverError& e) {
            throw SolverError("run_cycle: contact solve failed at step " + std::to_string(i + 1) +
                              ": " + e.what());
        }
    }
    CycleResult out;
    double x_left = 0.0, x_right = X, t = 0.0;
    out.end_trajectories.push_back({t, x_left, x_right});
    double biggest = -1.0;
    const size_t n = sols.size();
    for (size_t i = 0; i < n; ++i) {
        const ShapeSolution& before = sols[i];
        const ShapeSolution& after = sols[(i + 1) % n];
        CycleResult::Transition tr;
        tr.anchor = anchor_side(before, after, mu);
        auto [dl, dr] = step_displacement(before, after, tr.anchor);
        tr.dx_left = dl;
        tr.dx_right = dr;
        tr.x_fixed = (tr.anchor == AnchorSide::left) ? x_left
                     : (tr.anchor == AnchorSide::right) ? x_right
                                                        : 0.5 * (x_left + x_right);
        x_left += dl;
        x_right += dr;
        t += sequence.steps[i].dwell;
        out.end_trajectories.push_back({t, x_left, x_right});
        if (std::abs(dl) + std::abs(dr) > biggest) {
            biggest = std::abs(dl) + std::abs(dr);
            out.fixed_point = tr.x_fixed;
        }
        out.transitions.push_back(tr);
    }
    out.net_dx = x_right - X;
    return out;
}

/// Quasi-static: displacement per cycle is frequency independent, so the
/// average speed is net_dx times the cycle frequency.
inline double speed(const CycleResult& result, double cycle_frequency) {
    if (!(cycle_frequency > 0.0)) throw std::invalid_argument("speed: frequency must be > 0");
    return result.net_dx * cycle_frequency;
}

enum class LayoutFamily { middle_3, interfaces_12_45 };

struct PayloadSweepRow {
    double mass = 0.0;    // kg per load point
    double net_dx = 0.0;  // m
    bool failed = false;
};

/// Per-mass cycle runs. The middle_3 family adds the swept mass at the middle
/// of actuator #3 on top of the paper-default payloads; the interfaces family
/// sweeps the 1/2 and 4/5 interface masses themselves (plus 5 g end loads).
inline std::vector<PayloadSweepRow> payload_sweep(const StackProperties& props,
                                                  const GaitSequence& sequence,
                                                  LayoutFamily family,
                                                  const std::vector<double>& masses, double mu) {
    std::vector<PayloadSweepRow> rows;
    const double L = props.actuator_length;
    for (double m : masses) {
        if (m < 0.0) throw std::invalid_argument("payload_sweep: negative mass");
        PayloadLayout layout;
        if (family == LayoutFamily::middle_3) {
            layout = PayloadLayout::paper_default(L);
            layout.add(PayloadLayout::middle_3(m, L));
        } else {
            layout = PayloadLayout::interfaces_12_45(m, L);
            layout.add(PayloadLayout::ends(0.005, 5.0 * L));
        }
        PayloadSweepRow row;
        row.mass = m;
        try {
            row.net_dx = run_cycle(props, sequence, layout, mu).net_dx;
        } catch (const SolverError&) {
            row.failed = true;
            row.net_dx = 0.0;
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace inchsim
