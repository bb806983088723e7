#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "inchsim/contact.hpp"

namespace inchsim {

// Distributed reaction density on flat intervals plus discrete reactions.
struct GroundForceProfile {
    struct Piece {
        double lo = 0.0, hi = 0.0;
        double density = 0.0;  // N/m
    };
    std::vector<Piece> distributed;
    std::vector<PointForce> point_forces;
    double total = 0.0;

    // clamp contributions, kept out of the ground-force bookkeeping
    double clamp_force = 0.0;   // N (may be negative)
    double clamp_moment = 0.0;  // N*m applied by the clamp at the left end
};

/// Ground reaction distribution from a contact solution: qg density on flat
/// intervals, discrete forces at lift-off boundaries (the adjacent suspended
/// weight, recovered from the y''' jump), contact reactions from the solver,
/// and direct transmission of payloads resting on flat ground.
inline GroundForceProfile ground_force(const ShapeSolution& sol) {
    if (!sol.grounded)
        throw std::invalid_argument("ground_force: solution has no ground contact model");
    const double lo = sol.shape.lo(), hi = sol.shape.hi();
    const int n = 2000;
    for (int i = 0; i <= n; ++i)
        if (sol.shape.eval(lo + (hi - lo) * i / n) < -1e-9)
            throw std::invalid_argument("ground_force: solution violates y >= 0");

    const double qg = sol.props.qg();
    GroundForceProfile out;
    for (const Interval& f : sol.topology.flat) {
        out.distributed.push_back({f.lo, f.hi, qg});
        out.total += qg * f.length();
    }
    for (const PointForce& r : sol.point_reactions) {
        out.point_forces.push_back(r);
        out.total += r.force;
    }
    // payloads resting on flat ground (or exactly at a contact point) are
    // transmitted directly
    for (const PointLoad& pl : sol.payloads) {
        if (pl.kind != PointLoad::Kind::mass) continue;
        bool at_contact = false;
        for (double c : sol.topology.contact_points)
            if (std::abs(c - pl.position) < 1e-12) at_contact = true;
        if (sol.topology.is_flat_at(pl.position) || at_contact) {
            out.point_forces.push_back({pl.position, pl.magnitude * kGravity});
            out.total += pl.magnitude * kGravity;
        }
    }
    if (sol.clamped_left) {
        // whatever the ground does not carry is held by the clamp
        double weight = qg * (hi - lo);
        for (const PointLoad& pl : sol.payloads)
            if (pl.kind == PointLoad::Kind::mass) weight += pl.magnitude * kGravity;
        out.clamp_force = weight - out.total;
        const CurvatureField f = curvature_field(sol.profile, sol.props);
        out.clamp_moment = sol.props.flexural_rigidity * (sol.shape.eval(lo, 2) - f.at(lo));
    }
    std::sort(out.point_forces.begin(), out.point_forces.end(),
              [](auto& a, auto& b) { return a.x < b.x; });
    return out;
}

struct AsymmetryReport {
    double f_g2 = 0.0;           // N, lift-off reaction on the left middle contact
    double f_g4 = 0.0;           // N, right middle contact
    double delta = 0.0;          // F_g2 - F_g4
    double ratio = 0.0;          // delta / F_g,R
    double friction_left = 0.0;  // N
    double friction_right = 0.0;
};

/// Left/right ground-force asymmetry of the lifted-end state from the
/// suspended lengths, with optional end masses. Torque balance about the
/// middle of actuator #3 gives
///   delta = (q g L_sl^2 + 2 dm g L_sl) / L_sm,
/// and the right-half reference F_g,R counts the right middle reaction, the
/// flat outer actuator and the transmitted end mass.
inline AsymmetryReport asymmetry_from_lengths(double q, double L, double l_sus_left,
                                              double l_sus_mid, double delta_m, double mu = 0.3) {
    if (!(l_sus_mid > 0.0))
        throw std::invalid_argument("asymmetry_from_lengths: L_SUS_MID must be > 0");
    if (l_sus_left < 0.0)
        throw std::invalid_argument("asymmetry_from_lengths: L_SUS_LEFT must be >= 0");
    if (mu < 0.0) throw std::invalid_argument("asymmetry_from_lengths: mu must be >= 0");
    const double qg = q * kGravity;
    AsymmetryReport rep;
    rep.delta = (qg * l_sus_left * l_sus_left + 2.0 * delta_m * kGravity * l_sus_left) / l_sus_mid;
    rep.f_g2 = 0.5 * qg * l_sus_mid + 0.5 * rep.delta;
    rep.f_g4 = 0.5 * qg * l_sus_mid - 0.5 * rep.delta;
    const double c = (q > 0.0) ? delta_m / q : 0.0;
    const double num = 2.0 * l_sus_left * l_sus_left + 4.0 * c * l_sus_left;
    const double den = l_sus_mid * l_sus_mid + 2.0 * L * l_sus_mid + 2.0 * c * l_sus_mid -
                       l_sus_left * l_sus_left - 2.0 * c * l_sus_left;
    rep.ratio = num / den;
    // halves per the same bookkeeping: F_g,R = F_g4 + qg L + dm g
    const double f_right = rep.f_g4 + qg * L + delta_m * kGravity;
    const double f_left = rep.f_g2 + (qg * l_sus_left + delta_m * kGravity) +
                          qg * (L - std::min(l_sus_left, L));
    rep.friction_left = mu * f_left;
    rep.friction_right = mu * f_right;
    return rep;
}

/// Closed-form ratio in the driving voltages, valid while neither suspended
/// length clips: L_sl = sqrt(2 EI gamma V1/(qg)) <= L and
/// L_sm = cbrt(12 gamma (|V2|+|V3|) L EI/(qg)) <= 3L. Algebraically identical
/// to composing asymmetry_from_lengths with those substitutions.
inline AsymmetryReport asymmetry_from_voltages(const StackProperties& props, double v1,
                                               double v2, double v3, double mu = 0.3) {
    const double L = props.actuator_length;
    const double EI = props.flexural_rigidity;
    const double qg = props.qg();
    const double gamma = std::abs(props.gamma);
    const double l_sl = std::sqrt(2.0 * EI * gamma * std::abs(v1) / qg);
    const double l_sm = std::cbrt(12.0 * gamma * (std::abs(v2) + std::abs(v3)) * L * EI / qg);
    if (l_sl > L || l_sm > 3.0 * L)
        throw std::invalid_argument(
            "asymmetry_from_voltages: clipping violated (L_SUS_LEFT > L or L_SUS_MID > 3L); "
            "use asymmetry_from_lengths with clipped lengths");
    return asymmetry_from_lengths(qg / kGravity, L, l_sl, l_sm, 0.0, mu);
}

/// mu times the total ground force on each side of split_x.
inline std::pair<double, double> friction_forces(const GroundForceProfile& profile, double mu,
                                                 double split_x) {
    if (mu < 0.0) throw std::invalid_argument("friction_forces: mu must be >= 0");
    double left = 0.0, right = 0.0;
    for (const auto& d : profile.distributed) {
        left += d.density * (std::clamp(split_x, d.lo, d.hi) - d.lo);
        right += d.density * (d.hi - std::clamp(split_x, d.lo, d.hi));
    }
    for (const PointForce& p : profile.point_forces) {
        if (std::abs(p.x - split_x) < 1e-15) {
            left += 0.5 * p.force;
            right += 0.5 * p.force;
        } else if (p.x < split_x) {
            left += p.force;
        } else {
            right += p.force;
        }
    }
    return {mu * left, mu * right};
}

/// Distributed table: x_m, f_ground_N_per_m.
inline void export_groundforce_csv(const GroundForceProfile& profile, std::ostream& os,
                                   double lo, double hi, int samples = 1001) {
    os << "x_m,f_ground_N_per_m\n";
    char buf[80];
    for (int i = 0; i < samples; ++i) {
        const double x = lo + (hi - lo) * i / (samples - 1);
        double density = 0.0;
        for (const auto& d : profile.distributed)
            if (x >= d.lo - 1e-15 && x <= d.hi + 1e-15) density = d.density;
        std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", x, density);
        os << buf;
    }
}

/// Point-force table: x_m, F_N.
inline void export_pointforce_csv(const GroundForceProfile& profile, std::ostream& os) {
    os << "x_m,F_N\n";
    char buf[80];
    for (const PointForce& p : profile.point_forces) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", p.x, p.force);
        os << buf;
    }
}

}  // namespace inchsim
