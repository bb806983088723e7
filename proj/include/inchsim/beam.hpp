#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <vector>

#include "inchsim/materials.hpp"

namespace inchsim {

/// Warning sink for soft precondition violations (small-slope checks etc.).
inline std::function<void(const std::string&)>& warn_handler() {
    static std::function<void(const std::string&)> h = [](const std::string& msg) {
        std::fprintf(stderr, "inchsim: warning: %s\n", msg.c_str());
    };
    return h;
}

inline void warn(const std::string& msg) {
    if (warn_handler()) warn_handler()(msg);
}

struct VoltageProfile {
    int actuator_count = 0;
    double actuator_length = 0.0;      // L
    std::vector<double> voltages;      // signed volts
    std::vector<int> bend_signs;       // +1 up, -1 down

    void validate() const {
        if (actuator_count < 1)
            throw std::invalid_argument("VoltageProfile: actuator_count must be >= 1");
        if (!(actuator_length > 0.0))
            throw std::invalid_argument("VoltageProfile: actuator_length must be > 0");
        if (voltages.size() != static_cast<size_t>(actuator_count) ||
            bend_signs.size() != static_cast<size_t>(actuator_count))
            throw std::invalid_argument("VoltageProfile: voltages/bend_signs must have N entries");
        for (int s : bend_signs)
            if (s != 1 && s != -1)
                throw std::invalid_argument("VoltageProfile: bend signs must be +1 or -1");
    }

    double total_length() const { return actuator_count * actuator_length; }

    /// The paper robot: five actuators, middle one curling down.
    static VoltageProfile paper_robot(std::array<double, 5> volts, double L) {
        VoltageProfile p;
        p.actuator_count = 5;
        p.actuator_length = L;
        p.voltages.assign(volts.begin(), volts.end());
        p.bend_signs = {+1, +1, -1, +1, +1};
        return p;
    }
};

// kappa(x) is piecewise constant: values[i] on [breakpoints[i], breakpoints[i+1]].
struct CurvatureField {
    std::vector<double> breakpoints;
    std::vector<double> values;

    double at(double x) const {
        if (values.empty()) return 0.0;
        auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
        long i = std::clamp<long>(it - breakpoints.begin() - 1, 0, (long)values.size() - 1);
        return values[i];
    }
};

/// kappa_i = bend_sign_i * gamma * |V_i| on each actuator span.
inline CurvatureField curvature_field(const VoltageProfile& profile, const StackProperties& props) {
    profile.validate();
    CurvatureField f;
    f.breakpoints.resize(profile.actuator_count + 1);
    f.values.resize(profile.actuator_count);
    for (int i = 0; i <= profile.actuator_count; ++i)
        f.breakpoints[i] = i * profile.actuator_length;
    for (int i = 0; i < profile.actuator_count; ++i)
        f.values[i] = profile.bend_signs[i] * props.gamma * std::abs(profile.voltages[i]);
    return f;
}

struct PointLoad {
    enum class Kind { mass, force };
    double position = 0.0;   // m
    double magnitude = 0.0;  // kg for mass, N (upward positive) for force
    Kind kind = Kind::mass;

    static PointLoad mass(double x, double kg) { return {x, kg, Kind::mass}; }
    static PointLoad force(double x, double newtons) { return {x, newtons, Kind::force}; }
};

/// Piecewise y(x) = a0 + a1 x + (1/2) a2 x^2 + (1/6) a3 x^3 + a4 x^4 in a
/// shared global coordinate. C1 everywhere; jumps only in y'' at curvature
/// steps and in y''' at point loads.
class PiecewiseQuartic {
public:
    using Coef = std::array<double, 5>;

    PiecewiseQuartic() = default;
    PiecewiseQuartic(double lo, double hi) : breaks_{lo, hi}, coef_{Coef{}} {
        if (!(hi > lo)) throw std::invalid_argument("PiecewiseQuartic: empty domain");
    }

    double lo() const { return breaks_.front(); }
    double hi() const { return breaks_.back(); }
    size_t segment_count() const { return coef_.size(); }
    const std::vector<double>& breakpoints() const { return breaks_; }
    const Coef& segment_coef(size_t i) const { return coef_[i]; }

    /// d^k y / dx^k at x; right limit at interior breakpoints.
    double eval(double x, int order = 0) const {
        const double eps = 1e-12 * std::max(1.0, std::abs(hi()));
        if (x < lo() - eps || x > hi() + eps)
            throw std::out_of_range("PiecewiseQuartic::eval: x outside domain");
        return eval_segment(segment_index(x), x, order);
    }

    double eval_left(double x, int order = 0) const {
        size_t i = segment_index(x);
        if (i > 0 && x <= breaks_[i] + 1e-15 * std::max(1.0, std::abs(hi())))
            --i;
        return eval_segment(i, x, order);
    }

    double eval_segment(size_t i, double x, int order) const {
        const Coef& a = coef_[i];
        switch (order) {
            case 0: return a[0] + x * (a[1] + x * (0.5 * a[2] + x * (a[3] / 6.0 + x * a[4])));
            case 1: return a[1] + x * (a[2] + x * (0.5 * a[3] + 4.0 * x * a[4]));
            case 2: return a[2] + x * (a[3] + 12.0 * x * a[4]);
            case 3: return a[3] + 24.0 * x * a[4];
            default: throw std::invalid_argument("eval: order must be 0..3");
        }
    }

    size_t segment_index(double x) const {
        auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
        long i = it - breaks_.begin() - 1;
        return (size_t)std::clamp<long>(i, 0, (long)coef_.size() - 1);
    }

    /// Splits the containing segment at x (no-op if already a breakpoint).
    void ensure_breakpoint(double x) {
        const double eps = 1e-13 * std::max(1.0, std::abs(hi()));
        if (x <= lo() + eps || x >= hi() - eps) return;
        for (double b : breaks_)
            if (std::abs(b - x) <= eps) return;
        size_t i = segment_index(x);
        breaks_.insert(breaks_.begin() + i + 1, x);
        coef_.insert(coef_.begin() + i, coef_[i]);
    }

    void add_monomials(const Coef& add, size_t first_seg = 0, size_t last_seg = SIZE_MAX) {
        last_seg = std::min(last_seg, coef_.size() - 1);
        for (size_t i = first_seg; i <= last_seg; ++i)
            for (int k = 0; k < 5; ++k) coef_[i][k] += add[k];
    }

    /// Adds c*(x - x0)^3 for x > x0 (y''' jump of 6c at x0).
    void add_one_sided_cubic(double x0, double c) {
        if (x0 >= hi()) return;
        if (x0 > lo()) ensure_breakpoint(x0);
        size_t first = (x0 <= lo()) ? 0 : segment_index(x0) + (breaks_[segment_index(x0)] < x0 ? 1 : 0);
        // expand c (x-x0)^3 into the global monomial convention
        Coef add{-c * x0 * x0 * x0, 3.0 * c * x0 * x0, -6.0 * c * x0, 6.0 * c, 0.0};
        // locate the first segment fully right of x0
        first = 0;
        while (first < coef_.size() && breaks_[first + 1] <= x0 + 1e-15 * std::max(1.0, std::abs(hi())))
            ++first;
        add_monomials(add, first);
    }

    /// Translates the whole curve: y_new(x) = y_old(x - dx).
    PiecewiseQuartic shifted(double dx) const {
        PiecewiseQuartic out = *this;
        for (double& b : out.breaks_) b += dx;
        for (size_t i = 0; i < out.coef_.size(); ++i) {
            const Coef& a = coef_[i];
            // substitute x -> x - dx and re-collect monomials
            double s = -dx;
            Coef n{};
            n[0] = a[0] + a[1] * s + 0.5 * a[2] * s * s + a[3] * s * s * s / 6.0 + a[4] * s * s * s * s;
            n[1] = a[1] + a[2] * s + 0.5 * a[3] * s * s + 4.0 * a[4] * s * s * s;
            n[2] = a[2] + a[3] * s + 12.0 * a[4] * s * s;
            n[3] = a[3] + 24.0 * a[4] * s;
            n[4] = a[4];
            out.coef_[i] = n;
        }
        return out;
    }

    /// Grafts another curve over [other.lo(), other.hi()] (domains must abut or
    /// overlap segment-exactly); used to compose solutions from sub-solves.
    void append(const PiecewiseQuartic& other) {
        const double eps = 1e-12 * std::max(1.0, std::abs(hi()));
        if (std::abs(other.lo() - hi()) > eps)
            throw std::invalid_argument("PiecewiseQuartic::append: domains must abut");
        for (size_t i = 0; i < other.coef_.size(); ++i) {
            breaks_.push_back(other.breaks_[i + 1]);
            coef_.push_back(other.coef_[i]);
        }
    }

    static PiecewiseQuartic flat(double lo, double hi) { return PiecewiseQuartic(lo, hi); }

private:
    std::vector<double> breaks_;
    std::vector<Coef> coef_;
};

/// Y(x): double cumulative integral of kappa with Y(c)=0, Y'(c)=0 at
/// c = clamp(0, domain). Quadratic per segment, C1 at interfaces.
inline PiecewiseQuartic piezo_particular(const CurvatureField& field) {
    if (field.breakpoints.size() < 2)
        throw std::invalid_argument("piezo_particular: empty field");
    PiecewiseQuartic out(field.breakpoints.front(), field.breakpoints.back());
    for (size_t i = 1; i + 1 < field.breakpoints.size(); ++i)
        out.ensure_breakpoint(field.breakpoints[i]);
    // integrate left to right with Y(lo)=0, Y'(lo)=0, fix the gauge afterwards
    double y = 0.0, yp = 0.0;
    std::vector<PiecewiseQuartic::Coef> coefs(field.values.size());
    for (size_t i = 0; i < field.values.size(); ++i) {
        double x0 = field.breakpoints[i];
        double k = field.values[i];
        // local: Y = y + yp (x-x0) + k/2 (x-x0)^2  -> global monomials
        coefs[i] = {y - yp * x0 + 0.5 * k * x0 * x0, yp - k * x0, k, 0.0, 0.0};
        double len = field.breakpoints[i + 1] - x0;
        y += yp * len + 0.5 * k * len * len;
        yp += k * len;
    }
    PiecewiseQuartic built(field.breakpoints.front(), field.breakpoints.back());
    for (size_t i = 1; i + 1 < field.breakpoints.size(); ++i)
        built.ensure_breakpoint(field.breakpoints[i]);
    for (size_t i = 0; i < coefs.size(); ++i)
        built.add_monomials(coefs[i], i, i);
    double c = std::clamp(0.0, built.lo(), built.hi());
    double y0 = built.eval(c, 0), yp0 = built.eval(c, 1);
    built.add_monomials({-y0 + yp0 * c, -yp0, 0.0, 0.0, 0.0});
    return built;
}

/// base + gravity quartic + homogeneous cubic + point-load one-sided cubics.
/// Masses jump y''' by -m g/EI, upward forces by +F/EI.
inline PiecewiseQuartic assemble_segment(const PiecewiseQuartic& base, double q, double g,
                                         double EI, std::array<double, 4> homogeneous,
                                         const std::vector<PointLoad>& point_loads) {
    if (!(EI > 0.0)) throw std::invalid_argument("assemble_segment: EI must be > 0");
    PiecewiseQuartic out = base;
    out.add_monomials({homogeneous[0], homogeneous[1], homogeneous[2], homogeneous[3],
                       -q * g / (24.0 * EI)});
    for (const PointLoad& pl : point_loads) {
        if (pl.position < out.lo() - 1e-12 || pl.position > out.hi() + 1e-12)
            throw std::invalid_argument("assemble_segment: point load outside domain");
        double jump = (pl.kind == PointLoad::Kind::mass) ? -pl.magnitude * g / EI
                                                         : pl.magnitude / EI;
        out.add_one_sided_cubic(pl.position, jump / 6.0);
    }
    return out;
}

namespace detail {

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double whole, double tol,
                               int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (!(b > a)) return 0.0;
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace detail

/// Integral of (1/2) y'^2 over [lo, hi]: the small-slope contraction of the
/// body's x-extent. Adaptive Simpson, absolute tolerance 1e-12 m, segment-wise.
inline double contraction_length(const PiecewiseQuartic& shape, double lo, double hi) {
    lo = std::max(lo, shape.lo());
    hi = std::min(hi, shape.hi());
    if (!(hi > lo)) return 0.0;
    double max_slope = 0.0;
    double total = 0.0;
    const auto& b = shape.breakpoints();
    for (size_t i = 0; i + 1 < b.size(); ++i) {
        double a = std::max(lo, b[i]), c = std::min(hi, b[i + 1]);
        if (!(c > a)) continue;
        auto f = [&shape, i](double x) {
            double yp = shape.eval_segment(i, x, 1);
            return 0.5 * yp * yp;
        };
        for (int k = 0; k <= 8; ++k)
            max_slope = std::max(max_slope, std::abs(shape.eval_segment(i, a + (c - a) * k / 8.0, 1)));
        total += detail::integrate(f, a, c, 1e-12);
    }
    if (max_slope > 0.3)
        warn("contraction_length: |dy/dx| reaches " + std::to_string(max_slope) +
             "; small-slope approximation degrades");
    return total;
}

/// Exact arc-length form: integral of (sqrt(1 + y'^2) - 1) dx.
inline double contraction_length_exact(const PiecewiseQuartic& shape, double lo, double hi) {
    lo = std::max(lo, shape.lo());
    hi = std::min(hi, shape.hi());
    if (!(hi > lo)) return 0.0;
    double total = 0.0;
    const auto& b = shape.breakpoints();
    for (size_t i = 0; i + 1 < b.size(); ++i) {
        double a = std::max(lo, b[i]), c = std::min(hi, b[i + 1]);
        if (!(c > a)) continue;
        auto f = [&shape, i](double x) {
            double t = shape.eval_segment(i, x, 1);
            t *= t;
            return t / (1.0 + std::sqrt(1.0 + t));  // sqrt(1+t)-1, cancellation-free
        };
        total += detail::integrate(f, a, c, 1e-12);
    }
    return total;
}

}  // namespace inchsim
