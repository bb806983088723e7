#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "inchsim/beam.hpp"

namespace inchsim {

struct Interval {
    double lo = 0.0, hi = 0.0;
    double length() const { return hi - lo; }
};

struct PointForce {
    double x = 0.0;
    double force = 0.0;  // N, upward
};

// Flat intervals, isolated contact points and the suspended complement, sorted.
struct ContactTopology {
    std::vector<Interval> flat;
    std::vector<double> contact_points;
    std::vector<Interval> suspended;

    void finalize(double lo, double hi) {
        std::sort(flat.begin(), flat.end(), [](auto& a, auto& b) { return a.lo < b.lo; });
        std::sort(contact_points.begin(), contact_points.end());
        suspended.clear();
        double cursor = lo;
        for (const Interval& f : flat) {
            if (f.lo > cursor + 1e-15) suspended.push_back({cursor, f.lo});
            cursor = std::max(cursor, f.hi);
        }
        if (hi > cursor + 1e-15) suspended.push_back({cursor, hi});
    }

    bool is_flat_at(double x) const {
        for (const Interval& f : flat)
            if (x >= f.lo - 1e-12 && x <= f.hi + 1e-12) return true;
        return false;
    }
};

struct ShapeSolution {
    PiecewiseQuartic shape;
    ContactTopology topology;
    VoltageProfile profile;
    StackProperties props;
    std::vector<PointLoad> payloads;
    std::map<std::string, double> suspended_lengths;  // "L_SUS", "L_SUS_LEFT", "L_SUS_MID"
    std::vector<PointForce> point_reactions;          // isolated contacts and lift-off points
    bool clamped_left = false;                        // clamp supplies force and moment at x=lo
    bool grounded = true;                             // false for the in-air cantilever
    std::string note;
};

class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Nodal result of the finite-difference complementarity oracle.
struct FdSolution {
    std::vector<double> x, y, reaction;  // reaction: N per node, zero off contact
    ContactTopology topology;
    int iterations = 0;

    double eval(double xq) const {
        if (x.empty()) return 0.0;
        if (xq <= x.front()) return y.front();
        if (xq >= x.back()) return y.back();
        const double h = x[1] - x[0];
        size_t i = std::min((size_t)((xq - x.front()) / h), x.size() - 2);
        const double t = (xq - x[i]) / h;
        return y[i] * (1.0 - t) + y[i + 1] * t;
    }
};

namespace detail {

// ---------------------------------------------------------------------------
// Span boundary-value engine.
//
// A suspended complex is one or more suspended spans joined by isolated
// contact points, bounded on each side by a free end (fixed position) or a
// lift-off edge into a flat region (unknown position). For fixed junction
// positions the span cubics solve a square linear system; lift-off smoothness
// (y''=0) and contact moment continuity are the Newton residuals that pin the
// junction positions.
// ---------------------------------------------------------------------------

struct Boundary {
    enum class Kind { free_end, flat_edge, pinned_end };
    Kind kind = Kind::free_end;
    double pos = 0.0;       // fixed for free_end/pinned_end, ignored for flat_edge
    double end_mass = 0.0;  // point mass exactly at the end (kg)
};

struct EngineResult {
    bool ok = false;
    std::string err;
    std::vector<double> junctions;  // span boundaries, ascending
    PiecewiseQuartic shape;         // over the particular window; cubics added inside junctions
    std::vector<PointForce> contact_reactions;
    double residual_norm = 0.0;
};

class SpanBvp {
public:
    SpanBvp(const PiecewiseQuartic& particular, const CurvatureField& kappa, double EI,
            Boundary left, Boundary right, int n_contacts, double char_len, double kappa_scale)
        : part_(particular), kap_(kappa), EI_(EI), left_(left), right_(right), nc_(n_contacts),
          Lc_(char_len), kscale_(std::max(kappa_scale, 1e-30)) {}

    int unknown_positions() const {
        return nc_ + (left_.kind == Boundary::Kind::flat_edge) +
               (right_.kind == Boundary::Kind::flat_edge);
    }

    // positions p: [x_left (if flat edge), contacts..., x_right (if flat edge)]
    EngineResult solve(std::vector<double> p, int max_iter = 100) const {
        const int np = unknown_positions();
        if ((int)p.size() != np)
            throw std::invalid_argument("SpanBvp: wrong number of initial positions");
        Eigen::VectorXd res(np), r2(np);
        const double lo_lim = part_.lo() + 1e-7 * Lc_;
        const double hi_lim = part_.hi() - 1e-7 * Lc_;
        if (!ordered(p, lo_lim, hi_lim)) return fail("bad initial positions");
        for (int it = 0; it < max_iter; ++it) {
            if (!evaluate(p, res)) return fail("singular span system");
            double rn = np ? res.lpNorm<Eigen::Infinity>() : 0.0;
            if (np == 0 || rn < 1e-10 * kscale_) return build(p);
            Eigen::MatrixXd J(np, np);
            const double dx = 1e-7 * Lc_;
            bool jac_ok = true;
            for (int j = 0; j < np && jac_ok; ++j) {
                auto pp = p;
                pp[j] = p[j] + dx;
                jac_ok = evaluate(pp, r2);
                Eigen::VectorXd rp = r2;
                pp[j] = p[j] - dx;
                jac_ok = jac_ok && evaluate(pp, r2);
                J.col(j) = (rp - r2) / (2.0 * dx);
            }
            if (!jac_ok) return fail("singular span system (jacobian)");
            Eigen::VectorXd step = J.colPivHouseholderQr().solve(-res);
            double smax = step.lpNorm<Eigen::Infinity>();
            const double lim = 0.2 * Lc_;
            if (smax > lim) step *= lim / smax;
            double scale = 1.0;
            bool moved = false;
            for (int att = 0; att < 40 && !moved; ++att) {
                auto pn = p;
                for (int j = 0; j < np; ++j) pn[j] += scale * step[j];
                if (ordered(pn, lo_lim, hi_lim) && evaluate(pn, r2) &&
                    (r2.lpNorm<Eigen::Infinity>() < rn || att >= 25)) {
                    p = pn;
                    moved = true;
                }
                scale *= 0.5;
            }
            if (!moved) return fail("line search stalled at residual " + std::to_string(rn));
        }
        return fail("no convergence in " + std::to_string(max_iter) + " iterations");
    }

private:
    EngineResult fail(const std::string& msg) const {
        EngineResult r;
        r.err = msg;
        return r;
    }

    bool ordered(const std::vector<double>& p, double lo, double hi) const {
        double prev = (left_.kind != Boundary::Kind::flat_edge) ? left_.pos : lo - 1.0;
        for (double x : p) {
            if (x < lo || x > hi || x <= prev + 1e-6 * Lc_) return false;
            prev = x;
        }
        if (right_.kind != Boundary::Kind::flat_edge && !p.empty() &&
            prev >= right_.pos - 1e-6 * Lc_)
            return false;
        return true;
    }

public:
    // residuals at fixed positions (for the bisection fallback)
    bool residuals(const std::vector<double>& p, Eigen::VectorXd& res) const {
        return evaluate(p, res);
    }

private:

    std::vector<double> junctions_of(const std::vector<double>& p) const {
        std::vector<double> xs;
        size_t k = 0;
        xs.push_back(left_.kind == Boundary::Kind::flat_edge ? p[k++] : left_.pos);
        for (int c = 0; c < nc_; ++c) xs.push_back(p[k++]);
        xs.push_back(right_.kind == Boundary::Kind::flat_edge ? p[k++] : right_.pos);
        return xs;
    }

    bool evaluate(const std::vector<double>& p, Eigen::VectorXd& res,
                  std::vector<std::array<double, 4>>* coefs_out = nullptr) const {
        auto xs = junctions_of(p);
        const int S = nc_ + 1;
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4 * S, 4 * S);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(4 * S);
        int row = 0;
        // columns are scaled: coefficient k multiplies (x/Lc)^k-type monomials
        auto put = [&](int span, double x, int order, double rhs) {
            const double xl = x / Lc_;
            std::array<double, 4> m{};
            switch (order) {
                case 0: m = {1.0, xl, 0.5 * xl * xl, xl * xl * xl / 6.0}; break;
                case 1: m = {0.0, 1.0, xl, 0.5 * xl * xl}; break;
                case 2: m = {0.0, 0.0, 1.0, xl}; break;
                case 3: m = {0.0, 0.0, 0.0, 1.0}; break;
            }
            for (int k = 0; k < 4; ++k) A(row, 4 * span + k) = m[k];
            b(row) = rhs * std::pow(Lc_, order);
            ++row;
        };
        if (left_.kind == Boundary::Kind::free_end) {
            const double x0 = left_.pos;
            put(0, x0, 2, kap_.at(x0) - part_.eval(x0, 2));
            put(0, x0, 3, -left_.end_mass * kGravity / EI_ - part_.eval(x0, 3));
        } else if (left_.kind == Boundary::Kind::pinned_end) {
            const double x0 = left_.pos;
            put(0, x0, 0, -part_.eval(x0, 0));
            put(0, x0, 2, kap_.at(x0) - part_.eval(x0, 2));  // moment-free support
        } else {
            put(0, xs.front(), 0, -part_.eval(xs.front(), 0));
            put(0, xs.front(), 1, -part_.eval(xs.front(), 1));
        }
        for (int c = 0; c < nc_; ++c) {
            const double xc = xs[c + 1];
            put(c, xc, 0, -part_.eval(xc, 0));
            put(c, xc, 1, -part_.eval(xc, 1));
            put(c + 1, xc, 0, -part_.eval(xc, 0));
            put(c + 1, xc, 1, -part_.eval(xc, 1));
        }
        if (right_.kind == Boundary::Kind::free_end) {
            const double xe = right_.pos;
            const double kap_end = kap_.at(xe - 1e-12 * Lc_);
            put(S - 1, xe, 2, kap_end - part_.eval_left(xe, 2));
            put(S - 1, xe, 3, right_.end_mass * kGravity / EI_ - part_.eval_left(xe, 3));
        } else if (right_.kind == Boundary::Kind::pinned_end) {
            const double xe = right_.pos;
            put(S - 1, xe, 0, -part_.eval_left(xe, 0));
            put(S - 1, xe, 2, kap_.at(xe - 1e-12 * Lc_) - part_.eval_left(xe, 2));
        } else {
            put(S - 1, xs.back(), 0, -part_.eval_left(xs.back(), 0));
            put(S - 1, xs.back(), 1, -part_.eval_left(xs.back(), 1));
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
        if (qr.rank() < 4 * S) return false;
        Eigen::VectorXd u = qr.solve(b);

        auto span_eval = [&](int span, double x, int order) {
            const double xl = x / Lc_;
            std::array<double, 4> m{};
            switch (order) {
                case 1: m = {0.0, 1.0, xl, 0.5 * xl * xl}; break;
                case 2: m = {0.0, 0.0, 1.0, xl}; break;
                default: m = {1.0, xl, 0.5 * xl * xl, xl * xl * xl / 6.0}; break;
            }
            double v = 0.0;
            for (int k = 0; k < 4; ++k) v += m[k] * u[4 * span + k];
            return v / std::pow(Lc_, order);
        };
        res.resize(unknown_positions());
        int ri = 0;
        if (left_.kind == Boundary::Kind::flat_edge)
            res[ri++] = span_eval(0, xs.front(), 2) + part_.eval(xs.front(), 2);
        for (int c = 0; c < nc_; ++c) {
            const double xc = xs[c + 1];
            res[ri++] = (span_eval(c, xc, 2) + part_.eval_left(xc, 2)) -
                        (span_eval(c + 1, xc, 2) + part_.eval(xc, 2));
        }
        if (right_.kind == Boundary::Kind::flat_edge)
            res[ri++] = span_eval(S - 1, xs.back(), 2) + part_.eval_left(xs.back(), 2);
        if (coefs_out) {
            coefs_out->resize(S);
            for (int s = 0; s < S; ++s)
                (*coefs_out)[s] = {u[4 * s + 0], u[4 * s + 1] / Lc_,
                                   u[4 * s + 2] / (Lc_ * Lc_), u[4 * s + 3] / (Lc_ * Lc_ * Lc_)};
        }
        return true;
    }

    EngineResult build(const std::vector<double>& p) const {
        Eigen::VectorXd res;
        std::vector<std::array<double, 4>> coefs;
        if (!evaluate(p, res, &coefs)) return fail("singular at solution");
        EngineResult out;
        out.ok = true;
        out.junctions = junctions_of(p);
        out.residual_norm = res.size() ? res.lpNorm<Eigen::Infinity>() : 0.0;
        PiecewiseQuartic shape = part_;
        for (double j : out.junctions) shape.ensure_breakpoint(j);
        const auto& br = shape.breakpoints();
        for (size_t s = 0; s < coefs.size(); ++s) {
            const double a = out.junctions[s], c = out.junctions[s + 1];
            const auto& q = coefs[s];
            for (size_t i = 0; i + 1 < br.size(); ++i)
                if (br[i] >= a - 1e-14 && br[i + 1] <= c + 1e-14)
                    shape.add_monomials({q[0], q[1], q[2], q[3], 0.0}, i, i);
        }
        out.shape = shape;
        for (int c = 0; c < nc_; ++c) {
            const double xc = out.junctions[c + 1];
            const double jump = out.shape.eval(xc, 3) - out.shape.eval_left(xc, 3);
            out.contact_reactions.push_back({xc, EI_ * jump});
        }
        return out;
    }

    const PiecewiseQuartic& part_;
    const CurvatureField& kap_;
    double EI_;
    Boundary left_, right_;
    int nc_;
    double Lc_;
    double kscale_;
};

// Particular field on [lo, hi]: Y from the curvature field restricted to that
// window (gauge at clamp(0, lo, hi)), plus the gravity quartic, plus one-sided
// cubics for the supplied payloads.
struct ParticularField {
    PiecewiseQuartic full;
    CurvatureField kappa;
};

inline ParticularField make_particular(const CurvatureField& field, double lo, double hi,
                                       double qg, double EI,
                                       const std::vector<PointLoad>& payloads_inside) {
    CurvatureField cut;
    cut.breakpoints.push_back(lo);
    for (size_t i = 0; i + 1 < field.breakpoints.size(); ++i) {
        const double a = std::max(lo, field.breakpoints[i]);
        const double b = std::min(hi, field.breakpoints[i + 1]);
        if (b > a + 1e-15) {
            if (cut.breakpoints.back() < a - 1e-15) {
                cut.values.push_back(0.0);
                cut.breakpoints.push_back(a);
            }
            cut.values.push_back(field.values[i]);
            cut.breakpoints.push_back(b);
        }
    }
    if (cut.values.empty()) {
        cut.values.push_back(0.0);
        cut.breakpoints = {lo, hi};
    } else if (cut.breakpoints.back() < hi - 1e-15) {
        cut.values.push_back(0.0);
        cut.breakpoints.push_back(hi);
    }
    ParticularField out;
    out.kappa = cut;
    PiecewiseQuartic Y = piezo_particular(cut);
    out.full = assemble_segment(Y, qg / kGravity, kGravity, EI, {0, 0, 0, 0}, payloads_inside);
    return out;
}

struct Piece {
    PiecewiseQuartic shape;  // exactly over [lo, hi]
    std::vector<double> contacts;
    std::vector<PointForce> reactions;
    double lo = 0.0, hi = 0.0;
};

// Carves the engine's window shape down to [lo, hi].
inline PiecewiseQuartic carve(const PiecewiseQuartic& shape, double lo, double hi) {
    PiecewiseQuartic out(lo, hi);
    bool started = false;
    const auto& br = shape.breakpoints();
    for (size_t i = 0; i + 1 < br.size(); ++i) {
        const double a = std::max(br[i], lo), b = std::min(br[i + 1], hi);
        if (b <= a + 1e-15) continue;
        PiecewiseQuartic seg(a, b);
        seg.add_monomials(shape.segment_coef(i));
        if (!started) {
            out = seg;
            started = true;
        } else {
            out.append(seg);
        }
    }
    return out;
}

struct ComplexSpec {
    double win_lo = 0.0, win_hi = 0.0;
    Boundary left, right;
    int n_contacts = 0;
    std::vector<double> init;
};

// Solves one suspended complex; payload membership (suspended vs transmitted
// through flat ground) is iterated to a fixed point.
inline std::optional<Piece> solve_complex(const StackProperties& props,
                                          const CurvatureField& field,
                                          const std::vector<PointLoad>& payloads,
                                          const ComplexSpec& spec, std::string* err) {
    const double EI = props.flexural_rigidity;
    const double qg = props.qg();
    double kscale = qg * std::pow(spec.win_hi - spec.win_lo, 2) / (2.0 * EI);
    for (double v : field.values) kscale = std::max(kscale, std::abs(v));

    std::vector<double> p = spec.init;
    std::vector<char> included(payloads.size(), -1);
    EngineResult res;
    for (int pass = 0; pass < 6; ++pass) {
        const double ext_lo = (spec.left.kind == Boundary::Kind::free_end)
                                  ? spec.left.pos
                                  : (p.empty() ? spec.win_lo : p.front());
        const double ext_hi = (spec.right.kind == Boundary::Kind::free_end)
                                  ? spec.right.pos
                                  : (p.empty() ? spec.win_hi : p.back());
        std::vector<PointLoad> inside;
        std::vector<char> inc(payloads.size(), 0);
        Boundary left = spec.left, right = spec.right;
        left.end_mass = right.end_mass = 0.0;
        for (size_t i = 0; i < payloads.size(); ++i) {
            const PointLoad& pl = payloads[i];
            if (left.kind == Boundary::Kind::free_end &&
                std::abs(pl.position - left.pos) < 1e-12) {
                if (pl.kind == PointLoad::Kind::mass) left.end_mass += pl.magnitude;
                continue;
            }
            if (right.kind == Boundary::Kind::free_end &&
                std::abs(pl.position - right.pos) < 1e-12) {
                if (pl.kind == PointLoad::Kind::mass) right.end_mass += pl.magnitude;
                continue;
            }
            if (pl.position > ext_lo + 1e-12 && pl.position < ext_hi - 1e-12) {
                inside.push_back(pl);
                inc[i] = 1;
            }
        }
        ParticularField part = make_particular(field, spec.win_lo, spec.win_hi, qg, EI, inside);
        SpanBvp bvp(part.full, part.kappa, EI, left, right, spec.n_contacts,
                    props.actuator_length, kscale);
        res = bvp.solve(p);
        if (!res.ok) {
            if (err) *err = res.err;
            return std::nullopt;
        }
        p.clear();
        size_t k = 0;
        if (spec.left.kind == Boundary::Kind::flat_edge) p.push_back(res.junctions[0]);
        k = 1;
        for (int c = 0; c < spec.n_contacts; ++c) p.push_back(res.junctions[k++]);
        if (spec.right.kind == Boundary::Kind::flat_edge) p.push_back(res.junctions.back());
        if (inc == included) break;
        included = inc;
    }
    Piece piece;
    piece.lo = res.junctions.front();
    piece.hi = res.junctions.back();
    piece.contacts.assign(res.junctions.begin() + 1, res.junctions.end() - 1);
    piece.reactions = res.contact_reactions;
    piece.shape = carve(res.shape, piece.lo, piece.hi);
    // a pinned end is an isolated contact at the domain boundary
    if (spec.left.kind == Boundary::Kind::pinned_end) {
        double m_end = 0.0;
        for (const PointLoad& pl : payloads)
            if (pl.kind == PointLoad::Kind::mass && std::abs(pl.position - piece.lo) < 1e-12)
                m_end += pl.magnitude;
        piece.contacts.insert(piece.contacts.begin(), piece.lo);
        piece.reactions.insert(piece.reactions.begin(),
                               {piece.lo, EI * piece.shape.eval(piece.lo, 3) + m_end * kGravity});
    }
    if (spec.right.kind == Boundary::Kind::pinned_end) {
        double m_end = 0.0;
        for (const PointLoad& pl : payloads)
            if (pl.kind == PointLoad::Kind::mass && std::abs(pl.position - piece.hi) < 1e-12)
                m_end += pl.magnitude;
        piece.contacts.push_back(piece.hi);
        piece.reactions.push_back(
            {piece.hi, m_end * kGravity - EI * piece.shape.eval_left(piece.hi, 3)});
    }
    return piece;
}

// Composes flat regions and suspended pieces over [0, X] into a solution.
inline ShapeSolution compose(const StackProperties& props, const VoltageProfile& profile,
                             const std::vector<PointLoad>& payloads, double X,
                             std::vector<Piece> pieces, const std::string& note) {
    std::sort(pieces.begin(), pieces.end(), [](auto& a, auto& b) { return a.lo < b.lo; });
    ShapeSolution sol;
    sol.props = props;
    sol.profile = profile;
    sol.payloads = payloads;
    sol.note = note;
    const double EI = props.flexural_rigidity;
    bool have = false;
    PiecewiseQuartic out;
    double cursor = 0.0;
    auto push = [&](PiecewiseQuartic seg) {
        if (!have) {
            out = std::move(seg);
            have = true;
        } else {
            out.append(seg);
        }
    };
    for (const Piece& p : pieces) {
        if (p.lo > cursor + 1e-15) {
            push(PiecewiseQuartic::flat(cursor, p.lo));
            sol.topology.flat.push_back({cursor, p.lo});
        }
        push(p.shape);
        for (double c : p.contacts) sol.topology.contact_points.push_back(c);
        for (const PointForce& r : p.reactions) sol.point_reactions.push_back(r);
        cursor = p.hi;
    }
    if (cursor < X - 1e-15 || !have) {
        push(PiecewiseQuartic::flat(cursor, X));
        sol.topology.flat.push_back({cursor, X});
    }
    sol.shape = out;
    sol.topology.finalize(0.0, X);
    for (const Interval& f : sol.topology.flat) {
        if (f.lo > 1e-15)
            sol.point_reactions.push_back({f.lo, -EI * sol.shape.eval_left(f.lo, 3)});
        if (f.hi < X - 1e-15)
            sol.point_reactions.push_back({f.hi, EI * sol.shape.eval(f.hi, 3)});
    }
    std::sort(sol.point_reactions.begin(), sol.point_reactions.end(),
              [](auto& a, auto& b) { return a.x < b.x; });
    return sol;
}

inline bool valid_solution(const ShapeSolution& sol, std::string* why = nullptr) {
    const double eps_y = 1e-9;
    const int n = 4000;
    const double lo = sol.shape.lo(), hi = sol.shape.hi();
    for (int i = 0; i <= n; ++i) {
        const double x = lo + (hi - lo) * i / n;
        const double y = sol.shape.eval(x);
        if (y < -eps_y) {
            if (why)
                *why = "penetration y=" + std::to_string(y) + " at x=" + std::to_string(x);
            return false;
        }
    }
    for (const PointForce& r : sol.point_reactions)
        if (r.force < -1e-9) {
            if (why)
                *why = "negative reaction " + std::to_string(r.force) +
                       " N at x=" + std::to_string(r.x);
            return false;
        }
    return true;
}

// Dome candidate per the symmetric three-actuator closed form (lift-off from
// the moment-free condition, clipped to the span; zero below one actuator
// length). y_center >= 0 is the construction's validity condition.
struct DomeCandidate {
    double s = 0.0;
    double y_center = 0.0;
    bool valid = false;
};

inline DomeCandidate dome_candidate(double EI, double qg, double drive /* |k3|+|k4| */,
                                    double L) {
    DomeCandidate d;
    if (drive <= 0.0) return d;
    const double A = std::cbrt(12.0 * drive * L * EI / qg);
    if (A < L) return d;
    d.s = std::min(A, 3.0 * L);
    d.y_center = -qg * std::pow(d.s, 4) / (384.0 * EI) + drive * L * (d.s - L) / 8.0;
    d.valid = d.y_center >= 0.0;
    return d;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Closed-form solvers
// ---------------------------------------------------------------------------

/// Single actuator on the ground, left end clamped, curl-up drive.
/// L_SUS = min(L, sqrt(2 EI gamma V / (q g))); the flat part keeps y = 0 and
/// the suspended shape hangs from a moment-free lift-off point.
inline ShapeSolution solve_clamped_single(const StackProperties& props, double voltage) {
    const double L = props.actuator_length;
    const double EI = props.flexural_rigidity;
    const double qg = props.qg();
    const double kappa = drive_curvature(props, voltage);

    ShapeSolution sol;
    sol.props = props;
    sol.profile.actuator_count = 1;
    sol.profile.actuator_length = L;
    sol.profile.voltages = {voltage};
    sol.profile.bend_signs = {props.bend_direction};
    sol.clamped_left = true;

    if (kappa <= 0.0) {
        sol.shape = PiecewiseQuartic::flat(0.0, L);
        sol.topology.flat.push_back({0.0, L});
        sol.topology.finalize(0.0, L);
        sol.suspended_lengths["L_SUS"] = 0.0;
        if (kappa < 0.0) sol.note = "drive presses the actuator into the ground; fully flat";
        return sol;
    }
    double s = std::sqrt(2.0 * EI * kappa / qg);
    const bool clipped = s >= L;
    if (clipped) s = L;
    sol.suspended_lengths["L_SUS"] = s;
    const double x0 = L - s;
    PiecewiseQuartic susp(0.0, s);
    if (clipped) {
        susp.add_monomials({0.0, 0.0, kappa - qg * L * L / (2.0 * EI), qg * L / EI,
                            -qg / (24.0 * EI)});
    } else {
        susp.add_monomials({0.0, 0.0, 0.0, qg * s / EI, -qg / (24.0 * EI)});
    }
    if (x0 > 0.0) {
        PiecewiseQuartic out = PiecewiseQuartic::flat(0.0, x0);
        out.append(susp.shifted(x0));
        sol.shape = out;
        sol.topology.flat.push_back({0.0, x0});
        sol.point_reactions.push_back({x0, qg * s});
    } else {
        sol.shape = susp;
        sol.topology.contact_points.push_back(0.0);
        sol.point_reactions.push_back({0.0, qg * L});  // the clamp carries the full weight
    }
    sol.topology.finalize(0.0, L);
    return sol;
}

/// Clamped-free actuator in the air: y = 1/2 kappa x^2 - qg/(24EI) x^2 (x^2 - 4Lx + 6L^2).
inline ShapeSolution solve_cantilever(const StackProperties& props, double voltage) {
    const double L = props.actuator_length;
    const double EI = props.flexural_rigidity;
    const double qg = props.qg();
    const double kappa = drive_curvature(props, voltage);

    ShapeSolution sol;
    sol.props = props;
    sol.profile.actuator_count = 1;
    sol.profile.actuator_length = L;
    sol.profile.voltages = {voltage};
    sol.profile.bend_signs = {props.bend_direction};
    sol.clamped_left = true;
    sol.grounded = false;
    PiecewiseQuartic shape(0.0, L);
    shape.add_monomials({0.0, 0.0, kappa - qg * L * L / (2.0 * EI), qg * L / EI,
                         -qg / (24.0 * EI)});
    sol.shape = shape;
    sol.topology.finalize(0.0, L);
    sol.suspended_lengths["L_SUS"] = L;
    sol.note = "cantilever in air";
    return sol;
}

// ---------------------------------------------------------------------------
// General contact dispatcher; used by the three-actuator and robot solvers.
// ---------------------------------------------------------------------------

namespace detail {

// Solve the full unilateral contact problem on [0, X] for a free-free strip
// with the given curvature field and payloads. Topology attempts go from the
// most separated (independent end tips + middle hump) to fully merged
// (two-point contact), accepting the first self-consistent result.
inline ShapeSolution solve_strip(const StackProperties& props, const VoltageProfile& profile,
                                 const std::vector<PointLoad>& payloads) {
    const double L = props.actuator_length;
    const double X = profile.total_length();
    const double EI = props.flexural_rigidity;
    const double qg = props.qg();
    const CurvatureField field = curvature_field(profile, props);
    const int N = profile.actuator_count;
    const double k_end_L = field.values.front();
    const double k_end_R = field.values.back();
    const double k_tol = 1e-12;

    // middle drive: |kappa| of the inner actuators adjacent to the center
    double mid_drive = 0.0;
    if (N >= 3) {
        const double k_mid = field.values[N / 2];
        const double k_flank = field.values[N / 2 - 1];
        if (k_mid < 0.0) mid_drive = std::abs(k_mid) + std::max(0.0, k_flank);
    }

    std::string last_err;
    auto try_separated = [&]() -> std::optional<ShapeSolution> {
        std::vector<Piece> pieces;
        double left_extent = 0.0, right_extent = X, mid_lo = X, mid_hi = 0.0;
        // left tip
        if (k_end_L > k_tol) {
            ComplexSpec cs;
            cs.win_lo = 0.0;
            cs.win_hi = std::min(X, 0.499 * X);
            cs.left = {Boundary::Kind::free_end, 0.0, 0.0};
            cs.right = {Boundary::Kind::flat_edge, 0.0, 0.0};
            double s0 = std::min(std::sqrt(2.0 * EI * k_end_L / qg), 0.45 * X);
            cs.init = {std::max(1e-4 * L, s0)};
            auto piece = solve_complex(props, field, payloads, cs, &last_err);
            if (!piece) return std::nullopt;
            left_extent = piece->hi;
            pieces.push_back(std::move(*piece));
        }
        // right tip
        if (k_end_R > k_tol) {
            ComplexSpec cs;
            cs.win_lo = std::max(0.0, 0.501 * X);
            cs.win_hi = X;
            cs.left = {Boundary::Kind::flat_edge, 0.0, 0.0};
            cs.right = {Boundary::Kind::free_end, X, 0.0};
            double s0 = std::min(std::sqrt(2.0 * EI * k_end_R / qg), 0.45 * X);
            cs.init = {X - std::max(1e-4 * L, s0)};
            auto piece = solve_complex(props, field, payloads, cs, &last_err);
            if (!piece) return std::nullopt;
            right_extent = piece->lo;
            pieces.push_back(std::move(*piece));
        }
        // middle hump (dome)
        if (mid_drive > k_tol) {
            DomeCandidate dome = dome_candidate(EI, qg, mid_drive, L);
            if (dome.s > 0.0 && dome.valid) {
                ComplexSpec cs;
                cs.win_lo = 1e-3 * L;
                cs.win_hi = X - 1e-3 * L;
                cs.left = {Boundary::Kind::flat_edge, 0.0, 0.0};
                cs.right = {Boundary::Kind::flat_edge, 0.0, 0.0};
                cs.init = {0.5 * X - 0.5 * dome.s, 0.5 * X + 0.5 * dome.s};
                auto piece = solve_complex(props, field, payloads, cs, &last_err);
                if (!piece) return std::nullopt;
                mid_lo = piece->lo;
                mid_hi = piece->hi;
                pieces.push_back(std::move(*piece));
            } else if (dome.s > 0.0 && !dome.valid) {
                // the center dips to the ground: two humps joined by a center
                // point contact first, then fully split humps with a flat gap
                ComplexSpec cs;
                cs.win_lo = 1e-3 * L;
                cs.win_hi = X - 1e-3 * L;
                cs.left = {Boundary::Kind::flat_edge, 0.0, 0.0};
                cs.right = {Boundary::Kind::flat_edge, 0.0, 0.0};
                cs.n_contacts = 1;
                cs.init = {0.5 * X - 0.45 * dome.s, 0.5 * X, 0.5 * X + 0.45 * dome.s};
                auto piece = solve_complex(props, field, payloads, cs, &last_err);
                if (piece) {
                    mid_lo = piece->lo;
                    mid_hi = piece->hi;
                    pieces.push_back(std::move(*piece));
                } else {
                    for (int side = 0; side < 2; ++side) {
                        ComplexSpec hump;
                        if (side == 0) {
                            hump.win_lo = 1e-3 * L;
                            hump.win_hi = 0.5 * X - 1e-4 * L;
                            hump.init = {0.5 * X - 0.6 * dome.s, 0.5 * X - 0.05 * dome.s};
                        } else {
                            hump.win_lo = 0.5 * X + 1e-4 * L;
                            hump.win_hi = X - 1e-3 * L;
                            hump.init = {0.5 * X + 0.05 * dome.s, 0.5 * X + 0.6 * dome.s};
                        }
                        hump.left = {Boundary::Kind::flat_edge, 0.0, 0.0};
                        hump.right = {Boundary::Kind::flat_edge, 0.0, 0.0};
                        auto h = solve_complex(props, field, payloads, hump, &last_err);
                        if (!h) return std::nullopt;
                        if (side == 0) mid_lo = h->lo;
                        else mid_hi = h->hi;
                        pieces.push_back(std::move(*h));
                    }
                }
            }
        }
        // separation requires flat gaps between the pieces
        for (size_t i = 0; i < pieces.size(); ++i)
            for (size_t j = i + 1; j < pieces.size(); ++j) {
                const Piece &a = pieces[i].lo < pieces[j].lo ? pieces[i] : pieces[j];
                const Piece &b = pieces[i].lo < pieces[j].lo ? pieces[j] : pieces[i];
                if (b.lo - a.hi < 1e-6 * L) {
                    last_err = "pieces overlap (merged topology)";
                    return std::nullopt;
                }
            }
        ShapeSolution sol = compose(props, profile, payloads, X, std::move(pieces),
                                    "separated contact topology");
        if (mid_drive > k_tol && mid_hi > mid_lo)
            sol.suspended_lengths["L_SUS_MID"] = mid_hi - mid_lo;
        if (k_end_L > k_tol) sol.suspended_lengths["L_SUS_LEFT"] = left_extent;
        if (k_end_R > k_tol) sol.suspended_lengths["L_SUS_RIGHT"] = X - right_extent;
        std::string why;
        if (!valid_solution(sol, &why)) {
            last_err = "separated topology rejected: " + why;
            return std::nullopt;
        }
        return sol;
    };

    enum class Anchor { flat, contact, pinned };
    auto try_merged = [&](bool merge_left, bool merge_right, Anchor aL, Anchor aR,
                          const std::vector<double>* init_override =
                              nullptr) -> std::optional<ShapeSolution> {
        std::vector<Piece> pieces;
        ComplexSpec cs;
        cs.win_lo = 1e-3 * L;
        cs.win_hi = X - 1e-3 * L;
        cs.n_contacts = 0;
        if (merge_left && aL == Anchor::contact) {
            cs.left = {Boundary::Kind::free_end, 0.0, 0.0};
            cs.win_lo = 0.0;
            cs.n_contacts += 1;
        } else if (merge_left && aL == Anchor::pinned) {
            cs.left = {Boundary::Kind::pinned_end, 0.0, 0.0};
            cs.win_lo = 0.0;
        } else {
            cs.left = {Boundary::Kind::flat_edge, 0.0, 0.0};
        }
        if (merge_right && aR == Anchor::contact) {
            cs.right = {Boundary::Kind::free_end, X, 0.0};
            cs.win_hi = X;
            cs.n_contacts += 1;
        } else if (merge_right && aR == Anchor::pinned) {
            cs.right = {Boundary::Kind::pinned_end, X, 0.0};
            cs.win_hi = X;
        } else {
            cs.right = {Boundary::Kind::flat_edge, 0.0, 0.0};
        }
        // positions in order: [x_left_edge?], contacts..., [x_right_edge?];
        // contacts initialize at the actuator interfaces
        if (cs.left.kind == Boundary::Kind::flat_edge) cs.init.push_back(0.8 * L);
        if (cs.left.kind == Boundary::Kind::free_end) cs.init.push_back(L);
        if (cs.right.kind == Boundary::Kind::free_end) cs.init.push_back(X - L);
        if (cs.right.kind == Boundary::Kind::flat_edge) cs.init.push_back(X - 0.8 * L);
        if (init_override) cs.init = *init_override;
        auto piece = solve_complex(props, field, payloads, cs, &last_err);
        if (!piece) return std::nullopt;

        const double tip_init_L =
            std::min(std::sqrt(2.0 * std::max(k_end_L, 0.0) * EI / qg), 0.45 * X);
        const double tip_init_R =
            std::min(std::sqrt(2.0 * std::max(k_end_R, 0.0) * EI / qg), 0.45 * X);
        // the central suspended span runs between the innermost anchors
        double mid_lo = piece->lo, mid_hi = piece->hi;
        if (cs.left.kind != Boundary::Kind::flat_edge && !piece->contacts.empty())
            mid_lo = piece->contacts.front();
        if (cs.right.kind != Boundary::Kind::flat_edge && !piece->contacts.empty())
            mid_hi = piece->contacts.back();
        pieces.push_back(std::move(*piece));
        if (!merge_left && k_end_L > k_tol) {
            ComplexSpec tip;
            tip.win_lo = 0.0;
            tip.win_hi = std::max(1e-2 * L, mid_lo - 1e-6 * L);
            tip.left = {Boundary::Kind::free_end, 0.0, 0.0};
            tip.right = {Boundary::Kind::flat_edge, 0.0, 0.0};
            tip.init = {std::min(std::max(1e-4 * L, tip_init_L), tip.win_hi * 0.95)};
            auto t = solve_complex(props, field, payloads, tip, &last_err);
            if (!t) return std::nullopt;
            pieces.push_back(std::move(*t));
        }
        if (!merge_right && k_end_R > k_tol) {
            ComplexSpec tip;
            tip.win_lo = std::min(X - 1e-2 * L, mid_hi + 1e-6 * L);
            tip.win_hi = X;
            tip.left = {Boundary::Kind::flat_edge, 0.0, 0.0};
            tip.right = {Boundary::Kind::free_end, X, 0.0};
            tip.init = {std::max(X - std::max(1e-4 * L, tip_init_R), tip.win_lo * 1.0 + 1e-3 * L)};
            auto t = solve_complex(props, field, payloads, tip, &last_err);
            if (!t) return std::nullopt;
            pieces.push_back(std::move(*t));
        }
        std::string note = "merged contact topology";
        ShapeSolution sol = compose(props, profile, payloads, X, std::move(pieces), note);
        sol.suspended_lengths["L_SUS_MID"] = mid_hi - mid_lo;
        std::string why;
        if (!valid_solution(sol, &why)) {
            last_err = "merged topology rejected: " + why;
            return std::nullopt;
        }
        return sol;
    };

    const Anchor primary_L = (k_end_L > k_tol) ? Anchor::contact : Anchor::flat;
    const Anchor primary_R = (k_end_R > k_tol) ? Anchor::contact : Anchor::flat;
    if (auto sol = try_separated()) return *sol;
    if (auto sol = try_merged(true, false, primary_L, primary_R)) return *sol;
    if (auto sol = try_merged(false, true, primary_L, primary_R)) return *sol;
    if (auto sol = try_merged(true, true, primary_L, primary_R)) return *sol;
    if (auto sol = try_merged(true, true, Anchor::pinned, primary_R)) return *sol;
    if (auto sol = try_merged(true, true, primary_L, Anchor::pinned)) return *sol;
    if (auto sol = try_merged(true, true, Anchor::pinned, Anchor::pinned)) return *sol;

    // Symmetric fallback: bracketed bisection on the left contact position,
    // the right one mirrored, then hand the refined start to the Newton path.
    bool symmetric = k_end_L > k_tol && k_end_R > k_tol &&
                     std::abs(k_end_L - k_end_R) < 1e-9 * std::max(k_end_L, k_end_R);
    for (size_t i = 0; symmetric && i < field.values.size(); ++i)
        symmetric = std::abs(field.values[i] - field.values[field.values.size() - 1 - i]) <
                    1e-9 * (std::abs(field.values[i]) + 1e-30) + 1e-15;
    for (const PointLoad& pl : payloads) {
        bool mirrored = false;
        for (const PointLoad& pm : payloads)
            if (std::abs((X - pm.position) - pl.position) < 1e-9 &&
                std::abs(pm.magnitude - pl.magnitude) < 1e-12 && pm.kind == pl.kind)
                mirrored = true;
        symmetric = symmetric && mirrored;
    }
    if (symmetric) {
        std::vector<PointLoad> inside;
        for (const PointLoad& pl : payloads)
            if (pl.position > 1e-12 && pl.position < X - 1e-12) inside.push_back(pl);
        double kscale = qg * X * X / (2.0 * EI);
        for (double v : field.values) kscale = std::max(kscale, std::abs(v));
        ParticularField part = make_particular(field, 0.0, X, qg, EI, inside);
        double m_end = 0.0;
        for (const PointLoad& pl : payloads)
            if (pl.kind == PointLoad::Kind::mass && pl.position < 1e-12) m_end += pl.magnitude;
        SpanBvp probe(part.full, part.kappa, EI,
                      {Boundary::Kind::free_end, 0.0, m_end},
                      {Boundary::Kind::free_end, X, m_end}, 2, L, kscale);
        Eigen::VectorXd r;
        double prev_x = 0.0, prev_r = 0.0;
        bool have_prev = false;
        for (int i = 0; i <= 60; ++i) {
            const double x1 = (0.08 + (2.35 - 0.08) * i / 60.0) * L;
            if (!probe.residuals({x1, X - x1}, r)) continue;
            if (have_prev && prev_r * r[0] <= 0.0) {
                double a = prev_x, b = x1;
                for (int it = 0; it < 80; ++it) {
                    const double m = 0.5 * (a + b);
                    if (!probe.residuals({m, X - m}, r)) break;
                    if (prev_r * r[0] <= 0.0) b = m;
                    else a = m;
                }
                std::vector<double> init{0.5 * (a + b), X - 0.5 * (a + b)};
                if (auto sol = try_merged(true, true, Anchor::contact, Anchor::contact, &init))
                    return *sol;
                break;
            }
            prev_x = x1;
            prev_r = r[0];
            have_prev = true;
        }
    }
    throw SolverError("contact solve failed for all candidate topologies: " + last_err);
}

}  // namespace detail

/// Symmetric three-actuator lift-off, centered coordinates (x=0 at the robot
/// middle). Dome per the closed form when self-consistent (tips of the outer
/// actuators are solved alongside); merged or center-flat topologies are
/// resolved numerically.
inline ShapeSolution solve_three_symmetric(const StackProperties& props, double v2, double v3,
                                           double v4) {
    if (std::abs(v2 - v4) > 1e-9 * std::max({1.0, std::abs(v2), std::abs(v4)}))
        throw std::invalid_argument(
            "solve_three_symmetric: requires V2 = V4 (use solve_robot for asymmetric profiles)");
    const double L = props.actuator_length;
    VoltageProfile profile;
    profile.actuator_count = 3;
    profile.actuator_length = L;
    profile.voltages = {v2, v3, v4};
    profile.bend_signs = {+1, -1, +1};

    ShapeSolution sol = detail::solve_strip(props, profile, {});
    // report in centered coordinates
    sol.shape = sol.shape.shifted(-1.5 * L);
    for (auto& f : sol.topology.flat) {
        f.lo -= 1.5 * L;
        f.hi -= 1.5 * L;
    }
    for (auto& c : sol.topology.contact_points) c -= 1.5 * L;
    for (auto& s : sol.topology.suspended) {
        s.lo -= 1.5 * L;
        s.hi -= 1.5 * L;
    }
    for (auto& r : sol.point_reactions) r.x -= 1.5 * L;
    // the named L_SUS is the extent of the central suspended span
    double s_mid = sol.suspended_lengths.count("L_SUS_MID") ? sol.suspended_lengths["L_SUS_MID"] : 0.0;
    sol.suspended_lengths["L_SUS"] = s_mid;
    return sol;
}

/// Full N=5 robot contact solve.
inline ShapeSolution solve_robot(const StackProperties& props, const VoltageProfile& profile,
                                 const std::vector<PointLoad>& payloads) {
    profile.validate();
    for (const PointLoad& pl : payloads) {
        if (pl.position < 0.0 || pl.position > profile.total_length())
            throw std::invalid_argument("solve_robot: payload outside the robot");
        if (pl.kind == PointLoad::Kind::mass && pl.magnitude < 0.0)
            throw std::invalid_argument("solve_robot: negative payload mass");
    }
    ShapeSolution sol = detail::solve_strip(props, profile, payloads);
    if (!sol.suspended_lengths.count("L_SUS_MID")) {
        double longest = 0.0;
        for (const Interval& s : sol.topology.suspended)
            if (s.lo > 1e-12 && s.hi < profile.total_length() - 1e-12)
                longest = std::max(longest, s.length());
        sol.suspended_lengths["L_SUS_MID"] = longest;
    }
    return sol;
}

/// Shape CSV: x_m, y_m, dy_dx, d2y_dx2, contact_flag.
inline void export_shape_csv(const ShapeSolution& sol, std::ostream& os, int samples = 1001) {
    os << "x_m,y_m,dy_dx,d2y_dx2,contact_flag\n";
    char buf[160];
    const double lo = sol.shape.lo(), hi = sol.shape.hi();
    for (int i = 0; i < samples; ++i) {
        const double x = lo + (hi - lo) * i / (samples - 1);
        const int flag = sol.topology.is_flat_at(x) ? 1 : 0;
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%d\n", x, sol.shape.eval(x),
                      sol.shape.eval(x, 1), sol.shape.eval(x, 2), flag);
        os << buf;
    }
}

}  // namespace inchsim
