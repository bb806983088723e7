#pragma once

#include <lapacke.h>

#include <cmath>
#include <cstring>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "inchsim/contact.hpp"

namespace inchsim {

struct FdOracleOptions {
    bool clamp_left = false;   // y(0)=0, y'(0)=0 instead of a free end
    double tol_y = 1e-12;      // m
    double tol_r = -1.0;       // N; negative = auto
};

namespace detail {

// Mixed-form FD system: nodal deflections y_0..y_N interleaved with interior
// moments M_1..M_{N-1}.  Pentadiagonal (KL = KU = 2), factorized per active
// set with the banded LAPACK solver.
class FdSystem {
public:
    FdSystem(double EI, double qg, const CurvatureField& field, double Ltot, int N,
             const std::vector<PointLoad>& payloads, bool clamp_left)
        : EI_(EI), N_(N), h_(Ltot / N), n_(2 * N) {
        kap_.resize(N_ - 1);
        for (int i = 1; i < N_; ++i) {
            // cell-averaged curvature keeps the forcing second-order at steps
            const double a = (i - 0.5) * h_, b = (i + 0.5) * h_;
            double acc = 0.0;
            const int sub = 8;
            for (int k = 0; k < sub; ++k)
                acc += field.at(a + (b - a) * (k + 0.5) / sub);
            kap_[i - 1] = acc / sub;
        }
        f_.assign(N_ + 1, -qg * h_);
        f_[0] *= 0.5;
        f_[N_] *= 0.5;
        for (const PointLoad& pl : payloads) {
            const int i = (int)std::lround(pl.position / h_);
            const double F = (pl.kind == PointLoad::Kind::mass) ? -pl.magnitude * kGravity
                                                                : pl.magnitude;
            f_[std::clamp(i, 0, N_)] += F;
        }
        fixed_.assign(N_ + 1, 0);
        if (clamp_left) fixed_[0] = fixed_[1] = 1;
    }

    int nodes() const { return N_ + 1; }
    double h() const { return h_; }
    const std::vector<char>& fixed() const { return fixed_; }

    // Solves with y=0 at contact/fixed nodes. Returns false if singular.
    bool solve(const std::vector<char>& contact, std::vector<double>& y,
               std::vector<double>& r) {
        const int kl = 2, ku = 2, ldab = 2 * kl + ku + 1;
        ab_.assign((size_t)ldab * n_, 0.0);
        b_.assign(n_, 0.0);
        auto put = [&](int i, int j, double v) { ab_[(size_t)j * ldab + kl + ku + i - j] = v; };
        auto posy = [&](int i) { return i == 0 ? 0 : (i == N_ ? 2 * N_ - 1 : 2 * i - 1); };
        auto posm = [&](int i) { return 2 * i; };
        const double ih2 = 1.0 / (h_ * h_);
        for (int i = 1; i < N_; ++i) {  // constitutive rows
            const int row = 2 * i - 1;
            put(row, posy(i - 1), -EI_ * ih2);
            put(row, posy(i), 2.0 * EI_ * ih2);
            put(row, posy(i + 1), -EI_ * ih2);
            put(row, posm(i), 1.0);
            b_[row] = -EI_ * kap_[i - 1];
        }
        for (int i = 0; i <= N_; ++i) {  // node rows: pin or equilibrium
            const int row = (i == 0) ? 0 : (i == N_ ? 2 * N_ - 1 : 2 * i);
            if (fixed_[i] || contact[i]) {
                put(row, posy(i), 1.0);
                b_[row] = 0.0;
                continue;
            }
            const double c = 1.0 / h_;  // h * (1/h^2)
            if (i - 1 >= 1) put(row, posm(i - 1), c);
            if (i >= 1 && i <= N_ - 1) put(row, posm(i), -2.0 * c);
            if (i + 1 <= N_ - 1) put(row, posm(i + 1), c);
            b_[row] = f_[i];
        }
        ipiv_.resize(n_);
        const lapack_int info = LAPACKE_dgbsv(LAPACK_COL_MAJOR, n_, kl, ku, 1, ab_.data(),
                                              ldab, ipiv_.data(), b_.data(), n_);
        if (info != 0) return false;
        y.assign(N_ + 1, 0.0);
        std::vector<double> M(N_ + 1, 0.0);
        y[0] = b_[0];
        y[N_] = b_[2 * N_ - 1];
        for (int i = 1; i < N_; ++i) {
            y[i] = b_[2 * i - 1];
            M[i] = b_[2 * i];
        }
        for (int i = 0; i <= N_; ++i)
            if (!std::isfinite(y[i]) || !std::isfinite(M[i])) return false;
        // generalized reactions at held nodes: h (D2^T M)_i - f_i
        r.assign(N_ + 1, 0.0);
        for (int i = 0; i <= N_; ++i) {
            if (!(fixed_[i] || contact[i])) continue;
            double d = 0.0;
            if (i - 1 >= 1) d += M[i - 1];
            if (i >= 1 && i <= N_ - 1) d += -2.0 * M[i];
            if (i + 1 <= N_ - 1) d += M[i + 1];
            r[i] = d / h_ - f_[i];
        }
        return true;
    }

private:
    double EI_;
    int N_;
    double h_;
    int n_;
    std::vector<double> kap_, f_, ab_, b_;
    std::vector<char> fixed_;
    std::vector<lapack_int> ipiv_;
};

inline void dilate_mask(std::vector<char>& m, int w) {
    const int n = (int)m.size();
    std::vector<char> out(m);
    for (int i = 0; i < n; ++i)
        if (m[i])
            for (int k = std::max(0, i - w); k <= std::min(n - 1, i + w); ++k) out[k] = 1;
    m.swap(out);
}

// Two-phase active set: bulk dilated release with capture-all, plus a
// single-pivot endgame that slides isolated contact points node by node.
// The endgame engages near convergence or after a backtrack and lets go
// again if the violation count grows.
inline int fd_active_set(FdSystem& sys, std::vector<char>& contact, std::vector<double>& y,
                         std::vector<double>& r, double tol_y, double tol_r, int maxit) {
    const int n = sys.nodes();
    for (int i = 0; i < n; ++i)
        if (sys.fixed()[i]) contact[i] = 0;
    int w = 1;
    bool endgame = false;
    std::vector<char> prev = contact;
    std::unordered_set<size_t> seen;
    const std::hash<std::string_view> hasher;
    for (int it = 0; it < maxit; ++it) {
        bool ok = sys.solve(contact, y, r);
        if (!ok) {
            contact = prev;
            endgame = true;
            if (!sys.solve(contact, y, r))
                throw SolverError("solve_fd_oracle: singular system during active-set iteration");
        }
        int n_viol = 0, n_capt = 0, worst_r = -1, worst_y = -1;
        for (int i = 0; i < n; ++i) {
            if (contact[i] && r[i] < -tol_r) {
                ++n_viol;
                if (worst_r < 0 || r[i] < r[worst_r]) worst_r = i;
            }
            if (!contact[i] && !sys.fixed()[i] && y[i] < -tol_y) {
                ++n_capt;
                if (worst_y < 0 || y[i] < y[worst_y]) worst_y = i;
            }
        }
        if (n_viol == 0 && n_capt == 0) return it;
        prev = contact;
        // single-pivot endgame handles the final point-contact slides; cold
        // starts (few forcing seeds at the curvature steps) must bulk first
        if (it >= 25 && n_viol + n_capt <= 4) endgame = true;
        if (n_viol + n_capt > 16) endgame = false;
        if (endgame) {
            if (n_capt > 0) contact[worst_y] = 1;
            else contact[worst_r] = 0;
        } else {
            if (n_capt > 0) w = 1;
            std::vector<char> rel(n, 0);
            for (int i = 0; i < n; ++i) rel[i] = (contact[i] && r[i] < -tol_r) ? 1 : 0;
            dilate_mask(rel, w);
            for (int i = 0; i < n; ++i) {
                if (rel[i]) contact[i] = 0;
                if (!sys.fixed()[i] && y[i] < -tol_y) contact[i] = 1;
            }
            if (n_capt == 0) w = std::min(2 * w, std::max(8, n / 16));
        }
        int cnt = 0;
        for (int i = 0; i < n; ++i) cnt += contact[i] || sys.fixed()[i];
        if (cnt < 2) {
            // keep the two strongest supports so the rigid modes stay pinned
            int b1 = -1, b2 = -1;
            for (int i = 0; i < n; ++i)
                if (prev[i]) {
                    if (b1 < 0 || r[i] > r[b1]) {
                        b2 = b1;
                        b1 = i;
                    } else if (b2 < 0 || r[i] > r[b2]) {
                        b2 = i;
                    }
                }
            if (b1 >= 0) contact[b1] = 1;
            if (b2 >= 0) contact[b2] = 1;
        }
    }
    throw SolverError("solve_fd_oracle: active set did not converge");
}

// Near a smooth lift-off the complementarity test is degenerate (penetration
// grows cubically with distance), so the converged boundary can sit several
// nodes inside the true one. Trim run edges while releasing the edge node
// keeps the shape feasible to machine precision.
inline int fd_trim_edges(FdSystem& sys, std::vector<char>& contact, std::vector<double>& y,
                         std::vector<double>& r, double tol_r) {
    const int n = sys.nodes();
    const double tol_trim = 3e-15;
    int trims = 0;
    for (int pass = 0; pass < 64; ++pass) {
        bool any = false;
        std::vector<int> edges;
        for (int i = 0; i < n; ++i) {
            if (!contact[i]) continue;
            const bool left_free = (i > 0) && !contact[i - 1] && !sys.fixed()[i - 1];
            const bool right_free = (i < n - 1) && !contact[i + 1] && !sys.fixed()[i + 1];
            if (left_free || right_free) edges.push_back(i);
        }
        for (int i : edges) {
            if (!contact[i]) continue;
            std::vector<char> trial = contact;
            trial[i] = 0;
            std::vector<double> yt, rt;
            if (!sys.solve(trial, yt, rt)) continue;
            double ymin = 0.0, rmin = 0.0;
            for (int k = std::max(0, i - 64); k <= std::min(n - 1, i + 64); ++k) {
                if (!trial[k] && !sys.fixed()[k]) ymin = std::min(ymin, yt[k]);
                if (trial[k]) rmin = std::min(rmin, rt[k]);
            }
            if (ymin >= -tol_trim && rmin >= -tol_r) {
                contact = trial;
                y = yt;
                r = rt;
                any = true;
                ++trims;
            }
        }
        if (!any) break;
    }
    return trims;
}

}  // namespace detail

/// Finite-difference unilateral-contact oracle: mixed-form discretization of
/// the beam with eigencurvature, solved as a nodewise complementarity problem
/// (y >= 0, r >= 0, y*r = 0) by an active-set iteration with coarse-to-fine
/// grid continuation. Independent of the closed-form solvers.
inline FdSolution solve_fd_oracle(const StackProperties& props, const VoltageProfile& profile,
                                  const std::vector<PointLoad>& payloads, int grid_n,
                                  FdOracleOptions opts = {}) {
    profile.validate();
    if (grid_n < 16) throw std::invalid_argument("solve_fd_oracle: grid_n too small");
    if (grid_n < 1000) warn("solve_fd_oracle: grid_n below 1000");
    const double X = profile.total_length();
    const double qg = props.qg();
    const CurvatureField field = curvature_field(profile, props);
    const double tol_r = opts.tol_r > 0.0 ? opts.tol_r : 1e-8 * qg * X;

    std::vector<int> levels{grid_n};
    while (levels.back() > 320) levels.push_back(levels.back() / 2);
    std::reverse(levels.begin(), levels.end());

    std::vector<char> contact(levels.front() + 1, 1);
    std::vector<double> y, r;
    int total_it = 0;
    for (size_t li = 0; li < levels.size(); ++li) {
        const int Nl = levels[li];
        if (li > 0) {
            const std::vector<char>& prev = contact;
            std::vector<char> fine(Nl + 1, 0);
            for (int i = 0; i <= Nl; ++i) {
                const long j = std::lround((double)i * (prev.size() - 1) / Nl);
                fine[i] = prev[(size_t)j];
            }
            contact = fine;
        }
        detail::FdSystem sys(props.flexural_rigidity, qg, field, X, Nl, payloads,
                             opts.clamp_left);
        total_it += detail::fd_active_set(sys, contact, y, r, opts.tol_y, tol_r, 6 * Nl + 400);
        if (li + 1 == levels.size())
            total_it += detail::fd_trim_edges(sys, contact, y, r, tol_r);
    }

    FdSolution out;
    out.iterations = total_it;
    const int N = levels.back();
    const double h = X / N;
    out.x.resize(N + 1);
    for (int i = 0; i <= N; ++i) out.x[i] = i * h;
    out.y = y;
    out.reaction = r;
    // topology from the converged contact set: runs of held nodes
    int i = 0;
    while (i <= N) {
        if (!contact[i]) {
            ++i;
            continue;
        }
        int j = i;
        while (j + 1 <= N && contact[j + 1]) ++j;
        if (j > i)
            out.topology.flat.push_back({out.x[i], out.x[j]});
        else
            out.topology.contact_points.push_back(out.x[i]);
        i = j + 1;
    }
    out.topology.finalize(0.0, X);
    return out;
}

}  // namespace inchsim
