#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace inchsim {

inline constexpr double kGravity = 9.80665;  // m/s^2

struct LayerSpec {
    double youngs_modulus = 0.0;  // Pa
    double density = 0.0;         // kg/m^3
    double thickness = 0.0;       // m
    std::optional<double> poisson_ratio;

    void validate(const char* name) const {
        if (!(thickness > 0.0))
            throw std::invalid_argument(std::string(name) + ": thickness must be > 0");
        if (!(youngs_modulus > 0.0))
            throw std::invalid_argument(std::string(name) + ": Young's modulus must be > 0");
        if (density < 0.0)
            throw std::invalid_argument(std::string(name) + ": density must be >= 0");
        if (poisson_ratio && !(*poisson_ratio >= 0.0 && *poisson_ratio < 0.5))
            throw std::invalid_argument(std::string(name) + ": Poisson ratio must be in [0, 0.5)");
    }
};

// Layer order is fixed top-to-bottom: piezo / epoxy / substrate.
struct TrimorphStack {
    LayerSpec piezo, epoxy, substrate;
    double d31 = 0.0;              // m/V, signed charge coefficient
    double electrode_pitch = 0.0;  // m
    double actuator_length = 0.0;  // m (L)
    double width = 0.0;            // m
    bool plane_strain_correction = false;
    int bend_direction = +1;       // +1 curls up at positive drive, -1 down
    std::optional<std::pair<double, double>> voltage_range;  // metadata, warn-only

    void validate() const {
        piezo.validate("piezo");
        epoxy.validate("epoxy");
        substrate.validate("substrate");
        if (!(electrode_pitch > 0.0))
            throw std::invalid_argument("electrode_pitch must be > 0");
        if (!(actuator_length > 0.0))
            throw std::invalid_argument("actuator_length must be > 0");
        if (!(width > 0.0))
            throw std::invalid_argument("width must be > 0");
        if (bend_direction != 1 && bend_direction != -1)
            throw std::invalid_argument("bend_direction must be +1 or -1");
    }
};

struct StackProperties {
    double neutral_axis = 0.0;       // z_N, m from the bottom of the substrate
    double flexural_rigidity = 0.0;  // EI, N*m^2, full width
    double gamma = 0.0;              // curvature per volt, 1/(m*V)
    double alpha = 0.0;              // strain per volt, 1/V
    double linear_density = 0.0;     // q, kg/m, full width
    std::array<double, 3> layer_centroids{};       // z_i relative to the neutral axis
    std::array<double, 3> layer_second_moments{};  // I_i = h_i^3/12 per unit width

    // carried along for the solvers
    double actuator_length = 0.0;
    double width = 0.0;
    int bend_direction = +1;
    std::optional<std::pair<double, double>> voltage_range;

    double qg() const { return linear_density * kGravity; }
};

/// Neutral axis, flexural rigidity, curvature per volt and mass per length of
/// the laminated cross-section. z_i are taken from the substrate bottom and
/// re-expressed relative to z_N; EI and q are full-width.
inline StackProperties derive_properties(const TrimorphStack& stack) {
    stack.validate();
    const LayerSpec* layers[3] = {&stack.piezo, &stack.epoxy, &stack.substrate};
    double E[3], h[3], rho[3];
    for (int i = 0; i < 3; ++i) {
        E[i] = layers[i]->youngs_modulus;
        h[i] = layers[i]->thickness;
        rho[i] = layers[i]->density;
        if (stack.plane_strain_correction && layers[i]->poisson_ratio) {
            double nu = *layers[i]->poisson_ratio;
            E[i] /= (1.0 - nu * nu);
        }
    }
    // centroids from the bottom of the substrate: substrate, epoxy, piezo stackup
    const double c[3] = {h[2] + h[1] + 0.5 * h[0], h[2] + 0.5 * h[1], 0.5 * h[2]};
    double sumEh = 0.0, sumEhc = 0.0;
    for (int i = 0; i < 3; ++i) {
        sumEh += E[i] * h[i];
        sumEhc += E[i] * h[i] * c[i];
    }
    if (!(sumEh > 0.0))
        throw std::invalid_argument("degenerate stack: zero axial stiffness");

    StackProperties p;
    p.neutral_axis = sumEhc / sumEh;
    double ei_pw = 0.0;
    for (int i = 0; i < 3; ++i) {
        double z = c[i] - p.neutral_axis;
        p.layer_centroids[i] = z;
        p.layer_second_moments[i] = h[i] * h[i] * h[i] / 12.0;
        ei_pw += E[i] * (p.layer_second_moments[i] + h[i] * z * z);
    }
    if (!(ei_pw > 0.0))
        throw std::invalid_argument("degenerate stack: zero flexural rigidity");
    p.alpha = stack.d31 / stack.electrode_pitch;
    p.gamma = p.alpha * p.layer_centroids[0] * E[0] * h[0] / ei_pw;
    p.flexural_rigidity = stack.width * ei_pw;
    p.linear_density = stack.width * (rho[0] * h[0] + rho[1] * h[1] + rho[2] * h[2]);
    if (!(p.linear_density > 0.0))
        throw std::invalid_argument("degenerate stack: zero mass per length");
    p.actuator_length = stack.actuator_length;
    p.width = stack.width;
    p.bend_direction = stack.bend_direction;
    p.voltage_range = stack.voltage_range;
    return p;
}

/// kappa = gamma * V (signed).
inline double free_curvature(const StackProperties& props, double voltage) {
    return props.gamma * voltage;
}

/// Curvature produced when the actuator is driven toward its preferred bend
/// direction with |voltage| volts.
inline double drive_curvature(const StackProperties& props, double voltage) {
    return props.bend_direction * props.gamma * voltage;
}

struct SubstrateOptimum {
    double thickness = 0.0;           // m
    double curvature_per_volt = 0.0;  // |gamma| at the optimum
};

/// Argmax of |gamma| over the substrate thickness: dense scan then
/// golden-section refinement. Independent of the probe voltage.
inline SubstrateOptimum optimize_substrate_thickness(const TrimorphStack& stack,
                                                     std::pair<double, double> range) {
    if (!(range.first > 0.0) || !(range.second > range.first))
        throw std::invalid_argument("optimize_substrate_thickness: bad search range");
    auto gamma_at = [&stack](double h3) {
        TrimorphStack s = stack;
        s.substrate.thickness = h3;
        return std::abs(derive_properties(s).gamma);
    };
    const int scan_n = 400;
    double best_h = range.first, best_g = -1.0;
    for (int i = 0; i <= scan_n; ++i) {
        double h3 = range.first + (range.second - range.first) * i / scan_n;
        double g = gamma_at(h3);
        if (g > best_g) {
            best_g = g;
            best_h = h3;
        }
    }
    double step = (range.second - range.first) / scan_n;
    double a = std::max(range.first, best_h - step);
    double b = std::min(range.second, best_h + step);
    const double gr = (std::sqrt(5.0) + 1.0) / 2.0;
    double c1 = b - (b - a) / gr;
    double c2 = a + (b - a) / gr;
    while (b - a > 1e-10) {
        if (gamma_at(c1) > gamma_at(c2))
            b = c2;
        else
            a = c1;
        c1 = b - (b - a) / gr;
        c2 = a + (b - a) / gr;
    }
    SubstrateOptimum opt;
    opt.thickness = 0.5 * (a + b);
    opt.curvature_per_volt = gamma_at(opt.thickness);
    return opt;
}

}  // namespace inchsim
