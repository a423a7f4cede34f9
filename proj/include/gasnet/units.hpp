#pragma once

#include <cmath>

#include "gasnet/error.hpp"

namespace gasnet {

inline constexpr double kPaPerPsi = 6894.757293168;
inline constexpr double kSecondsPerHour = 3600.0;
inline constexpr double kDefaultSpeedOfSound = 377.0;

inline constexpr double psi_to_pa(double psi) { return psi * kPaPerPsi; }
inline constexpr double pa_to_psi(double pa) { return pa / kPaPerPsi; }

/// Scales for the isothermal ideal-gas model p = a^2 rho.
///
/// Everything downstream of the scenario loader works in nondimensional
/// units: time in ell0/a, length in ell0, density in rho0, mass flux in
/// a*rho0. Mass flow rates (kg/s) become a*rho0-scaled quantities with
/// units of area, so that a withdrawal equals area times nondimensional flux.
struct GasConstants {
    double a = kDefaultSpeedOfSound; // m/s
    double ell0 = 1.0e5;             // m
    double rho0 = 1.0;               // kg/m^3
    double horizon = 86400.0;        // s

    void validate() const {
        auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
        detail::require(ok(a), "speed of sound must be positive and finite");
        detail::require(ok(ell0), "nominal length must be positive and finite");
        detail::require(ok(rho0), "nominal density must be positive and finite");
        detail::require(ok(horizon), "time horizon must be positive and finite");
    }

    double time_scale() const { return ell0 / a; }
    double flux_scale() const { return a * rho0; }
    double nondim_horizon() const { return horizon / time_scale(); }

    double nd_time(double t_s) const { return t_s / time_scale(); }
    double nd_length(double x_m) const { return x_m / ell0; }
    double nd_density(double rho) const { return rho / rho0; }
    double nd_flux(double phi) const { return phi / flux_scale(); }
    /// kg/s -> nondimensional flux times area (m^2).
    double nd_flow(double q) const { return q / flux_scale(); }

    double dim_time(double t) const { return t * time_scale(); }
    double dim_length(double x) const { return x * ell0; }
    double dim_density(double rho) const { return rho * rho0; }
    double dim_flux(double phi) const { return phi * flux_scale(); }
    double dim_flow(double q) const { return q * flux_scale(); }

    double nd_pressure(double p_pa) const { return p_pa / (a * a * rho0); }
    double dim_pressure(double rho_nd) const { return rho_nd * rho0 * a * a; }
};

struct DimensionalPoint {
    double t = 0.0;   // s
    double x = 0.0;   // m
    double rho = 0.0; // kg/m^3
    double phi = 0.0; // kg/(m^2 s)
};

struct NondimPoint {
    double t = 0.0;
    double x = 0.0;
    double rho = 0.0;
    double phi = 0.0;
};

inline NondimPoint nondimensionalize(const DimensionalPoint& v, const GasConstants& c) {
    c.validate();
    detail::require(std::isfinite(v.t) && std::isfinite(v.x) && std::isfinite(v.rho) && std::isfinite(v.phi),
                    "nondimensionalize: non-finite input");
    return {c.nd_time(v.t), c.nd_length(v.x), c.nd_density(v.rho), c.nd_flux(v.phi)};
}

inline DimensionalPoint redimensionalize(const NondimPoint& v, const GasConstants& c) {
    c.validate();
    detail::require(std::isfinite(v.t) && std::isfinite(v.x) && std::isfinite(v.rho) && std::isfinite(v.phi),
                    "redimensionalize: non-finite input");
    return {c.dim_time(v.t), c.dim_length(v.x), c.dim_density(v.rho), c.dim_flux(v.phi)};
}

/// rho = p / a^2 (dimensional, kg/m^3 from Pa).
inline double pressure_to_density(double p, const GasConstants& c) {
    detail::require(std::isfinite(p) && p >= 0.0, "pressure must be non-negative");
    return p / (c.a * c.a);
}

inline double density_to_pressure(double rho, const GasConstants& c) {
    detail::require(std::isfinite(rho) && rho >= 0.0, "density must be non-negative");
    return rho * (c.a * c.a);
}

} // namespace gasnet
