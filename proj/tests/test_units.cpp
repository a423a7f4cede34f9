#include <gtest/gtest.h>

#include "gasnet/units.hpp"

using namespace gasnet;

namespace {

GasConstants hundred_km() {
    GasConstants c;
    c.ell0 = 100000.0;
    c.rho0 = 45.0;
    return c;
}

} // namespace

TEST(Units, ZeroPointMapsToOrigin) {
    const GasConstants c = hundred_km();
    const NondimPoint v = nondimensionalize({0.0, 0.0, c.rho0, 0.0}, c);
    EXPECT_EQ(v.t, 0.0);
    EXPECT_EQ(v.x, 0.0);
    EXPECT_EQ(v.rho, 1.0);
    EXPECT_EQ(v.phi, 0.0);
}

TEST(Units, PipeLengthIsUnitLength) {
    const GasConstants c = hundred_km();
    EXPECT_DOUBLE_EQ(nondimensionalize({0.0, 100000.0, c.rho0, 0.0}, c).x, 1.0);
}

TEST(Units, RoundTrip) {
    const GasConstants c = hundred_km();
    const DimensionalPoint v{3600.0, 42000.0, 2.0 * c.rho0, 310.5};
    const NondimPoint n = nondimensionalize(v, c);
    EXPECT_DOUBLE_EQ(n.rho, 2.0);
    const DimensionalPoint back = redimensionalize(n, c);
    EXPECT_NEAR(back.t, v.t, 1e-15 * v.t);
    EXPECT_NEAR(back.x, v.x, 1e-15 * v.x);
    EXPECT_NEAR(back.rho, v.rho, 1e-15 * v.rho);
    EXPECT_NEAR(back.phi, v.phi, 1e-15 * v.phi);
}

TEST(Units, FlowScaleIsAreaTimesFlux) {
    const GasConstants c = hundred_km();
    const double area = 0.19634954084936207;
    const double phi = 50.0; // kg/(m^2 s)
    EXPECT_NEAR(c.nd_flow(phi * area), area * c.nd_flux(phi), 1e-15);
    EXPECT_DOUBLE_EQ(c.time_scale(), 100000.0 / 377.0);
}

TEST(Units, PressureConversions) {
    const GasConstants c = hundred_km();
    EXPECT_EQ(pressure_to_density(0.0, c), 0.0);
    // 942.75 psi with 1 psi = 6894.757293168 Pa
    EXPECT_NEAR(psi_to_pa(942.75), 6500032.438134132, 1e-6);
    EXPECT_NEAR(pressure_to_density(psi_to_pa(942.75), c), 45.733329849180194, 1e-12);
    for (double p : {1.0, 3.3e5, 6500032.438134132, 1.2e7}) {
        const double back = density_to_pressure(pressure_to_density(p, c), c);
        EXPECT_LE(std::abs(back - p) / p, 1e-14);
    }
    EXPECT_NEAR(pa_to_psi(psi_to_pa(500.0)), 500.0, 1e-12);
}

TEST(Units, RejectsBadInput) {
    GasConstants c = hundred_km();
    EXPECT_THROW(pressure_to_density(-1.0, c), Error);
    EXPECT_THROW(nondimensionalize({std::nan(""), 0.0, 1.0, 0.0}, c), Error);
    c.a = 0.0;
    EXPECT_THROW(c.validate(), Error);
    c = hundred_km();
    c.rho0 = -1.0;
    EXPECT_THROW(nondimensionalize({0.0, 0.0, 1.0, 0.0}, c), Error);
}
