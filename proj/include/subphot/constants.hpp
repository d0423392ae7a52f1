#ifndef SUBPHOT_CONSTANTS_HPP
#define SUBPHOT_CONSTANTS_HPP

#include <cmath>

namespace subphot {

// CODATA 2018 exact / recommended values, SI units throughout.
// eV and nm appear only at API boundaries; see units.hpp.
struct PhysicalConstants {
    double e = 1.602176634e-19;       // elementary charge (C)
    double m = 9.1093837015e-31;      // electron mass (kg)
    double c = 2.99792458e8;          // speed of light in vacuum (m/s)
    double h = 6.62607015e-34;        // Planck constant (J s)
    double hbar = 1.054571817e-34;    // reduced Planck constant (J s)
    double k_B = 1.380649e-23;        // Boltzmann constant (J/K)
    double eps0 = 8.8541878128e-12;   // vacuum permittivity (F/m)
    double r0 = 2.8179403262e-15;     // classical electron radius (m)

    // Empirical constant entering the single-point work-function
    // estimate; provenance is unstated in the literature, so it is
    // kept configurable rather than derived.
    double fowler_a = 4.0e-36;        // m^2 s per quantum

    // Richardson-type constant 4*pi*m*k_B^2/h^3, stored for audit.
    double fowler_A = 7.500622989918313e24;

    double classical_electron_radius_derived() const {
        return e * e / (4.0 * M_PI * eps0 * m * c * c);
    }
    double fowler_A_derived() const {
        return 4.0 * M_PI * m * k_B * k_B / (h * h * h);
    }
};

inline const PhysicalConstants& constants() {
    static const PhysicalConstants k{};
    return k;
}

// Frequently used composite values.
inline double electronvolt() { return constants().e; }          // J per eV
inline double hc_over_e_nm_ev() {                                // ~1239.84 nm eV
    const auto& k = constants();
    return k.h * k.c / k.e * 1e9;
}

} // namespace subphot

#endif
