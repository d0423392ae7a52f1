#ifndef SUBPHOT_UNITS_HPP
#define SUBPHOT_UNITS_HPP

#include <cmath>
#include <stdexcept>
#include <string>

#include "subphot/constants.hpp"

namespace subphot {

inline double ev_to_joule(double ev) { return ev * constants().e; }
inline double joule_to_ev(double j) { return j / constants().e; }

// lambda (nm) <-> photon energy (eV), hc/e = 1239.84... nm eV
inline double ev_to_wavelength_nm(double energy_ev) {
    if (!(energy_ev > 0.0))
        throw std::invalid_argument("ev_to_wavelength_nm: photon energy must be > 0 eV");
    return hc_over_e_nm_ev() / energy_ev;
}

inline double wavelength_nm_to_ev(double lambda_nm) {
    if (!(lambda_nm > 0.0))
        throw std::invalid_argument("wavelength_nm_to_ev: wavelength must be > 0 nm");
    return hc_over_e_nm_ev() / lambda_nm;
}

inline double wavelength_nm_to_omega(double lambda_nm) {
    if (!(lambda_nm > 0.0))
        throw std::invalid_argument("wavelength_nm_to_omega: wavelength must be > 0 nm");
    return 2.0 * M_PI * constants().c / (lambda_nm * 1e-9);
}

inline double omega_to_wavelength_nm(double omega) {
    if (!(omega > 0.0))
        throw std::invalid_argument("omega_to_wavelength_nm: omega must be > 0");
    return 2.0 * M_PI * constants().c / omega * 1e9;
}

inline double photon_energy_joule_at(double lambda_nm) {
    return ev_to_joule(wavelength_nm_to_ev(lambda_nm));
}

// One wavelength, three views of it.
struct SpectralPoint {
    double wavelength_nm = 0.0;
    double photon_energy_ev = 0.0;
    double angular_frequency = 0.0;  // rad/s

    static SpectralPoint from_wavelength_nm(double lambda_nm) {
        SpectralPoint s;
        s.wavelength_nm = lambda_nm;
        s.photon_energy_ev = wavelength_nm_to_ev(lambda_nm);
        s.angular_frequency = wavelength_nm_to_omega(lambda_nm);
        return s;
    }
    static SpectralPoint from_energy_ev(double ev) {
        return from_wavelength_nm(ev_to_wavelength_nm(ev));
    }
    static SpectralPoint from_omega(double omega) {
        return from_wavelength_nm(omega_to_wavelength_nm(omega));
    }
};

// eta [electrons/photon] = (hc/e lambda) * R [A/W]
inline double responsivity_to_qe(double responsivity_a_per_w, double lambda_nm) {
    if (!(lambda_nm > 0.0))
        throw std::invalid_argument("responsivity_to_qe: wavelength must be > 0 nm");
    return hc_over_e_nm_ev() / lambda_nm * responsivity_a_per_w;
}

inline double qe_to_responsivity(double qe, double lambda_nm) {
    if (!(lambda_nm > 0.0))
        throw std::invalid_argument("qe_to_responsivity: wavelength must be > 0 nm");
    return qe * lambda_nm / hc_over_e_nm_ev();
}

// 1 GM = 1e-58 m^4 s (conventional two-photon cross-section unit)
inline double gm_to_si(double gm) { return gm * 1e-58; }
inline double si_to_gm(double m4s) { return m4s * 1e58; }

} // namespace subphot

#endif
