#ifndef SUBPHOT_EMISSION_HPP
#define SUBPHOT_EMISSION_HPP

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "subphot/constants.hpp"
#include "subphot/material.hpp"
#include "subphot/quadrature.hpp"
#include "subphot/sources.hpp"
#include "subphot/units.hpp"

namespace subphot {

// Photocurrent and its companion measures at one operating point.
struct EmissionRates {
    double i = 0.0;    // photocurrent (A)
    double mu = 0.0;   // photoelectron rate (1/s)
    double eta = 0.0;  // quantum efficiency (electrons/photon)
    double R = 0.0;    // responsivity (A/W)
    bool area_warning = false;  // illumination area exceeded the entanglement area
};

inline double ftp_current(double responsivity_F, double incident_power_w) {
    if (responsivity_F < 0.0 || incident_power_w < 0.0)
        throw std::invalid_argument("ftp_current: inputs must be nonnegative");
    return responsivity_F * incident_power_w;
}

// Single-point work-function estimate from a subthreshold responsivity:
// W = hnu + k_B T ln(a A T^2 / R_F)
inline double fowler_work_function_ev(double responsivity_F, double temperature_k,
                                      double hnu_ev,
                                      const PhysicalConstants& pc = constants()) {
    if (!(responsivity_F > 0.0) || !(temperature_k > 0.0))
        throw std::invalid_argument("fowler_work_function_ev: R_F and T must be > 0");
    double arg = pc.fowler_a * pc.fowler_A * temperature_k * temperature_k / responsivity_F;
    if (!(arg > 0.0))
        throw std::invalid_argument("fowler_work_function_ev: nonpositive log argument");
    double kT_ev = pc.k_B * temperature_k / pc.e;
    return hnu_ev + kT_ev * std::log(arg);
}

inline double fowler_responsivity_from_work_function(double work_function_ev,
                                                     double temperature_k, double hnu_ev,
                                                     const PhysicalConstants& pc = constants()) {
    double kT_ev = pc.k_B * temperature_k / pc.e;
    return pc.fowler_a * pc.fowler_A * temperature_k * temperature_k *
           std::exp(-(work_function_ev - hnu_ev) / kT_ev);
}

// CW single-mode two-photon volume photocurrent (A). Initial states fill a
// sphere of radius k_up with band depth E_up; for metals these are k_F and
// E_F, for semiconductors the calibrated substitutes.
inline double tpp_current(const Material& mat, const SpectralPoint& spectrum,
                          double flux_density, double area_m2) {
    if (flux_density < 0.0 || !(area_m2 > 0.0))
        throw std::invalid_argument("tpp_current: need flux >= 0 and area > 0");
    const auto& pc = constants();
    const double beta = mat.require(mat.beta, "beta");
    const double d = mat.require(mat.d, "d");
    const double M = mat.require(mat.M_osc, "M_osc");
    double k_up, E_up;
    if (mat.kind == MaterialKind::metal) {
        k_up = mat.require(mat.k_F, "k_F");
        E_up = mat.require(mat.E_F, "E_F");
    } else {
        E_up = mat.require(mat.E_i_max, "E_i_max");
        k_up = std::sqrt(2.0 * pc.m * E_up) / pc.hbar;
    }
    const double W = mat.threshold();
    const double hw = ev_to_joule(spectrum.photon_energy_ev);
    if (!(2.0 * hw > W))
        throw std::invalid_argument("tpp_current: 2 hnu must exceed the emission threshold");
    double bracket = 1.0 + (W - 2.0 * hw) / E_up;
    if (bracket < 0.0)
        throw std::invalid_argument("tpp_current: initial band too shallow for the closed form (2 hnu - W > E_up)");
    double pref = pc.e * beta * beta * d * (pc.hbar * pc.r0 * pc.r0 * pc.m * pc.c * pc.c) /
                  (4.0 * hw * hw) * M * (4.0 * M_PI * k_up / 3.0) * (E_up / (2.0 * hw)) *
                  std::pow(bracket, 1.5);
    return flux_density * flux_density * area_m2 * pref;
}

// Quadratic responsivity coefficient L_C (A m^2/W^2): i_C = L_C P^2/A.
inline double tpp_responsivity_coefficient(const Material& mat, const SpectralPoint& spectrum) {
    const double hw = ev_to_joule(spectrum.photon_energy_ev);
    // i_C = phi^2 A C2  with  phi = P/(hw A)  ->  L_C = C2/hw^2
    double c2 = tpp_current(mat, spectrum, 1.0, 1.0);
    return c2 / (hw * hw);
}

// Grid and tolerance controls for the entangled-two-photon integrals.
struct EtppConfig {
    double k_min = -1.0;            // 1/m; <0 selects the material default
    double k_max = -1.0;            // 1/m; <0 selects k_F (metal) or the calibrated window
    std::size_t k_nodes = 129;      // outer k grid (trapezoid, fixed order)
    double rel_tol = 1e-6;          // inner E_j integral tolerance
    bool drop_cross_terms = false;  // smoothed curves: |t1|^2+|t2|^2 instead of |t1+t2|^2

    void validate() const {
        if (k_nodes < 3) throw std::invalid_argument("EtppConfig: k_nodes must be >= 3");
        if (!(rel_tol > 0.0)) throw std::invalid_argument("EtppConfig: rel_tol must be > 0");
    }
};

// Entanglement-electron energy overlap F(k, T_E): modulus squared of the
// complex E_j integral with both frequency terms and the sqrt(E_j - E_c)
// final-state weight. Result in J (energy units).
inline double etpp_overlap(double k, double T_E, const Material& mat, double omega1,
                           double omega2, const EtppConfig& cfg = {}) {
    cfg.validate();
    const auto& pc = constants();
    const double Ejmin = mat.require(mat.E_j_min, "E_j_min");
    const double Ejmax = mat.require(mat.E_j_max, "E_j_max");
    const double kappa = mat.require(mat.kappa_j, "kappa_j");
    const double Ec = mat.E_c ? *mat.E_c : mat.vacuum_level();
    if (!(kappa > 0.0)) throw std::invalid_argument("etpp_overlap: kappa_j must be > 0");
    if (Ec >= Ejmax)
        throw std::invalid_argument("etpp_overlap: E_c at or above E_j_max leaves an empty weight");
    if (T_E == 0.0) return 0.0;

    const double Ek = pc.hbar * pc.hbar * k * k / (2.0 * pc.m);
    const double decay = T_E * kappa / 2.0;
    const std::complex<double> imag_width(0.0, pc.hbar * kappa / 2.0);

    auto term = [&](double Ej, double omega) {
        const double D = Ej - Ek - pc.hbar * omega;
        const std::complex<double> phase(-decay, -(T_E / pc.hbar) * D);
        return (1.0 - std::exp(phase)) / (std::complex<double>(D, 0.0) - imag_width);
    };

    const double lo = std::max(Ejmin, Ec);
    if (!(Ejmax > lo)) return 0.0;

    if (!cfg.drop_cross_terms) {
        auto integrand = [&](double Ej) {
            return (term(Ej, omega1) + term(Ej, omega2)) * std::sqrt(Ej - Ec);
        };
        auto r = integrate_complex(integrand, lo, Ejmax, cfg.rel_tol);
        return std::norm(r.value);
    }
    auto ig1 = [&](double Ej) { return term(Ej, omega1) * std::sqrt(Ej - Ec); };
    auto ig2 = [&](double Ej) { return term(Ej, omega2) * std::sqrt(Ej - Ec); };
    auto r1 = integrate_complex(ig1, lo, Ejmax, cfg.rel_tol);
    auto r2 = integrate_complex(ig2, lo, Ejmax, cfg.rel_tol);
    return std::norm(r1.value) + std::norm(r2.value);
}

namespace detail {

inline double etpp_default_kmin(const Material& mat, double omega_p) {
    const auto& pc = constants();
    double deficit = mat.vacuum_level() - pc.hbar * omega_p;
    if (deficit <= 0.0) return 0.0;
    return std::sqrt(2.0 * pc.m * deficit) / pc.hbar;
}

inline double etpp_default_kmax(const Material& mat) {
    if (mat.kind == MaterialKind::metal) return mat.require(mat.k_F, "k_F");
    return mat.require(mat.k_i_max, "k_i_max");
}

} // namespace detail

// Entangled-two-photon photocurrent for a pair source of the given
// power. External loss enters as T0^2, multiplicatively and never inside
// the integral, so the returned eta counts electrons per source photon
// (the intrinsic efficiency times T0^2; they coincide for T0 = 1). The
// k-grid reduction is a fixed-order trapezoid so results do not depend
// on evaluation schedule.
inline EmissionRates etpp_rate(const Material& mat, const EntangledSource& src,
                               const OpticalPath& path, const EtppConfig& cfg = {}) {
    src.validate();
    path.validate();
    cfg.validate();
    const auto& pc = constants();
    const double beta = mat.require(mat.beta, "beta");
    const double d = mat.require(mat.d, "d");
    const double xi = mat.require(mat.xi, "xi");
    const double omega_p = src.pump.angular_frequency;
    const double w1 = src.omega1();
    const double w2 = src.omega2();

    double kmin = cfg.k_min >= 0.0 ? cfg.k_min : detail::etpp_default_kmin(mat, omega_p);
    double kmax = cfg.k_max >= 0.0 ? cfg.k_max : detail::etpp_default_kmax(mat);
    if (!(kmin < kmax))
        throw std::invalid_argument("etpp_rate: empty k window (k_min >= k_max)");

    double pref = pc.e * beta * beta * d *
                  (pc.r0 * pc.r0 * std::pow(pc.m, 4) * pc.c * pc.c) /
                  (4.0 * std::pow(M_PI, 3) * std::pow(pc.hbar, 5)) *
                  (omega_p * omega_p / (4.0 * w1 * w2)) * xi / (src.A_E * src.T_E);

    auto kernel = [&](double k) {
        double F = etpp_overlap(k, src.T_E, mat, w1, w2, cfg);
        double denom = std::sqrt(k * k + (2.0 * pc.m / pc.hbar) * omega_p) - k;
        return F * k / denom;
    };
    double kint = trapezoid(kernel, kmin, kmax, cfg.k_nodes);

    // photon flux of the source through the sample plane
    double flux = 0.0;
    if (src.source_power > 0.0) {
        double pair_photon = ev_to_joule(src.pump.photon_energy_ev);
        flux = 2.0 * src.source_power / pair_photon;
    }
    const double T0 = path.intrinsic_transmittance;

    EmissionRates out;
    out.eta = pref * kint * T0 * T0 / pc.e;  // electrons per incident photon
    out.mu = out.eta * flux;
    out.i = out.mu * pc.e;
    out.R = qe_to_responsivity(out.eta, src.degenerate_wavelength_nm());
    out.area_warning = path.illumination_area > src.A_E;
    return out;
}

// Convenience: eta_E for an explicit flux-independent evaluation.
inline double etpp_quantum_efficiency(const Material& mat, const EntangledSource& src,
                                      const OpticalPath& path, const EtppConfig& cfg = {}) {
    EntangledSource s = src;
    s.source_power = 0.0;
    return etpp_rate(mat, s, path, cfg).eta;
}

// eta_new = eta_ref * (T0^2_new / T0^2_ref) * (AETE_ref / AETE_new)
inline double renormalize_eta(double eta_ref, double aete_ref_m2s, double t0sq_ref,
                              double aete_new_m2s, double t0sq_new) {
    if (!(eta_ref > 0.0) || !(aete_ref_m2s > 0.0) || !(t0sq_ref > 0.0) ||
        !(aete_new_m2s > 0.0) || !(t0sq_new > 0.0))
        throw std::invalid_argument("renormalize_eta: all inputs must be > 0");
    return eta_ref * (t0sq_new / t0sq_ref) * (aete_ref_m2s / aete_new_m2s);
}

struct CrossSections {
    double sigma_E = 0.0;  // m^2, per primitive cell
    double delta_E = 0.0;  // m^4 s, sigma_E * A_E * T_E
};

// sigma_E = eta_E / (beta^2 N d); delta_E = sigma_E A_E T_E
inline CrossSections eta_to_sigmaE(double eta_E, double beta, double N_per_m3, double d_m,
                                   double A_E_m2, double T_E_s) {
    if (!(beta > 0.0) || !(N_per_m3 > 0.0) || !(d_m > 0.0))
        throw std::invalid_argument("eta_to_sigmaE: beta, N, d must be > 0");
    CrossSections cs;
    cs.sigma_E = eta_E / (beta * beta * N_per_m3 * d_m);
    cs.delta_E = cs.sigma_E * A_E_m2 * T_E_s;
    return cs;
}

} // namespace subphot

#endif
