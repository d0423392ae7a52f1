#ifndef SUBPHOT_SOURCES_HPP
#define SUBPHOT_SOURCES_HPP

#include <cmath>
#include <optional>
#include <stdexcept>

#include "subphot/constants.hpp"
#include "subphot/units.hpp"
#include "subphot/waveform.hpp"

namespace subphot {

// g2 = (2M-1)/M for M equal-power random-phase temporal modes
inline double g2_modes(long long mode_count) {
    if (mode_count < 1)
        throw std::invalid_argument("g2_modes: mode count must be >= 1");
    return (2.0 * double(mode_count) - 1.0) / double(mode_count);
}

struct CoherentSource {
    SpectralPoint spectrum;
    Waveform waveform;
    long long mode_count = 1;
    std::optional<double> g2_override;

    double g2() const {
        if (g2_override) {
            if (*g2_override < 1.0)
                throw std::invalid_argument("CoherentSource: g2 must be >= 1");
            return *g2_override;
        }
        return g2_modes(mode_count);
    }
};

// SPDC pair source. The nondegeneracy ratio r = omega_1^0/omega_p fixes
// both downconverted frequencies through omega_1^0 + omega_2^0 = omega_p.
struct EntangledSource {
    SpectralPoint pump;
    double nondegeneracy = 0.5;      // r in (0,1)
    double T_E = 0.0;                // entanglement time (s)
    double A_E = 0.0;                // entanglement area (m^2)
    double source_power = 0.0;       // P_E (W), 0 = unset
    double pump_power = 0.0;         // P_P (W), 0 = unset
    double spdc_efficiency = 0.0;    // P_E/P_P, 0 = unset
    Waveform waveform = Waveform::cw_mean(1.0);

    void validate() const {
        if (!(nondegeneracy > 0.0 && nondegeneracy < 1.0))
            throw std::invalid_argument("EntangledSource: nondegeneracy must lie in (0,1)");
        if (!(T_E > 0.0)) throw std::invalid_argument("EntangledSource: T_E must be > 0");
        if (!(A_E > 0.0)) throw std::invalid_argument("EntangledSource: A_E must be > 0");
        if (source_power > 0.0 && pump_power > 0.0 && spdc_efficiency > 0.0) {
            double eta = source_power / pump_power;
            if (std::abs(eta - spdc_efficiency) > 0.01 * spdc_efficiency)
                throw std::invalid_argument("EntangledSource: P_E/P_P inconsistent with spdc_efficiency");
        }
    }

    double omega1() const { return nondegeneracy * pump.angular_frequency; }
    double omega2() const { return (1.0 - nondegeneracy) * pump.angular_frequency; }
    double signal_wavelength_nm() const { return omega_to_wavelength_nm(omega1()); }
    // degenerate-pair wavelength (omega_p/2), the reference for reported responsivities
    double degenerate_wavelength_nm() const {
        return omega_to_wavelength_nm(0.5 * pump.angular_frequency);
    }
};

struct SpdcOutput {
    double source_power = 0.0;  // W
    double pair_flux = 0.0;     // pairs/s
};

inline SpdcOutput spdc_output(double pump_power_w, double spdc_efficiency,
                              const SpectralPoint& pump) {
    if (pump_power_w < 0.0 || spdc_efficiency < 0.0)
        throw std::invalid_argument("spdc_output: inputs must be nonnegative");
    SpdcOutput out;
    out.source_power = pump_power_w * spdc_efficiency;
    double pump_photon = photon_energy_joule_at(pump.wavelength_nm);
    out.pair_flux = out.source_power / pump_photon;
    return out;
}

// Transmittance, geometry and detection factors along the beam path.
struct OpticalPath {
    double transmittance = 1.0;            // T, includes adjustable attenuation
    double intrinsic_transmittance = 1.0;  // T0, fixed elements after the source
    double illumination_area = 0.0;        // A (m^2)
    double lockin_fraction = 1.0;          // F, = 1 for direct digital detection
    double pulse_factor = 1.0;             // Gamma

    void validate() const {
        if (!(transmittance > 0.0 && transmittance <= 1.0))
            throw std::invalid_argument("OpticalPath: transmittance must lie in (0,1]");
        if (!(intrinsic_transmittance > 0.0 && intrinsic_transmittance <= 1.0))
            throw std::invalid_argument("OpticalPath: intrinsic transmittance must lie in (0,1]");
        if (!(illumination_area > 0.0))
            throw std::invalid_argument("OpticalPath: illumination area must be > 0");
        if (!(lockin_fraction > 0.0 && lockin_fraction <= 1.0))
            throw std::invalid_argument("OpticalPath: lock-in fraction must lie in (0,1]");
        if (!(pulse_factor >= 1.0))
            throw std::invalid_argument("OpticalPath: pulse factor must be >= 1");
    }
};

// Twin pairs, unpaired survivors, and the combined photon budget.
struct FluxBreakdown {
    double pair_flux = 0.0;         // intact pairs/s
    double singleton_flux = 0.0;    // unpaired survivors/s
    double total_photon_flux = 0.0; // photons/s = 2*pair + singleton
    double photon_flux_density = 0.0;  // photons/m^2 s (0 if no area attached)

    static FluxBreakdown pairs(double pairs_per_s, double area = 0.0) {
        FluxBreakdown fb;
        fb.pair_flux = pairs_per_s;
        fb.total_photon_flux = 2.0 * pairs_per_s;
        fb.photon_flux_density = area > 0.0 ? fb.total_photon_flux / area : 0.0;
        return fb;
    }
};

// Bernoulli deletion with per-photon survival T: a pair survives intact
// with probability T^2; a pair losing exactly one member leaves a
// singleton behind.
inline FluxBreakdown apply_loss(const FluxBreakdown& fb, double transmittance) {
    if (!(transmittance >= 0.0 && transmittance <= 1.0))
        throw std::invalid_argument("apply_loss: transmittance must lie in [0,1]");
    const double t = transmittance;
    FluxBreakdown out;
    out.pair_flux = t * t * fb.pair_flux;
    out.singleton_flux = t * fb.singleton_flux + 2.0 * t * (1.0 - t) * fb.pair_flux;
    out.total_photon_flux = t * fb.total_photon_flux;
    out.photon_flux_density = t * fb.photon_flux_density;
    return out;
}

} // namespace subphot

#endif
