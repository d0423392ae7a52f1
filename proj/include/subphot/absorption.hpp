#ifndef SUBPHOT_ABSORPTION_HPP
#define SUBPHOT_ABSORPTION_HPP

#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "subphot/material.hpp"
#include "subphot/units.hpp"

namespace subphot {

// Per-absorber cross sections and linewidths for the particle model of
// subthreshold absorption and its quantum prefactors.
struct AbsorberSpec {
    std::string name;
    double sigma_B = 0.0;    // Boltzmann-tail cross section (m^2)
    double sigma_1 = 0.0;    // one-photon interaction cross section (m^2)
    double sigma_2p = 0.0;   // conventional TPA cross section (m^4 s)
    double T_A = 0.0;        // intermediate-state lifetime (s)
    std::optional<double> gamma_fg;        // two-photon transition linewidth (rad/s)
    std::optional<double> pair_bandwidth;  // marginal pair bandwidth B (rad/s)
    std::optional<double> pump_bandwidth;  // pump bandwidth (rad/s)

    void validate() const {
        if (sigma_B < 0.0 || sigma_1 < 0.0 || sigma_2p < 0.0 || T_A < 0.0)
            throw std::runtime_error("absorber " + name + ": negative parameter");
        // sigma^(2) ~ sigma_1^2 T_A is a heuristic; flag gross inconsistency only
        if (sigma_1 > 0.0 && T_A > 0.0 && sigma_2p > 0.0) {
            double heuristic = sigma_1 * sigma_1 * T_A;
            double ratio = sigma_2p / heuristic;
            if (ratio < 0.5 || ratio > 1.5)
                throw std::runtime_error("absorber " + name +
                                         ": sigma_2p inconsistent with sigma_1^2 T_A beyond 50% (field sigma_2p)");
        }
    }
};

enum class EtpaRegime { auto_select, broad, narrow, tight };

// Effective entangled-pair cross section from the conventional TPA cross
// section. Broad linewidth: sigma_E = sigma2/(A_E T_E). Narrow linewidth:
// an extra gamma_fg/B factor. Tight focusing/timing: sigma2/(sigma_1 T_A).
// auto_select follows gamma_fg/B with a linear-in-log blend across the
// documented window [0.1, 10].
inline double sigmaE_from_sigma2(const AbsorberSpec& ab, double A_E, double T_E,
                                 EtpaRegime regime = EtpaRegime::auto_select) {
    if (!(A_E > 0.0) || !(T_E > 0.0))
        throw std::invalid_argument("sigmaE_from_sigma2: A_E and T_E must be > 0");
    const double broad_val = ab.sigma_2p / (A_E * T_E);
    switch (regime) {
    case EtpaRegime::tight:
        if (!(ab.sigma_1 > 0.0 && ab.T_A > 0.0))
            throw std::invalid_argument("sigmaE_from_sigma2: tight regime needs sigma_1 and T_A");
        return ab.sigma_2p / (ab.sigma_1 * ab.T_A);
    case EtpaRegime::broad:
        return broad_val;
    case EtpaRegime::narrow: {
        if (!ab.gamma_fg || !ab.pair_bandwidth)
            throw std::invalid_argument("sigmaE_from_sigma2: narrow regime needs gamma_fg and pair bandwidth");
        return broad_val * (*ab.gamma_fg / *ab.pair_bandwidth);
    }
    case EtpaRegime::auto_select: {
        if (!ab.gamma_fg || !ab.pair_bandwidth) return broad_val;
        double r = *ab.gamma_fg / *ab.pair_bandwidth;
        if (r >= 10.0) return broad_val;
        if (r <= 0.1) return broad_val * r;
        // alpha interpolates between its window-edge values 0.1 and 1,
        // linear in log10(r), so it stays monotone and continuous
        double t = (std::log10(r) + 1.0) / 2.0;  // 0 at r=0.1, 1 at r=10
        double alpha = std::exp((1.0 - t) * std::log(0.1));
        return broad_val * alpha;
    }
    }
    throw std::logic_error("sigmaE_from_sigma2: unknown regime");
}

// Additive decomposition of the subthreshold absorption rate.
struct AbsorptionBreakdown {
    double R_B = 0.0;   // Boltzmann-tail (1/s)
    double R_E = 0.0;   // entangled-two-photon (1/s)
    double R_C = 0.0;   // cousin/singleton-pair TPA (1/s)
    double R_D = 0.0;   // dark/background (1/s)
    double total = 0.0;
    std::string regime_flags;
};

// R_B = sigma_B (T0 phi); R_E = sigma_E (T0^2 phi); R_C = sigma2 Gamma (T0 phi)^2
inline AbsorptionBreakdown particle_rates(const AbsorberSpec& ab, double sigma_E,
                                          double flux_density_source, double T0,
                                          double gamma_pulse, double R_dark = 0.0) {
    if (flux_density_source < 0.0)
        throw std::invalid_argument("particle_rates: negative flux density");
    if (!(T0 > 0.0 && T0 <= 1.0))
        throw std::invalid_argument("particle_rates: T0 must lie in (0,1]");
    if (!(gamma_pulse >= 1.0))
        throw std::invalid_argument("particle_rates: Gamma must be >= 1");
    AbsorptionBreakdown out;
    const double phi_at = T0 * flux_density_source;
    out.R_B = ab.sigma_B * phi_at;
    out.R_E = sigma_E * T0 * T0 * flux_density_source;
    out.R_C = ab.sigma_2p * gamma_pulse * phi_at * phi_at;
    out.R_D = R_dark;
    out.total = out.R_B + out.R_E + out.R_C + out.R_D;
    return out;
}

struct CrossoverFlux {
    double phi_EC = 0.0;  // photons/m^2 s, at the absorber
    double phi_BC = 0.0;
    double ratio = 0.0;   // phi_EC / phi_BC
};

// phi_EC = (sigma_B + T0 sigma_E)/(sigma2 Gamma); phi_BC = sigma_B/(sigma2 Gamma)
inline CrossoverFlux crossover_flux(const AbsorberSpec& ab, double sigma_E, double T0,
                                    double gamma_pulse) {
    if (!(ab.sigma_2p > 0.0))
        throw std::invalid_argument("crossover_flux: sigma_2p must be > 0");
    if (!(gamma_pulse >= 1.0))
        throw std::invalid_argument("crossover_flux: Gamma must be >= 1");
    CrossoverFlux out;
    out.phi_EC = (ab.sigma_B + T0 * sigma_E) / (ab.sigma_2p * gamma_pulse);
    out.phi_BC = ab.sigma_B / (ab.sigma_2p * gamma_pulse);
    out.ratio = ab.sigma_B > 0.0 ? 1.0 + T0 * sigma_E / ab.sigma_B
                                 : std::numeric_limits<double>::infinity();
    return out;
}

// T_E = T0 / (Gamma A_E phi_EC): inversion of the Boltzmann-free crossover
inline double entanglement_time_from_crossover(double phi_EC, double A_E, double T0,
                                               double gamma_pulse) {
    if (!(phi_EC > 0.0) || !(A_E > 0.0) || !(T0 > 0.0) || !(gamma_pulse > 0.0))
        throw std::invalid_argument("entanglement_time_from_crossover: inputs must be > 0");
    return T0 / (gamma_pulse * A_E * phi_EC);
}

// Bright-squeezed-vacuum limit: R_C = g2 sigma2 Gamma phi^2
inline double bsv_tpa_rate(double g2, double sigma_2p, double gamma_pulse,
                           double flux_density) {
    if (!(g2 >= 1.0)) throw std::invalid_argument("bsv_tpa_rate: g2 must be >= 1");
    return g2 * sigma_2p * gamma_pulse * flux_density * flux_density;
}

// Absorber records share the registry file format under [absorber.<name>];
// sigma values in SI, with GM accepted via the _gm suffix (1 GM = 1e-58 m^4 s).
class AbsorberRegistry {
public:
    const AbsorberSpec& get(const std::string& name) const {
        auto it = absorbers_.find(name);
        if (it == absorbers_.end()) throw std::runtime_error("absorber not found: " + name);
        return it->second;
    }
    bool contains(const std::string& name) const { return absorbers_.count(name) != 0; }
    void put(AbsorberSpec a) { a.validate(); absorbers_[a.name] = std::move(a); }
    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& kv : absorbers_) out.push_back(kv.first);
        return out;
    }

    void load(std::istream& in) {
        std::string line;
        AbsorberSpec cur;
        bool open = false;
        int lineno = 0;
        auto flush = [&] {
            if (open) put(cur);
            cur = AbsorberSpec{};
        };
        while (std::getline(in, line)) {
            ++lineno;
            std::string s = detail::trim(line);
            if (s.empty() || s[0] == '#' || s[0] == ';') continue;
            if (s.front() == '[') {
                if (s.back() != ']')
                    throw std::runtime_error("absorber registry line " + std::to_string(lineno) + ": unterminated section header");
                flush();
                std::string sect = s.substr(1, s.size() - 2);
                const std::string prefix = "absorber.";
                if (sect.rfind(prefix, 0) != 0)
                    throw std::runtime_error("absorber registry line " + std::to_string(lineno) + ": expected [absorber.<name>]");
                cur.name = detail::trim(sect.substr(prefix.size()));
                open = true;
                continue;
            }
            auto eq = s.find('=');
            if (eq == std::string::npos || !open)
                throw std::runtime_error("absorber registry line " + std::to_string(lineno) + ": expected key = value inside a section");
            std::string key = detail::trim(s.substr(0, eq));
            std::string val = detail::trim(s.substr(eq + 1));
            double x = detail::parse_number(val, cur.name + "." + key);
            if (key == "sigma_B") cur.sigma_B = x;
            else if (key == "sigma_1") cur.sigma_1 = x;
            else if (key == "sigma_2p") cur.sigma_2p = x;
            else if (key == "sigma_2p_gm") cur.sigma_2p = gm_to_si(x);
            else if (key == "T_A") cur.T_A = x;
            else if (key == "gamma_fg") cur.gamma_fg = x;
            else if (key == "pair_bandwidth") cur.pair_bandwidth = x;
            else if (key == "pump_bandwidth") cur.pump_bandwidth = x;
            else
                throw std::runtime_error("absorber registry line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        flush();
    }

    void load_string(const std::string& text) {
        std::istringstream in(text);
        load(in);
    }

private:
    std::map<std::string, AbsorberSpec> absorbers_;
};

// sigma_2p values chosen so that sigma_E = sigma_2p/(A_E T_E) lands on the
// published per-absorber estimates at the quoted A_E T_E normalizations.
inline const char* builtin_absorber_text() {
    return R"(# Built-in absorber records.

[absorber.hydrogen_1s2s]
sigma_2p = 1.8e-40
T_A = 1.0e-15

[absorber.rhodamine6g]
sigma_2p_gm = 51
T_A = 1.0e-15
)";
}

inline AbsorberRegistry builtin_absorbers() {
    AbsorberRegistry reg;
    reg.load_string(builtin_absorber_text());
    return reg;
}

} // namespace subphot

#endif
