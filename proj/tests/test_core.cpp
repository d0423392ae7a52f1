#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "subphot/constants.hpp"
#include "subphot/material.hpp"
#include "subphot/units.hpp"

using namespace subphot;
using Catch::Approx;

TEST_CASE("stored constants agree with their derivations") {
    const auto& pc = constants();
    CHECK(pc.r0 == Approx(pc.classical_electron_radius_derived()).epsilon(1e-6));
    CHECK(pc.fowler_A == Approx(pc.fowler_A_derived()).epsilon(1e-9));
}

TEST_CASE("ev <-> wavelength conversions") {
    CHECK(ev_to_wavelength_nm(2.1) == Approx(590.4).epsilon(1e-3));
    CHECK(ev_to_wavelength_nm(1.0) == Approx(1239.8).epsilon(1e-3));

    // exact inverse over a broad sweep
    for (double ev : {0.05, 0.5, 1.0, 1.47, 2.1, 5.0, 100.0}) {
        double back = wavelength_nm_to_ev(ev_to_wavelength_nm(ev));
        CHECK(back == Approx(ev).epsilon(1e-12));
    }
    CHECK_THROWS_AS(ev_to_wavelength_nm(0.0), std::invalid_argument);
    CHECK_THROWS_AS(ev_to_wavelength_nm(-1.0), std::invalid_argument);
}

TEST_CASE("spectral point consistency") {
    auto s = SpectralPoint::from_wavelength_nm(800.0);
    CHECK(s.photon_energy_ev == Approx(1.5498).epsilon(1e-3));
    CHECK(s.wavelength_nm * s.photon_energy_ev == Approx(hc_over_e_nm_ev()).epsilon(1e-4));
    CHECK(s.angular_frequency ==
          Approx(2.0 * M_PI * constants().c / 800e-9).epsilon(1e-12));
    auto s2 = SpectralPoint::from_omega(s.angular_frequency);
    CHECK(s2.wavelength_nm == Approx(800.0).epsilon(1e-12));
}

TEST_CASE("responsivity <-> quantum efficiency") {
    // CPM MP942 pairing at 1064 nm
    CHECK(responsivity_to_qe(5.8e-16, 1064.0) == Approx(6.76e-16).epsilon(2e-3));
    // conversion factor is unity at hc/e nm
    double lam1 = hc_over_e_nm_ev();
    CHECK(responsivity_to_qe(3.3e-12, lam1) == Approx(3.3e-12).epsilon(1e-12));
    // thick-Na row at 845 nm
    CHECK(responsivity_to_qe(5.65e-19, 845.0) == Approx(8.29e-19).epsilon(1e-3));
    CHECK_THROWS_AS(responsivity_to_qe(1.0, 0.0), std::invalid_argument);

    double factor = hc_over_e_nm_ev() / 1064.0;
    CHECK(factor == Approx(1.165).epsilon(5e-3));
    // published eta/R pairing 6.7e-16 / 5.8e-16 within 1%
    CHECK(factor == Approx(6.7e-16 / 5.8e-16).epsilon(1e-2));

    for (double r : {1e-18, 3.1e-10, 0.085}) {
        double rt = qe_to_responsivity(responsivity_to_qe(r, 845.0), 845.0);
        CHECK(rt == Approx(r).epsilon(1e-12));
    }
}

TEST_CASE("max kinetic energy") {
    auto reg = builtin_materials();
    const auto& cs = reg.get("CsK2Sb");
    CHECK(max_kinetic_energy_ev(2, 1.55, cs) == Approx(1.00).margin(1e-9));
    CHECK(max_kinetic_energy_ev(1, 1.55, cs) == Approx(-0.55).margin(1e-9));
    // TPP window: E_g < hnu < W < 2 hnu
    double hnu = 1.55;
    CHECK(joule_to_ev(*cs.E_g) < hnu);
    CHECK(hnu < cs.threshold_ev());
    CHECK(cs.threshold_ev() < 2 * hnu);
    CHECK_THROWS_AS(max_kinetic_energy_ev(3, 1.0, cs), std::invalid_argument);
    CHECK_THROWS_AS(max_kinetic_energy_ev(2, 0.0, cs), std::invalid_argument);
}

TEST_CASE("builtin registry") {
    auto reg = builtin_materials();
    const auto& cs = reg.get("CsK2Sb");
    CHECK(cs.threshold_ev() == Approx(2.1).margin(1e-9));
    CHECK(*cs.xi == Approx(4.5e-52).epsilon(1e-12));
    CHECK(joule_to_ev(*cs.E_g + *cs.chi) == Approx(joule_to_ev(*cs.W_ion)).margin(1e-9));

    CHECK_THROWS_WITH(reg.get("unobtainium"), Catch::Matchers::ContainsSubstring("not found"));

    const auto& na = reg.get("Na");
    CHECK(na.kind == MaterialKind::metal);
    // k_F consistency with E_F; the tabulated pair differs by 2.8%, so the
    // check runs at 3%
    double kf = std::sqrt(2.0 * constants().m * *na.E_F) / constants().hbar;
    CHECK(kf == Approx(*na.k_F).epsilon(0.03));

    CHECK(reg.get("Na2KSb").threshold_ev() == Approx(2.0).margin(1e-9));
    CHECK(reg.get("Cs3Sb").threshold_ev() == Approx(2.0).margin(1e-9));
}

TEST_CASE("registry parse failures name the offense") {
    MaterialRegistry reg;
    CHECK_THROWS_WITH(reg.load_string("[material.x]\nnonsense_key = 1\n"),
                      Catch::Matchers::ContainsSubstring("unknown key"));
    CHECK_THROWS_WITH(reg.load_string("[material.x]\nbeta = 2.0\n"),
                      Catch::Matchers::ContainsSubstring("beta"));
    CHECK_THROWS_WITH(
        reg.load_string("[material.x]\nkind = semiconductor\nE_g = 1.0\nchi = 1.0\nW_ion = 2.5\n"),
        Catch::Matchers::ContainsSubstring("W_ion"));
    CHECK_THROWS_WITH(reg.load_string("beta = 0.5\n"),
                      Catch::Matchers::ContainsSubstring("section"));
    CHECK_THROWS_WITH(reg.load_string("[material.x]\nd = oops\n"),
                      Catch::Matchers::ContainsSubstring("bad numeric value"));
}

TEST_CASE("registry serialize/parse round trip") {
    auto reg = builtin_materials();
    std::string text = reg.serialize();
    MaterialRegistry reg2;
    reg2.load_string(text);
    REQUIRE(reg2.names() == reg.names());
    for (const auto& name : reg.names()) {
        const auto& a = reg.get(name);
        const auto& b = reg2.get(name);
        CHECK(a.kind == b.kind);
        auto same = [&](const std::optional<double>& x, const std::optional<double>& y) {
            REQUIRE(x.has_value() == y.has_value());
            if (x) CHECK(*x == Approx(*y).epsilon(1e-9));
        };
        same(a.E_g, b.E_g);
        same(a.W_ion, b.W_ion);
        same(a.W_work, b.W_work);
        same(a.E_F, b.E_F);
        same(a.k_F, b.k_F);
        same(a.beta, b.beta);
        same(a.d, b.d);
        same(a.N, b.N);
        same(a.xi, b.xi);
        same(a.kappa_j, b.kappa_j);
        same(a.E_j_min, b.E_j_min);
        same(a.E_j_max, b.E_j_max);
        same(a.E_c, b.E_c);
        same(a.k_i_max, b.k_i_max);
        same(a.E_i_max, b.E_i_max);
    }
}

TEST_CASE("missing optional fields fail loudly") {
    auto reg = builtin_materials();
    const auto& cs3 = reg.get("Cs3Sb");
    CHECK_THROWS_WITH(cs3.require(cs3.xi, "xi"), Catch::Matchers::ContainsSubstring("xi"));
    CHECK_THROWS_WITH(cs3.require(cs3.k_F, "k_F"), Catch::Matchers::ContainsSubstring("k_F"));
}

TEST_CASE("material registry rejects foreign section headers") {
    MaterialRegistry reg;
    CHECK_THROWS_WITH(reg.load_string("[absorber.x]\nsigma_2p = 1\n"),
                      Catch::Matchers::ContainsSubstring("material"));
}
