#pragma once

// Deterministic random system builders shared by the unit tests and the
// acceptance suite.  Every generator takes an explicit engine so a failing
// draw can be replayed from its seed.

#include <complex>
#include <random>
#include <vector>

#include "heff/heff.hpp"

namespace gen {

using heff::Complex;
using Rng = std::mt19937_64;

inline double uni(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Complex unic(Rng& rng, double scale) {
    return {uni(rng, -scale, scale), uni(rng, -scale, scale)};
}

// --- driven TLS ---------------------------------------------------------

// Two levels, one quantized mode detuned by `delta` below the bare gap.
inline heff::LevelScheme tls_scheme(double gap, double gamma_e = 0.0) {
    heff::LevelScheme s;
    s.levels.push_back({"g", 0.0, 0.0, false});
    s.levels.push_back({"e", gap, gamma_e, gamma_e > 0.0});
    s.transitions.push_back({0, 1, 0.0});
    return s;
}

inline heff::CoupledSystem tls_system(double gap, double delta, Complex g,
                                      heff::Regime regime = heff::Regime::rwa,
                                      double gamma_e = 0.0) {
    const heff::LevelScheme s = tls_scheme(gap, gamma_e);
    std::vector<heff::DriveSpec> drives{
        heff::DriveSpec::quantized_mode(0, g, regime == heff::Regime::rwa ? gap - delta : gap)};
    return heff::build_coupled_system(s, drives, regime);
}

// --- four-level cross-Kerr scheme ----------------------------------------

// Levels: ground 0, decaying excited 1 with mode a exactly on resonance,
// metastable 2 driven to 1 by a resonant classical field Omega, decaying
// excited 3 reached from 2 by mode b detuned by `delta`.
struct SiDraw {
    heff::LevelScheme scheme;
    std::vector<heff::DriveSpec> drives;
    double delta = 0.0;   // mode-b detuning
    double omega = 0.0;   // classical Rabi amplitude Omega
    double lambda = 0.0;  // mode-a coupling
    double nu = 0.0;      // mode-b coupling
    double gamma1 = 0.0;
    double gamma3 = 0.0;
};

inline SiDraw make_si(double e1, double e2, double omega_b, double delta, double omega,
                      double lambda, double nu, double gamma1, double gamma3) {
    SiDraw d;
    d.delta = delta;
    d.omega = omega;
    d.lambda = lambda;
    d.nu = nu;
    d.gamma1 = gamma1;
    d.gamma3 = gamma3;
    const double e3 = e2 + delta + omega_b;
    d.scheme.levels.push_back({"g", 0.0, 0.0, false});
    d.scheme.levels.push_back({"e1", e1, gamma1, true});
    d.scheme.levels.push_back({"m", e2, 0.0, false});
    d.scheme.levels.push_back({"e3", e3, gamma3, true});
    d.scheme.transitions.push_back({0, 1, 0.0});  // mode a
    d.scheme.transitions.push_back({2, 1, 0.0});  // classical drive
    d.scheme.transitions.push_back({2, 3, 0.0});  // mode b
    d.drives.push_back(heff::DriveSpec::quantized_mode(0, lambda, e1));
    d.drives.push_back(heff::DriveSpec::classical_rwa(1, omega));  // resonant
    d.drives.push_back(heff::DriveSpec::quantized_mode(2, nu, omega_b));
    return d;
}

inline SiDraw random_si(Rng& rng) {
    for (;;) {
        const double delta = uni(rng, 0.25, 0.8);
        const double omega = uni(rng, 0.4, 1.4);
        if (std::abs(delta - omega) < 0.1) continue;
        const double e1 = uni(rng, 2.0, 4.0);
        const double e2 = uni(rng, 0.6, e1 - 0.6);
        const double omega_b = uni(rng, 1.5, 3.5);
        const double cap = 0.05 * std::min(omega, delta);
        const double lambda = cap * uni(rng, 0.25, 1.0);
        const double nu = cap * uni(rng, 0.25, 1.0);
        return make_si(e1, e2, omega_b, delta, omega, lambda, nu, uni(rng, 0.01, 0.2),
                       uni(rng, 0.01, 0.2));
    }
}

// --- random multi-level schemes -------------------------------------------

// Chain of 3-4 levels in the rotating frame: quantized drive on 0-1, a second
// drive (quantized or classical) on 1-2, optionally a third on 2-3.  Drives sit
// on a tree of transitions, so any frequency assignment is consistent.
inline heff::CoupledSystem random_rwa_system(Rng& rng) {
    for (;;) {
        const int n_levels = 3 + int(rng() % 2);
        heff::LevelScheme s;
        double e = 0.0;
        s.levels.push_back({"l0", 0.0, 0.0, false});
        for (int i = 1; i < n_levels; ++i) {
            e += uni(rng, 2.0, 4.0);
            s.levels.push_back({"l" + std::to_string(i), e, 0.0, false});
        }
        for (int i = 0; i + 1 < n_levels; ++i) s.transitions.push_back({i, i + 1, 0.0});

        std::vector<heff::DriveSpec> drives;
        auto detuned = [&](int t) {
            const double sign = (rng() % 2) ? 1.0 : -1.0;
            return s.bare_gap(t) - sign * uni(rng, 0.4, 1.2);
        };
        drives.push_back(heff::DriveSpec::quantized_mode(0, unic(rng, 1.0), detuned(0)));
        if (rng() % 2)
            drives.push_back(heff::DriveSpec::quantized_mode(1, unic(rng, 1.0), detuned(1)));
        else
            drives.push_back(heff::DriveSpec::classical_rwa(1, unic(rng, 0.5), detuned(1)));
        if (n_levels == 4 && (rng() % 2))
            drives.push_back(heff::DriveSpec::quantized_mode(2, unic(rng, 1.0), detuned(2)));

        try {
            heff::CoupledSystem sys = heff::build_coupled_system(s, drives, heff::Regime::rwa);
            double min_gap = 1e300, min_sep = 1e300;
            const auto& en = sys.basis.energies;
            for (int i = 1; i < en.size(); ++i) {
                min_gap = std::min(min_gap, std::abs(en(i) - en(0)));
                for (int j = 1; j < i; ++j) min_sep = std::min(min_sep, std::abs(en(i) - en(j)));
            }
            if (min_gap < 0.25 || min_sep < 0.15) continue;
            return sys;
        } catch (const heff::PhysicsError&) {
        }
    }
}

// 3-4 levels with a single quantized mode in the bare picture, optionally
// dressed by a classical standing drive.
inline heff::CoupledSystem random_bare_system(Rng& rng) {
    for (;;) {
        const int n_levels = 3 + int(rng() % 2);
        heff::LevelScheme s;
        double e = 0.0;
        s.levels.push_back({"l0", 0.0, 0.0, false});
        for (int i = 1; i < n_levels; ++i) {
            e += uni(rng, 2.0, 5.0);
            s.levels.push_back({"l" + std::to_string(i), e, 0.0, false});
        }
        for (int i = 0; i + 1 < n_levels; ++i) s.transitions.push_back({i, i + 1, 0.0});

        std::vector<heff::DriveSpec> drives;
        const int mode_t = int(rng() % size_t(n_levels - 1));
        drives.push_back(heff::DriveSpec::quantized_mode(mode_t, std::polar(1.0, uni(rng, 0.0, 6.28)),
                                                         s.bare_gap(mode_t)));
        if (rng() % 2) {
            const int drive_t = int(rng() % size_t(n_levels - 1));
            drives.push_back(heff::DriveSpec::classical_bare(drive_t, uni(rng, 0.2, 0.6)));
        }
        try {
            heff::CoupledSystem sys = heff::build_coupled_system(s, drives, heff::Regime::bare);
            double min_gap = 1e300;
            const auto& en = sys.basis.energies;
            for (int i = 1; i < en.size(); ++i) min_gap = std::min(min_gap, std::abs(en(i) - en(0)));
            if (min_gap < 1.0) continue;
            return sys;
        } catch (const heff::PhysicsError&) {
        }
    }
}

// --- raw operator-valued systems -------------------------------------------

struct RawSystem {
    Eigen::VectorXd energies;
    heff::OperatorValuedMatrix V;
    heff::OperatorValuedMatrix X;

    RawSystem(int dim, int n_modes) : V(dim, n_modes), X(dim, n_modes) {}
};

// Hermitian-structured V, X with zero diagonals and random degree-1 mode
// content; energies pairwise separated.
inline RawSystem random_raw_system(Rng& rng, int dim = 4, int n_modes = 2) {
    RawSystem sys(dim, n_modes);
    sys.energies.resize(dim);
    double e = uni(rng, -0.5, 0.5);
    for (int i = 0; i < dim; ++i) {
        sys.energies(i) = e;
        e += uni(rng, 0.4, 1.6);
    }
    auto random_entry = [&]() {
        heff::ModePolynomial p(n_modes);
        for (int m = 0; m < n_modes; ++m) {
            p += unic(rng, 1.0) * heff::ModePolynomial::annihilate(m, n_modes);
            p += unic(rng, 1.0) * heff::ModePolynomial::create(m, n_modes);
        }
        return p;
    };
    for (int j = 0; j < dim; ++j)
        for (int k = j + 1; k < dim; ++k) {
            sys.V.at(j, k) = random_entry();
            sys.V.at(k, j) = sys.V.at(j, k).dagger();
            sys.X.at(j, k) = random_entry();
            sys.X.at(k, j) = sys.X.at(j, k).dagger();
        }
    return sys;
}

// Single-emitter interaction for collective-matrix checks: M levels, zero
// diagonal, Hermitian structure.
inline heff::OperatorValuedMatrix random_single_interaction(Rng& rng, int dim, int n_modes) {
    heff::OperatorValuedMatrix V(dim, n_modes);
    for (int j = 0; j < dim; ++j)
        for (int k = j + 1; k < dim; ++k) {
            heff::ModePolynomial p(n_modes);
            for (int m = 0; m < n_modes; ++m) {
                p += unic(rng, 1.0) * heff::ModePolynomial::annihilate(m, n_modes);
                p += unic(rng, 1.0) * heff::ModePolynomial::create(m, n_modes);
            }
            V.at(j, k) = p;
            V.at(k, j) = p.dagger();
        }
    return V;
}

inline Eigen::VectorXd random_energies(Rng& rng, int dim, double min_gap = 0.5) {
    Eigen::VectorXd en(dim);
    en(0) = 0.0;
    for (int i = 1; i < dim; ++i) en(i) = en(i - 1) + min_gap + uni(rng, 0.0, 1.5);
    return en;
}

}  // namespace gen
