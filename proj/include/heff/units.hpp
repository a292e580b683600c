#pragma once
// SI conversions between cavity-mode coupling rates and traveling-wave
// quantities: Rabi frequencies from beam power or pulse photon number, the
// rate-constant -> nonlinear-susceptibility substitution, and the refractive
// index of a pure chi3 medium.

#include <heff/errors.hpp>

#include <cmath>
#include <string>
#include <vector>

namespace heff {

namespace constants {
inline constexpr double hbar = 1.054571817e-34;       // J s (CODATA 2018)
inline constexpr double epsilon0 = 8.8541878128e-12;  // F / m
inline constexpr double c_light = 299792458.0;        // m / s
inline constexpr double debye = 3.33564095e-30;       // C m
}  // namespace constants

struct FieldUnits {
  double dipole = 0.0;        // C m
  double omega = 0.0;         // rad / s
  double power = 0.0;         // W, continuous beam
  double area = 0.0;          // m^2, beam cross section
  double pulse_length = 0.0;  // m
  double photon_number = 0.0;
  double mode_volume = 0.0;   // m^3; defaults to pulse_length * area
  double density = 0.0;       // m^-3
};

struct RabiRates {
  double omega_rabi = 0.0;  // rad / s
  double g = 0.0;           // single-photon rate, rad / s
};

inline double intensity_from_amplitude(double field_amplitude) {
  return 0.5 * constants::epsilon0 * constants::c_light * field_amplitude * field_amplitude;
}

inline double amplitude_from_intensity(double intensity) {
  if (intensity < 0.0) throw ConfigError("amplitude_from_intensity: negative intensity");
  return std::sqrt(2.0 * intensity / (constants::epsilon0 * constants::c_light));
}

// pulse form: g = mu sqrt(2 omega / (eps0 hbar V)), Omega = g sqrt(n_p)
inline RabiRates rabi_from_pulse(double dipole, double omega, double photon_number,
                                 double mode_volume) {
  if (!(omega > 0.0) || !(mode_volume > 0.0))
    throw ConfigError("rabi_from_pulse: frequency and mode volume must be positive");
  if (photon_number < 0.0) throw ConfigError("rabi_from_pulse: negative photon number");
  RabiRates out;
  out.g = std::abs(dipole) *
          std::sqrt(2.0 * omega / (constants::epsilon0 * constants::hbar * mode_volume));
  out.omega_rabi = out.g * std::sqrt(photon_number);
  return out;
}

// beam form: Omega = (mu/hbar) sqrt(2P / (eps0 c A))
inline double rabi_from_power(double dipole, double power, double area) {
  if (!(area > 0.0)) throw ConfigError("rabi_from_power: area must be positive");
  if (power < 0.0) throw ConfigError("rabi_from_power: negative power");
  return std::abs(dipole) / constants::hbar *
         std::sqrt(2.0 * power / (constants::epsilon0 * constants::c_light * area));
}

// Dispatch on the populated fields: pulse geometry (photon number plus a
// resolvable volume) wins, a power + area pair otherwise.
inline RabiRates rabi_from_beam(const FieldUnits& u) {
  const double volume =
      u.mode_volume > 0.0 ? u.mode_volume
                          : (u.pulse_length > 0.0 && u.area > 0.0 ? u.pulse_length * u.area : 0.0);
  if (volume > 0.0 && u.omega > 0.0)
    return rabi_from_pulse(u.dipole, u.omega, u.photon_number, volume);
  if (u.power > 0.0 && u.area > 0.0) {
    RabiRates out;
    out.omega_rabi = rabi_from_power(u.dipole, u.power, u.area);
    if (u.photon_number > 0.0) out.g = out.omega_rabi / std::sqrt(u.photon_number);
    return out;
  }
  throw ConfigError("rabi_from_beam: need either pulse geometry (omega and a volume) "
                    "or beam power and area");
}

// Converts a nonlinear rate constant (expressed through coupling rates lambda_m
// raised to the given per-mode orders) into a susceptibility: substitute
// lambda_m -> |mu_m| / hbar and multiply by hbar / (eps0 V).  The emitter count
// inside the rate becomes the density through n_d = N / V.
inline double chi3_from_kerr(double rate_coefficient, const std::vector<int>& orders,
                             const std::vector<double>& couplings,
                             const std::vector<double>& dipoles, double mode_volume) {
  if (orders.size() != couplings.size() || orders.size() != dipoles.size())
    throw ConfigError("chi3_from_kerr: orders, couplings and dipoles must align");
  if (!(mode_volume > 0.0)) throw ConfigError("chi3_from_kerr: mode volume must be positive");
  double chi = rate_coefficient;
  for (size_t m = 0; m < orders.size(); ++m) {
    if (orders[m] < 0) throw ConfigError("chi3_from_kerr: negative order");
    if (orders[m] == 0) continue;
    if (couplings[m] == 0.0)
      throw ConfigError("chi3_from_kerr: zero coupling with nonzero order for mode " +
                        std::to_string(m));
    chi *= std::pow(std::abs(dipoles[m]) / constants::hbar / couplings[m], orders[m]);
  }
  return chi * constants::hbar / (constants::epsilon0 * mode_volume);
}

inline double refractive_index(double chi3, double field_amplitude) {
  const double arg = 1.0 + chi3 * field_amplitude * field_amplitude / constants::epsilon0;
  if (arg < 0.0)
    throw PhysicsError("refractive_index: chi3 |E|^2 drives the argument negative");
  return std::sqrt(arg);
}

}  // namespace heff
