#pragma once

// Effective field dynamics assembled from a ground-manifold expansion: induced
// Hamiltonian with provenance, resonance filter, projected decay operators,
// Lindblad normal form, and classification of the surviving nonlinearities.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "heff/errors.hpp"
#include "heff/level_scheme.hpp"
#include "heff/polynomial.hpp"
#include "heff/tipt.hpp"

namespace heff {

inline double rate_power(const std::vector<double>& rates, const MultiIndex& J) {
  if (rates.size() != J.size())
    throw std::invalid_argument("rate_power: one rate per perturbation slot");
  double w = 1.0;
  for (size_t p = 0; p < J.size(); ++p) {
    if (!std::isfinite(rates[p]) || rates[p] < 0.0)
      throw ConfigError("rate_power: rates must be finite and nonnegative");
    for (int i = 0; i < J[p]; ++i) w *= rates[p];
  }
  return w;
}

struct AssembledHamiltonian {
  ModePolynomial hamiltonian;                 // induced part; the free field is kept apart
  std::map<Monomial, MultiIndex> provenance;  // lowest-order source of each surviving monomial
};

inline AssembledHamiltonian assemble_hamiltonian(const ExpansionSeries& series,
                                                 const std::vector<double>& rates) {
  if (int(rates.size()) != series.n_slots())
    throw std::invalid_argument("assemble_hamiltonian: one rate per perturbation slot");
  const auto& terms = series.energy_terms();
  if (terms.empty()) throw std::invalid_argument("assemble_hamiltonian: empty series");
  const int n_modes = terms.begin()->second.n_modes();

  ModePolynomial h(n_modes);
  std::map<Monomial, MultiIndex> prov;
  for (const auto& [J, coeff] : terms) {
    ModePolynomial term = coeff;
    term *= rate_power(rates, J);
    term.prune();
    for (const auto& tc : term.terms()) {
      auto it = prov.find(tc.first);
      if (it == prov.end() || total_order(J) < total_order(it->second)) prov[tc.first] = J;
    }
    h += term;
  }
  h.prune();
  if (!h.is_hermitian(1e-9 * std::max(h.max_abs_coeff(), 1e-300)))
    throw InternalError("assemble_hamiltonian: assembled Hamiltonian is not Hermitian");
  for (auto it = prov.begin(); it != prov.end();)
    it = h.terms().count(it->first) ? std::next(it) : prov.erase(it);
  return {std::move(h), std::move(prov)};
}

inline ModePolynomial free_field_hamiltonian(const std::vector<double>& omega) {
  const int n = int(omega.size());
  ModePolynomial h(n);
  for (int m = 0; m < n; ++m) h += omega[size_t(m)] * ModePolynomial::number(m, n);
  return h;
}

// interaction-picture rotation rate of a monomial: sum_m (l_m - r_m) omega_m
inline double rotation_frequency(const Monomial& mono, const std::vector<double>& omega) {
  if (mono.size() != omega.size())
    throw std::invalid_argument("rotation_frequency: mode count mismatch");
  double f = 0.0;
  for (size_t m = 0; m < mono.size(); ++m) f += (mono[m].lower - mono[m].raise) * omega[m];
  return f;
}

inline double default_resonance_tol(const std::vector<double>& omega) {
  double mx = 0.0;
  for (double w : omega) mx = std::max(mx, std::abs(w));
  return 1e-6 * (mx > 0.0 ? mx : 1.0);
}

inline ModePolynomial resonance_filter(const ModePolynomial& poly,
                                       const std::vector<double>& omega, double tol = -1.0) {
  if (int(omega.size()) != poly.n_modes())
    throw std::invalid_argument("resonance_filter: mode count mismatch");
  if (tol < 0.0) tol = default_resonance_tol(omega);
  ModePolynomial out(poly.n_modes());
  for (const auto& [mono, c] : poly.terms())
    if (std::abs(rotation_frequency(mono, omega)) <= tol) out.add_term(mono, c);
  return out;
}

// Projected decay operator Sigma_n = <0|0~><n~|0> on the ground manifold, built from the
// eigenvector coefficients: C_m(t) collects rate-weighted <m_0|0_J> at total order t, the
// bare-basis overlaps are U-row combinations of the C_m, and the product is truncated at
// max_order total.
struct DecayChannel {
  int level = 0;          // bare level index
  double gamma = 0.0;     // bare decay rate
  ModePolynomial sigma;   // projected transition operator (zero polynomial = dark level)
};

inline std::vector<DecayChannel> effective_transition_operators(const CoupledSystem& sys,
                                                                const ExpansionSeries& series,
                                                                int max_order) {
  if (series.level() != 0)
    throw std::invalid_argument("effective_transition_operators: ground expansion required");
  if (max_order < 0 || max_order > series.max_total_order())
    throw std::invalid_argument("effective_transition_operators: order out of range");
  if (series.n_slots() != sys.n_modes())
    throw std::invalid_argument("effective_transition_operators: series/system mismatch");
  const int d = sys.dim();
  const int P = sys.n_modes();
  const int n_modes = series.vector_coeff(0, MultiIndex(size_t(P), 0)).n_modes();
  std::vector<double> rates(static_cast<size_t>(P), 0.0);
  for (int p = 0; p < P; ++p) rates[size_t(p)] = sys.modes[size_t(p)].rate;

  std::vector<std::vector<ModePolynomial>> C(
      size_t(d), std::vector<ModePolynomial>(size_t(max_order) + 1, ModePolynomial(n_modes)));
  for (int t = 0; t <= max_order; ++t)
    for (const MultiIndex& J : indices_of_order(P, t)) {
      const double w = rate_power(rates, J);
      if (w == 0.0) continue;
      for (int m = 0; m < d; ++m) {
        ModePolynomial c = series.vector_coeff(m, J);
        c *= w;
        C[size_t(m)][size_t(t)] += c;
      }
    }

  // cancellations across U rows leave eps-size residue relative to the pieces cancelled;
  // anything at 1e-12 of the largest expansion piece is roundoff
  double cscale = 0.0;
  for (int t = 1; t <= max_order; ++t)
    for (int m = 0; m < d; ++m)
      cscale = std::max(cscale, C[size_t(m)][size_t(t)].max_abs_coeff());
  const double dust = 1e-12 * cscale;

  // <0|0~> by total order: L(t) = sum_j conj(U(0,j)) dagger(C_j(t))
  std::vector<ModePolynomial> L(size_t(max_order) + 1, ModePolynomial(n_modes));
  for (int t = 0; t <= max_order; ++t)
    for (int j = 0; j < d; ++j) {
      const Complex u = std::conj(sys.basis.U(0, j));
      if (std::abs(u) == 0.0) continue;
      L[size_t(t)] += u * C[size_t(j)][size_t(t)].dagger();
    }

  std::vector<DecayChannel> out;
  for (int n = 0; n < d; ++n) {
    const Level& lv = sys.scheme.levels[size_t(n)];
    if (lv.decay_rate <= 0.0) continue;
    if (n == 0) throw ConfigError("effective_transition_operators: ground level cannot decay");
    if (!lv.decays_to_ground)
      throw ConfigError("effective_transition_operators: level '" + lv.label +
                        "' decays but is not flagged decays_to_ground; "
                        "decay to other levels is unsupported");

    // <n~|0> by total order: R(t) = sum_k U(n,k) C_k(t)
    std::vector<ModePolynomial> R(size_t(max_order) + 1, ModePolynomial(n_modes));
    for (int t = 0; t <= max_order; ++t)
      for (int k = 0; k < d; ++k) {
        const Complex u = sys.basis.U(n, k);
        if (std::abs(u) == 0.0) continue;
        R[size_t(t)] += u * C[size_t(k)][size_t(t)];
      }

    ModePolynomial sigma(n_modes);
    for (int s = 0; s <= max_order; ++s)
      for (int t = 0; s + t <= max_order; ++t) sigma += L[size_t(s)] * R[size_t(t)];
    sigma.prune();
    sigma.prune_below(dust);
    out.push_back({n, lv.decay_rate, std::move(sigma)});
  }
  return out;
}

struct LindbladChannel {
  int level = 0;           // source bare level
  double gamma_eff = 0.0;  // bare rate times squared leading amplitude
  ModePolynomial op;       // unit max-|coefficient|, leading coefficient exactly 1
};

struct EffectiveModel {
  std::vector<double> omega;  // lab frequencies per mode
  ModePolynomial free_field;  // sum_m omega_m n_m, kept apart from the induced part: a single
                              // polynomial would relative-prune rates ~20 orders below optics
  ModePolynomial induced;     // resonance-filtered assembled expansion
  std::vector<LindbladChannel> channels;
  std::map<Monomial, MultiIndex> provenance;
  Regime regime = Regime::rwa;

  EffectiveModel() : free_field(0), induced(0) {}
  int n_modes() const { return int(omega.size()); }
};

// Lindblad normal form.  Each Sigma_n is split into rotation classes (cross terms between
// classes average away in the dissipator), every class is scaled to unit max-|coefficient|
// with the scalar folded into gamma_eff, and dark channels are dropped.
inline EffectiveModel assemble_master_equation(const AssembledHamiltonian& ham,
                                               const std::vector<DecayChannel>& decays,
                                               const std::vector<double>& omega, Regime regime,
                                               double rwa_tol = -1.0) {
  if (int(omega.size()) != ham.hamiltonian.n_modes())
    throw std::invalid_argument("assemble_master_equation: mode count mismatch");
  if (rwa_tol < 0.0) rwa_tol = default_resonance_tol(omega);
  const int n_modes = ham.hamiltonian.n_modes();

  EffectiveModel model;
  model.omega = omega;
  model.regime = regime;
  model.free_field = free_field_hamiltonian(omega);
  model.induced = resonance_filter(ham.hamiltonian, omega, rwa_tol);
  for (const auto& pv : ham.provenance)
    if (model.induced.terms().count(pv.first)) model.provenance.insert(pv);

  for (const DecayChannel& dc : decays) {
    if (dc.gamma < 0.0) throw ConfigError("assemble_master_equation: negative decay rate");
    std::vector<std::pair<double, ModePolynomial>> classes;
    for (const auto& [mono, c] : dc.sigma.terms()) {
      const double f = rotation_frequency(mono, omega);
      bool placed = false;
      for (auto& cl : classes)
        if (std::abs(f - cl.first) <= rwa_tol) {
          cl.second.add_term(mono, c);
          placed = true;
          break;
        }
      if (!placed) {
        ModePolynomial p(n_modes);
        p.add_term(mono, c);
        classes.emplace_back(f, std::move(p));
      }
    }
    for (auto& cl : classes) {
      ModePolynomial op = cl.second;
      op.prune();
      if (op.is_zero()) continue;
      const double amp = op.max_abs_coeff();
      Complex lead = 0.0;
      for (const auto& [mono, c] : op.terms())
        if (std::abs(c) >= amp * (1.0 - 1e-12)) {
          lead = c;
          break;
        }
      op *= Complex(1.0, 0.0) / lead;
      model.channels.push_back({dc.level, dc.gamma * amp * amp, std::move(op)});
    }
  }
  return model;
}

// Full pipeline for the dressed ground level: expand to max_order, assemble with the
// system's rates, resonance-filter, and attach decay channels built at half the order
// (the dissipator squares the amplitudes).
inline EffectiveModel compute_effective_model(const CoupledSystem& sys, int max_order,
                                              double rwa_tol = -1.0) {
  const ExpansionSeries series = expand_recursive(sys, 0, max_order);
  std::vector<double> rates, omega;
  for (const ModeInfo& m : sys.modes) {
    rates.push_back(m.rate);
    omega.push_back(m.omega);
  }
  const AssembledHamiltonian ham = assemble_hamiltonian(series, rates);
  const std::vector<DecayChannel> decays =
      effective_transition_operators(sys, series, std::max(1, max_order / 2));
  return assemble_master_equation(ham, decays, omega, sys.regime, rwa_tol);
}

namespace detail {

using Signature = std::vector<std::pair<int, int>>;  // per-mode (raise, lower), zero rows dropped

inline Signature canonical_signature(const Monomial& mono) {
  Signature sig;
  for (const ModePower& mp : mono)
    if (mp.raise != 0 || mp.lower != 0) sig.emplace_back(mp.raise, mp.lower);
  std::sort(sig.begin(), sig.end());
  Signature conj = sig;
  for (auto& s : conj) std::swap(s.first, s.second);
  std::sort(conj.begin(), conj.end());
  return std::max(sig, conj);  // a row and its dagger are the same archetype
}

inline Signature signature_of(std::initializer_list<std::pair<int, int>> rows) {
  Monomial mono;
  for (const auto& r : rows) {
    ModePower mp;
    mp.raise = r.first;
    mp.lower = r.second;
    mono.push_back(mp);
  }
  return canonical_signature(mono);
}

}  // namespace detail

// Table-1 archetype of a normal-ordered monomial, matched on the per-mode
// (creation, annihilation) signature up to mode relabeling and conjugation.
inline std::string archetype_name(const Monomial& mono) {
  using detail::signature_of;
  static const std::vector<std::pair<detail::Signature, const char*>> table = {
      {signature_of({{1, 1}}), "frequency shift"},
      {signature_of({{1, 0}, {0, 1}}), "linear coupling"},
      {signature_of({{1, 2}}), "a+ a^2 type"},
      {signature_of({{2, 0}, {0, 1}}), "frequency doubling"},
      {signature_of({{1, 0}, {0, 1}, {0, 1}}), "three-wave mixing"},
      {signature_of({{2, 2}}), "self-Kerr"},
      {signature_of({{2, 1}, {0, 1}}), "a+ a a+ b type"},
      {signature_of({{1, 1}, {1, 1}}), "cross-Kerr"},
      {signature_of({{1, 1}, {1, 0}, {0, 1}}), "a+ a b+ c type"},
      {signature_of({{1, 0}, {0, 1}, {1, 0}, {0, 1}}), "four-wave mixing"},
  };
  const detail::Signature sig = detail::canonical_signature(mono);
  for (const auto& row : table)
    if (row.first == sig) return row.second;
  return "other";
}

struct NonlinearityEntry {
  Monomial monomial;
  Complex coefficient;
  double rate = 0.0;  // |coefficient|
  std::string name;
  double rotation = 0.0;  // matching-condition value sum (l_m - r_m) omega_m
  bool resonant = false;
};

using NonlinearityReport = std::vector<NonlinearityEntry>;

inline NonlinearityReport classify(const ModePolynomial& poly, const std::vector<double>& omega,
                                   double tol = -1.0) {
  if (int(omega.size()) != poly.n_modes())
    throw std::invalid_argument("classify: mode count mismatch");
  if (tol < 0.0) tol = default_resonance_tol(omega);
  NonlinearityReport out;
  for (const auto& [mono, c] : poly.terms()) {
    int deg = 0;
    for (const ModePower& mp : mono) deg += mp.raise + mp.lower;
    if (deg == 0) continue;  // constant offset
    NonlinearityEntry e;
    e.monomial = mono;
    e.coefficient = c;
    e.rate = std::abs(c);
    e.name = archetype_name(mono);
    e.rotation = rotation_frequency(mono, omega);
    e.resonant = std::abs(e.rotation) <= tol;
    out.push_back(std::move(e));
  }
  return out;
}

// Leading-order leakage out of the ground manifold when the quadrature eigenvalue shifts
// by x: amplitude_n = x Lambda_{n0} / Delta_{n0} with Lambda the unit-rate product-form
// coupling.  Only meaningful for the bare regime.
inline Eigen::VectorXcd displacement_leakage(const CoupledSystem& sys, double x, int mode = 0) {
  if (sys.regime != Regime::bare)
    throw ConfigError("displacement_leakage: defined for the bare-coupling regime only");
  if (mode < 0 || mode >= sys.n_modes())
    throw std::invalid_argument("displacement_leakage: mode index out of range");
  const int d = sys.dim();
  const Transition& tr = sys.scheme.transitions[size_t(sys.modes[size_t(mode)].transition)];
  Matrix sigma = Matrix::Zero(d, d);
  sigma(tr.lower, tr.upper) = 1.0;
  const Matrix lam = sys.basis.U.adjoint() * (sigma + sigma.adjoint()) * sys.basis.U;
  Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(d);
  for (int n = 1; n < d; ++n) amp(n) = x * lam(n, 0) / sys.basis.gap(n, 0);
  return amp;
}

}  // namespace heff
