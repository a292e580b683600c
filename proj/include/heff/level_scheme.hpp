#pragma once

// Emitter level schemes and drives; dressed-basis construction and the
// transformation of mode interactions into that basis.

#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "heff/errors.hpp"
#include "heff/fock.hpp"
#include "heff/opmatrix.hpp"

namespace heff {

enum class Regime { bare, rwa };
enum class DriveKind { classical_bare, classical_rwa, quantized };

inline const char* to_string(Regime r) { return r == Regime::bare ? "bare" : "rwa"; }

struct Level {
  std::string label;
  double energy = 0.0;      // bare energy, angular-frequency units (hbar = 1)
  double decay_rate = 0.0;  // gamma_n
  bool decays_to_ground = false;
};

struct Transition {
  int lower = 0;        // n_l
  int upper = 0;        // k_l
  double dipole = 0.0;  // |mu| in C*m; 0 means unspecified
};

struct LevelScheme {
  std::vector<Level> levels;
  std::vector<Transition> transitions;

  int n_levels() const { return int(levels.size()); }
  int n_transitions() const { return int(transitions.size()); }

  double bare_gap(int t) const {
    if (t < 0 || t >= n_transitions()) throw ConfigError("transition index out of range");
    const Transition& tr = transitions[size_t(t)];
    return levels[size_t(tr.upper)].energy - levels[size_t(tr.lower)].energy;
  }

  void validate() const {
    if (levels.empty()) throw ConfigError("level scheme has no levels");
    for (const Level& lv : levels) {
      if (!std::isfinite(lv.energy)) throw ConfigError("level energy is not finite");
      if (!(lv.decay_rate >= 0.0) || !std::isfinite(lv.decay_rate))
        throw ConfigError("level decay rate must be finite and >= 0");
    }
    for (size_t i = 1; i < levels.size(); ++i)
      if (levels[i].energy < levels[0].energy)
        throw ConfigError("level 0 must be the ground state (lowest energy)");
    for (size_t t = 0; t < transitions.size(); ++t) {
      const Transition& tr = transitions[t];
      if (tr.lower < 0 || tr.upper < 0 || tr.lower >= n_levels() || tr.upper >= n_levels())
        throw ConfigError("transition " + std::to_string(t) + ": level index out of range");
      if (!(levels[size_t(tr.upper)].energy > levels[size_t(tr.lower)].energy))
        throw ConfigError("transition " + std::to_string(t) +
                          ": upper level must lie strictly above lower level");
      if (tr.dipole < 0.0) throw ConfigError("transition dipole must be >= 0");
    }
  }
};

// A drive attaches to one transition.  classical_bare carries a real
// amplitude D and lives in the Schroedinger (bare) picture; classical_rwa
// carries a complex amplitude beta in the rotating frame; quantized carries a
// coupling g and spawns a field mode.  `frequency` (classical_rwa and
// quantized only) is the carrier used by the consistency solve; NaN means
// resonant with the bare transition.
struct DriveSpec {
  DriveKind kind = DriveKind::quantized;
  int transition = 0;
  Complex amplitude{0.0, 0.0};  // D (classical_bare) or beta (classical_rwa)
  Complex g{0.0, 0.0};          // quantized coupling
  double frequency = std::numeric_limits<double>::quiet_NaN();

  static DriveSpec classical_bare(int transition, double D) {
    DriveSpec d;
    d.kind = DriveKind::classical_bare;
    d.transition = transition;
    d.amplitude = D;
    return d;
  }
  static DriveSpec classical_rwa(int transition, Complex beta,
                                 double frequency = std::numeric_limits<double>::quiet_NaN()) {
    DriveSpec d;
    d.kind = DriveKind::classical_rwa;
    d.transition = transition;
    d.amplitude = beta;
    d.frequency = frequency;
    return d;
  }
  static DriveSpec quantized_mode(int transition, Complex g,
                                  double frequency = std::numeric_limits<double>::quiet_NaN()) {
    DriveSpec d;
    d.kind = DriveKind::quantized;
    d.transition = transition;
    d.g = g;
    d.frequency = frequency;
    return d;
  }
};

inline double resolved_frequency(const LevelScheme& scheme, const DriveSpec& d) {
  return std::isnan(d.frequency) ? scheme.bare_gap(d.transition) : d.frequency;
}

inline void validate_drives(const LevelScheme& scheme, const std::vector<DriveSpec>& drives,
                            Regime regime) {
  auto finite = [](Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); };
  for (const DriveSpec& d : drives) {
    if (d.transition < 0 || d.transition >= scheme.n_transitions())
      throw ConfigError("drive transition index out of range");
    if (!finite(d.amplitude) || !finite(d.g)) throw ConfigError("drive amplitude is not finite");
    if (!std::isnan(d.frequency) && !(std::isfinite(d.frequency) && d.frequency > 0.0))
      throw ConfigError("drive frequency must be positive");
    switch (d.kind) {
      case DriveKind::classical_bare:
        if (regime == Regime::rwa)
          throw ConfigError("classical_bare drive is only valid in the bare regime");
        if (d.amplitude.imag() != 0.0)
          throw ConfigError("classical_bare amplitude must be real");
        break;
      case DriveKind::classical_rwa:
        if (regime == Regime::bare)
          throw ConfigError("classical_rwa drive is only valid in the rwa regime");
        break;
      case DriveKind::quantized:
        break;
    }
  }
}

struct ConsistencyResult {
  Eigen::VectorXd reference;  // reference energies E_n, ground fixed at 0
  Eigen::VectorXd detunings;  // bare energy minus reference
};

namespace detail {

inline std::string level_name(const LevelScheme& scheme, int n) {
  const std::string& lab = scheme.levels[size_t(n)].label;
  return lab.empty() ? std::to_string(n) : lab;
}

// Reconstructs u -> ... -> lca -> ... -> v from BFS parents and names the
// closed loop formed with the violating edge (v, u).
inline std::string cycle_name(const LevelScheme& scheme, int u, int v,
                              const std::vector<int>& parent) {
  auto chain = [&](int x) {
    std::vector<int> c;
    while (x != -1) {
      c.push_back(x);
      x = parent[size_t(x)];
    }
    return c;
  };
  std::vector<int> cu = chain(u);
  std::vector<int> cv = chain(v);
  int lca = cu.back();
  for (int x : cu) {
    for (int y : cv) {
      if (x == y) {
        lca = x;
        goto found;
      }
    }
  }
found:
  std::string s;
  for (int x : cu) {
    s += detail::level_name(scheme, x) + " -> ";
    if (x == lca) break;
  }
  std::vector<int> tail;
  for (int y : cv) {
    if (y == lca) break;
    tail.push_back(y);
  }
  for (auto it = tail.rbegin(); it != tail.rend(); ++it)
    s += detail::level_name(scheme, *it) + " -> ";
  s += detail::level_name(scheme, u);
  return s;
}

}  // namespace detail

// Solves E_{k_l} - E_{n_l} = omega_l over reference energies (ground fixed at
// 0; levels untouched by any constraint keep zero detuning).  Loop
// constraints violated beyond 1e-9 relative are an inconsistency error.
inline ConsistencyResult check_consistency(const LevelScheme& scheme,
                                           const std::vector<DriveSpec>& drives) {
  scheme.validate();
  validate_drives(scheme, drives, Regime::rwa);
  const int n = scheme.n_levels();

  struct Edge {
    int a, b;      // constraint: ref[b] - ref[a] = omega
    double omega;
  };
  std::vector<Edge> edges;
  std::vector<std::vector<int>> adj(static_cast<size_t>(n));
  double scale = 0.0;
  for (const Level& lv : scheme.levels) scale = std::max(scale, std::abs(lv.energy));
  for (const DriveSpec& d : drives) {
    if (d.kind == DriveKind::classical_bare) continue;
    const Transition& tr = scheme.transitions[size_t(d.transition)];
    const double w = resolved_frequency(scheme, d);
    adj[size_t(tr.lower)].push_back(int(edges.size()));
    adj[size_t(tr.upper)].push_back(int(edges.size()));
    edges.push_back({tr.lower, tr.upper, w});
    scale = std::max(scale, std::abs(w));
  }
  if (scale == 0.0) scale = 1.0;
  const double tol = 1e-9 * scale;

  std::vector<double> ref(size_t(n), 0.0);
  std::vector<char> assigned(size_t(n), 0);
  std::vector<int> parent(size_t(n), -1);
  for (int anchor = 0; anchor < n; ++anchor) {
    if (assigned[size_t(anchor)]) continue;
    // Components not containing the ground are anchored at zero detuning.
    ref[size_t(anchor)] = anchor == 0 ? 0.0 : scheme.levels[size_t(anchor)].energy;
    assigned[size_t(anchor)] = 1;
    std::queue<int> q;
    q.push(anchor);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int ei : adj[size_t(u)]) {
        const Edge& e = edges[size_t(ei)];
        const int v = e.a == u ? e.b : e.a;
        const double target = e.a == u ? ref[size_t(u)] + e.omega : ref[size_t(u)] - e.omega;
        if (!assigned[size_t(v)]) {
          ref[size_t(v)] = target;
          assigned[size_t(v)] = 1;
          parent[size_t(v)] = u;
          q.push(v);
        } else if (std::abs(ref[size_t(v)] - target) > tol) {
          throw ConfigError("inconsistent drive/mode frequencies on cycle " +
                            detail::cycle_name(scheme, u, v, parent) +
                            " (mismatch " + std::to_string(std::abs(ref[size_t(v)] - target)) +
                            " rad/s)");
        }
      }
    }
  }

  ConsistencyResult out;
  out.reference.resize(n);
  out.detunings.resize(n);
  for (int i = 0; i < n; ++i) {
    out.reference(i) = ref[size_t(i)];
    out.detunings(i) = scheme.levels[size_t(i)].energy - ref[size_t(i)];
  }
  return out;
}

// Hermitian emitter matrix including classical drives (quantized couplings
// excluded).  bare: diag of bare energies plus D(sigma + sigma^dag);
// rwa: diag of detunings plus beta sigma^dag + beta^* sigma.
inline Matrix build_driven_emitter(const LevelScheme& scheme, const std::vector<DriveSpec>& drives,
                                   Regime regime) {
  scheme.validate();
  validate_drives(scheme, drives, regime);
  const int n = scheme.n_levels();
  Matrix H = Matrix::Zero(n, n);
  if (regime == Regime::bare) {
    for (int i = 0; i < n; ++i) H(i, i) = scheme.levels[size_t(i)].energy;
    for (const DriveSpec& d : drives) {
      if (d.kind != DriveKind::classical_bare) continue;
      const Transition& tr = scheme.transitions[size_t(d.transition)];
      H(tr.lower, tr.upper) += d.amplitude.real();
      H(tr.upper, tr.lower) += d.amplitude.real();
    }
  } else {
    const ConsistencyResult c = check_consistency(scheme, drives);
    for (int i = 0; i < n; ++i) H(i, i) = c.detunings(i);
    for (const DriveSpec& d : drives) {
      if (d.kind != DriveKind::classical_rwa) continue;
      const Transition& tr = scheme.transitions[size_t(d.transition)];
      H(tr.upper, tr.lower) += d.amplitude;             // beta sigma^dag
      H(tr.lower, tr.upper) += std::conj(d.amplitude);  // beta^* sigma
    }
  }
  return H;
}

struct DressedBasis {
  Matrix U;                  // column n = dressed state |n_0> in the bare basis
  Eigen::VectorXd energies;  // E_0^(n), bare-provenance order (ground first)

  int dim() const { return int(energies.size()); }
  double gap(int n, int m) const { return energies(n) - energies(m); }  // Delta_{nm}
  Eigen::VectorXd ground_gaps() const {                                 // Delta_k = E0(0) - E0(k)
    Eigen::VectorXd g(dim());
    for (int k = 0; k < dim(); ++k) g(k) = energies(0) - energies(k);
    return g;
  }
};

// Diagonalizes the driven emitter.  Dressed states are ordered by bare-level
// provenance: scanning eigenvectors in ascending energy, each claims the
// unclaimed bare level on which it has the largest weight (ties to the lowest
// index).  This puts the max-overlap-with-ground state at index 0 and
// reproduces the usual (0, -Omega, +Omega, Delta) ordering of driven schemes.
// Degenerate ground gaps are a hard error: the expansion divides by them.
inline DressedBasis dress(const Matrix& emitter, double degeneracy_tol = 1e-9) {
  const Eigensystem es = eigendecompose(emitter);
  const int n = int(es.values.size());
  std::vector<int> source(size_t(n), -1);  // source[bare index] = eigen index
  std::vector<char> taken(size_t(n), 0);
  for (int j = 0; j < n; ++j) {
    int best = -1;
    double bestmag = -1.0;
    for (int b = 0; b < n; ++b) {
      if (taken[size_t(b)]) continue;
      const double m = std::abs(es.vectors(b, j));
      if (m > bestmag * (1.0 + 1e-12)) {  // ties keep the lowest bare index
        bestmag = m;
        best = b;
      }
    }
    taken[size_t(best)] = 1;
    source[size_t(best)] = j;
  }
  DressedBasis out;
  out.U.resize(n, n);
  out.energies.resize(n);
  for (int b = 0; b < n; ++b) {
    out.U.col(b) = es.vectors.col(source[size_t(b)]);
    out.energies(b) = es.values(source[size_t(b)]);
  }
  if (n > 1) {
    const double spread = out.energies.maxCoeff() - out.energies.minCoeff();
    for (int k = 1; k < n; ++k)
      if (std::abs(out.energies(0) - out.energies(k)) <= degeneracy_tol * spread)
        throw PhysicsError("degenerate dressed ground gap: Delta_" + std::to_string(k) +
                           " vanishes within tolerance");
  }
  return out;
}

struct ModeInfo {
  double rate = 0.0;   // |g|, the expansion parameter for this mode's slot
  double omega = 0.0;  // lab carrier frequency (bookkeeping, free-field term)
  int transition = 0;
  bool ground_coupled = false;  // transition lower level is the bare ground
  double phase = 0.0;           // arg g
};

struct CoupledSystem {
  DressedBasis basis;
  std::vector<ModeInfo> modes;
  std::vector<OperatorValuedMatrix> interactions;  // unit-rate, dressed basis, one per mode
  Regime regime = Regime::rwa;
  LevelScheme scheme;                          // retained for decay bookkeeping
  std::vector<ModePolynomial> diagonal_shift;  // rate-weighted diagonals recorded before zeroing
  bool had_nonzero_diagonal = false;

  int dim() const { return basis.dim(); }
  int n_modes() const { return int(modes.size()); }
};

// Per quantized drive: rwa entries K^dag_{jk} a + K_{jk} a^dag with
// K = (g/|g|) U^dag sigma U; bare entries Lambda_{jk} (e^{i phi} a + e^{-i phi} a^dag)
// with Lambda = U^dag (sigma + sigma^dag) U.  Expansion rates are |g|.
// Diagonal entries are recorded (shift into H0) and zeroed.
inline CoupledSystem transform_interactions(const LevelScheme& scheme,
                                            const std::vector<DriveSpec>& drives,
                                            const DressedBasis& basis, Regime regime) {
  scheme.validate();
  validate_drives(scheme, drives, regime);
  const int n = basis.dim();
  if (n != scheme.n_levels()) throw InternalError("dressed basis dimension mismatch");

  CoupledSystem sys;
  sys.basis = basis;
  sys.regime = regime;
  sys.scheme = scheme;
  int n_modes = 0;
  for (const DriveSpec& d : drives)
    if (d.kind == DriveKind::quantized) ++n_modes;
  sys.diagonal_shift.assign(size_t(n), ModePolynomial(n_modes));

  int m = 0;
  for (const DriveSpec& d : drives) {
    if (d.kind != DriveKind::quantized) continue;
    const Transition& tr = scheme.transitions[size_t(d.transition)];
    const double rate = std::abs(d.g);
    const Complex unit = rate > 0.0 ? d.g / rate : Complex(1.0, 0.0);

    Matrix sigma = Matrix::Zero(n, n);
    sigma(tr.lower, tr.upper) = 1.0;  // |n_l><k_l| lowers
    const ModePolynomial a = ModePolynomial::annihilate(m, n_modes);
    const ModePolynomial adag = ModePolynomial::create(m, n_modes);

    OperatorValuedMatrix V(n, n_modes);
    if (regime == Regime::rwa) {
      const Matrix K = unit * (basis.U.adjoint() * sigma * basis.U);
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          V.at(j, k) = std::conj(K(k, j)) * a + K(j, k) * adag;
    } else {
      const Matrix lam = basis.U.adjoint() * (sigma + sigma.adjoint()) * basis.U;
      const ModePolynomial quad = unit * a + std::conj(unit) * adag;
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) V.at(j, k) = lam(j, k) * quad;
    }

    const double diag_tol = 1e-12 * std::max(1.0, V.max_abs_coeff());
    for (int i = 0; i < n; ++i) {
      if (!V.at(i, i).is_zero(diag_tol)) sys.had_nonzero_diagonal = true;
      sys.diagonal_shift[size_t(i)] += rate * V.at(i, i);
      V.at(i, i) = ModePolynomial(n_modes);
    }

    ModeInfo info;
    info.rate = rate;
    info.omega = resolved_frequency(scheme, d);
    info.transition = d.transition;
    info.ground_coupled = tr.lower == 0;
    info.phase = rate > 0.0 ? std::arg(d.g) : 0.0;
    sys.modes.push_back(info);
    sys.interactions.push_back(std::move(V));
    ++m;
  }
  return sys;
}

inline CoupledSystem build_coupled_system(const LevelScheme& scheme,
                                          const std::vector<DriveSpec>& drives, Regime regime) {
  const Matrix H = build_driven_emitter(scheme, drives, regime);
  const DressedBasis basis = dress(H);
  return transform_interactions(scheme, drives, basis, regime);
}

}  // namespace heff
