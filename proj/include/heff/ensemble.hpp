#pragma once
// Collective TIPT for N identical, independent emitters restricted to the
// symmetric subspace with at most two excitations.  An n-th order term only
// connects the ground state to states with at most n/2 excited emitters, so
// this basis is exact through order 4; above that we refuse rather than
// extrapolate.

#include <heff/level_scheme.hpp>
#include <heff/tipt.hpp>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace heff {

// Symmetric states over the dressed single-emitter levels 1..M-1:
// (0,0) ground, (j,0) single |1_j>, (j,j) double |2_j>, (j,k) j<k pair |1_j,1_k>.
struct CollectiveSpace {
  int n_levels = 0;  // single-emitter dimension M
  int N = 0;
  std::vector<std::pair<int, int>> states;
  Eigen::VectorXd energies;  // N*E0(0) + sum of single-emitter offsets

  int dim() const { return int(states.size()); }

  int excitation(int i) const {
    const auto& s = states.at(size_t(i));
    return (s.first != 0) + (s.second != 0);
  }

  // occupation per dressed level; slot 0 holds the N - (excitation) ground emitters
  std::vector<int> occupations(int i) const {
    std::vector<int> occ(size_t(n_levels), 0);
    const auto& s = states.at(size_t(i));
    if (s.first != 0) ++occ[size_t(s.first)];
    if (s.second != 0) ++occ[size_t(s.second)];
    occ[0] = N - (s.first != 0) - (s.second != 0);
    return occ;
  }

  std::string label(int i) const {
    const auto& s = states.at(size_t(i));
    if (s.first == 0) return "0";
    if (s.second == 0) return "1_" + std::to_string(s.first);
    if (s.first == s.second) return "2_" + std::to_string(s.first);
    return "1_" + std::to_string(s.first) + ",1_" + std::to_string(s.second);
  }
};

inline CollectiveSpace symmetric_space(const Eigen::VectorXd& single_energies, int N) {
  if (N < 1) throw ConfigError("symmetric_space: ensemble size must be at least 1");
  const int M = int(single_energies.size());
  if (M < 2) throw ConfigError("symmetric_space: emitter needs at least two levels");
  CollectiveSpace cs;
  cs.n_levels = M;
  cs.N = N;
  cs.states.emplace_back(0, 0);
  for (int j = 1; j < M; ++j) cs.states.emplace_back(j, 0);
  if (N >= 2) {  // two-excitation states need at least two emitters
    for (int j = 1; j < M; ++j) cs.states.emplace_back(j, j);
    for (int j = 1; j < M; ++j)
      for (int k = j + 1; k < M; ++k) cs.states.emplace_back(j, k);
  }
  cs.energies.resize(cs.dim());
  for (int i = 0; i < cs.dim(); ++i) {
    const auto& s = cs.states[size_t(i)];
    double e = N * single_energies(0);
    if (s.first != 0) e += single_energies(s.first) - single_energies(0);
    if (s.second != 0) e += single_energies(s.second) - single_energies(0);
    cs.energies(i) = e;
  }
  return cs;
}

// Collective interaction sum_i V^(i) between symmetric states.  A one-emitter
// operator moves a single emitter from level b to level a, with amplitude
// sqrt(n_b (n_a + 1)) V_{ab}; this closed form reproduces each of the displayed
// rules (sqrt(N) V_{j0}, sqrt((N-n)(n+1)) V_{j0}, V_{kj}, sqrt(N-1) V_{k0},
// sqrt(2) V_{kj}, V_{lk}) and their Hermitian conjugates, and everything else
// vanishes.
inline OperatorValuedMatrix collective_matrix(const OperatorValuedMatrix& V_single,
                                              const CollectiveSpace& cs) {
  const int M = V_single.dim();
  if (M != cs.n_levels) throw std::invalid_argument("collective_matrix: dimension mismatch");
  if (!V_single.has_zero_diagonal(1e-12 * std::max(1.0, V_single.max_abs_coeff())))
    throw std::invalid_argument("collective_matrix: single-emitter diagonal must be zero");
  OperatorValuedMatrix out(cs.dim(), V_single.n_modes());
  for (int r = 0; r < cs.dim(); ++r) {
    const std::vector<int> occ_r = cs.occupations(r);
    for (int c = 0; c < cs.dim(); ++c) {
      if (r == c) continue;
      const std::vector<int> occ_c = cs.occupations(c);
      int a = -1, b = -1;
      bool single_move = true;
      for (int l = 0; l < M && single_move; ++l) {
        const int d = occ_r[size_t(l)] - occ_c[size_t(l)];
        if (d == 1 && a < 0) a = l;
        else if (d == -1 && b < 0) b = l;
        else if (d != 0) single_move = false;
      }
      if (!single_move || a < 0 || b < 0) continue;
      const double amp = std::sqrt(double(occ_c[size_t(b)]) * double(occ_r[size_t(a)]));
      if (amp == 0.0) continue;
      out.at(r, c) = amp * V_single.at(a, b);
    }
  }
  return out;
}

struct CollectiveSystem {
  CollectiveSpace space;
  std::vector<OperatorValuedMatrix> interactions;  // unit-rate, one per mode
  std::vector<ModeInfo> modes;
  Regime regime = Regime::rwa;
  int N = 1;

  int dim() const { return space.dim(); }
  int n_modes() const { return int(modes.size()); }
};

inline CollectiveSystem collective_system(const CoupledSystem& sys, int N) {
  CollectiveSystem out;
  out.space = symmetric_space(sys.basis.energies, N);
  out.interactions.reserve(sys.interactions.size());
  for (const OperatorValuedMatrix& V : sys.interactions)
    out.interactions.push_back(collective_matrix(V, out.space));
  out.modes = sys.modes;
  out.regime = sys.regime;
  out.N = N;
  return out;
}

inline ExpansionSeries ensemble_expansion(const CollectiveSystem& coll, int max_order) {
  if (max_order > 4)
    throw ConfigError("ensemble_expansion: the two-excitation symmetric basis is exact only "
                      "through order 4; requested order " + std::to_string(max_order));
  return expand_recursive(coll.space.energies, coll.interactions, 0, max_order);
}

inline ExpansionSeries ensemble_expansion(const CoupledSystem& sys, int N, int max_order) {
  return ensemble_expansion(collective_system(sys, N), max_order);
}

// E4(collective) = N*E4(single) + N(N-1) sum_{j,k} V_{0j} [V_{0k}, V_{j0}] V_{k0} / (Dj^2 Dk);
// the correction vanishes exactly when the commutators do (bare coupling).
struct ScalingIdentity {
  ModePolynomial residual;    // E4(collective) - N * E4(single)
  ModePolynomial correction;  // commutator term, built independently
  ModePolynomial difference;  // residual - correction (zero when the identity holds)

  ScalingIdentity() : residual(0), correction(0), difference(0) {}
};

inline ScalingIdentity scaling_identity_check(const CoupledSystem& sys, int N) {
  if (sys.n_modes() != 1)
    throw ConfigError("scaling_identity_check: single-mode system required");
  if (N < 1) throw ConfigError("scaling_identity_check: ensemble size must be at least 1");
  const MultiIndex J4{4};

  ExpansionSeries single = expand_recursive(sys, 0, 4);
  ModePolynomial e4_single = single.energy(J4);
  ExpansionSeries coll = ensemble_expansion(sys, N, 4);
  ModePolynomial e4_coll = coll.energy(J4);

  ScalingIdentity out;
  out.residual = e4_coll;
  e4_single *= Complex(double(N), 0.0);
  out.residual -= e4_single;

  const OperatorValuedMatrix& V = sys.interactions[0];
  const Eigen::VectorXd gaps = sys.basis.ground_gaps();  // Delta_j = E0(0) - E0(j)
  ModePolynomial corr(V.n_modes());
  for (int j = 1; j < sys.dim(); ++j) {
    for (int k = 1; k < sys.dim(); ++k) {
      ModePolynomial comm = V.at(0, k) * V.at(j, 0);
      comm -= V.at(j, 0) * V.at(0, k);
      if (comm.is_zero()) continue;
      ModePolynomial term = V.at(0, j) * comm * V.at(k, 0);
      term *= Complex(1.0 / (gaps(j) * gaps(j) * gaps(k)), 0.0);
      corr += term;
    }
  }
  corr *= Complex(double(N) * double(N - 1), 0.0);
  out.correction = std::move(corr);

  out.difference = out.residual;
  out.difference -= out.correction;

  // the subtraction cancels leading content, leaving eigensolver/summation dust;
  // anything at or below 1e-11 of the operands is roundoff, not a violation
  const double scale = std::max({e4_coll.max_abs_coeff(), e4_single.max_abs_coeff(),
                                 out.correction.max_abs_coeff()});
  out.residual.prune_below(1e-11 * scale);
  out.difference.prune_below(1e-11 * scale);
  return out;
}

// Perturbative-coupling bounds.  Only transitions that involve the dressed
// ground state pick up the collective sqrt(N) enhancement, and only in the
// RWA regime; bare coupling factorizes into N independent single-emitter
// problems and keeps the single-emitter bound.
inline std::vector<double> coupling_bounds(Regime regime, int N,
                                           const std::vector<bool>& ground_coupled,
                                           const std::vector<double>& gaps,
                                           const std::vector<double>& photon_numbers) {
  if (N < 1) throw ConfigError("coupling_bounds: ensemble size must be at least 1");
  const size_t M = gaps.size();
  if (ground_coupled.size() != M || photon_numbers.size() != M)
    throw ConfigError("coupling_bounds: per-mode input lengths differ");
  std::vector<double> out(M, 0.0);
  for (size_t m = 0; m < M; ++m) {
    if (gaps[m] <= 0.0) throw ConfigError("coupling_bounds: gaps must be positive");
    if (photon_numbers[m] <= 0.0)
      throw ConfigError("coupling_bounds: photon numbers must be positive");
    const double enh = (regime == Regime::rwa && ground_coupled[m]) ? double(N) : 1.0;
    out[m] = gaps[m] / std::sqrt(enh * photon_numbers[m]);
  }
  return out;
}

// Gap entering a mode's perturbative bound: the dressed gap between the ground
// state and the level the mode's transition excites (dressed states are labeled
// by bare provenance, so the transition's upper level is also its dressed index).
inline std::vector<double> mode_bound_gaps(const CoupledSystem& sys) {
  std::vector<double> out(size_t(sys.n_modes()), 0.0);
  for (int m = 0; m < sys.n_modes(); ++m) {
    const int upper = sys.scheme.transitions.at(size_t(sys.modes[size_t(m)].transition)).upper;
    out[size_t(m)] = std::abs(sys.basis.gap(0, upper));
  }
  return out;
}

inline std::vector<double> coupling_bounds(const CoupledSystem& sys, int N,
                                           const std::vector<double>& photon_numbers) {
  std::vector<bool> gc(size_t(sys.n_modes()), false);
  for (int m = 0; m < sys.n_modes(); ++m) gc[size_t(m)] = sys.modes[size_t(m)].ground_coupled;
  return coupling_bounds(sys.regime, N, gc, mode_bound_gaps(sys), photon_numbers);
}

// Kerr-rate ceilings with every coupling pushed to its perturbative bound.
// TLS self-Kerr: kappa_s = N lam^4 / Delta^3 with lam = Delta/sqrt(N nbar),
// giving Delta/(N nbar^2), shrinking as 1/N.  Schmidt-Imamoglu cross-Kerr:
// kappa = N lam^2 mu^2/(Delta Omega^2) with lam = Omega/sqrt(N nbar_a) and
// mu = Delta/sqrt(nbar_b), giving Delta/(nbar_a nbar_b), independent of N.
enum class SchemeKind { tls, si };

struct KerrScalingReport {
  std::vector<double> coupling_bound;  // per mode, at the given N
  double kappa_at_bound = 0.0;
  double n_exponent = 0.0;  // d ln kappa / d ln N, measured by doubling N
};

inline KerrScalingReport kerr_scaling_report(SchemeKind scheme, int N,
                                             const std::vector<double>& gaps,
                                             const std::vector<double>& photon_numbers) {
  if (N < 1) throw ConfigError("kerr_scaling_report: ensemble size must be at least 1");
  const size_t want = (scheme == SchemeKind::tls) ? 1 : 2;
  if (gaps.size() != want || photon_numbers.size() != want)
    throw ConfigError("kerr_scaling_report: expected " + std::to_string(want) +
                      " gaps and photon numbers");
  auto kappa = [&](double n_emitters) {
    if (scheme == SchemeKind::tls) {
      const double lam = gaps[0] / std::sqrt(n_emitters * photon_numbers[0]);
      return n_emitters * std::pow(lam, 4) / std::pow(gaps[0], 3);
    }
    const double lam = gaps[0] / std::sqrt(n_emitters * photon_numbers[0]);
    const double mu = gaps[1] / std::sqrt(photon_numbers[1]);
    return n_emitters * lam * lam * mu * mu / (gaps[1] * gaps[0] * gaps[0]);
  };
  KerrScalingReport out;
  if (scheme == SchemeKind::tls) {
    out.coupling_bound = {gaps[0] / std::sqrt(double(N) * photon_numbers[0])};
  } else {
    out.coupling_bound = {gaps[0] / std::sqrt(double(N) * photon_numbers[0]),
                          gaps[1] / std::sqrt(photon_numbers[1])};
  }
  out.kappa_at_bound = kappa(double(N));
  out.n_exponent = std::log(kappa(2.0 * double(N)) / kappa(double(N))) / std::log(2.0);
  return out;
}

// Semiclassical factorization of the RWA interaction: for a coherent state,
// a^dag|alpha> = alpha^*|alpha> + |alpha>_perp with the orthogonal part of unit
// norm.  Preparing the emitter in the transition's upper level isolates the
// a^dag piece, the one the factorization approximates:
//   H (|e> (x) |alpha>) = lam |g> (x) a^dag|alpha>  vs  lam alpha |g> (x) |alpha>,
// so the relative residual is 1/sqrt(|alpha|^2 + 1), decaying as 1/alpha.
struct SemiclassicalResidual {
  double creation_norm = 0.0;      // ||(a^dag - alpha)|alpha>||, equals 1 up to truncation
  double relative_residual = 0.0;  // ||H|e,alpha> - lam alpha |g,alpha>|| / ||H|e,alpha>||
};

inline SemiclassicalResidual semiclassical_residual(double alpha, int cutoff,
                                                    double lambda = 1.0) {
  if (!(lambda > 0.0)) throw ConfigError("semiclassical_residual: lambda must be positive");
  alpha = std::abs(alpha);
  const double needed = alpha * alpha + 6.0 * std::sqrt(alpha * alpha + 1.0);
  if (cutoff < needed)
    throw ConfigError("semiclassical_residual: truncation cutoff " + std::to_string(cutoff) +
                      " below |alpha|^2 + 6 sqrt(|alpha|^2+1)");
  // amplitudes in log space; tails underflow harmlessly to zero
  Eigen::VectorXd coh(cutoff + 1);
  for (int n = 0; n <= cutoff; ++n) {
    if (alpha == 0.0) {
      coh(n) = (n == 0) ? 1.0 : 0.0;
      continue;
    }
    const double ln = -0.5 * alpha * alpha + n * std::log(alpha) - 0.5 * std::lgamma(n + 1.0);
    coh(n) = std::exp(ln);
  }
  Eigen::VectorXd adag = Eigen::VectorXd::Zero(cutoff + 1);
  for (int n = 1; n <= cutoff; ++n) adag(n) = std::sqrt(double(n)) * coh(n - 1);
  SemiclassicalResidual out;
  out.creation_norm = (adag - alpha * coh).norm();
  const double exact = lambda * adag.norm();
  out.relative_residual = (exact == 0.0) ? 0.0 : lambda * (adag - alpha * coh).norm() / exact;
  return out;
}

// Dedicated TLS ensemble on the full (N+1)-level angular-momentum ladder:
// E_n = n*delta, J+|n> = sqrt((N-n)(n+1))|n+1>.  All excitations are kept, so
// exact diagonalization on this ladder is a valid oracle at any order.
struct TlsLadder {
  Eigen::VectorXd energies;
  OperatorValuedMatrix V;  // unit-rate collective interaction, one mode

  TlsLadder() : V(0, 0) {}
  int dim() const { return int(energies.size()); }
};

inline TlsLadder tls_ladder(int N, double delta, Regime regime) {
  if (N < 1) throw ConfigError("tls_ladder: ensemble size must be at least 1");
  TlsLadder out;
  out.energies.resize(N + 1);
  for (int n = 0; n <= N; ++n) out.energies(n) = n * delta;
  out.V = OperatorValuedMatrix(N + 1, 1);
  const ModePolynomial a = ModePolynomial::annihilate(0, 1);
  const ModePolynomial adag = ModePolynomial::create(0, 1);
  ModePolynomial quad = a;
  quad += adag;
  for (int n = 0; n < N; ++n) {
    const double f = std::sqrt(double(N - n) * double(n + 1));
    if (regime == Regime::rwa) {
      out.V.at(n + 1, n) = f * a;      // J+ a
      out.V.at(n, n + 1) = f * adag;   // J- a^dag
    } else {
      out.V.at(n + 1, n) = f * quad;
      out.V.at(n, n + 1) = f * quad;
    }
  }
  return out;
}

namespace bruteforce {

// Explicit N-fold tensor construction of the collective matrix over the same
// two-excitation symmetric basis, for verifying the sqrt(N)/sqrt(N-1) rules.
// Exponential in N; intended for N <= 4, M <= 3.
inline OperatorValuedMatrix collective_matrix(const OperatorValuedMatrix& V_single,
                                              const CollectiveSpace& cs) {
  const int M = V_single.dim();
  const int N = cs.N;
  if (M != cs.n_levels) throw std::invalid_argument("bruteforce: dimension mismatch");
  double total = std::pow(double(M), double(N));
  if (total > 20000.0)
    throw std::invalid_argument("bruteforce: tensor space too large; reduce N or M");
  const int T = int(total);
  const int NM = V_single.n_modes();

  auto digits = [&](int t) {
    std::vector<int> d(size_t(N), 0);
    for (int i = 0; i < N; ++i) {
      d[size_t(i)] = t % M;
      t /= M;
    }
    return d;
  };
  auto content = [&](const std::vector<int>& d) {
    std::vector<int> occ(size_t(M), 0);
    for (int x : d) ++occ[size_t(x)];
    return occ;
  };
  auto pack = [&](const std::vector<int>& d) {
    int t = 0;
    for (int i = N - 1; i >= 0; --i) t = t * M + d[size_t(i)];
    return t;
  };

  // symmetric states as normalized uniform superpositions over matching content
  std::vector<std::vector<int>> support(size_t(cs.dim()));
  for (int t = 0; t < T; ++t) {
    const std::vector<int> occ = content(digits(t));
    for (int s = 0; s < cs.dim(); ++s)
      if (occ == cs.occupations(s)) {
        support[size_t(s)].push_back(t);
        break;
      }
  }

  OperatorValuedMatrix out(cs.dim(), NM);
  for (int c = 0; c < cs.dim(); ++c) {
    // a state needing more excited emitters than N has no tensor realization;
    // the rules give it zero coupling, so its row and column stay zero
    if (support[size_t(c)].empty()) continue;
    const double wc = 1.0 / std::sqrt(double(support[size_t(c)].size()));
    // apply sum_i V^(i) to the symmetric column state
    std::vector<ModePolynomial> image(static_cast<size_t>(T), ModePolynomial(NM));
    for (int t : support[size_t(c)]) {
      const std::vector<int> d = digits(t);
      for (int slot = 0; slot < N; ++slot) {
        for (int a = 0; a < M; ++a) {
          if (a == d[size_t(slot)]) continue;
          const ModePolynomial& el = V_single.at(a, d[size_t(slot)]);
          if (el.is_zero()) continue;
          std::vector<int> d2 = d;
          d2[size_t(slot)] = a;
          ModePolynomial contrib = el;
          contrib *= Complex(wc, 0.0);
          image[size_t(pack(d2))] += contrib;
        }
      }
    }
    for (int r = 0; r < cs.dim(); ++r) {
      if (support[size_t(r)].empty()) continue;
      const double wr = 1.0 / std::sqrt(double(support[size_t(r)].size()));
      ModePolynomial acc(NM);
      for (int t : support[size_t(r)]) acc += image[size_t(t)];
      acc *= Complex(wr, 0.0);
      acc.prune();
      out.at(r, c) = std::move(acc);
    }
  }
  return out;
}

}  // namespace bruteforce

}  // namespace heff
