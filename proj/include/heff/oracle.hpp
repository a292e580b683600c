#pragma once
// Exact-diagonalization oracles on truncated Fock spaces: joint emitter-field
// models, ground-manifold extraction, coupling-sweep polynomial fits, the
// bare-regime quadrature decomposition, and the Fig.-Nscaling error curves.

#include <heff/effective.hpp>
#include <heff/ensemble.hpp>
#include <heff/fock.hpp>
#include <heff/level_scheme.hpp>
#include <heff/tipt.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace heff {

struct JointModel {
  Matrix H;  // (emitter_dim * fock_dim) square; emitter index is the slow factor
  int emitter_dim = 0;
  FockTruncation trunc;
  Regime regime = Regime::rwa;

  long dim() const { return emitter_dim * trunc.dim(); }
};

// Joint Hamiltonian in the frame of the TIPT expansion: emitter (or collective)
// energies plus rate-weighted realized interactions.  No free-field term; the
// eigenvalues compare directly to the expansion's energy coefficients.
inline JointModel build_joint_model(const Eigen::VectorXd& energies,
                                    const std::vector<OperatorValuedMatrix>& interactions,
                                    const std::vector<double>& rates,
                                    const FockTruncation& trunc, Regime regime) {
  const int D = int(energies.size());
  if (interactions.empty()) throw std::invalid_argument("build_joint_model: no interactions");
  if (rates.size() != interactions.size())
    throw std::invalid_argument("build_joint_model: one rate per interaction required");
  for (const OperatorValuedMatrix& V : interactions) {
    if (V.dim() != D) throw std::invalid_argument("build_joint_model: dimension mismatch");
    if (V.n_modes() != trunc.n_modes())
      throw std::invalid_argument("build_joint_model: mode count mismatch");
  }
  const long F = trunc.dim();
  JointModel out;
  out.emitter_dim = D;
  out.trunc = trunc;
  out.regime = regime;
  out.H = Matrix::Zero(D * F, D * F);
  for (int j = 0; j < D; ++j)
    out.H.block(j * F, j * F, F, F) += energies(j) * Matrix::Identity(F, F);
  for (size_t m = 0; m < interactions.size(); ++m) {
    for (int j = 0; j < D; ++j) {
      for (int k = 0; k < D; ++k) {
        const ModePolynomial& el = interactions[m].at(j, k);
        if (el.is_zero()) continue;
        out.H.block(j * F, k * F, F, F) += rates[m] * realize(el, trunc);
      }
    }
  }
  const double scale = std::max(1.0, out.H.norm());
  if ((out.H - out.H.adjoint()).norm() > 1e-10 * scale)
    throw InternalError("build_joint_model: joint Hamiltonian is not Hermitian");
  return out;
}

inline JointModel build_joint_model(const CoupledSystem& sys, const FockTruncation& trunc) {
  std::vector<double> rates(sys.modes.size(), 0.0);
  for (size_t m = 0; m < sys.modes.size(); ++m) rates[m] = sys.modes[m].rate;
  return build_joint_model(sys.basis.energies, sys.interactions, rates, trunc, sys.regime);
}

inline JointModel build_joint_model(const CollectiveSystem& coll, const FockTruncation& trunc) {
  std::vector<double> rates(coll.modes.size(), 0.0);
  for (size_t m = 0; m < coll.modes.size(); ++m) rates[m] = coll.modes[m].rate;
  return build_joint_model(coll.space.energies, coll.interactions, rates, trunc, coll.regime);
}

// all occupation vectors with every mode at most n_probe, odometer order
inline std::vector<std::vector<int>> probe_occupations(int n_modes, int n_probe) {
  std::vector<std::vector<int>> out;
  std::vector<int> occ(size_t(n_modes), 0);
  while (true) {
    out.push_back(occ);
    int m = n_modes - 1;
    while (m >= 0 && occ[size_t(m)] == n_probe) occ[size_t(m--)] = 0;
    if (m < 0) break;
    ++occ[size_t(m)];
  }
  return out;
}

struct GroundManifold {
  std::vector<std::vector<int>> occupations;  // probe order
  Eigen::VectorXd eigenvalues;
  Eigen::VectorXd overlaps;  // squared overlap with the product state |0_0>|n>
};

// Eigenvalues continuously connected to |0_0>|n>, identified by maximal squared
// overlap with the unperturbed product state.  Below 0.5 the labeling is
// unreliable and the system is outside the perturbative regime.
inline GroundManifold exact_ground_manifold(const JointModel& model, int n_probe) {
  for (int c : model.trunc.nmax)
    if (c < n_probe + 4)
      throw ConfigError("exact_ground_manifold: cutoff must be at least n_probe + 4");
  const Eigensystem es = eigendecompose(model.H, 1e-10);
  const long F = model.trunc.dim();
  GroundManifold out;
  out.occupations = probe_occupations(model.trunc.n_modes(), n_probe);
  const size_t P = out.occupations.size();
  out.eigenvalues.resize(long(P));
  out.overlaps.resize(long(P));
  std::vector<long> claimed;
  for (size_t i = 0; i < P; ++i) {
    const long idx = model.trunc.index(out.occupations[i]);  // emitter factor 0
    long best = 0;
    double w = -1.0;
    for (long k = 0; k < es.vectors.cols(); ++k) {
      const double o = std::norm(es.vectors(idx, k));
      if (o > w) {
        w = o;
        best = k;
      }
    }
    if (w < 0.5)
      throw PhysicsError("exact_ground_manifold: overlap " + std::to_string(w) +
                         " below 0.5 for a probe state; system is not perturbative");
    for (long c : claimed)
      if (c == best)
        throw PhysicsError("exact_ground_manifold: two probe states claim one eigenvector");
    claimed.push_back(best);
    out.eigenvalues(long(i)) = es.values(best);
    out.overlaps(long(i)) = w;
  }
  return out;
}

// worst relative change of the manifold eigenvalues when every cutoff doubles
inline double cutoff_doubling_shift(const Eigen::VectorXd& energies,
                                    const std::vector<OperatorValuedMatrix>& interactions,
                                    const std::vector<double>& rates,
                                    const FockTruncation& trunc, Regime regime, int n_probe) {
  FockTruncation doubled = trunc;
  for (int& c : doubled.nmax) c *= 2;
  const GroundManifold a =
      exact_ground_manifold(build_joint_model(energies, interactions, rates, trunc, regime),
                            n_probe);
  const GroundManifold b =
      exact_ground_manifold(build_joint_model(energies, interactions, rates, doubled, regime),
                            n_probe);
  const double floor = 1e-12 * std::max(1e-300, b.eigenvalues.cwiseAbs().maxCoeff());
  double worst = 0.0;
  for (long i = 0; i < a.eigenvalues.size(); ++i) {
    const double denom = std::max(std::abs(b.eigenvalues(i)), floor);
    worst = std::max(worst, std::abs(a.eigenvalues(i) - b.eigenvalues(i)) / denom);
  }
  return worst;
}

// <occ| p |occ> for a normal-ordered polynomial; only raise == lower terms survive
inline double diagonal_expectation(const ModePolynomial& p, const std::vector<int>& occ) {
  if (int(occ.size()) != p.n_modes())
    throw std::invalid_argument("diagonal_expectation: occupation arity mismatch");
  Complex out(0.0, 0.0);
  for (const auto& [mono, coeff] : p.terms()) {
    double amp = 1.0;
    bool diag = true;
    for (int m = 0; m < p.n_modes() && diag; ++m) {
      if (mono[size_t(m)].raise != mono[size_t(m)].lower) {
        diag = false;
        break;
      }
      for (int i = 0; i < mono[size_t(m)].lower; ++i) amp *= double(occ[size_t(m)] - i);
    }
    if (diag) out += coeff * amp;
  }
  if (std::abs(out.imag()) > 1e-10 * std::max(1.0, std::abs(out.real())))
    throw InternalError("diagonal_expectation: non-real expectation of a Hermitian polynomial");
  return out.real();
}

// row r: probe occupation, column t: sum over |J| = t of rates^J <occ|E_J|occ>
inline Eigen::MatrixXd tipt_diagonal_predictions(const ExpansionSeries& series,
                                                 const std::vector<double>& unit_rates,
                                                 const std::vector<std::vector<int>>& occupations) {
  const int T = series.max_total_order();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(long(occupations.size()), T + 1);
  for (const auto& [J, poly] : series.energy_terms()) {
    const int t = total_order(J);
    const double w = rate_power(unit_rates, J);
    for (size_t r = 0; r < occupations.size(); ++r)
      out(long(r), t) += w * diagonal_expectation(poly, occupations[r]);
  }
  return out;
}

struct SweepFit {
  std::vector<std::vector<int>> occupations;
  Eigen::VectorXd grid;    // sweep scale values
  Eigen::MatrixXd coeffs;  // row per occupation, column t: fitted coefficient of scale^t
};

// Sweeps an overall scale multiplying all unit rates over a symmetric grid and
// fits each manifold eigenvalue as a polynomial in the scale.  With n_points =
// degree + 1 the fit is interpolatory.
inline SweepFit coupling_sweep_fit(const Eigen::VectorXd& energies,
                                   const std::vector<OperatorValuedMatrix>& interactions,
                                   const std::vector<double>& unit_rates,
                                   const FockTruncation& trunc, Regime regime, double scale_max,
                                   int n_points, int degree, int n_probe) {
  if (n_points < degree + 1)
    throw ConfigError("coupling_sweep_fit: need at least degree + 1 sweep points");
  if (!(scale_max > 0.0)) throw ConfigError("coupling_sweep_fit: scale_max must be positive");
  SweepFit out;
  out.occupations = probe_occupations(trunc.n_modes(), n_probe);
  out.grid.resize(n_points);
  for (int i = 0; i < n_points; ++i)
    out.grid(i) = scale_max * (2.0 * i / double(n_points - 1) - 1.0);
  Eigen::MatrixXd values(n_points, long(out.occupations.size()));
  for (int i = 0; i < n_points; ++i) {
    std::vector<double> rates = unit_rates;
    for (double& r : rates) r *= out.grid(i);
    const GroundManifold gm =
        exact_ground_manifold(build_joint_model(energies, interactions, rates, trunc, regime),
                              n_probe);
    values.row(i) = gm.eigenvalues.transpose();
  }
  Eigen::MatrixXd vand(n_points, degree + 1);
  for (int i = 0; i < n_points; ++i)
    for (int t = 0; t <= degree; ++t) vand(i, t) = std::pow(out.grid(i), t);
  out.coeffs = vand.colPivHouseholderQr().solve(values).transpose();
  return out;
}

// --- Bare-regime quadrature decomposition -------------------------------------

// Bare single-mode interactions factor as V_{jk} = G_{jk} (a + a†) with real
// symmetric G, so the joint Hamiltonian commutes with the quadrature and splits
// into one emitter problem per quadrature eigenvalue.
inline Eigen::MatrixXd quadrature_generator(const CoupledSystem& sys, int mode = 0) {
  if (sys.regime != Regime::bare)
    throw ConfigError("quadrature_generator: bare-coupling regime required");
  if (mode < 0 || mode >= sys.n_modes())
    throw ConfigError("quadrature_generator: mode index out of range");
  const OperatorValuedMatrix& V = sys.interactions[size_t(mode)];
  const int D = V.dim();
  const int NM = V.n_modes();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(D, D);
  ModePolynomial quad = ModePolynomial::annihilate(mode, NM);
  quad += ModePolynomial::create(mode, NM);
  double worst = 0.0;
  for (int j = 0; j < D; ++j) {
    for (int k = 0; k < D; ++k) {
      Monomial mono(static_cast<size_t>(NM));
      mono[size_t(mode)].lower = 1;
      const Complex c = V.at(j, k).coefficient(mono);
      G(j, k) = c.real();
      ModePolynomial recon = quad;
      recon *= Complex(G(j, k), 0.0);
      worst = std::max(worst, max_coeff_distance(recon, V.at(j, k)));
    }
  }
  if (worst > 1e-10 * std::max(1.0, V.max_abs_coeff()))
    throw ConfigError("quadrature_generator: interaction is not a real multiple of (a + a†)");
  return G;
}

inline Eigen::VectorXd quadrature_nodes(int cutoff) {
  ModePolynomial quad = ModePolynomial::annihilate(0, 1);
  quad += ModePolynomial::create(0, 1);
  return eigendecompose(realize(quad, FockTruncation({cutoff}))).values;
}

// Ground eigenvalue of H0 + s*G.  By default the level connected to the
// unperturbed ground is identified by maximal overlap with level 0; set
// min_eigenvalue for systems (like the TLS ladder, whose spectrum is a sum of
// independent two-level problems) where the global minimum is the ground at
// any coupling.  long double arithmetic keeps the small ground eigenvalue
// accurate relative to the matrix scale, which the error-curve identities need.
inline double quadrature_ground_energy(const Eigen::VectorXd& energies0,
                                       const Eigen::MatrixXd& G, double s,
                                       bool min_eigenvalue = false) {
  using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const int D = int(energies0.size());
  MatL H = MatL::Zero(D, D);
  for (int j = 0; j < D; ++j) H(j, j) = static_cast<long double>(energies0(j));
  for (int j = 0; j < D; ++j)
    for (int k = 0; k < D; ++k) H(j, k) += static_cast<long double>(s) * static_cast<long double>(G(j, k));
  Eigen::SelfAdjointEigenSolver<MatL> solver(H);
  if (solver.info() != Eigen::Success)
    throw InternalError("quadrature_ground_energy: eigensolver failed");
  if (min_eigenvalue) return double(solver.eigenvalues().minCoeff());
  long best = 0;
  long double w = -1.0L;
  for (long k = 0; k < D; ++k) {
    const long double o = solver.eigenvectors()(0, k) * solver.eigenvectors()(0, k);
    if (o > w) {
      w = o;
      best = k;
    }
  }
  if (w < 0.5L)
    throw PhysicsError("quadrature_ground_energy: ground overlap below 0.5; not perturbative");
  return double(solver.eigenvalues()(best));
}

// Bare-regime analogue of coupling_sweep_fit.  Fock occupations label nothing
// here (eigenstates organize by quadrature node), so eigenvalues are tracked per
// node tuple: for each (x_0..x_{M-1}) the joint problem reduces to the emitter
// matrix H0 + sum_m s u_m x_m G_m, solved in long double.
struct QuadratureSweepFit {
  std::vector<std::vector<double>> nodes;  // one tuple per row
  Eigen::VectorXd grid;
  Eigen::MatrixXd coeffs;  // row per node tuple, column t: fitted coefficient of scale^t
};

inline QuadratureSweepFit quadrature_sweep_fit(const CoupledSystem& sys,
                                               const std::vector<double>& unit_rates,
                                               int cutoff, double scale_max, int n_points,
                                               int degree) {
  if (n_points < degree + 1)
    throw ConfigError("quadrature_sweep_fit: need at least degree + 1 sweep points");
  if (!(scale_max > 0.0)) throw ConfigError("quadrature_sweep_fit: scale_max must be positive");
  const int M = sys.n_modes();
  if (int(unit_rates.size()) != M)
    throw ConfigError("quadrature_sweep_fit: one unit rate per mode");
  std::vector<Eigen::MatrixXd> G;
  for (int m = 0; m < M; ++m) G.push_back(quadrature_generator(sys, m));
  const Eigen::VectorXd all_nodes = quadrature_nodes(cutoff);
  // keep the row count manageable for several modes
  const int per_mode = M == 1 ? int(all_nodes.size()) : std::min<int>(5, int(all_nodes.size()));
  const int stride = std::max(1, int(all_nodes.size()) / per_mode);
  std::vector<double> picked;
  for (int i = 0; i < int(all_nodes.size()); i += stride) picked.push_back(all_nodes(i));

  QuadratureSweepFit out;
  std::vector<double> tuple(size_t(M), 0.0);
  auto rec = [&](auto&& self, int m) -> void {
    if (m == M) {
      out.nodes.push_back(tuple);
      return;
    }
    for (double x : picked) {
      tuple[size_t(m)] = x;
      self(self, m + 1);
    }
  };
  rec(rec, 0);

  out.grid.resize(n_points);
  for (int i = 0; i < n_points; ++i)
    out.grid(i) = scale_max * (2.0 * i / double(n_points - 1) - 1.0);

  using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const int D = sys.dim();
  Eigen::MatrixXd values(long(out.nodes.size()), n_points);
  for (int i = 0; i < n_points; ++i) {
    for (size_t r = 0; r < out.nodes.size(); ++r) {
      MatL H = MatL::Zero(D, D);
      for (int j = 0; j < D; ++j) H(j, j) = static_cast<long double>(sys.basis.energies(j));
      for (int m = 0; m < M; ++m) {
        const long double w = static_cast<long double>(out.grid(i)) *
                              static_cast<long double>(unit_rates[size_t(m)]) *
                              static_cast<long double>(out.nodes[r][size_t(m)]);
        for (int j = 0; j < D; ++j)
          for (int k = 0; k < D; ++k) H(j, k) += w * static_cast<long double>(G[size_t(m)](j, k));
      }
      Eigen::SelfAdjointEigenSolver<MatL> solver(H);
      if (solver.info() != Eigen::Success)
        throw InternalError("quadrature_sweep_fit: eigensolver failed");
      values(long(r), i) = double(solver.eigenvalues().minCoeff());
    }
  }
  Eigen::MatrixXd vand(n_points, degree + 1);
  for (int i = 0; i < n_points; ++i)
    for (int t = 0; t <= degree; ++t) vand(i, t) = std::pow(out.grid(i), t);
  out.coeffs = vand.colPivHouseholderQr().solve(values.transpose()).transpose();
  return out;
}

// TIPT predictions per node tuple.  Every bare E_J is an exact multiple of
// prod_m q_m^{j_m} (each interaction element is a multiple of the same
// quadrature), so its value on |x> is the all-lowering coefficient times
// prod x_m^{j_m}; the structural premise is verified, not assumed.
inline Eigen::MatrixXd tipt_node_predictions(const ExpansionSeries& series,
                                             const std::vector<double>& unit_rates,
                                             const std::vector<std::vector<double>>& nodes) {
  const int T = series.max_total_order();
  const int M = int(unit_rates.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(long(nodes.size()), T + 1);
  for (const auto& [J, poly] : series.energy_terms()) {
    if (poly.is_zero()) continue;
    const int t = total_order(J);
    Monomial lowering(static_cast<size_t>(M));
    for (int m = 0; m < M; ++m) lowering[size_t(m)].lower = J[size_t(m)];
    const Complex c = poly.coefficient(lowering);
    ModePolynomial recon = ModePolynomial::constant(c, M);
    for (int m = 0; m < M; ++m)
      for (int p = 0; p < J[size_t(m)]; ++p) {
        ModePolynomial quad = ModePolynomial::annihilate(m, M);
        quad += ModePolynomial::create(m, M);
        recon = recon * quad;
      }
    if (max_coeff_distance(recon, poly) > 1e-10 * std::max(1.0, poly.max_abs_coeff()) ||
        std::abs(c.imag()) > 1e-10 * std::max(1.0, std::abs(c)))
      throw InternalError("tipt_node_predictions: E_" + index_string(J) +
                          " is not a real multiple of a quadrature power");
    const double w = rate_power(unit_rates, J) * c.real();
    for (size_t r = 0; r < nodes.size(); ++r) {
      double v = w;
      for (int m = 0; m < M; ++m) v *= std::pow(nodes[r][size_t(m)], J[size_t(m)]);
      out(long(r), t) += v;
    }
  }
  return out;
}

// --- Fig.-Nscaling error curves ------------------------------------------------

struct ErrorCurve {
  Eigen::VectorXd lambda;
  Eigen::VectorXd error_caption;   // sum of squared relative eigenvalue errors (primary)
  Eigen::VectorXd error_fraction;  // sum of |fractional difference| (secondary)
  std::vector<bool> valid;         // false where manifold identification failed
};

inline Eigen::VectorXd log_grid(double lo, double hi, int n) {
  Eigen::VectorXd g(n);
  for (int i = 0; i < n; ++i)
    g(i) = lo * std::pow(hi / lo, n == 1 ? 0.0 : double(i) / double(n - 1));
  return g;
}

namespace detail {

inline void accumulate_error(double exact, double pred, double floor, double& caption,
                             double& fraction) {
  if (std::abs(exact) <= floor) return;  // both sides vanish there (e.g. the vacuum)
  const double rel = (pred - exact) / exact;
  caption += rel * rel;
  fraction += std::abs(rel);
}

}  // namespace detail

// Truncation-error curves for the TLS ensemble on the full (N+1) ladder.
// RWA: total excitation is conserved exactly, so block n is a finite
// irreducible tridiagonal whose bottom eigenvalue branch is the continuation
// of |0_0>|n> at every coupling; per-block minima identify the manifold with
// no overlap threshold and no Fock truncation at all.
// Bare: the ground manifold has no occupation labels (eigenvectors follow the
// quadrature), so the sum runs over all quadrature nodes, pairing each exact
// node energy with the order-4 expansion evaluated at that node.
inline ErrorCurve nscaling_curve(Regime regime, int N, double delta,
                                 const Eigen::VectorXd& lambda_grid, int n_probe = 3,
                                 int cutoff = -1) {
  if (!(delta > 0.0)) throw ConfigError("nscaling_curve: detuning must be positive");
  if (N < 1 || N > 12) throw ConfigError("nscaling_curve: N must lie in 1..12");
  if (cutoff < 0) cutoff = 24;
  const TlsLadder lad = tls_ladder(N, delta, regime);
  const ExpansionSeries series =
      expand_recursive(lad.energies, std::vector<OperatorValuedMatrix>{lad.V}, 0, 4);

  ErrorCurve out;
  out.lambda = lambda_grid;
  out.error_caption = Eigen::VectorXd::Zero(lambda_grid.size());
  out.error_fraction = Eigen::VectorXd::Zero(lambda_grid.size());
  out.valid.assign(size_t(lambda_grid.size()), true);

  if (regime == Regime::rwa) {
    using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    const auto probes = probe_occupations(1, n_probe);
    for (long i = 0; i < lambda_grid.size(); ++i) {
      const double lam = lambda_grid(i);
      std::vector<double> exact(probes.size(), 0.0);
      double emax = 1e-300;
      for (size_t r = 0; r < probes.size(); ++r) {
        const int n = probes[r][0];
        const int m = std::min(N, n) + 1;  // excited-emitter counts 0..m-1
        MatL H = MatL::Zero(m, m);
        for (int k = 0; k < m; ++k) H(k, k) = k * static_cast<long double>(delta);
        for (int k = 0; k + 1 < m; ++k)
          H(k, k + 1) = H(k + 1, k) =
              lam * std::sqrt(static_cast<long double>(N - k) * (k + 1) * (n - k));
        Eigen::SelfAdjointEigenSolver<MatL> solver(H);
        if (solver.info() != Eigen::Success)
          throw InternalError("nscaling_curve: block eigensolver failed");
        exact[r] = double(solver.eigenvalues().minCoeff());
        emax = std::max(emax, std::abs(exact[r]));
      }
      const double floor = 1e-12 * emax;
      for (size_t r = 0; r < probes.size(); ++r) {
        double pred = 0.0;
        for (const auto& [J, poly] : series.energy_terms())
          pred += std::pow(lam, total_order(J)) * diagonal_expectation(poly, probes[r]);
        detail::accumulate_error(exact[r], pred, floor, out.error_caption(i),
                                 out.error_fraction(i));
      }
    }
    return out;
  }

  // bare: E_t = e_t * (a + a†)^t, read e_t off the pure-annihilation monomial
  Eigen::VectorXd et = Eigen::VectorXd::Zero(5);
  for (const auto& [J, poly] : series.energy_terms()) {
    const int t = total_order(J);
    if (t == 0) continue;
    Monomial mono(1);
    mono[0].lower = t;
    et(t) = poly.coefficient(mono).real();
  }
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(N + 1, N + 1);
  for (int n = 0; n < N; ++n) {
    Monomial mono(1);
    mono[0].lower = 1;
    G(n + 1, n) = G(n, n + 1) = lad.V.at(n + 1, n).coefficient(mono).real();
  }
  const Eigen::VectorXd nodes = quadrature_nodes(cutoff);
  for (long i = 0; i < lambda_grid.size(); ++i) {
    const double lam = lambda_grid(i);
    try {
      std::vector<double> exact(size_t(nodes.size()), 0.0);
      double emax = 1e-300;
      for (long q = 0; q < nodes.size(); ++q) {
        exact[size_t(q)] = quadrature_ground_energy(lad.energies, G, lam * nodes(q), true);
        emax = std::max(emax, std::abs(exact[size_t(q)]));
      }
      const double floor = 1e-12 * emax;
      for (long q = 0; q < nodes.size(); ++q) {
        const double s = lam * nodes(q);
        double pred = 0.0;
        for (int t = 2; t <= 4; ++t) pred += et(t) * std::pow(s, t);
        detail::accumulate_error(exact[size_t(q)], pred, floor, out.error_caption(i),
                                 out.error_fraction(i));
      }
    } catch (const PhysicsError&) {
      out.valid[size_t(i)] = false;
      out.error_caption(i) = std::numeric_limits<double>::quiet_NaN();
      out.error_fraction(i) = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

}  // namespace heff
