#pragma once

// Multi-parameter TIPT with operator-valued matrix elements: the ALLP
// permutation combinator, the Table-1 closed forms (orders 2-4, ground
// state), and the general recursion over multi-indices.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "heff/errors.hpp"
#include "heff/level_scheme.hpp"
#include "heff/opmatrix.hpp"

namespace heff {

using MultiIndex = std::vector<int>;

inline int total_order(const MultiIndex& J) {
  int s = 0;
  for (int j : J) {
    if (j < 0) throw std::invalid_argument("multi-index entries must be >= 0");
    s += j;
  }
  return s;
}

inline MultiIndex unit_index(int p, int slots) {
  MultiIndex e(size_t(slots), 0);
  e.at(size_t(p)) = 1;
  return e;
}

inline std::string index_string(const MultiIndex& J) {
  std::string s = "(";
  for (size_t i = 0; i < J.size(); ++i) s += (i ? "," : "") + std::to_string(J[i]);
  return s + ")";
}

// All multi-indices with `slots` entries summing to exactly t, lexicographic.
inline std::vector<MultiIndex> indices_of_order(int slots, int t) {
  std::vector<MultiIndex> out;
  MultiIndex cur(size_t(slots), 0);
  auto rec = [&](auto&& self, int pos, int rem) -> void {
    if (pos == slots - 1) {
      cur[size_t(pos)] = rem;
      out.push_back(cur);
      return;
    }
    for (int v = rem; v >= 0; --v) {
      cur[size_t(pos)] = v;
      self(self, pos + 1, rem - v);
    }
  };
  if (slots <= 0) throw std::invalid_argument("indices_of_order: slots must be >= 1");
  rec(rec, 0, t);
  std::sort(out.begin(), out.end());
  return out;
}

// Interior sub-multi-indices: 0 <= K <= J componentwise, K != 0, K != J.
inline std::vector<MultiIndex> interior_indices(const MultiIndex& J) {
  std::vector<MultiIndex> out;
  MultiIndex K(J.size(), 0);
  while (true) {
    bool zero = true, full = true;
    for (size_t i = 0; i < J.size(); ++i) {
      if (K[i] != 0) zero = false;
      if (K[i] != J[i]) full = false;
    }
    if (!zero && !full) out.push_back(K);
    size_t pos = 0;
    while (pos < K.size() && K[pos] == J[pos]) K[pos++] = 0;
    if (pos == K.size()) break;
    ++K[pos];
  }
  return out;
}

inline MultiIndex index_minus(const MultiIndex& J, const MultiIndex& K) {
  MultiIndex d(J.size());
  for (size_t i = 0; i < J.size(); ++i) {
    d[i] = J[i] - K[i];
    if (d[i] < 0) throw std::invalid_argument("index_minus: negative component");
  }
  return d;
}

// --- ALLP ------------------------------------------------------------------

// One factor of a subscript chain: an entry of a named symbol matrix.
struct ChainEntry {
  const OperatorValuedMatrix* matrix;
  int row;
  int col;
};

// Sum over the distinct permutations of the symbol multiset with the
// subscript chain fixed in place; products taken in chain order.
inline ModePolynomial allp(const std::vector<ChainEntry>& factors) {
  if (factors.empty()) throw std::invalid_argument("allp: empty chain");
  const int dim = factors[0].matrix->dim();
  const int n_modes = factors[0].matrix->n_modes();
  for (size_t i = 0; i < factors.size(); ++i) {
    const ChainEntry& f = factors[i];
    if (f.matrix == nullptr) throw std::invalid_argument("allp: null symbol");
    if (f.matrix->dim() != dim || f.matrix->n_modes() != n_modes)
      throw std::invalid_argument("allp: symbol shape mismatch");
    if (f.row < 0 || f.row >= dim || f.col < 0 || f.col >= dim)
      throw std::invalid_argument("allp: subscript out of range");
    if (i + 1 < factors.size() && f.col != factors[i + 1].row)
      throw std::invalid_argument("allp: broken subscript chain");
  }
  // symbol ids by first appearance; permutations of the id multiset
  std::vector<const OperatorValuedMatrix*> symbols;
  std::vector<int> ids;
  for (const ChainEntry& f : factors) {
    int id = -1;
    for (size_t s = 0; s < symbols.size(); ++s)
      if (symbols[s] == f.matrix) id = int(s);
    if (id < 0) {
      id = int(symbols.size());
      symbols.push_back(f.matrix);
    }
    ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  ModePolynomial sum(n_modes);
  do {
    ModePolynomial term = symbols[size_t(ids[0])]->at(factors[0].row, factors[0].col);
    for (size_t i = 1; i < factors.size(); ++i) {
      if (term.is_zero()) break;
      term = term * symbols[size_t(ids[i])]->at(factors[i].row, factors[i].col);
    }
    sum += term;
  } while (std::next_permutation(ids.begin(), ids.end()));
  return sum;
}

// --- ExpansionSeries ---------------------------------------------------------

class ExpansionSeries {
 public:
  ExpansionSeries() = default;
  ExpansionSeries(int level, int slots, int max_order, Eigen::VectorXd energies0)
      : level_(level), slots_(slots), max_order_(max_order), energies0_(std::move(energies0)) {}

  int level() const { return level_; }
  int n_slots() const { return slots_; }
  int max_total_order() const { return max_order_; }
  int dim() const { return int(energies0_.size()); }
  double unperturbed_energy(int m) const { return energies0_(m); }

  bool has_energy(const MultiIndex& J) const { return energy_.count(J) != 0; }

  const ModePolynomial& energy(const MultiIndex& J) const {
    auto it = energy_.find(J);
    if (it == energy_.end())
      throw std::out_of_range("ExpansionSeries: eigenvalue coefficient " + index_string(J) +
                              " not computed");
    return it->second;
  }

  // <m_0 | n_J>
  const ModePolynomial& vector_coeff(int m, const MultiIndex& J) const {
    auto p = poisoned_.find(std::make_pair(m, J));
    if (p != poisoned_.end()) throw PhysicsError(p->second);
    auto it = vec_.find(std::make_pair(m, J));
    if (it == vec_.end())
      throw std::out_of_range("ExpansionSeries: eigenvector coefficient m=" + std::to_string(m) +
                              " " + index_string(J) + " not computed");
    return it->second;
  }

  bool vector_poisoned(int m, const MultiIndex& J) const {
    return poisoned_.count(std::make_pair(m, J)) != 0;
  }

  const std::map<MultiIndex, ModePolynomial>& energy_terms() const { return energy_; }

  void set_energy(const MultiIndex& J, ModePolynomial p) { energy_[J] = std::move(p); }
  void set_vector(int m, const MultiIndex& J, ModePolynomial p) {
    vec_[std::make_pair(m, J)] = std::move(p);
  }
  // records a coefficient the nondegenerate recursion cannot define; any later
  // use raises the stored error, while everything already computed stays valid
  void poison_vector(int m, const MultiIndex& J, std::string why) {
    poisoned_[std::make_pair(m, J)] = std::move(why);
  }

 private:
  int level_ = 0;
  int slots_ = 0;
  int max_order_ = 0;
  Eigen::VectorXd energies0_;
  std::map<MultiIndex, ModePolynomial> energy_;
  std::map<std::pair<int, MultiIndex>, ModePolynomial> vec_;
  std::map<std::pair<int, MultiIndex>, std::string> poisoned_;
};

inline const ModePolynomial& eigenvector_coefficient(const ExpansionSeries& series, int m,
                                                     const MultiIndex& J) {
  return series.vector_coeff(m, J);
}

// --- Recursion ---------------------------------------------------------------

// General multi-parameter recursion around level n, dynamic programming by
// total order.  Conventions (all verified against Appendix-B closed forms):
//   E_J      = sum_p sum_{q != n} V^p_{nq} <q0|n_{J-e_p}>  -  sum_{K int} <n0|n_{J-K}> E_K
//   <m0|n_J> = (1/Delta_nm) [ sum_p sum_q V^p_{mq} <q0|n_{J-e_p}>
//                              - sum_{K int} <m0|n_{J-K}> E_K ]        (m != n)
//   <n0|n_J> = -1/2 sum_{K int} sum_m <m0|n_K>^dag <m0|n_{J-K}>
// Scalar eigenvalue coefficients multiply from the right throughout.
inline ExpansionSeries expand_recursive(const Eigen::VectorXd& energies0,
                                        const std::vector<OperatorValuedMatrix>& perturbations,
                                        int n, int max_total_order, int degree_ceiling = -1) {
  const int P = int(perturbations.size());
  if (P == 0) throw std::invalid_argument("expand_recursive: no perturbations");
  const int D = perturbations[0].dim();
  const int NM = perturbations[0].n_modes();
  for (const OperatorValuedMatrix& V : perturbations) {
    if (V.dim() != D || V.n_modes() != NM)
      throw std::invalid_argument("expand_recursive: perturbation shape mismatch");
    if (!V.has_zero_diagonal(1e-12 * std::max(1.0, V.max_abs_coeff())))
      throw InternalError("expand_recursive: interaction diagonal is not zero");
  }
  if (int(energies0.size()) != D)
    throw std::invalid_argument("expand_recursive: energy vector dimension mismatch");
  if (n < 0 || n >= D) throw std::invalid_argument("expand_recursive: level out of range");
  if (max_total_order < 1) throw std::invalid_argument("expand_recursive: order must be >= 1");
  if (degree_ceiling < 0) degree_ceiling = 2 * max_total_order;

  // a level degenerate with n is fatal only if the recursion actually divides by its gap,
  // i.e. its coupling numerator is nonvanishing; collective symmetric bases routinely hold
  // dark pair states at the ground energy whose numerators cancel identically
  std::vector<bool> degenerate(size_t(D), false);
  if (D > 1) {
    const double spread = energies0.maxCoeff() - energies0.minCoeff();
    for (int m = 0; m < D; ++m)
      if (m != n && std::abs(energies0(n) - energies0(m)) <= 1e-9 * std::max(spread, 1e-300))
        degenerate[size_t(m)] = true;
  }

  ExpansionSeries s(n, P, max_total_order, energies0);
  const MultiIndex zero(size_t(P), 0);
  s.set_energy(zero, ModePolynomial::constant(energies0(n), NM));
  for (int m = 0; m < D; ++m)
    s.set_vector(m, zero, m == n ? ModePolynomial::constant(1.0, NM) : ModePolynomial(NM));

  // eigenbasis roundoff leaves ~eps-size residue where symmetric contributions cancel; a
  // coefficient at or below 1e-12 of the a-priori chain bound is dust, not physics
  double maxv = 0.0;
  for (const OperatorValuedMatrix& V : perturbations) maxv = std::max(maxv, V.max_abs_coeff());
  double gap_min = std::numeric_limits<double>::infinity();
  for (int m = 0; m < D; ++m)
    if (m != n && !degenerate[size_t(m)])
      gap_min = std::min(gap_min, std::abs(energies0(n) - energies0(m)));
  if (!std::isfinite(gap_min)) gap_min = 1.0;
  const double ratio = maxv / gap_min;
  auto dust_energy = [&](int t) { return 1e-12 * maxv * std::pow(ratio, t - 1); };
  auto dust_vector = [&](int t) { return 1e-12 * std::pow(ratio, t); };

  auto check_degree = [&](const ModePolynomial& p, const char* what, const MultiIndex& J) {
    if (p.degree() > degree_ceiling)
      throw InternalError(std::string("expand_recursive: ") + what + " " + index_string(J) +
                          " exceeds degree ceiling");
  };

  for (int t = 1; t <= max_total_order; ++t) {
    for (const MultiIndex& J : indices_of_order(P, t)) {
      const std::vector<MultiIndex> interior = interior_indices(J);

      ModePolynomial EJ(NM);
      for (int p = 0; p < P; ++p) {
        if (J[size_t(p)] == 0) continue;
        const MultiIndex Jm = index_minus(J, unit_index(p, P));
        for (int q = 0; q < D; ++q) {
          if (q == n) continue;
          const ModePolynomial& Vnq = perturbations[size_t(p)].at(n, q);
          if (Vnq.is_zero()) continue;
          const ModePolynomial& cq = s.vector_coeff(q, Jm);
          if (cq.is_zero()) continue;
          EJ += Vnq * cq;
        }
      }
      for (const MultiIndex& K : interior) {
        const ModePolynomial& cn = s.vector_coeff(n, index_minus(J, K));
        const ModePolynomial& EK = s.energy(K);
        if (cn.is_zero() || EK.is_zero()) continue;
        EJ -= cn * EK;
      }
      EJ.prune();
      EJ.prune_below(dust_energy(t));
      check_degree(EJ, "eigenvalue coefficient", J);
      s.set_energy(J, std::move(EJ));

      for (int m = 0; m < D; ++m) {
        if (m == n) continue;
        ModePolynomial c(NM);
        for (int p = 0; p < P; ++p) {
          if (J[size_t(p)] == 0) continue;
          const MultiIndex Jm = index_minus(J, unit_index(p, P));
          for (int q = 0; q < D; ++q) {
            const ModePolynomial& Vmq = perturbations[size_t(p)].at(m, q);
            if (Vmq.is_zero()) continue;
            const ModePolynomial& cq = s.vector_coeff(q, Jm);
            if (cq.is_zero()) continue;
            c += Vmq * cq;
          }
        }
        for (const MultiIndex& K : interior) {
          const ModePolynomial& cm = s.vector_coeff(m, index_minus(J, K));
          const ModePolynomial& EK = s.energy(K);
          if (cm.is_zero() || EK.is_zero()) continue;
          c -= cm * EK;
        }
        if (degenerate[size_t(m)]) {
          // numerator magnitude bounded a priori by maxv * ratio^(t-1); anything far below
          // that is cancellation roundoff and the level is dark at this order
          if (c.max_abs_coeff() <= 1e-9 * maxv * std::pow(ratio, t - 1)) {
            s.set_vector(m, J, ModePolynomial(NM));
            continue;
          }
          // a genuinely coupled degenerate partner: the degenerate manifold mixes at
          // this order, so this one coefficient has no nondegenerate value; energies
          // and every other coefficient at computed orders remain valid
          s.poison_vector(m, J,
                          "expand_recursive: degenerate gap Delta_{" + std::to_string(n) + "," +
                              std::to_string(m) + "} with nonvanishing coupling at order " +
                              index_string(J) + "; eigenvector coefficient undefined");
          continue;
        }
        c *= Complex(1.0 / (energies0(n) - energies0(m)), 0.0);
        c.prune();
        c.prune_below(dust_vector(t));
        check_degree(c, "eigenvector coefficient", J);
        s.set_vector(m, J, std::move(c));
      }

      ModePolynomial cn(NM);
      for (const MultiIndex& K : interior) {
        const MultiIndex JK = index_minus(J, K);
        for (int m = 0; m < D; ++m) {
          const ModePolynomial& left = s.vector_coeff(m, K);
          const ModePolynomial& right = s.vector_coeff(m, JK);
          if (left.is_zero() || right.is_zero()) continue;
          cn -= Complex(0.5, 0.0) * (left.dagger() * right);
        }
      }
      cn.prune();
      cn.prune_below(dust_vector(t));
      check_degree(cn, "eigenvector coefficient", J);
      s.set_vector(n, J, std::move(cn));
    }
  }
  return s;
}

inline ExpansionSeries expand_recursive(const CoupledSystem& sys, int n, int max_total_order,
                                        int degree_ceiling = -1) {
  return expand_recursive(sys.basis.energies, sys.interactions, n, max_total_order,
                          degree_ceiling);
}

// --- Table 1 closed forms ------------------------------------------------------

namespace detail {

// Generic Table-1 evaluation for the symbol multiset S (size 2..4) over
// ground gaps Delta_l = E0(0) - E0(l).
inline ModePolynomial closed_form(const std::vector<const OperatorValuedMatrix*>& S,
                                  const Eigen::VectorXd& energies0) {
  const int D = int(energies0.size());
  const int NM = S[0]->n_modes();
  auto gap = [&](int l) { return energies0(0) - energies0(l); };
  ModePolynomial out(NM);
  const int t = int(S.size());
  if (t == 2) {
    for (int l = 1; l < D; ++l)
      out += (1.0 / gap(l)) * allp({{S[0], 0, l}, {S[1], l, 0}});
  } else if (t == 3) {
    for (int k = 1; k < D; ++k)
      for (int l = 1; l < D; ++l)
        out += (1.0 / (gap(k) * gap(l))) * allp({{S[0], 0, k}, {S[1], k, l}, {S[2], l, 0}});
  } else if (t == 4) {
    for (int l = 1; l < D; ++l)
      for (int k = 1; k < D; ++k)
        for (int q = 1; q < D; ++q) {
          if (q == k || q == l) continue;
          out += (1.0 / (gap(q) * gap(k) * gap(l))) *
                 allp({{S[0], 0, k}, {S[1], k, q}, {S[2], q, l}, {S[3], l, 0}});
        }
    for (int k = 1; k < D; ++k)
      for (int l = 1; l < D; ++l)
        out -= (1.0 / (gap(k) * gap(k) * gap(l))) *
               allp({{S[0], 0, k}, {S[1], k, 0}, {S[2], 0, l}, {S[3], l, 0}});
  } else {
    throw InternalError("closed_form: unsupported order");
  }
  out.prune();
  // same dust cut as the recursion: residue at 1e-12 of the chain bound is roundoff
  double maxv = 0.0;
  for (const OperatorValuedMatrix* V : S) maxv = std::max(maxv, V->max_abs_coeff());
  double gap_min = std::numeric_limits<double>::infinity();
  for (int l = 1; l < D; ++l) gap_min = std::min(gap_min, std::abs(gap(l)));
  if (D == 1) gap_min = 1.0;
  out.prune_below(1e-12 * maxv * std::pow(maxv / gap_min, t - 1));
  return out;
}

}  // namespace detail

// Table-1 closed form for the ground-state eigenvalue coefficient E^(0)_J.
// Index patterns beyond those displayed come from permuting subscripts and/or
// zeroing them, which the symbol-multiset construction realizes directly.
inline ModePolynomial eigenvalue_coefficient_closed(const MultiIndex& J, const CoupledSystem& sys,
                                                    int n = 0) {
  if (n != 0)
    throw std::invalid_argument(
        "eigenvalue_coefficient_closed: closed forms are written for the ground state; "
        "use expand_recursive for excited manifolds");
  if (int(J.size()) != sys.n_modes())
    throw std::invalid_argument("eigenvalue_coefficient_closed: multi-index arity mismatch");
  const int t = total_order(J);
  if (t > 4)
    throw ConfigError("eigenvalue_coefficient_closed: total order " + std::to_string(t) +
                      " exceeds Table 1 (max 4); use expand_recursive");
  const int NM = sys.n_modes();
  if (t == 0) return ModePolynomial::constant(sys.basis.energies(0), NM);
  if (t == 1) return ModePolynomial(NM);
  std::vector<const OperatorValuedMatrix*> S;
  for (int p = 0; p < sys.n_modes(); ++p)
    for (int c = 0; c < J[size_t(p)]; ++c) S.push_back(&sys.interactions[size_t(p)]);
  return detail::closed_form(S, sys.basis.energies);
}

}  // namespace heff
