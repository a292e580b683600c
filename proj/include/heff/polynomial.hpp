#pragma once

// Normal-ordered polynomial algebra for multi-mode bosonic operators.
//
// A monomial is a product over modes of a†^raise a^lower factors, kept in
// normal order (all creation operators to the left within each mode).
// Distinct modes commute; within a mode [a, a†] = 1.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace heff {

using Complex = std::complex<double>;

// Powers of (a†, a) for one mode of a normal-ordered monomial.
struct ModePower {
  int raise = 0;
  int lower = 0;

  friend bool operator==(const ModePower& x, const ModePower& y) {
    return x.raise == y.raise && x.lower == y.lower;
  }
  friend bool operator<(const ModePower& x, const ModePower& y) {
    if (x.raise != y.raise) return x.raise < y.raise;
    return x.lower < y.lower;
  }
};

using Monomial = std::vector<ModePower>;  // one entry per mode

inline std::string mode_name(int m) {
  static const char* names = "abcdefgh";
  if (m < 8) return std::string(1, names[m]);
  return "m" + std::to_string(m);
}

// binomial coefficient, exact in double for the small arguments used here
inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 0; i < k; ++i) r = r * double(n - i) / double(i + 1);
  return std::round(r);
}

inline double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= double(i);
  return r;
}

class ModePolynomial {
 public:
  ModePolynomial() : n_modes_(0) {}
  explicit ModePolynomial(int n_modes) : n_modes_(check_modes(n_modes)) {}

  static ModePolynomial zero(int n_modes) { return ModePolynomial(n_modes); }

  static ModePolynomial constant(Complex c, int n_modes) {
    ModePolynomial p(n_modes);
    p.add_term(Monomial(n_modes), c);
    return p;
  }

  // a†_m
  static ModePolynomial create(int mode, int n_modes) {
    ModePolynomial p(n_modes);
    Monomial mono(n_modes);
    mono.at(mode).raise = 1;
    p.add_term(mono, 1.0);
    return p;
  }

  // a_m
  static ModePolynomial annihilate(int mode, int n_modes) {
    ModePolynomial p(n_modes);
    Monomial mono(n_modes);
    mono.at(mode).lower = 1;
    p.add_term(mono, 1.0);
    return p;
  }

  static ModePolynomial monomial(const Monomial& mono, Complex c) {
    ModePolynomial p(int(mono.size()));
    p.add_term(mono, c);
    return p;
  }

  // number operator a†_m a_m
  static ModePolynomial number(int mode, int n_modes) {
    ModePolynomial p(n_modes);
    Monomial mono(n_modes);
    mono.at(mode) = {1, 1};
    p.add_term(mono, 1.0);
    return p;
  }

  int n_modes() const { return n_modes_; }
  const std::map<Monomial, Complex>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  void add_term(const Monomial& mono, Complex c) {
    if (int(mono.size()) != n_modes_)
      throw std::invalid_argument("ModePolynomial: monomial arity mismatch");
    auto it = terms_.find(mono);
    if (it == terms_.end())
      terms_.emplace(mono, c);
    else
      it->second += c;
  }

  Complex coefficient(const Monomial& mono) const {
    auto it = terms_.find(mono);
    return it == terms_.end() ? Complex(0.0) : it->second;
  }

  double max_abs_coeff() const {
    double m = 0.0;
    for (const auto& [mono, c] : terms_) m = std::max(m, std::abs(c));
    return m;
  }

  // drop terms below rel_tol * (largest coefficient); rel_tol <= 0 drops exact zeros only
  ModePolynomial& prune(double rel_tol = kDefaultPrune) {
    const double cut = rel_tol > 0.0 ? rel_tol * max_abs_coeff() : 0.0;
    for (auto it = terms_.begin(); it != terms_.end();) {
      if (std::abs(it->second) <= cut)
        it = terms_.erase(it);
      else
        ++it;
    }
    return *this;
  }

  // drop terms at or below an absolute cut, regardless of the largest coefficient
  ModePolynomial& prune_below(double abs_cut) {
    for (auto it = terms_.begin(); it != terms_.end();) {
      if (std::abs(it->second) <= abs_cut)
        it = terms_.erase(it);
      else
        ++it;
    }
    return *this;
  }

  bool is_zero(double abs_tol = 0.0) const { return max_abs_coeff() <= abs_tol; }

  // largest per-term total power, max over terms
  int degree() const {
    int d = 0;
    for (const auto& [mono, c] : terms_) {
      int t = 0;
      for (const auto& mp : mono) t += mp.raise + mp.lower;
      d = std::max(d, t);
    }
    return d;
  }

  // largest raise+lower power of one mode across all terms (truncation-safety margin)
  int mode_degree(int mode) const {
    int d = 0;
    for (const auto& [mono, c] : terms_) d = std::max(d, mono.at(mode).raise + mono.at(mode).lower);
    return d;
  }

  ModePolynomial& operator+=(const ModePolynomial& o) {
    require_same_arity(o);
    for (const auto& [mono, c] : o.terms_) add_term(mono, c);
    prune();
    return *this;
  }

  ModePolynomial& operator-=(const ModePolynomial& o) {
    require_same_arity(o);
    for (const auto& [mono, c] : o.terms_) add_term(mono, -c);
    prune();
    return *this;
  }

  ModePolynomial& operator*=(Complex s) {
    for (auto& [mono, c] : terms_) c *= s;
    prune();
    return *this;
  }

  friend ModePolynomial operator+(ModePolynomial x, const ModePolynomial& y) { return x += y; }
  friend ModePolynomial operator-(ModePolynomial x, const ModePolynomial& y) { return x -= y; }
  friend ModePolynomial operator*(ModePolynomial x, Complex s) { return x *= s; }
  friend ModePolynomial operator*(Complex s, ModePolynomial x) { return x *= s; }
  friend ModePolynomial operator-(ModePolynomial x) { return x *= Complex(-1.0); }

  // normal-ordered product; exact coefficient arithmetic up to pruning
  friend ModePolynomial operator*(const ModePolynomial& x, const ModePolynomial& y) {
    x.require_same_arity(y);
    ModePolynomial out(x.n_modes_);
    for (const auto& [mx, cx] : x.terms_)
      for (const auto& [my, cy] : y.terms_) accumulate_product(out, mx, my, cx * cy);
    out.prune();
    return out;
  }

  // Hermitian conjugate: (a†^r a^l)† = a†^l a^r, coefficients conjugated
  ModePolynomial dagger() const {
    ModePolynomial out(n_modes_);
    for (const auto& [mono, c] : terms_) {
      Monomial flipped(mono);
      for (auto& mp : flipped) std::swap(mp.raise, mp.lower);
      out.add_term(flipped, std::conj(c));
    }
    return out;
  }

  bool is_hermitian(double abs_tol) const {
    ModePolynomial d = *this - dagger();
    return d.is_zero(abs_tol);
  }

  friend ModePolynomial commutator(const ModePolynomial& x, const ModePolynomial& y) {
    return x * y - y * x;
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [mono, c] : terms_) {
      if (!first) os << " + ";
      first = false;
      os << "(" << c.real();
      if (c.imag() != 0.0) os << (c.imag() < 0 ? "" : "+") << c.imag() << "i";
      os << ")";
      for (int m = 0; m < n_modes_; ++m) {
        for (int i = 0; i < mono[m].raise; ++i) os << " " << mode_name(m) << "+";
        for (int i = 0; i < mono[m].lower; ++i) os << " " << mode_name(m);
      }
    }
    return os.str();
  }

  static constexpr double kDefaultPrune = 1e-14;

 private:
  static int check_modes(int n) {
    if (n < 0) throw std::invalid_argument("ModePolynomial: negative mode count");
    return n;
  }

  void require_same_arity(const ModePolynomial& o) const {
    if (n_modes_ != o.n_modes_)
      throw std::invalid_argument("ModePolynomial: mode count mismatch");
  }

  // (a†^r1 a^l1)(a†^r2 a^l2) = sum_i i! C(l1,i) C(r2,i) a†^(r1+r2-i) a^(l1+l2-i), per mode
  static void accumulate_product(ModePolynomial& out, const Monomial& mx, const Monomial& my,
                                 Complex c) {
    const int n = int(mx.size());
    Monomial acc(n);
    accumulate_mode(out, mx, my, c, 0, acc, n);
  }

  static void accumulate_mode(ModePolynomial& out, const Monomial& mx, const Monomial& my,
                              Complex c, int mode, Monomial& acc, int n) {
    if (mode == n) {
      out.add_term(acc, c);
      return;
    }
    const int r1 = mx[mode].raise, l1 = mx[mode].lower;
    const int r2 = my[mode].raise, l2 = my[mode].lower;
    const int imax = std::min(l1, r2);
    for (int i = 0; i <= imax; ++i) {
      const double w = factorial(i) * binomial(l1, i) * binomial(r2, i);
      acc[mode] = {r1 + r2 - i, l1 + l2 - i};
      accumulate_mode(out, mx, my, c * w, mode + 1, acc, n);
    }
    acc[mode] = {0, 0};
  }

  int n_modes_;
  std::map<Monomial, Complex> terms_;
};

// max |coefficient difference|, for tolerance comparisons in tests and guards
inline double max_coeff_distance(const ModePolynomial& x, const ModePolynomial& y) {
  ModePolynomial d = x - y;
  return d.max_abs_coeff();
}

}  // namespace heff
