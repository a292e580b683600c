#pragma once

// Brute-force reference implementations used only by the tests.  Everything
// here is written directly from the defining relations ([a, a^dag] = 1,
// distinct modes commute) with no shared code paths into the library, so the
// two sides can disagree when one of them is wrong.

#include <complex>
#include <map>
#include <vector>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "heff/polynomial.hpp"
#include "heff/fock.hpp"

namespace naive {

struct Letter {
    int mode = 0;
    bool dag = false;
};

using Word = std::vector<Letter>;
// canonical key: (raise, lower) per mode, trailing (0,0) pairs trimmed
using Key = std::vector<std::pair<int, int>>;
using Terms = std::map<Key, std::complex<double>>;

inline Key word_key(const Word& w, int n_modes) {
    Key k(static_cast<size_t>(n_modes), {0, 0});
    for (const auto& l : w) {
        if (l.dag) k[static_cast<size_t>(l.mode)].first++;
        else k[static_cast<size_t>(l.mode)].second++;
    }
    return k;
}

// True when letters l, r sit in canonical order (modes ascending, within a
// mode all daggers before all lowering operators).
inline bool ordered(const Letter& l, const Letter& r) {
    if (l.mode != r.mode) return l.mode <= r.mode;
    if (l.dag == r.dag) return true;
    return l.dag;  // dagger first
}

// Rewrite a word into normally ordered terms by adjacent transpositions:
//   a_m a_m^dag = a_m^dag a_m + 1,   [x_m, y_k] = 0 for m != k.
inline void normal_order_into(const Word& w, std::complex<double> coeff,
                              int n_modes, Terms& out) {
    for (size_t i = 0; i + 1 < w.size(); ++i) {
        if (ordered(w[i], w[i + 1])) continue;
        Word swapped = w;
        std::swap(swapped[i], swapped[i + 1]);
        normal_order_into(swapped, coeff, n_modes, out);
        if (w[i].mode == w[i + 1].mode) {
            Word contracted;
            contracted.reserve(w.size() - 2);
            for (size_t j = 0; j < w.size(); ++j)
                if (j != i && j != i + 1) contracted.push_back(w[j]);
            normal_order_into(contracted, coeff, n_modes, out);
        }
        return;
    }
    out[word_key(w, n_modes)] += coeff;
}

inline Word monomial_word(const Key& k) {
    Word w;
    for (size_t m = 0; m < k.size(); ++m) {
        for (int i = 0; i < k[m].first; ++i) w.push_back({static_cast<int>(m), true});
        for (int i = 0; i < k[m].second; ++i) w.push_back({static_cast<int>(m), false});
    }
    return w;
}

inline Terms poly_terms(const heff::ModePolynomial& p) {
    Terms t;
    for (const auto& [mono, c] : p.terms()) {
        Key k;
        for (const auto& mp : mono) k.emplace_back(mp.raise, mp.lower);
        t[k] += c;
    }
    return t;
}

// Normally ordered product computed letter by letter.
inline Terms product(const heff::ModePolynomial& x, const heff::ModePolynomial& y) {
    if (x.n_modes() != y.n_modes())
        throw std::invalid_argument("naive::product: mode count mismatch");
    const int n = x.n_modes();
    Terms out;
    for (const auto& [mx, cx] : x.terms()) {
        Key kx;
        for (const auto& mp : mx) kx.emplace_back(mp.raise, mp.lower);
        for (const auto& [my, cy] : y.terms()) {
            Key ky;
            for (const auto& mp : my) ky.emplace_back(mp.raise, mp.lower);
            Word w = monomial_word(kx);
            Word wy = monomial_word(ky);
            w.insert(w.end(), wy.begin(), wy.end());
            normal_order_into(w, cx * cy, n, out);
        }
    }
    return out;
}

inline double terms_distance(const Terms& a, const Terms& b) {
    double d = 0.0;
    for (const auto& [k, c] : a) {
        auto it = b.find(k);
        const std::complex<double> other = (it == b.end()) ? 0.0 : it->second;
        d = std::max(d, std::abs(c - other));
    }
    for (const auto& [k, c] : b)
        if (a.find(k) == a.end()) d = std::max(d, std::abs(c));
    return d;
}

// Dense realization of a single normally ordered monomial straight from
//   a^dag^r a^l |n> = sqrt(n!/(n-l)!) sqrt((n-l+r)!/(n-l)!) |n-l+r>,
// dropping any column whose target occupation would exceed the cutoff.
inline Eigen::MatrixXcd realize_terms(const Terms& t, const heff::FockTruncation& tr) {
    const long dim = tr.dim();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& [k, c] : t) {
        if (k.size() > tr.nmax.size())
            throw std::invalid_argument("naive::realize_terms: monomial arity exceeds truncation");
        for (long col = 0; col < dim; ++col) {
            std::vector<int> occ = tr.occupation(col);
            double amp = 1.0;
            bool alive = true;
            for (size_t m = 0; m < k.size() && alive; ++m) {
                const int n = occ[m];
                const int l = k[m].second, r = k[m].first;
                const int target = n - l + r;
                if (n - l < 0 || target > tr.nmax[m]) { alive = false; break; }
                for (int i = 0; i < l; ++i) amp *= std::sqrt(static_cast<double>(n - i));
                for (int i = 0; i < r; ++i) amp *= std::sqrt(static_cast<double>(n - l + 1 + i));
                occ[m] = target;
            }
            if (!alive || amp == 0.0) continue;
            out(tr.index(occ), col) += amp * c;
        }
    }
    return out;
}

inline Eigen::MatrixXcd realize_poly(const heff::ModePolynomial& p, const heff::FockTruncation& tr) {
    return realize_terms(poly_terms(p), tr);
}

}  // namespace naive
