#pragma once

// Square matrix over emitter (or collective) levels whose entries are
// normal-ordered mode polynomials.

#include "heff/polynomial.hpp"

namespace heff {

class OperatorValuedMatrix {
 public:
  OperatorValuedMatrix() : dim_(0), n_modes_(0) {}
  OperatorValuedMatrix(int dim, int n_modes)
      : dim_(dim), n_modes_(n_modes), entries_(size_t(dim) * dim, ModePolynomial(n_modes)) {
    if (dim < 0) throw std::invalid_argument("OperatorValuedMatrix: negative dimension");
  }

  int dim() const { return dim_; }
  int n_modes() const { return n_modes_; }

  ModePolynomial& at(int row, int col) { return entries_.at(check(row) * size_t(dim_) + check(col)); }
  const ModePolynomial& at(int row, int col) const {
    return entries_.at(check(row) * size_t(dim_) + check(col));
  }

  OperatorValuedMatrix dagger() const {
    OperatorValuedMatrix out(dim_, n_modes_);
    for (int r = 0; r < dim_; ++r)
      for (int c = 0; c < dim_; ++c) out.at(c, r) = at(r, c).dagger();
    return out;
  }

  bool is_hermitian(double abs_tol) const {
    for (int r = 0; r < dim_; ++r)
      for (int c = r; c < dim_; ++c)
        if (max_coeff_distance(at(r, c), at(c, r).dagger()) > abs_tol) return false;
    return true;
  }

  bool has_zero_diagonal(double abs_tol = 0.0) const {
    for (int r = 0; r < dim_; ++r)
      if (!at(r, r).is_zero(abs_tol)) return false;
    return true;
  }

  double max_abs_coeff() const {
    double m = 0.0;
    for (const auto& p : entries_) m = std::max(m, p.max_abs_coeff());
    return m;
  }

  OperatorValuedMatrix& operator*=(Complex s) {
    for (auto& p : entries_) p *= s;
    return *this;
  }

  OperatorValuedMatrix& operator+=(const OperatorValuedMatrix& o) {
    if (o.dim_ != dim_ || o.n_modes_ != n_modes_)
      throw std::invalid_argument("OperatorValuedMatrix: shape mismatch");
    for (size_t i = 0; i < entries_.size(); ++i) entries_[i] += o.entries_[i];
    return *this;
  }

 private:
  size_t check(int i) const {
    if (i < 0 || i >= dim_) throw std::out_of_range("OperatorValuedMatrix: index out of range");
    return size_t(i);
  }

  int dim_;
  int n_modes_;
  std::vector<ModePolynomial> entries_;
};

}  // namespace heff
