#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "heff/polynomial.hpp"
#include "heff/fock.hpp"
#include "naive_algebra.hpp"

using heff::Complex;
using heff::FockTruncation;
using heff::Monomial;
using heff::ModePolynomial;
using heff::ModePower;

namespace {

ModePolynomial random_poly(std::mt19937_64& rng, int n_modes, int n_terms, int max_pow) {
    std::uniform_int_distribution<int> pw(0, max_pow);
    std::uniform_real_distribution<double> cf(-2.0, 2.0);
    ModePolynomial p(n_modes);
    for (int t = 0; t < n_terms; ++t) {
        Monomial mono(static_cast<size_t>(n_modes));
        for (auto& mp : mono) {
            mp.raise = pw(rng);
            mp.lower = pw(rng);
        }
        p.add_term(mono, Complex(cf(rng), cf(rng)));
    }
    return p;
}

Monomial mono2(int r0, int l0, int r1 = -1, int l1 = -1) {
    Monomial m;
    m.push_back({r0, l0});
    if (r1 >= 0) m.push_back({r1, l1});
    return m;
}

}  // namespace

TEST_CASE("wick_product_single_mode_hand_case") {
    // a^2 a^dag^2 = a^dag^2 a^2 + 4 a^dag a + 2
    const ModePolynomial a = ModePolynomial::annihilate(0, 1);
    const ModePolynomial ad = ModePolynomial::create(0, 1);
    const ModePolynomial p = (a * a) * (ad * ad);
    CHECK(p.coefficient(mono2(2, 2)) == Complex(1.0));
    CHECK(p.coefficient(mono2(1, 1)) == Complex(4.0));
    CHECK(p.coefficient(mono2(0, 0)) == Complex(2.0));
    CHECK(p.terms().size() == 3u);
}

TEST_CASE("number_operator_and_commutators") {
    const ModePolynomial a = ModePolynomial::annihilate(0, 1);
    const ModePolynomial ad = ModePolynomial::create(0, 1);
    const ModePolynomial n = ModePolynomial::number(0, 1);
    CHECK(heff::max_coeff_distance(ad * a, n) == 0.0);
    // [a, a^dag] = 1
    const ModePolynomial c = commutator(a, ad);
    CHECK(c.coefficient(mono2(0, 0)) == Complex(1.0));
    CHECK(c.terms().size() == 1u);
    // [n, a^dag] = a^dag
    CHECK(heff::max_coeff_distance(commutator(n, ad), ad) == 0.0);
    // distinct modes commute
    const ModePolynomial b = ModePolynomial::annihilate(1, 2);
    const ModePolynomial ad2 = ModePolynomial::create(0, 2);
    CHECK(commutator(b, ad2).is_zero());
}

TEST_CASE("random_products_match_elementary_reordering") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 30; ++trial) {
        const int n_modes = 1 + int(rng() % 3);
        const ModePolynomial x = random_poly(rng, n_modes, 3, 2);
        const ModePolynomial y = random_poly(rng, n_modes, 3, 2);
        const naive::Terms want = naive::product(x, y);
        const naive::Terms got = naive::poly_terms(x * y);
        INFO("trial " << trial << " modes " << n_modes);
        CHECK(naive::terms_distance(want, got) < 1e-12);
    }
}

TEST_CASE("product_mode_count_mismatch_throws") {
    const ModePolynomial x(1), y(2);
    CHECK_THROWS_AS(x * y, std::invalid_argument);
    ModePolynomial z(1);
    CHECK_THROWS_AS(z += y, std::invalid_argument);
}

TEST_CASE("add_term_arity_guard") {
    ModePolynomial p(2);
    CHECK_THROWS_AS(p.add_term(mono2(1, 0), 1.0), std::invalid_argument);
    CHECK_NOTHROW(p.add_term(mono2(1, 0, 0, 0), 1.0));
}

TEST_CASE("dagger_conjugates_and_transposes") {
    std::mt19937_64 rng(202);
    const ModePolynomial p = random_poly(rng, 2, 4, 2);
    const ModePolynomial pd = p.dagger();
    for (const auto& [mono, c] : p.terms()) {
        Monomial t = mono;
        for (auto& mp : t) std::swap(mp.raise, mp.lower);
        CHECK(pd.coefficient(t) == std::conj(c));
    }
    CHECK(heff::max_coeff_distance(pd.dagger(), p) == 0.0);
    const ModePolynomial h = p + pd;
    CHECK(h.is_hermitian(1e-14));
    CHECK_FALSE((p + ModePolynomial::create(0, 2)).is_hermitian(1e-14));
}

TEST_CASE("realize_matches_direct_matrix_elements") {
    std::mt19937_64 rng(303);
    for (int trial = 0; trial < 12; ++trial) {
        const int n_modes = 1 + int(rng() % 2);
        FockTruncation tr = n_modes == 1 ? FockTruncation::uniform(1, 6)
                                         : FockTruncation(std::vector<int>{4, 3});
        const ModePolynomial p = random_poly(rng, n_modes, 4, 3);
        const Eigen::MatrixXcd got = heff::realize(p, tr);
        const Eigen::MatrixXcd want = naive::realize_poly(p, tr);
        INFO("trial " << trial);
        CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("realize_adjoint_consistency") {
    // projection truncation: (P op P)^dag = P op^dag P exactly
    std::mt19937_64 rng(404);
    const ModePolynomial p = random_poly(rng, 2, 4, 2);
    const FockTruncation tr(std::vector<int>{4, 4});
    const Eigen::MatrixXcd m = heff::realize(p, tr);
    const Eigen::MatrixXcd md = heff::realize(p.dagger(), tr);
    CHECK((m.adjoint() - md).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("realize_product_agrees_away_from_cutoff") {
    // matrix product of realizations only leaks where intermediate states
    // cross the cutoff; interior columns must agree exactly
    std::mt19937_64 rng(505);
    const ModePolynomial x = random_poly(rng, 1, 3, 2);
    const ModePolynomial y = random_poly(rng, 1, 3, 2);
    const FockTruncation tr = FockTruncation::uniform(1, 12);
    const Eigen::MatrixXcd lhs = heff::realize(x, tr) * heff::realize(y, tr);
    const Eigen::MatrixXcd rhs = heff::realize(x * y, tr);
    const int margin = x.degree() + y.degree();
    for (int col = 0; col + margin <= 12; ++col)
        for (int row = 0; row < lhs.rows(); ++row) {
            INFO("row " << row << " col " << col);
            CHECK(std::abs(lhs(row, col) - rhs(row, col)) < 1e-12);
        }
}

TEST_CASE("prune_and_is_zero") {
    ModePolynomial p(1);
    p.add_term(mono2(1, 1), 1.0);
    p.add_term(mono2(2, 2), 1e-16);
    p.prune();  // relative: drops the 1e-16 term
    CHECK(p.terms().size() == 1u);

    ModePolynomial q(1);
    q.add_term(mono2(0, 1), 1e-13);
    q.prune_below(1e-12);
    CHECK(q.terms().empty());
    CHECK(q.is_zero());

    ModePolynomial r(1);
    r.add_term(mono2(0, 1), 1e-13);
    CHECK_FALSE(r.is_zero());
    CHECK(r.is_zero(1e-12));
}

TEST_CASE("degree_helpers") {
    ModePolynomial p(2);
    p.add_term(mono2(2, 1, 0, 3), 1.0);
    p.add_term(mono2(1, 0, 1, 0), 0.5);
    CHECK(p.degree() == 6);
    CHECK(p.mode_degree(0) == 3);
    CHECK(p.mode_degree(1) == 3);
    CHECK(ModePolynomial(2).degree() == 0);
}

TEST_CASE("coherent_state_is_annihilation_eigenvector") {
    const FockTruncation tr = FockTruncation::uniform(1, 40);
    const Complex alpha(1.2, -0.4);
    const Eigen::VectorXcd psi = heff::coherent_state(alpha, 40);
    CHECK(std::abs(psi.norm() - 1.0) < 1e-10);
    const Eigen::MatrixXcd a = heff::realize(ModePolynomial::annihilate(0, 1), tr);
    const Eigen::VectorXcd resid = a * psi - alpha * psi;
    // truncation tail only
    CHECK(resid.norm() < 1e-8);
}

TEST_CASE("eigendecompose_orders_and_fixes_phases") {
    Eigen::MatrixXcd h(2, 2);
    h << 1.0, Complex(0.0, -0.5), Complex(0.0, 0.5), -1.0;
    const heff::Eigensystem es = heff::eigendecompose(h);
    CHECK(es.values(0) < es.values(1));
    for (int k = 0; k < 2; ++k) {
        Eigen::Index imax;
        es.vectors.col(k).cwiseAbs().maxCoeff(&imax);
        const Complex big = es.vectors.col(k)(imax);
        CHECK(std::abs(std::imag(big)) < 1e-14);
        CHECK(std::real(big) > 0.0);
        CHECK(std::abs((h * es.vectors.col(k) - es.values(k) * es.vectors.col(k)).norm()) < 1e-12);
    }
    Eigen::MatrixXcd bad(2, 2);
    bad << 0.0, 1.0, 0.5, 0.0;
    CHECK_THROWS_AS(heff::eigendecompose(bad), heff::PhysicsError);
}
