#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "heff/heff.hpp"
#include "generators.hpp"

using heff::ChainEntry;
using heff::Complex;
using heff::ExpansionSeries;
using heff::ModePolynomial;
using heff::Monomial;
using heff::MultiIndex;
using heff::OperatorValuedMatrix;
using heff::PhysicsError;

namespace {

Monomial nmono(int r, int l) { return Monomial{{r, l}}; }

}  // namespace

TEST_CASE("multi_index_utilities") {
    CHECK(heff::total_order({2, 0, 3}) == 5);
    CHECK_THROWS_AS(heff::total_order({1, -1}), std::invalid_argument);
    CHECK(heff::unit_index(1, 3) == MultiIndex{0, 1, 0});

    // stars and bars: C(t + P - 1, P - 1)
    CHECK(heff::indices_of_order(2, 3).size() == 4u);
    CHECK(heff::indices_of_order(3, 4).size() == 15u);
    const auto idx = heff::indices_of_order(2, 2);
    CHECK(std::is_sorted(idx.begin(), idx.end()));
    CHECK(std::adjacent_find(idx.begin(), idx.end()) == idx.end());

    const auto interior = heff::interior_indices({2, 1});
    // (0,1), (1,0), (1,1), (2,0) -- excludes 0 and J itself
    CHECK(interior.size() == 4u);
    for (const auto& k : interior) {
        CHECK(heff::total_order(k) > 0);
        CHECK(k != MultiIndex{2, 1});
    }
    CHECK_THROWS_AS(heff::index_minus({1, 0}, {0, 1}), std::invalid_argument);
    CHECK(heff::index_minus({2, 1}, {1, 0}) == MultiIndex{1, 1});
}

TEST_CASE("allp_sums_distinct_symbol_arrangements") {
    std::mt19937_64 rng(7);
    const gen::RawSystem sys = gen::random_raw_system(rng, 4, 1);
    const OperatorValuedMatrix& V = sys.V;
    const OperatorValuedMatrix& X = sys.X;

    // single factor
    CHECK(heff::max_coeff_distance(heff::allp({{&V, 0, 1}}), V.at(0, 1)) == 0.0);

    // {V, X} on chain 0-1-2: V01 X12 + X01 V12
    const ModePolynomial two = heff::allp({{&V, 0, 1}, {&X, 1, 2}});
    const ModePolynomial two_ref = V.at(0, 1) * X.at(1, 2) + X.at(0, 1) * V.at(1, 2);
    CHECK(heff::max_coeff_distance(two, two_ref) < 1e-13);

    // multiset {V, V, X} on chain 0-1-2-3: three distinct arrangements
    const ModePolynomial three = heff::allp({{&V, 0, 1}, {&V, 1, 2}, {&X, 2, 3}});
    const ModePolynomial three_ref = V.at(0, 1) * V.at(1, 2) * X.at(2, 3) +
                                     V.at(0, 1) * X.at(1, 2) * V.at(2, 3) +
                                     X.at(0, 1) * V.at(1, 2) * V.at(2, 3);
    CHECK(heff::max_coeff_distance(three, three_ref) < 1e-13);

    // identical symbols: single arrangement, no double counting
    const ModePolynomial same = heff::allp({{&V, 0, 1}, {&V, 1, 0}});
    CHECK(heff::max_coeff_distance(same, V.at(0, 1) * V.at(1, 0)) < 1e-13);

    CHECK_THROWS_AS(heff::allp({{&V, 0, 1}, {&X, 2, 3}}), std::invalid_argument);
    CHECK_THROWS_AS(heff::allp({{&V, 0, 9}}), std::invalid_argument);
    CHECK_THROWS_AS(heff::allp({}), std::invalid_argument);
}

TEST_CASE("scalar_perturbation_reproduces_two_level_taylor_series") {
    // H(s) = [[0, s], [s, D]]: E_-(s) = D/2 - sqrt(D^2/4 + s^2)
    //      = -s^2/D + s^4/D^3 - 2 s^6/D^5 + ...
    const double D = 1.7;
    Eigen::VectorXd en(2);
    en << 0.0, D;
    OperatorValuedMatrix V(2, 0);
    V.at(0, 1) = ModePolynomial::constant(1.0, 0);
    V.at(1, 0) = ModePolynomial::constant(1.0, 0);

    const ExpansionSeries s = heff::expand_recursive(en, {V}, 0, 6);
    const Monomial unity;  // zero-mode monomial
    CHECK(s.energy({1}).is_zero());
    CHECK(s.energy({2}).coefficient(unity).real() == Catch::Approx(-1.0 / D).epsilon(1e-13));
    CHECK(s.energy({3}).is_zero(1e-14));
    CHECK(s.energy({4}).coefficient(unity).real() ==
          Catch::Approx(1.0 / (D * D * D)).epsilon(1e-12));
    CHECK(s.energy({5}).is_zero(1e-13));
    CHECK(s.energy({6}).coefficient(unity).real() ==
          Catch::Approx(-2.0 / std::pow(D, 5)).epsilon(1e-12));

    // upper branch: same magnitudes, opposite signs
    const ExpansionSeries u = heff::expand_recursive(en, {V}, 1, 4);
    CHECK(u.energy({2}).coefficient(unity).real() == Catch::Approx(1.0 / D).epsilon(1e-13));
    CHECK(u.energy({4}).coefficient(unity).real() ==
          Catch::Approx(-1.0 / (D * D * D)).epsilon(1e-12));
}

TEST_CASE("detuned_ladder_expansion_matches_block_diagonalization") {
    // V(0,1) = a^dag, V(1,0) = a with detuning D: the occupation-n block gives
    // E_-(n) = D/2 - sqrt(D^2/4 + n s^2), so E2 = -n/D, E4 = n^2/D^3.
    const double D = 0.9;
    const heff::CoupledSystem sys = gen::tls_system(2.0, D, 0.25);
    const ExpansionSeries s = heff::expand_recursive(sys, 0, 4);

    const ModePolynomial e2 = s.energy({2});
    CHECK(e2.coefficient(nmono(1, 1)).real() == Catch::Approx(-1.0 / D).epsilon(1e-12));
    CHECK(e2.terms().size() == 1u);
    CHECK(s.energy({3}).is_zero(1e-13));
    const ModePolynomial e4 = s.energy({4});
    // n^2 = <a^dag^2 a^2> + <a^dag a>
    CHECK(e4.coefficient(nmono(2, 2)).real() == Catch::Approx(1.0 / (D * D * D)).epsilon(1e-11));
    CHECK(e4.coefficient(nmono(1, 1)).real() == Catch::Approx(1.0 / (D * D * D)).epsilon(1e-11));

    // first-order vector: <e_0|g_1> = a / (0 - D)
    const ModePolynomial c1 = s.vector_coeff(1, {1});
    CHECK(c1.coefficient(nmono(0, 1)).real() == Catch::Approx(-1.0 / D).epsilon(1e-12));

    // expansion around the excited level: E2 = (n + 1)/D
    const ExpansionSeries up = heff::expand_recursive(sys, 1, 2);
    const ModePolynomial u2 = up.energy({2});
    CHECK(u2.coefficient(nmono(1, 1)).real() == Catch::Approx(1.0 / D).epsilon(1e-12));
    CHECK(u2.coefficient(nmono(0, 0)).real() == Catch::Approx(1.0 / D).epsilon(1e-12));
}

TEST_CASE("closed_forms_match_recursion_through_order_four") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 4; ++trial) {
        const heff::CoupledSystem sys = gen::random_rwa_system(rng);
        const int P = sys.n_modes();
        const ExpansionSeries s = heff::expand_recursive(sys, 0, 4);
        for (int t = 1; t <= 4; ++t)
            for (const MultiIndex& J : heff::indices_of_order(P, t)) {
                const ModePolynomial closed = heff::eigenvalue_coefficient_closed(J, sys);
                const ModePolynomial rec = s.energy(J);
                const double scale = std::max({1.0, closed.max_abs_coeff(), rec.max_abs_coeff()});
                INFO("trial " << trial << " J=" << heff::index_string(J));
                CHECK(heff::max_coeff_distance(closed, rec) < 1e-11 * scale);
            }
    }
}

TEST_CASE("closed_forms_reject_excited_levels") {
    const heff::CoupledSystem sys = gen::tls_system(2.0, 0.7, 0.1);
    CHECK_THROWS_AS(heff::eigenvalue_coefficient_closed({2}, sys, 1), std::invalid_argument);
}

TEST_CASE("degenerate_bright_coupling_poisons_the_vector") {
    Eigen::VectorXd en(3);
    en << 0.0, 0.0, 2.0;
    OperatorValuedMatrix V(3, 1);
    const ModePolynomial a = ModePolynomial::annihilate(0, 1);
    const ModePolynomial ad = ModePolynomial::create(0, 1);
    V.at(0, 1) = ad;
    V.at(1, 0) = a;
    V.at(0, 2) = ad;
    V.at(2, 0) = a;

    // order 1 succeeds; the degenerate bright coefficient is poisoned
    const ExpansionSeries s1 = heff::expand_recursive(en, {V}, 0, 1);
    CHECK(s1.vector_poisoned(1, {1}));
    CHECK_THROWS_AS(s1.vector_coeff(1, {1}), PhysicsError);
    CHECK_NOTHROW(s1.vector_coeff(2, {1}));

    // order 2 consumes the poisoned coefficient and must refuse
    CHECK_THROWS_AS(heff::expand_recursive(en, {V}, 0, 2), PhysicsError);
}

TEST_CASE("degenerate_dark_level_decouples_exactly") {
    // level 1 is degenerate with the ground state but fully decoupled (any
    // indirect path would feed it a numerator at higher order): the expansion
    // must coincide with the 2-level problem {0, 2}
    Eigen::VectorXd en(3);
    en << 0.0, 0.0, 2.0;
    OperatorValuedMatrix V(3, 1);
    const ModePolynomial a = ModePolynomial::annihilate(0, 1);
    const ModePolynomial ad = ModePolynomial::create(0, 1);
    V.at(0, 2) = ad;
    V.at(2, 0) = a;

    const ExpansionSeries s = heff::expand_recursive(en, {V}, 0, 4);
    CHECK(s.vector_coeff(1, {1}).is_zero());
    CHECK_FALSE(s.vector_poisoned(1, {1}));

    Eigen::VectorXd en2(2);
    en2 << 0.0, 2.0;
    OperatorValuedMatrix V2(2, 1);
    V2.at(0, 1) = ad;
    V2.at(1, 0) = a;
    const ExpansionSeries ref = heff::expand_recursive(en2, {V2}, 0, 2);
    CHECK(heff::max_coeff_distance(s.energy({2}), ref.energy({2})) < 1e-13);
}

TEST_CASE("series_accessors_guard_unknown_indices") {
    const heff::CoupledSystem sys = gen::tls_system(2.0, 0.7, 0.1);
    const ExpansionSeries s = heff::expand_recursive(sys, 0, 2);
    CHECK(s.has_energy({2}));
    CHECK_FALSE(s.has_energy({5}));
    CHECK_THROWS_AS(s.energy({5}), std::out_of_range);
    CHECK_THROWS_AS(s.vector_coeff(1, {7}), std::out_of_range);
    CHECK(s.level() == 0);
    CHECK(s.n_slots() == 1);
    CHECK(s.max_total_order() == 2);
    CHECK(s.dim() == 2);
}

TEST_CASE("normalization_keeps_vectors_consistent") {
    // <n0|nJ> at order 2 must equal -1/2 sum_K sum_m <m0|nK>^dag <m0|n(J-K)>
    const heff::CoupledSystem sys = gen::tls_system(2.0, 0.9, 0.2);
    const ExpansionSeries s = heff::expand_recursive(sys, 0, 2);
    const ModePolynomial c1 = s.vector_coeff(1, {1});
    ModePolynomial want = c1.dagger() * c1;
    want *= -0.5;
    CHECK(heff::max_coeff_distance(s.vector_coeff(0, {2}), want) < 1e-13);
    CHECK(s.vector_coeff(0, {1}).is_zero());
}
