#include "ssrent/groups.hpp"

#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace ssrent;

namespace {

// |x> on n qubits
Ket computational_ket(int n, unsigned x) {
    Vector v = Vector::Zero(Index(1) << n);
    v(static_cast<Index>(x)) = Complex(1.0, 0.0);
    return Ket(std::move(v));
}

ChargeObservable two_level_charge() {
    Matrix q = Matrix::Zero(2, 2);
    q(1, 1) = Complex(1.0, 0.0);
    return ChargeObservable(q);
}

}  // namespace

TEST_CASE("sn_permutation_rep basics") {
    const FiniteGroupRep s3 = sn_permutation_rep(3, 2);
    REQUIRE(s3.order() == 6);
    REQUIRE(s3.dim() == 8);
    REQUIRE(s3.label() == "S3");
    REQUIRE(s3.name(0) == "012");
    REQUIRE(max_abs_diff(s3.element(0), Matrix::Identity(8, 8)) == 0.0);

    // products land exactly on stored representatives
    REQUIRE(closure_residual(s3) == 0.0);
    REQUIRE(closure_residual(sn_permutation_rep(4, 2)) == 0.0);

    REQUIRE_THROWS_AS(sn_permutation_rep(7, 2), DimensionError);   // order 5040 > 720
    REQUIRE_THROWS_AS(sn_permutation_rep(4, 8), DimensionError);   // 24 dense 4096x4096 matrices: over budget
}

TEST_CASE("permutation action moves factor p(t) to slot t") {
    const FiniteGroupRep s3 = sn_permutation_rep(3, 2);
    // find the cycle 120: slot 0 <- factor 1, slot 1 <- factor 2, slot 2 <- factor 0
    int cycle = -1;
    for (int g = 0; g < s3.order(); ++g)
        if (s3.name(g) == "120") cycle = g;
    REQUIRE(cycle >= 0);
    // |011> = factors (0,1,1); output factors read (1,1,0) -> |110>
    const Vector moved = s3.element(cycle) * computational_ket(3, 0b011).amplitudes();
    REQUIRE(std::abs(moved(0b110) - Complex(1.0, 0.0)) < 1e-15);

    // Cayley table composes one-line notations as p(q(t))
    const int composed = s3.product(cycle, cycle);
    REQUIRE(s3.name(composed) == "201");
    REQUIRE(max_abs_diff(s3.element(composed), s3.element(cycle) * s3.element(cycle)) < 1e-15);
}

TEST_CASE("FiniteGroupRep validation") {
    std::vector<Operator> good{Matrix::Identity(2, 2)};
    REQUIRE_NOTHROW(FiniteGroupRep("triv", good, {"e"}));

    Matrix shrink = Matrix::Identity(2, 2) * 0.5;
    REQUIRE_THROWS_AS(FiniteGroupRep("bad", {Matrix::Identity(2, 2), shrink}, {"e", "s"}),
                      ValidationError);

    Matrix x(2, 2);
    x << 0, 1, 1, 0;
    // element 0 must be the identity
    REQUIRE_THROWS_AS(FiniteGroupRep("bad", {x, Matrix::Identity(2, 2)}, {"x", "e"}),
                      ValidationError);
    REQUIRE_NOTHROW(FiniteGroupRep("Z2", {Matrix::Identity(2, 2), x}, {"e", "x"}, {{0, 1}, {1, 0}}));
}

TEST_CASE("ChargeObservable extracts integer eigenspaces") {
    Matrix q = Matrix::Zero(4, 4);
    q(1, 1) = q(2, 2) = Complex(1.0, 0.0);
    q(3, 3) = Complex(2.0, 0.0);
    const ChargeObservable charge(q);
    REQUIRE(charge.charges() == std::vector<long>{0, 1, 2});
    REQUIRE(std::abs(charge.projectors()[1].trace() - Complex(2.0, 0.0)) < 1e-12);

    // projectors resolve the identity
    Matrix total = Matrix::Zero(4, 4);
    for (const auto& p : charge.projectors()) total += p;
    REQUIRE(max_abs_diff(total, Matrix::Identity(4, 4)) < 1e-10);

    Matrix frac = Matrix::Zero(2, 2);
    frac(0, 0) = Complex(0.5, 0.0);
    REQUIRE_THROWS_AS(ChargeObservable(frac), ValidationError);

    // a rotated observable keeps integer charges and orthogonal projectors
    std::mt19937 rng(505);
    const Matrix u = helpers::random_unitary(4, rng);
    const ChargeObservable rotated(u * q * u.adjoint());
    REQUIRE(rotated.charges() == std::vector<long>{0, 1, 2});
}

TEST_CASE("u1_cyclic_rep is a closed cyclic group generated by the charge") {
    const ChargeObservable charge = two_level_charge();
    const FiniteGroupRep z4 = u1_cyclic_rep(charge, 4);
    REQUIRE(z4.order() == 4);
    REQUIRE(closure_residual(z4) < 1e-12);
    // k=1 applies phase e^{i pi/2} to the charge-1 level
    REQUIRE(std::abs(z4.element(1)(1, 1) - Complex(0.0, 1.0)) < 1e-12);
}

TEST_CASE("QuantumChannel validates trace preservation and applies Kraus sums") {
    std::mt19937 rng(606);
    const QuantumChannel channel{helpers::random_kraus(3, 2, rng)};
    const DensityOperator rho{helpers::random_density_matrix(3, rng)};
    const DensityOperator mapped = channel.apply(rho);
    REQUIRE(std::abs(mapped.matrix().trace() - Complex(1.0, 0.0)) < 1e-12);

    std::vector<Operator> not_tp{Matrix::Identity(2, 2) * 0.9};
    REQUIRE_THROWS_AS(QuantumChannel(not_tp), ValidationError);

    const DensityOperator rho4{helpers::random_density_matrix(4, rng)};
    const QuantumChannel id = QuantumChannel::identity(4);
    REQUIRE(max_abs_diff(id.apply(rho4).matrix(), rho4.matrix()) < 1e-15);
}

TEST_CASE("twirl_finite projects onto the group-invariant states") {
    std::mt19937 rng(707);
    const FiniteGroupRep s3 = sn_permutation_rep(3, 2);
    const DensityOperator rho{helpers::random_density_matrix(8, rng)};
    const DensityOperator once = twirl_finite(rho, s3);

    // invariance element by element and under a second twirl
    for (const auto& u : s3.elements())
        REQUIRE(max_abs_diff(u * once.matrix() * u.adjoint(), once.matrix()) < 1e-12);
    REQUIRE(max_abs_diff(twirl_finite(once, s3).matrix(), once.matrix()) < 1e-12);
    REQUIRE(is_g_invariant_state(once, s3));
    REQUIRE_FALSE(is_g_invariant_state(rho, s3));
    REQUIRE(std::abs(once.matrix().trace() - Complex(1.0, 0.0)) < 1e-12);
}

TEST_CASE("u1_twirl dephases between charge sectors") {
    const ChargeObservable charge = two_level_charge();

    Vector amps(2);
    amps << Complex(std::sqrt(0.3), 0.0), Complex(std::sqrt(0.7), 0.0);
    const DensityOperator rho = DensityOperator::pure(Ket(amps));
    const DensityOperator dephased = u1_twirl(rho, charge);
    REQUIRE(std::abs(dephased.matrix()(0, 1)) <= 1e-12);
    REQUIRE(std::abs(dephased.matrix()(0, 0) - Complex(0.3, 0.0)) < 1e-12);
    REQUIRE(std::abs(dephased.matrix()(1, 1) - Complex(0.7, 0.0)) < 1e-12);

    // idempotent, and equal to the cyclic-group average of any order that
    // resolves the charge spectrum
    REQUIRE(max_abs_diff(u1_twirl(dephased, charge).matrix(), dephased.matrix()) < 1e-14);
    const FiniteGroupRep z3 = u1_cyclic_rep(charge, 3);
    REQUIRE(max_abs_diff(twirl_finite(rho, z3).matrix(), dephased.matrix()) < 1e-12);

    // charge-diagonal coherence survives
    Matrix q = Matrix::Zero(3, 3);
    q(2, 2) = Complex(1.0, 0.0);  // levels 0 and 1 share charge 0
    const ChargeObservable deg(q);
    std::mt19937 rng(808);
    const DensityOperator full{helpers::random_density_matrix(3, rng)};
    const Matrix out = u1_twirl(full, deg).matrix();
    REQUIRE(max_abs_diff(out.block(0, 0, 2, 2), full.matrix().block(0, 0, 2, 2)) < 1e-14);
    REQUIRE(std::abs(out(0, 2)) <= 1e-15);
}

TEST_CASE("is_g_covariant distinguishes covariant and biased channels") {
    std::mt19937 rng(909);
    const FiniteGroupRep s2 = sn_permutation_rep(2, 2);

    REQUIRE(is_g_covariant(QuantumChannel::identity(4), s2).covariant);

    // a bit flip on the first qubit only is not permutation covariant
    Matrix x(2, 2);
    x << 0, 1, 1, 0;
    const Matrix x0 = tensor(x, Matrix::Identity(2, 2));
    const double p = 0.25;
    const QuantumChannel biased{{std::sqrt(1 - p) * Matrix::Identity(4, 4), std::sqrt(p) * x0}};
    const CovarianceResult bad = is_g_covariant(biased, s2);
    REQUIRE_FALSE(bad.covariant);
    REQUIRE(bad.max_residual > 1e-3);

    // sandwiching repairs covariance
    const QuantumChannel fixed = sandwich(biased, s2);
    const CovarianceResult good = is_g_covariant(fixed, s2);
    REQUIRE(good.covariant);
    REQUIRE(good.max_residual <= 1e-9);

    // twirl_channel too
    const QuantumChannel twirled = twirl_channel(QuantumChannel{helpers::random_kraus(4, 3, rng)}, s2);
    REQUIRE(is_g_covariant(twirled, s2).covariant);
}

TEST_CASE("sandwich and twirl_channel stay trace preserving") {
    std::mt19937 rng(1010);
    const FiniteGroupRep s2 = sn_permutation_rep(2, 2);
    const QuantumChannel base{helpers::random_kraus(4, 2, rng)};
    REQUIRE_NOTHROW(sandwich(base, s2));      // constructor revalidates sum K^dag K = I
    REQUIRE_NOTHROW(twirl_channel(base, s2));
}
