#include "ssrent/linalg.hpp"

#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace ssrent;

namespace {

Ket basis_ket(Index dim, Index i) {
    Vector v = Vector::Zero(dim);
    v(i) = Complex(1.0, 0.0);
    return Ket(std::move(v));
}

}  // namespace

TEST_CASE("Ket validates normalization") {
    Vector good(2);
    good << Complex(std::sqrt(0.5), 0.0), Complex(0.0, -std::sqrt(0.5));
    REQUIRE_NOTHROW(Ket(good));

    Vector bad(2);
    bad << Complex(1.0, 0.0), Complex(0.1, 0.0);
    REQUIRE_THROWS_AS(Ket(bad), ValidationError);
    REQUIRE_THROWS_AS(Ket(Vector()), DimensionError);
}

TEST_CASE("DensityOperator validates Hermiticity, trace, positivity") {
    std::mt19937 rng(101);
    REQUIRE_NOTHROW(DensityOperator(helpers::random_density_matrix(4, rng)));

    Matrix not_herm = Matrix::Identity(2, 2) / 2.0;
    not_herm(0, 1) = Complex(0.1, 0.0);
    REQUIRE_THROWS_AS(DensityOperator(not_herm), ValidationError);

    Matrix wrong_trace = Matrix::Identity(2, 2);
    REQUIRE_THROWS_AS(DensityOperator(wrong_trace), ValidationError);

    Matrix not_psd(2, 2);
    not_psd << Complex(1.5, 0.0), Complex(0.0, 0.0), Complex(0.0, 0.0), Complex(-0.5, 0.0);
    REQUIRE_THROWS_AS(DensityOperator(not_psd), ValidationError);

    const DensityOperator pure = DensityOperator::pure(basis_ket(3, 1));
    REQUIRE(std::abs(pure.matrix()(1, 1) - Complex(1.0, 0.0)) < 1e-15);
}

TEST_CASE("SubsystemShape") {
    const SubsystemShape shape({2, 3, 4});
    REQUIRE(shape.factors() == 3);
    REQUIRE(shape.total_dim() == 24);
    REQUIRE(SubsystemShape::uniform(5, 2).total_dim() == 32);
    REQUIRE_THROWS_AS(SubsystemShape({2, 0}), DimensionError);
    REQUIRE_THROWS_AS(shape.require_total(25, "test"), DimensionError);
}

TEST_CASE("tensor product uses the left factor as the slow index") {
    Matrix a(2, 2), b(2, 2);
    a << 1, 2, 3, 4;
    b << 0, 1, 1, 0;
    const Matrix t = tensor(a, b);
    REQUIRE(t.rows() == 4);
    REQUIRE(std::abs(t(0, 1) - Complex(1.0, 0.0)) < 1e-15);   // a(0,0)*b(0,1)
    REQUIRE(std::abs(t(0, 3) - Complex(2.0, 0.0)) < 1e-15);   // a(0,1)*b(0,1)
    REQUIRE(std::abs(t(2, 1) - Complex(3.0, 0.0)) < 1e-15);   // a(1,0)*b(0,1)

    // |1> (x) |0> lands at index 1*2+0
    const Ket k = tensor(basis_ket(2, 1), basis_ket(2, 0));
    REQUIRE(std::abs(k.coeff(2) - Complex(1.0, 0.0)) < 1e-15);
}

TEST_CASE("permute_subsystems moves factors as labeled") {
    const SubsystemShape shape = SubsystemShape::uniform(2, 2);
    // |01> under a swap becomes |10>
    const Ket in = tensor(basis_ket(2, 0), basis_ket(2, 1));
    const Ket swapped = permute_subsystems(in, shape, {1, 0});
    REQUIRE(std::abs(swapped.coeff(2) - Complex(1.0, 0.0)) < 1e-15);

    std::mt19937 rng(202);
    const SubsystemShape mixed({2, 3, 2});
    const Ket psi{helpers::random_ket_vector(mixed.total_dim(), rng)};
    const std::vector<int> perm{2, 0, 1};
    const std::vector<int> inverse{1, 2, 0};
    const Ket round = permute_subsystems(
        permute_subsystems(psi, mixed, perm), SubsystemShape({2, 2, 3}), inverse);
    REQUIRE(max_abs_diff(round.amplitudes(), psi.amplitudes()) < 1e-15);

    // conjugating an operator permutes both indices consistently
    const Matrix op = helpers::random_ginibre(12, 12, rng);
    const Matrix moved = permute_subsystems(op, mixed, perm);
    const Ket lhs{helpers::random_ket_vector(12, rng)};
    const Vector direct = moved * permute_subsystems(lhs, mixed, perm).amplitudes();
    const Vector via = permute_subsystems(Ket{(op * lhs.amplitudes()).normalized()}, mixed, perm)
                           .amplitudes();
    REQUIRE(max_abs_diff(direct.normalized(), via) < 1e-12);

    REQUIRE_THROWS_AS(permute_subsystems(psi, mixed, {0, 0, 1}), DimensionError);
}

TEST_CASE("partial_trace reduces product states to their factors") {
    std::mt19937 rng(303);
    const Matrix rho_a = helpers::random_density_matrix(2, rng);
    const Matrix rho_b = helpers::random_density_matrix(3, rng);
    const DensityOperator joint{tensor(rho_a, rho_b)};
    const SubsystemShape shape({2, 3});

    REQUIRE(max_abs_diff(partial_trace(joint, shape, {0}).matrix(), rho_a) < 1e-12);
    REQUIRE(max_abs_diff(partial_trace(joint, shape, {1}).matrix(), rho_b) < 1e-12);

    // a maximally entangled pair reduces to the maximally mixed state
    Vector bell = Vector::Zero(4);
    bell(0) = bell(3) = Complex(std::sqrt(0.5), 0.0);
    const DensityOperator pair = DensityOperator::pure(Ket(bell));
    const Matrix reduced = partial_trace(pair, SubsystemShape::uniform(2, 2), {1}).matrix();
    REQUIRE(max_abs_diff(reduced, Matrix::Identity(2, 2) / 2.0) < 1e-15);

    REQUIRE_THROWS_AS(partial_trace(joint, shape, {}), DimensionError);
    REQUIRE_THROWS_AS(partial_trace(joint, shape, {0, 0}), DimensionError);
    REQUIRE_THROWS_AS(partial_trace(joint, shape, {2}), DimensionError);
}

TEST_CASE("eigh returns a descending spectral decomposition") {
    Matrix h(2, 2);
    h << Complex(1.0, 0.0), Complex(0.0, -1.0), Complex(0.0, 1.0), Complex(1.0, 0.0);
    const EighResult eig = eigh(h);
    REQUIRE(std::abs(eig.values(0) - 2.0) < 1e-12);
    REQUIRE(std::abs(eig.values(1) - 0.0) < 1e-12);
    // reconstruction
    const Matrix recon =
        eig.vectors * eig.values.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
    REQUIRE(max_abs_diff(recon, h) < 1e-12);

    Matrix skew(2, 2);
    skew << 0, 1, -1, 0;
    REQUIRE_THROWS_AS(eigh(skew), ValidationError);
}

TEST_CASE("vn_entropy in bits") {
    Matrix diag = Matrix::Zero(2, 2);
    diag(0, 0) = 0.75;
    diag(1, 1) = 0.25;
    REQUIRE(std::abs(vn_entropy(DensityOperator(diag)) - 0.8112781244591328) < 1e-12);

    REQUIRE(vn_entropy(DensityOperator::pure(basis_ket(4, 2))) < 1e-9);
    REQUIRE(std::abs(vn_entropy(DensityOperator(Matrix::Identity(8, 8) / 8.0)) - 3.0) < 1e-12);
}

TEST_CASE("entanglement_entropy of pure bipartite states") {
    Vector bell = Vector::Zero(4);
    bell(0) = bell(3) = Complex(std::sqrt(0.5), 0.0);
    REQUIRE(std::abs(entanglement_entropy(Ket(bell), SubsystemShape::uniform(2, 2)) - 1.0) <
            1e-12);

    const Ket product = tensor(basis_ket(3, 1), basis_ket(5, 4));
    REQUIRE(entanglement_entropy(product, SubsystemShape({3, 5})) < 1e-9);

    // entropy is symmetric between the two sides
    std::mt19937 rng(404);
    const Ket psi{helpers::random_ket_vector(12, rng)};
    const double left = entanglement_entropy(psi, SubsystemShape({3, 4}));
    const Ket flipped = permute_subsystems(psi, SubsystemShape({3, 4}), {1, 0});
    const double right = entanglement_entropy(flipped, SubsystemShape({4, 3}));
    REQUIRE(std::abs(left - right) < 1e-10);

    REQUIRE_THROWS_AS(entanglement_entropy(psi, SubsystemShape({3, 2, 2})), DimensionError);
}
