// Deterministic random objects for tests. Every test case builds its own
// engine with a fixed seed so cases stay independent of execution order.
#pragma once

#include "ssrent/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace helpers {

using ssrent::Complex;
using ssrent::Index;
using ssrent::Matrix;
using ssrent::Vector;

// Scratch directory removed when the owning scope ends.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static std::uint64_t counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("ssrent-test-" + std::to_string(++counter) + "-" +
                std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }

    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

inline Matrix random_ginibre(Index rows, Index cols, std::mt19937& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix g(rows, cols);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) g(r, c) = Complex(gauss(rng), gauss(rng));
    return g;
}

inline Matrix random_density_matrix(Index dim, std::mt19937& rng) {
    const Matrix g = random_ginibre(dim, dim, rng);
    Matrix rho = g * g.adjoint();
    rho = ((rho + rho.adjoint()) / 2.0).eval();
    rho /= rho.trace().real();
    return rho;
}

inline Vector random_ket_vector(Index dim, std::mt19937& rng) {
    Vector v = random_ginibre(dim, 1, rng).col(0);
    v /= v.norm();
    return v;
}

inline Matrix random_unitary(Index dim, std::mt19937& rng) {
    const Matrix g = random_ginibre(dim, dim, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index c = 0; c < dim; ++c) q.col(c) *= r(c, c) / std::abs(r(c, c));
    return q;
}

// Random CPTP channel: Kraus operators are the d x d slices of a Haar-random
// (count*d) x d isometry, so sum K^dag K = I holds by construction.
inline std::vector<Matrix> random_kraus(Index dim, int count, std::mt19937& rng) {
    const Matrix g = random_ginibre(dim * count, dim, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    const Matrix iso = qr.householderQ() * Matrix::Identity(dim * count, dim);
    std::vector<Matrix> kraus;
    kraus.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) kraus.push_back(iso.block(i * dim, 0, dim, dim));
    return kraus;
}

}  // namespace helpers
