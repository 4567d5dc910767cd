// Dense complex linear algebra with quantum-information semantics:
// tensor products, subsystem permutation, partial trace, Hermitian
// eigendecomposition, von Neumann / entanglement entropies.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ssrent {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using Operator = Matrix;
using Index = Eigen::Index;

// Default tolerances: validation of constructed objects vs. floating-point
// comparisons between computed quantities. Overridable per call.
inline constexpr double kValidationTol = 1e-10;
inline constexpr double kComparisonTol = 1e-9;

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

template <typename DerivedA, typename DerivedB>
double max_abs_diff(const Eigen::MatrixBase<DerivedA>& a,
                    const Eigen::MatrixBase<DerivedB>& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError("max_abs_diff: shape mismatch");
    return max_abs(a - b);
}

// ============================================================================
// Domain types
// ============================================================================

// Normalized pure state. Squared norm must equal 1 within tolerance.
class Ket {
  public:
    explicit Ket(Vector amplitudes, double norm_tol = 1e-12)
        : amps_(std::move(amplitudes)) {
        if (amps_.size() == 0)
            throw DimensionError("Ket: amplitude vector is empty");
        const double norm2 = amps_.squaredNorm();
        if (std::abs(norm2 - 1.0) > norm_tol)
            throw ValidationError("Ket: squared norm " + std::to_string(norm2) +
                                  " deviates from 1 beyond tolerance");
    }

    Index dim() const { return amps_.size(); }
    const Vector& amplitudes() const { return amps_; }
    Complex coeff(Index i) const { return amps_(i); }

  private:
    Vector amps_;
};

// Trace-one positive semidefinite Hermitian matrix.
class DensityOperator {
  public:
    explicit DensityOperator(Matrix m, double herm_tol = 1e-12,
                             double trace_tol = 1e-12, double psd_floor = -1e-10)
        : m_(std::move(m)) {
        if (m_.rows() != m_.cols() || m_.rows() == 0)
            throw DimensionError("DensityOperator: matrix must be square and nonempty");
        const double herm = max_abs(m_ - m_.adjoint());
        if (herm > herm_tol)
            throw ValidationError("DensityOperator: Hermiticity residual " +
                                  std::to_string(herm) + " exceeds tolerance");
        const double tr_err = std::abs(m_.trace() - Complex(1.0, 0.0));
        if (tr_err > trace_tol)
            throw ValidationError("DensityOperator: trace deviates from 1 by " +
                                  std::to_string(tr_err));
        Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
        const double min_ev = es.eigenvalues().minCoeff();
        if (min_ev < psd_floor)
            throw ValidationError("DensityOperator: smallest eigenvalue " +
                                  std::to_string(min_ev) + " below PSD floor");
    }

    static DensityOperator pure(const Ket& psi) {
        return DensityOperator(psi.amplitudes() * psi.amplitudes().adjoint());
    }

    Index dim() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }

  private:
    Matrix m_;
};

// Ordered tensor-factor dimensions of a composite space. The leftmost factor
// is the slowest-varying index of the flattened state.
class SubsystemShape {
  public:
    explicit SubsystemShape(std::vector<Index> dims) : dims_(std::move(dims)) {
        if (dims_.empty())
            throw DimensionError("SubsystemShape: no factors");
        total_ = 1;
        for (Index d : dims_) {
            if (d <= 0)
                throw DimensionError("SubsystemShape: factor dimensions must be positive");
            total_ *= d;
        }
    }

    static SubsystemShape uniform(int n_factors, Index local_dim) {
        return SubsystemShape(std::vector<Index>(static_cast<size_t>(n_factors), local_dim));
    }

    int factors() const { return static_cast<int>(dims_.size()); }
    Index dim(int i) const { return dims_.at(static_cast<size_t>(i)); }
    const std::vector<Index>& dims() const { return dims_; }
    Index total_dim() const { return total_; }

    void require_total(Index d, const char* what) const {
        if (total_ != d)
            throw DimensionError(std::string(what) +
                                 ": subsystem dimensions do not multiply to the state dimension");
    }

  private:
    std::vector<Index> dims_;
    Index total_ = 0;
};

// ============================================================================
// Tensor algebra
// ============================================================================

// Kronecker product; the left operand is the slower-varying index.
inline Matrix tensor(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline Vector tensor(const Vector& a, const Vector& b) {
    Vector out(a.size() * b.size());
    for (Index i = 0; i < a.size(); ++i)
        out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

inline Ket tensor(const Ket& a, const Ket& b) {
    return Ket(tensor(a.amplitudes(), b.amplitudes()));
}

namespace detail {

// Linear-index strides of each tensor factor (leftmost factor slowest).
inline std::vector<Index> factor_strides(const std::vector<Index>& dims) {
    std::vector<Index> strides(dims.size());
    Index s = 1;
    for (size_t t = dims.size(); t-- > 0;) {
        strides[t] = s;
        s *= dims[t];
    }
    return strides;
}

inline void check_permutation(const std::vector<int>& perm, int n_factors) {
    if (static_cast<int>(perm.size()) != n_factors)
        throw DimensionError("permute_subsystems: permutation length does not match factor count");
    std::vector<bool> seen(perm.size(), false);
    for (int p : perm) {
        if (p < 0 || p >= n_factors || seen[static_cast<size_t>(p)])
            throw DimensionError("permute_subsystems: not a permutation of the factor indices");
        seen[static_cast<size_t>(p)] = true;
    }
}

// Source-index table: output index i reads input index map[i], where factor t
// of the output is factor perm[t] of the input.
inline std::vector<Index> permutation_index_map(const SubsystemShape& shape,
                                                const std::vector<int>& perm) {
    check_permutation(perm, shape.factors());
    const auto& dims = shape.dims();
    const auto in_strides = factor_strides(dims);
    std::vector<Index> out_dims(dims.size());
    for (size_t t = 0; t < dims.size(); ++t)
        out_dims[t] = dims[static_cast<size_t>(perm[t])];

    std::vector<Index> map(static_cast<size_t>(shape.total_dim()));
    std::vector<Index> digits(dims.size(), 0);
    for (Index i = 0; i < shape.total_dim(); ++i) {
        Index src = 0;
        for (size_t t = 0; t < dims.size(); ++t)
            src += digits[t] * in_strides[static_cast<size_t>(perm[t])];
        map[static_cast<size_t>(i)] = src;
        // increment mixed-radix counter over out_dims
        for (size_t t = dims.size(); t-- > 0;) {
            if (++digits[t] < out_dims[t]) break;
            digits[t] = 0;
        }
    }
    return map;
}

}  // namespace detail

// Reorders tensor factors: factor t of the output is factor perm[t] of the
// input. Applying the inverse permutation recovers the input exactly.
inline Ket permute_subsystems(const Ket& psi, const SubsystemShape& shape,
                              const std::vector<int>& perm) {
    shape.require_total(psi.dim(), "permute_subsystems");
    const auto map = detail::permutation_index_map(shape, perm);
    Vector out(psi.dim());
    for (Index i = 0; i < psi.dim(); ++i)
        out(i) = psi.coeff(map[static_cast<size_t>(i)]);
    return Ket(std::move(out));
}

inline Matrix permute_subsystems(const Matrix& op, const SubsystemShape& shape,
                                 const std::vector<int>& perm) {
    if (op.rows() != op.cols())
        throw DimensionError("permute_subsystems: operator must be square");
    shape.require_total(op.rows(), "permute_subsystems");
    const auto map = detail::permutation_index_map(shape, perm);
    Matrix out(op.rows(), op.cols());
    for (Index i = 0; i < op.rows(); ++i)
        for (Index j = 0; j < op.cols(); ++j)
            out(i, j) = op(map[static_cast<size_t>(i)], map[static_cast<size_t>(j)]);
    return out;
}

// Reduced operator on the kept factors (ascending factor order); the trace
// over the complement is taken entrywise.
inline Matrix partial_trace_matrix(const Matrix& m, const SubsystemShape& shape,
                                   const std::vector<int>& keep) {
    if (m.rows() != m.cols())
        throw DimensionError("partial_trace: operator must be square");
    shape.require_total(m.rows(), "partial_trace");
    if (keep.empty())
        throw DimensionError("partial_trace: keep set is empty");
    std::vector<int> kept(keep);
    std::sort(kept.begin(), kept.end());
    if (std::adjacent_find(kept.begin(), kept.end()) != kept.end())
        throw DimensionError("partial_trace: duplicate factor in keep set");
    if (kept.front() < 0 || kept.back() >= shape.factors())
        throw DimensionError("partial_trace: keep index out of range");

    const auto& dims = shape.dims();
    const auto strides = detail::factor_strides(dims);
    std::vector<int> traced;
    for (int t = 0; t < shape.factors(); ++t)
        if (!std::binary_search(kept.begin(), kept.end(), t)) traced.push_back(t);

    Index kept_dim = 1, traced_dim = 1;
    for (int t : kept) kept_dim *= dims[static_cast<size_t>(t)];
    for (int t : traced) traced_dim *= dims[static_cast<size_t>(t)];

    // base offsets of kept / traced multi-indices in the full linear index
    std::vector<Index> kept_offsets(static_cast<size_t>(kept_dim));
    {
        std::vector<Index> digits(kept.size(), 0);
        for (Index i = 0; i < kept_dim; ++i) {
            Index off = 0;
            for (size_t t = 0; t < kept.size(); ++t)
                off += digits[t] * strides[static_cast<size_t>(kept[t])];
            kept_offsets[static_cast<size_t>(i)] = off;
            for (size_t t = kept.size(); t-- > 0;) {
                if (++digits[t] < dims[static_cast<size_t>(kept[t])]) break;
                digits[t] = 0;
            }
        }
    }
    std::vector<Index> traced_offsets(static_cast<size_t>(traced_dim));
    {
        std::vector<Index> digits(traced.size(), 0);
        for (Index i = 0; i < traced_dim; ++i) {
            Index off = 0;
            for (size_t t = 0; t < traced.size(); ++t)
                off += digits[t] * strides[static_cast<size_t>(traced[t])];
            traced_offsets[static_cast<size_t>(i)] = off;
            for (size_t t = traced.size(); t-- > 0;) {
                if (++digits[t] < dims[static_cast<size_t>(traced[t])]) break;
                digits[t] = 0;
            }
        }
    }

    Matrix out = Matrix::Zero(kept_dim, kept_dim);
    for (Index r = 0; r < kept_dim; ++r)
        for (Index c = 0; c < kept_dim; ++c) {
            Complex acc(0.0, 0.0);
            for (Index t = 0; t < traced_dim; ++t)
                acc += m(kept_offsets[static_cast<size_t>(r)] + traced_offsets[static_cast<size_t>(t)],
                         kept_offsets[static_cast<size_t>(c)] + traced_offsets[static_cast<size_t>(t)]);
            out(r, c) = acc;
        }
    return out;
}

inline DensityOperator partial_trace(const DensityOperator& rho, const SubsystemShape& shape,
                                     const std::vector<int>& keep) {
    return DensityOperator(partial_trace_matrix(rho.matrix(), shape, keep));
}

// ============================================================================
// Spectral decomposition and entropies
// ============================================================================

struct EighResult {
    Eigen::VectorXd values;  // descending
    Matrix vectors;          // orthonormal columns, aligned with values
};

inline EighResult eigh(const Matrix& h, double herm_tol = kValidationTol) {
    if (h.rows() != h.cols())
        throw DimensionError("eigh: matrix must be square");
    const double herm = max_abs(h - h.adjoint());
    if (herm > herm_tol)
        throw ValidationError("eigh: input not Hermitian (residual " +
                              std::to_string(herm) + ")");
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigh: eigensolver failed to converge");
    EighResult result;
    result.values = es.eigenvalues().reverse();
    result.vectors = es.eigenvectors().rowwise().reverse();
    return result;
}

// Shannon entropy (base 2) of a nonnegative spectrum. Eigenvalues are clamped
// to [0,1] so that -eps*log(eps) noise from finite-precision PSD matrices
// does not contribute.
inline double spectrum_entropy(const Eigen::VectorXd& eigenvalues) {
    double s = 0.0;
    for (Index i = 0; i < eigenvalues.size(); ++i) {
        const double lam = std::clamp(eigenvalues(i), 0.0, 1.0);
        if (lam > 0.0) s -= lam * std::log2(lam);
    }
    return s;
}

// Von Neumann entropy in bits.
inline double vn_entropy(const DensityOperator& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix(), Eigen::EigenvaluesOnly);
    return spectrum_entropy(es.eigenvalues());
}

// Entropy of entanglement (ebits) of a pure state across a bipartition:
// the von Neumann entropy of the reduced state on the first factor.
inline double entanglement_entropy(const Ket& psi, const SubsystemShape& split) {
    if (split.factors() != 2)
        throw DimensionError("entanglement_entropy: bipartition must have exactly two factors");
    split.require_total(psi.dim(), "entanglement_entropy");
    return vn_entropy(partial_trace(DensityOperator::pure(psi), split, {0}));
}

}  // namespace ssrent
