// Unitary representations of finite groups and of U(1) charge symmetries,
// the twirling superoperators they induce, quantum channels, and tests for
// group covariance of channels and group invariance of states.
#pragma once

#include "ssrent/linalg.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace ssrent {

// Dense-unitary bound for explicitly stored finite groups: 6! elements.
inline constexpr int kMaxDenseGroupOrder = 720;

// ============================================================================
// Finite group representations
// ============================================================================

// A finite group given by explicit unitary representatives. Element 0 must be
// the identity. An optional Cayley table (product_table[g][h] = index of gh)
// enables exact closure checks; the provided factories always fill it in.
class FiniteGroupRep {
  public:
    FiniteGroupRep(std::string label, std::vector<Operator> elements,
                   std::vector<std::string> element_names,
                   std::vector<std::vector<int>> product_table = {},
                   double unitarity_tol = kValidationTol)
        : label_(std::move(label)),
          elements_(std::move(elements)),
          names_(std::move(element_names)),
          table_(std::move(product_table)) {
        if (elements_.empty())
            throw DimensionError("FiniteGroupRep: no elements");
        if (names_.size() != elements_.size())
            throw DimensionError("FiniteGroupRep: name count does not match element count");
        const Index d = elements_.front().rows();
        const Matrix eye = Matrix::Identity(d, d);
        for (const auto& u : elements_) {
            if (u.rows() != d || u.cols() != d)
                throw DimensionError("FiniteGroupRep: elements must share one square dimension");
            const double res = max_abs(u.adjoint() * u - eye);
            if (res > unitarity_tol)
                throw ValidationError("FiniteGroupRep(" + label_ + "): element not unitary, residual " +
                                      std::to_string(res));
        }
        if (max_abs(elements_.front() - eye) > unitarity_tol)
            throw ValidationError("FiniteGroupRep(" + label_ + "): element 0 must be the identity");
        if (!table_.empty()) {
            if (table_.size() != elements_.size())
                throw DimensionError("FiniteGroupRep: product table has wrong shape");
            for (const auto& row : table_) {
                if (row.size() != elements_.size())
                    throw DimensionError("FiniteGroupRep: product table has wrong shape");
                for (int k : row)
                    if (k < 0 || static_cast<size_t>(k) >= elements_.size())
                        throw DimensionError("FiniteGroupRep: product table entry out of range");
            }
        }
    }

    const std::string& label() const { return label_; }
    Index dim() const { return elements_.front().rows(); }
    int order() const { return static_cast<int>(elements_.size()); }
    const std::vector<Operator>& elements() const { return elements_; }
    const Operator& element(int g) const { return elements_.at(static_cast<size_t>(g)); }
    const std::string& name(int g) const { return names_.at(static_cast<size_t>(g)); }
    bool has_product_table() const { return !table_.empty(); }
    int product(int g, int h) const {
        return table_.at(static_cast<size_t>(g)).at(static_cast<size_t>(h));
    }

  private:
    std::string label_;
    std::vector<Operator> elements_;
    std::vector<std::string> names_;
    std::vector<std::vector<int>> table_;
};

inline FiniteGroupRep trivial_rep(Index dim) {
    return FiniteGroupRep("trivial", {Matrix::Identity(dim, dim)}, {"e"}, {{0}});
}

namespace detail {

// One-line notation "0213" for a permutation of factor slots.
inline std::string permutation_name(const std::vector<int>& p) {
    std::string s;
    for (int v : p) s += static_cast<char>('0' + v);
    return s;
}

}  // namespace detail

// Representation of the symmetric group S_n permuting n tensor factors of a
// local dimension d: (P(p) psi)(x_0..x_{n-1}) = psi(y) with y_{p(t)} = x_t,
// i.e. factor p(t) of the input moves to slot t of the output.
// Dense construction is limited to d^n <= 4096, n! <= 720, and a total
// storage budget of n! * (d^n)^2 <= 2^25 complex entries (~0.5 GB).
inline FiniteGroupRep sn_permutation_rep(int n, Index local_dim) {
    if (n < 1)
        throw DimensionError("sn_permutation_rep: need n >= 1");
    if (local_dim < 2)
        throw DimensionError("sn_permutation_rep: local dimension must be at least 2");
    double total = std::pow(static_cast<double>(local_dim), n);
    if (total > 4096.0)
        throw DimensionError("sn_permutation_rep: dense construction limited to total dimension 4096");
    std::int64_t order = 1;
    for (int i = 2; i <= n; ++i) order *= i;
    if (order > kMaxDenseGroupOrder)
        throw DimensionError("sn_permutation_rep: group order exceeds dense limit of 720");
    // order dense matrices of total^2 complex entries each; refuse anything
    // past ~0.5 GB so a legal-looking corner (large local_dim) cannot OOM.
    if (static_cast<double>(order) * total * total > 33554432.0)
        throw DimensionError("sn_permutation_rep: dense representation exceeds memory budget");

    const SubsystemShape shape = SubsystemShape::uniform(n, local_dim);
    const Index dim = shape.total_dim();

    std::vector<std::vector<int>> perms;
    std::vector<int> p(static_cast<size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    do {
        perms.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));

    std::map<std::vector<int>, int> index_of;
    for (size_t g = 0; g < perms.size(); ++g) index_of[perms[g]] = static_cast<int>(g);

    std::vector<Operator> elements;
    std::vector<std::string> names;
    elements.reserve(perms.size());
    for (const auto& q : perms) {
        // column y feeds row x when y_{q(t)} = x_t for all t
        const auto strides = detail::factor_strides(shape.dims());
        Matrix u = Matrix::Zero(dim, dim);
        std::vector<Index> digits(static_cast<size_t>(n), 0);
        for (Index x = 0; x < dim; ++x) {
            Index y = 0;
            for (int t = 0; t < n; ++t)
                y += digits[static_cast<size_t>(t)] * strides[static_cast<size_t>(q[static_cast<size_t>(t)])];
            u(x, y) = Complex(1.0, 0.0);
            for (size_t t = static_cast<size_t>(n); t-- > 0;) {
                if (++digits[t] < local_dim) break;
                digits[t] = 0;
            }
        }
        elements.push_back(std::move(u));
        names.push_back(detail::permutation_name(q));
    }

    // Cayley table from exact composition, oriented so that
    // element(g) * element(h) == element(table[g][h]): under the slot action
    // above the matrix product realizes the one-line map t -> h(g(t)).
    std::vector<std::vector<int>> table(perms.size(), std::vector<int>(perms.size(), 0));
    for (size_t g = 0; g < perms.size(); ++g)
        for (size_t h = 0; h < perms.size(); ++h) {
            std::vector<int> r(static_cast<size_t>(n));
            for (int t = 0; t < n; ++t)
                r[static_cast<size_t>(t)] =
                    perms[h][static_cast<size_t>(perms[g][static_cast<size_t>(t)])];
            table[g][h] = index_of.at(r);
        }

    return FiniteGroupRep("S" + std::to_string(n), std::move(elements), std::move(names),
                          std::move(table));
}

// Max residual of the closure property: every product of representatives must
// coincide with a stored representative. Uses the Cayley table when present;
// otherwise searches all elements. Refused above the dense group-order limit.
inline double closure_residual(const FiniteGroupRep& rep) {
    if (rep.order() > kMaxDenseGroupOrder)
        throw DimensionError("closure_residual: group order exceeds dense limit of 720");
    double worst = 0.0;
    for (int g = 0; g < rep.order(); ++g)
        for (int h = 0; h < rep.order(); ++h) {
            const Matrix prod = rep.element(g) * rep.element(h);
            double best;
            if (rep.has_product_table()) {
                best = max_abs_diff(prod, rep.element(rep.product(g, h)));
            } else {
                best = std::numeric_limits<double>::infinity();
                for (int k = 0; k < rep.order(); ++k)
                    best = std::min(best, max_abs_diff(prod, rep.element(k)));
            }
            worst = std::max(worst, best);
        }
    return worst;
}

// ============================================================================
// Charge observables and U(1) symmetry
// ============================================================================

// Hermitian observable with integer spectrum; exposes its eigenvalues and the
// orthogonal projectors onto each eigenspace (a resolution of the identity).
class ChargeObservable {
  public:
    explicit ChargeObservable(Matrix q, double integer_tol = 1e-8,
                              double completeness_tol = kValidationTol)
        : q_(std::move(q)) {
        const auto eig = eigh(q_);
        // bucket eigenvalues by nearest integer
        std::map<long, std::vector<Index>> buckets;
        for (Index i = 0; i < eig.values.size(); ++i) {
            const double v = eig.values(i);
            const double nearest = std::round(v);
            if (std::abs(v - nearest) > integer_tol)
                throw ValidationError("ChargeObservable: eigenvalue " + std::to_string(v) +
                                      " is not an integer within tolerance");
            buckets[static_cast<long>(nearest)].push_back(i);
        }
        Matrix completeness = Matrix::Zero(q_.rows(), q_.cols());
        for (const auto& [charge, cols] : buckets) {
            Matrix proj = Matrix::Zero(q_.rows(), q_.cols());
            for (Index c : cols) {
                const Vector v = eig.vectors.col(c);
                proj += v * v.adjoint();
            }
            charges_.push_back(charge);
            projectors_.push_back(proj);
            completeness += proj;
        }
        const double res = max_abs(completeness - Matrix::Identity(q_.rows(), q_.cols()));
        if (res > completeness_tol)
            throw ValidationError("ChargeObservable: projectors do not resolve the identity, residual " +
                                  std::to_string(res));
    }

    Index dim() const { return q_.rows(); }
    const Matrix& matrix() const { return q_; }
    const std::vector<long>& charges() const { return charges_; }
    const std::vector<Matrix>& projectors() const { return projectors_; }

  private:
    Matrix q_;
    std::vector<long> charges_;     // ascending
    std::vector<Matrix> projectors_;  // aligned with charges_
};

// Cyclic subgroup {exp(i 2π k Q / order)}_{k=0..order-1} of the U(1) action
// generated by an integer-spectrum charge.
inline FiniteGroupRep u1_cyclic_rep(const ChargeObservable& q, int order) {
    if (order < 1)
        throw DimensionError("u1_cyclic_rep: order must be positive");
    std::vector<Operator> elements;
    std::vector<std::string> names;
    std::vector<std::vector<int>> table(static_cast<size_t>(order),
                                        std::vector<int>(static_cast<size_t>(order), 0));
    for (int k = 0; k < order; ++k) {
        Matrix u = Matrix::Zero(q.dim(), q.dim());
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(order);
        for (size_t b = 0; b < q.charges().size(); ++b) {
            const double phase = theta * static_cast<double>(q.charges()[b]);
            u += Complex(std::cos(phase), std::sin(phase)) * q.projectors()[b];
        }
        elements.push_back(std::move(u));
        names.push_back("k=" + std::to_string(k));
        for (int l = 0; l < order; ++l) table[static_cast<size_t>(k)][static_cast<size_t>(l)] = (k + l) % order;
    }
    return FiniteGroupRep("Z" + std::to_string(order), std::move(elements), std::move(names),
                          std::move(table));
}

// ============================================================================
// Quantum channels
// ============================================================================

// Completely positive trace-preserving map in Kraus form.
class QuantumChannel {
  public:
    explicit QuantumChannel(std::vector<Operator> kraus, double tp_tol = kValidationTol)
        : kraus_(std::move(kraus)) {
        if (kraus_.empty())
            throw DimensionError("QuantumChannel: no Kraus operators");
        const Index d = kraus_.front().rows();
        Matrix acc = Matrix::Zero(d, d);
        for (const auto& k : kraus_) {
            if (k.rows() != d || k.cols() != d)
                throw DimensionError("QuantumChannel: Kraus operators must share one square dimension");
            acc += k.adjoint() * k;
        }
        const double res = max_abs(acc - Matrix::Identity(d, d));
        if (res > tp_tol)
            throw ValidationError("QuantumChannel: not trace preserving, residual " +
                                  std::to_string(res));
    }

    static QuantumChannel identity(Index dim) {
        return QuantumChannel({Matrix::Identity(dim, dim)});
    }

    Index dim() const { return kraus_.front().rows(); }
    const std::vector<Operator>& kraus() const { return kraus_; }

    Matrix apply_matrix(const Matrix& rho) const {
        if (rho.rows() != dim() || rho.cols() != dim())
            throw DimensionError("QuantumChannel::apply: dimension mismatch");
        Matrix out = Matrix::Zero(dim(), dim());
        for (const auto& k : kraus_) out += k * rho * k.adjoint();
        return out;
    }

    DensityOperator apply(const DensityOperator& rho) const {
        return DensityOperator(apply_matrix(rho.matrix()));
    }

  private:
    std::vector<Operator> kraus_;
};

// ============================================================================
// Twirling
// ============================================================================

// Group average (1/|G|) sum_g T(g) rho T(g)^dag over explicit unitaries.
// This is the semantic reference implementation that faster structured
// twirls are checked against.
inline Matrix twirl_finite_matrix(const Matrix& rho, const FiniteGroupRep& rep) {
    if (rho.rows() != rep.dim() || rho.cols() != rep.dim())
        throw DimensionError("twirl_finite: dimension mismatch");
    Matrix out = Matrix::Zero(rep.dim(), rep.dim());
    for (const auto& u : rep.elements()) out += u * rho * u.adjoint();
    return out / static_cast<double>(rep.order());
}

inline DensityOperator twirl_finite(const DensityOperator& rho, const FiniteGroupRep& rep) {
    return DensityOperator(twirl_finite_matrix(rho.matrix(), rep));
}

// U(1) twirl: full dephasing in the charge eigenbasis, sum_q P_q rho P_q.
// Equals the Haar average over the U(1) orbit generated by the charge.
inline Matrix u1_twirl_matrix(const Matrix& rho, const ChargeObservable& q) {
    if (rho.rows() != q.dim() || rho.cols() != q.dim())
        throw DimensionError("u1_twirl: dimension mismatch");
    Matrix out = Matrix::Zero(q.dim(), q.dim());
    for (const auto& p : q.projectors()) out += p * rho * p;
    return out;
}

inline DensityOperator u1_twirl(const DensityOperator& rho, const ChargeObservable& q) {
    return DensityOperator(u1_twirl_matrix(rho.matrix(), q));
}

inline bool is_g_invariant_state(const DensityOperator& rho, const FiniteGroupRep& rep,
                                 double tol = kComparisonTol) {
    return max_abs_diff(twirl_finite_matrix(rho.matrix(), rep), rho.matrix()) <= tol;
}

// ============================================================================
// Channel covariance
// ============================================================================

// Rank-one Hermitian probe states spanning the operator space: the basis
// states |i><i|, plus (|i>+|j>)/sqrt2 and (|i>+i|j>)/sqrt2 superpositions.
// Linearity makes covariance on these dim^2 probes equivalent to covariance
// on every input.
inline std::vector<DensityOperator> hermitian_probe_states(Index dim) {
    std::vector<DensityOperator> probes;
    probes.reserve(static_cast<size_t>(dim * dim));
    for (Index i = 0; i < dim; ++i) {
        Vector v = Vector::Zero(dim);
        v(i) = Complex(1.0, 0.0);
        probes.push_back(DensityOperator::pure(Ket(v)));
    }
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (Index i = 0; i < dim; ++i)
        for (Index j = i + 1; j < dim; ++j) {
            Vector v = Vector::Zero(dim);
            v(i) = Complex(inv_sqrt2, 0.0);
            v(j) = Complex(inv_sqrt2, 0.0);
            probes.push_back(DensityOperator::pure(Ket(v)));
            v(j) = Complex(0.0, inv_sqrt2);
            probes.push_back(DensityOperator::pure(Ket(v)));
        }
    return probes;
}

struct CovarianceResult {
    bool covariant = false;
    double max_residual = 0.0;
};

// Checks E(T(g) rho T(g)^dag) == T(g) E(rho) T(g)^dag for all group elements
// and all probe states, reporting the worst entrywise residual.
inline CovarianceResult is_g_covariant(const QuantumChannel& channel, const FiniteGroupRep& rep,
                                       double tol = kComparisonTol) {
    if (channel.dim() != rep.dim())
        throw DimensionError("is_g_covariant: channel and representation dimensions differ");
    const auto probes = hermitian_probe_states(channel.dim());
    double worst = 0.0;
    for (const auto& rho : probes) {
        const Matrix mapped = channel.apply_matrix(rho.matrix());
        for (const auto& u : rep.elements()) {
            const Matrix lhs = channel.apply_matrix(u * rho.matrix() * u.adjoint());
            const Matrix rhs = u * mapped * u.adjoint();
            worst = std::max(worst, max_abs_diff(lhs, rhs));
        }
    }
    return {worst <= tol, worst};
}

// Covariant channel built from an arbitrary one by group-averaging on both
// sides: Kraus set { T(g) K_i T(h)^dag / |G| } over all g, i, h.
inline QuantumChannel sandwich(const QuantumChannel& channel, const FiniteGroupRep& rep) {
    if (channel.dim() != rep.dim())
        throw DimensionError("sandwich: channel and representation dimensions differ");
    const double scale = 1.0 / std::sqrt(static_cast<double>(rep.order()));
    std::vector<Operator> kraus;
    kraus.reserve(static_cast<size_t>(rep.order()) * static_cast<size_t>(rep.order()) *
                  channel.kraus().size());
    for (const auto& ug : rep.elements())
        for (const auto& k : channel.kraus())
            for (const auto& uh : rep.elements())
                kraus.push_back(scale * ug * k * uh.adjoint() * scale);
    return QuantumChannel(std::move(kraus));
}

// Twirled channel: rho -> (1/|G|) sum_g T(g)^dag E(T(g) rho T(g)^dag) T(g),
// always covariant for the averaged group.
inline QuantumChannel twirl_channel(const QuantumChannel& channel, const FiniteGroupRep& rep) {
    if (channel.dim() != rep.dim())
        throw DimensionError("twirl_channel: channel and representation dimensions differ");
    const double scale = 1.0 / std::sqrt(static_cast<double>(rep.order()));
    std::vector<Operator> kraus;
    kraus.reserve(static_cast<size_t>(rep.order()) * channel.kraus().size());
    for (const auto& u : rep.elements())
        for (const auto& k : channel.kraus())
            kraus.push_back(scale * u.adjoint() * k * u);
    return QuantumChannel(std::move(kraus));
}

}  // namespace ssrent
