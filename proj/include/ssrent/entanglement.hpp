// Entanglement of shared Bell-pair ensembles when local operations must
// commute with a symmetry: either arbitrary qubit permutations within each
// lab (particle indistinguishability) or collective SU(2) rotations (no
// shared reference frame). Closed-form sector sums and a numeric route that
// twirls the state and decomposes it sector by sector.
#pragma once

#include "ssrent/linalg.hpp"
#include "ssrent/schur.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ssrent {

// ============================================================================
// States
// ============================================================================

// n Bell pairs shared between two registers, stored in block order: the first
// n qubits are register A (one from each pair), the last n are register B.
struct BellEnsembleState {
    int n_pairs = 0;
    Ket ket;
};

inline Ket bell_pair() {
    Vector v = Vector::Zero(4);
    v(0) = Complex(std::numbers::sqrt2 / 2.0, 0.0);
    v(3) = Complex(std::numbers::sqrt2 / 2.0, 0.0);
    return Ket(std::move(v));
}

inline BellEnsembleState bell_ensemble(int n) {
    if (n < 1 || n > 6)
        throw DimensionError("bell_ensemble: supported for 1 <= n <= 6 pairs");
    Ket interleaved = bell_pair();
    for (int i = 1; i < n; ++i) interleaved = tensor(interleaved, bell_pair());
    // reorder (a1 b1 a2 b2 ...) -> (a1 .. an b1 .. bn)
    std::vector<int> perm(static_cast<size_t>(2 * n));
    for (int i = 0; i < n; ++i) {
        perm[static_cast<size_t>(i)] = 2 * i;
        perm[static_cast<size_t>(n + i)] = 2 * i + 1;
    }
    return BellEnsembleState{
        n, permute_subsystems(interleaved, SubsystemShape::uniform(2 * n, 2), perm)};
}

// Maximally entangled state across the rotation indices of one spin-j sector
// pair: dimension (2j+1)^2, log2(2j+1) ebits.
inline Ket phi_state(SpinLabel j) {
    if (j.two_j < 0)
        throw ValidationError("phi_state: spin label must be nonnegative");
    const Index d = static_cast<Index>(j.two_j) + 1;
    Vector v = Vector::Zero(d * d);
    const double amp = 1.0 / std::sqrt(static_cast<double>(d));
    for (Index m = 0; m < d; ++m) v(m * d + m) = Complex(amp, 0.0);
    return Ket(std::move(v));
}

// Same, with j checked against the sectors present in a concrete basis.
inline Ket phi_state(SpinLabel j, const SchurBasis& basis) {
    if (!j.valid_for(basis.n()))
        throw ValidationError("phi_state: spin label " + j.display() +
                              " does not occur for " + std::to_string(basis.n()) +
                              " qubits");
    return phi_state(j);
}

// Maximally entangled state across the multiplicity indices of one spin-j
// sector pair of n-qubit registers: dimension c_j^2.
inline Ket chi_state(std::int64_t n, SpinLabel j) {
    const Index c = static_cast<Index>(multiplicity(n, j));
    Vector v = Vector::Zero(c * c);
    const double amp = 1.0 / std::sqrt(static_cast<double>(c));
    for (Index r = 0; r < c; ++r) v(r * c + r) = Complex(amp, 0.0);
    return Ket(std::move(v));
}

// Same, with n checked for consistency against a concrete basis.
inline Ket chi_state(std::int64_t n, SpinLabel j, const SchurBasis& basis) {
    if (n != basis.n())
        throw ValidationError("chi_state: n does not match the supplied basis");
    return chi_state(n, j);
}

// ============================================================================
// Closed-form constrained entanglement of n Bell pairs
// ============================================================================

namespace detail {

// Sum of w_j * value_j over the spin sectors of n qubits, with
// w_j = (2j+1) c_j / 2^n. Terms are accumulated in descending weight order
// so the dominant sectors are summed first.
template <typename ValueFn>
double sector_weighted_sum(std::int64_t n, ValueFn&& value) {
    std::vector<std::pair<double, double>> terms;  // (weight, weight * value)
    for (std::int64_t tj = (n % 2 == 0) ? 0 : 1; tj <= n; tj += 2) {
        const double w = std::exp2(log2_weight(n, SpinLabel{tj}));
        if (w <= 0.0) continue;  // underflow: sector irrelevant at double precision
        terms.emplace_back(w, w * value(tj));
    }
    std::sort(terms.begin(), terms.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    double acc = 0.0;
    for (const auto& t : terms) acc += t.second;
    return acc;
}

}  // namespace detail

// Ebits of n Bell pairs surviving a local permutation (indistinguishability)
// constraint: sum_j w_j log2(2j+1). Grows as (1/2) log2 n.
inline double constrained_entanglement_bell_closed(std::int64_t n) {
    if (n < 1)
        throw DimensionError("constrained_entanglement_bell_closed: need n >= 1");
    return detail::sector_weighted_sum(n, [](std::int64_t tj) {
        return std::log2(static_cast<double>(tj) + 1.0);
    });
}

// Ebits of n Bell pairs surviving a local collective-rotation (reference
// frame) constraint: sum_j w_j log2(c_j). Grows as n - O(log n), the
// complement of the permutation-constrained part.
inline double constrained_entanglement_bell_su2_closed(std::int64_t n) {
    if (n < 1)
        throw DimensionError("constrained_entanglement_bell_su2_closed: need n >= 1");
    return detail::sector_weighted_sum(n, [n](std::int64_t tj) {
        return detail::ln_multiplicity(n, tj) / std::numbers::ln2;
    });
}

// ============================================================================
// Numeric route: twirl, decompose, add up sector entanglement
// ============================================================================

// A sector pair whose surviving part is not a pure state, so its ebit count
// is not a plain entropy of entanglement. Raised instead of reporting a
// misleading number.
class MixedSectorError : public std::runtime_error {
  public:
    MixedSectorError(SpinLabel ja, SpinLabel jb, double second_eigenvalue, double weight)
        : std::runtime_error("sector pair (" + ja.display() + ", " + jb.display() +
                             ") is mixed after the twirl: second eigenvalue " +
                             std::to_string(second_eigenvalue) + " at weight " +
                             std::to_string(weight)),
          ja_(ja), jb_(jb), second_eigenvalue_(second_eigenvalue), weight_(weight) {}

    SpinLabel ja() const { return ja_; }
    SpinLabel jb() const { return jb_; }
    double second_eigenvalue() const { return second_eigenvalue_; }
    double weight() const { return weight_; }

  private:
    SpinLabel ja_, jb_;
    double second_eigenvalue_;
    double weight_;
};

enum class TwirlMethod {
    kFast,        // sector-structured projections in the coupled basis
    kBruteForce,  // explicit group average (permutation constraint only)
};

struct NumericEntanglement {
    double ebits = 0.0;
    SectorDecomposition decomposition;
};

// Entanglement of a pure two-register state under a symmetry constraint,
// computed from first principles: twirl both registers, split the invariant
// state into sector pairs, and charge each pair its weight times the
// entanglement of its surviving (rotation or multiplicity) part. Each
// surviving part must be pure within purity_tol, else MixedSectorError.
inline NumericEntanglement constrained_entanglement_numeric(
    const Ket& psi, std::int64_t n, Ssr ssr, const SchurBasis& basis,
    TwirlMethod method = TwirlMethod::kFast, double purity_tol = 1e-8) {
    constexpr double kWeightCutoff = 1e-12;
    if (n != basis.n())
        throw ValidationError(
            "constrained_entanglement_numeric: n does not match the supplied basis");
    const DensityOperator rho = DensityOperator::pure(psi);
    DensityOperator twirled = [&] {
        if (method == TwirlMethod::kFast) return bipartite_twirl_fast(rho, basis, ssr);
        if (ssr != Ssr::kSn)
            throw std::invalid_argument(
                "constrained_entanglement_numeric: brute-force averaging is only available "
                "for the permutation constraint");
        return bipartite_sn_twirl_brute(rho, basis.n());
    }();

    NumericEntanglement out;
    out.decomposition = bipartite_sector_decompose(twirled, basis);
    for (const auto& block : out.decomposition.blocks) {
        if (block.weight <= kWeightCutoff) continue;
        const DensityOperator& part = (ssr == Ssr::kSn) ? block.r_block : block.p_block;
        if (part.dim() == 1) continue;  // scalar sector: nothing to entangle
        const auto eig = eigh(part.matrix());
        if (eig.values(1) > purity_tol)
            throw MixedSectorError(block.ja, block.jb, eig.values(1), block.weight);
        const Index da = (ssr == Ssr::kSn) ? static_cast<Index>(block.ja.two_j) + 1
                                           : static_cast<Index>(multiplicity(basis.n(), block.ja));
        const Index db = (ssr == Ssr::kSn) ? static_cast<Index>(block.jb.two_j) + 1
                                           : static_cast<Index>(multiplicity(basis.n(), block.jb));
        const Ket part_state{Vector(eig.vectors.col(0))};
        out.ebits += block.weight *
                     entanglement_entropy(part_state, SubsystemShape({da, db}));
    }
    return out;
}

// ============================================================================
// Distinguished states and asymptotics
// ============================================================================

struct MaxNsState {
    Ket ket;
    double ebits = 0.0;
};

// The most entangled state that a local permutation constraint cannot touch:
// the rotation-index Bell state of the top sector (j = n/2, multiplicity 1),
// mapped back to the product basis. Carries log2(n+1) ebits and is a fixed
// point of the two-sided permutation twirl, because the top sector has no
// multiplicity index for the twirl to decohere.
inline MaxNsState max_ns_state(std::int64_t n, const SchurBasis& basis) {
    if (n != basis.n())
        throw ValidationError("max_ns_state: n does not match the supplied basis");
    const Sector& top = basis.sectors().back();
    if (top.mult != 1)
        throw std::runtime_error("max_ns_state: top sector must have multiplicity 1");
    const Index d = top.rotation_dim();
    const Index dim = basis.dim();
    Vector v = Vector::Zero(dim * dim);
    const double amp = 1.0 / std::sqrt(static_cast<double>(d));
    for (Index m = 0; m < d; ++m) {
        const Vector col = basis.transform().col(top.column(0, m));
        for (Index a = 0; a < dim; ++a)
            for (Index b = 0; b < dim; ++b) v(a * dim + b) += amp * col(a) * col(b);
    }
    return MaxNsState{Ket(std::move(v)), std::log2(static_cast<double>(d))};
}

struct EntanglementReport {
    std::int64_t n_pairs = 0;
    double unconstrained_ebits = 0.0;
    double sn_constrained_ebits = 0.0;
    double su2_constrained_ebits = 0.0;
    double sn_per_element = 0.0;  // sn_constrained_ebits / n_pairs
    double duality_ratio = 0.0;   // (sn + su2 constrained) / unconstrained
    std::string method = "closed_form";
};

inline EntanglementReport bell_report_closed(std::int64_t n) {
    EntanglementReport rep;
    rep.n_pairs = n;
    rep.unconstrained_ebits = static_cast<double>(n);
    rep.sn_constrained_ebits = constrained_entanglement_bell_closed(n);
    rep.su2_constrained_ebits = constrained_entanglement_bell_su2_closed(n);
    rep.sn_per_element = rep.sn_constrained_ebits / static_cast<double>(n);
    rep.duality_ratio =
        (rep.sn_constrained_ebits + rep.su2_constrained_ebits) / rep.unconstrained_ebits;
    rep.method = "closed_form";
    return rep;
}

// Closed-form reports for a list of ensemble sizes; the two constrained
// entanglements sum toward the unconstrained n ebits as n grows.
inline std::vector<EntanglementReport> asymptotics_table(const std::vector<std::int64_t>& ns) {
    std::vector<EntanglementReport> rows;
    rows.reserve(ns.size());
    for (std::int64_t n : ns) {
        if (n < 2)
            throw DimensionError("asymptotics_table: ensemble sizes must be at least 2");
        rows.push_back(bell_report_closed(n));
    }
    return rows;
}

}  // namespace ssrent
