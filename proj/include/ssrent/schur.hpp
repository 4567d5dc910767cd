// Collective-spin (coupled) basis of N qubits and the structured twirls it
// diagonalizes.
//
// The space of N qubits splits into sectors labeled by total spin j, each of
// the form R_j (x) P_j where R_j is the (2j+1)-dimensional rotation space and
// P_j a multiplicity space of dimension c_j counting the inequivalent ways j
// can arise from sequential pairwise coupling. Collective rotations act only
// on R_j; qubit permutations act only on P_j. Averaging a state over either
// group therefore reduces to cheap per-sector projections once the state is
// expressed in this basis, which is what the *_fast twirls below do.
//
// Conventions, fixed once and used everywhere:
//   * spins are stored doubled (two_j = 2j) so all arithmetic is integral;
//   * qubit |0> is spin up (m = +1/2), |1> is spin down;
//   * within a sector, columns are ordered multiplicity-major: the column for
//     (r, m) sits at offset + r*(2j+1) + (m + j);
//   * multiplicity labels r enumerate coupling paths in lexicographic order
//     of their step sequences;
//   * sectors are ordered by ascending j.
#pragma once

#include "ssrent/groups.hpp"
#include "ssrent/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ssrent {

// ============================================================================
// Spin labels, multiplicities, coupling paths
// ============================================================================

// Total-spin label stored as two_j = 2j, so half-integer spins stay exact.
struct SpinLabel {
    std::int64_t two_j = 0;

    double j() const { return static_cast<double>(two_j) / 2.0; }
    bool valid_for(std::int64_t n) const {
        return two_j >= 0 && two_j <= n && (n - two_j) % 2 == 0;
    }
    // "0", "1/2", "1", "3/2", ...
    std::string display() const {
        return two_j % 2 == 0 ? std::to_string(two_j / 2) : std::to_string(two_j) + "/2";
    }
    friend bool operator==(const SpinLabel&, const SpinLabel&) = default;
    friend auto operator<=>(const SpinLabel&, const SpinLabel&) = default;
};

namespace detail {

// ln of the spin-j multiplicity of n qubits, computed in the log domain so it
// stays finite far beyond the exact-integer range.
inline double ln_multiplicity(std::int64_t n, std::int64_t two_j) {
    const std::int64_t k = (n - two_j) / 2;
    const double ln_binom = std::lgamma(static_cast<double>(n) + 1.0) -
                            std::lgamma(static_cast<double>(k) + 1.0) -
                            std::lgamma(static_cast<double>(n - k) + 1.0);
    return ln_binom + std::log(static_cast<double>(two_j) + 1.0) -
           std::log(static_cast<double>(n - k) + 1.0);
}

}  // namespace detail

// Number of inequivalent spin-j irreducible blocks in the N-qubit space:
// binom(n, k) * (2j+1) / (n-k+1) with k = n/2 - j. Exact integer arithmetic;
// the result fits in 64 bits for every n <= 63.
inline std::uint64_t multiplicity(std::int64_t n, SpinLabel j) {
    if (n < 1 || n > 63)
        throw DimensionError("multiplicity: exact computation supported for 1 <= n <= 63");
    if (!j.valid_for(n))
        throw DimensionError("multiplicity: spin " + j.display() + " cannot arise from " +
                             std::to_string(n) + " qubits");
    const std::int64_t k = (n - j.two_j) / 2;
    unsigned __int128 acc = 1;
    for (std::int64_t i = 1; i <= k; ++i) {
        acc *= static_cast<unsigned __int128>(n - k + i);
        acc /= static_cast<unsigned __int128>(i);  // exact: acc is binom(n-k+i, i)
    }
    acc *= static_cast<unsigned __int128>(j.two_j + 1);
    acc /= static_cast<unsigned __int128>(n - k + 1);  // exact: ballot-number identity
    if (acc > static_cast<unsigned __int128>(std::numeric_limits<std::uint64_t>::max()))
        throw std::overflow_error("multiplicity: result exceeds 64 bits");
    return static_cast<std::uint64_t>(acc);
}

// log2 of the sector weight (2j+1) c_j / 2^n — the probability that a
// uniformly random maximally mixed qubit register lands in sector j. Stable
// for n up to at least 10^7.
inline double log2_weight(std::int64_t n, SpinLabel j) {
    if (n < 1)
        throw DimensionError("log2_weight: need n >= 1");
    if (!j.valid_for(n))
        throw DimensionError("log2_weight: spin " + j.display() + " cannot arise from " +
                             std::to_string(n) + " qubits");
    const double ln_w = detail::ln_multiplicity(n, j.two_j) +
                        std::log(static_cast<double>(j.two_j) + 1.0) -
                        static_cast<double>(n) * std::numbers::ln2;
    return ln_w / std::numbers::ln2;
}

// One sequential-coupling history: two_j_steps[k] is the total spin after
// k+1 qubits, so it starts at 1 and changes by ±1 per added qubit.
struct CouplingPath {
    std::vector<std::int64_t> two_j_steps;

    SpinLabel terminal() const { return SpinLabel{two_j_steps.back()}; }
    friend bool operator==(const CouplingPath&, const CouplingPath&) = default;
    friend bool operator<(const CouplingPath& a, const CouplingPath& b) {
        return a.two_j_steps < b.two_j_steps;
    }
};

// All coupling paths for n qubits, grouped by terminal spin (ascending) and
// lexicographic within each group — the multiplicity-label order used by the
// basis. The group sizes reproduce multiplicity(n, j).
inline std::vector<CouplingPath> coupling_paths(int n) {
    if (n < 1 || n > 20)
        throw DimensionError("coupling_paths: supported for 1 <= n <= 20");
    std::vector<CouplingPath> paths;
    paths.push_back(CouplingPath{{1}});
    for (int k = 2; k <= n; ++k) {
        std::vector<CouplingPath> next;
        next.reserve(paths.size() * 2);
        for (const auto& p : paths) {
            const std::int64_t tj = p.two_j_steps.back();
            for (std::int64_t tjc : {tj - 1, tj + 1}) {
                if (tjc < 0) continue;
                CouplingPath q = p;
                q.two_j_steps.push_back(tjc);
                next.push_back(std::move(q));
            }
        }
        paths = std::move(next);
    }
    std::stable_sort(paths.begin(), paths.end(),
                     [](const CouplingPath& a, const CouplingPath& b) {
                         return a.terminal().two_j < b.terminal().two_j;
                     });
    return paths;
}

// ============================================================================
// The coupled basis
// ============================================================================

// One total-spin sector: a contiguous run of basis columns.
struct Sector {
    SpinLabel j;
    std::uint64_t mult = 0;  // dimension of the multiplicity space P_j
    Index offset = 0;        // first basis column of the sector

    Index rotation_dim() const { return static_cast<Index>(j.two_j) + 1; }
    Index mult_dim() const { return static_cast<Index>(mult); }
    Index size() const { return mult_dim() * rotation_dim(); }
    // basis column of multiplicity label r and magnetic column m_col = m + j
    Index column(Index r, Index m_col) const { return offset + r * rotation_dim() + m_col; }
};

// Unitary change of basis from the product basis of n qubits to the coupled
// basis, together with the sector layout of its columns.
class SchurBasis {
  public:
    SchurBasis(int n, std::vector<Sector> sectors, Matrix transform)
        : n_(n), sectors_(std::move(sectors)), transform_(std::move(transform)) {
        const Index dim = Index(1) << n_;
        if (transform_.rows() != dim || transform_.cols() != dim)
            throw DimensionError("SchurBasis: transform must be 2^n x 2^n");
        Index off = 0;
        for (size_t s = 0; s < sectors_.size(); ++s) {
            if (sectors_[s].offset != off)
                throw DimensionError("SchurBasis: sector offsets must be contiguous");
            if (s > 0 && sectors_[s].j.two_j <= sectors_[s - 1].j.two_j)
                throw DimensionError("SchurBasis: sectors must be in ascending spin order");
            off += sectors_[s].size();
        }
        if (off != dim)
            throw DimensionError("SchurBasis: sector sizes do not fill the space");
    }

    int n() const { return n_; }
    Index dim() const { return transform_.rows(); }
    const std::vector<Sector>& sectors() const { return sectors_; }
    const Matrix& transform() const { return transform_; }

    const Sector& sector(SpinLabel j) const {
        for (const auto& s : sectors_)
            if (s.j == j) return s;
        throw DimensionError("SchurBasis: no sector with spin " + j.display());
    }

    // sector index of each basis column, for fast block-membership tests
    std::vector<int> column_sectors() const {
        std::vector<int> ids(static_cast<size_t>(dim()));
        for (size_t s = 0; s < sectors_.size(); ++s)
            for (Index c = sectors_[s].offset; c < sectors_[s].offset + sectors_[s].size(); ++c)
                ids[static_cast<size_t>(c)] = static_cast<int>(s);
        return ids;
    }

  private:
    int n_;
    std::vector<Sector> sectors_;
    Matrix transform_;
};

// Builds the coupled basis by adding one qubit at a time. Appending a qubit
// to a spin-tj state yields spin tj±1 states whose amplitudes are the
// standard recoupling coefficients (Condon-Shortley phases):
//   tj+1 sector:  |0>-branch  sqrt((tj+tm+1) / (2(tj+1)))
//                 |1>-branch  sqrt((tj-tm+1) / (2(tj+1)))
//   tj-1 sector:  |0>-branch -sqrt((tj-tm+1) / (2(tj+1)))
//                 |1>-branch  sqrt((tj+tm+1) / (2(tj+1)))
// where tm is the doubled magnetic number of the new state and the branch
// consumes the parent column with tm -/+ 1. All entries are real.
inline SchurBasis schur_transform(int n) {
    if (n < 1 || n > 12)
        throw DimensionError("schur_transform: supported for 1 <= n <= 12");

    using RealMatrix = Eigen::MatrixXd;
    struct Node {
        std::vector<std::int64_t> steps;
        RealMatrix states;  // 2^k rows; column (tm + tj)/2 holds the tm state
    };

    std::vector<Node> level;
    {
        RealMatrix seed(2, 2);
        seed << 0.0, 1.0,  // product-basis row |0> = spin up   -> column m=+1/2
            1.0, 0.0;      // product-basis row |1> = spin down -> column m=-1/2
        level.push_back(Node{{1}, std::move(seed)});
    }

    for (int k = 2; k <= n; ++k) {
        std::vector<Node> next;
        next.reserve(level.size() * 2);
        const Index rows = Index(1) << k;
        for (const auto& node : level) {
            const std::int64_t tj = node.steps.back();
            for (const std::int64_t tjc : {tj - 1, tj + 1}) {
                if (tjc < 0) continue;
                RealMatrix child = RealMatrix::Zero(rows, tjc + 1);
                for (std::int64_t tm = -tjc; tm <= tjc; tm += 2) {
                    const Index col = (tm + tjc) / 2;
                    const double up_mag = std::sqrt((tj + tm + 1) / (2.0 * (tj + 1)));
                    const double down_mag = std::sqrt((tj - tm + 1) / (2.0 * (tj + 1)));
                    const double cu = (tjc == tj + 1) ? up_mag : -down_mag;
                    const double cd = (tjc == tj + 1) ? down_mag : up_mag;
                    // new qubit |0>: parent column with tm-1, amplitudes on even rows
                    if (const std::int64_t tmp = tm - 1; tmp >= -tj && tmp <= tj) {
                        const Index pcol = (tmp + tj) / 2;
                        for (Index r = 0; r < node.states.rows(); ++r)
                            child(2 * r, col) += cu * node.states(r, pcol);
                    }
                    // new qubit |1>: parent column with tm+1, amplitudes on odd rows
                    if (const std::int64_t tmp = tm + 1; tmp >= -tj && tmp <= tj) {
                        const Index pcol = (tmp + tj) / 2;
                        for (Index r = 0; r < node.states.rows(); ++r)
                            child(2 * r + 1, col) += cd * node.states(r, pcol);
                    }
                }
                std::vector<std::int64_t> steps = node.steps;
                steps.push_back(tjc);
                next.push_back(Node{std::move(steps), std::move(child)});
            }
        }
        level = std::move(next);
    }

    // Nodes are in lexicographic path order; pack them into sectors by
    // ascending terminal spin. Within a sector the packing order is the
    // multiplicity-label order.
    const Index dim = Index(1) << n;
    Matrix transform = Matrix::Zero(dim, dim);
    std::vector<Sector> sectors;
    Index offset = 0;
    for (std::int64_t tj = (n % 2 == 0) ? 0 : 1; tj <= n; tj += 2) {
        Index r = 0;
        for (const auto& node : level) {
            if (node.steps.back() != tj) continue;
            transform.block(0, offset + r * (tj + 1), dim, tj + 1) =
                node.states.cast<Complex>();
            ++r;
        }
        const std::uint64_t c = multiplicity(n, SpinLabel{tj});
        if (static_cast<std::uint64_t>(r) != c)
            throw std::runtime_error("schur_transform: path count disagrees with multiplicity");
        sectors.push_back(Sector{SpinLabel{tj}, c, offset});
        offset += r * (tj + 1);
    }
    return SchurBasis(n, std::move(sectors), std::move(transform));
}

// ============================================================================
// Structured twirls of one register
// ============================================================================

// Average over all qubit permutations, computed sector-by-sector: permutations
// act only on multiplicity labels, so the twirl keeps each (m, m') rotation
// matrix element, averages it across the multiplicity diagonal, and removes
// everything off-diagonal in (r, r').
inline DensityOperator sn_twirl_fast(const DensityOperator& rho, const SchurBasis& basis) {
    if (rho.dim() != basis.dim())
        throw DimensionError("sn_twirl_fast: dimension mismatch with basis");
    const Matrix& u = basis.transform();
    const Matrix x = u.adjoint() * rho.matrix() * u;
    Matrix y = Matrix::Zero(x.rows(), x.cols());
    for (const auto& sec : basis.sectors()) {
        const Index d = sec.rotation_dim();
        const Index c = sec.mult_dim();
        Matrix avg = Matrix::Zero(d, d);
        for (Index r = 0; r < c; ++r)
            avg += x.block(sec.offset + r * d, sec.offset + r * d, d, d);
        avg /= static_cast<double>(c);
        for (Index r = 0; r < c; ++r)
            y.block(sec.offset + r * d, sec.offset + r * d, d, d) = avg;
    }
    return DensityOperator(u * y * u.adjoint());
}

// Average over collective rotations (the same SU(2) element on every qubit):
// rotations act only on the magnetic index, so the twirl keeps each (r, r')
// multiplicity matrix element averaged over the magnetic diagonal.
inline DensityOperator su2_collective_twirl_fast(const DensityOperator& rho,
                                                 const SchurBasis& basis) {
    if (rho.dim() != basis.dim())
        throw DimensionError("su2_collective_twirl_fast: dimension mismatch with basis");
    const Matrix& u = basis.transform();
    const Matrix x = u.adjoint() * rho.matrix() * u;
    Matrix y = Matrix::Zero(x.rows(), x.cols());
    for (const auto& sec : basis.sectors()) {
        const Index d = sec.rotation_dim();
        const Index c = sec.mult_dim();
        Matrix z = Matrix::Zero(c, c);
        for (Index r = 0; r < c; ++r)
            for (Index r2 = 0; r2 < c; ++r2) {
                Complex acc(0.0, 0.0);
                for (Index m = 0; m < d; ++m)
                    acc += x(sec.column(r, m), sec.column(r2, m));
                z(r, r2) = acc / static_cast<double>(d);
            }
        for (Index r = 0; r < c; ++r)
            for (Index r2 = 0; r2 < c; ++r2)
                for (Index m = 0; m < d; ++m)
                    y(sec.column(r, m), sec.column(r2, m)) = z(r, r2);
    }
    return DensityOperator(u * y * u.adjoint());
}

// ============================================================================
// Two-register (bipartite) twirls and sector decomposition
// ============================================================================

// Which symmetry constraint is being enforced on each register.
enum class Ssr {
    kSn,   // independent qubit permutations on each register
    kSu2,  // independent collective rotations on each register
};

namespace detail {

// Transforms a two-register state into the coupled basis on each side:
// X = (U (x) U)^dag rho (U (x) U).
inline Matrix to_coupled_pair_basis(const Matrix& rho, const SchurBasis& basis) {
    const Matrix w = tensor(basis.transform(), basis.transform());
    return w.adjoint() * rho * w;
}

inline Matrix from_coupled_pair_basis(const Matrix& x, const SchurBasis& basis) {
    const Matrix w = tensor(basis.transform(), basis.transform());
    return w * x * w.adjoint();
}

inline void require_pair_dims(const char* what, Index rho_dim, const SchurBasis& basis) {
    if (rho_dim != basis.dim() * basis.dim())
        throw DimensionError(std::string(what) + ": state must live on two registers of 2^n each");
    if (basis.n() > 5)
        throw DimensionError(std::string(what) + ": supported for n <= 5 qubits per register");
}

}  // namespace detail

// Twirls both registers independently (group average over G x G) using the
// sector structure. Registers are laid out [register A | register B], each of
// basis.dim() qubits' dimension.
inline DensityOperator bipartite_twirl_fast(const DensityOperator& rho, const SchurBasis& basis,
                                            Ssr ssr) {
    detail::require_pair_dims("bipartite_twirl_fast", rho.dim(), basis);
    const Index dim = basis.dim();
    const Matrix x = detail::to_coupled_pair_basis(rho.matrix(), basis);
    Matrix y = Matrix::Zero(x.rows(), x.cols());

    for (const auto& sa : basis.sectors())
        for (const auto& sb : basis.sectors()) {
            const Index da = sa.rotation_dim(), ca = sa.mult_dim();
            const Index db = sb.rotation_dim(), cb = sb.mult_dim();
            const auto idx = [&](Index ra, Index ma, Index rb, Index mb) {
                return sa.column(ra, ma) * dim + sb.column(rb, mb);
            };
            if (ssr == Ssr::kSn) {
                // keep rotation indices, average the multiplicity diagonal
                Matrix avg = Matrix::Zero(da * db, da * db);
                for (Index ra = 0; ra < ca; ++ra)
                    for (Index rb = 0; rb < cb; ++rb)
                        for (Index ma = 0; ma < da; ++ma)
                            for (Index mb = 0; mb < db; ++mb)
                                for (Index ma2 = 0; ma2 < da; ++ma2)
                                    for (Index mb2 = 0; mb2 < db; ++mb2)
                                        avg(ma * db + mb, ma2 * db + mb2) +=
                                            x(idx(ra, ma, rb, mb), idx(ra, ma2, rb, mb2));
                avg /= static_cast<double>(ca * cb);
                for (Index ra = 0; ra < ca; ++ra)
                    for (Index rb = 0; rb < cb; ++rb)
                        for (Index ma = 0; ma < da; ++ma)
                            for (Index mb = 0; mb < db; ++mb)
                                for (Index ma2 = 0; ma2 < da; ++ma2)
                                    for (Index mb2 = 0; mb2 < db; ++mb2)
                                        y(idx(ra, ma, rb, mb), idx(ra, ma2, rb, mb2)) =
                                            avg(ma * db + mb, ma2 * db + mb2);
            } else {
                // keep multiplicity indices, average the magnetic diagonal
                Matrix avg = Matrix::Zero(ca * cb, ca * cb);
                for (Index ma = 0; ma < da; ++ma)
                    for (Index mb = 0; mb < db; ++mb)
                        for (Index ra = 0; ra < ca; ++ra)
                            for (Index rb = 0; rb < cb; ++rb)
                                for (Index ra2 = 0; ra2 < ca; ++ra2)
                                    for (Index rb2 = 0; rb2 < cb; ++rb2)
                                        avg(ra * cb + rb, ra2 * cb + rb2) +=
                                            x(idx(ra, ma, rb, mb), idx(ra2, ma, rb2, mb));
                avg /= static_cast<double>(da * db);
                for (Index ma = 0; ma < da; ++ma)
                    for (Index mb = 0; mb < db; ++mb)
                        for (Index ra = 0; ra < ca; ++ra)
                            for (Index rb = 0; rb < cb; ++rb)
                                for (Index ra2 = 0; ra2 < ca; ++ra2)
                                    for (Index rb2 = 0; rb2 < cb; ++rb2)
                                        y(idx(ra, ma, rb, mb), idx(ra2, ma, rb2, mb)) =
                                            avg(ra * cb + rb, ra2 * cb + rb2);
            }
        }
    return DensityOperator(detail::from_coupled_pair_basis(y, basis));
}

// Reference implementation of the permutation twirl of both registers: the
// literal average over explicit permutation unitaries, applied to each side
// in sequence. Only feasible for small registers; used to validate the fast
// sector-based route.
inline DensityOperator bipartite_sn_twirl_brute(const DensityOperator& rho, int n) {
    if (n < 1 || n > 4)
        throw DimensionError("bipartite_sn_twirl_brute: supported for 1 <= n <= 4 qubits per register");
    const FiniteGroupRep rep = sn_permutation_rep(n, 2);
    const Index d = rep.dim();
    if (rho.dim() != d * d)
        throw DimensionError("bipartite_sn_twirl_brute: state must live on two registers of 2^n each");
    const Matrix eye = Matrix::Identity(d, d);

    Matrix acc_a = Matrix::Zero(rho.dim(), rho.dim());
    for (const auto& p : rep.elements()) {
        const Matrix side = tensor(p, eye);
        acc_a += side * rho.matrix() * side.adjoint();
    }
    acc_a /= static_cast<double>(rep.order());

    Matrix acc_b = Matrix::Zero(rho.dim(), rho.dim());
    for (const auto& p : rep.elements()) {
        const Matrix side = tensor(eye, p);
        acc_b += side * acc_a * side.adjoint();
    }
    acc_b /= static_cast<double>(rep.order());
    return DensityOperator(std::move(acc_b));
}

// One diagonal sector pair (j_a, j_b) of a two-register state, split into its
// rotation part (on R_{ja} (x) R_{jb}) and multiplicity part (on
// P_{ja} (x) P_{jb}).
struct SectorBlock {
    SpinLabel ja, jb;
    double weight = 0.0;
    DensityOperator r_block;  // rotation indices, dimension (2ja+1)(2jb+1)
    DensityOperator p_block;  // multiplicity indices, dimension c_ja * c_jb
};

struct SectorDecomposition {
    std::vector<SectorBlock> blocks;       // ascending (j_a, j_b)
    double offblock_residual = 0.0;        // largest entry outside diagonal sector pairs
    double product_residual = 0.0;         // reconstruction error of weight * r (x) p
    bool product_form_ok = false;          // product_residual within tolerance
};

// Splits a two-register state into its diagonal sector-pair blocks and each
// block into rotation (x) multiplicity parts. Faithful (product_form_ok) for
// any state invariant under either of the bipartite twirls. Sector pairs of
// negligible weight get maximally mixed placeholder parts. Throws if the
// state has support outside the diagonal sector pairs.
inline SectorDecomposition bipartite_sector_decompose(const DensityOperator& rho,
                                                      const SchurBasis& basis,
                                                      double tol = kComparisonTol) {
    detail::require_pair_dims("bipartite_sector_decompose", rho.dim(), basis);
    constexpr double kWeightFloor = 1e-12;
    const Index dim = basis.dim();
    const Matrix x = detail::to_coupled_pair_basis(rho.matrix(), basis);

    // residual outside the diagonal sector pairs
    const std::vector<int> col_sec = basis.column_sectors();
    double off = 0.0;
    for (Index row = 0; row < x.rows(); ++row)
        for (Index col = 0; col < x.cols(); ++col) {
            const bool same_pair = col_sec[static_cast<size_t>(row / dim)] ==
                                       col_sec[static_cast<size_t>(col / dim)] &&
                                   col_sec[static_cast<size_t>(row % dim)] ==
                                       col_sec[static_cast<size_t>(col % dim)];
            if (!same_pair) off = std::max(off, std::abs(x(row, col)));
        }
    if (off > tol)
        throw ValidationError(
            "bipartite_sector_decompose: state has weight outside diagonal sector pairs "
            "(residual " + std::to_string(off) + "); twirl it first");

    SectorDecomposition out;
    out.offblock_residual = off;

    for (const auto& sa : basis.sectors())
        for (const auto& sb : basis.sectors()) {
            const Index da = sa.rotation_dim(), ca = sa.mult_dim();
            const Index db = sb.rotation_dim(), cb = sb.mult_dim();
            const auto idx = [&](Index ra, Index ma, Index rb, Index mb) {
                return sa.column(ra, ma) * dim + sb.column(rb, mb);
            };

            Complex tr(0.0, 0.0);
            for (Index ra = 0; ra < ca; ++ra)
                for (Index rb = 0; rb < cb; ++rb)
                    for (Index ma = 0; ma < da; ++ma)
                        for (Index mb = 0; mb < db; ++mb)
                            tr += x(idx(ra, ma, rb, mb), idx(ra, ma, rb, mb));
            const double weight = tr.real();

            Matrix rot = Matrix::Zero(da * db, da * db);
            Matrix mul = Matrix::Zero(ca * cb, ca * cb);
            for (Index ra = 0; ra < ca; ++ra)
                for (Index rb = 0; rb < cb; ++rb)
                    for (Index ma = 0; ma < da; ++ma)
                        for (Index mb = 0; mb < db; ++mb) {
                            for (Index ma2 = 0; ma2 < da; ++ma2)
                                for (Index mb2 = 0; mb2 < db; ++mb2)
                                    rot(ma * db + mb, ma2 * db + mb2) +=
                                        x(idx(ra, ma, rb, mb), idx(ra, ma2, rb, mb2));
                            for (Index ra2 = 0; ra2 < ca; ++ra2)
                                for (Index rb2 = 0; rb2 < cb; ++rb2)
                                    mul(ra * cb + rb, ra2 * cb + rb2) +=
                                        x(idx(ra, ma, rb, mb), idx(ra2, ma, rb2, mb));
                        }

            SectorBlock block{sa.j, sb.j, weight,
                              DensityOperator(Matrix::Identity(da * db, da * db) /
                                              static_cast<double>(da * db)),
                              DensityOperator(Matrix::Identity(ca * cb, ca * cb) /
                                              static_cast<double>(ca * cb))};
            if (weight > kWeightFloor) {
                // normalize and symmetrize; tiny weights amplify roundoff, so
                // the PSD floor is relaxed proportionally
                const double floor = -std::max(1e-10, 1e-13 / weight);
                rot = ((rot + rot.adjoint()) / 2.0 / rot.trace().real()).eval();
                mul = ((mul + mul.adjoint()) / 2.0 / mul.trace().real()).eval();
                block.r_block = DensityOperator(std::move(rot), 1e-12, 1e-12, floor);
                block.p_block = DensityOperator(std::move(mul), 1e-12, 1e-12, floor);

                double res = 0.0;
                for (Index ra = 0; ra < ca; ++ra)
                    for (Index rb = 0; rb < cb; ++rb)
                        for (Index ma = 0; ma < da; ++ma)
                            for (Index mb = 0; mb < db; ++mb)
                                for (Index ra2 = 0; ra2 < ca; ++ra2)
                                    for (Index rb2 = 0; rb2 < cb; ++rb2)
                                        for (Index ma2 = 0; ma2 < da; ++ma2)
                                            for (Index mb2 = 0; mb2 < db; ++mb2) {
                                                const Complex recon =
                                                    weight *
                                                    block.p_block.matrix()(ra * cb + rb,
                                                                           ra2 * cb + rb2) *
                                                    block.r_block.matrix()(ma * db + mb,
                                                                           ma2 * db + mb2);
                                                res = std::max(
                                                    res,
                                                    std::abs(x(idx(ra, ma, rb, mb),
                                                               idx(ra2, ma2, rb2, mb2)) -
                                                             recon));
                                            }
                out.product_residual = std::max(out.product_residual, res);
            }
            out.blocks.push_back(std::move(block));
        }

    out.product_form_ok = out.product_residual <= tol;
    return out;
}

}  // namespace ssrent
