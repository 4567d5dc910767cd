// Command-line interface. Exit codes: 0 success (and PASS verdicts),
// 1 failed verdict (covariance FAIL, verify check failure, mixed sector),
// 2 usage error, 3 I/O or validation error.
#pragma once

#include "ssrent/entanglement.hpp"
#include "ssrent/groups.hpp"
#include "ssrent/io.hpp"
#include "ssrent/linalg.hpp"
#include "ssrent/schur.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace ssrent::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerdictFail = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;

namespace detail {

inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2e", v);
    return buf;
}

inline Matrix random_density_matrix(Index dim, std::mt19937& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix a(dim, dim);
    for (Index r = 0; r < dim; ++r)
        for (Index c = 0; c < dim; ++c) a(r, c) = Complex(gauss(rng), gauss(rng));
    Matrix rho = a * a.adjoint();
    rho = ((rho + rho.adjoint()) / 2.0).eval();
    rho /= rho.trace().real();
    return rho;
}

}  // namespace detail

// ============================================================================
// Subcommands
// ============================================================================

// Sector table of the collective-spin decomposition of n qubits, with the
// dimension identity sum_j (2j+1) c_j = 2^n checked exactly.
inline int cmd_multiplicities(int n, std::ostream& out) {
    out << "n = " << n << "\n";
    out << std::setw(6) << "2j" << std::setw(8) << "j" << std::setw(8) << "2j+1" << std::setw(22)
        << "c_j" << std::setw(24) << "(2j+1)*c_j" << "\n";
    unsigned __int128 total = 0;
    for (std::int64_t tj = (n % 2 == 0) ? 0 : 1; tj <= n; tj += 2) {
        const SpinLabel j{tj};
        const std::uint64_t c = multiplicity(n, j);
        const unsigned __int128 product =
            static_cast<unsigned __int128>(tj + 1) * static_cast<unsigned __int128>(c);
        total += product;
        out << std::setw(6) << tj << std::setw(8) << j.display() << std::setw(8) << (tj + 1)
            << std::setw(22) << c << std::setw(24) << static_cast<std::uint64_t>(product) << "\n";
    }
    const bool ok = total == (static_cast<unsigned __int128>(1) << n);
    out << "sum over sectors = " << static_cast<std::uint64_t>(total) << ", 2^" << n << " = "
        << (static_cast<std::uint64_t>(1) << n) << " : " << (ok ? "OK" : "MISMATCH") << "\n";
    return ok ? kExitOk : kExitVerdictFail;
}

// Entanglement of n Bell pairs under each constraint, as one report row.
inline int cmd_bell(std::int64_t n, const std::string& ssr, const std::string& method,
                    bool as_json, std::ostream& out) {
    ReportRow row;
    row.n = n;
    const bool want_sn = ssr == "sn" || ssr == "both";
    const bool want_su2 = ssr == "su2" || ssr == "both";

    if (method == "closed") {
        row.method = "closed_form";
        row.unconstrained_ebits = static_cast<double>(n);
        if (want_sn) row.sn_ebits = constrained_entanglement_bell_closed(n);
        if (want_su2) row.su2_ebits = constrained_entanglement_bell_su2_closed(n);
    } else {
        if (n > 4)
            throw std::invalid_argument("bell: --method numeric supports n <= 4");
        row.method = "brute_force";
        const SchurBasis basis = schur_transform(static_cast<int>(n));
        const BellEnsembleState bell = bell_ensemble(static_cast<int>(n));
        row.unconstrained_ebits = entanglement_entropy(
            bell.ket, SubsystemShape::uniform(2, basis.dim()));
        if (want_sn)
            row.sn_ebits = constrained_entanglement_numeric(bell.ket, n, Ssr::kSn, basis).ebits;
        if (want_su2)
            row.su2_ebits = constrained_entanglement_numeric(bell.ket, n, Ssr::kSu2, basis).ebits;
    }
    if (row.sn_ebits) row.sn_per_element = *row.sn_ebits / static_cast<double>(n);
    if (row.sn_ebits && row.su2_ebits)
        row.duality_ratio = (*row.sn_ebits + *row.su2_ebits) / *row.unconstrained_ebits;

    if (as_json)
        out << to_json(row).dump(2) << "\n";
    else
        out << report_csv_header() << "\n" << to_csv(row) << "\n";
    return kExitOk;
}

// Closed-form report rows over a list of ensemble sizes.
inline int cmd_sweep(std::vector<std::int64_t> ns, std::int64_t n_max, const std::string& out_path,
                     bool as_json, std::ostream& out) {
    if (ns.empty() && n_max > 0)
        for (std::int64_t n = 4; n <= n_max; n *= 4) ns.push_back(n);
    if (ns.empty())
        throw std::invalid_argument("sweep: give --n-list, or --n-max of at least 4");
    for (std::int64_t n : ns)
        if (n < 2) throw std::invalid_argument("sweep: ensemble sizes must be at least 2");

    const auto reports = asymptotics_table(ns);
    std::ostringstream body;
    const auto as_row = [](const EntanglementReport& rep) {
        return ReportRow{rep.n_pairs,
                         rep.unconstrained_ebits,
                         rep.sn_constrained_ebits,
                         rep.su2_constrained_ebits,
                         rep.sn_per_element,
                         rep.duality_ratio,
                         rep.method};
    };
    if (as_json) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& rep : reports) rows.push_back(to_json(as_row(rep)));
        body << rows.dump(2) << "\n";
    } else {
        body << report_csv_header() << "\n";
        for (const auto& rep : reports) body << to_csv(as_row(rep)) << "\n";
    }
    if (out_path.empty()) {
        out << body.str();
    } else {
        std::ofstream file(out_path);
        if (!file) throw IoError("cannot open " + out_path + " for writing");
        file << body.str();
        if (!file) throw IoError("failed writing " + out_path);
        out << "sweep: wrote " << reports.size() << " rows to " << out_path << "\n";
    }
    return kExitOk;
}

// Averages a state over a symmetry group and writes the result.
inline int cmd_twirl(const std::string& group, const std::string& in_path,
                     const std::string& out_path, bool fast, const std::string& generator_path,
                     std::ostream& out) {
    const StateFile in_file = read_state_file(in_path);
    DensityOperator rho = [&] {
        if (in_file.kind == "ket") return DensityOperator::pure(Ket(in_file.amplitudes));
        if (in_file.kind == "density") return DensityOperator(in_file.matrix);
        throw ValidationError("twirl: input must be a ket or density state file");
    }();

    DensityOperator result = rho;
    std::string description;
    if (group == "sn") {
        const SubsystemShape shape{in_file.subsystem_dims};
        const Index local_dim = shape.dim(0);
        for (int t = 0; t < shape.factors(); ++t)
            if (shape.dim(t) != local_dim)
                throw ValidationError("twirl: permutation group needs equal subsystem dimensions");
        const int n = shape.factors();
        if (fast) {
            if (local_dim != 2)
                throw std::invalid_argument("twirl: --fast requires qubit subsystems");
            result = sn_twirl_fast(rho, schur_transform(n));
            description = "group=S" + std::to_string(n) + " fast=true";
        } else {
            result = twirl_finite(rho, sn_permutation_rep(n, local_dim));
            description = "group=S" + std::to_string(n) + " fast=false";
        }
    } else {  // u1
        if (generator_path.empty())
            throw std::invalid_argument("twirl: --group u1 requires --generator");
        const StateFile gen = read_state_file(generator_path);
        if (gen.kind != "operator")
            throw ValidationError("twirl: generator file must have kind \"operator\"");
        if (gen.dim != rho.dim())
            throw ValidationError("twirl: generator dimension does not match the state");
        const ChargeObservable charge(gen.matrix);
        result = u1_twirl(rho, charge);
        description = "group=U1 sectors=" + std::to_string(charge.charges().size());
    }

    write_state_file(out_path, make_density_file(result, in_file.subsystem_dims));
    out << "twirl: " << description << " dim=" << rho.dim()
        << " delta=" << detail::sci(max_abs_diff(result.matrix(), rho.matrix())) << " -> "
        << out_path << "\n";
    return kExitOk;
}

// Checks a channel for covariance under the qubit-permutation group.
inline int cmd_covariance(const std::string& channel_path, const std::string& group, int n,
                          double tol, std::ostream& out) {
    (void)group;  // only "sn" is accepted by the option filter
    const ChannelFile file = read_channel_file(channel_path);
    const QuantumChannel channel{std::vector<Operator>(file.kraus)};
    const FiniteGroupRep rep = sn_permutation_rep(n, 2);
    if (channel.dim() != rep.dim())
        throw ValidationError("covariance: channel dimension " + std::to_string(channel.dim()) +
                              " does not match 2^" + std::to_string(n));
    const CovarianceResult res = is_g_covariant(channel, rep, tol);
    out << "covariance: group=S" << n << " dim=" << channel.dim()
        << " residual=" << detail::sci(res.max_residual) << " tol=" << detail::sci(tol) << " "
        << (res.covariant ? "PASS" : "FAIL") << "\n";
    return res.covariant ? kExitOk : kExitVerdictFail;
}

// Cross-checks the fast structured routes against first-principles references.
inline int cmd_verify(int n, std::ostream& out) {
    const SchurBasis basis = schur_transform(n);
    const FiniteGroupRep rep = sn_permutation_rep(n, 2);
    std::mt19937 rng(12345u + static_cast<unsigned>(n));
    bool all_ok = true;
    const auto report = [&](int i, const std::string& name, double residual, double tol) {
        const bool ok = residual <= tol;
        all_ok = all_ok && ok;
        out << "[" << i << "/4] " << std::left << std::setw(52) << name << std::right
            << " residual " << detail::sci(residual) << "  tol " << detail::sci(tol) << "  "
            << (ok ? "ok" : "FAIL") << "\n";
    };

    // 1: structured permutation twirl against the explicit group average
    double res1 = 0.0;
    for (int s = 0; s < 10; ++s) {
        const DensityOperator rho{detail::random_density_matrix(basis.dim(), rng)};
        res1 = std::max(res1, max_abs_diff(sn_twirl_fast(rho, basis).matrix(),
                                           twirl_finite(rho, rep).matrix()));
    }
    report(1, "permutation twirl, fast vs explicit (10 states)", res1, 1e-9);

    // 2: both registers of the Bell ensemble, fast vs explicit
    const BellEnsembleState bell = bell_ensemble(n);
    const DensityOperator bell_rho = DensityOperator::pure(bell.ket);
    const double res2 = max_abs_diff(bipartite_twirl_fast(bell_rho, basis, Ssr::kSn).matrix(),
                                     bipartite_sn_twirl_brute(bell_rho, n).matrix());
    report(2, "bipartite permutation twirl, fast vs explicit", res2, 1e-9);

    // 3: in the coupled basis the Bell ensemble pairs identical indices on
    // both registers with uniform amplitude 2^(-n/2)
    const Matrix w = tensor(basis.transform(), basis.transform());
    const Vector y = w.adjoint() * bell.ket.amplitudes();
    const double amp = std::pow(2.0, -0.5 * n);
    double res3 = 0.0;
    for (Index a = 0; a < basis.dim(); ++a)
        for (Index b = 0; b < basis.dim(); ++b) {
            const Complex expected = (a == b) ? Complex(amp, 0.0) : Complex(0.0, 0.0);
            res3 = std::max(res3, std::abs(y(a * basis.dim() + b) - expected));
        }
    report(3, "coupled-basis pairing of the Bell ensemble", res3, 1e-10);

    // 4: closed-form sector sums against the twirl-and-decompose route
    const double sn_closed = constrained_entanglement_bell_closed(n);
    const double su2_closed = constrained_entanglement_bell_su2_closed(n);
    const double sn_numeric =
        constrained_entanglement_numeric(bell.ket, n, Ssr::kSn, basis).ebits;
    const double su2_numeric =
        constrained_entanglement_numeric(bell.ket, n, Ssr::kSu2, basis).ebits;
    const double res4 =
        std::max(std::abs(sn_closed - sn_numeric), std::abs(su2_closed - su2_numeric));
    report(4, "closed-form vs numeric constrained entanglement", res4, 1e-8);

    out << (all_ok ? "verify: all checks passed" : "verify: FAILURES detected") << "\n";
    return all_ok ? kExitOk : kExitVerdictFail;
}

// ============================================================================
// Argument parsing and dispatch
// ============================================================================

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Entanglement of Bell-pair ensembles under local symmetry constraints"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "ssrent 1.0.0");
    int result = kExitOk;

    auto* mult = app.add_subcommand(
        "multiplicities", "Sector table of the collective-spin decomposition of n qubits");
    int mult_n = 1;
    mult->add_option("--n", mult_n, "number of qubits")->required()->check(CLI::Range(1, 63));
    mult->callback([&] { result = cmd_multiplicities(mult_n, out); });

    auto* bell = app.add_subcommand("bell", "Constrained entanglement of n Bell pairs");
    std::int64_t bell_n = 1;
    std::string bell_ssr = "both";
    std::string bell_method = "closed";
    bool bell_json = false;
    bell->add_option("--n", bell_n, "number of Bell pairs")
        ->required()
        ->check(CLI::Range(std::int64_t{1}, std::int64_t{10000000}));
    bell->add_option("--ssr", bell_ssr, "constraint: sn, su2, or both")
        ->check(CLI::IsMember({"sn", "su2", "both"}));
    bell->add_option("--method", bell_method, "closed (sector sums) or numeric (twirl, n <= 4)")
        ->check(CLI::IsMember({"closed", "numeric"}));
    bell->add_flag("--json", bell_json, "emit JSON instead of CSV");
    bell->callback([&] { result = cmd_bell(bell_n, bell_ssr, bell_method, bell_json, out); });

    auto* sweep = app.add_subcommand("sweep", "Closed-form report over many ensemble sizes");
    std::vector<std::int64_t> sweep_ns;
    std::int64_t sweep_max = 0;
    std::string sweep_out;
    bool sweep_json = false;
    sweep->add_option("--n-list", sweep_ns, "comma-separated ensemble sizes")->delimiter(',');
    sweep->add_option("--n-max", sweep_max, "sweep powers of 4 up to this size");
    sweep->add_option("--out", sweep_out, "output file (default: stdout)");
    sweep->add_flag("--json", sweep_json, "emit JSON instead of CSV");
    sweep->callback([&] { result = cmd_sweep(sweep_ns, sweep_max, sweep_out, sweep_json, out); });

    auto* twirl = app.add_subcommand("twirl", "Average a state over a symmetry group");
    std::string twirl_group, twirl_in, twirl_out, twirl_gen;
    bool twirl_fast = false;
    twirl->add_option("--group", twirl_group, "symmetry group: sn or u1")
        ->required()
        ->check(CLI::IsMember({"sn", "u1"}));
    twirl->add_option("--in", twirl_in, "input state file (ket or density)")->required();
    twirl->add_option("--out", twirl_out, "output density file")->required();
    twirl->add_flag("--fast", twirl_fast, "use the coupled-basis route (qubits, n <= 12)");
    twirl->add_option("--generator", twirl_gen, "charge observable file (required for u1)");
    twirl->callback(
        [&] { result = cmd_twirl(twirl_group, twirl_in, twirl_out, twirl_fast, twirl_gen, out); });

    auto* cov = app.add_subcommand("covariance", "Check a channel for permutation covariance");
    std::string cov_channel, cov_group = "sn";
    int cov_n = 1;
    double cov_tol = 1e-9;
    cov->add_option("--channel", cov_channel, "channel file (Kraus operators)")->required();
    cov->add_option("--group", cov_group, "symmetry group (sn)")->check(CLI::IsMember({"sn"}));
    cov->add_option("--n", cov_n, "number of qubits")->required()->check(CLI::Range(1, 6));
    cov->add_option("--tol", cov_tol, "covariance tolerance");
    cov->callback([&] { result = cmd_covariance(cov_channel, cov_group, cov_n, cov_tol, out); });

    auto* verify = app.add_subcommand("verify", "Cross-check fast routes against references");
    int verify_n = 2;
    verify->add_option("--n", verify_n, "qubits per register")->required()->check(CLI::Range(1, 4));
    verify->callback([&] { result = cmd_verify(verify_n, out); });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        const auto subs = app.get_subcommands();
        out << (subs.empty() ? app.help() : subs.front()->help());
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << app.version() << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const MixedSectorError& e) {
        err << "error: " << e.what() << "\n";
        return kExitVerdictFail;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    return result;
}

}  // namespace ssrent::cli
