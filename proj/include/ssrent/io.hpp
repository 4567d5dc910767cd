// File formats: JSON state/channel files and the CSV report rows emitted by
// the sweep and bell commands. All floating-point text is written with 17
// significant digits so values round-trip exactly.
#pragma once

#include "ssrent/groups.hpp"
#include "ssrent/linalg.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace ssrent {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ============================================================================
// JSON state and channel files
// ============================================================================
//
// State file:   { "schema_version": 1, "kind": "ket" | "density" | "operator",
//                 "dim": d, "subsystem_dims": [..],
//                 "amplitudes": [[re, im], ...]          (ket; length d)
//                 "matrix": [[re, im], ...] }            (others; row-major, length d*d)
// Channel file: { "schema_version": 1, "dim": d,
//                 "kraus": [ [[re, im], ...], ... ] }    (each row-major, length d*d)

struct StateFile {
    int schema_version = 1;
    std::string kind;  // "ket", "density", or "operator" (a plain Hermitian observable)
    Index dim = 0;
    std::vector<Index> subsystem_dims;
    Vector amplitudes;  // kind == "ket"
    Matrix matrix;      // kind == "density" or "operator"
};

struct ChannelFile {
    int schema_version = 1;
    Index dim = 0;
    std::vector<Matrix> kraus;
};

namespace detail {

inline nlohmann::json complex_list(const Vector& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Index i = 0; i < v.size(); ++i)
        arr.push_back({v(i).real(), v(i).imag()});
    return arr;
}

inline nlohmann::json complex_list_row_major(const Matrix& m) {
    nlohmann::json arr = nlohmann::json::array();
    for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c)
            arr.push_back({m(r, c).real(), m(r, c).imag()});
    return arr;
}

inline Complex parse_complex(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ValidationError("state file: complex entries must be [re, im] pairs");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline Vector parse_complex_list(const nlohmann::json& j, Index expected, const char* what) {
    if (!j.is_array() || static_cast<Index>(j.size()) != expected)
        throw ValidationError(std::string(what) + ": expected " + std::to_string(expected) +
                              " complex entries");
    Vector v(expected);
    for (Index i = 0; i < expected; ++i) v(i) = parse_complex(j[static_cast<size_t>(i)]);
    return v;
}

inline Matrix parse_complex_matrix(const nlohmann::json& j, Index dim, const char* what) {
    const Vector flat = parse_complex_list(j, dim * dim, what);
    Matrix m(dim, dim);
    for (Index r = 0; r < dim; ++r)
        for (Index c = 0; c < dim; ++c) m(r, c) = flat(r * dim + c);
    return m;
}

inline nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path + " for reading");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": invalid JSON (" + e.what() + ")");
    }
}

inline void store_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing " + path);
}

}  // namespace detail

inline StateFile read_state_file(const std::string& path) {
    const nlohmann::json j = detail::load_json(path);
    StateFile f;
    try {
        f.schema_version = j.at("schema_version").get<int>();
        f.kind = j.at("kind").get<std::string>();
        f.dim = j.at("dim").get<Index>();
        for (const auto& d : j.at("subsystem_dims"))
            f.subsystem_dims.push_back(d.get<Index>());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": missing or malformed field (" + std::string(e.what()) + ")");
    }
    if (f.schema_version != 1)
        throw ValidationError(path + ": unsupported schema_version " +
                              std::to_string(f.schema_version));
    if (f.dim < 1) throw ValidationError(path + ": dim must be positive");
    const SubsystemShape shape{f.subsystem_dims};
    if (shape.total_dim() != f.dim)
        throw ValidationError(path + ": subsystem_dims do not multiply to dim");
    if (f.kind == "ket") {
        if (!j.contains("amplitudes"))
            throw ValidationError(path + ": kind \"ket\" requires amplitudes");
        f.amplitudes = detail::parse_complex_list(j["amplitudes"], f.dim, "amplitudes");
    } else if (f.kind == "density" || f.kind == "operator") {
        if (!j.contains("matrix"))
            throw ValidationError(path + ": kind \"" + f.kind + "\" requires matrix");
        f.matrix = detail::parse_complex_matrix(j["matrix"], f.dim, "matrix");
    } else {
        throw ValidationError(path + ": unknown kind \"" + f.kind + "\"");
    }
    return f;
}

inline void write_state_file(const std::string& path, const StateFile& f) {
    nlohmann::json j;
    j["schema_version"] = f.schema_version;
    j["kind"] = f.kind;
    j["dim"] = f.dim;
    j["subsystem_dims"] = f.subsystem_dims;
    if (f.kind == "ket")
        j["amplitudes"] = detail::complex_list(f.amplitudes);
    else
        j["matrix"] = detail::complex_list_row_major(f.matrix);
    detail::store_json(path, j);
}

inline StateFile make_ket_file(const Ket& psi, std::vector<Index> subsystem_dims) {
    StateFile f;
    f.kind = "ket";
    f.dim = psi.dim();
    f.subsystem_dims = std::move(subsystem_dims);
    f.amplitudes = psi.amplitudes();
    return f;
}

inline StateFile make_density_file(const DensityOperator& rho, std::vector<Index> subsystem_dims) {
    StateFile f;
    f.kind = "density";
    f.dim = rho.dim();
    f.subsystem_dims = std::move(subsystem_dims);
    f.matrix = rho.matrix();
    return f;
}

inline ChannelFile read_channel_file(const std::string& path) {
    const nlohmann::json j = detail::load_json(path);
    ChannelFile f;
    try {
        f.schema_version = j.at("schema_version").get<int>();
        f.dim = j.at("dim").get<Index>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": missing or malformed field (" + std::string(e.what()) + ")");
    }
    if (f.schema_version != 1)
        throw ValidationError(path + ": unsupported schema_version " +
                              std::to_string(f.schema_version));
    if (f.dim < 1) throw ValidationError(path + ": dim must be positive");
    if (!j.contains("kraus") || !j["kraus"].is_array() || j["kraus"].empty())
        throw ValidationError(path + ": kraus must be a nonempty array");
    for (const auto& k : j["kraus"])
        f.kraus.push_back(detail::parse_complex_matrix(k, f.dim, "kraus"));
    return f;
}

inline void write_channel_file(const std::string& path, const ChannelFile& f) {
    nlohmann::json j;
    j["schema_version"] = f.schema_version;
    j["dim"] = f.dim;
    nlohmann::json kraus = nlohmann::json::array();
    for (const auto& k : f.kraus) kraus.push_back(detail::complex_list_row_major(k));
    j["kraus"] = kraus;
    detail::store_json(path, j);
}

// ============================================================================
// CSV report rows
// ============================================================================

struct ReportRow {
    std::int64_t n = 0;
    std::optional<double> unconstrained_ebits;
    std::optional<double> sn_ebits;
    std::optional<double> su2_ebits;
    std::optional<double> sn_per_element;
    std::optional<double> duality_ratio;
    std::string method;  // "closed_form" or "brute_force"
};

inline std::string report_csv_header() {
    return "n,unconstrained_ebits,sn_ebits,su2_ebits,sn_per_element,duality_ratio,method";
}

inline std::string to_csv(const ReportRow& row) {
    const auto cell = [](const std::optional<double>& v) {
        return v ? format_double(*v) : std::string();
    };
    std::string s = std::to_string(row.n);
    s += ',' + cell(row.unconstrained_ebits);
    s += ',' + cell(row.sn_ebits);
    s += ',' + cell(row.su2_ebits);
    s += ',' + cell(row.sn_per_element);
    s += ',' + cell(row.duality_ratio);
    s += ',' + row.method;
    return s;
}

inline ReportRow parse_report_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    if (cells.size() != 7)
        throw ValidationError("report row: expected 7 cells, got " + std::to_string(cells.size()));
    const auto number = [](const std::string& c) -> std::optional<double> {
        if (c.empty()) return std::nullopt;
        try {
            size_t pos = 0;
            const double v = std::stod(c, &pos);
            if (pos != c.size()) throw std::invalid_argument(c);
            return v;
        } catch (const std::logic_error&) {
            throw ValidationError("report row: bad number \"" + c + "\"");
        }
    };
    ReportRow row;
    try {
        size_t pos = 0;
        row.n = std::stoll(cells[0], &pos);
        if (pos != cells[0].size()) throw std::invalid_argument(cells[0]);
    } catch (const std::logic_error&) {
        throw ValidationError("report row: bad count \"" + cells[0] + "\"");
    }
    row.unconstrained_ebits = number(cells[1]);
    row.sn_ebits = number(cells[2]);
    row.su2_ebits = number(cells[3]);
    row.sn_per_element = number(cells[4]);
    row.duality_ratio = number(cells[5]);
    row.method = cells[6];
    return row;
}

inline nlohmann::json to_json(const ReportRow& row) {
    const auto cell = [](const std::optional<double>& v) {
        return v ? nlohmann::json(*v) : nlohmann::json();
    };
    nlohmann::json j;
    j["n"] = row.n;
    j["unconstrained_ebits"] = cell(row.unconstrained_ebits);
    j["sn_ebits"] = cell(row.sn_ebits);
    j["su2_ebits"] = cell(row.su2_ebits);
    j["sn_per_element"] = cell(row.sn_per_element);
    j["duality_ratio"] = cell(row.duality_ratio);
    j["method"] = row.method;
    return j;
}

}  // namespace ssrent
