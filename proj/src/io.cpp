// SPDX-License-Identifier: Apache-2.0
#include "spreadid/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "spreadid/errors.hpp"

namespace spreadid::io {

namespace {

constexpr const char* kMagic = "spreadid-cmatrix";
constexpr int kVersion = 1;

nlohmann::json support_json(const SupportSet& s) {
    nlohmann::json cells = nlohmann::json::array();
    for (const Cell& c : s.cells()) cells.push_back({c.k, c.m});
    return cells;
}

nlohmann::json matrix_json(const CMatrix& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back({M(i, j).real(), M(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::json vector_json(const RVector& v) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

void write_matrix(std::ostream& os, const CMatrix& M) {
    os << kMagic << ' ' << kVersion << '\n' << M.rows() << ' ' << M.cols() << '\n';
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            os << format_double(M(i, j).real()) << ' ' << format_double(M(i, j).imag()) << '\n';
        }
    }
    if (!os) throw IoError("write_matrix: stream error");
}

CMatrix read_matrix(std::istream& is) {
    std::string magic;
    int version = 0;
    if (!(is >> magic >> version) || magic != kMagic) {
        throw IoError("read_matrix: line 1: expected header '" + std::string(kMagic) + " 1'");
    }
    if (version != kVersion) throw IoError("read_matrix: line 1: unsupported version " + std::to_string(version));
    long long rows = -1;
    long long cols = -1;
    if (!(is >> rows >> cols) || rows < 0 || cols < 0) {
        throw IoError("read_matrix: line 2: expected '<rows> <cols>'");
    }
    CMatrix M(rows, cols);
    long long line = 3;
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j, ++line) {
            std::string re;
            std::string im;
            if (!(is >> re >> im)) {
                throw IoError("read_matrix: line " + std::to_string(line) + ": expected '<re> <im>'");
            }
            try {
                M(i, j) = cplx(std::stod(re), std::stod(im));
            } catch (const std::exception&) {
                throw IoError("read_matrix: line " + std::to_string(line) + ": malformed number");
            }
        }
    }
    return M;
}

void save_matrix(const std::string& path, const CMatrix& M) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_matrix(os, M);
}

CMatrix load_matrix(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "'");
    try {
        return read_matrix(is);
    } catch (const IoError& e) {
        throw IoError(path + ": " + e.what());
    }
}

std::string result_to_json(const RecoveryResult& r) {
    nlohmann::json j;
    j["support_hat"] = support_json(r.support_hat);
    j["S_hat"] = matrix_json(r.S_hat);
    j["rank_hat"] = r.rank_hat;
    nlohmann::json d;
    d["singular_values"] = vector_json(r.diagnostics.singular_values);
    d["column_scores"] = vector_json(r.diagnostics.column_scores);
    d["residual_fro"] = r.diagnostics.residual_fro;
    d["unique"] = r.diagnostics.unique ? nlohmann::json(*r.diagnostics.unique) : nlohmann::json(nullptr);
    d["residual_history"] = r.diagnostics.residual_history;
    d["iterations"] = r.diagnostics.iterations;
    d["zak_rows_used"] = r.diagnostics.zak_rows_used;
    d["warnings"] = r.diagnostics.warnings;
    d["failed"] = r.diagnostics.failed;
    d["failure"] = r.diagnostics.failure;
    j["diagnostics"] = std::move(d);
    return j.dump(2) + "\n";
}

std::string witness_to_json(const AmbiguityWitness& w) {
    nlohmann::json j;
    j["gamma"] = support_json(w.gamma);
    j["B_gamma"] = matrix_json(w.B_gamma);
    j["gamma_prime"] = support_json(w.gamma_prime);
    j["B_gamma_prime"] = matrix_json(w.B_gamma_prime);
    return j.dump(2) + "\n";
}

}  // namespace spreadid::io
