#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "plss/csr.hpp"

namespace plss {

class MatrixMarketError : public std::runtime_error {
public:
    MatrixMarketError(std::size_t line, const std::string& what)
        : std::runtime_error("matrix market, line " + std::to_string(line) + ": " + what),
          line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct MatrixMarketHeader {
    std::string object;    // "matrix"
    std::string format;    // "coordinate" | "array"
    std::string field;     // "real" | "integer" | "pattern"
    std::string symmetry;  // "general" | "symmetric" | "skew-symmetric"
};

namespace detail {

inline std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline MatrixMarketHeader parse_banner(const std::string& line) {
    std::istringstream ss(line);
    std::string tag;
    MatrixMarketHeader h;
    ss >> tag >> h.object >> h.format >> h.field >> h.symmetry;
    if (ss.fail() || lowercase(tag) != "%%matrixmarket")
        throw MatrixMarketError(1, "malformed banner: \"" + line + "\"");
    h.object = lowercase(h.object);
    h.format = lowercase(h.format);
    h.field = lowercase(h.field);
    h.symmetry = lowercase(h.symmetry);
    if (h.object != "matrix")
        throw MatrixMarketError(1, "unsupported object: " + h.object);
    if (h.format != "coordinate" && h.format != "array")
        throw MatrixMarketError(1, "unsupported format: " + h.format);
    if (h.field != "real" && h.field != "integer" && h.field != "pattern")
        throw MatrixMarketError(1, "unsupported field: " + h.field);
    if (h.symmetry != "general" && h.symmetry != "symmetric" && h.symmetry != "skew-symmetric")
        throw MatrixMarketError(1, "unsupported symmetry: " + h.symmetry);
    if (h.format == "array" && h.field == "pattern")
        throw MatrixMarketError(1, "pattern field requires coordinate format");
    return h;
}

/// Next content line, skipping blank and comment lines. Returns false at EOF.
inline bool next_content_line(std::istream& in, std::string& line, std::size_t& lineno) {
    while (std::getline(in, line)) {
        ++lineno;
        const auto pos = line.find_first_not_of(" \t\r\n");
        if (pos == std::string::npos) continue;
        if (line[pos] == '%') continue;
        return true;
    }
    return false;
}

}  // namespace detail

/// Read a Matrix Market stream into CSR. Symmetric and skew-symmetric
/// storage is expanded to full; pattern entries get value 1.0; file indices
/// are 1-based and converted.
inline SparseMatrixCSR read_matrix_market(std::istream& in) {
    std::size_t lineno = 0;
    std::string line;
    if (!std::getline(in, line)) throw MatrixMarketError(1, "empty stream");
    lineno = 1;
    const MatrixMarketHeader h = detail::parse_banner(line);

    if (!detail::next_content_line(in, line, lineno))
        throw MatrixMarketError(lineno + 1, "missing size line");
    const std::size_t size_lineno = lineno;
    std::istringstream size_line(line);

    std::vector<Triplet> triplets;
    std::size_t nrows = 0, ncols = 0;

    if (h.format == "coordinate") {
        long long m = 0, n = 0, nnz = 0;
        size_line >> m >> n >> nnz;
        if (size_line.fail() || m < 0 || n < 0 || nnz < 0)
            throw MatrixMarketError(size_lineno, "malformed size line: \"" + line + "\"");
        nrows = static_cast<std::size_t>(m);
        ncols = static_cast<std::size_t>(n);
        triplets.reserve(static_cast<std::size_t>(nnz) * (h.symmetry == "general" ? 1 : 2));

        for (long long e = 0; e < nnz; ++e) {
            if (!detail::next_content_line(in, line, lineno))
                throw MatrixMarketError(lineno, "entry count mismatch: expected " +
                                                    std::to_string(nnz) + " entries, found " +
                                                    std::to_string(e));
            std::istringstream entry(line);
            long long i = 0, j = 0;
            double v = 1.0;
            entry >> i >> j;
            if (h.field != "pattern") entry >> v;
            if (entry.fail())
                throw MatrixMarketError(lineno, "malformed entry: \"" + line + "\"");
            if (i < 1 || j < 1 || i > m || j > n)
                throw MatrixMarketError(lineno, "index out of range: (" + std::to_string(i) +
                                                    ", " + std::to_string(j) + ")");
            const std::size_t r = static_cast<std::size_t>(i - 1);
            const std::size_t c = static_cast<std::size_t>(j - 1);
            triplets.push_back({r, c, v});
            if (r != c) {
                if (h.symmetry == "symmetric") triplets.push_back({c, r, v});
                if (h.symmetry == "skew-symmetric") triplets.push_back({c, r, -v});
            }
        }
        if (detail::next_content_line(in, line, lineno))
            throw MatrixMarketError(lineno, "entry count mismatch: extra data after " +
                                                std::to_string(nnz) + " entries");
    } else {
        long long m = 0, n = 0;
        size_line >> m >> n;
        if (size_line.fail() || m < 0 || n < 0)
            throw MatrixMarketError(size_lineno, "malformed size line: \"" + line + "\"");
        nrows = static_cast<std::size_t>(m);
        ncols = static_cast<std::size_t>(n);

        // Column-major dense payload: full for general, the lower triangle
        // for symmetric, the strictly lower triangle for skew-symmetric.
        for (long long j = 1; j <= n; ++j) {
            const long long i_first = h.symmetry == "general"        ? 1
                                      : h.symmetry == "symmetric"    ? j
                                                                     : j + 1;
            for (long long i = i_first; i <= m; ++i) {
                if (!detail::next_content_line(in, line, lineno))
                    throw MatrixMarketError(lineno, "entry count mismatch: array data ended early");
                std::istringstream entry(line);
                double v = 0.0;
                entry >> v;
                if (entry.fail())
                    throw MatrixMarketError(lineno, "malformed entry: \"" + line + "\"");
                if (v == 0.0) continue;
                const std::size_t r = static_cast<std::size_t>(i - 1);
                const std::size_t c = static_cast<std::size_t>(j - 1);
                triplets.push_back({r, c, v});
                if (r != c) {
                    if (h.symmetry == "symmetric") triplets.push_back({c, r, v});
                    if (h.symmetry == "skew-symmetric") triplets.push_back({c, r, -v});
                }
            }
        }
        if (detail::next_content_line(in, line, lineno))
            throw MatrixMarketError(lineno, "entry count mismatch: extra data after array payload");
    }

    return SparseMatrixCSR::from_triplets(nrows, ncols, triplets);
}

/// Write CSR in coordinate/real/general form, 1-based indices.
inline void write_matrix_market(const SparseMatrixCSR& a, std::ostream& out) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << a.nrows() << " " << a.ncols() << " " << a.nnz() << "\n";
    out.precision(17);
    for (std::size_t i = 0; i < a.nrows(); ++i) {
        const auto cols = a.row_cols(i);
        const auto vals = a.row_vals(i);
        for (std::size_t k = 0; k < cols.size(); ++k)
            out << (i + 1) << " " << (cols[k] + 1) << " " << vals[k] << "\n";
    }
    if (!out) throw std::runtime_error("matrix market write failed");
}

/// Read a dense vector stored as an array-format n x 1 matrix.
inline std::vector<double> read_matrix_market_vector(std::istream& in) {
    const SparseMatrixCSR a = read_matrix_market(in);
    if (a.ncols() != 1)
        throw std::runtime_error("expected a single-column matrix market vector, got " +
                                 std::to_string(a.ncols()) + " columns");
    std::vector<double> v(a.nrows(), 0.0);
    for (std::size_t i = 0; i < a.nrows(); ++i)
        if (!a.row_cols(i).empty()) v[i] = a.row_vals(i)[0];
    return v;
}

}  // namespace plss
