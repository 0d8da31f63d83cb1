#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace ddfem {

struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Unordered coordinate-format accumulation buffer. Duplicate (row,col)
/// entries are summed on compression.
struct TripletBuffer {
    struct Entry {
        int row;
        int col;
        double value;
    };
    std::vector<Entry> entries;

    void add(int row, int col, double value) { entries.push_back({row, col, value}); }
    void append(const TripletBuffer& other) {
        entries.insert(entries.end(), other.entries.begin(), other.entries.end());
    }
};

/// Square CSR matrix. Column indices are strictly increasing within each row.
struct CompressedSparseMatrix {
    int n = 0;
    std::vector<int> row_ptr;
    std::vector<int> col_idx;
    std::vector<double> values;

    std::vector<double> multiply(const std::vector<double>& x) const {
        if (static_cast<int>(x.size()) != n) throw std::invalid_argument("multiply: dimension mismatch");
        std::vector<double> y(static_cast<std::size_t>(n), 0.0);
        for (int r = 0; r < n; ++r) {
            double s = 0.0;
            for (int k = row_ptr[static_cast<std::size_t>(r)]; k < row_ptr[static_cast<std::size_t>(r) + 1]; ++k)
                s += values[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(col_idx[static_cast<std::size_t>(k)])];
            y[static_cast<std::size_t>(r)] = s;
        }
        return y;
    }
};

/// Sort-and-sum compression. The result is independent of insertion order.
inline CompressedSparseMatrix compress(const TripletBuffer& buf, int n) {
    if (n < 0) throw std::invalid_argument("compress: negative dimension");
    for (const auto& e : buf.entries)
        if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= n)
            throw std::invalid_argument("compress: entry index out of range");
    std::vector<TripletBuffer::Entry> sorted = buf.entries;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    CompressedSparseMatrix m;
    m.n = n;
    m.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        double s = 0.0;
        while (j < sorted.size() && sorted[j].row == sorted[i].row && sorted[j].col == sorted[i].col) s += sorted[j++].value;
        m.col_idx.push_back(sorted[i].col);
        m.values.push_back(s);
        ++m.row_ptr[static_cast<std::size_t>(sorted[i].row) + 1];
        i = j;
    }
    for (int r = 0; r < n; ++r) m.row_ptr[static_cast<std::size_t>(r) + 1] += m.row_ptr[static_cast<std::size_t>(r)];
    return m;
}

inline double l2_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double max_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

/// Direct sparse LU solve (Eigen backend). Throws SolverError on a singular
/// factorization or when the verified relative residual exceeds 1e-10.
inline std::vector<double> solve(const CompressedSparseMatrix& a, const std::vector<double>& b,
                                 double* residual_out = nullptr) {
    if (static_cast<int>(b.size()) != a.n) throw std::invalid_argument("solve: dimension mismatch");
    if (a.n == 0) return {};
    Eigen::SparseMatrix<double> m(a.n, a.n);
    {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(a.values.size());
        for (int r = 0; r < a.n; ++r)
            for (int k = a.row_ptr[static_cast<std::size_t>(r)]; k < a.row_ptr[static_cast<std::size_t>(r) + 1]; ++k)
                trip.emplace_back(r, a.col_idx[static_cast<std::size_t>(k)], a.values[static_cast<std::size_t>(k)]);
        m.setFromTriplets(trip.begin(), trip.end());
    }
    m.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(m);
    lu.factorize(m);
    if (lu.info() != Eigen::Success)
        throw SolverError("solve: sparse LU factorization failed: " + lu.lastErrorMessage());
    Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), a.n);
    Eigen::VectorXd sol = lu.solve(rhs);
    if (lu.info() != Eigen::Success) throw SolverError("solve: back substitution failed");
    std::vector<double> x(sol.data(), sol.data() + a.n);

    std::vector<double> ax = a.multiply(x);
    for (int i = 0; i < a.n; ++i) ax[static_cast<std::size_t>(i)] -= b[static_cast<std::size_t>(i)];
    const double bn = l2_norm(b);
    const double rel = bn > 0.0 ? l2_norm(ax) / bn : l2_norm(ax);
    if (residual_out) *residual_out = rel;
    if (!(rel <= 1e-10))
        throw SolverError("solve: relative residual " + std::to_string(rel) + " exceeds 1e-10 (near-singular system)");
    return x;
}

}  // namespace ddfem
