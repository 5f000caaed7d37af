#pragma once

// Small dense linear algebra over F_p.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace iwa::fp {

using Vec = std::vector<std::uint32_t>;
using Mat = std::vector<Vec>;  // row-major

inline std::uint32_t inv(std::uint32_t a, std::uint32_t p) {
    std::uint64_t r = 1, b = a % p;
    for (std::uint32_t e = p - 2; e; e >>= 1) {
        if (e & 1) r = r * b % p;
        b = b * b % p;
    }
    return static_cast<std::uint32_t>(r);
}

inline Mat identity(int n) {
    Mat m(n, Vec(n, 0));
    for (int i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

inline Mat mul(const Mat& a, const Mat& b, std::uint32_t p) {
    const size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
    Mat c(n, Vec(m, 0));
    for (size_t i = 0; i < n; ++i)
        for (size_t l = 0; l < k; ++l) {
            if (!a[i][l]) continue;
            for (size_t j = 0; j < m; ++j) c[i][j] = static_cast<std::uint32_t>((c[i][j] + std::uint64_t(a[i][l]) * b[l][j]) % p);
        }
    return c;
}

inline Vec apply(const Mat& a, const Vec& v, std::uint32_t p) {
    Vec out(a.size(), 0);
    for (size_t i = 0; i < a.size(); ++i) {
        std::uint64_t s = 0;
        for (size_t j = 0; j < v.size(); ++j) s += std::uint64_t(a[i][j]) * v[j] % p;
        out[i] = static_cast<std::uint32_t>(s % p);
    }
    return out;
}

// Reduced row echelon form in place; returns pivot columns.
inline std::vector<int> rref(Mat& a, std::uint32_t p) {
    std::vector<int> pivots;
    const int rows = static_cast<int>(a.size());
    const int cols = rows ? static_cast<int>(a[0].size()) : 0;
    int row = 0;
    for (int col = 0; col < cols && row < rows; ++col) {
        int piv = -1;
        for (int i = row; i < rows; ++i)
            if (a[i][col]) {
                piv = i;
                break;
            }
        if (piv < 0) continue;
        std::swap(a[row], a[piv]);
        std::uint32_t s = inv(a[row][col], p);
        for (auto& x : a[row]) x = static_cast<std::uint32_t>(std::uint64_t(x) * s % p);
        for (int i = 0; i < rows; ++i) {
            if (i == row || !a[i][col]) continue;
            std::uint64_t f = a[i][col];
            for (int j = 0; j < cols; ++j) a[i][j] = static_cast<std::uint32_t>((a[i][j] + (p - f) * a[row][j]) % p);
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

// One kernel vector per free column, in increasing column order.
inline std::vector<Vec> kernel(Mat a, std::uint32_t p) {
    const int cols = a.empty() ? 0 : static_cast<int>(a[0].size());
    std::vector<int> piv = rref(a, p);
    std::vector<bool> is_piv(cols, false);
    for (int c : piv) is_piv[c] = true;
    std::vector<Vec> out;
    for (int f = 0; f < cols; ++f) {
        if (is_piv[f]) continue;
        Vec v(cols, 0);
        v[f] = 1;
        for (size_t r = 0; r < piv.size(); ++r) v[piv[r]] = (p - a[r][f]) % p;
        out.push_back(v);
    }
    return out;
}

inline int rank(const std::vector<Vec>& vs, std::uint32_t p) {
    if (vs.empty()) return 0;
    Mat a = vs;
    return static_cast<int>(rref(a, p).size());
}

inline bool in_span(const std::vector<Vec>& basis, const Vec& v, std::uint32_t p) {
    std::vector<Vec> ext = basis;
    ext.push_back(v);
    return rank(ext, p) == rank(basis, p);
}

inline Mat columns(const Mat& a) {
    if (a.empty()) return {};
    Mat t(a[0].size(), Vec(a.size(), 0));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < a[i].size(); ++j) t[j][i] = a[i][j];
    return t;
}

// Coefficients c with sum c_i basis_i = v, for independent basis vectors.
inline std::optional<Vec> coordinates(const std::vector<Vec>& basis, const Vec& v, std::uint32_t p) {
    const size_t n = v.size(), k = basis.size();
    Mat aug(n, Vec(k + 1, 0));
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < k; ++j) aug[i][j] = basis[j][i];
        aug[i][k] = v[i];
    }
    std::vector<int> piv = rref(aug, p);
    Vec c(k, 0);
    for (size_t r = 0; r < piv.size(); ++r) {
        if (piv[r] == static_cast<int>(k)) return std::nullopt;
        c[piv[r]] = aug[r][k];
    }
    return c;
}

inline Mat inverse(const Mat& a, std::uint32_t p) {
    const size_t n = a.size();
    Mat aug(n, Vec(2 * n, 0));
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) aug[i][j] = a[i][j];
        aug[i][n + i] = 1;
    }
    std::vector<int> piv = rref(aug, p);
    if (piv.size() < n || piv[n - 1] >= static_cast<int>(n)) throw std::domain_error("singular matrix over F_p");
    Mat out(n, Vec(n, 0));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) out[i][j] = aug[i][n + j];
    return out;
}

}  // namespace iwa::fp
