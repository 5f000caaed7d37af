#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace iwa {

using u64 = std::uint64_t;

// A valuation read off a fixed-precision residue. When `saturated` is set the
// residue was zero and `value` is only a lower bound (the precision).
struct PVal {
    int value = 0;
    bool saturated = false;
};

u64 ipow(u64 base, int exp);
// Largest N with p^N < 2^62.
int max_precision(std::uint32_t p);
void check_eps(std::uint32_t p, int eps);
// v_p(n!) = (n - s(n)) / (p - 1).
int vp_factorial(u64 n, std::uint32_t p);
int vp_integer(u64 n, std::uint32_t p);

class PAdicScalar {
public:
    PAdicScalar() = default;
    PAdicScalar(std::uint32_t p, int precision, long long value);
    static PAdicScalar from_residue(std::uint32_t p, int precision, u64 residue);
    static PAdicScalar zero(std::uint32_t p, int precision) { return from_residue(p, precision, 0); }
    static PAdicScalar one(std::uint32_t p, int precision) { return from_residue(p, precision, 1); }

    std::uint32_t prime() const { return p_; }
    int precision() const { return n_; }
    u64 residue() const { return r_; }
    u64 modulus() const { return mod_; }
    // Representative in (-p^N/2, p^N/2].
    long long centered() const;
    std::uint32_t digit(int i) const;

    PVal valuation() const;
    bool is_zero() const { return r_ == 0; }
    bool is_unit() const { return r_ % p_ != 0; }

    PAdicScalar operator-() const;
    friend PAdicScalar operator+(const PAdicScalar& a, const PAdicScalar& b);
    friend PAdicScalar operator-(const PAdicScalar& a, const PAdicScalar& b);
    friend PAdicScalar operator*(const PAdicScalar& a, const PAdicScalar& b);
    PAdicScalar& operator+=(const PAdicScalar& o) { return *this = *this + o; }
    PAdicScalar& operator-=(const PAdicScalar& o) { return *this = *this - o; }
    PAdicScalar& operator*=(const PAdicScalar& o) { return *this = *this * o; }

    PAdicScalar inverse() const;
    // Exact quotient by a nonzero element of lower or equal valuation; the
    // precision drops by the divisor's valuation.
    PAdicScalar divide(const PAdicScalar& d) const;
    PAdicScalar reduced(int precision) const;
    PAdicScalar lifted(int precision) const;
    PAdicScalar mul_p_power(int k) const;
    PAdicScalar div_p_power(int k) const;

    // Equality at the smaller of the two precisions.
    bool equals(const PAdicScalar& o) const;
    std::string to_string() const;

private:
    std::uint32_t p_ = 2;
    int n_ = 0;
    u64 r_ = 0;
    u64 mod_ = 1;
};

inline bool operator==(const PAdicScalar& a, const PAdicScalar& b) { return a.equals(b); }
inline bool operator!=(const PAdicScalar& a, const PAdicScalar& b) { return !a.equals(b); }

PVal val_p(const PAdicScalar& a);

// Lucas: product over base-p digits of binom(beta_i, alpha_i) mod p.
std::uint32_t binom_mod_p(const PAdicScalar& beta, u64 alpha);
std::uint32_t binom_mod_p(u64 n, u64 k, std::uint32_t p);

class PAdicMatrix {
public:
    PAdicMatrix() = default;
    PAdicMatrix(std::uint32_t p, int precision, int rows, int cols);
    static PAdicMatrix identity(std::uint32_t p, int precision, int n);
    static PAdicMatrix from_integers(std::uint32_t p, int precision, int rows, int cols,
                                     const std::vector<long long>& row_major);
    static PAdicMatrix from_columns(const std::vector<std::vector<PAdicScalar>>& cols);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::uint32_t prime() const { return p_; }
    int precision() const { return n_; }
    u64 modulus() const { return mod_; }

    u64 residue(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }
    void set_residue(int i, int j, u64 r) { data_[static_cast<size_t>(i) * cols_ + j] = r % mod_; }
    PAdicScalar at(int i, int j) const;
    void set(int i, int j, const PAdicScalar& v);
    std::vector<PAdicScalar> column(int j) const;
    std::vector<PAdicScalar> apply(const std::vector<PAdicScalar>& v) const;

    friend PAdicMatrix operator+(const PAdicMatrix& a, const PAdicMatrix& b);
    friend PAdicMatrix operator-(const PAdicMatrix& a, const PAdicMatrix& b);
    friend PAdicMatrix operator*(const PAdicMatrix& a, const PAdicMatrix& b);
    PAdicMatrix scaled(const PAdicScalar& s) const;
    PAdicMatrix mul_p_power(int k) const;
    PAdicMatrix div_p_power(int k) const;
    PAdicMatrix transpose() const;
    PAdicMatrix reduced(int precision) const;
    PAdicMatrix lifted(int precision) const;
    PAdicMatrix pow(u64 n) const;

    PVal min_valuation() const;
    bool is_zero() const;
    bool is_identity() const;
    bool congruent_identity(int k) const;
    bool equals(const PAdicMatrix& o) const;

    PAdicScalar determinant() const;
    PAdicMatrix inverse() const;
    std::string to_string() const;

private:
    std::uint32_t p_ = 2;
    int n_ = 0;
    u64 mod_ = 1;
    int rows_ = 0, cols_ = 0;
    std::vector<u64> data_;
};

inline bool operator==(const PAdicMatrix& a, const PAdicMatrix& b) { return a.equals(b); }

struct SmithForm {
    PAdicMatrix U;                // rows x rows
    PAdicMatrix V;                // cols x cols
    std::vector<int> exponents;   // t_1 <= t_2 <= ... for the nonzero divisors
    int rank = 0;
};

// U * A * V = diag(p^t_1, ..., p^t_rank, 0, ...). Pivot: minimal valuation,
// ties by lowest (row, col).
SmithForm smith_normal_form(const PAdicMatrix& A);

// Columns spanning the saturated kernel of A.
std::vector<std::vector<PAdicScalar>> kernel_basis(const PAdicMatrix& A);

// Solves A x = y for square A of full rank over Q_p. Returns nullopt when the
// solution is not integral. The result carries precision N - max t_i.
std::optional<std::vector<PAdicScalar>> solve_linear(const PAdicMatrix& A,
                                                     const std::vector<PAdicScalar>& y);

PAdicMatrix matrix_log(const PAdicMatrix& M, int eps);
PAdicMatrix matrix_exp(const PAdicMatrix& L, int eps);
PAdicMatrix matrix_power_padic(const PAdicMatrix& M, const PAdicScalar& b, int eps);

}  // namespace iwa
