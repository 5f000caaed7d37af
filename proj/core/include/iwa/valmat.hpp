#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "iwa/report.hpp"

namespace iwa {

// F_{p^k}; elements are encoded as base-p digit strings of polynomials in a
// root of the modulus, so the prime field is {0..p-1}.
class GaloisField {
public:
    using Elem = std::uint32_t;

    GaloisField(std::uint32_t p, int k);
    static std::shared_ptr<const GaloisField> make(std::uint32_t p, int k) {
        return std::make_shared<const GaloisField>(p, k);
    }

    std::uint32_t p() const { return p_; }
    int k() const { return k_; }
    std::uint32_t q() const { return q_; }
    // monic irreducible modulus, coefficients from degree 0 to k
    const std::vector<std::uint32_t>& modulus() const { return modulus_; }

    Elem add(Elem a, Elem b) const;
    Elem sub(Elem a, Elem b) const;
    Elem neg(Elem a) const { return sub(0, a); }
    Elem mul(Elem a, Elem b) const;
    Elem inv(Elem a) const;
    Elem div(Elem a, Elem b) const { return mul(a, inv(b)); }
    Elem pow(Elem a, std::uint64_t n) const;
    bool in_prime_field(Elem a) const { return a < p_; }
    Elem from_int(long long v) const;
    // base-p digits of a, low degree first
    std::vector<std::uint32_t> digits(Elem a) const;
    Elem random(std::mt19937_64& rng) const { return static_cast<Elem>(rng() % q_); }

private:
    std::uint32_t p_;
    int k_;
    std::uint32_t q_;
    std::vector<std::uint32_t> modulus_;
    std::vector<Elem> exp_;  // exp_[i] = g^i
    std::vector<int> log_;
};

using FieldPtr = std::shared_ptr<const GaloisField>;

struct LaurentWindow {
    int lo = -64;
    int hi = 256;
};

// Value of a series: the least exponent with a nonzero coefficient, or the
// marker when the series is exactly zero.
struct SeriesValue {
    long long value = 0;
    bool infinite = false;
    std::string to_string() const { return infinite ? "inf" : std::to_string(value); }
};

// Sparse Laurent series over F_q truncated to a window. Coefficients are
// known exactly up to exact_to(); a polynomial inside the window is exact
// everywhere. Terms below the window raise WindowOverflow.
class LaurentSeries {
public:
    using Elem = GaloisField::Elem;
    static constexpr int kExact = 1 << 28;

    LaurentSeries() = default;
    explicit LaurentSeries(FieldPtr F, LaurentWindow w = {}) : F_(std::move(F)), w_(w) {}
    static LaurentSeries monomial(FieldPtr F, int exponent, Elem c, LaurentWindow w = {});
    static LaurentSeries constant(FieldPtr F, Elem c, LaurentWindow w = {}) { return monomial(std::move(F), 0, c, w); }

    const GaloisField& field() const { return *F_; }
    FieldPtr field_ptr() const { return F_; }
    LaurentWindow window() const { return w_; }
    std::uint32_t char_p() const { return F_->p(); }
    int exact_to() const { return exact_to_; }
    bool exact() const { return exact_to_ >= kExact; }
    const std::map<int, Elem>& terms() const { return terms_; }
    Elem coeff(int e) const;
    void set(int e, Elem c);

    // Throws WindowOverflow when every known coefficient vanishes but the
    // series is not known to be zero.
    SeriesValue valuation() const;
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;

    LaurentSeries operator-() const;
    friend LaurentSeries operator+(const LaurentSeries& a, const LaurentSeries& b);
    friend LaurentSeries operator-(const LaurentSeries& a, const LaurentSeries& b);
    friend LaurentSeries operator*(const LaurentSeries& a, const LaurentSeries& b);
    // equal on the common known range
    friend bool operator==(const LaurentSeries& a, const LaurentSeries& b);
    LaurentSeries scaled(Elem c) const;
    LaurentSeries shifted(int k) const;  // times z^k
    LaurentSeries pow(std::uint64_t n) const;
    LaurentSeries inverse() const;

    std::string to_text() const;
    static LaurentSeries parse(FieldPtr F, const std::string& text, LaurentWindow w = {});

private:
    void normalize();

    FieldPtr F_;
    LaurentWindow w_;
    std::map<int, Elem> terms_;
    int exact_to_ = kExact;
};

std::optional<std::uint32_t> fp_ratio(const LaurentSeries& num, const LaurentSeries& den);

class ValuedMatrix {
public:
    ValuedMatrix() = default;
    ValuedMatrix(FieldPtr F, int n, LaurentWindow w = {});
    static ValuedMatrix identity(FieldPtr F, int n, LaurentWindow w = {});
    static ValuedMatrix scalar(const LaurentSeries& s, int n);
    static ValuedMatrix diagonal(const std::vector<LaurentSeries>& entries);
    // e_j: 1 in diagonal position j
    static ValuedMatrix unit(FieldPtr F, int n, int j, LaurentWindow w = {});
    static ValuedMatrix from_constants(FieldPtr F, const std::vector<std::vector<GaloisField::Elem>>& rows,
                                       LaurentWindow w = {});

    int n() const { return n_; }
    const GaloisField& field() const { return *F_; }
    FieldPtr field_ptr() const { return F_; }
    LaurentWindow window() const { return w_; }
    const LaurentSeries& at(int i, int j) const { return e_[i * n_ + j]; }
    LaurentSeries& at(int i, int j) { return e_[i * n_ + j]; }

    // v'(A) = min over entries
    SeriesValue value() const;
    bool is_zero() const;
    bool is_diagonal() const;
    bool is_constant() const;

    friend ValuedMatrix operator+(const ValuedMatrix& a, const ValuedMatrix& b);
    friend ValuedMatrix operator-(const ValuedMatrix& a, const ValuedMatrix& b);
    friend ValuedMatrix operator*(const ValuedMatrix& a, const ValuedMatrix& b);
    friend bool operator==(const ValuedMatrix& a, const ValuedMatrix& b);
    ValuedMatrix scaled(const LaurentSeries& s) const;
    ValuedMatrix pow(std::uint64_t n) const;
    LaurentSeries determinant() const;
    ValuedMatrix adjugate() const;
    ValuedMatrix inverse() const;

    // lines "coeff:row,col,exponent"
    std::string to_text() const;
    static ValuedMatrix parse(FieldPtr F, int n, const std::string& text, LaurentWindow w = {});

private:
    FieldPtr F_;
    int n_ = 0;
    LaurentWindow w_;
    std::vector<LaurentSeries> e_;
};

struct GrowthEstimate {
    struct Entry {
        int m = 0;
        SeriesValue value;  // v'(x^{p^m})
        double rate = 0.0;  // value / p^m
    };
    std::vector<Entry> entries;
    bool saturated = false;  // reached the zero marker
    bool monotone = true;    // rates non-decreasing
    std::optional<double> estimate;  // last finite rate; empty when saturated
};

GrowthEstimate growth_rate(const ValuedMatrix& x, int m_max);

struct Diagonalization {
    ValuedMatrix a;
    ValuedMatrix a_inverse;
    int m0 = 0;
    // diagonal entries of a x_i^{p^{m0}} a^-1
    std::vector<std::vector<GaloisField::Elem>> diagonals;
};

// Simultaneous generalized-eigenspace splitting for commuting constant
// matrices whose eigenvalues lie in their field.
Diagonalization p_power_diagonalize(const std::vector<ValuedMatrix>& mats);

struct IndependenceResult {
    bool independent = true;
    std::vector<std::uint32_t> witness;  // F_p coefficients, first nonzero 1
};

IndependenceResult independent_mod_plus(const std::vector<ValuedMatrix>& d_list, long long mu);

// 0 = sum_i d_i^{p^m} a_i + E_m for m in [m_lo, m_hi + r - 1].
struct EliminationInstance {
    FieldPtr F;
    LaurentWindow window;
    int n = 0;
    int j = 0;  // 0-based diagonal position
    long long lambda = 1;
    int m_lo = 0;
    int m_hi = 0;
    std::vector<ValuedMatrix> d;
    std::vector<ValuedMatrix> a;
    std::vector<ValuedMatrix> tail;  // E_{m_lo}, E_{m_lo + 1}, ...

    int r() const { return static_cast<int>(d.size()); }
    std::string to_text() const;
    static EliminationInstance parse(const std::string& text);
};

struct EliminationResult {
    Report report;
    bool precondition = false;
    bool recovered = false;
};

EliminationResult elimination_harness(const EliminationInstance& inst);

struct PlantedOptions {
    std::uint32_t p = 2;
    int r = 2;
    int n = 2;
    long long lambda = 1;
    int gap = 1;            // other diagonal entries have value lambda + gap
    bool dependent = false; // plant an F_p relation among the j-th entries
};

// A_i with e_j a_i = 0 plus higher-order noise elsewhere; the tail is
// -sum d_i^{p^m} a_i, so the expansion vanishes by construction. The field is
// F_{p^k} with k = max(r, 1) so that r independent leading coefficients exist.
EliminationInstance planted_instance(const PlantedOptions& opt, std::mt19937_64& rng);

}  // namespace iwa
