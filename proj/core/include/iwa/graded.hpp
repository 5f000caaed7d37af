#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "iwa/iwasawa.hpp"
#include "iwa/lie.hpp"
#include "iwa/report.hpp"

namespace iwa {

// Graded-lex: lower total degree first, then T_1 > T_2 > ... within a degree.
struct GradedLexLess {
    bool operator()(const std::vector<int>& a, const std::vector<int>& b) const;
};

// Polynomial in F_p[T_1..T_n]; zero coefficients are never stored.
class GradedPoly {
public:
    using Terms = std::map<std::vector<int>, std::uint32_t, GradedLexLess>;

    GradedPoly() = default;
    GradedPoly(std::uint32_t p, int nvars) : p_(p), n_(nvars) {}
    static GradedPoly constant(std::uint32_t p, int nvars, std::uint32_t c);
    // T_{i+1}, i.e. i is 0-based
    static GradedPoly variable(std::uint32_t p, int nvars, int i);
    static GradedPoly monomial(std::uint32_t p, int nvars, const std::vector<int>& exps, std::uint32_t c = 1);

    std::uint32_t char_p() const { return p_; }
    int nvars() const { return n_; }
    const Terms& terms() const { return terms_; }
    std::uint32_t coeff(const std::vector<int>& exps) const;
    void add_term(const std::vector<int>& exps, std::uint32_t c);

    bool is_zero() const { return terms_.empty(); }
    // -1 for zero
    int degree() const;
    // coefficient of the graded-lex largest term
    std::uint32_t leading_coefficient() const;
    bool is_homogeneous(const std::vector<long long>& weights) const;
    // weighted degree of every term, if they agree
    std::optional<long long> weighted_degree(const std::vector<long long>& weights) const;

    GradedPoly operator-() const;
    friend GradedPoly operator+(const GradedPoly& a, const GradedPoly& b);
    friend GradedPoly operator-(const GradedPoly& a, const GradedPoly& b);
    friend GradedPoly operator*(const GradedPoly& a, const GradedPoly& b);
    friend bool operator==(const GradedPoly& a, const GradedPoly& b) { return a.terms_ == b.terms_; }
    GradedPoly scaled(std::uint32_t c) const;
    GradedPoly frobenius() const;
    GradedPoly pow(std::uint64_t n) const;
    // ring homomorphism T_i -> images[i]
    GradedPoly substitute(const std::vector<GradedPoly>& images) const;

    std::string to_text() const;
    static GradedPoly parse(std::uint32_t p, int nvars, const std::string& text);

private:
    std::uint32_t p_ = 2;
    int n_ = 0;
    Terms terms_;
};

// num = beta * den with beta in F_p^x, if such beta exists.
std::optional<std::uint32_t> fp_ratio(const GradedPoly& num, const GradedPoly& den);

// T_i -> T_i + D_i for i <= r with D_i in Span{T_{i+1}..T_r}; the identity on
// the remaining variables.
class XAction {
public:
    XAction(std::uint32_t p, int nvars, std::vector<GradedPoly> increments);
    static XAction from_k_basis(const KBasisData& kb, int d);

    std::uint32_t p() const { return p_; }
    int nvars() const { return n_; }
    int r() const { return static_cast<int>(inc_.size()); }
    // D_{i+1}
    const GradedPoly& increment(int i) const { return inc_[i]; }
    const std::vector<GradedPoly>& images() const { return images_; }

    GradedPoly apply(const GradedPoly& f) const;
    bool is_invariant(const GradedPoly& f) const { return apply(f) == f; }
    // Least k with the p^k-fold composite equal to the identity.
    int order_exponent() const;
    // Largest 1-based i with D_i != 0, or 0.
    int top_index() const;

private:
    std::uint32_t p_;
    int n_;
    std::vector<GradedPoly> inc_;
    std::vector<GradedPoly> images_;
};

// L(x, y) = x^p - x y^{p-1}; L^{(n)}(x, y_1..y_n) = L(...L(L(x, y_1), y_2)..., y_n).
GradedPoly l_eval(const GradedPoly& x, const std::vector<GradedPoly>& ys);
// a_0..a_{n-1} with L^{(n)}(x, ys) = sum a_i x^{p^i} + x^{p^n}.
std::vector<GradedPoly> l_coeffs(const std::vector<GradedPoly>& ys, std::uint32_t p, int nvars);
GradedPoly l_apply_coeffs(const std::vector<GradedPoly>& a, const GradedPoly& x);

struct BChain {
    int s = 0;
    std::vector<GradedPoly> B;  // B[i-1] = B_i
    Report report;
};

// B_i = L^{(s-i)}(D_i, B_s, ..., B_{i+1}) with invariance checks of every B_i and
// of L^{(s-i+1)}(T_i, B_s, ..., B_i). The ideal P is taken to be zero.
BChain b_chain(const XAction& act, int s);

template <class R>
struct MooreResult {
    R determinant;
    R product;
    std::uint32_t beta = 0;
    bool pass = false;
};

namespace detail {
inline int permutation_sign(const std::vector<int>& perm) {
    int sign = 1;
    for (std::size_t i = 0; i < perm.size(); ++i)
        for (std::size_t j = i + 1; j < perm.size(); ++j)
            if (perm[i] > perm[j]) sign = -sign;
    return sign;
}
}  // namespace detail

// det[f_i^{p^j}] against beta * prod over P^{t-1}(F_p) of (a_1 f_1 + ... + a_t f_t),
// representatives normalized so the first nonzero coordinate is 1.
template <class R>
MooreResult<R> moore_identity(const std::vector<R>& forms) {
    MooreResult<R> out;
    const int t = static_cast<int>(forms.size());
    if (t == 0) return out;
    const std::uint32_t p = forms[0].char_p();
    const R zero = forms[0].scaled(0);

    std::vector<std::vector<R>> S(t);
    for (int i = 0; i < t; ++i) {
        R f = forms[i];
        for (int j = 0; j < t; ++j) {
            S[j].push_back(f);
            f = f.pow(p);
        }
    }
    std::vector<int> perm(t);
    for (int i = 0; i < t; ++i) perm[i] = i;
    R det = zero;
    do {
        R term = S[0][perm[0]];
        for (int j = 1; j < t; ++j) term = term * S[j][perm[j]];
        det = detail::permutation_sign(perm) > 0 ? det + term : det - term;
    } while (std::next_permutation(perm.begin(), perm.end()));

    R prod = zero.scaled(0);
    bool first = true;
    for (int lead = 0; lead < t; ++lead) {
        std::vector<std::uint32_t> alpha(t, 0);
        alpha[lead] = 1;
        const int free = t - lead - 1;
        std::uint64_t total = 1;
        for (int k = 0; k < free; ++k) total *= p;
        for (std::uint64_t code = 0; code < total; ++code) {
            std::uint64_t c = code;
            for (int k = t - 1; k > lead; --k) {
                alpha[k] = static_cast<std::uint32_t>(c % p);
                c /= p;
            }
            R form = zero;
            for (int i = 0; i < t; ++i)
                if (alpha[i]) form = form + forms[i].scaled(alpha[i]);
            prod = first ? form : prod * form;
            first = false;
        }
    }
    out.determinant = det;
    out.product = prod;
    if (auto beta = fp_ratio(det, prod)) {
        out.beta = *beta;
        out.pass = true;
    }
    return out;
}

// The symbol of a kU element as a polynomial in T_1..T_{d+1}.
GradedPoly to_graded(const IwasawaElement& r);

// The chain y_s, y_i = L^{(s-i)}(u_c(f_i) - 1, y_s, ..., y_{i+1}) in kc(G), with
// w(y_i) >= p^{s-i} theta and gr(y_i) = B_i on equality; the same bound for
// L^{(s-i)}(u_c(h) - 1, ...) at every i.
Report graded_reduction_shadow(std::shared_ptr<const Group> G, const KBasisData& kb, const PValuationSpec& spec,
                               const GroupElement& h, int truncation = 12);

}  // namespace iwa
