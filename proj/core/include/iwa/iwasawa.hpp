#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "iwa/group.hpp"
#include "iwa/lie.hpp"
#include "iwa/report.hpp"

namespace iwa {

// A filtration value, or the marker for "zero at truncation". When `exact`
// is false the value is only a lower bound.
struct FiltrationValue {
    long long value = 0;
    bool infinite = false;
    bool exact = true;

    static FiltrationValue inf() { return {0, true, false}; }
    std::string to_string() const;
};

// a >= b, with the marker above every integer.
bool at_least(const FiltrationValue& a, long long b);
// Both finite and equal; two markers are "indistinguishable", not equal.
bool same_value(const FiltrationValue& a, const FiltrationValue& b);

// Truncated kU for U = <g_1..g_d> x| <x>, with the g_i in H and x a power of
// X. Elements are sums of C_k(b_1..b_d) b_x^k with b_i = g_i - 1, truncated
// to total degree < T.
class IwasawaAlgebra {
public:
    IwasawaAlgebra(std::shared_ptr<const Group> G, std::vector<GroupElement> basis, int truncation);
    static std::shared_ptr<const IwasawaAlgebra> make(std::shared_ptr<const Group> G, std::vector<GroupElement> basis,
                                                      int truncation) {
        return std::make_shared<const IwasawaAlgebra>(std::move(G), std::move(basis), truncation);
    }
    // e_1..e_d and X^{p^c}; total degree is a ring filtration on this one.
    static std::shared_ptr<const IwasawaAlgebra> standard(std::shared_ptr<const Group> G, int truncation);

    const Group& group() const { return *G_; }
    std::shared_ptr<const Group> group_ptr() const { return G_; }
    const std::vector<GroupElement>& basis() const { return basis_; }
    std::uint32_t p() const { return G_->p(); }
    int d() const { return G_->d(); }
    int truncation() const { return T_; }

    // H-monomials ordered by degree; the first count(D) have degree < D.
    std::size_t count(int D) const { return D <= 0 ? 0 : prefix_[std::min(D, T_)]; }
    const std::vector<int>& exponent(std::size_t i) const { return exps_[i]; }
    int degree(std::size_t i) const { return deg_[i]; }
    std::optional<std::size_t> index(const std::vector<int>& e) const;
    // index of exponent(i) + exponent(j), or -1 past the truncation
    int product_index(std::size_t i, std::size_t j) const { return table_[i * exps_.size() + j]; }

    // Image of each H-monomial under conjugation by g (dense over count(T)).
    std::vector<std::vector<std::uint32_t>> conjugation_matrix(const GroupElement& g) const;
    const std::vector<std::vector<std::uint32_t>>& sigma() const { return sigma_; }

    // kH product truncated to degree < D.
    std::vector<std::uint32_t> h_multiply(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b,
                                          int D) const;
    std::vector<std::uint32_t> h_apply(const std::vector<std::vector<std::uint32_t>>& mat,
                                       const std::vector<std::uint32_t>& a, int D) const;

private:
    std::shared_ptr<const Group> G_;
    std::vector<GroupElement> basis_;
    int T_;
    std::vector<std::vector<int>> exps_;
    std::vector<int> deg_;
    std::vector<std::size_t> prefix_;
    std::map<std::vector<int>, std::size_t> lookup_;
    std::vector<int> table_;
    std::vector<std::vector<std::uint32_t>> sigma_;
};

using AlgebraPtr = std::shared_ptr<const IwasawaAlgebra>;

class IwasawaElement {
public:
    IwasawaElement() = default;
    explicit IwasawaElement(AlgebraPtr alg);
    static IwasawaElement zero(AlgebraPtr alg) { return IwasawaElement(std::move(alg)); }
    static IwasawaElement one(AlgebraPtr alg);
    static IwasawaElement constant(AlgebraPtr alg, std::uint32_t c);
    // exps has d + 1 entries, the last one for b_x
    static IwasawaElement monomial(AlgebraPtr alg, const std::vector<int>& exps, std::uint32_t c = 1);
    static IwasawaElement variable(AlgebraPtr alg, int i);

    const IwasawaAlgebra& algebra() const { return *alg_; }
    AlgebraPtr algebra_ptr() const { return alg_; }

    std::uint32_t coeff(const std::vector<int>& exps) const;
    void set(const std::vector<int>& exps, std::uint32_t c);
    // (exponents, coefficient) in graded-lex order
    std::vector<std::pair<std::vector<int>, std::uint32_t>> terms() const;
    bool is_zero() const;
    bool in_kh() const;
    // least total degree in the support; T when zero
    int order() const;

    IwasawaElement operator-() const;
    friend IwasawaElement operator+(const IwasawaElement& a, const IwasawaElement& b);
    friend IwasawaElement operator-(const IwasawaElement& a, const IwasawaElement& b);
    friend IwasawaElement operator*(const IwasawaElement& a, const IwasawaElement& b);
    IwasawaElement scaled(std::uint32_t c) const;
    IwasawaElement pow(std::uint64_t n) const;
    // b_x * this
    IwasawaElement times_bx() const;
    // left multiplication by the kH element stored densely in `c`
    IwasawaElement left_h(const std::vector<std::uint32_t>& c) const;

    bool equals(const IwasawaElement& o) const;
    friend bool operator==(const IwasawaElement& a, const IwasawaElement& b) { return a.equals(b); }

    std::string to_text() const;
    static IwasawaElement parse(AlgebraPtr alg, const std::string& text);

    // slices_[k] holds the kH coefficient of b_x^k over count(T - k) monomials
    const std::vector<std::vector<std::uint32_t>>& slices() const { return slices_; }
    std::vector<std::vector<std::uint32_t>>& slices() { return slices_; }

private:
    AlgebraPtr alg_;
    std::vector<std::vector<std::uint32_t>> slices_;
};

IwasawaElement random_element(AlgebraPtr alg, std::mt19937_64& rng, double density = 0.5);

// prod (1 + b_i)^{alpha_i} (1 + b_x)^{alpha_x} over the decomposition of g.
IwasawaElement from_group_element(AlgebraPtr alg, const GroupElement& g);

// The ring automorphism r -> g r g^-1, for g normalizing the basis subgroup.
IwasawaElement conjugate(const IwasawaElement& r, const GroupElement& g);

// d^(alpha) on b^beta b_x^k: prod binom(beta_i, alpha_i) b_i^{beta_i - alpha_i} (1 + b_i)^{alpha_i} b_x^k.
IwasawaElement divided_power(const std::vector<int>& alpha, const IwasawaElement& r);

// prod_i (phi^{p^m}(g_i) g_i^-1 - 1)^{alpha_i}, phi = conjugation by X.
IwasawaElement mahler_coefficient(AlgebraPtr alg, int m, const std::vector<int>& alpha);

Report verify_mahler_expansion(AlgebraPtr alg, int m, int cap, int trials, std::uint64_t seed);
Report verify_epsilon_bound(AlgebraPtr alg, int m_first, int count);

// Lazard weights e * omega(g_i); spec.basis must be the algebra's basis.
std::vector<long long> lazard_weights(const IwasawaAlgebra& alg, const PValuationSpec& spec);
FiltrationValue lazard_value(const IwasawaElement& r, const std::vector<long long>& weights);
FiltrationValue lazard_value(const IwasawaElement& r, const PValuationSpec& spec);
IwasawaElement graded_form(const IwasawaElement& r, const std::vector<long long>& weights);
// Values at or above this may be artifacts of the truncation.
long long reliable_threshold(const IwasawaAlgebra& alg, const std::vector<long long>& weights, bool kh_only = false);
// w(g - 1) = min p^{v(alpha_i)} w_i, computed from the exponents.
FiltrationValue group_like_value(const IwasawaAlgebra& alg, const std::vector<long long>& weights,
                                 const GroupElement& g);

// The valuation basis of the uniform level subgroup, as an algebra.
AlgebraPtr valuation_algebra(std::shared_ptr<const Group> G, const PValuationSpec& spec, int truncation);

// Restriction of a valuation on G_c to c(G), in the basis u_c(k_1..k_r),
// k_{r+1..d}, X^{p^c}.
PValuationSpec commutator_subgroup_spec(const Group& G, const KBasisData& kb, const PValuationSpec& spec);

struct ThetaResult {
    Report report;
    long long theta = 0;
    PValuationSpec u_spec;
};

ThetaResult theta_check(const Group& G, const KBasisData& kb, const PValuationSpec& spec);

// Finite F_p-combination of group elements, with an optional lower bound on
// the value of an omitted tail.
struct GroupRingElement {
    std::map<GroupElement, std::uint32_t> terms;
    std::optional<long long> tail;

    void add(const GroupElement& g, std::uint32_t c, std::uint32_t p);
};

GroupRingElement group_ring_multiply(const Group& G, const GroupRingElement& a, const GroupRingElement& b);
// prod (u_i - 1)^{n_i} * g, expanded over group elements
GroupRingElement group_ring_monomial(const Group& G, const std::vector<GroupElement>& u, const std::vector<int>& n,
                                     const GroupElement& g);

struct CrossedProduct {
    std::shared_ptr<const Group> G;
    PValuationSpec u_spec;
    std::vector<GroupElement> reps;
    LevelData level;
    long long weight_cap = 0;
    std::vector<std::pair<std::vector<int>, long long>> monomials;  // by weight, up to the cap

    // g = u * reps[i]
    std::pair<GroupElement, std::size_t> split(const GroupElement& g) const;
};

CrossedProduct make_crossed_product(std::shared_ptr<const Group> G, const PValuationSpec& u_spec,
                                    long long weight_cap = 0);
FiltrationValue crossed_product_value(const GroupRingElement& r, const CrossedProduct& cp);

struct FrobeniusLimit {
    IwasawaElement b;
    int terms = 0;
    bool fixed = false;  // b^p == b at truncation
};

// b = lim a^{p^m} = a + sum_m (a^p - a)^{p^m}
FrobeniusLimit frobenius_limit(const IwasawaElement& a, const std::vector<long long>& weights);

}  // namespace iwa
