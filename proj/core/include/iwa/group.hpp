#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "iwa/padic.hpp"
#include "iwa/report.hpp"

namespace iwa {

// Text form:
//   # comment
//   p = 3
//   d = 2
//   eps = 1
//   precision = 8
//   M = 1 0 0 1        (row-major; commas optional)
struct GroupDescriptor {
    std::uint32_t p = 3;
    int d = 1;
    int eps = 1;
    int precision = 8;
    std::vector<long long> m;

    std::string to_text() const;
    static GroupDescriptor parse(const std::string& text);
    static GroupDescriptor load(const std::string& path);
    void save(const std::string& path) const;

    friend bool operator==(const GroupDescriptor&, const GroupDescriptor&) = default;
};

// X acts by M = r * [[1,1],[0,1]] with r = exp(p) truncated, i.e.
// X Y X^-1 = Y^r and X Z X^-1 = (YZ)^r.
GroupDescriptor remark_group_descriptor(std::uint32_t p, int precision = 8);
// M = diag(1 + p, 1 + p^2); eps = 2 when p = 2.
GroupDescriptor diagonal_group_descriptor(std::uint32_t p, int precision = 8);
// exp(p) truncated to p^precision, as an integer.
long long exp_p_truncated(std::uint32_t p, int precision);

struct GroupElement {
    std::vector<PAdicScalar> a;  // H coordinates
    PAdicScalar b;               // exponent of X

    bool in_h() const { return b.is_zero(); }
    std::string to_string() const;
};

// Lexicographic order on residues, for use as a map key.
bool operator<(const GroupElement& x, const GroupElement& y);

// Value num/den; when `exact` is false the true value is at least num/den
// (precision ran out). `infinite` marks the identity at precision.
struct OmegaValue {
    long long num = 0;
    long long den = 1;
    bool exact = true;

    double as_double() const { return static_cast<double>(num) / static_cast<double>(den); }
    std::string to_string() const;
};

struct PValuationSpec {
    std::vector<GroupElement> basis;
    std::vector<long long> numerators;  // value_i = numerators[i] / e
    long long e = 1;
    bool abelian = false;
};

class Group {
public:
    explicit Group(const GroupDescriptor& desc);
    static std::shared_ptr<const Group> make(const GroupDescriptor& desc) {
        return std::make_shared<const Group>(desc);
    }

    const GroupDescriptor& descriptor() const { return desc_; }
    std::uint32_t p() const { return desc_.p; }
    int d() const { return desc_.d; }
    int eps() const { return desc_.eps; }
    int precision() const { return desc_.precision; }
    const PAdicMatrix& M() const { return m_; }

    bool abelian() const { return abelian_; }
    // Least c with M^{p^c} = I mod p^eps.
    int uniform_level() const { return c_; }
    // log(M^{p^c}); the Lie action of x is p^{-c} times this.
    const PAdicMatrix& lambda() const { return lambda_; }
    // The same logarithm computed from the integer entries of M at a higher
    // precision W.
    PAdicMatrix lambda_at(int W) const;
    // Least m with p^m log(M) integral.
    int initial_power() const;

    PAdicScalar scalar(long long v) const { return PAdicScalar(p(), precision(), v); }
    PAdicMatrix action(const PAdicScalar& b) const;

    GroupElement identity() const;
    GroupElement h_element(const std::vector<PAdicScalar>& coords) const;
    GroupElement h_element(const std::vector<long long>& coords) const;
    GroupElement x_power(const PAdicScalar& b) const;
    // e_1..e_d for i < d, X for i = d.
    GroupElement generator(int i) const;

    GroupElement multiply(const GroupElement& g, const GroupElement& h) const;
    GroupElement inverse(const GroupElement& g) const;
    GroupElement power(const GroupElement& g, const PAdicScalar& alpha) const;
    GroupElement power(const GroupElement& g, u64 n) const;
    GroupElement commutator(const GroupElement& g, const GroupElement& h) const;
    GroupElement conjugate(const GroupElement& g, const GroupElement& h) const;
    bool is_identity(const GroupElement& g) const;
    bool equal(const GroupElement& g, const GroupElement& h) const;

    GroupElement u_map(const GroupElement& h, int m) const;

    std::vector<PAdicScalar> decompose(const GroupElement& g, const std::vector<GroupElement>& basis) const;
    GroupElement compose(const std::vector<PAdicScalar>& alpha, const std::vector<GroupElement>& basis) const;

    GroupElement random_element(std::mt19937_64& rng) const;
    GroupElement random_h_element(std::mt19937_64& rng) const;
    PAdicScalar random_scalar(std::mt19937_64& rng) const;

private:
    std::vector<PAdicScalar> decompose_generic(const GroupElement& g, const std::vector<GroupElement>& basis) const;

    GroupDescriptor desc_;
    PAdicMatrix m_;
    bool abelian_ = false;
    int c_ = 0;
    PAdicMatrix lambda_;
    PAdicMatrix lambda_hi_;
    // powers_[k][j] = M^{j p^k}
    std::vector<std::vector<PAdicMatrix>> powers_;
};

OmegaValue omega_value(const Group& G, const GroupElement& g, const PValuationSpec& spec);

// Checks the p-valuation axioms on all basis pairs plus `samples` random pairs.
Report validate_p_valuation(const Group& G, const PValuationSpec& spec, int samples, std::uint64_t seed);

}  // namespace iwa
