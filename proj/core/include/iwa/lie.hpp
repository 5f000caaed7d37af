#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "iwa/group.hpp"
#include "iwa/padic.hpp"
#include "iwa/report.hpp"

namespace iwa {

// (v, s) / p^shift with v in h and s the coefficient of x = log X.
struct LieElement {
    std::vector<PAdicScalar> v;
    PAdicScalar s;
    int shift = 0;
};

LieElement lie_h(const Group& G, const GroupElement& h);
LieElement lie_x(const Group& G, const PAdicScalar& s);
LieElement lie_add(const LieElement& x, const LieElement& y);
// [(v,s),(w,t)] = (s L w - t L v, 0), L = log M.
LieElement lie_bracket(const Group& G, const LieElement& x, const LieElement& y);
bool lie_equal(const LieElement& x, const LieElement& y);

// Compares (g,h) with exp(sum_{n=1}^{terms} ad(log g)^n(log h) / n!).
Report commutator_transport_check(const Group& G, const GroupElement& g, const GroupElement& h, int terms = 24);

struct CenterSplit {
    std::vector<GroupElement> z_basis;
    bool split = false;          // ker L and im L meet trivially over Q_p
    bool lattice_split = false;  // H = H' x Z(G) with H' spanned by the Smith coimage
    int rank = 0;                // rank of L
};

CenterSplit center_and_split_test(const Group& G);

// Smith data of ad(p^level x) = p^{level-c} log(M^{p^c}) on H.
struct LevelData {
    int level = 0;
    PAdicMatrix ad;
    SmithForm smith;
    std::vector<std::vector<PAdicScalar>> h_basis;  // v_i with ad(V e_i) = p^{t_i} v_i
    std::vector<std::vector<PAdicScalar>> k_pre;    // V e_i, i < rank
    std::vector<std::vector<PAdicScalar>> z_basis;  // kernel of ad
    std::vector<int> t;
    int rank = 0;
    bool lattice_split = false;
};

LevelData level_data(const Group& G, int level);

struct ValuationConstruction {
    PValuationSpec spec;
    LevelData level;
    std::vector<long long> a;  // integer Lie values before the 1/e shift
    Report validation;
};

// Builds the valuation at `level` (default: the uniform level) and validates it.
// Never throws on a failed validation.
ValuationConstruction build_valuation(const Group& G, std::optional<int> a_param = std::nullopt,
                                      std::optional<int> level = std::nullopt, int samples = 500,
                                      std::uint64_t seed = 1);

// As build_valuation, but raises NotPowerful (with a witness) on failure.
PValuationSpec construct_valuation(const Group& G, std::optional<int> a_param = std::nullopt,
                                   std::optional<int> level = std::nullopt, int samples = 500,
                                   std::uint64_t seed = 1);

struct ExtendedCommutator {
    std::vector<GroupElement> basis;  // V-basis, Z(G)-basis, X^{p^c}
    std::vector<GroupElement> v_basis;
    std::vector<GroupElement> z_basis;
    std::vector<int> t;
    int c = 0;
    // log_p [G : c(G)]
    int index_exponent = 0;
    Report checks;
};

ExtendedCommutator extended_commutator(const Group& G);

struct KBasisData {
    std::vector<GroupElement> k;  // k_1..k_r non-central, then a Z(G) basis
    std::vector<int> t;
    int r = 0;
    int c = 0;
    // X T_i X^-1 = T_i + sum_{j > i} D[i][j] T_j over F_p
    std::vector<std::vector<std::uint32_t>> D;
};

// With a seed, the flag bases are chosen at random instead of by lowest pivots.
KBasisData k_basis(const Group& G, std::optional<std::uint64_t> seed = std::nullopt);

struct KBasisCheck {
    Report report;
    KBasisData data;
};

KBasisCheck validate_k_basis(const Group& G, const std::vector<GroupElement>& k);

}  // namespace iwa
