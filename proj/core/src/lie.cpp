#include "iwa/lie.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "iwa/errors.hpp"
#include "fp_linalg.hpp"

namespace iwa {

// ---------------------------------------------------------------- elements

namespace {

LieElement normalize(LieElement x) {
    while (x.shift > 0) {
        bool divisible = x.s.is_zero() || x.s.valuation().value >= 1;
        for (const auto& c : x.v) divisible = divisible && (c.is_zero() || c.valuation().value >= 1);
        if (!divisible) break;
        for (auto& c : x.v) c = c.div_p_power(1);
        x.s = x.s.div_p_power(1);
        --x.shift;
    }
    return x;
}

LieElement rescale(const LieElement& x, int shift) {
    LieElement out = x;
    for (auto& c : out.v) c = c.mul_p_power(shift - x.shift);
    out.s = out.s.mul_p_power(shift - x.shift);
    out.shift = shift;
    return out;
}

// ad(p^level x) on H, at precision N.
PAdicMatrix level_ad(const Group& G, int level) {
    const int c = G.uniform_level();
    const int N = G.precision();
    if (level >= c) return G.lambda().mul_p_power(level - c);
    const int k = c - level;
    PAdicMatrix hi = G.lambda_at(std::min(max_precision(G.p()), N + k));
    PVal v = hi.min_valuation();
    if (!v.saturated && v.value < k)
        throw DomainError("ad(p^" + std::to_string(level) + " x) is not integral; level is below the initial power");
    return hi.div_p_power(k).reduced(N);
}

std::string vec_string(const std::vector<PAdicScalar>& v) {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i].centered();
    os << ")";
    return os.str();
}

std::vector<PAdicScalar> combine(const Group& G, const std::vector<std::vector<PAdicScalar>>& cols,
                                 const std::vector<PAdicScalar>& coeffs) {
    std::vector<PAdicScalar> out(G.d(), PAdicScalar::zero(G.p(), G.precision()));
    for (size_t j = 0; j < cols.size(); ++j)
        for (int i = 0; i < G.d(); ++i) out[i] += coeffs[j] * cols[j][i];
    return out;
}

}  // namespace

LieElement lie_h(const Group& G, const GroupElement& h) {
    if (!h.in_h()) throw DomainError("lie_h expects an element of H");
    LieElement x;
    x.v = h.a;
    x.s = PAdicScalar::zero(G.p(), G.precision());
    return x;
}

LieElement lie_x(const Group& G, const PAdicScalar& s) {
    LieElement x;
    x.v.assign(G.d(), PAdicScalar::zero(G.p(), G.precision()));
    x.s = s;
    return x;
}

LieElement lie_add(const LieElement& x, const LieElement& y) {
    int shift = std::max(x.shift, y.shift);
    LieElement a = rescale(x, shift), b = rescale(y, shift);
    for (size_t i = 0; i < a.v.size(); ++i) a.v[i] += b.v[i];
    a.s += b.s;
    return normalize(a);
}

LieElement lie_bracket(const Group& G, const LieElement& x, const LieElement& y) {
    const PAdicMatrix& lam = G.lambda();
    std::vector<PAdicScalar> lw = lam.apply(y.v), lv = lam.apply(x.v);
    LieElement out;
    for (int i = 0; i < G.d(); ++i) out.v.push_back(x.s * lw[i] - y.s * lv[i]);
    out.s = PAdicScalar::zero(G.p(), G.precision());
    out.shift = x.shift + y.shift + G.uniform_level();
    return normalize(out);
}

bool lie_equal(const LieElement& x, const LieElement& y) {
    int shift = std::max(x.shift, y.shift);
    LieElement a = rescale(x, shift), b = rescale(y, shift);
    if (!a.s.equals(b.s)) return false;
    for (size_t i = 0; i < a.v.size(); ++i)
        if (!a.v[i].equals(b.v[i])) return false;
    return true;
}

// ---------------------------------------------------------------- transport

Report commutator_transport_check(const Group& G, const GroupElement& g, const GroupElement& h, int terms) {
    if (!h.in_h()) throw DomainError("commutator transport needs h in H");
    Report rep;
    rep.suite = "commutator-transport";
    const std::uint32_t p = G.p();
    const int N = G.precision();
    const int c = G.uniform_level();

    GroupElement direct = G.commutator(g, h);

    // ad(u) on h is b L = b p^{-c} Lambda; pull out as much of p^c as Lambda allows.
    PVal vl = G.lambda().min_valuation();
    const int pulled = vl.saturated ? c : std::min(c, vl.value);
    const int per_term = c - pulled;
    int K = 0;
    for (int n = 1; n <= terms; ++n) K = std::max(K, per_term * n + vp_factorial(static_cast<u64>(n), p));
    const int W = N + K + 2;
    if (W + pulled > max_precision(p)) throw PrecisionExhausted("series denominators exceed the working precision");

    PAdicMatrix L = G.lambda_at(W + pulled).div_p_power(pulled).reduced(W);
    PAdicScalar b = g.b.lifted(W);
    std::vector<PAdicScalar> term;
    for (const auto& x : h.a) term.push_back(x.lifted(W));
    std::vector<PAdicScalar> acc(G.d(), PAdicScalar::zero(p, W));
    int last_value = 0;
    bool last_zero = true;
    for (int n = 1; n <= terms; ++n) {
        term = L.apply(term);
        for (auto& x : term) x = x * b;
        const int shift = per_term * n + vp_factorial(static_cast<u64>(n), p);
        u64 unit = 1;
        for (int k = 1; k <= n; ++k) {
            u64 q = static_cast<u64>(k);
            while (q % p == 0) q /= p;
            unit = (PAdicScalar::from_residue(p, W, unit) * PAdicScalar::from_residue(p, W, q)).residue();
        }
        PAdicScalar unit_inv = PAdicScalar::from_residue(p, W, unit).inverse();
        for (int i = 0; i < G.d(); ++i) acc[i] += (term[i] * unit_inv).mul_p_power(K - shift);
        if (n == terms) {
            last_zero = true;
            last_value = W;
            for (const auto& x : term) {
                PVal v = x.valuation();
                if (!v.saturated) {
                    last_zero = false;
                    last_value = std::min(last_value, v.value);
                }
            }
            last_value -= shift;
        }
    }
    if (!last_zero && last_value < N)
        throw PrecisionExhausted("ad-series has not vanished after " + std::to_string(terms) + " terms");
    std::vector<PAdicScalar> series;
    for (auto& x : acc) {
        PVal v = x.valuation();
        if (!v.saturated && v.value < K) throw PrecisionExhausted("truncated ad-series is not integral");
        series.push_back(x.div_p_power(K).reduced(N));
    }
    bool ok = direct.b.is_zero();
    for (int i = 0; i < G.d(); ++i) ok = ok && series[i].equals(direct.a[i]);
    auto& r = rep.add("commutator-transport", "(g,h) = exp(sum ad(u)^n(v)/n!)", ok,
                      "series=" + vec_string(series) + " direct=" + vec_string(direct.a),
                      ok ? "" : "g=" + g.to_string() + " h=" + h.to_string());
    r.params = {{"terms", std::to_string(terms)}, {"precision", std::to_string(N)}};
    return rep;
}

// ---------------------------------------------------------------- centre

CenterSplit center_and_split_test(const Group& G) {
    if (G.abelian()) throw DomainError("centre test needs a non-abelian group");
    const int N = G.precision();
    const int W = std::min(max_precision(G.p()), 2 * N + G.uniform_level());
    PAdicMatrix lam = G.lambda_at(W);
    SmithForm s1 = smith_normal_form(lam);
    SmithForm s2 = smith_normal_form(lam * lam);
    for (int t : s1.exponents)
        if (t >= W - 1) throw PrecisionExhausted("rank of log M is ambiguous at precision");
    for (int t : s2.exponents)
        if (t >= W - 1) throw PrecisionExhausted("rank of (log M)^2 is ambiguous at precision");

    CenterSplit out;
    out.rank = s1.rank;
    out.split = s1.rank == s2.rank;
    LevelData ld = level_data(G, G.uniform_level());
    for (const auto& z : ld.z_basis) out.z_basis.push_back(G.h_element(z));
    out.lattice_split = ld.lattice_split;
    return out;
}

LevelData level_data(const Group& G, int level) {
    LevelData ld;
    ld.level = level;
    ld.ad = level_ad(G, level);
    ld.smith = smith_normal_form(ld.ad);
    ld.rank = ld.smith.rank;
    ld.t = ld.smith.exponents;
    PAdicMatrix uinv = ld.smith.U.inverse();
    for (int i = 0; i < ld.rank; ++i) {
        ld.h_basis.push_back(uinv.column(i));
        ld.k_pre.push_back(ld.smith.V.column(i));
    }
    for (int j = ld.rank; j < G.d(); ++j) ld.z_basis.push_back(ld.smith.V.column(j));
    if (ld.rank == 0 || ld.rank == G.d()) {
        ld.lattice_split = true;
    } else {
        std::vector<std::vector<PAdicScalar>> cols = ld.h_basis;
        cols.insert(cols.end(), ld.z_basis.begin(), ld.z_basis.end());
        ld.lattice_split = PAdicMatrix::from_columns(cols).determinant().is_unit();
    }
    return ld;
}

// ---------------------------------------------------------------- valuation

ValuationConstruction build_valuation(const Group& G, std::optional<int> a_param, std::optional<int> level,
                                      int samples, std::uint64_t seed) {
    const int eps = G.eps();
    const int a = a_param.value_or(eps + 1);
    if (a <= eps) throw DomainError("the parameter a must exceed eps");
    const int lvl = level.value_or(G.uniform_level());

    ValuationConstruction out;
    out.level = level_data(G, lvl);
    const LevelData& ld = out.level;
    if (!ld.lattice_split) throw NotSplit("the coimage of ad does not complement the centre");

    const int tmax = ld.t.empty() ? 0 : *std::max_element(ld.t.begin(), ld.t.end());
    for (int i = 0; i < ld.rank; ++i) out.a.push_back(a + tmax - ld.t[i]);
    for (size_t j = 0; j < ld.z_basis.size(); ++j) out.a.push_back(eps);
    out.a.push_back(eps);

    const long long amin = *std::min_element(out.a.begin(), out.a.end());
    const long long pm1 = static_cast<long long>(G.p()) - 1;
    long long e = 2;
    while ((amin * e - 1) * pm1 <= e) ++e;

    PValuationSpec& spec = out.spec;
    spec.e = e;
    spec.abelian = true;
    for (const auto& v : ld.h_basis) spec.basis.push_back(G.h_element(v));
    for (const auto& z : ld.z_basis) spec.basis.push_back(G.h_element(z));
    spec.basis.push_back(G.x_power(G.scalar(static_cast<long long>(ipow(G.p(), lvl)))));
    for (long long ai : out.a) spec.numerators.push_back(ai * e - 1);

    out.validation = validate_p_valuation(G, spec, samples, seed);

    // omega(h_i^{p^{t_i}}) all equal and above omega(X^{p^level})
    bool eq_ok = true;
    std::string witness;
    OmegaValue wx = omega_value(G, spec.basis.back(), spec);
    std::optional<OmegaValue> first;
    for (int i = 0; i < ld.rank; ++i) {
        OmegaValue wi = omega_value(G, G.power(spec.basis[i], ipow(G.p(), ld.t[i])), spec);
        if (!first) first = wi;
        if (!wi.exact || wi.num != first->num || wi.num <= wx.num) {
            eq_ok = false;
            if (witness.empty()) witness = "i=" + std::to_string(i) + " value=" + wi.to_string();
        }
    }
    out.validation.add("equalized-values", "omega(h_i^{p^t_i}) equal and > omega(X)", eq_ok,
                       first ? first->to_string() + " vs " + wx.to_string() : "rank 0", witness);
    return out;
}

PValuationSpec construct_valuation(const Group& G, std::optional<int> a_param, std::optional<int> level,
                                   int samples, std::uint64_t seed) {
    ValuationConstruction vc = build_valuation(G, a_param, level, samples, seed);
    if (const CheckRecord* f = vc.validation.first_failure())
        throw NotPowerful("valuation axiom '" + f->id + "' fails: " + f->witness);
    return vc.spec;
}

// ---------------------------------------------------------------- c(G)

ExtendedCommutator extended_commutator(const Group& G) {
    if (G.abelian()) throw DomainError("extended commutator needs a non-abelian group");
    ExtendedCommutator ec;
    ec.c = G.uniform_level();
    ec.checks.suite = "extended-commutator";
    LevelData ld = level_data(G, ec.c);
    ec.t = ld.t;
    for (int i = 0; i < ld.rank; ++i) {
        std::vector<PAdicScalar> v = ld.h_basis[i];
        for (auto& x : v) x = x.mul_p_power(ld.t[i]);
        ec.v_basis.push_back(G.h_element(v));
    }
    for (const auto& z : ld.z_basis) ec.z_basis.push_back(G.h_element(z));
    ec.basis = ec.v_basis;
    ec.basis.insert(ec.basis.end(), ec.z_basis.begin(), ec.z_basis.end());
    ec.basis.push_back(G.x_power(G.scalar(static_cast<long long>(ipow(G.p(), ec.c)))));

    std::vector<std::vector<PAdicScalar>> cols;
    for (int i = 0; i < G.d(); ++i) cols.push_back(ec.basis[i].a);
    PVal vdet = PAdicMatrix::from_columns(cols).determinant().valuation();
    if (vdet.saturated) throw IndexInfinite("V x Z(G) has infinite index in H at precision");
    ec.index_exponent = vdet.value + ec.c;

    bool normal = true, v_normal = true;
    std::string wn, wv;
    for (int s = 0; s <= G.d(); ++s) {
        GroupElement gen = G.generator(s);
        for (size_t u = 0; u < ec.basis.size(); ++u) {
            GroupElement conj = G.conjugate(gen, ec.basis[u]);
            std::vector<PAdicScalar> alpha;
            try {
                alpha = G.decompose(conj, ec.basis);
            } catch (const NotInSubgroup&) {
                normal = false;
                if (wn.empty()) wn = "generator " + std::to_string(s) + " moves basis element " + std::to_string(u) + " out";
                continue;
            }
            if (u < ec.v_basis.size()) {
                bool inside = alpha.back().is_zero();
                for (size_t j = ec.v_basis.size(); j < static_cast<size_t>(G.d()); ++j) inside = inside && alpha[j].is_zero();
                if (!inside) {
                    v_normal = false;
                    if (wv.empty()) wv = "conjugate of V-basis element " + std::to_string(u) + " by generator " + std::to_string(s);
                }
            }
        }
    }
    ec.checks.add("normal", "c(G) normal in G", normal, std::to_string(ec.basis.size()) + " basis elements", wn);
    ec.checks.add("v-normal", "X V X^-1 = V", v_normal, std::to_string(ec.v_basis.size()) + " V-basis elements", wv);
    ec.checks.add("finite-index", "[G : c(G)] finite", true, "log_p index = " + std::to_string(ec.index_exponent));
    return ec;
}

// ---------------------------------------------------------------- k-basis

namespace {

struct VData {
    LevelData ld;
    std::vector<std::vector<PAdicScalar>> full;  // h_basis then z_basis
    std::vector<std::vector<PAdicScalar>> w;     // p^{t_i} h_i
    fp::Mat action;                              // X on V/V^p in the w basis, column convention
};

VData v_data(const Group& G) {
    if (G.abelian()) throw DomainError("k-basis needs a non-abelian group");
    VData vd;
    vd.ld = level_data(G, G.uniform_level());
    const LevelData& ld = vd.ld;
    if (!ld.lattice_split) throw NotSplit("H does not split as H' x Z(G)");
    vd.full = ld.h_basis;
    vd.full.insert(vd.full.end(), ld.z_basis.begin(), ld.z_basis.end());
    for (int i = 0; i < ld.rank; ++i) {
        std::vector<PAdicScalar> v = ld.h_basis[i];
        for (auto& x : v) x = x.mul_p_power(ld.t[i]);
        vd.w.push_back(v);
    }
    const int r = ld.rank;
    const std::uint32_t p = G.p();
    vd.action.assign(r, fp::Vec(r, 0));
    if (r == 0) return vd;
    std::vector<std::vector<PAdicScalar>> cols = vd.w;
    cols.insert(cols.end(), ld.z_basis.begin(), ld.z_basis.end());
    PAdicMatrix Wm = PAdicMatrix::from_columns(cols);
    for (int i = 0; i < r; ++i) {
        auto coords = solve_linear(Wm, G.M().apply(vd.w[i]));
        if (!coords) throw DomainError("V is not stable under X");
        for (int j = 0; j < r; ++j) vd.action[j][i] = static_cast<std::uint32_t>((*coords)[j].residue() % p);
    }
    return vd;
}

}  // namespace

KBasisData k_basis(const Group& G, std::optional<std::uint64_t> seed) {
    VData vd = v_data(G);
    const LevelData& ld = vd.ld;
    const int r = ld.rank;
    const std::uint32_t p = G.p();
    const int N = G.precision();

    // project V e_i onto H' along Z(G)
    PAdicMatrix full = PAdicMatrix::from_columns(vd.full);
    std::vector<std::vector<PAdicScalar>> kp;
    for (int i = 0; i < r; ++i) {
        auto coords = solve_linear(full, ld.k_pre[i]);
        if (!coords) throw NotABasis("Smith coimage is not integral in the split basis");
        std::vector<PAdicScalar> head(coords->begin(), coords->begin() + r);
        std::vector<std::vector<PAdicScalar>> hs(ld.h_basis.begin(), ld.h_basis.begin() + r);
        kp.push_back(combine(G, hs, head));
    }

    // flag of ker (A - I)^k, then reversed
    fp::Mat nil = vd.action;
    for (int i = 0; i < r; ++i) nil[i][i] = (nil[i][i] + p - 1) % p;
    std::vector<fp::Vec> flag;
    fp::Mat power = fp::identity(r);
    std::mt19937_64 rng(seed.value_or(0));
    for (int k = 1; k <= r && static_cast<int>(flag.size()) < r; ++k) {
        power = fp::mul(power, nil, p);
        std::vector<fp::Vec> ker = fp::kernel(power, p);
        if (!seed) {
            for (const auto& v : ker)
                if (!fp::in_span(flag, v, p)) flag.push_back(v);
        } else {
            while (fp::rank(flag, p) < static_cast<int>(ker.size())) {
                fp::Vec v(r, 0);
                for (const auto& kv : ker) {
                    std::uint32_t c = static_cast<std::uint32_t>(rng() % p);
                    for (int j = 0; j < r; ++j) v[j] = (v[j] + c * kv[j]) % p;
                }
                if (!fp::in_span(flag, v, p)) flag.push_back(v);
            }
        }
    }
    if (static_cast<int>(flag.size()) != r) throw DomainError("action of X on V/V^p is not unipotent");
    std::reverse(flag.begin(), flag.end());

    KBasisData out;
    out.r = r;
    out.c = G.uniform_level();
    out.t = ld.t;
    out.D.assign(r, std::vector<std::uint32_t>(r, 0));
    for (int i = 0; i < r; ++i) {
        std::vector<PAdicScalar> coeffs;
        for (int j = 0; j < r; ++j) coeffs.push_back(PAdicScalar(p, N, flag[i][j]));
        out.k.push_back(G.h_element(combine(G, kp, coeffs)));
        fp::Vec image = fp::apply(nil, flag[i], p);
        auto d = fp::coordinates(flag, image, p);
        if (!d) throw DomainError("flag basis does not span V/V^p");
        for (int j = 0; j < r; ++j) out.D[i][j] = (*d)[j];
    }
    for (const auto& z : ld.z_basis) out.k.push_back(G.h_element(z));
    return out;
}

KBasisCheck validate_k_basis(const Group& G, const std::vector<GroupElement>& k) {
    KBasisCheck out;
    Report& rep = out.report;
    rep.suite = "k-basis";
    VData vd = v_data(G);
    const LevelData& ld = vd.ld;
    const int r = ld.rank;
    const int d = G.d();
    const std::uint32_t p = G.p();
    out.data.k = k;
    out.data.r = r;
    out.data.c = G.uniform_level();
    out.data.t = ld.t;
    out.data.D.assign(r, std::vector<std::uint32_t>(r, 0));

    bool shape = static_cast<int>(k.size()) == d;
    for (const auto& x : k) shape = shape && x.in_h();
    rep.add("count", "d elements of H", shape, std::to_string(k.size()) + " elements");
    if (!shape) return out;

    std::vector<std::vector<PAdicScalar>> kc;
    for (const auto& x : k) kc.push_back(x.a);
    bool hb = PAdicMatrix::from_columns(kc).determinant().is_unit();
    rep.add("h-basis", "basis of H", hb, "", hb ? "" : "determinant is not a unit");

    bool central = true;
    std::string wc;
    for (int i = r; i < d; ++i) {
        if (!G.is_identity(G.u_map(k[i], out.data.c))) {
            central = false;
            if (wc.empty()) wc = "k_" + std::to_string(i + 1) + " is not central";
        }
    }
    rep.add("central", "k_{r+1..d} span Z(G)", central, std::to_string(d - r) + " central elements", wc);

    // u_c(k_i) = sum_j C[j][i] w_j
    PAdicMatrix full = PAdicMatrix::from_columns(vd.full);
    fp::Mat C(r, fp::Vec(r, 0));
    bool in_v = true;
    std::string wv;
    for (int i = 0; i < r && in_v; ++i) {
        GroupElement u = G.u_map(k[i], out.data.c);
        auto coords = solve_linear(full, u.a);
        bool ok = coords.has_value();
        for (int j = 0; ok && j < d; ++j) {
            const PAdicScalar& x = (*coords)[j];
            if (j >= r) {
                ok = x.is_zero();
            } else {
                PVal v = x.valuation();
                ok = v.saturated || v.value >= ld.t[j];
                if (ok) C[j][i] = static_cast<std::uint32_t>(x.div_p_power(ld.t[j]).residue() % p);
            }
        }
        if (!ok) {
            in_v = false;
            wv = "u_c(k_" + std::to_string(i + 1) + ") = " + u.to_string() + " is not in V";
        }
    }
    bool v_basis = in_v && fp::rank(fp::columns(C), p) == r;
    rep.add("v-basis", "u_c(k_1..k_r) basis of V", v_basis, "r=" + std::to_string(r),
            in_v ? (v_basis ? "" : "images are dependent mod V^p") : wv);
    if (!v_basis || r == 0) {
        rep.add("unipotent", "X u_c(k_i) X^-1 unitriangular", v_basis, "", v_basis ? "" : "no V-basis");
        return out;
    }

    fp::Mat Cinv = fp::inverse(C, p);
    fp::Mat alpha = fp::mul(fp::mul(Cinv, vd.action, p), C, p);
    bool uni = true;
    std::string wu;
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j <= i; ++j) {
            std::uint32_t want = (i == j) ? 1 : 0;
            if (alpha[j][i] != want) {
                uni = false;
                if (wu.empty())
                    wu = "alpha_{" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "} = " +
                         std::to_string(alpha[j][i]) + " mod p";
            }
        }
        for (int j = i + 1; j < r; ++j) out.data.D[i][j] = alpha[j][i];
    }
    rep.add("unipotent", "X u_c(k_i) X^-1 unitriangular", uni, "", wu);
    return out;
}

}  // namespace iwa
