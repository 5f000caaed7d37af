#include "iwa/graded.hpp"

#include <numeric>
#include <sstream>

#include "fp_linalg.hpp"
#include "iwa/errors.hpp"

namespace iwa {

namespace {

int total_degree(const std::vector<int>& e) { return std::accumulate(e.begin(), e.end(), 0); }

}  // namespace

bool GradedLexLess::operator()(const std::vector<int>& a, const std::vector<int>& b) const {
    const int da = total_degree(a), db = total_degree(b);
    if (da != db) return da < db;
    return a < b;
}

GradedPoly GradedPoly::constant(std::uint32_t p, int nvars, std::uint32_t c) {
    GradedPoly f(p, nvars);
    f.add_term(std::vector<int>(nvars, 0), c);
    return f;
}

GradedPoly GradedPoly::variable(std::uint32_t p, int nvars, int i) {
    std::vector<int> e(nvars, 0);
    e.at(i) = 1;
    return monomial(p, nvars, e, 1);
}

GradedPoly GradedPoly::monomial(std::uint32_t p, int nvars, const std::vector<int>& exps, std::uint32_t c) {
    GradedPoly f(p, nvars);
    f.add_term(exps, c);
    return f;
}

std::uint32_t GradedPoly::coeff(const std::vector<int>& exps) const {
    auto it = terms_.find(exps);
    return it == terms_.end() ? 0 : it->second;
}

void GradedPoly::add_term(const std::vector<int>& exps, std::uint32_t c) {
    if (static_cast<int>(exps.size()) != n_) throw DomainError("monomial has the wrong number of variables");
    c %= p_;
    if (!c) return;
    auto [it, inserted] = terms_.try_emplace(exps, c);
    if (inserted) return;
    it->second = (it->second + c) % p_;
    if (!it->second) terms_.erase(it);
}

int GradedPoly::degree() const { return terms_.empty() ? -1 : total_degree(terms_.rbegin()->first); }

std::uint32_t GradedPoly::leading_coefficient() const { return terms_.empty() ? 0 : terms_.rbegin()->second; }

std::optional<long long> GradedPoly::weighted_degree(const std::vector<long long>& weights) const {
    std::optional<long long> out;
    for (const auto& [e, c] : terms_) {
        long long w = 0;
        for (int i = 0; i < n_; ++i) w += e[i] * weights[i];
        if (out && *out != w) return std::nullopt;
        out = w;
    }
    return out;
}

bool GradedPoly::is_homogeneous(const std::vector<long long>& weights) const {
    return is_zero() || weighted_degree(weights).has_value();
}

GradedPoly GradedPoly::operator-() const { return scaled(p_ - 1); }

GradedPoly operator+(const GradedPoly& a, const GradedPoly& b) {
    GradedPoly out = a;
    for (const auto& [e, c] : b.terms_) out.add_term(e, c);
    return out;
}

GradedPoly operator-(const GradedPoly& a, const GradedPoly& b) { return a + (-b); }

GradedPoly operator*(const GradedPoly& a, const GradedPoly& b) {
    GradedPoly out(a.p_, a.n_);
    std::vector<int> e(a.n_);
    for (const auto& [ea, ca] : a.terms_)
        for (const auto& [eb, cb] : b.terms_) {
            for (int i = 0; i < a.n_; ++i) e[i] = ea[i] + eb[i];
            out.add_term(e, static_cast<std::uint32_t>(std::uint64_t(ca) * cb % a.p_));
        }
    return out;
}

GradedPoly GradedPoly::scaled(std::uint32_t c) const {
    GradedPoly out(p_, n_);
    c %= p_;
    if (!c) return out;
    for (const auto& [e, v] : terms_) out.terms_.emplace(e, static_cast<std::uint32_t>(std::uint64_t(v) * c % p_));
    return out;
}

GradedPoly GradedPoly::frobenius() const {
    // coefficients lie in F_p, so c^p = c
    GradedPoly out(p_, n_);
    for (const auto& [e, c] : terms_) {
        std::vector<int> f = e;
        for (int& x : f) x *= static_cast<int>(p_);
        out.terms_.emplace(std::move(f), c);
    }
    return out;
}

GradedPoly GradedPoly::pow(std::uint64_t n) const {
    // base-p digits: f^n = prod_k (f^{d_k})^{p^k}
    GradedPoly result = constant(p_, n_, 1);
    GradedPoly base = *this;
    while (n) {
        const std::uint64_t digit = n % p_;
        if (digit) {
            GradedPoly t = constant(p_, n_, 1);
            for (std::uint64_t i = 0; i < digit; ++i) t = t * base;
            result = result * t;
        }
        n /= p_;
        if (n) base = base.frobenius();
    }
    return result;
}

GradedPoly GradedPoly::substitute(const std::vector<GradedPoly>& images) const {
    if (static_cast<int>(images.size()) != n_) throw DomainError("substitution needs one image per variable");
    const int m = images.empty() ? n_ : images[0].n_;
    GradedPoly out(p_, m);
    std::vector<std::map<int, GradedPoly>> cache(n_);
    auto power = [&](int i, int k) -> const GradedPoly& {
        auto it = cache[i].find(k);
        if (it != cache[i].end()) return it->second;
        return cache[i].emplace(k, images[i].pow(static_cast<std::uint64_t>(k))).first->second;
    };
    for (const auto& [e, c] : terms_) {
        GradedPoly t = constant(p_, m, c);
        for (int i = 0; i < n_; ++i)
            if (e[i]) t = t * power(i, e[i]);
        out = out + t;
    }
    return out;
}

std::string GradedPoly::to_text() const {
    std::ostringstream os;
    for (const auto& [e, c] : terms_) {
        os << c << ":";
        for (int i = 0; i < n_; ++i) os << (i ? "," : "") << e[i];
        os << "\n";
    }
    return os.str();
}

GradedPoly GradedPoly::parse(std::uint32_t p, int nvars, const std::string& text) {
    GradedPoly f(p, nvars);
    std::istringstream in(text);
    std::string line;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto colon = line.find(':');
        if (colon == std::string::npos) throw ParseError("line " + std::to_string(ln) + ": expected 'coeff:exponents'");
        long long c = 0;
        std::vector<int> e;
        try {
            c = std::stoll(line.substr(0, colon));
            std::string rest = line.substr(colon + 1);
            std::replace(rest.begin(), rest.end(), ',', ' ');
            std::istringstream toks(rest);
            int v;
            while (toks >> v) e.push_back(v);
            if (!toks.eof()) throw std::invalid_argument("exponent");
        } catch (const std::exception&) {
            throw ParseError("line " + std::to_string(ln) + ": malformed term");
        }
        if (static_cast<int>(e.size()) != nvars)
            throw ParseError("line " + std::to_string(ln) + ": expected " + std::to_string(nvars) + " exponents");
        for (int v : e)
            if (v < 0) throw ParseError("line " + std::to_string(ln) + ": negative exponent");
        const long long pp = p;
        f.add_term(e, static_cast<std::uint32_t>(((c % pp) + pp) % pp));
    }
    return f;
}

std::optional<std::uint32_t> fp_ratio(const GradedPoly& num, const GradedPoly& den) {
    if (den.is_zero()) return std::nullopt;
    const std::uint32_t p = den.char_p();
    const auto& [e, c] = *den.terms().rbegin();
    const std::uint32_t beta = static_cast<std::uint32_t>(std::uint64_t(num.coeff(e)) * fp::inv(c, p) % p);
    if (!beta || !(num == den.scaled(beta))) return std::nullopt;
    return beta;
}

// ---------------------------------------------------------------- action

XAction::XAction(std::uint32_t p, int nvars, std::vector<GradedPoly> increments)
    : p_(p), n_(nvars), inc_(std::move(increments)) {
    const int r = static_cast<int>(inc_.size());
    if (r > n_) throw ActionShapeError("more increments than variables");
    for (int i = 0; i < r; ++i)
        for (const auto& [e, c] : inc_[i].terms()) {
            (void)c;
            int j = -1;
            for (int k = 0; k < n_; ++k)
                if (e[k]) j = (total_degree(e) == 1) ? k : -2;
            if (j < 0 || j <= i || j >= r)
                throw ActionShapeError("D_" + std::to_string(i + 1) + " must lie in Span{T_" + std::to_string(i + 2) +
                                       "..T_" + std::to_string(r) + "}");
        }
    for (int i = 0; i < n_; ++i) {
        GradedPoly img = GradedPoly::variable(p_, n_, i);
        if (i < r) img = img + inc_[i];
        images_.push_back(std::move(img));
    }
}

XAction XAction::from_k_basis(const KBasisData& kb, int d) {
    const std::uint32_t p = kb.k.empty() ? 2 : kb.k[0].b.prime();
    std::vector<GradedPoly> inc;
    for (int i = 0; i < kb.r; ++i) {
        GradedPoly D(p, d + 1);
        for (int j = 0; j < kb.r; ++j)
            if (kb.D[i][j]) D = D + GradedPoly::variable(p, d + 1, j).scaled(kb.D[i][j]);
        inc.push_back(std::move(D));
    }
    return XAction(p, d + 1, std::move(inc));
}

GradedPoly XAction::apply(const GradedPoly& f) const { return f.substitute(images_); }

int XAction::order_exponent() const {
    // the composite of the linear substitution with itself, tracked on variables
    std::vector<GradedPoly> cur = images_;
    for (int k = 0; k <= n_; ++k) {
        bool id = true;
        for (int i = 0; i < n_ && id; ++i) id = cur[i] == GradedPoly::variable(p_, n_, i);
        if (id) return k;
        // cur^p
        std::vector<GradedPoly> next = cur;
        for (std::uint32_t step = 1; step < p_; ++step)
            for (int i = 0; i < n_; ++i) next[i] = next[i].substitute(cur);
        cur = std::move(next);
    }
    throw ActionShapeError("action is not of p-power order");
}

int XAction::top_index() const {
    for (int i = r(); i >= 1; --i)
        if (!inc_[i - 1].is_zero()) return i;
    return 0;
}

// ---------------------------------------------------------------- L-polynomials

GradedPoly l_eval(const GradedPoly& x, const std::vector<GradedPoly>& ys) {
    const std::uint32_t p = x.char_p();
    GradedPoly cur = x;
    for (const auto& y : ys) cur = cur.pow(p) - cur * y.pow(p - 1);
    return cur;
}

std::vector<GradedPoly> l_coeffs(const std::vector<GradedPoly>& ys, std::uint32_t p, int nvars) {
    // a has n + 1 entries with a[n] = 1 while building
    std::vector<GradedPoly> a{GradedPoly::constant(p, nvars, 1)};
    for (const auto& y : ys) {
        GradedPoly yp = y.pow(p - 1);
        const std::size_t n = a.size() - 1;
        std::vector<GradedPoly> b(n + 2, GradedPoly(p, nvars));
        for (std::size_t i = 0; i <= n; ++i) {
            b[i] = b[i] - a[i] * yp;
            b[i + 1] = b[i + 1] + a[i].frobenius();
        }
        a = std::move(b);
    }
    a.pop_back();
    return a;
}

GradedPoly l_apply_coeffs(const std::vector<GradedPoly>& a, const GradedPoly& x) {
    GradedPoly out(x.char_p(), x.nvars());
    GradedPoly xp = x;
    for (const auto& ai : a) {
        out = out + ai * xp;
        xp = xp.frobenius();
    }
    return out + xp;
}

BChain b_chain(const XAction& act, int s) {
    BChain out;
    out.s = s;
    out.report.suite = "b-chain";
    if (s < 0 || s > act.r()) throw ActionShapeError("chain index out of range");
    for (int j = s + 1; j <= act.r(); ++j)
        if (!act.increment(j - 1).is_zero())
            throw ActionShapeError("D_" + std::to_string(j) + " is nonzero above s = " + std::to_string(s));
    if (s > 0 && act.increment(s - 1).is_zero()) throw ActionShapeError("D_s must be nonzero");

    out.B.assign(s, GradedPoly(act.p(), act.nvars()));
    for (int i = s; i >= 1; --i) {
        std::vector<GradedPoly> ys;
        for (int j = s; j > i; --j) ys.push_back(out.B[j - 1]);
        out.B[i - 1] = l_eval(act.increment(i - 1), ys);
    }
    for (int i = s; i >= 1; --i) {
        const GradedPoly& B = out.B[i - 1];
        out.report.add("B-" + std::to_string(i) + "-invariant", "X-invariance of B_i (P = 0)", act.is_invariant(B),
                       B.is_zero() ? "0" : "deg " + std::to_string(B.degree()));
        std::vector<GradedPoly> ys;
        for (int j = s; j >= i; --j) ys.push_back(out.B[j - 1]);
        GradedPoly Lt = l_eval(GradedPoly::variable(act.p(), act.nvars(), i - 1), ys);
        out.report.add("L-" + std::to_string(i) + "-invariant", "X-invariance of L^(s-i+1)(T_i, B_s..B_i) (P = 0)",
                       act.is_invariant(Lt), "deg " + std::to_string(Lt.degree()));
    }
    return out;
}

// ---------------------------------------------------------------- reduction shadow

GradedPoly to_graded(const IwasawaElement& r) {
    const IwasawaAlgebra& A = r.algebra();
    GradedPoly out(A.p(), A.d() + 1);
    for (const auto& [e, c] : r.terms()) out.add_term(e, c);
    return out;
}

namespace {

IwasawaElement l_eval_kh(const IwasawaElement& x, const std::vector<IwasawaElement>& ys) {
    const std::uint32_t p = x.algebra().p();
    IwasawaElement cur = x;
    for (const auto& y : ys) cur = cur.pow(p) - cur * y.pow(p - 1);
    return cur;
}

}  // namespace

Report graded_reduction_shadow(std::shared_ptr<const Group> G, const KBasisData& kb, const PValuationSpec& spec,
                               const GroupElement& h, int truncation) {
    Report rep;
    rep.suite = "reduction-shadow";
    const int d = G->d();
    const std::uint32_t p = G->p();
    if (kb.r == 0) {
        rep.add("trivial", "no non-central k-basis elements", true);
        return rep;
    }
    PValuationSpec u = commutator_subgroup_spec(*G, kb, spec);
    const long long theta = u.numerators[0];
    AlgebraPtr alg = valuation_algebra(G, u, truncation);
    const std::vector<long long>& w = u.numerators;
    const long long thr = reliable_threshold(*alg, w, true);

    XAction act = XAction::from_k_basis(kb, d);
    const int s = act.top_index();
    BChain chain = b_chain(act, s);
    rep.merge(chain.report);

    auto symbol = [&](const IwasawaElement& x) { return to_graded(graded_form(x, w)); };
    auto check = [&](const std::string& id, const std::string& anchor, const IwasawaElement& x, long long bound,
                     const GradedPoly& expected) {
        FiltrationValue v = lazard_value(x, w);
        if (!v.infinite && v.value >= thr)
            throw TruncationTooSmall(id + ": value " + std::to_string(v.value) + " reaches the reliable threshold " +
                                     std::to_string(thr));
        if (v.infinite && bound < thr && !expected.is_zero())
            throw TruncationTooSmall(id + ": element vanishes at truncation but its symbol does not");
        bool ok = at_least(v, bound);
        std::string witness;
        if (ok && !v.infinite && v.value == bound) {
            ok = symbol(x) == expected;
            if (!ok) witness = "gr differs from the chain symbol";
        } else if (ok) {
            ok = expected.is_zero();
            if (!ok) witness = "value above the bound but chain symbol nonzero";
        } else {
            witness = "value " + v.to_string() + " < " + std::to_string(bound);
        }
        auto& r = rep.add(id, anchor, ok, v.to_string() + " vs " + std::to_string(bound), witness);
        r.params = {{"theta", std::to_string(theta)}, {"s", std::to_string(s)}};
    };

    // y_i in kH
    std::vector<IwasawaElement> y(s + 1, IwasawaElement::zero(alg));
    for (int i = s; i >= 1; --i) {
        if (act.increment(i - 1).is_zero()) continue;
        GroupElement f = G->identity();
        for (int j = 0; j < kb.r; ++j)
            if (kb.D[i - 1][j]) f = G->multiply(f, G->power(kb.k[j], static_cast<u64>(kb.D[i - 1][j])));
        IwasawaElement base = from_group_element(alg, G->u_map(f, kb.c)) - IwasawaElement::one(alg);
        std::vector<IwasawaElement> ys;
        for (int j = s; j > i; --j) ys.push_back(y[j]);
        y[i] = l_eval_kh(base, ys);
    }
    for (int i = s; i >= 1; --i) {
        long long bound = theta;
        for (int k = 0; k < s - i; ++k) bound *= p;
        check("y-" + std::to_string(i), "w(y_i) >= p^{s-i} theta, gr(y_i) = B_i on equality", y[i], bound,
              chain.B[i - 1]);
    }

    IwasawaElement t = from_group_element(alg, G->u_map(h, kb.c)) - IwasawaElement::one(alg);
    FiltrationValue vt = lazard_value(t, w);
    GradedPoly T = (!vt.infinite && vt.value == theta) ? symbol(t) : GradedPoly(p, d + 1);
    for (int i = s; i >= 0; --i) {
        std::vector<IwasawaElement> ys;
        std::vector<GradedPoly> Bs;
        for (int j = s; j > i; --j) {
            ys.push_back(y[j]);
            Bs.push_back(chain.B[j - 1]);
        }
        long long bound = theta;
        for (int k = 0; k < s - i; ++k) bound *= p;
        check("h-level-" + std::to_string(i), "w(L^(s-i)(u_c(h)-1, y_s..y_{i+1})) >= p^{s-i} theta",
              l_eval_kh(t, ys), bound, l_eval(T, Bs));
    }
    return rep;
}

}  // namespace iwa
