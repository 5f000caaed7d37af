#include "iwa/iwasawa.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "iwa/errors.hpp"

namespace iwa {

namespace {

using Dense = std::vector<std::uint32_t>;

constexpr std::size_t kMaxMonomials = 4000;

long long sat_mul(long long a, long long b) {
    if (a == 0 || b == 0) return 0;
    if (a > std::numeric_limits<long long>::max() / b) return std::numeric_limits<long long>::max();
    return a * b;
}

long long p_power_weight(std::uint32_t p, int v, long long w) {
    long long x = w;
    for (int i = 0; i < v; ++i) x = sat_mul(x, p);
    return x;
}

void add_into(Dense& out, const Dense& a, std::uint32_t p) {
    for (std::size_t i = 0; i < std::min(out.size(), a.size()); ++i) out[i] = (out[i] + a[i]) % p;
}

bool all_zero(const Dense& a) {
    return std::all_of(a.begin(), a.end(), [](std::uint32_t x) { return x == 0; });
}

// Coefficients of prod (1 + b_i)^{alpha_i} over H-monomials of degree < D.
Dense h_series(const IwasawaAlgebra& alg, const std::vector<PAdicScalar>& alpha, int D) {
    const int T = alg.truncation();
    const std::uint32_t p = alg.p();
    std::vector<std::vector<std::uint32_t>> bin(alg.d(), std::vector<std::uint32_t>(T, 0));
    for (int i = 0; i < alg.d(); ++i)
        for (int n = 0; n < T; ++n) bin[i][n] = binom_mod_p(alpha[i], static_cast<u64>(n));
    Dense out(alg.count(D), 0);
    for (std::size_t idx = 0; idx < out.size(); ++idx) {
        u64 c = 1;
        const auto& e = alg.exponent(idx);
        for (int i = 0; i < alg.d() && c; ++i) c = c * bin[i][e[i]] % p;
        out[idx] = static_cast<std::uint32_t>(c);
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------- values

std::string FiltrationValue::to_string() const {
    if (infinite) return "inf";
    return (exact ? "" : ">=") + std::to_string(value);
}

bool at_least(const FiltrationValue& a, long long b) { return a.infinite || a.value >= b; }

bool same_value(const FiltrationValue& a, const FiltrationValue& b) {
    return !a.infinite && !b.infinite && a.exact && b.exact && a.value == b.value;
}

// ---------------------------------------------------------------- algebra

IwasawaAlgebra::IwasawaAlgebra(std::shared_ptr<const Group> G, std::vector<GroupElement> basis, int truncation)
    : G_(std::move(G)), basis_(std::move(basis)), T_(truncation) {
    const int d = G_->d();
    if (T_ < 1) throw DomainError("truncation must be positive");
    if (static_cast<int>(basis_.size()) != d + 1) throw DomainError("algebra basis needs d elements of H and a power of X");
    for (int i = 0; i < d; ++i)
        if (!basis_[i].in_h()) throw DomainError("the first d basis elements must lie in H");
    const GroupElement& x = basis_.back();
    if (x.b.is_zero() || !std::all_of(x.a.begin(), x.a.end(), [](const PAdicScalar& s) { return s.is_zero(); }))
        throw DomainError("the last basis element must be a nontrivial power of X");

    prefix_.assign(1, 0);
    for (int D = 0; D < T_; ++D) {
        // exponent vectors of degree D, lexicographically descending
        std::vector<int> e(d, 0);
        std::vector<std::vector<int>> level;
        auto rec = [&](auto&& self, int i, int left) -> void {
            if (i == d - 1) {
                e[i] = left;
                level.push_back(e);
                return;
            }
            for (int v = left; v >= 0; --v) {
                e[i] = v;
                self(self, i + 1, left - v);
            }
        };
        if (d > 0) rec(rec, 0, D);
        else if (D == 0) level.push_back({});
        for (auto& v : level) {
            lookup_[v] = exps_.size();
            exps_.push_back(v);
            deg_.push_back(D);
        }
        prefix_.push_back(exps_.size());
        if (exps_.size() > kMaxMonomials) throw DomainError("truncation too large for this rank");
    }
    const std::size_t n = exps_.size();
    table_.assign(n * n, -1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (deg_[i] + deg_[j] >= T_) continue;
            std::vector<int> s = exps_[i];
            for (int k = 0; k < d; ++k) s[k] += exps_[j][k];
            table_[i * n + j] = static_cast<int>(lookup_.at(s));
        }
    sigma_ = conjugation_matrix(x);
}

std::shared_ptr<const IwasawaAlgebra> IwasawaAlgebra::standard(std::shared_ptr<const Group> G, int truncation) {
    std::vector<GroupElement> basis;
    for (int i = 0; i < G->d(); ++i) basis.push_back(G->generator(i));
    basis.push_back(G->x_power(G->scalar(static_cast<long long>(ipow(G->p(), G->uniform_level())))));
    return make(std::move(G), std::move(basis), truncation);
}

std::optional<std::size_t> IwasawaAlgebra::index(const std::vector<int>& e) const {
    auto it = lookup_.find(e);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

Dense IwasawaAlgebra::h_multiply(const Dense& a, const Dense& b, int D) const {
    const std::size_t n = count(D);
    Dense out(n, 0);
    const std::uint32_t p = this->p();
    const std::size_t total = exps_.size();
    for (std::size_t i = 0; i < std::min(n, a.size()); ++i) {
        if (!a[i]) continue;
        const std::size_t lim = std::min(count(D - deg_[i]), b.size());
        const int* row = &table_[i * total];
        const u64 ai = a[i];
        for (std::size_t j = 0; j < lim; ++j) {
            if (!b[j]) continue;
            std::uint32_t& o = out[row[j]];
            o = static_cast<std::uint32_t>((o + ai * b[j]) % p);
        }
    }
    return out;
}

Dense IwasawaAlgebra::h_apply(const std::vector<Dense>& mat, const Dense& a, int D) const {
    const std::size_t n = count(D);
    Dense out(n, 0);
    const std::uint32_t p = this->p();
    for (std::size_t i = 0; i < std::min(n, a.size()); ++i) {
        if (!a[i]) continue;
        const Dense& col = mat[i];
        for (std::size_t j = 0; j < std::min(n, col.size()); ++j)
            if (col[j]) out[j] = static_cast<std::uint32_t>((out[j] + u64(a[i]) * col[j]) % p);
    }
    return out;
}

std::vector<Dense> IwasawaAlgebra::conjugation_matrix(const GroupElement& g) const {
    const int d = G_->d();
    const std::size_t n = exps_.size();
    std::vector<Dense> images;
    for (int i = 0; i < d; ++i) {
        GroupElement y = G_->conjugate(g, basis_[i]);
        std::vector<PAdicScalar> alpha = G_->decompose(y, std::vector<GroupElement>(basis_.begin(), basis_.begin() + d));
        Dense s = h_series(*this, alpha, T_);
        s[0] = (s[0] + p() - 1) % p();
        images.push_back(std::move(s));
    }
    std::vector<Dense> mat(n);
    mat[0] = Dense(n, 0);
    mat[0][0] = 1;
    for (std::size_t idx = 1; idx < n; ++idx) {
        std::vector<int> e = exps_[idx];
        int i = 0;
        while (e[i] == 0) ++i;
        --e[i];
        mat[idx] = h_multiply(mat[lookup_.at(e)], images[i], T_);
    }
    return mat;
}

// ---------------------------------------------------------------- elements

IwasawaElement::IwasawaElement(AlgebraPtr alg) : alg_(std::move(alg)) {
    const int T = alg_->truncation();
    slices_.resize(T);
    for (int k = 0; k < T; ++k) slices_[k].assign(alg_->count(T - k), 0);
}

IwasawaElement IwasawaElement::one(AlgebraPtr alg) { return constant(std::move(alg), 1); }

IwasawaElement IwasawaElement::constant(AlgebraPtr alg, std::uint32_t c) {
    IwasawaElement x(alg);
    x.slices_[0][0] = c % alg->p();
    return x;
}

IwasawaElement IwasawaElement::monomial(AlgebraPtr alg, const std::vector<int>& exps, std::uint32_t c) {
    IwasawaElement x(alg);
    x.set(exps, c);
    return x;
}

IwasawaElement IwasawaElement::variable(AlgebraPtr alg, int i) {
    std::vector<int> e(alg->d() + 1, 0);
    e.at(i) = 1;
    return monomial(std::move(alg), e, 1);
}

std::uint32_t IwasawaElement::coeff(const std::vector<int>& exps) const {
    const int d = alg_->d();
    const int k = exps[d];
    if (k < 0 || k >= alg_->truncation()) return 0;
    auto idx = alg_->index(std::vector<int>(exps.begin(), exps.begin() + d));
    if (!idx || *idx >= slices_[k].size()) return 0;
    return slices_[k][*idx];
}

void IwasawaElement::set(const std::vector<int>& exps, std::uint32_t c) {
    const int d = alg_->d();
    if (static_cast<int>(exps.size()) != d + 1) throw DomainError("monomial needs d + 1 exponents");
    const int k = exps[d];
    auto idx = alg_->index(std::vector<int>(exps.begin(), exps.begin() + d));
    if (k < 0 || k >= alg_->truncation() || !idx || *idx >= slices_[k].size())
        throw DomainError("monomial lies beyond the truncation");
    slices_[k][*idx] = c % alg_->p();
}

std::vector<std::pair<std::vector<int>, std::uint32_t>> IwasawaElement::terms() const {
    std::vector<std::pair<std::vector<int>, std::uint32_t>> out;
    for (std::size_t k = 0; k < slices_.size(); ++k)
        for (std::size_t i = 0; i < slices_[k].size(); ++i) {
            if (!slices_[k][i]) continue;
            std::vector<int> e = alg_->exponent(i);
            e.push_back(static_cast<int>(k));
            out.emplace_back(std::move(e), slices_[k][i]);
        }
    auto deg = [](const std::vector<int>& e) {
        int s = 0;
        for (int x : e) s += x;
        return s;
    };
    std::sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
        int da = deg(a.first), db = deg(b.first);
        if (da != db) return da < db;
        return a.first > b.first;
    });
    return out;
}

bool IwasawaElement::is_zero() const {
    return std::all_of(slices_.begin(), slices_.end(), [](const Dense& s) { return all_zero(s); });
}

bool IwasawaElement::in_kh() const {
    for (std::size_t k = 1; k < slices_.size(); ++k)
        if (!all_zero(slices_[k])) return false;
    return true;
}

int IwasawaElement::order() const {
    int best = alg_->truncation();
    for (std::size_t k = 0; k < slices_.size(); ++k)
        for (std::size_t i = 0; i < slices_[k].size(); ++i)
            if (slices_[k][i]) {
                best = std::min(best, alg_->degree(i) + static_cast<int>(k));
                break;
            }
    return best;
}

IwasawaElement IwasawaElement::operator-() const { return scaled(alg_->p() - 1); }

IwasawaElement operator+(const IwasawaElement& a, const IwasawaElement& b) {
    IwasawaElement out = a;
    for (std::size_t k = 0; k < out.slices_.size(); ++k) add_into(out.slices_[k], b.slices_[k], a.alg_->p());
    return out;
}

IwasawaElement operator-(const IwasawaElement& a, const IwasawaElement& b) { return a + (-b); }

IwasawaElement IwasawaElement::scaled(std::uint32_t c) const {
    IwasawaElement out = *this;
    const std::uint32_t p = alg_->p();
    for (auto& s : out.slices_)
        for (auto& x : s) x = static_cast<std::uint32_t>(u64(x) * (c % p) % p);
    return out;
}

IwasawaElement IwasawaElement::times_bx() const {
    const IwasawaAlgebra& A = *alg_;
    const int T = A.truncation();
    const std::uint32_t p = A.p();
    IwasawaElement out(alg_);
    for (int m = 0; m < T; ++m) {
        if (all_zero(slices_[m])) continue;
        Dense s = A.h_apply(A.sigma(), slices_[m], T - m);
        if (m + 1 < T) add_into(out.slices_[m + 1], s, p);
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = (s[i] + p - slices_[m][i]) % p;
        add_into(out.slices_[m], s, p);
    }
    return out;
}

IwasawaElement IwasawaElement::left_h(const Dense& c) const {
    const int T = alg_->truncation();
    IwasawaElement out(alg_);
    for (int k = 0; k < T; ++k)
        if (!all_zero(slices_[k])) out.slices_[k] = alg_->h_multiply(c, slices_[k], T - k);
    return out;
}

IwasawaElement operator*(const IwasawaElement& a, const IwasawaElement& b) {
    const IwasawaAlgebra& A = *a.alg_;
    const int T = A.truncation();
    const std::uint32_t p = A.p();
    IwasawaElement out(a.alg_);
    IwasawaElement q = b;
    int last = -1;
    for (int l = 0; l < T; ++l)
        if (!all_zero(a.slices_[l])) last = l;
    for (int l = 0; l <= last; ++l) {
        if (l > 0) q = q.times_bx();
        if (all_zero(a.slices_[l])) continue;
        for (int k = 0; k < T; ++k) {
            if (all_zero(q.slices_[k])) continue;
            add_into(out.slices_[k], A.h_multiply(a.slices_[l], q.slices_[k], T - k), p);
        }
    }
    return out;
}

IwasawaElement IwasawaElement::pow(std::uint64_t n) const {
    IwasawaElement result = one(alg_);
    IwasawaElement base = *this;
    while (n) {
        if (n & 1) result = result * base;
        n >>= 1;
        if (n) {
            base = base * base;
            if (base.is_zero()) return zero(alg_);
        }
    }
    return result;
}

bool IwasawaElement::equals(const IwasawaElement& o) const { return slices_ == o.slices_; }

std::string IwasawaElement::to_text() const {
    std::ostringstream os;
    for (const auto& [e, c] : terms()) {
        os << c << ":";
        for (std::size_t i = 0; i < e.size(); ++i) os << (i ? "," : "") << e[i];
        os << "\n";
    }
    return os.str();
}

IwasawaElement IwasawaElement::parse(AlgebraPtr alg, const std::string& text) {
    IwasawaElement x(alg);
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
        std::vector<int> e;
        long long c = 0;
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
        if (static_cast<int>(e.size()) != alg->d() + 1)
            throw ParseError("line " + std::to_string(ln) + ": expected " + std::to_string(alg->d() + 1) + " exponents");
        for (int v : e)
            if (v < 0) throw ParseError("line " + std::to_string(ln) + ": negative exponent");
        const long long p = alg->p();
        std::uint32_t cc = static_cast<std::uint32_t>(((c % p) + p) % p);
        try {
            x.set(e, (x.coeff(e) + cc) % alg->p());
        } catch (const DomainError&) {
            throw ParseError("line " + std::to_string(ln) + ": term beyond the truncation");
        }
    }
    return x;
}

IwasawaElement random_element(AlgebraPtr alg, std::mt19937_64& rng, double density) {
    IwasawaElement x(alg);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& s : x.slices())
        for (auto& c : s)
            if (u(rng) < density) c = static_cast<std::uint32_t>(rng() % alg->p());
    return x;
}

// ---------------------------------------------------------------- group elements

IwasawaElement from_group_element(AlgebraPtr alg, const GroupElement& g) {
    const Group& G = alg->group();
    std::vector<PAdicScalar> alpha = G.decompose(g, alg->basis());
    const int T = alg->truncation();
    const std::uint32_t p = alg->p();
    Dense h = h_series(*alg, alpha, T);
    IwasawaElement out(alg);
    for (int k = 0; k < T; ++k) {
        std::uint32_t c = binom_mod_p(alpha[G.d()], static_cast<u64>(k));
        if (!c) continue;
        auto& s = out.slices()[k];
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<std::uint32_t>(u64(h[i]) * c % p);
    }
    return out;
}

IwasawaElement conjugate(const IwasawaElement& r, const GroupElement& g) {
    AlgebraPtr alg = r.algebra_ptr();
    const Group& G = alg->group();
    const int T = alg->truncation();
    std::vector<Dense> mat = alg->conjugation_matrix(g);
    const GroupElement& x = alg->basis().back();
    GroupElement gx = G.conjugate(g, x);
    IwasawaElement out(alg);
    if (G.equal(gx, x)) {
        for (int k = 0; k < T; ++k)
            if (!all_zero(r.slices()[k])) out.slices()[k] = alg->h_apply(mat, r.slices()[k], T - k);
        return out;
    }
    IwasawaElement img = from_group_element(alg, gx) - IwasawaElement::one(alg);
    IwasawaElement power = IwasawaElement::one(alg);
    for (int k = 0; k < T; ++k) {
        if (k > 0) power = power * img;
        if (all_zero(r.slices()[k])) continue;
        out = out + power.left_h(alg->h_apply(mat, r.slices()[k], T));
    }
    return out;
}

IwasawaElement divided_power(const std::vector<int>& alpha_in, const IwasawaElement& r) {
    const IwasawaAlgebra& A = r.algebra();
    const int d = A.d();
    std::vector<int> alpha = alpha_in;
    if (static_cast<int>(alpha.size()) == d + 1) {
        if (alpha[d] != 0) throw DomainError("divided powers vanish off H; alpha touches the X slot");
        alpha.pop_back();
    }
    if (static_cast<int>(alpha.size()) != d) throw DomainError("alpha needs d entries");
    const std::uint32_t p = A.p();
    const int T = A.truncation();

    // (1 + b)^alpha = sum_gamma binom(alpha, gamma) b^gamma
    std::vector<std::pair<std::vector<int>, std::uint32_t>> gammas;
    std::vector<int> g(d, 0);
    auto rec = [&](auto&& self, int i, u64 c) -> void {
        if (i == d) {
            if (c) gammas.emplace_back(g, static_cast<std::uint32_t>(c));
            return;
        }
        for (int v = 0; v <= alpha[i]; ++v) {
            g[i] = v;
            self(self, i + 1, c * binom_mod_p(static_cast<u64>(alpha[i]), static_cast<u64>(v), p) % p);
        }
    };
    rec(rec, 0, 1);

    IwasawaElement out(r.algebra_ptr());
    for (int k = 0; k < T; ++k) {
        const Dense& s = r.slices()[k];
        Dense& o = out.slices()[k];
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (!s[i]) continue;
            const auto& e = A.exponent(i);
            u64 c = s[i];
            std::vector<int> base(d);
            for (int j = 0; j < d && c; ++j) {
                if (e[j] < alpha[j]) c = 0;
                else {
                    c = c * binom_mod_p(static_cast<u64>(e[j]), static_cast<u64>(alpha[j]), p) % p;
                    base[j] = e[j] - alpha[j];
                }
            }
            if (!c) continue;
            for (const auto& [gm, gc] : gammas) {
                std::vector<int> t(d);
                int deg = 0;
                for (int j = 0; j < d; ++j) deg += (t[j] = base[j] + gm[j]);
                if (deg >= T - k) continue;
                std::size_t idx = *A.index(t);
                o[idx] = static_cast<std::uint32_t>((o[idx] + c * gc) % p);
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------- Mahler

namespace {

GroupElement x_pm(const Group& G, int m) { return G.x_power(G.scalar(static_cast<long long>(ipow(G.p(), m)))); }

// phi^{p^m}(g_i) g_i^-1 for each H basis element
std::vector<GroupElement> mahler_elements(const IwasawaAlgebra& A, int m) {
    const Group& G = A.group();
    GroupElement xm = x_pm(G, m);
    std::vector<GroupElement> out;
    for (int i = 0; i < A.d(); ++i)
        out.push_back(G.multiply(G.conjugate(xm, A.basis()[i]), G.inverse(A.basis()[i])));
    return out;
}

std::vector<Dense> mahler_bases(const AlgebraPtr& alg, int m) {
    std::vector<Dense> c;
    for (const auto& y : mahler_elements(*alg, m)) {
        IwasawaElement e = from_group_element(alg, y) - IwasawaElement::one(alg);
        c.push_back(e.slices()[0]);
    }
    return c;
}

// coefficient for every H-monomial alpha of degree < D
std::vector<Dense> all_mahler_coefficients(const AlgebraPtr& alg, int m, int D) {
    const IwasawaAlgebra& A = *alg;
    std::vector<Dense> c = mahler_bases(alg, m);
    const int T = A.truncation();
    std::vector<Dense> coef(A.count(D));
    if (coef.empty()) return coef;
    coef[0] = Dense(A.count(T), 0);
    coef[0][0] = 1;
    for (std::size_t idx = 1; idx < coef.size(); ++idx) {
        std::vector<int> e = A.exponent(idx);
        int i = 0;
        while (e[i] == 0) ++i;
        --e[i];
        coef[idx] = A.h_multiply(coef[*A.index(e)], c[i], T);
    }
    return coef;
}

}  // namespace

IwasawaElement mahler_coefficient(AlgebraPtr alg, int m, const std::vector<int>& alpha) {
    const int d = alg->d();
    if (static_cast<int>(alpha.size()) < d) throw DomainError("alpha needs d entries");
    std::vector<Dense> c = mahler_bases(alg, m);
    const int T = alg->truncation();
    Dense acc(alg->count(T), 0);
    acc[0] = 1;
    for (int i = 0; i < d; ++i)
        for (int n = 0; n < alpha[i]; ++n) acc = alg->h_multiply(acc, c[i], T);
    IwasawaElement out(alg);
    out.slices()[0] = acc;
    return out;
}

Report verify_mahler_expansion(AlgebraPtr alg, int m, int cap, int trials, std::uint64_t seed) {
    const IwasawaAlgebra& A = *alg;
    const Group& G = A.group();
    const int T = A.truncation();
    const std::uint32_t p = A.p();
    Report rep;
    rep.suite = "mahler";

    // lowest degree of a nonzero Mahler base: min p^{v(exponent)}
    long long mu = std::numeric_limits<long long>::max();
    std::vector<GroupElement> hb(A.basis().begin(), A.basis().begin() + A.d());
    for (const auto& y : mahler_elements(A, m)) {
        for (const auto& a : G.decompose(y, hb)) {
            PVal v = a.valuation();
            if (!v.saturated) mu = std::min(mu, p_power_weight(p, v.value, 1));
        }
    }
    const bool cap_ok = cap >= T - 1 || sat_mul(static_cast<long long>(cap) + 1, mu) >= T;
    if (!cap_ok)
        throw CapTooSmall("degree cap " + std::to_string(cap) + " leaves Mahler terms of degree " +
                          std::to_string((cap + 1) * mu) + " < T = " + std::to_string(T));

    const int D = std::min(cap + 1, T);
    std::vector<Dense> coef = all_mahler_coefficients(alg, m, D);
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < coef.size(); ++i)
        if (!all_zero(coef[i])) live.push_back(i);

    const GroupElement xm = x_pm(G, m);
    bool second_route = true;
    IwasawaElement fx, fxi;
    try {
        fx = from_group_element(alg, xm);
        fxi = from_group_element(alg, G.inverse(xm));
    } catch (const NotInSubgroup&) {
        second_route = false;
    }

    std::mt19937_64 rng(seed);
    int passed = 0, routes_ok = 0;
    std::string witness, route_witness;
    for (int t = 0; t < trials; ++t) {
        IwasawaElement r(alg);
        if (t % 2 == 0) {
            r = random_element(alg, rng);
        } else {
            std::vector<PAdicScalar> alpha;
            for (std::size_t i = 0; i < A.basis().size(); ++i) alpha.push_back(G.random_scalar(rng));
            r = from_group_element(alg, G.compose(alpha, A.basis()));
        }
        IwasawaElement lhs = conjugate(r, xm);
        if (second_route) {
            IwasawaElement lhs2 = fx * r * fxi;
            if (lhs2 == lhs) ++routes_ok;
            else if (route_witness.empty()) route_witness = "trial " + std::to_string(t);
        }
        IwasawaElement rhs(alg);
        for (std::size_t idx : live) {
            IwasawaElement dp = divided_power(A.exponent(idx), r);
            if (dp.is_zero()) continue;
            rhs = rhs + dp.left_h(coef[idx]);
        }
        IwasawaElement residual = lhs - rhs;
        if (residual.is_zero()) ++passed;
        else if (witness.empty())
            witness = "trial " + std::to_string(t) + " residual degree " + std::to_string(residual.order());
    }
    auto& rec = rep.add("mahler-expansion", "phi^{p^m} = sum <phi^{p^m}, d^(alpha)> d^(alpha)", passed == trials,
                        "residual >= T in " + std::to_string(passed) + "/" + std::to_string(trials), witness);
    rec.params = {{"m", std::to_string(m)}, {"cap", std::to_string(cap)}, {"T", std::to_string(T)},
                  {"seed", std::to_string(seed)}, {"terms", std::to_string(live.size())}};
    if (second_route) {
        auto& r2 = rep.add("conjugation-routes", "automorphism vs X^{p^m} r X^{-p^m}", routes_ok == trials,
                           std::to_string(routes_ok) + "/" + std::to_string(trials), route_witness);
        r2.params = {{"m", std::to_string(m)}};
    }
    return rep;
}

Report verify_epsilon_bound(AlgebraPtr alg, int m_first, int count) {
    const IwasawaAlgebra& A = *alg;
    const Group& G = A.group();
    const std::uint32_t p = A.p();
    const int T = A.truncation();
    Report rep;
    rep.suite = "epsilon-bound";
    std::vector<long long> ones(A.d() + 1, 1);
    std::vector<GroupElement> hb(A.basis().begin(), A.basis().begin() + A.d());

    for (int i = 0; i < A.d(); ++i) {
        std::vector<FiltrationValue> vals;
        bool series_ok = true;
        std::string series_witness;
        for (int m = m_first; m < m_first + count; ++m) {
            const GroupElement& gi = A.basis()[i];
            GroupElement x = G.multiply(G.conjugate(x_pm(G, m), gi), G.inverse(gi));
            GroupElement y = G.u_map(gi, m);
            GroupElement delta = G.multiply(G.inverse(y), x);
            FiltrationValue v = group_like_value(A, ones, delta);
            if (!v.exact && G.is_identity(x) && G.is_identity(y)) v = FiltrationValue::inf();
            vals.push_back(v);
            IwasawaElement s = from_group_element(alg, x) - from_group_element(alg, y);
            bool agree;
            if (v.infinite || v.value >= T) agree = s.is_zero();
            else if (v.exact) agree = s.order() == v.value;
            else agree = s.order() >= v.value;
            if (!agree) {
                series_ok = false;
                if (series_witness.empty())
                    series_witness = "m=" + std::to_string(m) + " series order " + std::to_string(s.order()) +
                                     " vs " + v.to_string();
            }
        }
        bool growth = true;
        std::string w;
        std::string seq;
        for (std::size_t k = 0; k < vals.size(); ++k) {
            seq += (k ? "," : "") + vals[k].to_string();
            if (k == 0) continue;
            const auto& a = vals[k - 1];
            const auto& b = vals[k];
            bool ok;
            if (b.infinite) ok = true;
            else if (a.infinite) ok = false;
            else {
                ok = b.value >= sat_mul(static_cast<long long>(p), a.value);
                // a lower bound on either side leaves the ratio undecided
                if (!a.exact || (!ok && !b.exact))
                    throw TruncationTooSmall("epsilon values saturate near m = " +
                                             std::to_string(m_first + static_cast<int>(k)) + "; raise the precision");
            }
            if (!ok) {
                growth = false;
                if (w.empty()) w = "m=" + std::to_string(m_first + static_cast<int>(k));
            }
        }
        auto& r = rep.add("epsilon-growth-" + std::to_string(i + 1), "w(eps_m) grows with ratio >= p", growth, seq, w);
        r.params = {{"m", std::to_string(m_first) + ".." + std::to_string(m_first + count - 1)}};
        rep.add("epsilon-series-" + std::to_string(i + 1), "series value matches exponent formula", series_ok, "",
                series_witness);
    }
    return rep;
}

// ---------------------------------------------------------------- Lazard

std::vector<long long> lazard_weights(const IwasawaAlgebra& alg, const PValuationSpec& spec) {
    if (spec.basis.size() != alg.basis().size()) throw DomainError("spec basis does not match the algebra");
    for (std::size_t i = 0; i < spec.basis.size(); ++i)
        if (!alg.group().equal(spec.basis[i], alg.basis()[i])) throw DomainError("spec basis does not match the algebra");
    return spec.numerators;
}

FiltrationValue lazard_value(const IwasawaElement& r, const std::vector<long long>& weights) {
    const IwasawaAlgebra& A = r.algebra();
    const int d = A.d();
    FiltrationValue out = FiltrationValue::inf();
    for (std::size_t k = 0; k < r.slices().size(); ++k) {
        const Dense& s = r.slices()[k];
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (!s[i]) continue;
            long long w = static_cast<long long>(k) * weights[d];
            const auto& e = A.exponent(i);
            for (int j = 0; j < d; ++j) w += e[j] * weights[j];
            if (out.infinite || w < out.value) out = {w, false, true};
        }
    }
    return out;
}

FiltrationValue lazard_value(const IwasawaElement& r, const PValuationSpec& spec) {
    return lazard_value(r, lazard_weights(r.algebra(), spec));
}

IwasawaElement graded_form(const IwasawaElement& r, const std::vector<long long>& weights) {
    FiltrationValue v = lazard_value(r, weights);
    const IwasawaAlgebra& A = r.algebra();
    const int d = A.d();
    IwasawaElement out(r.algebra_ptr());
    if (v.infinite) return out;
    for (std::size_t k = 0; k < r.slices().size(); ++k)
        for (std::size_t i = 0; i < r.slices()[k].size(); ++i) {
            if (!r.slices()[k][i]) continue;
            long long w = static_cast<long long>(k) * weights[d];
            for (int j = 0; j < d; ++j) w += A.exponent(i)[j] * weights[j];
            if (w == v.value) out.slices()[k][i] = r.slices()[k][i];
        }
    return out;
}

long long reliable_threshold(const IwasawaAlgebra& alg, const std::vector<long long>& weights, bool kh_only) {
    long long wmin = std::numeric_limits<long long>::max();
    const std::size_t n = kh_only ? weights.size() - 1 : weights.size();
    for (std::size_t i = 0; i < n; ++i) wmin = std::min(wmin, weights[i]);
    return sat_mul(alg.truncation(), wmin);
}

FiltrationValue group_like_value(const IwasawaAlgebra& alg, const std::vector<long long>& weights,
                                 const GroupElement& g) {
    std::vector<PAdicScalar> alpha = alg.group().decompose(g, alg.basis());
    const std::uint32_t p = alg.p();
    bool have = false, have_bound = false;
    long long best = 0, bound = 0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        PVal v = alpha[i].valuation();
        long long w = p_power_weight(p, v.value, weights[i]);
        if (v.saturated) {
            if (!have_bound || w < bound) bound = w;
            have_bound = true;
        } else if (!have || w < best) {
            best = w;
            have = true;
        }
    }
    if (have && (!have_bound || best <= bound)) return {best, false, true};
    return {have_bound ? bound : 0, false, false};
}

AlgebraPtr valuation_algebra(std::shared_ptr<const Group> G, const PValuationSpec& spec, int truncation) {
    return IwasawaAlgebra::make(std::move(G), spec.basis, truncation);
}

// ---------------------------------------------------------------- theta

PValuationSpec commutator_subgroup_spec(const Group& G, const KBasisData& kb, const PValuationSpec& spec) {
    PValuationSpec u;
    u.e = spec.e;
    u.abelian = spec.abelian;
    for (int i = 0; i < kb.r; ++i) u.basis.push_back(G.u_map(kb.k[i], kb.c));
    for (std::size_t i = kb.r; i < kb.k.size(); ++i) u.basis.push_back(kb.k[i]);
    u.basis.push_back(G.x_power(G.scalar(static_cast<long long>(ipow(G.p(), kb.c)))));
    for (const auto& b : u.basis) {
        OmegaValue w = omega_value(G, b, spec);
        if (!w.exact) throw PrecisionExhausted("value of " + b.to_string() + " saturates at precision");
        u.numerators.push_back(w.num * (spec.e / w.den));
    }
    return u;
}

ThetaResult theta_check(const Group& G, const KBasisData& kb, const PValuationSpec& spec) {
    ThetaResult out;
    out.report.suite = "theta";
    out.u_spec = commutator_subgroup_spec(G, kb, spec);
    const auto& num = out.u_spec.numerators;
    bool equal = true, positive = true;
    std::string witness;
    if (kb.r > 0) out.theta = num[0];
    for (int i = 0; i < kb.r; ++i) {
        if (num[i] != out.theta) {
            equal = false;
            if (witness.empty())
                witness = "w(u_c(k_1)-1)=" + std::to_string(out.theta) + " w(u_c(k_" + std::to_string(i + 1) +
                          ")-1)=" + std::to_string(num[i]);
        }
        positive = positive && num[i] > 0;
    }
    out.report.add("theta-equal", "w(u_c(k_i)-1) = theta for all i", equal, "theta=" + std::to_string(out.theta),
                   witness);
    out.report.add("theta-positive", "theta > 0", positive, "theta=" + std::to_string(out.theta));
    const bool above = kb.r == 0 || out.theta > num.back();
    out.report.add("theta-above-x", "theta > w(X^{p^c}-1)", above,
                   std::to_string(out.theta) + " vs " + std::to_string(num.back()));
    Report sub = validate_p_valuation(G, out.u_spec, 50, 1);
    for (auto& r : sub.records) r.id = "c(G)-" + r.id;
    out.report.merge(sub);
    return out;
}

// ---------------------------------------------------------------- crossed product

void GroupRingElement::add(const GroupElement& g, std::uint32_t c, std::uint32_t p) {
    auto it = terms.find(g);
    std::uint32_t v = static_cast<std::uint32_t>(((it == terms.end() ? 0 : it->second) + c) % p);
    if (v == 0) {
        if (it != terms.end()) terms.erase(it);
    } else {
        terms[g] = v;
    }
}

GroupRingElement group_ring_multiply(const Group& G, const GroupRingElement& a, const GroupRingElement& b) {
    GroupRingElement out;
    const std::uint32_t p = G.p();
    for (const auto& [g, c] : a.terms)
        for (const auto& [h, e] : b.terms)
            out.add(G.multiply(g, h), static_cast<std::uint32_t>(u64(c) * e % p), p);
    if (a.tail || b.tail) out.tail = std::min(a.tail.value_or(std::numeric_limits<long long>::max()),
                                              b.tail.value_or(std::numeric_limits<long long>::max()));
    return out;
}

GroupRingElement group_ring_monomial(const Group& G, const std::vector<GroupElement>& u, const std::vector<int>& n,
                                     const GroupElement& g) {
    const std::uint32_t p = G.p();
    GroupRingElement acc;
    acc.add(G.identity(), 1, p);
    for (std::size_t i = 0; i < u.size() && i < n.size(); ++i) {
        GroupRingElement f;
        f.add(u[i], 1, p);
        f.add(G.identity(), p - 1, p);
        for (int k = 0; k < n[i]; ++k) acc = group_ring_multiply(G, acc, f);
    }
    GroupRingElement tail;
    tail.add(g, 1, p);
    return group_ring_multiply(G, acc, tail);
}

CrossedProduct make_crossed_product(std::shared_ptr<const Group> G, const PValuationSpec& u_spec, long long weight_cap) {
    CrossedProduct cp;
    cp.G = G;
    cp.u_spec = u_spec;
    const int c = G->uniform_level();
    cp.level = level_data(*G, c);
    if (!cp.level.lattice_split) throw IndexInfinite("coset representatives need H = H' x Z(G)");
    const int d = G->d();
    const std::uint32_t p = G->p();

    for (int s = 0; s <= d; ++s)
        for (const auto& u : u_spec.basis) {
            try {
                G->decompose(G->conjugate(G->generator(s), u), u_spec.basis);
            } catch (const NotInSubgroup&) {
                throw NotNormal("conjugate of " + u.to_string() + " by generator " + std::to_string(s) +
                                " leaves the subgroup");
            }
        }

    // reps: sum n_i h_i (0 <= n_i < p^{t_i}) times X^j (0 <= j < p^c)
    std::vector<u64> radix;
    for (int i = 0; i < cp.level.rank; ++i) radix.push_back(ipow(p, cp.level.t[i]));
    radix.push_back(ipow(p, c));
    u64 total = 1;
    for (u64 r : radix) {
        total *= r;
        if (total > 100000) throw IndexInfinite("index of c(G) too large to enumerate");
    }
    for (u64 idx = 0; idx < total; ++idx) {
        u64 q = idx;
        std::vector<PAdicScalar> a(d, PAdicScalar::zero(p, G->precision()));
        for (int i = 0; i < cp.level.rank; ++i) {
            long long n = static_cast<long long>(q % radix[i]);
            q /= radix[i];
            for (int j = 0; j < d; ++j) a[j] += cp.level.h_basis[i][j] * G->scalar(n);
        }
        GroupElement rep = G->h_element(a);
        rep.b = G->scalar(static_cast<long long>(q));
        cp.reps.push_back(rep);
    }

    long long wmax = *std::max_element(u_spec.numerators.begin(), u_spec.numerators.end());
    cp.weight_cap = weight_cap > 0 ? weight_cap : 12 * wmax;
    std::vector<int> e(d + 1, 0);
    auto rec = [&](auto&& self, int i, long long w) -> void {
        if (i == d + 1) {
            cp.monomials.emplace_back(e, w);
            return;
        }
        for (int v = 0; w + v * u_spec.numerators[i] <= cp.weight_cap; ++v) {
            e[i] = v;
            self(self, i + 1, w + v * u_spec.numerators[i]);
        }
        e[i] = 0;
    };
    rec(rec, 0, 0);
    std::stable_sort(cp.monomials.begin(), cp.monomials.end(),
                     [](const auto& a, const auto& b) { return a.second < b.second; });
    return cp;
}

std::pair<GroupElement, std::size_t> CrossedProduct::split(const GroupElement& g) const {
    const int c = G->uniform_level();
    const std::uint32_t p = G->p();
    const int d = G->d();
    const u64 pc = ipow(p, c);
    const u64 j = g.b.residue() % pc;
    GroupElement gj = G->multiply(g, G->x_power(G->scalar(-static_cast<long long>(j))));
    std::vector<std::vector<PAdicScalar>> cols = level.h_basis;
    cols.insert(cols.end(), level.z_basis.begin(), level.z_basis.end());
    auto coords = solve_linear(PAdicMatrix::from_columns(cols), gj.a);
    if (!coords) throw NotABasis("H-basis of the level data is not unimodular");
    u64 idx = 0, mult = 1;
    for (int i = 0; i < level.rank; ++i) {
        u64 r = ipow(p, level.t[i]);
        idx += ((*coords)[i].residue() % r) * mult;
        mult *= r;
    }
    idx += j * mult;
    (void)d;
    const GroupElement& rep = reps.at(idx);
    return {G->multiply(g, G->inverse(rep)), static_cast<std::size_t>(idx)};
}

FiltrationValue crossed_product_value(const GroupRingElement& r, const CrossedProduct& cp) {
    const Group& G = *cp.G;
    const std::uint32_t p = G.p();
    std::map<std::size_t, std::vector<std::pair<std::uint32_t, std::vector<PAdicScalar>>>> by_rep;
    for (const auto& [g, c] : r.terms) {
        auto [u, idx] = cp.split(g);
        by_rep[idx].emplace_back(c, G.decompose(u, cp.u_spec.basis));
    }
    FiltrationValue best = FiltrationValue::inf();
    for (const auto& [idx, list] : by_rep) {
        FiltrationValue v{cp.weight_cap + 1, false, false};
        for (const auto& [e, w] : cp.monomials) {
            u64 sum = 0;
            for (const auto& [c, alpha] : list) {
                u64 t = c;
                for (std::size_t i = 0; i < alpha.size() && t; ++i) t = t * binom_mod_p(alpha[i], static_cast<u64>(e[i])) % p;
                sum = (sum + t) % p;
            }
            if (sum) {
                v = {w, false, true};
                break;
            }
        }
        if (best.infinite || v.value < best.value || (v.value == best.value && !v.exact)) best = v;
    }
    if (r.tail && (best.infinite || *r.tail <= best.value)) best = {*r.tail, false, false};
    return best;
}

// ---------------------------------------------------------------- Frobenius

FrobeniusLimit frobenius_limit(const IwasawaElement& a, const std::vector<long long>& weights) {
    const std::uint32_t p = a.algebra().p();
    IwasawaElement eps = a.pow(p) - a;
    FiltrationValue v = lazard_value(eps, weights);
    if (!v.infinite && v.value <= 0) throw DomainError("w(a^p - a) must be positive");
    FrobeniusLimit out;
    out.b = a;
    IwasawaElement term = eps;
    while (!term.is_zero()) {
        if (++out.terms > 64) throw PrecisionExhausted("Frobenius series does not terminate at truncation");
        out.b = out.b + term;
        term = term.pow(p);
    }
    out.fixed = out.b.pow(p) == out.b;
    return out;
}

}  // namespace iwa
