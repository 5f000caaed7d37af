#include "iwa/valmat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "iwa/errors.hpp"
#include "iwa/graded.hpp"

namespace iwa {

// ---------------------------------------------------------------- GF(p^k)

namespace {

using Poly = std::vector<std::uint32_t>;  // low degree first

Poly poly_mod(Poly a, const Poly& m, std::uint32_t p) {
    const std::size_t dm = m.size() - 1;
    const std::uint64_t lead_inv = [&] {
        std::uint64_t r = 1, b = m.back() % p;
        for (std::uint32_t e = p - 2; e; e >>= 1) {
            if (e & 1) r = r * b % p;
            b = b * b % p;
        }
        return r;
    }();
    while (a.size() > dm) {
        std::uint64_t c = a.back() * lead_inv % p;
        const std::size_t shift = a.size() - 1 - dm;
        for (std::size_t i = 0; i <= dm; ++i)
            a[shift + i] = static_cast<std::uint32_t>((a[shift + i] + (p - c) * m[i]) % p);
        a.pop_back();
    }
    return a;
}

bool irreducible(const Poly& f, std::uint32_t p) {
    const int k = static_cast<int>(f.size()) - 1;
    for (int deg = 1; deg <= k / 2; ++deg) {
        std::uint64_t count = 1;
        for (int i = 0; i < deg; ++i) count *= p;
        for (std::uint64_t code = 0; code < count; ++code) {
            Poly g(deg + 1, 0);
            std::uint64_t c = code;
            for (int i = 0; i < deg; ++i) {
                g[i] = static_cast<std::uint32_t>(c % p);
                c /= p;
            }
            g[deg] = 1;
            Poly r = poly_mod(f, g, p);
            if (std::all_of(r.begin(), r.end(), [](std::uint32_t x) { return x == 0; })) return false;
        }
    }
    return true;
}

}  // namespace

GaloisField::GaloisField(std::uint32_t p, int k) : p_(p), k_(k) {
    if (k < 1) throw DomainError("extension degree must be positive");
    if (p < 2) throw DomainError("p must be prime");
    std::uint64_t q = 1;
    for (int i = 0; i < k; ++i) {
        q *= p;
        if (q > (1u << 16)) throw DomainError("field too large for table arithmetic");
    }
    q_ = static_cast<std::uint32_t>(q);

    // smallest monic irreducible modulus in code order
    const std::uint64_t count = q;
    for (std::uint64_t code = 0; code < count; ++code) {
        Poly f(k + 1, 0);
        std::uint64_t c = code;
        for (int i = 0; i < k; ++i) {
            f[i] = static_cast<std::uint32_t>(c % p);
            c /= p;
        }
        f[k] = 1;
        if (k > 1 && f[0] == 0) continue;
        if (irreducible(f, p)) {
            modulus_ = f;
            break;
        }
    }

    auto to_poly = [&](Elem a) {
        Poly v(k, 0);
        for (int i = 0; i < k; ++i) {
            v[i] = a % p;
            a /= p;
        }
        return v;
    };
    auto from_poly = [&](const Poly& v) {
        Elem a = 0;
        for (int i = static_cast<int>(v.size()) - 1; i >= 0; --i) a = a * p + v[i];
        return a;
    };
    auto slow_mul = [&](Elem a, Elem b) {
        Poly x = to_poly(a), y = to_poly(b), z(2 * k, 0);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) z[i + j] = static_cast<std::uint32_t>((z[i + j] + std::uint64_t(x[i]) * y[j]) % p);
        Poly r = poly_mod(z, modulus_, p);
        r.resize(k, 0);
        return from_poly(r);
    };
    const std::uint32_t n = q_ - 1;
    for (Elem g = 1; g < q_; ++g) {
        std::vector<Elem> ex(n);
        std::vector<int> lg(q_, -1);
        Elem cur = 1;
        bool ok = true;
        for (std::uint32_t i = 0; i < n; ++i) {
            if (lg[cur] >= 0) {
                ok = false;
                break;
            }
            ex[i] = cur;
            lg[cur] = static_cast<int>(i);
            cur = slow_mul(cur, g);
        }
        if (ok) {
            exp_ = std::move(ex);
            log_ = std::move(lg);
            return;
        }
    }
    throw DomainError("no primitive element found");
}

GaloisField::Elem GaloisField::add(Elem a, Elem b) const {
    if (k_ == 1) return (a + b) % p_;
    Elem out = 0, mult = 1;
    for (int i = 0; i < k_; ++i) {
        out += ((a % p_ + b % p_) % p_) * mult;
        a /= p_;
        b /= p_;
        mult *= p_;
    }
    return out;
}

GaloisField::Elem GaloisField::sub(Elem a, Elem b) const {
    if (k_ == 1) return (a + p_ - b) % p_;
    Elem out = 0, mult = 1;
    for (int i = 0; i < k_; ++i) {
        out += ((a % p_ + p_ - b % p_) % p_) * mult;
        a /= p_;
        b /= p_;
        mult *= p_;
    }
    return out;
}

GaloisField::Elem GaloisField::mul(Elem a, Elem b) const {
    if (!a || !b) return 0;
    return exp_[(static_cast<std::uint64_t>(log_[a]) + log_[b]) % (q_ - 1)];
}

GaloisField::Elem GaloisField::inv(Elem a) const {
    if (!a) throw DomainError("division by zero in F_q");
    return exp_[(q_ - 1 - log_[a]) % (q_ - 1)];
}

GaloisField::Elem GaloisField::pow(Elem a, std::uint64_t n) const {
    if (n == 0) return 1;
    if (!a) return 0;
    return exp_[(static_cast<std::uint64_t>(log_[a]) * (n % (q_ - 1))) % (q_ - 1)];
}

GaloisField::Elem GaloisField::from_int(long long v) const {
    const long long p = p_;
    return static_cast<Elem>(((v % p) + p) % p);
}

std::vector<std::uint32_t> GaloisField::digits(Elem a) const {
    std::vector<std::uint32_t> d(k_);
    for (int i = 0; i < k_; ++i) {
        d[i] = a % p_;
        a /= p_;
    }
    return d;
}

// ---------------------------------------------------------------- Laurent series

namespace {

int sat_add(long long a, long long b) {
    if (a >= LaurentSeries::kExact || b >= LaurentSeries::kExact) return LaurentSeries::kExact;
    long long s = a + b;
    if (s >= LaurentSeries::kExact) return LaurentSeries::kExact;
    return static_cast<int>(s);
}

// least exponent that may carry a nonzero coefficient
long long low_bound(const LaurentSeries& a) {
    if (!a.terms().empty()) return a.terms().begin()->first;
    return a.exact() ? LaurentSeries::kExact : static_cast<long long>(a.exact_to()) + 1;
}

}  // namespace

LaurentSeries LaurentSeries::monomial(FieldPtr F, int exponent, Elem c, LaurentWindow w) {
    LaurentSeries s(std::move(F), w);
    s.set(exponent, c);
    return s;
}

LaurentSeries::Elem LaurentSeries::coeff(int e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? 0 : it->second;
}

void LaurentSeries::set(int e, Elem c) {
    if (e < w_.lo) throw WindowOverflow("exponent " + std::to_string(e) + " below the window");
    if (e > w_.hi || e > exact_to_) return;
    if (c) terms_[e] = c;
    else terms_.erase(e);
}

void LaurentSeries::normalize() {
    for (auto it = terms_.begin(); it != terms_.end();) {
        if (it->second == 0) it = terms_.erase(it);
        else ++it;
    }
    if (!terms_.empty() && terms_.begin()->first < w_.lo)
        throw WindowOverflow("term z^" + std::to_string(terms_.begin()->first) + " below the window");
    bool dropped = false;
    while (!terms_.empty() && terms_.rbegin()->first > std::min(w_.hi, exact_to_)) {
        dropped = dropped || terms_.rbegin()->first > w_.hi;
        terms_.erase(std::prev(terms_.end()));
    }
    if (dropped) exact_to_ = std::min(exact_to_, w_.hi);
    if (!exact()) exact_to_ = std::min(exact_to_, w_.hi);
}

SeriesValue LaurentSeries::valuation() const {
    if (!terms_.empty()) return {terms_.begin()->first, false};
    if (exact()) return {0, true};
    throw WindowOverflow("series vanishes up to z^" + std::to_string(exact_to_) + "; value beyond the window");
}

bool LaurentSeries::is_constant() const {
    return exact() && std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.first == 0; });
}

LaurentSeries LaurentSeries::operator-() const {
    LaurentSeries out = *this;
    for (auto& [e, c] : out.terms_) c = F_->neg(c);
    return out;
}

LaurentSeries operator+(const LaurentSeries& a, const LaurentSeries& b) {
    LaurentSeries out = a;
    out.exact_to_ = std::min(a.exact_to_, b.exact_to_);
    for (const auto& [e, c] : b.terms_) out.terms_[e] = a.F_->add(out.coeff(e), c);
    out.normalize();
    return out;
}

LaurentSeries operator-(const LaurentSeries& a, const LaurentSeries& b) { return a + (-b); }

LaurentSeries operator*(const LaurentSeries& a, const LaurentSeries& b) {
    LaurentSeries out(a.F_, a.w_);
    const long long la = low_bound(a), lb = low_bound(b);
    out.exact_to_ = std::min(sat_add(a.exact_to_, lb), sat_add(b.exact_to_, la));
    const GaloisField& F = *a.F_;
    const long long cap = std::min<long long>(out.exact_to_, a.w_.hi);
    for (const auto& [ea, ca] : a.terms_)
        for (const auto& [eb, cb] : b.terms_) {
            const long long e = static_cast<long long>(ea) + eb;
            if (e < a.w_.lo) throw WindowOverflow("product term z^" + std::to_string(e) + " below the window");
            if (e > cap) {
                if (e > a.w_.hi) out.exact_to_ = std::min(out.exact_to_, a.w_.hi);
                continue;
            }
            auto& slot = out.terms_[static_cast<int>(e)];
            slot = F.add(slot, F.mul(ca, cb));
        }
    out.normalize();
    return out;
}

bool operator==(const LaurentSeries& a, const LaurentSeries& b) {
    const int top = std::min(a.exact_to_, b.exact_to_);
    auto ia = a.terms_.begin(), ib = b.terms_.begin();
    while (true) {
        while (ia != a.terms_.end() && ia->first > top) ia = a.terms_.end();
        while (ib != b.terms_.end() && ib->first > top) ib = b.terms_.end();
        if (ia == a.terms_.end() || ib == b.terms_.end()) return ia == a.terms_.end() && ib == b.terms_.end();
        if (ia->first != ib->first || ia->second != ib->second) return false;
        ++ia;
        ++ib;
    }
}

LaurentSeries LaurentSeries::scaled(Elem c) const {
    LaurentSeries out = *this;
    for (auto& [e, v] : out.terms_) v = F_->mul(v, c);
    out.normalize();
    return out;
}

LaurentSeries LaurentSeries::shifted(int k) const {
    LaurentSeries out(F_, w_);
    out.exact_to_ = exact() ? kExact : exact_to_ + k;
    for (const auto& [e, c] : terms_) {
        if (e + k < w_.lo) throw WindowOverflow("shift leaves the window");
        out.terms_[e + k] = c;
    }
    out.normalize();
    return out;
}

LaurentSeries LaurentSeries::pow(std::uint64_t n) const {
    LaurentSeries result = constant(F_, 1, w_);
    LaurentSeries base = *this;
    while (n) {
        if (n & 1) result = result * base;
        n >>= 1;
        if (n) base = base * base;
    }
    return result;
}

LaurentSeries LaurentSeries::inverse() const {
    if (terms_.empty()) throw DomainError("series is not invertible at window precision");
    const int v = terms_.begin()->first;
    const Elem c0inv = F_->inv(terms_.begin()->second);
    if (-v < w_.lo) throw WindowOverflow("inverse has value " + std::to_string(-v) + " below the window");
    // 1/A for A = z^-v a, known to degree K
    const long long known = exact() ? std::numeric_limits<long long>::max() : static_cast<long long>(exact_to_) - v;
    const long long K = std::min<long long>(known, static_cast<long long>(w_.hi) + v);
    std::vector<Elem> A(K + 1, 0), B(K + 1, 0);
    for (const auto& [e, c] : terms_)
        if (e - v <= K) A[e - v] = c;
    B[0] = c0inv;
    for (long long k = 1; k <= K; ++k) {
        Elem s = 0;
        for (long long i = 1; i <= k; ++i)
            if (A[i] && B[k - i]) s = F_->add(s, F_->mul(A[i], B[k - i]));
        B[k] = F_->neg(F_->mul(c0inv, s));
    }
    LaurentSeries out(F_, w_);
    out.exact_to_ = exact() && terms_.size() == 1 ? kExact : static_cast<int>(K - v);
    for (long long k = 0; k <= K; ++k)
        if (B[k]) out.terms_[static_cast<int>(k - v)] = B[k];
    out.normalize();
    return out;
}

std::string LaurentSeries::to_text() const {
    std::ostringstream os;
    for (const auto& [e, c] : terms_) os << c << ":" << e << "\n";
    if (!exact()) os << "# known to z^" << exact_to_ << "\n";
    return os.str();
}

LaurentSeries LaurentSeries::parse(FieldPtr F, const std::string& text, LaurentWindow w) {
    LaurentSeries s(F, w);
    std::istringstream in(text);
    std::string line;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto colon = line.find(':');
        if (colon == std::string::npos) throw ParseError("line " + std::to_string(ln) + ": expected 'coeff:exponent'");
        long long c = 0, e = 0;
        try {
            std::size_t used = 0;
            c = std::stoll(line.substr(0, colon));
            std::string rest = line.substr(colon + 1);
            e = std::stoll(rest, &used);
            if (rest.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument("tail");
        } catch (const std::exception&) {
            throw ParseError("line " + std::to_string(ln) + ": malformed term");
        }
        if (c < 0 || c >= F->q()) throw ParseError("line " + std::to_string(ln) + ": coefficient outside F_q");
        s.set(static_cast<int>(e), F->add(s.coeff(static_cast<int>(e)), static_cast<Elem>(c)));
    }
    return s;
}

std::optional<std::uint32_t> fp_ratio(const LaurentSeries& num, const LaurentSeries& den) {
    if (den.is_zero()) return std::nullopt;
    const auto& [e, c] = *den.terms().begin();
    const GaloisField& F = den.field();
    const auto beta = F.div(num.coeff(e), c);
    if (!beta || !F.in_prime_field(beta)) return std::nullopt;
    if (!(num == den.scaled(beta))) return std::nullopt;
    return beta;
}

// ---------------------------------------------------------------- matrices

ValuedMatrix::ValuedMatrix(FieldPtr F, int n, LaurentWindow w) : F_(F), n_(n), w_(w), e_(n * n, LaurentSeries(F, w)) {}

ValuedMatrix ValuedMatrix::identity(FieldPtr F, int n, LaurentWindow w) {
    ValuedMatrix m(F, n, w);
    for (int i = 0; i < n; ++i) m.at(i, i) = LaurentSeries::constant(F, 1, w);
    return m;
}

ValuedMatrix ValuedMatrix::scalar(const LaurentSeries& s, int n) {
    ValuedMatrix m(s.field_ptr(), n, s.window());
    for (int i = 0; i < n; ++i) m.at(i, i) = s;
    return m;
}

ValuedMatrix ValuedMatrix::diagonal(const std::vector<LaurentSeries>& entries) {
    if (entries.empty()) throw DomainError("empty diagonal");
    ValuedMatrix m(entries[0].field_ptr(), static_cast<int>(entries.size()), entries[0].window());
    for (int i = 0; i < m.n_; ++i) m.at(i, i) = entries[i];
    return m;
}

ValuedMatrix ValuedMatrix::unit(FieldPtr F, int n, int j, LaurentWindow w) {
    ValuedMatrix m(F, n, w);
    m.at(j, j) = LaurentSeries::constant(F, 1, w);
    return m;
}

ValuedMatrix ValuedMatrix::from_constants(FieldPtr F, const std::vector<std::vector<GaloisField::Elem>>& rows,
                                          LaurentWindow w) {
    const int n = static_cast<int>(rows.size());
    ValuedMatrix m(F, n, w);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.at(i, j) = LaurentSeries::constant(F, rows[i][j], w);
    return m;
}

SeriesValue ValuedMatrix::value() const {
    std::optional<long long> best;
    long long unknown = std::numeric_limits<long long>::max();
    for (const auto& s : e_) {
        if (!s.terms().empty()) {
            long long v = s.terms().begin()->first;
            if (!best || v < *best) best = v;
        } else if (!s.exact()) {
            unknown = std::min<long long>(unknown, static_cast<long long>(s.exact_to()) + 1);
        }
    }
    if (best && *best < unknown) return {*best, false};
    if (!best && unknown == std::numeric_limits<long long>::max()) return {0, true};
    throw WindowOverflow("matrix value lies beyond the window");
}

bool ValuedMatrix::is_zero() const {
    return std::all_of(e_.begin(), e_.end(), [](const LaurentSeries& s) { return s.is_zero(); });
}

bool ValuedMatrix::is_diagonal() const {
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            if (i != j && !at(i, j).is_zero()) return false;
    return true;
}

bool ValuedMatrix::is_constant() const {
    return std::all_of(e_.begin(), e_.end(), [](const LaurentSeries& s) { return s.is_constant(); });
}

ValuedMatrix operator+(const ValuedMatrix& a, const ValuedMatrix& b) {
    ValuedMatrix out = a;
    for (std::size_t i = 0; i < out.e_.size(); ++i) out.e_[i] = a.e_[i] + b.e_[i];
    return out;
}

ValuedMatrix operator-(const ValuedMatrix& a, const ValuedMatrix& b) {
    ValuedMatrix out = a;
    for (std::size_t i = 0; i < out.e_.size(); ++i) out.e_[i] = a.e_[i] - b.e_[i];
    return out;
}

ValuedMatrix operator*(const ValuedMatrix& a, const ValuedMatrix& b) {
    const int n = a.n_;
    ValuedMatrix out(a.F_, n, a.w_);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            LaurentSeries s(a.F_, a.w_);
            for (int k = 0; k < n; ++k) {
                if (a.at(i, k).is_zero() && a.at(i, k).exact()) continue;
                if (b.at(k, j).is_zero() && b.at(k, j).exact()) continue;
                s = s + a.at(i, k) * b.at(k, j);
            }
            out.at(i, j) = s;
        }
    return out;
}

bool operator==(const ValuedMatrix& a, const ValuedMatrix& b) {
    if (a.n_ != b.n_) return false;
    for (std::size_t i = 0; i < a.e_.size(); ++i)
        if (!(a.e_[i] == b.e_[i])) return false;
    return true;
}

ValuedMatrix ValuedMatrix::scaled(const LaurentSeries& s) const {
    ValuedMatrix out = *this;
    for (auto& x : out.e_) x = x * s;
    return out;
}

ValuedMatrix ValuedMatrix::pow(std::uint64_t n) const {
    ValuedMatrix result = identity(F_, n_, w_);
    ValuedMatrix base = *this;
    while (n) {
        if (n & 1) result = result * base;
        n >>= 1;
        if (n) base = base * base;
    }
    return result;
}

namespace {

LaurentSeries det_of(const std::vector<std::vector<LaurentSeries>>& m, const LaurentSeries& zero) {
    const int n = static_cast<int>(m.size());
    if (n == 0) return LaurentSeries::constant(zero.field_ptr(), 1, zero.window());
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    LaurentSeries det = zero;
    do {
        LaurentSeries term = m[0][perm[0]];
        for (int i = 1; i < n; ++i) term = term * m[i][perm[i]];
        det = detail::permutation_sign(perm) > 0 ? det + term : det - term;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return det;
}

}  // namespace

LaurentSeries ValuedMatrix::determinant() const {
    std::vector<std::vector<LaurentSeries>> m(n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) m[i].push_back(at(i, j));
    return det_of(m, LaurentSeries(F_, w_));
}

ValuedMatrix ValuedMatrix::adjugate() const {
    ValuedMatrix out(F_, n_, w_);
    const LaurentSeries zero(F_, w_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) {
            // cofactor C_{ji}: drop row j and column i
            std::vector<std::vector<LaurentSeries>> minor;
            for (int r = 0; r < n_; ++r) {
                if (r == j) continue;
                std::vector<LaurentSeries> row;
                for (int c = 0; c < n_; ++c)
                    if (c != i) row.push_back(at(r, c));
                minor.push_back(std::move(row));
            }
            LaurentSeries d = det_of(minor, zero);
            out.at(i, j) = ((i + j) % 2) ? -d : d;
        }
    return out;
}

ValuedMatrix ValuedMatrix::inverse() const { return adjugate().scaled(determinant().inverse()); }

std::string ValuedMatrix::to_text() const {
    std::ostringstream os;
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            for (const auto& [e, c] : at(i, j).terms()) os << c << ":" << i << "," << j << "," << e << "\n";
    return os.str();
}

ValuedMatrix ValuedMatrix::parse(FieldPtr F, int n, const std::string& text, LaurentWindow w) {
    ValuedMatrix m(F, n, w);
    std::istringstream in(text);
    std::string line;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto colon = line.find(':');
        if (colon == std::string::npos) throw ParseError("line " + std::to_string(ln) + ": expected 'coeff:row,col,exp'");
        long long c = 0;
        std::vector<long long> idx;
        try {
            c = std::stoll(line.substr(0, colon));
            std::string rest = line.substr(colon + 1);
            std::replace(rest.begin(), rest.end(), ',', ' ');
            std::istringstream toks(rest);
            long long v;
            while (toks >> v) idx.push_back(v);
            if (!toks.eof()) throw std::invalid_argument("index");
        } catch (const std::exception&) {
            throw ParseError("line " + std::to_string(ln) + ": malformed entry");
        }
        if (idx.size() != 3 || idx[0] < 0 || idx[0] >= n || idx[1] < 0 || idx[1] >= n)
            throw ParseError("line " + std::to_string(ln) + ": bad matrix position");
        if (c < 0 || c >= F->q()) throw ParseError("line " + std::to_string(ln) + ": coefficient outside F_q");
        auto& s = m.at(static_cast<int>(idx[0]), static_cast<int>(idx[1]));
        s.set(static_cast<int>(idx[2]), F->add(s.coeff(static_cast<int>(idx[2])), static_cast<GaloisField::Elem>(c)));
    }
    return m;
}

// ---------------------------------------------------------------- growth

GrowthEstimate growth_rate(const ValuedMatrix& x, int m_max) {
    GrowthEstimate out;
    const std::uint32_t p = x.field().p();
    ValuedMatrix y = x;
    double scale = 1.0;
    for (int m = 0; m <= m_max; ++m) {
        GrowthEstimate::Entry e;
        e.m = m;
        e.value = y.value();
        if (e.value.infinite) {
            out.entries.push_back(e);
            out.saturated = true;
            break;
        }
        e.rate = static_cast<double>(e.value.value) / scale;
        if (!out.entries.empty() && e.rate + 1e-12 < out.entries.back().rate) out.monotone = false;
        out.entries.push_back(e);
        if (m < m_max) {
            y = y.pow(p);
            scale *= p;
        }
    }
    if (!out.saturated && !out.entries.empty()) out.estimate = out.entries.back().rate;
    return out;
}

// ---------------------------------------------------------------- diagonalization

namespace {

using FMat = std::vector<std::vector<GaloisField::Elem>>;

FMat fmul(const GaloisField& F, const FMat& a, const FMat& b) {
    const std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
    FMat c(n, std::vector<GaloisField::Elem>(m, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < k; ++l) {
            if (!a[i][l]) continue;
            for (std::size_t j = 0; j < m; ++j) c[i][j] = F.add(c[i][j], F.mul(a[i][l], b[l][j]));
        }
    return c;
}

FMat fidentity(std::size_t n) {
    FMat m(n, std::vector<GaloisField::Elem>(n, 0));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

std::vector<int> frref(const GaloisField& F, FMat& a) {
    std::vector<int> piv;
    const int rows = static_cast<int>(a.size());
    const int cols = rows ? static_cast<int>(a[0].size()) : 0;
    int row = 0;
    for (int col = 0; col < cols && row < rows; ++col) {
        int pr = -1;
        for (int i = row; i < rows; ++i)
            if (a[i][col]) {
                pr = i;
                break;
            }
        if (pr < 0) continue;
        std::swap(a[row], a[pr]);
        const auto s = F.inv(a[row][col]);
        for (auto& x : a[row]) x = F.mul(x, s);
        for (int i = 0; i < rows; ++i) {
            if (i == row || !a[i][col]) continue;
            const auto f = a[i][col];
            for (int j = 0; j < cols; ++j) a[i][j] = F.sub(a[i][j], F.mul(f, a[row][j]));
        }
        piv.push_back(col);
        ++row;
    }
    return piv;
}

// kernel vectors as columns
std::vector<std::vector<GaloisField::Elem>> fkernel(const GaloisField& F, FMat a) {
    const int cols = a.empty() ? 0 : static_cast<int>(a[0].size());
    auto piv = frref(F, a);
    std::vector<bool> is_piv(cols, false);
    for (int c : piv) is_piv[c] = true;
    std::vector<std::vector<GaloisField::Elem>> out;
    for (int f = 0; f < cols; ++f) {
        if (is_piv[f]) continue;
        std::vector<GaloisField::Elem> v(cols, 0);
        v[f] = 1;
        for (std::size_t r = 0; r < piv.size(); ++r) v[piv[r]] = F.neg(a[r][f]);
        out.push_back(v);
    }
    return out;
}

FMat finverse(const GaloisField& F, const FMat& a) {
    const std::size_t n = a.size();
    FMat aug(n, std::vector<GaloisField::Elem>(2 * n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) aug[i][j] = a[i][j];
        aug[i][n + i] = 1;
    }
    auto piv = frref(F, aug);
    if (piv.size() < n || piv[n - 1] >= static_cast<int>(n)) throw DomainError("singular matrix over F_q");
    FMat out(n, std::vector<GaloisField::Elem>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out[i][j] = aug[i][n + j];
    return out;
}

// X with B X = C, B of full column rank
FMat fsolve(const GaloisField& F, const FMat& B, const FMat& C) {
    const std::size_t n = B.size(), w = B[0].size(), m = C[0].size();
    FMat aug(n, std::vector<GaloisField::Elem>(w + m));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < w; ++j) aug[i][j] = B[i][j];
        for (std::size_t j = 0; j < m; ++j) aug[i][w + j] = C[i][j];
    }
    frref(F, aug);
    FMat X(w, std::vector<GaloisField::Elem>(m));
    for (std::size_t i = 0; i < w; ++i)
        for (std::size_t j = 0; j < m; ++j) X[i][j] = aug[i][w + j];
    return X;
}

FMat to_fmat(const ValuedMatrix& x) {
    if (!x.is_constant()) throw DomainError("diagonalization needs matrices constant in z");
    FMat m(x.n(), std::vector<GaloisField::Elem>(x.n()));
    for (int i = 0; i < x.n(); ++i)
        for (int j = 0; j < x.n(); ++j) m[i][j] = x.at(i, j).coeff(0);
    return m;
}

bool fdiagonal(const FMat& m) {
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j)
            if (i != j && m[i][j]) return false;
    return true;
}

FMat fpow(const GaloisField& F, FMat a, std::uint64_t n) {
    FMat r = fidentity(a.size());
    while (n) {
        if (n & 1) r = fmul(F, r, a);
        n >>= 1;
        if (n) a = fmul(F, a, a);
    }
    return r;
}

}  // namespace

Diagonalization p_power_diagonalize(const std::vector<ValuedMatrix>& mats) {
    if (mats.empty()) throw DomainError("no matrices");
    FieldPtr Fp = mats[0].field_ptr();
    const GaloisField& F = *Fp;
    const int n = mats[0].n();
    std::vector<FMat> xs;
    for (const auto& m : mats) {
        if (m.n() != n) throw DomainError("matrices differ in size");
        xs.push_back(to_fmat(m));
    }
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = i + 1; j < xs.size(); ++j)
            if (fmul(F, xs[i], xs[j]) != fmul(F, xs[j], xs[i]))
                throw NotCommuting("inputs " + std::to_string(i + 1) + " and " + std::to_string(j + 1) + " do not commute");

    // column bases of common generalized eigenspaces
    std::vector<FMat> spaces{fidentity(n)};
    for (const auto& x : xs) {
        std::vector<FMat> next;
        for (const auto& B : spaces) {
            const std::size_t w = B[0].size();
            FMat R = fsolve(F, B, fmul(F, x, B));
            std::size_t found = 0;
            for (GaloisField::Elem lam = 0; lam < F.q() && found < w; ++lam) {
                FMat S = R;
                for (std::size_t i = 0; i < w; ++i) S[i][i] = F.sub(S[i][i], lam);
                auto K = fkernel(F, fpow(F, S, w));
                if (K.empty()) continue;
                found += K.size();
                FMat Kc(w, std::vector<GaloisField::Elem>(K.size()));
                for (std::size_t c = 0; c < K.size(); ++c)
                    for (std::size_t i = 0; i < w; ++i) Kc[i][c] = K[c][i];
                next.push_back(fmul(F, B, Kc));
            }
            if (found < w) throw EigenvalueFieldTooSmall("characteristic polynomial does not split over F_" +
                                                         std::to_string(F.q()));
        }
        spaces = std::move(next);
    }
    FMat P(n, std::vector<GaloisField::Elem>());
    for (const auto& B : spaces)
        for (int i = 0; i < n; ++i) P[i].insert(P[i].end(), B[i].begin(), B[i].end());
    FMat Pinv = finverse(F, P);

    Diagonalization out;
    std::vector<FMat> ts;
    for (const auto& x : xs) ts.push_back(fmul(F, fmul(F, Pinv, x), P));
    std::uint64_t pm = 1;
    for (out.m0 = 0;; ++out.m0, pm *= F.p()) {
        bool all = true;
        for (const auto& t : ts) all = all && fdiagonal(fpow(F, t, pm));
        if (all) break;
        if (out.m0 > 32) throw DomainError("no p-power of the inputs is diagonal");
    }
    for (const auto& t : ts) {
        FMat tp = fpow(F, t, pm);
        std::vector<GaloisField::Elem> dg(n);
        for (int i = 0; i < n; ++i) dg[i] = tp[i][i];
        out.diagonals.push_back(dg);
    }
    out.a = ValuedMatrix::from_constants(Fp, Pinv, mats[0].window());
    out.a_inverse = ValuedMatrix::from_constants(Fp, P, mats[0].window());
    return out;
}

// ---------------------------------------------------------------- independence

IndependenceResult independent_mod_plus(const std::vector<ValuedMatrix>& d_list, long long mu) {
    if (d_list.empty()) throw DomainError("empty list");
    bool attained = false;
    for (const auto& d : d_list) {
        if (!d.is_diagonal()) throw DomainError("independence mod mu^+ expects diagonal matrices");
        SeriesValue v = d.value();
        if (!v.infinite && v.value < mu) throw DomainError("an input has value below mu");
        attained = attained || (!v.infinite && v.value == mu);
    }
    if (!attained) throw DomainError("no input attains the value mu");
    const int r = static_cast<int>(d_list.size());
    const std::uint32_t p = d_list[0].field().p();
    IndependenceResult out;
    for (int lead = 0; lead < r; ++lead) {
        std::vector<std::uint32_t> alpha(r, 0);
        alpha[lead] = 1;
        std::uint64_t total = 1;
        for (int k = lead + 1; k < r; ++k) total *= p;
        for (std::uint64_t code = 0; code < total; ++code) {
            std::uint64_t c = code;
            for (int k = r - 1; k > lead; --k) {
                alpha[k] = static_cast<std::uint32_t>(c % p);
                c /= p;
            }
            ValuedMatrix s(d_list[0].field_ptr(), d_list[0].n(), d_list[0].window());
            for (int i = 0; i < r; ++i)
                if (alpha[i]) s = s + d_list[i].scaled(LaurentSeries::constant(s.field_ptr(), alpha[i], s.window()));
            SeriesValue v = s.value();
            if (v.infinite || v.value > mu) {
                out.independent = false;
                out.witness = alpha;
                return out;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------- elimination

namespace {

std::string vec_text(const std::vector<std::uint32_t>& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s + ")";
}

long long ipow_ll(long long b, int e) {
    long long r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

}  // namespace

EliminationResult elimination_harness(const EliminationInstance& inst) {
    EliminationResult out;
    Report& rep = out.report;
    rep.suite = "elimination";
    const int r = inst.r();
    const int n = inst.n;
    const std::uint32_t p = inst.F->p();
    if (r < 1 || static_cast<int>(inst.a.size()) != r) throw InstanceInvalid("need matching d and a lists");
    if (inst.j < 0 || inst.j >= n) throw InstanceInvalid("j out of range");
    if (inst.m_hi < inst.m_lo || inst.m_lo < 0) throw InstanceInvalid("bad m range");
    if (static_cast<int>(inst.tail.size()) != inst.m_hi - inst.m_lo + r)
        throw InstanceInvalid("tail must cover m_lo .. m_hi + r - 1");
    for (const auto& d : inst.d)
        if (d.n() != n || !d.is_diagonal()) throw InstanceInvalid("d_i must be diagonal n x n");
    for (const auto& a : inst.a)
        if (a.n() != n) throw InstanceInvalid("a_i must be n x n");

    // the supplied expansion must vanish
    for (int m = inst.m_lo; m <= inst.m_hi + r - 1; ++m) {
        ValuedMatrix s = inst.tail[m - inst.m_lo];
        for (int i = 0; i < r; ++i) s = s + inst.d[i].pow(ipow_ll(p, m)) * inst.a[i];
        if (!s.is_zero()) throw InstanceInvalid("expansion does not vanish at m = " + std::to_string(m));
    }
    rep.add("expansion", "0 = sum d_i^{p^m} a_i + O(a q^{p^m})", true,
            "m=" + std::to_string(inst.m_lo) + ".." + std::to_string(inst.m_hi + r - 1));

    std::vector<LaurentSeries> dj;
    std::vector<ValuedMatrix> dj_mats;
    for (const auto& d : inst.d) {
        dj.push_back(d.at(inst.j, inst.j));
        dj_mats.push_back(ValuedMatrix::diagonal({d.at(inst.j, inst.j)}));
    }
    IndependenceResult ind;
    try {
        ind = independent_mod_plus(dj_mats, inst.lambda);
    } catch (const DomainError& e) {
        ind.independent = false;
    }
    if (!ind.independent) {
        auto& rec = rep.add("independence", "j-th entries F_p-independent mod lambda^+", true,
                            "independence precondition fails", ind.witness.empty() ? "" : vec_text(ind.witness));
        rec.status = Status::Skipped;
        return out;
    }
    out.precondition = true;
    rep.add("independence", "j-th entries F_p-independent mod lambda^+", true, "j=" + std::to_string(inst.j + 1));

    MooreResult<LaurentSeries> moore = moore_identity(dj);
    rep.add("moore", "Delta = beta prod over P^{r-1}(F_p)", moore.pass, "beta=" + std::to_string(moore.beta));
    const LaurentSeries& Delta = moore.determinant;
    const long long moore_len = (ipow_ll(p, r) - 1) / static_cast<long long>(p - 1);
    SeriesValue vdelta = Delta.valuation();
    rep.add("delta-value", "v(delta) = (p^r - 1)/(p - 1) lambda", !vdelta.infinite && vdelta.value == moore_len * inst.lambda,
            vdelta.to_string());

    bool adj_ok = true, det_ok = true, cramer_ok = true, growth_ok = true;
    std::string adj_w, cramer_w;
    std::vector<std::vector<SeriesValue>> rec_values(r);
    bool final_zero = true;
    for (int m = inst.m_lo; m <= inst.m_hi; ++m) {
        ValuedMatrix D(inst.F, r, inst.window);
        for (int k = 0; k < r; ++k)
            for (int i = 0; i < r; ++i) D.at(k, i) = dj[i].pow(ipow_ll(p, m + k));
        LaurentSeries det = D.determinant();
        LaurentSeries dpow = Delta.pow(ipow_ll(p, m));
        det_ok = det_ok && det == dpow;
        ValuedMatrix adj = D.adjugate();
        for (int i = 0; i < r; ++i)
            for (int k = 0; k < r; ++k) {
                const long long bound = moore_len * ipow_ll(p, m) * inst.lambda - ipow_ll(p, m + k) * inst.lambda;
                SeriesValue v = adj.at(i, k).valuation();
                if (!v.infinite && v.value < bound) {
                    adj_ok = false;
                    if (adj_w.empty())
                        adj_w = "m=" + std::to_string(m) + " entry (" + std::to_string(i + 1) + "," +
                                std::to_string(k + 1) + ") value " + v.to_string() + " < " + std::to_string(bound);
                }
            }
        LaurentSeries dinv = dpow.inverse();
        for (int i = 0; i < r; ++i) {
            // e_j a_i = -delta^{-p^m} sum_k adj_{ik} e_j E_{m+k}
            bool row_zero = true;
            std::optional<long long> vmin;
            for (int c = 0; c < n; ++c) {
                LaurentSeries eps(inst.F, inst.window);
                for (int k = 0; k < r; ++k) eps = eps + adj.at(i, k) * inst.tail[m + k - inst.m_lo].at(inst.j, c);
                LaurentSeries recovered = -(dinv * eps);
                if (!(recovered == inst.a[i].at(inst.j, c))) {
                    cramer_ok = false;
                    if (cramer_w.empty())
                        cramer_w = "m=" + std::to_string(m) + " i=" + std::to_string(i + 1) + " col " + std::to_string(c + 1);
                }
                if (!recovered.is_zero()) {
                    row_zero = false;
                    long long v = recovered.terms().begin()->first;
                    vmin = vmin ? std::min(*vmin, v) : v;
                }
            }
            rec_values[i].push_back(row_zero ? SeriesValue{0, true} : SeriesValue{*vmin, false});
            if (m == inst.m_hi) final_zero = final_zero && row_zero;
        }
    }
    for (const auto& vals : rec_values)
        for (std::size_t k = 1; k < vals.size(); ++k)
            if (!vals[k].infinite && (vals[k - 1].infinite || vals[k].value < vals[k - 1].value)) growth_ok = false;

    rep.add("det-frobenius", "det(D_m) = Delta^{p^m}", det_ok);
    rep.add("adjugate-bound", "v(adj(D_m)_{ij}) >= (p^r-1)/(p-1) p^m lambda - p^{m+j-1} lambda", adj_ok, "", adj_w);
    rep.add("cramer", "recovered row matches the instance", cramer_ok, "", cramer_w);
    rep.add("error-decay", "v(delta^{-p^m} eps_{i,m}) non-decreasing in m", growth_ok);
    out.recovered = final_zero;
    rep.add("annihilation", "e_j a_i = 0", final_zero, final_zero ? "all rows zero at window precision" : "nonzero row");
    return out;
}

std::string EliminationInstance::to_text() const {
    std::ostringstream os;
    os << "p = " << F->p() << "\nk = " << F->k() << "\nwindow = " << window.lo << " " << window.hi << "\nn = " << n
       << "\nj = " << j + 1 << "\nlambda = " << lambda << "\nm = " << m_lo << " " << m_hi << "\n";
    for (std::size_t i = 0; i < d.size(); ++i) os << "[d " << i + 1 << "]\n" << d[i].to_text();
    for (std::size_t i = 0; i < a.size(); ++i) os << "[a " << i + 1 << "]\n" << a[i].to_text();
    for (std::size_t i = 0; i < tail.size(); ++i) os << "[tail " << m_lo + static_cast<int>(i) << "]\n" << tail[i].to_text();
    return os.str();
}

EliminationInstance EliminationInstance::parse(const std::string& text) {
    EliminationInstance inst;
    std::istringstream in(text);
    std::string line;
    int ln = 0;
    long long p = 0, k = 1;
    std::string section;
    int index = 0;
    std::map<std::pair<std::string, int>, std::string> blocks;
    auto fail = [&](const std::string& msg) { throw ParseError("line " + std::to_string(ln) + ": " + msg); };
    while (std::getline(in, line)) {
        ++ln;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (line[0] == '[') {
            std::istringstream hs(line.substr(1, line.find(']') - 1));
            if (!(hs >> section >> index) || (section != "d" && section != "a" && section != "tail"))
                fail("bad section header");
            blocks[{section, index}];
            continue;
        }
        if (!section.empty()) {
            blocks[{section, index}] += line + "\n";
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        std::string key = line.substr(0, eq);
        key.erase(std::remove_if(key.begin(), key.end(), ::isspace), key.end());
        std::istringstream vs(line.substr(eq + 1));
        bool ok = true;
        if (key == "p") ok = static_cast<bool>(vs >> p);
        else if (key == "k") ok = static_cast<bool>(vs >> k);
        else if (key == "window") ok = static_cast<bool>(vs >> inst.window.lo >> inst.window.hi);
        else if (key == "n") ok = static_cast<bool>(vs >> inst.n);
        else if (key == "j") {
            ok = static_cast<bool>(vs >> inst.j);
            inst.j -= 1;
        } else if (key == "lambda") ok = static_cast<bool>(vs >> inst.lambda);
        else if (key == "m") ok = static_cast<bool>(vs >> inst.m_lo >> inst.m_hi);
        else fail("unknown key '" + key + "'");
        if (!ok) fail("bad value for " + key);
    }
    if (p < 2 || k < 1 || inst.n < 1) throw ParseError("missing p, k or n");
    inst.F = GaloisField::make(static_cast<std::uint32_t>(p), static_cast<int>(k));
    for (const auto& [key, body] : blocks) {
        ValuedMatrix m = ValuedMatrix::parse(inst.F, inst.n, body, inst.window);
        const auto& [name, idx] = key;
        auto& list = name == "d" ? inst.d : name == "a" ? inst.a : inst.tail;
        const int pos = name == "tail" ? idx - inst.m_lo : idx - 1;
        if (pos < 0) throw ParseError("section index out of range");
        if (static_cast<int>(list.size()) <= pos) list.resize(pos + 1, ValuedMatrix(inst.F, inst.n, inst.window));
        list[pos] = m;
    }
    return inst;
}

EliminationInstance planted_instance(const PlantedOptions& opt, std::mt19937_64& rng) {
    EliminationInstance inst;
    const int r = opt.r;
    inst.F = GaloisField::make(opt.p, std::max(r, 1));
    const GaloisField& F = *inst.F;
    inst.n = opt.n;
    inst.lambda = opt.lambda;
    inst.j = static_cast<int>(rng() % opt.n);
    const auto w = inst.window;
    const int lam = static_cast<int>(opt.lambda);

    // leading coefficients of the j-th entries
    std::vector<GaloisField::Elem> lead;
    auto rank_of = [&](const std::vector<GaloisField::Elem>& v) {
        std::vector<std::vector<std::uint32_t>> rows;
        for (auto x : v) rows.push_back(F.digits(x));
        GaloisField Fp(opt.p, 1);
        FMat m(rows.begin(), rows.end());
        return static_cast<int>(frref(Fp, m).size());
    };
    const int free = opt.dependent ? r - 1 : r;
    do {
        lead.clear();
        for (int i = 0; i < free; ++i) lead.push_back(F.random(rng));
    } while (rank_of(lead) < free);
    if (opt.dependent) {
        GaloisField::Elem c = 0;
        bool any = false;
        for (int i = 0; i < free; ++i) {
            auto a = static_cast<std::uint32_t>(rng() % opt.p);
            any = any || a;
            c = F.add(c, F.mul(a, lead[i]));
        }
        if (!any && !lead.empty()) c = lead[0];
        lead.push_back(c);
    }

    for (int i = 0; i < r; ++i) {
        std::vector<LaurentSeries> diag;
        for (int k = 0; k < opt.n; ++k) {
            LaurentSeries s(inst.F, w);
            if (k == inst.j) {
                s.set(lam, lead[i]);
            } else {
                GaloisField::Elem c = 0;
                while (!c) c = F.random(rng);
                s.set(lam + opt.gap, c);
            }
            const int hi = (k == inst.j ? lam : lam + opt.gap) + 1;
            s.set(hi, F.random(rng));
            diag.push_back(s);
        }
        inst.d.push_back(ValuedMatrix::diagonal(diag));

        ValuedMatrix a(inst.F, opt.n, w);
        for (int row = 0; row < opt.n; ++row) {
            if (row == inst.j) continue;
            for (int col = 0; col < opt.n; ++col) {
                auto& s = a.at(row, col);
                s.set(static_cast<int>(rng() % 2), F.random(rng));
                s.set(3, F.random(rng));
            }
        }
        inst.a.push_back(a);
    }

    // largest m_hi keeping powers and the inverse of Delta^{p^m} in the window
    const long long moore_len = (ipow_ll(opt.p, r) - 1) / static_cast<long long>(opt.p - 1);
    inst.m_lo = 0;
    inst.m_hi = 0;
    for (int m = 1; m < 8; ++m) {
        const long long top = ipow_ll(opt.p, m + r - 1) * (lam + opt.gap + 1) + 3;
        const long long bottom = -ipow_ll(opt.p, m) * moore_len * lam;
        if (top > w.hi || bottom < w.lo) break;
        inst.m_hi = m;
    }
    for (int m = inst.m_lo; m <= inst.m_hi + r - 1; ++m) {
        ValuedMatrix s(inst.F, opt.n, w);
        for (int i = 0; i < r; ++i) s = s + inst.d[i].pow(ipow_ll(opt.p, m)) * inst.a[i];
        ValuedMatrix neg(inst.F, opt.n, w);
        inst.tail.push_back(neg - s);
    }
    return inst;
}

}  // namespace iwa
