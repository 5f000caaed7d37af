#include "iwa/group.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "iwa/errors.hpp"

namespace iwa {

// ---------------------------------------------------------------- descriptor

namespace {

bool is_prime(std::uint32_t p) {
    if (p < 2) return false;
    for (std::uint32_t q = 2; q * q <= p; ++q)
        if (p % q == 0) return false;
    return true;
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

long long parse_integer(const std::string& tok, int line) {
    try {
        size_t used = 0;
        long long v = std::stoll(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line) + ": expected an integer, got '" + tok + "'");
    }
}

}  // namespace

std::string GroupDescriptor::to_text() const {
    std::ostringstream os;
    os << "# iwa group descriptor v1\n";
    os << "p = " << p << "\n";
    os << "d = " << d << "\n";
    os << "eps = " << eps << "\n";
    os << "precision = " << precision << "\n";
    os << "M =";
    for (long long v : m) os << " " << v;
    os << "\n";
    return os.str();
}

GroupDescriptor GroupDescriptor::parse(const std::string& text) {
    GroupDescriptor g;
    bool have_p = false, have_d = false, have_eps = false, have_prec = false, have_m = false;
    int m_line = 0;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = trim(raw.substr(0, raw.find('#')));
        if (s.empty()) continue;
        size_t eq = s.find('=');
        if (eq == std::string::npos) throw ParseError("line " + std::to_string(line) + ": expected 'key = value'");
        std::string key = trim(s.substr(0, eq));
        std::string val = trim(s.substr(eq + 1));
        if (val.empty()) throw ParseError("line " + std::to_string(line) + ": missing value for '" + key + "'");
        if (key == "p") {
            long long v = parse_integer(val, line);
            if (v < 2 || v > 1000003 || !is_prime(static_cast<std::uint32_t>(v)))
                throw ParseError("line " + std::to_string(line) + ": p must be a prime");
            g.p = static_cast<std::uint32_t>(v);
            have_p = true;
        } else if (key == "d") {
            long long v = parse_integer(val, line);
            if (v < 1 || v > 16) throw ParseError("line " + std::to_string(line) + ": d must be in 1..16");
            g.d = static_cast<int>(v);
            have_d = true;
        } else if (key == "eps") {
            long long v = parse_integer(val, line);
            if (v < 1 || v > 64) throw ParseError("line " + std::to_string(line) + ": eps must be in 1..64");
            g.eps = static_cast<int>(v);
            have_eps = true;
        } else if (key == "precision") {
            long long v = parse_integer(val, line);
            if (v < 1 || v > 62) throw ParseError("line " + std::to_string(line) + ": precision must be in 1..62");
            g.precision = static_cast<int>(v);
            have_prec = true;
        } else if (key == "M") {
            std::string cleaned = val;
            std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
            std::istringstream toks(cleaned);
            std::string tok;
            g.m.clear();
            while (toks >> tok) g.m.push_back(parse_integer(tok, line));
            have_m = true;
            m_line = line;
        } else {
            throw ParseError("line " + std::to_string(line) + ": unknown key '" + key + "'");
        }
    }
    if (!have_p) throw ParseError("missing key 'p'");
    if (!have_d) throw ParseError("missing key 'd'");
    if (!have_eps) throw ParseError("missing key 'eps'");
    if (!have_prec) throw ParseError("missing key 'precision'");
    if (!have_m) throw ParseError("missing key 'M'");
    if (g.m.size() != static_cast<size_t>(g.d) * g.d)
        throw ParseError("line " + std::to_string(m_line) + ": M needs " + std::to_string(g.d * g.d) + " entries, got " +
                         std::to_string(g.m.size()));
    if (g.p == 2 && g.eps < 2) throw ParseError("p = 2 requires eps >= 2");
    if (g.precision > max_precision(g.p)) throw ParseError("precision too large for p");
    return g;
}

GroupDescriptor GroupDescriptor::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void GroupDescriptor::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << to_text();
}

long long exp_p_truncated(std::uint32_t p, int precision) {
    if (p == 2) throw DomainError("exp(2) does not converge in Z_2");
    PAdicMatrix x = PAdicMatrix::from_integers(p, precision, 1, 1, {static_cast<long long>(p)});
    return static_cast<long long>(matrix_exp(x, 1).residue(0, 0));
}

GroupDescriptor remark_group_descriptor(std::uint32_t p, int precision) {
    long long r = exp_p_truncated(p, precision);
    GroupDescriptor g;
    g.p = p;
    g.d = 2;
    g.eps = 1;
    g.precision = precision;
    // columns are the images of Y and Z
    g.m = {r, r, 0, r};
    return g;
}

GroupDescriptor diagonal_group_descriptor(std::uint32_t p, int precision) {
    GroupDescriptor g;
    g.p = p;
    g.d = 2;
    g.eps = p == 2 ? 2 : 1;
    g.precision = precision;
    long long pp = static_cast<long long>(p);
    g.m = {1 + pp, 0, 0, 1 + pp * pp};
    return g;
}

// ---------------------------------------------------------------- elements

std::string GroupElement::to_string() const {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < a.size(); ++i) os << (i ? "," : "") << a[i].centered();
    os << " | " << b.centered() << ")";
    return os.str();
}

bool operator<(const GroupElement& x, const GroupElement& y) {
    for (size_t i = 0; i < std::min(x.a.size(), y.a.size()); ++i)
        if (x.a[i].residue() != y.a[i].residue()) return x.a[i].residue() < y.a[i].residue();
    if (x.a.size() != y.a.size()) return x.a.size() < y.a.size();
    return x.b.residue() < y.b.residue();
}

std::string OmegaValue::to_string() const {
    long long g = std::gcd(num, den);
    if (g == 0) g = 1;
    std::ostringstream os;
    if (!exact) os << ">=";
    os << num / g;
    if (den / g != 1) os << "/" << den / g;
    return os.str();
}

// ---------------------------------------------------------------- group

Group::Group(const GroupDescriptor& desc) : desc_(desc) {
    check_eps(desc.p, desc.eps);
    if (desc.m.size() != static_cast<size_t>(desc.d) * desc.d) throw DomainError("M has the wrong number of entries");
    m_ = PAdicMatrix::from_integers(desc.p, desc.precision, desc.d, desc.d, desc.m);
    if (!m_.determinant().is_unit()) throw DomainError("M is not invertible over Z_p");
    abelian_ = m_.is_identity();
    PAdicMatrix mp = m_;
    c_ = 0;
    while (!mp.congruent_identity(desc.eps)) {
        if (++c_ > 64) throw DomainError("no p-power of M is congruent to I mod p^eps (action not pro-p)");
        mp = mp.pow(desc.p);
    }
    lambda_hi_ = lambda_at(std::min(max_precision(desc.p), desc.precision + c_ + 2));
    lambda_ = lambda_hi_.reduced(desc.precision);
    powers_.resize(desc.precision);
    PAdicMatrix base = m_;
    for (int k = 0; k < desc.precision; ++k) {
        powers_[k].push_back(PAdicMatrix::identity(desc.p, desc.precision, desc.d));
        for (std::uint32_t j = 1; j < desc.p; ++j) powers_[k].push_back(powers_[k].back() * base);
        base = powers_[k].back() * base;
    }
}

PAdicMatrix Group::lambda_at(int W) const {
    if (W > max_precision(p())) throw PrecisionExhausted("requested precision exceeds word size");
    PAdicMatrix m = PAdicMatrix::from_integers(p(), W, d(), d(), desc_.m);
    return matrix_log(m.pow(ipow(p(), c_)), eps());
}

int Group::initial_power() const {
    if (abelian_) throw DomainError("initial power is undefined for an abelian group");
    PVal v = lambda_.min_valuation();
    if (v.saturated) throw PrecisionExhausted("log of the action vanishes at precision");
    return std::max(0, c_ - v.value);
}

PAdicMatrix Group::action(const PAdicScalar& b) const {
    const int N = precision();
    const int nb = std::min(b.precision(), N);
    PAdicMatrix result = PAdicMatrix::identity(p(), N, d());
    u64 r = b.residue();
    for (int k = 0; k < nb; ++k) {
        std::uint32_t j = static_cast<std::uint32_t>(r % p());
        r /= p();
        if (j) result = result * powers_[k][j];
    }
    int out = std::min(N, nb + eps() - c_);
    return result.reduced(std::max(out, 0));
}

GroupElement Group::identity() const {
    GroupElement g;
    g.a.assign(d(), PAdicScalar::zero(p(), precision()));
    g.b = PAdicScalar::zero(p(), precision());
    return g;
}

GroupElement Group::h_element(const std::vector<PAdicScalar>& coords) const {
    if (static_cast<int>(coords.size()) != d()) throw DomainError("H element needs d coordinates");
    GroupElement g;
    g.a = coords;
    g.b = PAdicScalar::zero(p(), precision());
    return g;
}

GroupElement Group::h_element(const std::vector<long long>& coords) const {
    std::vector<PAdicScalar> c;
    for (long long v : coords) c.push_back(scalar(v));
    return h_element(c);
}

GroupElement Group::x_power(const PAdicScalar& b) const {
    GroupElement g = identity();
    g.b = b;
    return g;
}

GroupElement Group::generator(int i) const {
    if (i < 0 || i > d()) throw DomainError("generator index out of range");
    if (i == d()) return x_power(scalar(1));
    GroupElement g = identity();
    g.a[i] = scalar(1);
    return g;
}

GroupElement Group::multiply(const GroupElement& g, const GroupElement& h) const {
    PAdicMatrix A = action(g.b);
    std::vector<PAdicScalar> moved = A.apply(h.a);
    GroupElement out;
    out.a.reserve(d());
    for (int i = 0; i < d(); ++i) out.a.push_back(g.a[i] + moved[i]);
    out.b = g.b + h.b;
    return out;
}

GroupElement Group::inverse(const GroupElement& g) const {
    GroupElement out;
    out.b = -g.b;
    std::vector<PAdicScalar> moved = action(out.b).apply(g.a);
    for (auto& x : moved) out.a.push_back(-x);
    return out;
}

GroupElement Group::power(const GroupElement& g, u64 n) const {
    GroupElement result = identity();
    GroupElement base = g;
    while (n) {
        if (n & 1) result = multiply(result, base);
        n >>= 1;
        if (n) base = multiply(base, base);
    }
    return result;
}

GroupElement Group::power(const GroupElement& g, const PAdicScalar& alpha) const {
    GroupElement out = power(g, alpha.residue());
    if (alpha.precision() < precision()) {
        for (auto& x : out.a) x = x.reduced(alpha.precision());
        out.b = out.b.reduced(alpha.precision());
    }
    return out;
}

GroupElement Group::commutator(const GroupElement& g, const GroupElement& h) const {
    return multiply(multiply(g, h), multiply(inverse(g), inverse(h)));
}

GroupElement Group::conjugate(const GroupElement& g, const GroupElement& h) const {
    return multiply(multiply(g, h), inverse(g));
}

bool Group::is_identity(const GroupElement& g) const {
    return g.b.is_zero() && std::all_of(g.a.begin(), g.a.end(), [](const PAdicScalar& x) { return x.is_zero(); });
}

bool Group::equal(const GroupElement& g, const GroupElement& h) const {
    if (!g.b.equals(h.b)) return false;
    for (int i = 0; i < d(); ++i)
        if (!g.a[i].equals(h.a[i])) return false;
    return true;
}

GroupElement Group::u_map(const GroupElement& h, int m) const {
    if (!h.in_h()) throw DomainError("u_map is defined on H only");
    const int N = precision();
    if (m >= c_) {
        std::vector<PAdicScalar> y = lambda_.apply(h.a);
        for (auto& x : y) x = x.mul_p_power(m - c_);
        return h_element(y);
    }
    // Lambda * a is known to N + vmin(Lambda) digits; dividing by p^{c-m}
    // costs c - m of them.
    const int k = c_ - m;
    PVal vmin = lambda_.min_valuation();
    const int known = std::min(lambda_hi_.precision(), N + (vmin.saturated ? N : vmin.value));
    std::vector<PAdicScalar> lifted;
    for (const auto& x : h.a) lifted.push_back(x.lifted(lambda_hi_.precision()));
    std::vector<PAdicScalar> y = lambda_hi_.apply(lifted);
    const int in_prec = h.a.empty() ? N : h.a[0].precision();
    for (auto& x : y) {
        x = x.reduced(known - (N - in_prec));
        PVal v = x.valuation();
        if (!v.saturated && v.value < k)
            throw DomainError("u_" + std::to_string(m) + " is not integral here; m is below the initial power");
        x = x.div_p_power(k).reduced(N);
    }
    return h_element(y);
}

std::vector<PAdicScalar> Group::decompose(const GroupElement& g, const std::vector<GroupElement>& basis) const {
    const int n = static_cast<int>(basis.size());
    bool h_part_ok = n >= d();
    for (int i = 0; i < d() && i < n; ++i) h_part_ok = h_part_ok && basis[i].in_h();
    const bool with_x = n == d() + 1 && h_part_ok && !basis[d()].b.is_zero();
    const bool h_only = n == d() && h_part_ok;
    if (!with_x && !h_only) return decompose_generic(g, basis);

    std::vector<PAdicScalar> alpha;
    GroupElement rest = g;
    PAdicScalar ax = PAdicScalar::zero(p(), precision());
    if (with_x) {
        const PAdicScalar& bx = basis[d()].b;
        PVal vg = g.b.valuation(), vx = bx.valuation();
        if (!vg.saturated && vg.value < vx.value)
            throw NotInSubgroup("X-exponent " + std::to_string(g.b.centered()) + " is not a multiple of the last basis element");
        ax = g.b.is_zero() ? PAdicScalar::zero(p(), precision() - vx.value) : g.b.divide(bx);
        rest = multiply(g, inverse(power(basis[d()], ax)));
    } else if (!g.in_h()) {
        throw NotInSubgroup("element is not in H");
    }
    std::vector<std::vector<PAdicScalar>> cols;
    for (int i = 0; i < d(); ++i) cols.push_back(basis[i].a);
    PAdicMatrix A = PAdicMatrix::from_columns(cols);
    std::optional<std::vector<PAdicScalar>> sol;
    try {
        sol = solve_linear(A, rest.a);
    } catch (const DomainError&) {
        throw NotABasis("H-part of the basis is singular");
    }
    if (!sol) throw NotInSubgroup("element " + g.to_string() + " is not in the span of the basis");
    alpha = *sol;
    if (with_x) alpha.push_back(ax);
    return alpha;
}

std::vector<PAdicScalar> Group::decompose_generic(const GroupElement& g, const std::vector<GroupElement>& basis) const {
    const int n = static_cast<int>(basis.size());
    const int N = precision();
    std::vector<PAdicScalar> alpha(n, PAdicScalar::zero(p(), N));
    auto close_mod = [&](const GroupElement& x, int k) {
        for (int i = 0; i < d(); ++i)
            if (!x.a[i].reduced(k).equals(g.a[i].reduced(k))) return false;
        return x.b.reduced(k).equals(g.b.reduced(k));
    };
    u64 combos = ipow(p(), n);
    for (int k = 0; k < N; ++k) {
        bool found = false;
        for (u64 c = 0; c < combos && !found; ++c) {
            std::vector<PAdicScalar> trial = alpha;
            u64 t = c;
            for (int i = 0; i < n; ++i) {
                trial[i] = trial[i] + scalar(static_cast<long long>(t % p())).mul_p_power(k);
                t /= p();
            }
            if (close_mod(compose(trial, basis), k + 1)) {
                alpha = trial;
                found = true;
            }
        }
        if (!found) throw NotABasis("successive approximation stalled at digit " + std::to_string(k));
    }
    return alpha;
}

GroupElement Group::compose(const std::vector<PAdicScalar>& alpha, const std::vector<GroupElement>& basis) const {
    if (alpha.size() != basis.size()) throw DomainError("exponent count does not match basis");
    GroupElement g = identity();
    for (size_t i = 0; i < basis.size(); ++i) g = multiply(g, power(basis[i], alpha[i]));
    return g;
}

PAdicScalar Group::random_scalar(std::mt19937_64& rng) const {
    u64 mod = ipow(p(), precision());
    return PAdicScalar::from_residue(p(), precision(), rng() % mod);
}

GroupElement Group::random_h_element(std::mt19937_64& rng) const {
    GroupElement g = identity();
    for (auto& x : g.a) x = random_scalar(rng);
    return g;
}

GroupElement Group::random_element(std::mt19937_64& rng) const {
    GroupElement g = random_h_element(rng);
    g.b = random_scalar(rng);
    return g;
}

// ---------------------------------------------------------------- valuations

OmegaValue omega_value(const Group& G, const GroupElement& g, const PValuationSpec& spec) {
    std::vector<PAdicScalar> alpha = G.decompose(g, spec.basis);
    bool have_exact = false, have_bound = false;
    long long exact_min = 0, bound_min = 0;
    for (size_t i = 0; i < alpha.size(); ++i) {
        PVal v = alpha[i].valuation();
        long long val = static_cast<long long>(v.value) * spec.e + spec.numerators[i];
        if (v.saturated) {
            if (!have_bound || val < bound_min) bound_min = val;
            have_bound = true;
        } else {
            if (!have_exact || val < exact_min) exact_min = val;
            have_exact = true;
        }
    }
    OmegaValue out;
    out.den = spec.e;
    if (have_exact && (!have_bound || exact_min <= bound_min)) {
        out.num = exact_min;
        out.exact = true;
    } else {
        out.num = bound_min;
        out.exact = false;
    }
    return out;
}

namespace {

enum class Tri { True, False, Unknown };

// Values share the denominator e.
Tri greater_equal(const OmegaValue& lhs, const OmegaValue& rhs, long long slack = 0) {
    // lhs >= rhs + slack ?
    long long target = rhs.num + slack;
    if (rhs.exact) {
        if (lhs.num >= target) return Tri::True;
        return lhs.exact ? Tri::False : Tri::Unknown;
    }
    if (lhs.exact && lhs.num < target) return Tri::False;
    return Tri::Unknown;
}

OmegaValue min_value(const OmegaValue& a, const OmegaValue& b) {
    if (a.exact && b.exact) return a.num <= b.num ? a : b;
    if (a.exact && a.num <= b.num) return a;
    if (b.exact && b.num <= a.num) return b;
    OmegaValue out = a;
    out.num = std::min(a.num, b.num);
    out.exact = false;
    return out;
}

OmegaValue sum_value(const OmegaValue& a, const OmegaValue& b) {
    OmegaValue out = a;
    out.num = a.num + b.num;
    out.exact = a.exact && b.exact;
    return out;
}

struct AxiomTally {
    AxiomTally(std::string i, std::string a) : id(std::move(i)), anchor(std::move(a)) {}
    std::string id;
    std::string anchor;
    long checked = 0, unknown = 0, failed = 0;
    std::string witness;

    void note(Tri t, const std::string& w) {
        ++checked;
        if (t == Tri::Unknown) ++unknown;
        if (t == Tri::False) {
            ++failed;
            if (witness.empty()) witness = w;
        }
    }
};

}  // namespace

Report validate_p_valuation(const Group& G, const PValuationSpec& spec, int samples, std::uint64_t seed) {
    Report rep;
    rep.suite = "p-valuation";
    const long long e = spec.e;
    const std::uint32_t p = G.p();

    bool range_ok = true;
    std::string range_witness;
    for (size_t i = 0; i < spec.numerators.size(); ++i) {
        if (spec.numerators[i] * static_cast<long long>(p - 1) <= e) {
            range_ok = false;
            if (range_witness.empty()) range_witness = "basis value " + std::to_string(i) + " <= 1/(p-1)";
        }
    }
    rep.add("values-above-1/(p-1)", "p-valuation range", range_ok, std::to_string(spec.numerators.size()) + " values",
            range_witness);

    AxiomTally ultra{"ultrametric", "omega(g h^-1) >= min(omega(g), omega(h))"};
    AxiomTally comm{"abelian-commutator", "omega((g,h)) > omega(g) + omega(h)"};
    AxiomTally ppow{"p-power", "omega(g^p) = omega(g) + 1"};
    AxiomTally lower{"lower-bound", "omega(g) > 1/(p-1)"};

    std::vector<std::pair<GroupElement, GroupElement>> pairs;
    for (const auto& g : spec.basis)
        for (const auto& h : spec.basis) pairs.emplace_back(g, h);
    std::mt19937_64 rng(seed);
    auto random_member = [&]() {
        std::vector<PAdicScalar> alpha;
        for (size_t i = 0; i < spec.basis.size(); ++i) {
            PAdicScalar a = G.random_scalar(rng);
            a = a.mul_p_power(static_cast<int>(rng() % 3));
            alpha.push_back(a);
        }
        return G.compose(alpha, spec.basis);
    };
    for (int s = 0; s < samples; ++s) {
        GroupElement g = random_member();
        GroupElement h = random_member();
        pairs.emplace_back(g, h);
    }

    for (const auto& [g, h] : pairs) {
        const std::string w = "g=" + g.to_string() + " h=" + h.to_string();
        OmegaValue wg = omega_value(G, g, spec);
        OmegaValue wh = omega_value(G, h, spec);
        OmegaValue wq = omega_value(G, G.multiply(g, G.inverse(h)), spec);
        ultra.note(greater_equal(wq, min_value(wg, wh)), w + " omega(gh^-1)=" + wq.to_string());
        if (spec.abelian) {
            OmegaValue wc = omega_value(G, G.commutator(g, h), spec);
            comm.note(greater_equal(wc, sum_value(wg, wh), 1), w + " omega((g,h))=" + wc.to_string() +
                                                                   " omega(g)+omega(h)=" + sum_value(wg, wh).to_string());
        }
        for (const auto* x : {&g, &h}) {
            OmegaValue wx = omega_value(G, *x, spec);
            OmegaValue wp = omega_value(G, G.power(*x, static_cast<u64>(p)), spec);
            Tri t = Tri::Unknown;
            if (wx.exact && wp.exact) t = (wp.num == wx.num + e) ? Tri::True : Tri::False;
            ppow.note(t, "g=" + x->to_string() + " omega(g)=" + wx.to_string() + " omega(g^p)=" + wp.to_string());
            Tri lb = Tri::Unknown;
            if (!G.is_identity(*x)) lb = (wx.num * static_cast<long long>(p - 1) > e) ? Tri::True : Tri::False;
            if (!wx.exact && lb == Tri::False) lb = Tri::Unknown;
            lower.note(lb, "g=" + x->to_string());
        }
    }
    for (auto* t : {&ultra, &comm, &ppow, &lower}) {
        if (t == &comm && !spec.abelian) continue;
        auto& r = rep.add(t->id, t->anchor, t->failed == 0,
                          "checked=" + std::to_string(t->checked) + " undecided=" + std::to_string(t->unknown),
                          t->witness);
        r.params = {{"pairs", std::to_string(pairs.size())}, {"seed", std::to_string(seed)}};
    }
    return rep;
}

}  // namespace iwa
