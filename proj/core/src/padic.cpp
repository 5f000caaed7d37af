#include "iwa/padic.hpp"

#include <algorithm>
#include <sstream>

#include "iwa/errors.hpp"

namespace iwa {

namespace {

u64 mulmod(u64 a, u64 b, u64 m) {
    return static_cast<u64>((static_cast<unsigned __int128>(a) * b) % m);
}

u64 addmod(u64 a, u64 b, u64 m) {
    u64 s = a + b;
    return s >= m ? s - m : s;
}

u64 submod(u64 a, u64 b, u64 m) { return a >= b ? a - b : a + m - b; }

u64 invmod_unit(u64 a, u64 m) {
    __int128 t = 0, nt = 1, r = m, nr = a % m;
    while (nr != 0) {
        __int128 q = r / nr;
        __int128 tmp = t - q * nt;
        t = nt;
        nt = tmp;
        tmp = r - q * nr;
        r = nr;
        nr = tmp;
    }
    if (r != 1) throw DomainError("inverse of a non-unit");
    if (t < 0) t += m;
    return static_cast<u64>(t);
}

int vp_residue(u64 r, std::uint32_t p, int cap) {
    if (r == 0) return cap;
    int v = 0;
    while (r % p == 0) {
        r /= p;
        ++v;
    }
    return std::min(v, cap);
}

}  // namespace

u64 ipow(u64 base, int exp) {
    u64 r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

int max_precision(std::uint32_t p) {
    int n = 0;
    unsigned __int128 v = 1;
    const unsigned __int128 limit = static_cast<unsigned __int128>(1) << 62;
    while (v * p < limit) {
        v *= p;
        ++n;
    }
    return n;
}

void check_eps(std::uint32_t p, int eps) {
    if (p == 2 && eps < 2) throw DomainError("p = 2 requires eps >= 2");
    if (eps < 1) throw DomainError("eps must be at least 1");
}

int vp_integer(u64 n, std::uint32_t p) {
    if (n == 0) return 0;
    int v = 0;
    while (n % p == 0) {
        n /= p;
        ++v;
    }
    return v;
}

int vp_factorial(u64 n, std::uint32_t p) {
    u64 s = 0, m = n;
    while (m) {
        s += m % p;
        m /= p;
    }
    return static_cast<int>((n - s) / (p - 1));
}

// ---------------------------------------------------------------- scalar

PAdicScalar::PAdicScalar(std::uint32_t p, int precision, long long value) : p_(p), n_(precision) {
    if (p < 2) throw DomainError("prime must be at least 2");
    if (precision < 0 || precision > max_precision(p)) throw PrecisionExhausted("precision out of range");
    mod_ = ipow(p, precision);
    long long m = static_cast<long long>(mod_);
    long long r = value % m;
    if (r < 0) r += m;
    r_ = static_cast<u64>(r);
}

PAdicScalar PAdicScalar::from_residue(std::uint32_t p, int precision, u64 residue) {
    PAdicScalar s(p, precision, 0);
    s.r_ = residue % s.mod_;
    return s;
}

long long PAdicScalar::centered() const {
    if (r_ > mod_ / 2) return -static_cast<long long>(mod_ - r_);
    return static_cast<long long>(r_);
}

std::uint32_t PAdicScalar::digit(int i) const {
    if (i >= n_) return 0;
    u64 r = r_;
    for (int k = 0; k < i; ++k) r /= p_;
    return static_cast<std::uint32_t>(r % p_);
}

PVal PAdicScalar::valuation() const {
    if (r_ == 0) return {n_, true};
    return {vp_residue(r_, p_, n_), false};
}

PAdicScalar PAdicScalar::operator-() const {
    PAdicScalar s = *this;
    s.r_ = r_ == 0 ? 0 : mod_ - r_;
    return s;
}

namespace {
void require_same_prime(const PAdicScalar& a, const PAdicScalar& b) {
    if (a.prime() != b.prime()) throw DomainError("mixed primes");
}
}  // namespace

PAdicScalar operator+(const PAdicScalar& a, const PAdicScalar& b) {
    require_same_prime(a, b);
    int n = std::min(a.n_, b.n_);
    PAdicScalar x = a.reduced(n), y = b.reduced(n);
    x.r_ = addmod(x.r_, y.r_, x.mod_);
    return x;
}

PAdicScalar operator-(const PAdicScalar& a, const PAdicScalar& b) {
    require_same_prime(a, b);
    int n = std::min(a.n_, b.n_);
    PAdicScalar x = a.reduced(n), y = b.reduced(n);
    x.r_ = submod(x.r_, y.r_, x.mod_);
    return x;
}

PAdicScalar operator*(const PAdicScalar& a, const PAdicScalar& b) {
    require_same_prime(a, b);
    int n = std::min(a.n_, b.n_);
    PAdicScalar x = a.reduced(n), y = b.reduced(n);
    x.r_ = mulmod(x.r_, y.r_, x.mod_);
    return x;
}

PAdicScalar PAdicScalar::inverse() const {
    if (!is_unit()) throw DomainError("inverse of a non-unit p-adic scalar");
    PAdicScalar s = *this;
    s.r_ = invmod_unit(r_, mod_);
    return s;
}

PAdicScalar PAdicScalar::divide(const PAdicScalar& d) const {
    require_same_prime(*this, d);
    PVal vd = d.valuation();
    if (vd.saturated) throw DomainError("division by zero at precision");
    PVal va = valuation();
    if (!va.saturated && va.value < vd.value) throw DomainError("quotient is not integral");
    int n = std::min(n_, d.n_) - vd.value;
    PAdicScalar num = reduced(std::min(n_, d.n_)).div_p_power(vd.value);
    PAdicScalar den = d.reduced(std::min(n_, d.n_)).div_p_power(vd.value);
    return (num.reduced(n) * den.reduced(n).inverse());
}

PAdicScalar PAdicScalar::reduced(int precision) const {
    if (precision >= n_) return *this;
    if (precision < 0) precision = 0;
    return from_residue(p_, precision, r_);
}

PAdicScalar PAdicScalar::lifted(int precision) const {
    if (precision <= n_) return reduced(precision);
    return from_residue(p_, precision, r_);
}

PAdicScalar PAdicScalar::mul_p_power(int k) const {
    PAdicScalar s = *this;
    for (int i = 0; i < k; ++i) s.r_ = mulmod(s.r_, p_, mod_);
    return s;
}

PAdicScalar PAdicScalar::div_p_power(int k) const {
    if (k == 0) return *this;
    PVal v = valuation();
    if (!v.saturated && v.value < k) throw DomainError("not divisible by the requested p-power");
    if (k > n_) return zero(p_, 0);
    return from_residue(p_, n_ - k, r_ / ipow(p_, k));
}

bool PAdicScalar::equals(const PAdicScalar& o) const {
    if (p_ != o.p_) return false;
    int n = std::min(n_, o.n_);
    return reduced(n).r_ == o.reduced(n).r_;
}

std::string PAdicScalar::to_string() const {
    std::ostringstream os;
    os << centered() << " (mod " << p_ << "^" << n_ << ")";
    return os.str();
}

PVal val_p(const PAdicScalar& a) { return a.valuation(); }

std::uint32_t binom_mod_p(u64 n, u64 k, std::uint32_t p) {
    std::uint32_t result = 1;
    while (n > 0 || k > 0) {
        u64 ni = n % p, ki = k % p;
        if (ki > ni) return 0;
        u64 num = 1, den = 1;
        for (u64 i = 0; i < ki; ++i) {
            num = num * ((ni - i) % p) % p;
            den = den * ((i + 1) % p) % p;
        }
        u64 inv = 1, base = den, e = p - 2;
        while (e) {
            if (e & 1) inv = inv * base % p;
            base = base * base % p;
            e >>= 1;
        }
        result = static_cast<std::uint32_t>(result * (num * inv % p) % p);
        n /= p;
        k /= p;
    }
    return result;
}

std::uint32_t binom_mod_p(const PAdicScalar& beta, u64 alpha) {
    if (alpha >= beta.modulus()) throw PrecisionExhausted("binomial index beyond stored digits");
    return binom_mod_p(beta.residue(), alpha, beta.prime());
}

// ---------------------------------------------------------------- matrix

PAdicMatrix::PAdicMatrix(std::uint32_t p, int precision, int rows, int cols)
    : p_(p), n_(precision), rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, 0) {
    if (precision < 0 || precision > max_precision(p)) throw PrecisionExhausted("precision out of range");
    mod_ = ipow(p, precision);
}

PAdicMatrix PAdicMatrix::identity(std::uint32_t p, int precision, int n) {
    PAdicMatrix m(p, precision, n, n);
    for (int i = 0; i < n; ++i) m.set_residue(i, i, 1);
    return m;
}

PAdicMatrix PAdicMatrix::from_integers(std::uint32_t p, int precision, int rows, int cols,
                                       const std::vector<long long>& row_major) {
    if (row_major.size() != static_cast<size_t>(rows) * cols) throw DomainError("matrix entry count mismatch");
    PAdicMatrix m(p, precision, rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m.set(i, j, PAdicScalar(p, precision, row_major[i * cols + j]));
    return m;
}

PAdicMatrix PAdicMatrix::from_columns(const std::vector<std::vector<PAdicScalar>>& cols) {
    if (cols.empty()) throw DomainError("no columns");
    int rows = static_cast<int>(cols[0].size());
    std::uint32_t p = cols[0][0].prime();
    int n = cols[0][0].precision();
    for (const auto& c : cols)
        for (const auto& x : c) n = std::min(n, x.precision());
    PAdicMatrix m(p, n, rows, static_cast<int>(cols.size()));
    for (int j = 0; j < m.cols_; ++j)
        for (int i = 0; i < rows; ++i) m.set(i, j, cols[j][i]);
    return m;
}

PAdicScalar PAdicMatrix::at(int i, int j) const { return PAdicScalar::from_residue(p_, n_, residue(i, j)); }

void PAdicMatrix::set(int i, int j, const PAdicScalar& v) {
    if (v.precision() < n_) throw PrecisionExhausted("entry precision below matrix precision");
    set_residue(i, j, v.residue());
}

std::vector<PAdicScalar> PAdicMatrix::column(int j) const {
    std::vector<PAdicScalar> c;
    c.reserve(rows_);
    for (int i = 0; i < rows_; ++i) c.push_back(at(i, j));
    return c;
}

std::vector<PAdicScalar> PAdicMatrix::apply(const std::vector<PAdicScalar>& v) const {
    if (static_cast<int>(v.size()) != cols_) throw DomainError("dimension mismatch in apply");
    int n = n_;
    for (const auto& x : v) n = std::min(n, x.precision());
    u64 mod = ipow(p_, n);
    std::vector<PAdicScalar> out;
    out.reserve(rows_);
    for (int i = 0; i < rows_; ++i) {
        u64 acc = 0;
        for (int j = 0; j < cols_; ++j) acc = addmod(acc, mulmod(residue(i, j) % mod, v[j].residue() % mod, mod), mod);
        out.push_back(PAdicScalar::from_residue(p_, n, acc));
    }
    return out;
}

namespace {
void require_compatible(const PAdicMatrix& a, const PAdicMatrix& b) {
    if (a.prime() != b.prime()) throw DomainError("mixed primes");
}
}  // namespace

PAdicMatrix operator+(const PAdicMatrix& a, const PAdicMatrix& b) {
    require_compatible(a, b);
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw DomainError("shape mismatch");
    int n = std::min(a.n_, b.n_);
    PAdicMatrix x = a.reduced(n), y = b.reduced(n);
    for (size_t k = 0; k < x.data_.size(); ++k) x.data_[k] = addmod(x.data_[k], y.data_[k], x.mod_);
    return x;
}

PAdicMatrix operator-(const PAdicMatrix& a, const PAdicMatrix& b) {
    require_compatible(a, b);
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw DomainError("shape mismatch");
    int n = std::min(a.n_, b.n_);
    PAdicMatrix x = a.reduced(n), y = b.reduced(n);
    for (size_t k = 0; k < x.data_.size(); ++k) x.data_[k] = submod(x.data_[k], y.data_[k], x.mod_);
    return x;
}

PAdicMatrix operator*(const PAdicMatrix& a, const PAdicMatrix& b) {
    require_compatible(a, b);
    if (a.cols_ != b.rows_) throw DomainError("shape mismatch in product");
    int n = std::min(a.n_, b.n_);
    PAdicMatrix x = a.reduced(n), y = b.reduced(n);
    PAdicMatrix out(a.p_, n, a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i)
        for (int k = 0; k < a.cols_; ++k) {
            u64 aik = x.residue(i, k);
            if (aik == 0) continue;
            for (int j = 0; j < b.cols_; ++j) {
                size_t idx = static_cast<size_t>(i) * out.cols_ + j;
                out.data_[idx] = addmod(out.data_[idx], mulmod(aik, y.residue(k, j), out.mod_), out.mod_);
            }
        }
    return out;
}

PAdicMatrix PAdicMatrix::scaled(const PAdicScalar& s) const {
    int n = std::min(n_, s.precision());
    PAdicMatrix x = reduced(n);
    u64 sr = s.residue() % x.mod_;
    for (auto& v : x.data_) v = mulmod(v, sr, x.mod_);
    return x;
}

PAdicMatrix PAdicMatrix::mul_p_power(int k) const {
    PAdicMatrix x = *this;
    u64 f = ipow(p_, std::min(k, n_)) % mod_;
    for (auto& v : x.data_) v = mulmod(v, f, mod_);
    return x;
}

PAdicMatrix PAdicMatrix::div_p_power(int k) const {
    if (k == 0) return *this;
    PVal v = min_valuation();
    if (!v.saturated && v.value < k) throw DomainError("matrix not divisible by the requested p-power");
    PAdicMatrix x(p_, std::max(0, n_ - k), rows_, cols_);
    u64 f = ipow(p_, std::min(k, n_));
    for (size_t i = 0; i < data_.size(); ++i) x.data_[i] = (data_[i] / f) % x.mod_;
    return x;
}

PAdicMatrix PAdicMatrix::transpose() const {
    PAdicMatrix t(p_, n_, cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) t.set_residue(j, i, residue(i, j));
    return t;
}

PAdicMatrix PAdicMatrix::reduced(int precision) const {
    if (precision >= n_) return *this;
    PAdicMatrix x(p_, precision, rows_, cols_);
    for (size_t i = 0; i < data_.size(); ++i) x.data_[i] = data_[i] % x.mod_;
    return x;
}

PAdicMatrix PAdicMatrix::lifted(int precision) const {
    if (precision <= n_) return reduced(precision);
    PAdicMatrix x(p_, precision, rows_, cols_);
    x.data_ = data_;
    return x;
}

PAdicMatrix PAdicMatrix::pow(u64 n) const {
    if (rows_ != cols_) throw DomainError("power of a non-square matrix");
    PAdicMatrix result = identity(p_, n_, rows_);
    PAdicMatrix base = *this;
    while (n) {
        if (n & 1) result = result * base;
        n >>= 1;
        if (n) base = base * base;
    }
    return result;
}

PVal PAdicMatrix::min_valuation() const {
    PVal best{n_, true};
    for (u64 r : data_) {
        if (r == 0) continue;
        int v = vp_residue(r, p_, n_);
        if (best.saturated || v < best.value) best = {v, false};
    }
    return best;
}

bool PAdicMatrix::is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](u64 r) { return r == 0; });
}

bool PAdicMatrix::is_identity() const { return congruent_identity(n_); }

bool PAdicMatrix::congruent_identity(int k) const {
    if (rows_ != cols_) return false;
    u64 m = ipow(p_, std::min(k, n_));
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) {
            u64 target = (i == j) ? 1 % m : 0;
            if (residue(i, j) % m != target) return false;
        }
    return true;
}

bool PAdicMatrix::equals(const PAdicMatrix& o) const {
    if (p_ != o.p_ || rows_ != o.rows_ || cols_ != o.cols_) return false;
    int n = std::min(n_, o.n_);
    PAdicMatrix x = reduced(n), y = o.reduced(n);
    return x.data_ == y.data_;
}

PAdicScalar PAdicMatrix::determinant() const {
    if (rows_ != cols_) throw DomainError("determinant of a non-square matrix");
    int n = rows_;
    if (n == 0) return PAdicScalar::one(p_, n_);
    std::vector<std::vector<PAdicScalar>> a(n, std::vector<PAdicScalar>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a[i][j] = at(i, j);
    PAdicScalar det = PAdicScalar::one(p_, n_);
    for (int k = 0; k < n; ++k) {
        int pr = -1, pc = -1;
        int best = n_ + 1;
        for (int i = k; i < n; ++i)
            for (int j = k; j < n; ++j) {
                PVal v = a[i][j].valuation();
                if (!v.saturated && v.value < best) {
                    best = v.value;
                    pr = i;
                    pc = j;
                }
            }
        if (pr < 0) return PAdicScalar::zero(p_, n_);
        if (pr != k) {
            std::swap(a[pr], a[k]);
            det = -det;
        }
        if (pc != k) {
            for (int i = 0; i < n; ++i) std::swap(a[i][pc], a[i][k]);
            det = -det;
        }
        det = det * a[k][k];
        PAdicScalar unit = a[k][k].div_p_power(best).inverse();
        for (int i = k + 1; i < n; ++i) {
            if (a[i][k].is_zero()) continue;
            // factor = a[i][k] / a[k][k], integral because of minimal pivot
            PAdicScalar f = a[i][k].div_p_power(best).lifted(n_) * unit;
            for (int j = k; j < n; ++j) a[i][j] = a[i][j] - (f * a[k][j]).reduced(n_);
        }
    }
    return det.reduced(n_);
}

PAdicMatrix PAdicMatrix::inverse() const {
    if (rows_ != cols_) throw DomainError("inverse of a non-square matrix");
    int n = rows_;
    PAdicMatrix a = *this, inv = identity(p_, n_, n);
    for (int k = 0; k < n; ++k) {
        int pr = -1;
        for (int i = k; i < n; ++i)
            if (a.residue(i, k) % p_ != 0) {
                pr = i;
                break;
            }
        if (pr < 0) throw DomainError("matrix is not invertible over Z_p");
        for (int j = 0; j < n; ++j) {
            std::swap(a.data_[k * n + j], a.data_[pr * n + j]);
            std::swap(inv.data_[k * n + j], inv.data_[pr * n + j]);
        }
        u64 u = invmod_unit(a.residue(k, k), mod_);
        for (int j = 0; j < n; ++j) {
            a.data_[k * n + j] = mulmod(a.data_[k * n + j], u, mod_);
            inv.data_[k * n + j] = mulmod(inv.data_[k * n + j], u, mod_);
        }
        for (int i = 0; i < n; ++i) {
            if (i == k) continue;
            u64 f = a.residue(i, k);
            if (f == 0) continue;
            for (int j = 0; j < n; ++j) {
                a.data_[i * n + j] = submod(a.data_[i * n + j], mulmod(f, a.data_[k * n + j], mod_), mod_);
                inv.data_[i * n + j] = submod(inv.data_[i * n + j], mulmod(f, inv.data_[k * n + j], mod_), mod_);
            }
        }
    }
    return inv;
}

std::string PAdicMatrix::to_string() const {
    std::ostringstream os;
    os << "[";
    for (int i = 0; i < rows_; ++i) {
        os << (i ? "; " : "");
        for (int j = 0; j < cols_; ++j) os << (j ? " " : "") << at(i, j).centered();
    }
    os << "] mod " << p_ << "^" << n_;
    return os.str();
}

// ---------------------------------------------------------------- Smith

SmithForm smith_normal_form(const PAdicMatrix& A) {
    const std::uint32_t p = A.prime();
    const int N = A.precision();
    const u64 mod = A.modulus();
    const int m = A.rows(), n = A.cols();
    PAdicMatrix D = A;
    PAdicMatrix U = PAdicMatrix::identity(p, N, m);
    PAdicMatrix V = PAdicMatrix::identity(p, N, n);
    SmithForm out;

    auto swap_rows = [&](PAdicMatrix& X, int r1, int r2) {
        for (int j = 0; j < X.cols(); ++j) {
            u64 t = X.residue(r1, j);
            X.set_residue(r1, j, X.residue(r2, j));
            X.set_residue(r2, j, t);
        }
    };
    auto swap_cols = [&](PAdicMatrix& X, int c1, int c2) {
        for (int i = 0; i < X.rows(); ++i) {
            u64 t = X.residue(i, c1);
            X.set_residue(i, c1, X.residue(i, c2));
            X.set_residue(i, c2, t);
        }
    };

    for (int k = 0; k < std::min(m, n); ++k) {
        int pr = -1, pc = -1, best = N + 1;
        for (int i = k; i < m; ++i)
            for (int j = k; j < n; ++j) {
                u64 r = D.residue(i, j);
                if (r == 0) continue;
                int v = vp_residue(r, p, N);
                if (v < best) {
                    best = v;
                    pr = i;
                    pc = j;
                }
            }
        if (pr < 0) break;
        if (pr != k) {
            swap_rows(D, pr, k);
            swap_rows(U, pr, k);
        }
        if (pc != k) {
            swap_cols(D, pc, k);
            swap_cols(V, pc, k);
        }
        const u64 pv = ipow(p, best);
        const u64 unit_inv = invmod_unit(D.residue(k, k) / pv, mod);
        for (int j = 0; j < n; ++j) D.set_residue(k, j, mulmod(D.residue(k, j), unit_inv, mod));
        for (int j = 0; j < m; ++j) U.set_residue(k, j, mulmod(U.residue(k, j), unit_inv, mod));
        for (int i = k + 1; i < m; ++i) {
            u64 r = D.residue(i, k);
            if (r == 0) continue;
            u64 f = r / pv;
            for (int j = 0; j < n; ++j) D.set_residue(i, j, submod(D.residue(i, j), mulmod(f, D.residue(k, j), mod), mod));
            for (int j = 0; j < m; ++j) U.set_residue(i, j, submod(U.residue(i, j), mulmod(f, U.residue(k, j), mod), mod));
        }
        for (int j = k + 1; j < n; ++j) {
            u64 r = D.residue(k, j);
            if (r == 0) continue;
            u64 f = r / pv;
            for (int i = 0; i < m; ++i) D.set_residue(i, j, submod(D.residue(i, j), mulmod(f, D.residue(i, k), mod), mod));
            for (int i = 0; i < n; ++i) V.set_residue(i, j, submod(V.residue(i, j), mulmod(f, V.residue(i, k), mod), mod));
        }
        out.exponents.push_back(best);
    }
    out.rank = static_cast<int>(out.exponents.size());
    out.U = U;
    out.V = V;
    return out;
}

std::vector<std::vector<PAdicScalar>> kernel_basis(const PAdicMatrix& A) {
    SmithForm s = smith_normal_form(A);
    std::vector<std::vector<PAdicScalar>> out;
    for (int j = s.rank; j < A.cols(); ++j) out.push_back(s.V.column(j));
    return out;
}

std::optional<std::vector<PAdicScalar>> solve_linear(const PAdicMatrix& A, const std::vector<PAdicScalar>& y) {
    if (A.rows() != A.cols()) throw DomainError("solve_linear needs a square matrix");
    const int n = A.rows();
    SmithForm s = smith_normal_form(A);
    if (s.rank < n) throw DomainError("singular system");
    std::vector<PAdicScalar> uy = s.U.apply(y);
    int tmax = s.exponents.empty() ? 0 : s.exponents.back();
    int prec = uy.empty() ? A.precision() : uy[0].precision();
    int out_prec = prec - tmax;
    if (out_prec <= 0) throw PrecisionExhausted("solve_linear lost all precision");
    std::vector<PAdicScalar> z;
    for (int i = 0; i < n; ++i) {
        PVal v = uy[i].valuation();
        if (!v.saturated && v.value < s.exponents[i]) return std::nullopt;
        z.push_back(uy[i].div_p_power(s.exponents[i]).reduced(out_prec));
    }
    return s.V.reduced(out_prec).apply(z);
}

// ---------------------------------------------------------------- log / exp

namespace {

int log_floor(u64 n, std::uint32_t p) {
    int k = 0;
    while (n >= p) {
        n /= p;
        ++k;
    }
    return k;
}

}  // namespace

PAdicMatrix matrix_log(const PAdicMatrix& M, int eps) {
    const std::uint32_t p = M.prime();
    const int N = M.precision();
    check_eps(p, eps);
    if (M.rows() != M.cols()) throw DomainError("log of a non-square matrix");
    if (!M.congruent_identity(eps)) throw DomainError("matrix_log needs M = I mod p^eps");
    const int d = M.rows();
    u64 nmax = 1;
    while (static_cast<long long>(nmax + 1) * eps - log_floor(nmax + 1, p) < N ||
           static_cast<long long>(nmax) * eps - log_floor(nmax, p) < N)
        ++nmax;
    const int slack = log_floor(nmax, p) + 2;
    const int W = N + slack;
    if (W > max_precision(p)) throw PrecisionExhausted("working precision for log exceeds word size");
    PAdicMatrix X = M.lifted(W) - PAdicMatrix::identity(p, W, d);
    PAdicMatrix power = X;
    PAdicMatrix acc(p, N, d, d);
    for (u64 k = 1; k <= nmax; ++k) {
        if (k > 1) power = power * X;
        int v = vp_integer(k, p);
        PAdicScalar unit_inv = PAdicScalar(p, W - v, static_cast<long long>(k / ipow(p, v))).inverse();
        PAdicMatrix term = power.div_p_power(v).scaled(unit_inv).reduced(N);
        acc = (k % 2 == 1) ? acc + term : acc - term;
    }
    return acc;
}

PAdicMatrix matrix_exp(const PAdicMatrix& L, int eps) {
    const std::uint32_t p = L.prime();
    const int N = L.precision();
    check_eps(p, eps);
    if (L.rows() != L.cols()) throw DomainError("exp of a non-square matrix");
    PVal v0 = L.min_valuation();
    if (!v0.saturated && v0.value < eps) throw DomainError("matrix_exp needs entries divisible by p^eps");
    const int d = L.rows();
    // n*eps - v_p(n!) >= n*eps - (n-1)/(p-1) grows without bound.
    u64 nmax = 1;
    while (static_cast<double>(nmax) * eps - static_cast<double>(nmax - 1) / (p - 1) < N) ++nmax;
    const int slack = vp_factorial(nmax, p) + 2;
    const int W = N + slack;
    if (W > max_precision(p)) throw PrecisionExhausted("working precision for exp exceeds word size");
    PAdicMatrix X = L.lifted(W);
    PAdicMatrix power = PAdicMatrix::identity(p, W, d);
    PAdicMatrix acc = PAdicMatrix::identity(p, N, d);
    for (u64 k = 1; k <= nmax; ++k) {
        power = power * X;
        int v = vp_factorial(k, p);
        const u64 modW = ipow(p, W);
        u64 unit = 1;
        for (u64 i = 2; i <= k; ++i) {
            u64 f = i;
            while (f % p == 0) f /= p;
            unit = mulmod(unit, f % modW, modW);
        }
        PAdicScalar unit_inv = PAdicScalar::from_residue(p, W - v, unit).inverse();
        acc = acc + power.div_p_power(v).scaled(unit_inv).reduced(N);
    }
    return acc;
}

PAdicMatrix matrix_power_padic(const PAdicMatrix& M, const PAdicScalar& b, int eps) {
    PAdicMatrix L = matrix_log(M, eps);
    return matrix_exp(L.scaled(b.lifted(L.precision())), eps);
}

}  // namespace iwa
