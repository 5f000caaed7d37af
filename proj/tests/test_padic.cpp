#include <gtest/gtest.h>

#include <random>

#include "iwa/errors.hpp"
#include "iwa/padic.hpp"

using namespace iwa;

namespace {

// C(n, k) over the integers, small n
unsigned long long int_binom(unsigned n, unsigned k) {
    if (k > n) return 0;
    unsigned long long r = 1;
    for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

PAdicMatrix random_unipotent(std::uint32_t p, int N, int d, int eps, std::mt19937_64& rng) {
    PAdicMatrix M = PAdicMatrix::identity(p, N, d);
    const u64 mod = ipow(p, N);
    const u64 step = ipow(p, eps);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) M.set_residue(i, j, (M.residue(i, j) + step * (rng() % (mod / step))) % mod);
    return M;
}

}  // namespace

TEST(PAdicScalar, Valuation) {
    auto zero = PAdicScalar(3, 5, 0);
    PVal v = val_p(zero);
    EXPECT_TRUE(v.saturated);
    EXPECT_EQ(v.value, 5);
    EXPECT_EQ(val_p(PAdicScalar(3, 5, 18)).value, 2);
    EXPECT_FALSE(val_p(PAdicScalar(3, 5, 18)).saturated);
    EXPECT_EQ(val_p(PAdicScalar(3, 5, 1)).value, 0);
}

TEST(PAdicScalar, ArithmeticReducesModulo) {
    auto a = PAdicScalar(5, 3, 100), b = PAdicScalar(5, 3, 70);
    EXPECT_EQ((a + b).residue(), 170u % 125u);
    EXPECT_EQ((a * b).residue(), (100u * 70u) % 125u);
    EXPECT_EQ((a - b).residue(), 30u);
    EXPECT_EQ(PAdicScalar(5, 3, -1).residue(), 124u);
    auto u = PAdicScalar(5, 3, 7);
    EXPECT_EQ((u * u.inverse()).residue(), 1u);
}

TEST(Binomial, LucasAgainstIntegerBinomials) {
    EXPECT_EQ(binom_mod_p(PAdicScalar(3, 6, 5), 2), 1u);
    for (std::uint32_t p : {2u, 3u, 5u})
        for (unsigned n = 0; n < 20; ++n)
            for (unsigned k = 0; k <= n; ++k)
                EXPECT_EQ(binom_mod_p(PAdicScalar(p, 6, n), k), int_binom(n, k) % p) << p << " " << n << " " << k;
}

TEST(Binomial, AlphaZeroIsOne) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 20; ++t) EXPECT_EQ(binom_mod_p(PAdicScalar::from_residue(5, 4, rng() % 625), 0), 1u);
}

TEST(Binomial, MinusOneMatchesGeometricSeries) {
    // (1 + b)^{-1} = sum (-b)^n
    auto minus_one = PAdicScalar(3, 6, -1);
    for (u64 n = 0; n < 50; ++n) EXPECT_EQ(binom_mod_p(minus_one, n), n % 2 ? 2u : 1u);
}

TEST(Binomial, IndexBeyondPrecisionThrows) {
    EXPECT_THROW(binom_mod_p(PAdicScalar(3, 2, 1), 9), PrecisionExhausted);
}

TEST(Smith, DiagonalAlreadyInForm) {
    auto A = PAdicMatrix::from_integers(3, 6, 2, 2, {3, 0, 0, 9});
    SmithForm s = smith_normal_form(A);
    EXPECT_EQ(s.exponents, (std::vector<int>{1, 2}));
    EXPECT_TRUE(s.U.is_identity());
    EXPECT_TRUE(s.V.is_identity());
}

TEST(Smith, GcdDeterminantOracle) {
    // d_1 = gcd of entries, d_1 d_2 = det
    auto A = PAdicMatrix::from_integers(3, 6, 2, 2, {3, 1, 0, 3});
    SmithForm s = smith_normal_form(A);
    EXPECT_EQ(s.exponents, (std::vector<int>{0, 2}));
    PAdicMatrix D = s.U * A * s.V;
    EXPECT_TRUE(D.at(0, 1).is_zero() && D.at(1, 0).is_zero());
    EXPECT_EQ(val_p(D.at(0, 0)).value, 0);
    EXPECT_EQ(val_p(D.at(1, 1)).value, 2);
}

TEST(Smith, ZeroMatrix) {
    SmithForm s = smith_normal_form(PAdicMatrix(3, 5, 2, 2));
    EXPECT_EQ(s.rank, 0);
    EXPECT_TRUE(s.exponents.empty());
}

TEST(Smith, RandomMatricesDiagonalize) {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 50; ++t) {
        PAdicMatrix A(5, 6, 3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) A.set_residue(i, j, (rng() % 7) * ipow(5, rng() % 3));
        SmithForm s = smith_normal_form(A);
        PAdicMatrix D = s.U * A * s.V;
        EXPECT_TRUE(s.U.determinant().is_unit());
        EXPECT_TRUE(s.V.determinant().is_unit());
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (i != j) EXPECT_TRUE(D.at(i, j).is_zero());
        for (int i = 0; i + 1 < s.rank; ++i) EXPECT_LE(s.exponents[i], s.exponents[i + 1]);
    }
}

TEST(MatrixLog, IdentityLogsToZero) {
    EXPECT_TRUE(matrix_log(PAdicMatrix::identity(3, 6, 2), 1).is_zero());
}

TEST(MatrixLog, ScalarAgainstDirectSeries) {
    // log(1 + 3) = sum (-1)^{n+1} 3^n / n, summed at higher precision
    const int N = 5, W = 12;
    PAdicScalar sum(3, W, 0);
    for (int n = 1; n < 40; ++n) {
        const int k = vp_integer(n, 3);
        const long long u = n / static_cast<long long>(ipow(3, k));
        if (n - k >= W) continue;
        PAdicScalar term = PAdicScalar(3, W, u).inverse().mul_p_power(n - k);
        sum = n % 2 ? sum + term : sum - term;
    }
    PAdicMatrix L = matrix_log(PAdicMatrix::from_integers(3, N, 1, 1, {4}), 1);
    EXPECT_EQ(L.residue(0, 0), sum.reduced(N).residue());
}

TEST(MatrixLog, RejectsNonUnipotent) {
    EXPECT_THROW(matrix_log(PAdicMatrix::from_integers(3, 5, 1, 1, {2}), 1), DomainError);
}

TEST(MatrixLog, ExpRoundTrip) {
    std::mt19937_64 rng(5);
    for (std::uint32_t p : {3u, 5u}) {
        for (int t = 0; t < 20; ++t) {
            PAdicMatrix M = random_unipotent(p, 8, 2, 1, rng);
            PAdicMatrix back = matrix_exp(matrix_log(M, 1), 1);
            const int prec = std::min(back.precision(), 8);
            EXPECT_TRUE(back.reduced(prec).equals(M.reduced(prec))) << M.to_string();
            EXPECT_GE(prec, 5);
        }
    }
    // p = 2 needs eps >= 2
    for (int t = 0; t < 10; ++t) {
        PAdicMatrix M = random_unipotent(2, 12, 2, 2, rng);
        PAdicMatrix back = matrix_exp(matrix_log(M, 2), 2);
        const int prec = std::min(back.precision(), 12);
        EXPECT_TRUE(back.reduced(prec).equals(M.reduced(prec)));
    }
}

TEST(MatrixPower, IntegerAndHomomorphism) {
    std::mt19937_64 rng(9);
    for (int t = 0; t < 10; ++t) {
        PAdicMatrix M = random_unipotent(3, 8, 2, 1, rng);
        auto at = [&](long long b) { return matrix_power_padic(M, PAdicScalar(3, 8, b), 1); };
        PAdicMatrix I = at(0);
        EXPECT_TRUE(I.reduced(I.precision()).is_identity());
        PAdicMatrix M2 = at(2);
        const int prec = M2.precision();
        EXPECT_TRUE(M2.equals((M * M).reduced(prec)));
        const long long b1 = rng() % 6561, b2 = rng() % 6561;
        PAdicMatrix lhs = at(b1 + b2), rhs = at(b1) * at(b2);
        const int q = std::min(lhs.precision(), rhs.precision());
        EXPECT_TRUE(lhs.reduced(q).equals(rhs.reduced(q)));
    }
}
