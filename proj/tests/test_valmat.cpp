#include <gtest/gtest.h>

#include <random>

#include "iwa/errors.hpp"
#include "iwa/valmat.hpp"

using namespace iwa;

namespace {

LaurentSeries z(FieldPtr F, int e = 1, GaloisField::Elem c = 1) { return LaurentSeries::monomial(std::move(F), e, c); }

LaurentSeries random_series(FieldPtr F, int lo, int hi, std::mt19937_64& rng) {
    LaurentSeries s(F);
    for (int e = lo; e <= hi; ++e) s.set(e, F->random(rng));
    return s;
}

ValuedMatrix random_matrix(FieldPtr F, int n, int lo, int hi, std::mt19937_64& rng) {
    ValuedMatrix m(F, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.at(i, j) = random_series(F, lo, hi, rng);
    return m;
}

ValuedMatrix jordan(FieldPtr F) {
    ValuedMatrix J(F, 2);
    J.at(0, 0) = z(F);
    J.at(1, 1) = z(F);
    J.at(0, 1) = LaurentSeries::constant(F, 1);
    return J;
}

}  // namespace

TEST(GaloisField, FieldAxioms) {
    for (auto [p, k] : std::vector<std::pair<std::uint32_t, int>>{{2, 1}, {2, 3}, {3, 2}, {5, 2}, {7, 1}}) {
        GaloisField F(p, k);
        EXPECT_EQ(F.modulus().size(), static_cast<std::size_t>(k + 1));
        EXPECT_EQ(F.modulus().back(), 1u);
        for (GaloisField::Elem a = 1; a < F.q(); ++a) {
            EXPECT_EQ(F.mul(a, F.inv(a)), 1u);
            EXPECT_EQ(F.pow(a, F.q() - 1), 1u);
            EXPECT_EQ(F.add(a, F.neg(a)), 0u);
        }
        // Frobenius is additive
        for (GaloisField::Elem a = 0; a < F.q(); ++a)
            for (GaloisField::Elem b = 0; b < F.q(); b += 3)
                EXPECT_EQ(F.pow(F.add(a, b), p), F.add(F.pow(a, p), F.pow(b, p)));
    }
    EXPECT_THROW(GaloisField(2, 0), DomainError);
    EXPECT_THROW(GaloisField(3, 1).inv(0), DomainError);
}

TEST(GaloisField, PrimeFieldEmbedding) {
    GaloisField F(3, 2);
    EXPECT_EQ(F.from_int(-1), 2u);
    EXPECT_TRUE(F.in_prime_field(F.mul(2, 2)));
    EXPECT_EQ(F.digits(5), (std::vector<std::uint32_t>{2, 1}));
}

TEST(Laurent, InverseOfOnePlusZ) {
    FieldPtr F = GaloisField::make(3, 1);
    LaurentSeries s = LaurentSeries::constant(F, 1) + z(F);
    LaurentSeries inv = s.inverse();
    EXPECT_FALSE(inv.exact());
    EXPECT_EQ(inv * s, LaurentSeries::constant(F, 1));
    // 1/(1+z) = sum (-z)^n
    for (int e = 0; e < 20; ++e) EXPECT_EQ(inv.coeff(e), e % 2 ? 2u : 1u);
}

TEST(Laurent, MonomialInverseIsExact) {
    FieldPtr F = GaloisField::make(5, 1);
    LaurentSeries s = z(F, 3, 2);
    LaurentSeries inv = s.inverse();
    EXPECT_TRUE(inv.exact());
    EXPECT_EQ(inv.valuation().value, -3);
    EXPECT_EQ(inv.coeff(-3), 3u);
}

TEST(Laurent, ValuationAndPowers) {
    FieldPtr F = GaloisField::make(2, 1);
    LaurentSeries s = z(F, -1) + z(F, 2);
    EXPECT_EQ(s.valuation().value, -1);
    // (z^-1 + z^2)^2 = z^-2 + z^4 in characteristic 2
    EXPECT_EQ(s.pow(2), z(F, -2) + z(F, 4));
    EXPECT_TRUE(LaurentSeries(F).valuation().infinite);
}

TEST(Laurent, WindowOverflow) {
    FieldPtr F = GaloisField::make(3, 1);
    LaurentWindow w{-4, 16};
    EXPECT_THROW(LaurentSeries::monomial(F, -5, 1, w), WindowOverflow);
    LaurentSeries a = LaurentSeries::monomial(F, -3, 1, w);
    EXPECT_THROW(a * a, WindowOverflow);
    // terms above the window are dropped and the series becomes inexact
    LaurentSeries b = LaurentSeries::monomial(F, 10, 1, w);
    LaurentSeries bb = b * b;
    EXPECT_FALSE(bb.exact());
    EXPECT_THROW(bb.valuation(), WindowOverflow);
}

TEST(Laurent, ParseRoundTrip) {
    FieldPtr F = GaloisField::make(5, 2);
    std::mt19937_64 rng(1);
    for (int t = 0; t < 20; ++t) {
        LaurentSeries s = random_series(F, -3, 6, rng);
        EXPECT_EQ(LaurentSeries::parse(F, s.to_text()), s);
    }
    EXPECT_THROW(LaurentSeries::parse(F, "30:1\n"), ParseError);
    EXPECT_THROW(LaurentSeries::parse(F, "1 2\n"), ParseError);
}

TEST(Laurent, FpRatio) {
    FieldPtr F = GaloisField::make(3, 2);
    LaurentSeries s = z(F, 1, 4) + z(F, 2, 7);
    EXPECT_EQ(fp_ratio(s.scaled(2), s), 2u);
    EXPECT_FALSE(fp_ratio(s.scaled(3), s).has_value());  // 3 encodes a root of the modulus, not in F_3
}

TEST(ValuedMatrix, ValueIsSubmultiplicative) {
    FieldPtr F = GaloisField::make(3, 1);
    std::mt19937_64 rng(2);
    for (int t = 0; t < 50; ++t) {
        ValuedMatrix a = random_matrix(F, 3, -1, 3, rng), b = random_matrix(F, 3, 0, 4, rng);
        if (a.is_zero() || b.is_zero()) continue;
        ValuedMatrix ab = a * b;
        if (ab.is_zero()) continue;
        EXPECT_GE(ab.value().value, a.value().value + b.value().value);
        SeriesValue s = (a + b).value();
        EXPECT_GE(s.value, std::min(a.value().value, b.value().value));
    }
}

TEST(ValuedMatrix, ConjugationByConstantsPreservesValue) {
    FieldPtr F = GaloisField::make(5, 1);
    std::mt19937_64 rng(3);
    for (int t = 0; t < 20; ++t) {
        ValuedMatrix x = random_matrix(F, 2, 1, 4, rng);
        ValuedMatrix c;
        do {
            c = ValuedMatrix::from_constants(F, {{F->random(rng), F->random(rng)}, {F->random(rng), F->random(rng)}});
        } while (c.determinant().is_zero());
        if (x.is_zero()) continue;
        EXPECT_EQ((c * x * c.inverse()).value().value, x.value().value);
    }
}

TEST(ValuedMatrix, DeterminantAndAdjugate) {
    FieldPtr F = GaloisField::make(3, 1);
    std::mt19937_64 rng(4);
    for (int t = 0; t < 20; ++t) {
        ValuedMatrix a = random_matrix(F, 3, 0, 2, rng);
        LaurentSeries det = a.determinant();
        EXPECT_EQ(a * a.adjugate(), ValuedMatrix::scalar(det, 3));
        ValuedMatrix b = random_matrix(F, 3, 0, 2, rng);
        EXPECT_EQ((a * b).determinant(), det * b.determinant());
    }
    EXPECT_EQ(jordan(F).determinant(), z(F, 2));
}

TEST(ValuedMatrix, InverseOfJordan) {
    FieldPtr F = GaloisField::make(3, 1);
    ValuedMatrix J = jordan(F);
    EXPECT_EQ(J * J.inverse(), ValuedMatrix::identity(F, 2));
}

TEST(ValuedMatrix, ParseRoundTrip) {
    FieldPtr F = GaloisField::make(2, 2);
    std::mt19937_64 rng(5);
    ValuedMatrix m = random_matrix(F, 3, -2, 3, rng);
    EXPECT_EQ(ValuedMatrix::parse(F, 3, m.to_text()), m);
    EXPECT_THROW(ValuedMatrix::parse(F, 3, "1:3,0,0\n"), ParseError);
}

TEST(Growth, ClosedForms) {
    for (std::uint32_t p : {2u, 3u}) {
        FieldPtr F = GaloisField::make(p, 1);
        GrowthEstimate g1 = growth_rate(ValuedMatrix::scalar(z(F), 2), 4);
        ASSERT_TRUE(g1.estimate);
        EXPECT_EQ(*g1.estimate, 1.0);

        ValuedMatrix nil(F, 2);
        nil.at(0, 1) = LaurentSeries::constant(F, 1);
        GrowthEstimate g2 = growth_rate(nil, 4);
        EXPECT_TRUE(g2.saturated);
        EXPECT_FALSE(g2.estimate);

        GrowthEstimate g3 = growth_rate(jordan(F), 4);
        ASSERT_EQ(g3.entries.size(), 5u);
        EXPECT_EQ(g3.entries[0].value.value, 0);
        long long pm = p;
        for (int m = 1; m <= 4; ++m, pm *= p) EXPECT_EQ(g3.entries[m].value.value, pm);
        EXPECT_TRUE(g3.monotone);
    }
}

TEST(Diagonalize, JordanBlockAfterOnePower) {
    FieldPtr F = GaloisField::make(3, 1);
    ValuedMatrix J = ValuedMatrix::from_constants(F, {{1, 1}, {0, 1}});
    Diagonalization d = p_power_diagonalize({J});
    EXPECT_EQ(d.m0, 1);
    ValuedMatrix D = d.a * J.pow(3) * d.a_inverse;
    EXPECT_TRUE(D.is_diagonal());
    EXPECT_EQ(d.diagonals[0], (std::vector<GaloisField::Elem>{1, 1}));
}

TEST(Diagonalize, CommutingPair) {
    FieldPtr F = GaloisField::make(5, 1);
    ValuedMatrix x = ValuedMatrix::from_constants(F, {{2, 1}, {0, 3}});
    ValuedMatrix y = x * x + ValuedMatrix::identity(F, 2);
    Diagonalization d = p_power_diagonalize({x, y});
    EXPECT_EQ(d.m0, 0);
    EXPECT_TRUE((d.a * x * d.a_inverse).is_diagonal());
    EXPECT_TRUE((d.a * y * d.a_inverse).is_diagonal());
    EXPECT_EQ(d.a * d.a_inverse, ValuedMatrix::identity(F, 2));
}

TEST(Diagonalize, Errors) {
    FieldPtr F = GaloisField::make(3, 1);
    ValuedMatrix x = ValuedMatrix::from_constants(F, {{1, 1}, {0, 2}});
    ValuedMatrix y = ValuedMatrix::from_constants(F, {{1, 0}, {1, 1}});
    EXPECT_THROW(p_power_diagonalize({x, y}), NotCommuting);
    // x^2 + 1 is irreducible over F_3
    ValuedMatrix rot = ValuedMatrix::from_constants(F, {{0, 2}, {1, 0}});
    EXPECT_THROW(p_power_diagonalize({rot}), EigenvalueFieldTooSmall);
    EXPECT_NO_THROW(p_power_diagonalize({ValuedMatrix::from_constants(GaloisField::make(3, 2), {{0, 2}, {1, 0}})}));
    EXPECT_THROW(p_power_diagonalize({ValuedMatrix::scalar(z(F), 2)}), DomainError);
}

TEST(Independence, WitnessForEqualInputs) {
    FieldPtr F = GaloisField::make(3, 1);
    ValuedMatrix d1 = ValuedMatrix::scalar(z(F), 2);
    IndependenceResult r = independent_mod_plus({d1, d1}, 1);
    EXPECT_FALSE(r.independent);
    EXPECT_EQ(r.witness, (std::vector<std::uint32_t>{1, 2}));
    // leading terms z and 2z cancel in d1 + d2 even though d2 has a z^2 tail
    ValuedMatrix d2 = ValuedMatrix::scalar(z(F, 1, 2) + z(F, 2), 2);
    IndependenceResult r2 = independent_mod_plus({d1, d2}, 1);
    EXPECT_FALSE(r2.independent);
    EXPECT_EQ(r2.witness, (std::vector<std::uint32_t>{1, 1}));
    FieldPtr F9 = GaloisField::make(3, 2);
    ValuedMatrix e1 = ValuedMatrix::scalar(z(F9), 2), e2 = ValuedMatrix::scalar(z(F9, 1, 3), 2);
    EXPECT_TRUE(independent_mod_plus({e1, e2}, 1).independent);
    EXPECT_THROW(independent_mod_plus({e1}, 2), DomainError);
}

TEST(Elimination, PlantedInstancesRecover) {
    std::mt19937_64 rng(6);
    for (std::uint32_t p : {2u, 3u})
        for (int r = 1; r <= 3; ++r)
            for (int t = 0; t < 5; ++t) {
                PlantedOptions opt;
                opt.p = p;
                opt.r = r;
                opt.n = 2 + t % 2;
                EliminationInstance inst = planted_instance(opt, rng);
                EliminationResult res = elimination_harness(inst);
                EXPECT_TRUE(res.precondition);
                EXPECT_TRUE(res.recovered);
                EXPECT_TRUE(res.report.passed())
                    << p << " " << r << " " << (res.report.first_failure() ? res.report.first_failure()->id : "");
                // planted row really is zero
                ValuedMatrix ej = ValuedMatrix::unit(inst.F, inst.n, inst.j, inst.window);
                for (const auto& a : inst.a) EXPECT_TRUE((ej * a).is_zero());
            }
}

TEST(Elimination, DependentInstanceMakesNoClaim) {
    std::mt19937_64 rng(7);
    PlantedOptions opt;
    opt.p = 3;
    opt.r = 2;
    opt.dependent = true;
    EliminationResult res = elimination_harness(planted_instance(opt, rng));
    EXPECT_FALSE(res.precondition);
    EXPECT_TRUE(res.report.passed());
}

TEST(Elimination, TextRoundTrip) {
    std::mt19937_64 rng(8);
    PlantedOptions opt;
    opt.p = 3;
    opt.r = 2;
    EliminationInstance inst = planted_instance(opt, rng);
    EliminationInstance back = EliminationInstance::parse(inst.to_text());
    EXPECT_EQ(back.to_text(), inst.to_text());
    EXPECT_TRUE(elimination_harness(back).recovered);
}

TEST(Elimination, BrokenExpansionRejected) {
    std::mt19937_64 rng(9);
    PlantedOptions opt;
    opt.p = 2;
    opt.r = 1;
    EliminationInstance inst = planted_instance(opt, rng);
    inst.tail[0].at(0, 0) = inst.tail[0].at(0, 0) + LaurentSeries::constant(inst.F, 1, inst.window);
    EXPECT_THROW(elimination_harness(inst), InstanceInvalid);
}
