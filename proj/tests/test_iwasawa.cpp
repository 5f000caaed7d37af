#include <gtest/gtest.h>

#include <random>

#include "iwa/errors.hpp"
#include "iwa/iwasawa.hpp"
#include "iwa/lie.hpp"

using namespace iwa;

namespace {

struct Fixture {
    std::shared_ptr<const Group> G;
    AlgebraPtr A;
};

Fixture standard(const GroupDescriptor& d, int T = 12) {
    auto G = Group::make(d);
    return {G, IwasawaAlgebra::standard(G, T)};
}

// element of the uniform level subgroup G_c
GroupElement random_gc(const Group& G, std::mt19937_64& rng) {
    GroupElement g = G.random_element(rng);
    g.b = g.b.mul_p_power(G.uniform_level());
    return g;
}

}  // namespace

TEST(Algebra, MonomialCountsAndIndex) {
    auto [G, A] = standard(remark_group_descriptor(3), 5);
    // monomials in 2 H variables of degree < D
    EXPECT_EQ(A->count(1), 1u);
    EXPECT_EQ(A->count(2), 3u);
    EXPECT_EQ(A->count(5), 15u);
    for (std::size_t i = 0; i < A->count(5); ++i) EXPECT_EQ(A->index(A->exponent(i)), i);
}

TEST(Algebra, RejectsBadBasis) {
    auto G = Group::make(remark_group_descriptor(3));
    EXPECT_THROW(IwasawaAlgebra(G, {G->generator(0), G->generator(1)}, 6), DomainError);
    EXPECT_THROW(IwasawaAlgebra(G, {G->generator(0), G->generator(1), G->generator(0)}, 6), DomainError);
}

TEST(Element, ParseRoundTrip) {
    auto [G, A] = standard(remark_group_descriptor(5), 8);
    std::mt19937_64 rng(1);
    for (int t = 0; t < 20; ++t) {
        IwasawaElement x = random_element(A, rng, 0.3);
        EXPECT_EQ(IwasawaElement::parse(A, x.to_text()), x);
    }
    EXPECT_THROW(IwasawaElement::parse(A, "1:0,0\n"), ParseError);
}

TEST(Element, RingAxiomsOnRandomElements) {
    auto [G, A] = standard(remark_group_descriptor(3), 8);
    std::mt19937_64 rng(2);
    for (int t = 0; t < 20; ++t) {
        auto x = random_element(A, rng), y = random_element(A, rng), z = random_element(A, rng);
        EXPECT_EQ((x * y) * z, x * (y * z));
        EXPECT_EQ(x * (y + z), x * y + x * z);
        EXPECT_EQ(x * IwasawaElement::one(A), x);
    }
}

TEST(FromGroup, GeneratorsAndIdentity) {
    auto [G, A] = standard(remark_group_descriptor(3));
    EXPECT_EQ(from_group_element(A, G->identity()), IwasawaElement::one(A));
    EXPECT_EQ(from_group_element(A, G->generator(0)), IwasawaElement::one(A) + IwasawaElement::variable(A, 0));
}

TEST(FromGroup, InverseIsGeometricSeries) {
    auto [G, A] = standard(remark_group_descriptor(3));
    // (1 + b_1)^{-1} = sum (-b_1)^n
    IwasawaElement geo = IwasawaElement::zero(A);
    for (int n = 0; n < A->truncation(); ++n) geo.set({n, 0, 0}, n % 2 ? 2u : 1u);
    EXPECT_EQ(from_group_element(A, G->inverse(G->generator(0))), geo);
}

TEST(FromGroup, Multiplicative) {
    for (auto desc : {remark_group_descriptor(3), diagonal_group_descriptor(5)}) {
        auto [G, A] = standard(desc, 8);
        std::mt19937_64 rng(3);
        for (int t = 0; t < 20; ++t) {
            auto g = random_gc(*G, rng), h = random_gc(*G, rng);
            EXPECT_EQ(from_group_element(A, G->multiply(g, h)), from_group_element(A, g) * from_group_element(A, h));
        }
    }
}

TEST(Conjugate, MatchesGroupConjugation) {
    auto [G, A] = standard(remark_group_descriptor(3), 8);
    std::mt19937_64 rng(4);
    for (int t = 0; t < 20; ++t) {
        auto h = random_gc(*G, rng);
        auto g = G->random_element(rng);
        EXPECT_EQ(conjugate(from_group_element(A, h), g), from_group_element(A, G->conjugate(g, h)));
    }
}

TEST(DividedPower, MonomialOracle) {
    auto [G, A] = standard(remark_group_descriptor(5), 8);
    // d^(1,0) b_1^3 = 3 b_1^2 (1 + b_1)
    IwasawaElement r = IwasawaElement::monomial(A, {3, 0, 0});
    IwasawaElement expect = IwasawaElement::monomial(A, {2, 0, 0}, 3) + IwasawaElement::monomial(A, {3, 0, 0}, 3);
    EXPECT_EQ(divided_power({1, 0}, r), expect);
    // d^(2,1) b_1^2 b_2 b_x = (1 + b_1)^2 (1 + b_2) b_x
    IwasawaElement s = IwasawaElement::monomial(A, {2, 1, 1});
    IwasawaElement one = IwasawaElement::one(A);
    IwasawaElement b1 = IwasawaElement::variable(A, 0), b2 = IwasawaElement::variable(A, 1);
    IwasawaElement bx = IwasawaElement::variable(A, 2);
    EXPECT_EQ(divided_power({2, 1}, s), (one + b1) * (one + b1) * (one + b2) * bx);
    EXPECT_EQ(divided_power({0, 0}, s), s);
    EXPECT_THROW(divided_power({0, 0, 1}, s), DomainError);
    EXPECT_THROW(divided_power({1}, s), DomainError);
}

TEST(Mahler, AlphaZeroIsOne) {
    auto [G, A] = standard(remark_group_descriptor(3));
    EXPECT_EQ(mahler_coefficient(A, 0, {0, 0}), IwasawaElement::one(A));
}

TEST(Mahler, ExpansionVerifies) {
    for (auto desc : {remark_group_descriptor(3), diagonal_group_descriptor(3)}) {
        auto [G, A] = standard(desc, 10);
        const int m0 = G->initial_power();
        for (int m = m0; m < m0 + 2; ++m) {
            Report r = verify_mahler_expansion(A, m, A->truncation() - 1, 10, 5);
            EXPECT_TRUE(r.passed()) << (r.first_failure() ? r.first_failure()->witness : "");
        }
    }
}

TEST(Mahler, SmallCapRaises) {
    auto [G, A] = standard(remark_group_descriptor(3), 10);
    EXPECT_THROW(verify_mahler_expansion(A, 0, 1, 2, 1), CapTooSmall);
}

TEST(Mahler, EpsilonGrowth) {
    for (auto desc : {remark_group_descriptor(3), diagonal_group_descriptor(5)}) {
        auto [G, A] = standard(desc);
        Report r = verify_epsilon_bound(A, G->initial_power(), 3);
        EXPECT_TRUE(r.passed()) << (r.first_failure() ? r.first_failure()->witness : "");
    }
}

TEST(Lazard, ValuesOfGeneratorsAndConstants) {
    auto G = Group::make(remark_group_descriptor(3));
    PValuationSpec spec = construct_valuation(*G);
    AlgebraPtr A = valuation_algebra(G, spec, 10);
    auto w = lazard_weights(*A, spec);
    ASSERT_EQ(w.size(), 3u);
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(w[i], spec.numerators[i]);
        FiltrationValue v = lazard_value(IwasawaElement::variable(A, i), w);
        EXPECT_TRUE(v.exact);
        EXPECT_EQ(v.value, w[i]);
    }
    EXPECT_EQ(lazard_value(IwasawaElement::one(A), w).value, 0);
    EXPECT_TRUE(lazard_value(IwasawaElement::zero(A), w).infinite);
}

TEST(Lazard, MultiplicativeBelowThreshold) {
    auto G = Group::make(diagonal_group_descriptor(3));
    PValuationSpec spec = construct_valuation(*G);
    AlgebraPtr A = valuation_algebra(G, spec, 10);
    auto w = lazard_weights(*A, spec);
    const long long thr = reliable_threshold(*A, w);
    std::mt19937_64 rng(6);
    int tested = 0;
    for (int t = 0; t < 500 && tested < 30; ++t) {
        auto x = random_element(A, rng, 0.1), y = random_element(A, rng, 0.1);
        auto vx = lazard_value(x, w), vy = lazard_value(y, w);
        if (vx.infinite || vy.infinite || vx.value + vy.value >= thr) continue;
        ++tested;
        auto vxy = lazard_value(x * y, w);
        EXPECT_EQ(vxy.value, vx.value + vy.value);
        EXPECT_EQ(graded_form(x * y, w), graded_form(graded_form(x, w) * graded_form(y, w), w));
    }
    EXPECT_GT(tested, 0);
}

TEST(Lazard, GroupLikeValue) {
    auto G = Group::make(remark_group_descriptor(3));
    PValuationSpec spec = construct_valuation(*G);
    AlgebraPtr A = valuation_algebra(G, spec, 12);
    auto w = lazard_weights(*A, spec);
    // w(g^p - 1) = p w(g - 1)
    auto g = spec.basis[0];
    auto v1 = group_like_value(*A, w, g), v3 = group_like_value(*A, w, G->power(g, u64{3}));
    EXPECT_EQ(v3.value, 3 * v1.value);
    EXPECT_EQ(lazard_value(from_group_element(A, g) - IwasawaElement::one(A), w).value, v1.value);
}

TEST(Theta, SinglePositiveValue) {
    for (std::uint32_t p : {3u, 5u}) {
        for (auto desc : {remark_group_descriptor(p), diagonal_group_descriptor(p)}) {
            Group G(desc);
            PValuationSpec spec = construct_valuation(G);
            ThetaResult th = theta_check(G, k_basis(G), spec);
            EXPECT_TRUE(th.report.passed()) << (th.report.first_failure() ? th.report.first_failure()->id : "");
            EXPECT_GT(th.theta, 0);
        }
    }
}

TEST(Theta, UnequalWeightsFail) {
    Group G(diagonal_group_descriptor(3));
    PValuationSpec spec = construct_valuation(G);
    spec.numerators[0] += 2 * spec.e;
    ThetaResult th = theta_check(G, k_basis(G), spec);
    EXPECT_FALSE(th.report.passed());
}

TEST(Crossed, CosetRepsAndMultiplicativity) {
    auto G = Group::make(remark_group_descriptor(3));
    PValuationSpec spec = construct_valuation(*G);
    ThetaResult th = theta_check(*G, k_basis(*G), spec);
    CrossedProduct cp = make_crossed_product(G, th.u_spec);
    EXPECT_FALSE(cp.reps.empty());
    for (const auto& g : cp.reps) {
        GroupRingElement e;
        e.add(g, 1, 3);
        EXPECT_EQ(crossed_product_value(e, cp).value, 0);
        auto [u, i] = cp.split(g);
        EXPECT_TRUE(G->equal(G->multiply(u, cp.reps[i]), g));
    }
    std::mt19937_64 rng(7);
    const int nb = static_cast<int>(th.u_spec.basis.size());
    for (int t = 0; t < 30; ++t) {
        std::vector<int> n1(nb), n2(nb);
        for (auto& x : n1) x = static_cast<int>(rng() % 3);
        for (auto& x : n2) x = static_cast<int>(rng() % 3);
        auto a = group_ring_monomial(*G, th.u_spec.basis, n1, G->random_element(rng));
        auto b = group_ring_monomial(*G, th.u_spec.basis, n2, G->random_element(rng));
        auto va = crossed_product_value(a, cp), vb = crossed_product_value(b, cp);
        auto vab = crossed_product_value(group_ring_multiply(*G, a, b), cp);
        EXPECT_EQ(vab.value, va.value + vb.value);
    }
}

TEST(Frobenius, FixedPoints) {
    auto G = Group::make(remark_group_descriptor(3));
    PValuationSpec spec = construct_valuation(*G);
    AlgebraPtr A = valuation_algebra(G, spec, 10);
    auto w = lazard_weights(*A, spec);
    FrobeniusLimit one = frobenius_limit(IwasawaElement::one(A), w);
    EXPECT_EQ(one.b, IwasawaElement::one(A));
    EXPECT_EQ(one.terms, 0);
    FrobeniusLimit two = frobenius_limit(IwasawaElement::constant(A, 2), w);
    EXPECT_EQ(two.b, IwasawaElement::constant(A, 2));
    // (1 + b_1)^{p^m} -> 1
    FrobeniusLimit g = frobenius_limit(IwasawaElement::one(A) + IwasawaElement::variable(A, 0), w);
    EXPECT_TRUE(g.fixed);
    EXPECT_EQ(g.b, IwasawaElement::one(A));
    // a = b_1 has w(a^p - a) = w(b_1) > 0 and limit 0
    FrobeniusLimit z = frobenius_limit(IwasawaElement::variable(A, 0), w);
    EXPECT_TRUE(z.b.is_zero());
}

TEST(Frobenius, RejectsNonContracting) {
    auto G = Group::make(remark_group_descriptor(3));
    PValuationSpec spec = construct_valuation(*G);
    AlgebraPtr A = valuation_algebra(G, spec, 10);
    // with zero weights w(a^p - a) = 0
    std::vector<long long> w(3, 0);
    IwasawaElement a = IwasawaElement::variable(A, 0);
    EXPECT_THROW(frobenius_limit(a, w), DomainError);
}
