#include <gtest/gtest.h>

#include <random>

#include "iwa/errors.hpp"
#include "iwa/group.hpp"
#include "iwa/lie.hpp"

using namespace iwa;

namespace {

// 4x4 unipotent Jordan block: log has a 1/3 entry when p = 3
GroupDescriptor jordan4(std::uint32_t p) {
    GroupDescriptor d;
    d.p = p;
    d.d = 4;
    d.eps = 1;
    d.precision = 8;
    d.m = {1, 1, 0, 0, 0, 1, 1, 0, 0, 0, 1, 1, 0, 0, 0, 1};
    return d;
}

GroupDescriptor abelian(std::uint32_t p) {
    GroupDescriptor d;
    d.p = p;
    d.d = 2;
    d.m = {1, 0, 0, 1};
    return d;
}

}  // namespace

TEST(Descriptor, TextRoundTrip) {
    EXPECT_EQ(GroupDescriptor::parse(diagonal_group_descriptor(2).to_text()), diagonal_group_descriptor(2));
    for (std::uint32_t p : {3u, 5u}) {
        GroupDescriptor d = remark_group_descriptor(p);
        EXPECT_EQ(GroupDescriptor::parse(d.to_text()), d);
        GroupDescriptor e = diagonal_group_descriptor(p);
        EXPECT_EQ(GroupDescriptor::parse(e.to_text()), e);
    }
    EXPECT_EQ(diagonal_group_descriptor(2).eps, 2);
}

TEST(Descriptor, CommasAndComments) {
    auto d = GroupDescriptor::parse("# x\np = 5\nd = 2\neps = 1\nprecision = 6\nM = 6, 0, 0, 26\n");
    EXPECT_EQ(d.p, 5u);
    EXPECT_EQ(d.precision, 6);
    EXPECT_EQ(d.m, (std::vector<long long>{6, 0, 0, 26}));
}

TEST(Descriptor, MalformedThrows) {
    EXPECT_THROW(GroupDescriptor::parse("p = 3\nd = 2\neps = one\n"), ParseError);
    EXPECT_THROW(GroupDescriptor::parse("p = 3\nd = 2\neps = 1\nprecision = 8\nM = 1 0 0\n"), ParseError);
}

TEST(Descriptor, NonInvertibleRejected) {
    GroupDescriptor d = abelian(3);
    d.m = {3, 0, 0, 1};
    EXPECT_THROW(Group{d}, DomainError);
}

TEST(Group, IdentityIsNeutral) {
    Group G(remark_group_descriptor(3));
    std::mt19937_64 rng(1);
    for (int t = 0; t < 50; ++t) {
        auto g = G.random_element(rng);
        EXPECT_TRUE(G.equal(G.multiply(G.identity(), g), g));
        EXPECT_TRUE(G.equal(G.multiply(g, G.identity()), g));
    }
}

TEST(Group, RemarkConjugationOfZ) {
    for (std::uint32_t p : {3u, 5u}) {
        Group G(remark_group_descriptor(p));
        const long long r = exp_p_truncated(p, 8);
        auto c = G.conjugate(G.generator(2), G.generator(1));
        EXPECT_TRUE(G.equal(c, G.h_element(std::vector<long long>{r, r}))) << c.to_string();
        auto y = G.conjugate(G.generator(2), G.generator(0));
        EXPECT_TRUE(G.equal(y, G.h_element(std::vector<long long>{r, 0})));
    }
}

TEST(Group, AssociativityOnRandomTriples) {
    for (auto desc : {remark_group_descriptor(3), diagonal_group_descriptor(5), diagonal_group_descriptor(2)}) {
        Group G(desc);
        std::mt19937_64 rng(7);
        for (int t = 0; t < 1000; ++t) {
            auto a = G.random_element(rng), b = G.random_element(rng), c = G.random_element(rng);
            ASSERT_TRUE(G.equal(G.multiply(G.multiply(a, b), c), G.multiply(a, G.multiply(b, c))));
        }
    }
}

TEST(Group, CommutatorMatchesFourFactorProduct) {
    Group G(remark_group_descriptor(3));
    std::mt19937_64 rng(2);
    for (int t = 0; t < 100; ++t) {
        auto g = G.random_element(rng), h = G.random_element(rng);
        auto four = G.multiply(G.multiply(G.multiply(g, h), G.inverse(g)), G.inverse(h));
        EXPECT_TRUE(G.equal(G.commutator(g, h), four));
        EXPECT_TRUE(G.is_identity(G.commutator(g, g)));
    }
}

TEST(Group, PowerHomomorphism) {
    Group G(diagonal_group_descriptor(3));
    std::mt19937_64 rng(4);
    for (int t = 0; t < 50; ++t) {
        auto g = G.random_element(rng);
        auto a = G.random_scalar(rng), b = G.random_scalar(rng);
        EXPECT_TRUE(G.equal(G.power(g, a + b), G.multiply(G.power(g, a), G.power(g, b))));
        EXPECT_TRUE(G.equal(G.power(g, G.scalar(3)), G.power(g, u64{3})));
    }
}

TEST(UMap, CoherenceUnderPPowers) {
    for (auto desc : {remark_group_descriptor(3), remark_group_descriptor(5), diagonal_group_descriptor(3)}) {
        Group G(desc);
        std::mt19937_64 rng(5);
        const int m0 = G.initial_power();
        for (int t = 0; t < 100; ++t) {
            auto h = G.random_h_element(rng);
            const int m = m0 + t % 3;
            EXPECT_TRUE(G.equal(G.u_map(h, m + 1), G.power(G.u_map(h, m), static_cast<u64>(G.p()))));
        }
    }
}

TEST(UMap, RemarkValueOnZ) {
    for (std::uint32_t p : {3u, 5u}) {
        Group G(remark_group_descriptor(p));
        const long long pp = p;
        EXPECT_TRUE(G.equal(G.u_map(G.generator(1), 1), G.h_element(std::vector<long long>{pp, pp * pp})));
    }
}

TEST(UMap, CentralElementMapsToIdentity) {
    GroupDescriptor d = abelian(3);
    d.m = {4, 0, 0, 1};  // e_2 is central
    Group G(d);
    EXPECT_TRUE(G.is_identity(G.u_map(G.generator(1), 1)));
    EXPECT_FALSE(G.is_identity(G.u_map(G.generator(0), 1)));
    EXPECT_THROW(G.u_map(G.generator(2), 1), DomainError);
}

TEST(InitialPower, Examples) {
    EXPECT_EQ(Group(remark_group_descriptor(3)).initial_power(), 0);
    EXPECT_EQ(Group(diagonal_group_descriptor(5)).initial_power(), 0);
    Group J(jordan4(3));
    EXPECT_EQ(J.uniform_level(), 2);
    EXPECT_EQ(J.initial_power(), 1);
    EXPECT_THROW(Group(abelian(3)).initial_power(), DomainError);
    EXPECT_TRUE(Group(abelian(3)).abelian());
}

TEST(UniformLevel, GoldenGroups) {
    EXPECT_EQ(Group(remark_group_descriptor(3)).uniform_level(), 1);
    EXPECT_EQ(Group(remark_group_descriptor(5)).uniform_level(), 1);
    EXPECT_EQ(Group(diagonal_group_descriptor(3)).uniform_level(), 0);
}

TEST(Decompose, RoundTripInStandardBasis) {
    Group G(remark_group_descriptor(3));
    std::vector<GroupElement> basis{G.generator(0), G.generator(1), G.generator(2)};
    std::mt19937_64 rng(8);
    for (int t = 0; t < 100; ++t) {
        auto g = G.random_element(rng);
        EXPECT_TRUE(G.equal(G.compose(G.decompose(g, basis), basis), g));
    }
}

TEST(Decompose, RoundTripInValuationBasis) {
    Group G(remark_group_descriptor(3));
    PValuationSpec spec = construct_valuation(G);
    std::mt19937_64 rng(9);
    for (int t = 0; t < 50; ++t) {
        std::vector<PAdicScalar> alpha;
        for (std::size_t i = 0; i < spec.basis.size(); ++i) alpha.push_back(G.random_scalar(rng));
        auto g = G.compose(alpha, spec.basis);
        auto back = G.decompose(g, spec.basis);
        for (std::size_t i = 0; i < alpha.size(); ++i) EXPECT_TRUE(back[i].equals(alpha[i]));
    }
}

TEST(Omega, PPowerAddsOne) {
    Group G(diagonal_group_descriptor(3));
    PValuationSpec spec = construct_valuation(G);
    std::mt19937_64 rng(10);
    int decided = 0;
    for (int t = 0; t < 100; ++t) {
        auto g = G.random_element(rng);
        OmegaValue a = omega_value(G, g, spec), b = omega_value(G, G.power(g, u64{3}), spec);
        if (!a.exact || !b.exact) continue;
        ++decided;
        EXPECT_EQ(b.num, a.num + spec.e);
    }
    EXPECT_GT(decided, 50);
    EXPECT_FALSE(omega_value(G, G.identity(), spec).exact);
}

TEST(Omega, ValidatorCatchesCorruptedSpec) {
    Group G(remark_group_descriptor(3));
    PValuationSpec spec = construct_valuation(G);
    EXPECT_TRUE(validate_p_valuation(G, spec, 100, 1).passed());
    // a heavy X makes (X, h) lighter than omega(X) + omega(h)
    PValuationSpec bad = spec;
    bad.numerators.back() += 20 * bad.e;
    Report r = validate_p_valuation(G, bad, 100, 1);
    ASSERT_FALSE(r.passed());
    EXPECT_FALSE(r.first_failure()->witness.empty());
}
