// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "iwa/errors.hpp"
#include "iwa/graded.hpp"
#include "iwa/iwasawa.hpp"
#include "iwa/lie.hpp"
#include "iwa/valmat.hpp"

using namespace iwa;

namespace {

constexpr int kPrecision = 8;
constexpr int kTruncation = 12;
constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
    bool pass = true;
    std::ostringstream note;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            if (pass) note << "first failure: ";
            else note << "; ";
            note << what;
        }
        pass = pass && ok;
    }
};

struct Golden {
    std::string name;
    std::shared_ptr<const Group> G;
};

std::vector<Golden> golden_groups() {
    std::vector<Golden> out;
    for (std::uint32_t p : {3u, 5u}) {
        out.push_back({"EX1 p=" + std::to_string(p), Group::make(remark_group_descriptor(p, kPrecision))});
        out.push_back({"EX2 p=" + std::to_string(p), Group::make(diagonal_group_descriptor(p, kPrecision))});
    }
    return out;
}

std::string failure_text(const Report& r) {
    const CheckRecord* f = r.first_failure();
    return f ? f->id + " (" + f->value + ") " + f->witness : "";
}

GradedPoly random_linear(std::uint32_t p, int nvars, std::mt19937_64& rng) {
    GradedPoly f(p, nvars);
    for (int i = 0; i < nvars; ++i) {
        std::vector<int> e(nvars, 0);
        e[i] = 1;
        f.add_term(e, static_cast<std::uint32_t>(rng() % p));
    }
    return f;
}

// ---------------------------------------------------------------- criteria

Outcome mahler_identity(const std::vector<Golden>& gs) {
    Outcome o;
    int runs = 0;
    for (const auto& g : gs) {
        AlgebraPtr A = IwasawaAlgebra::standard(g.G, kTruncation);
        const int m1 = g.G->initial_power();
        for (int m = m1; m < m1 + 3; ++m) {
            Report r = verify_mahler_expansion(A, m, kTruncation - 1, 50, kSeed + m);
            o.require(r.passed(), g.name + " m=" + std::to_string(m) + ": " + failure_text(r));
            ++runs;
        }
    }
    o.note << (o.pass ? "" : " | ") << runs << " runs x 50 elements";
    return o;
}

Outcome approximation_growth(const std::vector<Golden>& gs) {
    Outcome o;
    for (const auto& g : gs) {
        AlgebraPtr A = IwasawaAlgebra::standard(g.G, kTruncation);
        Report r = verify_epsilon_bound(A, g.G->initial_power(), 3);
        o.require(r.passed(), g.name + ": " + failure_text(r));
    }
    return o;
}

Outcome u_map_coherence(const std::vector<Golden>& gs) {
    Outcome o;
    std::mt19937_64 rng(kSeed);
    int ok = 0, total = 0;
    for (const auto& g : gs) {
        const Group& G = *g.G;
        const int m1 = G.initial_power();
        for (int t = 0; t < 100; ++t) {
            auto h = G.random_h_element(rng);
            const int m = m1 + t % 3;
            const bool same = G.equal(G.u_map(h, m + 1), G.power(G.u_map(h, m), static_cast<u64>(G.p())));
            ok += same;
            ++total;
            o.require(same, g.name + " h=" + h.to_string());
        }
    }
    o.note << (o.pass ? "" : " | ") << ok << "/" << total;
    return o;
}

Outcome valuation_construction(const std::vector<Golden>& gs) {
    Outcome o;
    for (const auto& g : gs) {
        ValuationConstruction vc = build_valuation(*g.G, std::nullopt, std::nullopt, 500, kSeed);
        o.require(vc.validation.passed(), g.name + ": " + failure_text(vc.validation));
        o.require(vc.level.level == g.G->uniform_level(), g.name + ": wrong level");
    }
    // [x,y] = py, [x,z] = y + pz is the remark group at level 0
    for (std::uint32_t p : {3u, 5u}) {
        Group G(remark_group_descriptor(p, kPrecision));
        ValuationConstruction vc = build_valuation(G, std::nullopt, 0, 500, kSeed);
        const CheckRecord* bracket = nullptr;
        for (const auto& r : vc.validation.records)
            if (r.id == "abelian-commutator") bracket = &r;
        o.require(bracket && bracket->status == Status::Fail && !bracket->witness.empty(),
                  "negative example p=" + std::to_string(p) + " did not fail the bracket axiom with a witness");
        if (bracket && p == 3) o.note << (o.pass ? "" : " | ") << "negative witness: " << bracket->witness;
    }
    return o;
}

Outcome equalizing_filtration(const std::vector<Golden>& gs) {
    Outcome o;
    for (const auto& g : gs) {
        PValuationSpec spec = construct_valuation(*g.G, std::nullopt, std::nullopt, 500, kSeed);
        ThetaResult th = theta_check(*g.G, k_basis(*g.G), spec);
        o.require(th.report.passed() && th.theta > 0, g.name + ": " + failure_text(th.report));
        o.note << (o.note.tellp() > 0 ? ", " : "") << g.name << " theta=" << th.theta;
    }
    return o;
}

Outcome k_basis_golden() {
    Outcome o;
    for (std::uint32_t p : {3u, 5u}) {
        Group G(remark_group_descriptor(p, kPrecision));
        const long long pp = p;
        std::vector<GroupElement> k{G.h_element(std::vector<long long>{0, 1}),
                                    G.h_element(std::vector<long long>{pp - 1, pp})};
        KBasisCheck kc = validate_k_basis(G, k);
        o.require(kc.report.passed(), "p=" + std::to_string(p) + " given basis: " + failure_text(kc.report));
        const KBasisData computed = k_basis(G);
        for (const KBasisData* kb : {static_cast<const KBasisData*>(&kc.data), &computed}) {
            const bool shape = kb->r == 2 && kb->D[0][0] == 0 && kb->D[0][1] != 0 && kb->D[1][0] == 0 &&
                               kb->D[1][1] == 0;
            o.require(shape, "p=" + std::to_string(p) + " D is not (Span{T_2}, 0)");
        }
        if (p == 3) o.note << "D_1 = " << kc.data.D[0][1] << " T_2 for the given basis";
    }
    return o;
}

Outcome l_machinery() {
    Outcome o;
    std::mt19937_64 rng(kSeed);
    const std::uint32_t primes[] = {2, 3, 5};
    int ok = 0;
    for (int t = 0; t < 200; ++t) {
        const std::uint32_t p = primes[t % 3];
        const int n = 1 + static_cast<int>(rng() % 4);
        GradedPoly x = random_linear(p, 2, rng);
        std::vector<GradedPoly> ys;
        for (int i = 0; i < n; ++i) ys.push_back(random_linear(p, 2, rng));
        const bool same = l_apply_coeffs(l_coeffs(ys, p, 2), x) == l_eval(x, ys);
        ok += same;
        o.require(same, "instance " + std::to_string(t));
    }
    for (std::uint32_t p : {3u, 5u}) {
        Group G(remark_group_descriptor(p, kPrecision));
        XAction act = XAction::from_k_basis(k_basis(G), G.d());
        BChain bc = b_chain(act, act.top_index());
        o.require(bc.report.passed(), "EX1 p=" + std::to_string(p) + " B-chain: " + failure_text(bc.report));
    }
    auto T = [](int i) { return GradedPoly::variable(3, 3, i); };
    XAction syn(3, 3, {T(2), T(2), GradedPoly(3, 3)});
    BChain bc = b_chain(syn, syn.top_index());
    o.require(bc.report.passed(), "synthetic B-chain: " + failure_text(bc.report));
    o.note << (o.pass ? "" : " | ") << ok << "/200 coefficient forms";
    return o;
}

Outcome moore_determinant() {
    Outcome o;
    for (std::uint32_t p : {2u, 3u})
        for (int t = 1; t <= 3; ++t) {
            std::vector<GradedPoly> forms;
            for (int i = 0; i < t; ++i) forms.push_back(GradedPoly::variable(p, t, i));
            o.require(moore_identity(forms).pass, "symbolic p=" + std::to_string(p) + " t=" + std::to_string(t));
        }
    auto m32 = moore_identity(std::vector<GradedPoly>{GradedPoly::variable(3, 2, 0), GradedPoly::variable(3, 2, 1)});
    o.require(m32.pass && m32.beta == 2, "p=3 t=2 beta=" + std::to_string(m32.beta));
    std::mt19937_64 rng(kSeed);
    int ok = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::uint32_t p = trial % 2 ? 3 : 2;
        FieldPtr F = GaloisField::make(p, 2);
        const int t = 1 + static_cast<int>(rng() % 3);
        std::vector<LaurentSeries> forms;
        for (int i = 0; i < t; ++i) {
            LaurentSeries s(F);
            for (int e = -1; e <= 2; ++e) s.set(e, F->random(rng));
            forms.push_back(s);
        }
        auto m = moore_identity(forms);
        const bool good = m.pass || (m.determinant.is_zero() && m.product.is_zero());
        ok += good;
        o.require(good, "specialization " + std::to_string(trial));
    }
    o.note << (o.pass ? "" : " | ") << "beta(3,2)=" << m32.beta << ", " << ok << "/100 specializations";
    return o;
}

Outcome reduction_coefficients() {
    Outcome o;
    std::mt19937_64 rng(kSeed);
    for (std::uint32_t p : {3u, 5u}) {
        auto G = Group::make(remark_group_descriptor(p, kPrecision));
        PValuationSpec spec = construct_valuation(*G, std::nullopt, std::nullopt, 500, kSeed);
        KBasisData kb = k_basis(*G);
        for (int t = 0; t < 3; ++t) {
            Report r = graded_reduction_shadow(G, kb, spec, G->random_h_element(rng), kTruncation);
            o.require(r.passed(), "p=" + std::to_string(p) + " random: " + failure_text(r));
        }
        // k_1^p lies strictly above the bound at the first level
        Report s = graded_reduction_shadow(G, kb, spec, G->power(kb.k[0], static_cast<u64>(p)), kTruncation);
        o.require(s.passed(), "p=" + std::to_string(p) + " strict: " + failure_text(s));
    }
    return o;
}

Outcome frobenius_limit_criterion() {
    Outcome o;
    std::mt19937_64 rng(kSeed);
    int tested = 0;
    for (std::uint32_t p : {3u, 5u}) {
        auto G = Group::make(remark_group_descriptor(p, kPrecision));
        PValuationSpec spec = construct_valuation(*G, std::nullopt, std::nullopt, 500, kSeed);
        AlgebraPtr A = valuation_algebra(G, spec, kTruncation);
        const auto w = lazard_weights(*A, spec);
        int mlog = 0;
        for (long long pm = 1; pm < kTruncation; pm *= p) ++mlog;
        int here = 0;
        for (int t = 0; t < 2000 && here < 25; ++t) {
            IwasawaElement a = random_element(A, rng, 0.15);
            a.slices()[0][0] = 1 + static_cast<std::uint32_t>(rng() % (p - 1));
            FrobeniusLimit fl;
            try {
                fl = frobenius_limit(a, w);
            } catch (const DomainError&) {
                continue;
            }
            ++here;
            for (int m = mlog; m <= mlog + 1; ++m) {
                IwasawaElement apm = a;
                for (int k = 0; k < m; ++k) apm = apm.pow(p);
                FiltrationValue dv = lazard_value(apm - fl.b, w);
                o.require(fl.b.pow(p) == fl.b && at_least(dv, (kTruncation + 1) / 2),
                          "p=" + std::to_string(p) + " trial " + std::to_string(t) + " m=" + std::to_string(m) +
                              " v=" + dv.to_string());
            }
        }
        tested += here;
    }
    o.require(tested == 50, "only " + std::to_string(tested) + " valid inputs");
    o.note << (o.pass ? "" : " | ") << tested << " inputs";
    return o;
}

Outcome growth_valuation() {
    Outcome o;
    std::mt19937_64 rng(kSeed);
    int tested = 0;
    for (std::uint32_t p : {3u, 5u}) {
        auto G = Group::make(diagonal_group_descriptor(p, kPrecision));
        PValuationSpec spec = construct_valuation(*G, std::nullopt, std::nullopt, 500, kSeed);
        AlgebraPtr A = valuation_algebra(G, spec, kTruncation);
        const auto w = lazard_weights(*A, spec);
        const long long thr = reliable_threshold(*A, w);
        int here = 0;
        for (int t = 0; t < 20000 && here < 50; ++t) {
            IwasawaElement x = random_element(A, rng, 0.15);
            x.slices()[0][0] = 0;
            FiltrationValue v = lazard_value(x, w);
            if (v.infinite || v.value * static_cast<long long>(p) >= thr) continue;
            ++here;
            IwasawaElement xp = x;
            long long pm = 1;
            for (int m = 1; v.value * pm * p < thr; ++m) {
                xp = xp.pow(p);
                pm *= p;
                FiltrationValue vp = lazard_value(xp, w);
                o.require(!vp.infinite && vp.exact && vp.value == pm * v.value,
                          "p=" + std::to_string(p) + " m=" + std::to_string(m) + " v(x)=" + v.to_string() +
                              " v(x^p^m)=" + vp.to_string());
            }
        }
        tested += here;
    }
    o.require(tested == 100, "only " + std::to_string(tested) + " testable elements");

    for (std::uint32_t p : {2u, 3u}) {
        FieldPtr F = GaloisField::make(p, 1);
        auto z = LaurentSeries::monomial(F, 1, 1), one = LaurentSeries::constant(F, 1);
        GrowthEstimate g1 = growth_rate(ValuedMatrix::scalar(z, 2), 4);
        o.require(g1.estimate && *g1.estimate == 1.0, "zI rate");
        ValuedMatrix nil(F, 2);
        nil.at(0, 1) = one;
        o.require(growth_rate(nil, 4).saturated, "nilpotent not saturated");
        ValuedMatrix J(F, 2);
        J.at(0, 0) = z;
        J.at(1, 1) = z;
        J.at(0, 1) = one;
        GrowthEstimate g3 = growth_rate(J, 4);
        long long pm = 1;
        for (const auto& e : g3.entries) {
            o.require(!e.value.infinite && e.value.value == (e.m == 0 ? 0 : pm), "jordan m=" + std::to_string(e.m));
            pm *= p;
        }
    }
    o.note << (o.pass ? "" : " | ") << tested << " Lazard elements, 3 growth examples";
    return o;
}

Outcome elimination() {
    Outcome o;
    std::mt19937_64 rng(kSeed);
    int total = 0;
    for (std::uint32_t p : {2u, 3u})
        for (int r = 1; r <= 3; ++r)
            for (int t = 0; t < 50; ++t) {
                PlantedOptions opt;
                opt.p = p;
                opt.r = r;
                opt.n = 2 + static_cast<int>(rng() % 2);
                EliminationResult res = elimination_harness(planted_instance(opt, rng));
                bool adj = false;
                for (const auto& rec : res.report.records) adj = adj || (rec.id == "adjugate-bound" && rec.status == Status::Pass);
                o.require(res.precondition && res.recovered && res.report.passed() && adj,
                          "p=" + std::to_string(p) + " r=" + std::to_string(r) + ": " + failure_text(res.report));
                ++total;
            }
    o.note << (o.pass ? "" : " | ") << total << " instances";
    return o;
}

Outcome crossed_product() {
    Outcome o;
    std::mt19937_64 rng(kSeed);
    for (std::uint32_t p : {3u, 5u}) {
        auto G = Group::make(remark_group_descriptor(p, kPrecision));
        PValuationSpec spec = construct_valuation(*G, std::nullopt, std::nullopt, 500, kSeed);
        ThetaResult th = theta_check(*G, k_basis(*G), spec);
        CrossedProduct cp = make_crossed_product(G, th.u_spec);
        const int nb = static_cast<int>(th.u_spec.basis.size());
        int ok = 0;
        for (int t = 0; t < 200; ++t) {
            std::vector<int> n1(nb), n2(nb);
            for (auto& x : n1) x = static_cast<int>(rng() % 3);
            for (auto& x : n2) x = static_cast<int>(rng() % 3);
            auto a = group_ring_monomial(*G, th.u_spec.basis, n1, G->random_element(rng));
            auto b = group_ring_monomial(*G, th.u_spec.basis, n2, G->random_element(rng));
            auto va = crossed_product_value(a, cp), vb = crossed_product_value(b, cp);
            auto vab = crossed_product_value(group_ring_multiply(*G, a, b), cp);
            const bool good = va.exact && vb.exact && vab.exact && !vab.infinite && vab.value == va.value + vb.value;
            ok += good;
            o.require(good, "p=" + std::to_string(p) + " pair " + std::to_string(t));
        }
        for (const auto& g : cp.reps) {
            GroupRingElement e;
            e.add(g, 1, p);
            auto v = crossed_product_value(e, cp);
            o.require(!v.infinite && v.value == 0, "p=" + std::to_string(p) + " rep " + g.to_string());
        }
        o.note << (o.note.tellp() > 0 ? ", " : "") << "p=" << p << ": " << ok << "/200, " << cp.reps.size() << " reps";
    }
    return o;
}

}  // namespace

int main() {
    const auto gs = golden_groups();
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"Mahler identity", [&] { return mahler_identity(gs); }},
        {"approximation growth", [&] { return approximation_growth(gs); }},
        {"u-map coherence", [&] { return u_map_coherence(gs); }},
        {"valuation construction", [&] { return valuation_construction(gs); }},
        {"equalizing filtration", [&] { return equalizing_filtration(gs); }},
        {"k-basis golden test", k_basis_golden},
        {"L-machinery", l_machinery},
        {"Moore determinant", moore_determinant},
        {"reduction coefficients", reduction_coefficients},
        {"Frobenius limit", frobenius_limit_criterion},
        {"growth and valuation", growth_valuation},
        {"elimination harness", elimination},
        {"crossed-product filtration", crossed_product},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.note << "error: " << e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += !o.pass;
        std::printf("criterion %2zu: %s  %-28s %6.1fs  %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                    secs, o.note.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
