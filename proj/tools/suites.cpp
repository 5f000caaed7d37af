#include "suites.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "iwa/errors.hpp"
#include "iwa/graded.hpp"
#include "iwa/iwasawa.hpp"
#include "iwa/lie.hpp"
#include "iwa/valmat.hpp"

namespace iwa::tools {

namespace {

std::uint64_t suite_seed(std::uint64_t seed, const std::string& name) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : name) h = (h ^ c) * 1099511628211ull;
    return seed ^ h;
}

GroupDescriptor effective(const GroupDescriptor& desc, const SuiteConfig& cfg) {
    GroupDescriptor d = desc;
    if (cfg.precision) d.precision = *cfg.precision;
    return d;
}

void tag(Report& rep, const std::string& suffix, const std::vector<std::pair<std::string, std::string>>& params) {
    for (auto& r : rep.records) {
        r.id += suffix;
        r.params.insert(r.params.end(), params.begin(), params.end());
    }
}

void add_error(Report& rep, const std::string& id, const std::exception& e) {
    auto& r = rep.add(id, "computation raised an error", false, e.what());
    r.status = Status::Error;
}

template <class F>
void guarded(Report& rep, const std::string& id, F&& f) {
    try {
        f();
    } catch (const std::exception& e) {
        add_error(rep, id, e);
    }
}

int first_m(const Group& G, const SuiteConfig& cfg) {
    const int m1 = G.initial_power();
    if (cfg.m1) {
        if (*cfg.m1 < m1)
            throw DomainError("--m1 " + std::to_string(*cfg.m1) + " is below the initial power " + std::to_string(m1));
        return *cfg.m1;
    }
    return m1;
}

// ---------------------------------------------------------------- group suites

Report suite_group(std::shared_ptr<const Group> Gp, const SuiteConfig& cfg, std::mt19937_64& rng) {
    const Group& G = *Gp;
    Report rep;
    int assoc = 0, inv = 0, hom = 0;
    for (int t = 0; t < 200; ++t) {
        auto a = G.random_element(rng), b = G.random_element(rng), c = G.random_element(rng);
        assoc += G.equal(G.multiply(G.multiply(a, b), c), G.multiply(a, G.multiply(b, c)));
        inv += G.is_identity(G.multiply(a, G.inverse(a)));
    }
    for (int t = 0; t < 50; ++t) {
        auto g = G.random_element(rng);
        auto s = G.random_scalar(rng), u = G.random_scalar(rng);
        hom += G.equal(G.power(g, s + u), G.multiply(G.power(g, s), G.power(g, u)));
    }
    rep.add("associativity", "(gh)k = g(hk)", assoc == 200, std::to_string(assoc) + "/200");
    rep.add("inverse", "g g^-1 = 1", inv == 200, std::to_string(inv) + "/200");
    rep.add("power-homomorphism", "g^(a+b) = g^a g^b", hom == 50, std::to_string(hom) + "/50");
    if (G.abelian()) {
        rep.add("u-map", "abelian group; u_m is trivial", true).status = Status::Skipped;
        return rep;
    }
    guarded(rep, "u-map", [&] {
        const int m0 = first_m(G, cfg);
        int coh = 0, lin = 0;
        std::string w;
        for (int t = 0; t < 100; ++t) {
            auto h = G.random_h_element(rng), k = G.random_h_element(rng);
            const int m = m0 + t % 3;
            auto next = G.u_map(h, m + 1), pw = G.power(G.u_map(h, m), static_cast<u64>(G.p()));
            if (G.equal(next, pw)) ++coh;
            else if (w.empty()) w = "h = " + h.to_string() + ", m = " + std::to_string(m);
            lin += G.equal(G.u_map(G.multiply(h, k), m), G.multiply(G.u_map(h, m), G.u_map(k, m)));
        }
        rep.add("u-map-coherence", "u_{m+1}(h) = u_m(h)^p", coh == 100, std::to_string(coh) + "/100", w);
        rep.add("u-map-homomorphism", "u_m(hk) = u_m(h) u_m(k)", lin == 100, std::to_string(lin) + "/100");
    });
    return rep;
}

Report suite_valuation(std::shared_ptr<const Group> Gp, const SuiteConfig& cfg, std::uint64_t seed) {
    Report rep;
    ValuationConstruction vc = build_valuation(*Gp, std::nullopt, std::nullopt, cfg.samples, seed);
    rep.merge(vc.validation);
    std::string nums;
    for (auto n : vc.spec.numerators) nums += (nums.empty() ? "" : ",") + std::to_string(n);
    rep.add("constructed", "abelian p-valuation on the uniform level", vc.validation.passed(),
            "level=" + std::to_string(vc.level.level) + " e=" + std::to_string(vc.spec.e) + " values=" + nums);
    return rep;
}

Report suite_lie(std::shared_ptr<const Group> Gp, std::mt19937_64& rng) {
    const Group& G = *Gp;
    Report rep;
    int ok = 0;
    std::string w;
    for (int t = 0; t < 20; ++t) {
        auto g = G.random_element(rng), h = G.random_h_element(rng);
        Report r = commutator_transport_check(G, g, h);
        if (r.passed()) ++ok;
        else if (w.empty() && r.first_failure()) w = r.first_failure()->witness;
    }
    rep.add("commutator-transport", "(g,h) = exp(sum ad(u)^n(v)/n!)", ok == 20, std::to_string(ok) + "/20", w);
    CenterSplit cs = center_and_split_test(G);
    rep.add("split-centre", "H = H' x Z(G)", cs.lattice_split,
            "rank=" + std::to_string(cs.rank) + " split=" + (cs.split ? "true" : "false"));
    ExtendedCommutator ec = extended_commutator(G);
    Report ecr = ec.checks;
    for (auto& r : ecr.records) r.id = "c(G)/" + r.id;
    rep.merge(ecr);
    KBasisData kb = k_basis(G);
    KBasisCheck kc = validate_k_basis(G, kb.k);
    for (auto& r : kc.report.records) r.id = "k-basis/" + r.id;
    rep.merge(kc.report);
    return rep;
}

Report suite_mahler(std::shared_ptr<const Group> Gp, const SuiteConfig& cfg, std::uint64_t seed) {
    Report rep;
    const Group& G = *Gp;
    AlgebraPtr A = IwasawaAlgebra::standard(Gp, cfg.truncation);
    const int m0 = first_m(G, cfg);
    const int cap = cfg.mahler_cap.value_or(cfg.truncation - 1);
    for (int m = m0; m < m0 + 3; ++m) {
        const std::string suffix = "@m=" + std::to_string(m);
        try {
            Report r = verify_mahler_expansion(A, m, cap, 50, seed + m);
            tag(r, suffix, {{"m", std::to_string(m)}});
            rep.merge(r);
        } catch (const Error& e) {
            add_error(rep, "mahler-expansion" + suffix, e);
        }
    }
    guarded(rep, "epsilon-growth", [&] { rep.merge(verify_epsilon_bound(A, m0, 3)); });
    return rep;
}

Report suite_theta(std::shared_ptr<const Group> Gp, const SuiteConfig& cfg, std::uint64_t seed) {
    const Group& G = *Gp;
    ValuationConstruction vc = build_valuation(G, std::nullopt, std::nullopt, cfg.samples, seed);
    KBasisData kb = k_basis(G);
    ThetaResult th = theta_check(G, kb, vc.spec);
    return th.report;
}

Report suite_lazard(std::shared_ptr<const Group> Gp, const SuiteConfig& cfg, std::uint64_t seed,
                    std::mt19937_64& rng) {
    Report rep;
    const Group& G = *Gp;
    const std::uint32_t p = G.p();
    ValuationConstruction vc = build_valuation(G, std::nullopt, std::nullopt, cfg.samples, seed);
    AlgebraPtr A = valuation_algebra(Gp, vc.spec, cfg.truncation);
    const std::vector<long long> w = lazard_weights(*A, vc.spec);
    const long long thr = reliable_threshold(*A, w);

    int tested = 0, ok = 0;
    std::string witness;
    for (int t = 0; t < 5000 && tested < 100; ++t) {
        IwasawaElement x = random_element(A, rng, 0.15);
        x.slices()[0][0] = 0;
        FiltrationValue v = lazard_value(x, w);
        if (v.infinite || v.value * static_cast<long long>(p) >= thr) continue;
        ++tested;
        FiltrationValue vp = lazard_value(x.pow(p), w);
        if (!vp.infinite && vp.exact && vp.value == static_cast<long long>(p) * v.value) ++ok;
        else if (witness.empty()) witness = "v(x) = " + v.to_string() + ", v(x^p) = " + vp.to_string();
    }
    rep.add("lazard-power", "v(x^p) = p v(x)", tested > 0 && ok == tested,
            std::to_string(ok) + "/" + std::to_string(tested), witness);

    int ftested = 0, fok = 0;
    std::string fw;
    const int T = cfg.truncation;
    int mlog = 0;
    for (long long pm = 1; pm < T; pm *= p) ++mlog;
    for (int t = 0; t < 2000 && ftested < 50; ++t) {
        IwasawaElement a = random_element(A, rng, 0.15);
        a.slices()[0][0] = 1 + static_cast<std::uint32_t>(rng() % (p - 1));
        FrobeniusLimit fl;
        try {
            fl = frobenius_limit(a, w);
        } catch (const DomainError&) {
            continue;
        }
        ++ftested;
        IwasawaElement apm = a;
        for (int k = 0; k < mlog; ++k) apm = apm.pow(p);
        FiltrationValue dv = lazard_value(apm - fl.b, w);
        const bool good = fl.fixed && fl.b.pow(p) == fl.b && at_least(dv, (T + 1) / 2);
        if (good) ++fok;
        else if (fw.empty()) fw = "trial " + std::to_string(t) + ": v(a^{p^m} - b) = " + dv.to_string();
    }
    rep.add("frobenius-limit", "a^{p^m} -> b with b^p = b", ftested > 0 && fok == ftested,
            std::to_string(fok) + "/" + std::to_string(ftested) + " m=" + std::to_string(mlog), fw);
    return rep;
}

Report suite_crossed(std::shared_ptr<const Group> Gp, const SuiteConfig& cfg, std::uint64_t seed,
                     std::mt19937_64& rng) {
    Report rep;
    const Group& G = *Gp;
    const std::uint32_t p = G.p();
    ValuationConstruction vc = build_valuation(G, std::nullopt, std::nullopt, cfg.samples, seed);
    KBasisData kb = k_basis(G);
    ThetaResult th = theta_check(G, kb, vc.spec);
    CrossedProduct cp = make_crossed_product(Gp, th.u_spec);
    const int nb = static_cast<int>(th.u_spec.basis.size());
    int ok = 0;
    std::string w;
    for (int t = 0; t < 200; ++t) {
        std::vector<int> n1(nb), n2(nb);
        for (auto& x : n1) x = static_cast<int>(rng() % 3);
        for (auto& x : n2) x = static_cast<int>(rng() % 3);
        auto g = G.random_element(rng), h = G.random_element(rng);
        auto a = group_ring_monomial(G, th.u_spec.basis, n1, g);
        auto b = group_ring_monomial(G, th.u_spec.basis, n2, h);
        auto va = crossed_product_value(a, cp), vb = crossed_product_value(b, cp);
        auto vab = crossed_product_value(group_ring_multiply(G, a, b), cp);
        if (va.exact && vb.exact && vab.exact && !va.infinite && !vb.infinite && !vab.infinite &&
            vab.value == va.value + vb.value)
            ++ok;
        else if (w.empty())
            w = "w'(a) = " + va.to_string() + ", w'(b) = " + vb.to_string() + ", w'(ab) = " + vab.to_string();
    }
    rep.add("crossed-multiplicative", "w'(ab) = w'(a) + w'(b) on monomials", ok == 200, std::to_string(ok) + "/200", w);
    int zero = 0;
    for (const auto& g : cp.reps) {
        GroupRingElement e;
        e.add(g, 1, p);
        auto v = crossed_product_value(e, cp);
        zero += !v.infinite && v.value == 0;
    }
    rep.add("coset-reps", "w'(g) = 0 for coset representatives", zero == static_cast<int>(cp.reps.size()),
            std::to_string(zero) + "/" + std::to_string(cp.reps.size()));
    return rep;
}

Report suite_graded(std::shared_ptr<const Group> Gp, const SuiteConfig& cfg, std::uint64_t seed,
                    std::mt19937_64& rng) {
    Report rep;
    const Group& G = *Gp;
    ValuationConstruction vc = build_valuation(G, std::nullopt, std::nullopt, cfg.samples, seed);
    KBasisData kb = k_basis(G);
    XAction act = XAction::from_k_basis(kb, G.d());
    BChain bc = b_chain(act, act.top_index());
    rep.merge(bc.report);
    std::vector<std::pair<std::string, GroupElement>> inputs;
    for (int t = 0; t < 3; ++t) inputs.emplace_back("random-" + std::to_string(t + 1), G.random_h_element(rng));
    if (kb.r > 0) inputs.emplace_back("strict", G.power(kb.k[0], static_cast<u64>(G.p())));
    for (const auto& [name, h] : inputs) {
        try {
            Report r = graded_reduction_shadow(Gp, kb, vc.spec, h, cfg.truncation);
            Report kept;
            for (auto& rec : r.records) {
                if (rec.id.rfind("y-", 0) == 0 || rec.id.rfind("h-level-", 0) == 0) {
                    rec.id = "shadow/" + name + "/" + rec.id;
                    rec.params.emplace_back("h", h.to_string());
                    kept.records.push_back(rec);
                }
            }
            rep.merge(kept);
        } catch (const Error& e) {
            add_error(rep, "shadow/" + name, e);
        }
    }
    return rep;
}

// ---------------------------------------------------------------- synthetic suites

// largest m <= wanted with z^{p^m} inside the default Laurent window
int window_levels(std::uint32_t p, int wanted) {
    int m = 0;
    long long pm = p;
    while (m < wanted && pm <= LaurentWindow{}.hi) {
        ++m;
        pm *= p;
    }
    return m;
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

Report suite_lpoly(std::mt19937_64& rng) {
    Report rep;
    const std::uint32_t primes[] = {2, 3, 5};
    int ok = 0;
    std::string w;
    for (int t = 0; t < 200; ++t) {
        const std::uint32_t p = primes[t % 3];
        const int n = 1 + static_cast<int>(rng() % 4);
        GradedPoly x = random_linear(p, 2, rng);
        std::vector<GradedPoly> ys;
        for (int i = 0; i < n; ++i) ys.push_back(random_linear(p, 2, rng));
        if (l_apply_coeffs(l_coeffs(ys, p, 2), x) == l_eval(x, ys)) ++ok;
        else if (w.empty()) w = "instance " + std::to_string(t) + " p=" + std::to_string(p) + " n=" + std::to_string(n);
    }
    rep.add("l-coefficient-form", "L^(n)(x, y) = a_0 x + a_1 x^p + ... + x^{p^n}", ok == 200,
            std::to_string(ok) + "/200", w);

    auto T = [](int i) { return GradedPoly::variable(3, 3, i); };
    XAction syn(3, 3, {T(2), T(2), GradedPoly(3, 3)});
    BChain bc = b_chain(syn, syn.top_index());
    for (auto& r : bc.report.records) r.id = "synthetic/" + r.id;
    rep.merge(bc.report);
    return rep;
}

Report suite_moore(std::mt19937_64& rng) {
    Report rep;
    for (std::uint32_t p : {2u, 3u})
        for (int t = 1; t <= 3; ++t) {
            std::vector<GradedPoly> forms;
            for (int i = 0; i < t; ++i) forms.push_back(GradedPoly::variable(p, t, i));
            auto m = moore_identity(forms);
            rep.add("symbolic@p=" + std::to_string(p) + ",t=" + std::to_string(t), "det[f_i^{p^j}] = beta prod",
                    m.pass, "beta=" + std::to_string(m.beta));
        }
    {
        auto m = moore_identity(std::vector<GradedPoly>{GradedPoly::variable(3, 2, 0), GradedPoly::variable(3, 2, 1)});
        rep.add("beta@p=3,t=2", "beta = 2", m.pass && m.beta == 2, std::to_string(m.beta));
    }
    int ok = 0;
    std::string w;
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
        if (m.pass || (m.determinant.is_zero() && m.product.is_zero())) ++ok;
        else if (w.empty()) w = "trial " + std::to_string(trial);
    }
    rep.add("laurent-specializations", "identity on Laurent specializations", ok == 100, std::to_string(ok) + "/100", w);
    return rep;
}

Report suite_growth(std::uint32_t p, std::mt19937_64& rng) {
    Report rep;
    FieldPtr F = GaloisField::make(p, 1);
    const auto z = LaurentSeries::monomial(F, 1, 1), one = LaurentSeries::constant(F, 1);
    const int M = window_levels(p, 4);

    GrowthEstimate g1 = growth_rate(ValuedMatrix::scalar(z, 2), M);
    bool ok1 = g1.estimate && std::all_of(g1.entries.begin(), g1.entries.end(), [](const auto& e) { return e.rate == 1.0; });
    rep.add("zI", "rho(z I) = 1", ok1, g1.estimate ? std::to_string(*g1.estimate) : "none");

    ValuedMatrix nil(F, 2);
    nil.at(0, 1) = one;
    GrowthEstimate g2 = growth_rate(nil, M);
    rep.add("nilpotent", "rho = infinity for nilpotent x", g2.saturated, g2.saturated ? "inf" : "finite");

    ValuedMatrix J(F, 2);
    J.at(0, 0) = z;
    J.at(1, 1) = z;
    J.at(0, 1) = one;
    GrowthEstimate g3 = growth_rate(J, M);
    bool ok3 = !g3.saturated && g3.monotone;
    long long pm = 1;
    for (const auto& e : g3.entries) {
        const long long expect = e.m == 0 ? 0 : pm;
        ok3 = ok3 && !e.value.infinite && e.value.value == expect;
        pm *= p;
    }
    rep.add("jordan", "v'(x^{p^m}) = p^m for m >= 1", ok3, g3.estimate ? std::to_string(*g3.estimate) : "none");

    int inv = 0;
    for (int t = 0; t < 10; ++t) {
        std::vector<std::vector<GaloisField::Elem>> rows(2, std::vector<GaloisField::Elem>(2));
        ValuedMatrix a;
        do {
            for (auto& r : rows)
                for (auto& c : r) c = F->random(rng);
            a = ValuedMatrix::from_constants(F, rows);
        } while (a.determinant().is_zero());
        GrowthEstimate gc = growth_rate(a * J * a.inverse(), M);
        inv += gc.estimate && g3.estimate && *gc.estimate == *g3.estimate;
    }
    rep.add("conjugation-invariance", "rho(a x a^-1) = rho(x)", inv == 10, std::to_string(inv) + "/10");

    Diagonalization dg = p_power_diagonalize({ValuedMatrix::from_constants(F, {{1, 1}, {0, 1}})});
    rep.add("jordan-block-diagonal", "a Jordan block becomes diagonal after a p-power", dg.m0 == 1,
            "m0=" + std::to_string(dg.m0));
    return rep;
}

Report suite_elimination(std::mt19937_64& rng) {
    Report rep;
    for (std::uint32_t p : {2u, 3u})
        for (int r = 1; r <= 3; ++r) {
            int recovered = 0, bound = 0;
            std::string w;
            for (int t = 0; t < 50; ++t) {
                PlantedOptions opt;
                opt.p = p;
                opt.r = r;
                opt.n = 2 + static_cast<int>(rng() % 2);
                EliminationResult res = elimination_harness(planted_instance(opt, rng));
                const CheckRecord* adj = nullptr;
                for (const auto& rec : res.report.records)
                    if (rec.id == "adjugate-bound") adj = &rec;
                bound += adj && adj->status == Status::Pass;
                if (res.precondition && res.recovered && res.report.passed()) ++recovered;
                else if (w.empty() && res.report.first_failure())
                    w = res.report.first_failure()->id + ": " + res.report.first_failure()->witness;
            }
            const std::string key = "@p=" + std::to_string(p) + ",r=" + std::to_string(r);
            rep.add("planted" + key, "e_j a_i = 0", recovered == 50, std::to_string(recovered) + "/50", w);
            rep.add("adjugate-bound" + key, "v(adj(S_m)) bound", bound == 50, std::to_string(bound) + "/50");
        }
    PlantedOptions dep;
    dep.p = 3;
    dep.r = 2;
    dep.dependent = true;
    EliminationResult res = elimination_harness(planted_instance(dep, rng));
    rep.add("dependent-instance", "no claim without independence", !res.precondition && res.report.passed(),
            res.precondition ? "precondition held" : "precondition fails");
    return rep;
}

bool group_suite(const std::string& name) {
    return name == "group" || name == "valuation" || name == "lie" || name == "mahler" || name == "theta" ||
           name == "lazard" || name == "crossed" || name == "graded";
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {"group",  "valuation", "lie",    "mahler", "theta",  "lazard",
                                                   "crossed", "graded",    "lpoly", "moore",  "growth", "elimination"};
    return names;
}

Report run_suite(const std::string& name, const GroupDescriptor& desc, const SuiteConfig& cfg) {
    Report rep;
    rep.suite = name;
    if (std::find(suite_names().begin(), suite_names().end(), name) == suite_names().end())
        throw DomainError("unknown suite '" + name + "'");
    const std::uint64_t seed = suite_seed(cfg.seed, name);
    std::mt19937_64 rng(seed);
    try {
        auto G = Group::make(effective(desc, cfg));
        if (group_suite(name) && name != "group" && G->abelian()) {
            rep.add("abelian", "non-abelian group required", true, "abelian group; suite skipped").status =
                Status::Skipped;
        } else if (name == "group") rep.merge(suite_group(G, cfg, rng));
        else if (name == "valuation") rep.merge(suite_valuation(G, cfg, seed));
        else if (name == "lie") rep.merge(suite_lie(G, rng));
        else if (name == "mahler") rep.merge(suite_mahler(G, cfg, seed));
        else if (name == "theta") rep.merge(suite_theta(G, cfg, seed));
        else if (name == "lazard") rep.merge(suite_lazard(G, cfg, seed, rng));
        else if (name == "crossed") rep.merge(suite_crossed(G, cfg, seed, rng));
        else if (name == "graded") rep.merge(suite_graded(G, cfg, seed, rng));
        else if (name == "lpoly") rep.merge(suite_lpoly(rng));
        else if (name == "moore") rep.merge(suite_moore(rng));
        else if (name == "growth") rep.merge(suite_growth(G->p(), rng));
        else if (name == "elimination") rep.merge(suite_elimination(rng));
    } catch (const std::exception& e) {
        add_error(rep, name + "-error", e);
    }
    std::stable_sort(rep.records.begin(), rep.records.end(),
                     [](const CheckRecord& a, const CheckRecord& b) { return a.id < b.id; });
    for (auto& r : rep.records) r.elapsed_ms = 0.0;
    return rep;
}

std::vector<Report> verify_all(const GroupDescriptor& desc, const SuiteConfig& cfg,
                               const std::optional<std::string>& only) {
    std::vector<std::string> names;
    if (only) {
        if (std::find(suite_names().begin(), suite_names().end(), *only) == suite_names().end())
            throw DomainError("unknown suite '" + *only + "'");
        names.push_back(*only);
    } else {
        names = suite_names();
    }
    std::vector<Report> out(names.size());
    if (cfg.parallel) {
        std::vector<std::future<Report>> jobs;
        for (const auto& n : names) jobs.push_back(std::async(std::launch::async, run_suite, n, desc, cfg));
        for (std::size_t i = 0; i < jobs.size(); ++i) out[i] = jobs[i].get();
    } else {
        for (std::size_t i = 0; i < names.size(); ++i) out[i] = run_suite(names[i], desc, cfg);
    }
    return out;
}

bool all_passed(const std::vector<Report>& reports) {
    return std::all_of(reports.begin(), reports.end(), [](const Report& r) { return r.passed(); });
}

GroupCheck group_check(const GroupDescriptor& desc, const SuiteConfig& cfg) {
    GroupCheck out;
    out.report.suite = "group-check";
    auto G = Group::make(effective(desc, cfg));
    out.abelian = G->abelian();
    out.uniform_level = G->uniform_level();
    if (out.abelian) {
        out.report.add("abelian", "M = I", true, "abelian group; downstream suites skipped").status = Status::Skipped;
        out.split = out.lattice_split = true;
        for (int i = 0; i < G->d(); ++i) out.z_basis.push_back(G->generator(i).to_string());
        return out;
    }
    out.initial_power = G->initial_power();
    CenterSplit cs = center_and_split_test(*G);
    out.split = cs.split;
    out.lattice_split = cs.lattice_split;
    for (const auto& z : cs.z_basis) out.z_basis.push_back(z.to_string());
    out.report.add("split-centre", "H = H' x Z(G)", cs.lattice_split, cs.split ? "split" : "not split");
    ValuationConstruction vc = build_valuation(*G, std::nullopt, std::nullopt, cfg.samples, cfg.seed);
    out.report.merge(vc.validation);
    return out;
}

// ---------------------------------------------------------------- tables

namespace {

std::string render_series(const IwasawaElement& x) {
    std::string s;
    for (const auto& [e, c] : x.terms()) {
        std::string mono;
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (!e[i]) continue;
            const std::string var = i + 1 == e.size() ? "bx" : "b" + std::to_string(i + 1);
            mono += (mono.empty() ? "" : "*") + var + (e[i] > 1 ? "^" + std::to_string(e[i]) : "");
        }
        std::string term = mono.empty() ? std::to_string(c) : (c == 1 ? mono : std::to_string(c) + "*" + mono);
        s += (s.empty() ? "" : " + ") + term;
    }
    return s.empty() ? "0" : s;
}

std::string join(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

void all_alphas(int d, int maxdeg, std::vector<int>& cur, int i, std::vector<std::vector<int>>& out) {
    if (i == d) {
        out.push_back(cur);
        return;
    }
    int used = 0;
    for (int k = 0; k < i; ++k) used += cur[k];
    for (int a = 0; a + used <= maxdeg; ++a) {
        cur[i] = a;
        all_alphas(d, maxdeg, cur, i + 1, out);
    }
    cur[i] = 0;
}

}  // namespace

Table make_table(const std::string& what, const GroupDescriptor& desc, const SuiteConfig& cfg,
                 const TableOptions& opt) {
    Table t;
    t.name = what;
    auto G = Group::make(effective(desc, cfg));
    if (what == "mahler-coeffs") {
        if (G->abelian()) throw DomainError("Mahler coefficients need a non-abelian group");
        AlgebraPtr A = IwasawaAlgebra::standard(G, cfg.truncation);
        const int m = opt.m.value_or(first_m(*G, cfg));
        std::vector<std::vector<int>> alphas;
        if (opt.alpha) {
            if (static_cast<int>(opt.alpha->size()) != G->d()) throw DomainError("alpha needs d entries");
            alphas.push_back(*opt.alpha);
        } else {
            std::vector<int> cur(G->d(), 0);
            all_alphas(G->d(), opt.max_degree, cur, 0, alphas);
            std::sort(alphas.begin(), alphas.end(), [](const auto& a, const auto& b) {
                int sa = 0, sb = 0;
                for (int x : a) sa += x;
                for (int x : b) sb += x;
                return sa != sb ? sa < sb : a > b;
            });
        }
        t.columns = {"alpha", "m", "coefficient"};
        for (const auto& a : alphas) t.rows.push_back({join(a), std::to_string(m), render_series(mahler_coefficient(A, m, a))});
    } else if (what == "lazard-values") {
        if (G->abelian()) throw DomainError("the valuation construction needs a non-abelian group");
        ValuationConstruction vc = build_valuation(*G, std::nullopt, std::nullopt, cfg.samples, cfg.seed);
        t.columns = {"generator", "element", "omega", "weight"};
        for (std::size_t i = 0; i < vc.spec.basis.size(); ++i) {
            const bool last = i + 1 == vc.spec.basis.size();
            std::ostringstream om;
            om << vc.spec.numerators[i] << "/" << vc.spec.e;
            t.rows.push_back({last ? "x" : "g" + std::to_string(i + 1), vc.spec.basis[i].to_string(), om.str(),
                              std::to_string(vc.spec.numerators[i])});
        }
    } else if (what == "growth") {
        FieldPtr F = GaloisField::make(G->p(), 1);
        const auto z = LaurentSeries::monomial(F, 1, 1), one = LaurentSeries::constant(F, 1);
        ValuedMatrix nil(F, 2), J(F, 2);
        nil.at(0, 1) = one;
        J.at(0, 0) = z;
        J.at(1, 1) = z;
        J.at(0, 1) = one;
        const std::vector<std::pair<std::string, ValuedMatrix>> xs = {
            {"zI", ValuedMatrix::scalar(z, 2)}, {"nilpotent", nil}, {"jordan", J}};
        t.columns = {"matrix", "m", "value", "rate"};
        for (const auto& [name, x] : xs) {
            GrowthEstimate g = growth_rate(x, window_levels(G->p(), opt.growth_m));
            for (const auto& e : g.entries) {
                std::ostringstream r;
                if (e.value.infinite) r << "inf";
                else r << std::setprecision(6) << e.rate;
                t.rows.push_back({name, std::to_string(e.m), e.value.to_string(), r.str()});
            }
        }
    } else if (what == "kbasis") {
        if (G->abelian()) throw DomainError("k-basis needs a non-abelian group");
        KBasisData kb = k_basis(*G);
        t.columns = {"k", "element", "t", "D-row"};
        for (std::size_t i = 0; i < kb.k.size(); ++i) {
            std::string row;
            if (i < kb.D.size())
                for (std::size_t j = 0; j < kb.D[i].size(); ++j) row += (j ? " " : "") + std::to_string(kb.D[i][j]);
            t.rows.push_back({"k" + std::to_string(i + 1), kb.k[i].to_string(),
                              i < kb.t.size() ? std::to_string(kb.t[i]) : "-", row.empty() ? "-" : row});
        }
    } else {
        throw DomainError("unknown table '" + what + "'");
    }
    return t;
}

// ---------------------------------------------------------------- formatting

namespace {

std::string matrix_text(const GroupDescriptor& d) {
    std::string s;
    for (std::size_t i = 0; i < d.m.size(); ++i) s += (i ? " " : "") + std::to_string(d.m[i]);
    return s;
}

std::string config_text(const GroupDescriptor& d, const SuiteConfig& cfg) {
    std::ostringstream os;
    os << "p=" << d.p << " d=" << d.d << " eps=" << d.eps << " precision=" << cfg.precision.value_or(d.precision)
       << " truncation=" << cfg.truncation << " seed=" << cfg.seed
       << " m1=" << (cfg.m1 ? std::to_string(*cfg.m1) : "auto")
       << " mahler-cap=" << cfg.mahler_cap.value_or(cfg.truncation - 1);
    return os.str();
}

}  // namespace

std::string format_text(const std::vector<Report>& reports, const GroupDescriptor& desc, const SuiteConfig& cfg) {
    std::ostringstream os;
    os << "# iwa-report v" << kReportVersion << "\n";
    os << "# " << config_text(desc, cfg) << " M=[" << matrix_text(desc) << "]\n";
    std::size_t total = 0, failed = 0, errors = 0, skipped = 0;
    for (const auto& rep : reports)
        for (const auto& r : rep.records) {
            ++total;
            if (r.status == Status::Fail) ++failed;
            if (r.status == Status::Error) ++errors;
            if (r.status == Status::Skipped) ++skipped;
            std::string st = status_name(r.status);
            std::transform(st.begin(), st.end(), st.begin(), ::toupper);
            os << std::left << std::setw(8) << st << rep.suite << "/" << r.id << "  [" << r.anchor << "]";
            if (!r.value.empty()) os << "  " << r.value;
            if (!r.witness.empty()) os << "  witness: " << r.witness;
            os << "\n";
        }
    os << "# summary checks=" << total << " failed=" << failed << " errors=" << errors << " skipped=" << skipped << "\n";
    return os.str();
}

std::string format_json(const std::vector<Report>& reports, const GroupDescriptor& desc, const SuiteConfig& cfg) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["format"] = "iwa-report";
    j["version"] = kReportVersion;
    ordered_json c;
    c["p"] = desc.p;
    c["d"] = desc.d;
    c["eps"] = desc.eps;
    c["M"] = desc.m;
    c["precision"] = cfg.precision.value_or(desc.precision);
    c["truncation"] = cfg.truncation;
    c["seed"] = cfg.seed;
    c["m1"] = cfg.m1 ? ordered_json(*cfg.m1) : ordered_json("auto");
    c["mahler_cap"] = cfg.mahler_cap.value_or(cfg.truncation - 1);
    j["config"] = c;
    ordered_json recs = ordered_json::array();
    std::size_t failed = 0;
    for (const auto& rep : reports)
        for (const auto& r : rep.records) {
            ordered_json x;
            x["suite"] = rep.suite;
            x["id"] = r.id;
            x["anchor"] = r.anchor;
            ordered_json params = ordered_json::object();
            for (const auto& [k, v] : r.params) params[k] = v;
            x["params"] = params;
            x["status"] = status_name(r.status);
            x["value"] = r.value;
            x["witness"] = r.witness;
            recs.push_back(x);
            failed += !r.ok();
        }
    j["records"] = recs;
    j["summary"] = {{"checks", recs.size()}, {"failed", failed}, {"passed", failed == 0}};
    return j.dump(2) + "\n";
}

std::string format_table_text(const Table& t) {
    std::vector<std::size_t> width(t.columns.size());
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        width[c] = t.columns[c].size();
        for (const auto& r : t.rows) width[c] = std::max(width[c], r[c].size());
    }
    std::ostringstream os;
    os << "# iwa-table v" << kReportVersion << " " << t.name << "\n";
    for (std::size_t c = 0; c < t.columns.size(); ++c)
        os << (c ? "  " : "") << std::left << std::setw(c + 1 < t.columns.size() ? static_cast<int>(width[c]) : 0)
           << t.columns[c];
    os << "\n";
    for (const auto& r : t.rows) {
        for (std::size_t c = 0; c < r.size(); ++c)
            os << (c ? "  " : "") << std::left << std::setw(c + 1 < r.size() ? static_cast<int>(width[c]) : 0) << r[c];
        os << "\n";
    }
    os << "\n";
    for (const auto& r : t.rows) {
        os << "row";
        for (std::size_t c = 0; c < r.size(); ++c) os << "\t" << t.columns[c] << "=" << r[c];
        os << "\n";
    }
    return os.str();
}

std::string format_table_json(const Table& t) {
    nlohmann::ordered_json j;
    j["format"] = "iwa-table";
    j["version"] = kReportVersion;
    j["table"] = t.name;
    j["columns"] = t.columns;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : t.rows) {
        nlohmann::ordered_json x;
        for (std::size_t c = 0; c < r.size(); ++c) x[t.columns[c]] = r[c];
        rows.push_back(x);
    }
    j["rows"] = rows;
    return j.dump(2) + "\n";
}

}  // namespace iwa::tools
