#include <benchmark/benchmark.h>

#include <random>

#include "iwa/graded.hpp"
#include "iwa/iwasawa.hpp"
#include "iwa/lie.hpp"
#include "iwa/valmat.hpp"

using namespace iwa;

namespace {

void BM_GroupMultiply(benchmark::State& state) {
    Group G(remark_group_descriptor(static_cast<std::uint32_t>(state.range(0))));
    std::mt19937_64 rng(1);
    auto a = G.random_element(rng), b = G.random_element(rng);
    for (auto _ : state) {
        a = G.multiply(a, b);
        benchmark::DoNotOptimize(a);
    }
}
BENCHMARK(BM_GroupMultiply)->Arg(3)->Arg(5);

void BM_AlgebraMultiply(benchmark::State& state) {
    auto G = Group::make(remark_group_descriptor(3));
    AlgebraPtr A = IwasawaAlgebra::standard(G, static_cast<int>(state.range(0)));
    std::mt19937_64 rng(2);
    auto x = random_element(A, rng), y = random_element(A, rng);
    for (auto _ : state) benchmark::DoNotOptimize(x * y);
}
BENCHMARK(BM_AlgebraMultiply)->Arg(8)->Arg(12)->Arg(16);

void BM_MahlerExpansion(benchmark::State& state) {
    auto G = Group::make(remark_group_descriptor(static_cast<std::uint32_t>(state.range(0))));
    AlgebraPtr A = IwasawaAlgebra::standard(G, 12);
    for (auto _ : state) benchmark::DoNotOptimize(verify_mahler_expansion(A, 0, 11, 5, 1));
}
BENCHMARK(BM_MahlerExpansion)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_ValuationConstruction(benchmark::State& state) {
    Group G(remark_group_descriptor(3));
    for (auto _ : state) benchmark::DoNotOptimize(build_valuation(G, std::nullopt, std::nullopt, 100, 1));
}
BENCHMARK(BM_ValuationConstruction)->Unit(benchmark::kMillisecond);

void BM_LCoefficients(benchmark::State& state) {
    const std::uint32_t p = 3;
    std::vector<GradedPoly> ys;
    for (int i = 0; i < state.range(0); ++i)
        ys.push_back(GradedPoly::variable(p, 2, 0) + GradedPoly::variable(p, 2, 1).scaled(i + 1));
    for (auto _ : state) benchmark::DoNotOptimize(l_coeffs(ys, p, 2));
}
BENCHMARK(BM_LCoefficients)->DenseRange(1, 4);

void BM_LaurentPow(benchmark::State& state) {
    FieldPtr F = GaloisField::make(3, 2);
    LaurentSeries s(F);
    for (int e = 0; e < 6; ++e) s.set(e, static_cast<GaloisField::Elem>(e + 1));
    for (auto _ : state) benchmark::DoNotOptimize(s.pow(static_cast<std::uint64_t>(state.range(0))));
}
BENCHMARK(BM_LaurentPow)->Arg(9)->Arg(27)->Arg(81);

void BM_ValuedDeterminant(benchmark::State& state) {
    FieldPtr F = GaloisField::make(2, 2);
    const int n = static_cast<int>(state.range(0));
    std::mt19937_64 rng(3);
    ValuedMatrix m(F, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int e = 0; e < 3; ++e) m.at(i, j).set(e, F->random(rng));
    for (auto _ : state) benchmark::DoNotOptimize(m.determinant());
}
BENCHMARK(BM_ValuedDeterminant)->DenseRange(2, 5);

void BM_EliminationHarness(benchmark::State& state) {
    std::mt19937_64 rng(4);
    PlantedOptions opt;
    opt.p = 3;
    opt.r = static_cast<int>(state.range(0));
    EliminationInstance inst = planted_instance(opt, rng);
    for (auto _ : state) benchmark::DoNotOptimize(elimination_harness(inst));
}
BENCHMARK(BM_EliminationHarness)->DenseRange(1, 3)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
