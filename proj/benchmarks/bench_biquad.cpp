#include <benchmark/benchmark.h>

#include <random>
#include <sstream>

#include "biquad/curve.hpp"
#include "biquad/elliptic.hpp"
#include "biquad/johnmap.hpp"
#include "biquad/pellabel.hpp"
#include "biquad/poncelet.hpp"
#include "cli.hpp"

using namespace biquad;

static void BM_JacobiReal(benchmark::State& st)
{
    double u = 0.3;
    for (auto _ : st) {
        benchmark::DoNotOptimize(elliptic::jacobi_real(u, 0.7));
        u += 1e-9;
    }
}
BENCHMARK(BM_JacobiReal);

static void BM_JacobiComplex(benchmark::State& st)
{
    for (auto _ : st) benchmark::DoNotOptimize(elliptic::jacobi(cplx(0.4, 0.9), 0.7));
}
BENCHMARK(BM_JacobiComplex);

static void BM_Wp(benchmark::State& st)
{
    auto d = elliptic::WeierstrassData::from_invariants(4.0, 1.0);
    for (auto _ : st) benchmark::DoNotOptimize(elliptic::wp(cplx(0.37, 0.21), d));
}
BENCHMARK(BM_Wp);

static void BM_JohnOrbit(benchmark::State& st)
{
    auto c = curve::euler_baxter(1, 3.3, 1);
    auto p = john::make_point(c, 0.5, -0.25);
    for (auto _ : st) {
        auto q = p;
        for (int i = 0; i < st.range(0); ++i) q = john::john_T(c, q);
        benchmark::DoNotOptimize(q);
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_JohnOrbit)->Arg(64)->Arg(1024);

static void BM_CayleyFloat(benchmark::State& st)
{
    auto A = poncelet::Conic::circle(0, 0, 1).M, B = poncelet::Conic::circle(0.2, 0, 2.5).M;
    for (auto _ : st) benchmark::DoNotOptimize(poncelet::cayley_test(A, B, static_cast<int>(st.range(0))));
}
BENCHMARK(BM_CayleyFloat)->Arg(5)->Arg(12);

static void BM_CayleyExact(benchmark::State& st)
{
    auto A = poncelet::to_rational(poncelet::Conic::circle(0, 0, 1).M);
    auto B = poncelet::to_rational(poncelet::Conic::circle(0.25, 0, 2.5).M);
    for (auto _ : st) benchmark::DoNotOptimize(poncelet::cayley_test(A, B, static_cast<int>(st.range(0))));
}
BENCHMARK(BM_CayleyExact)->Arg(5)->Arg(12);

static void BM_PellAbel(benchmark::State& st)
{
    std::vector<rat> c{2, 0, -2, 0, 1};
    PolyQ R(std::move(c));
    for (auto _ : st) benchmark::DoNotOptimize(pell::pell_abel_solve(R, 16));
}
BENCHMARK(BM_PellAbel);

static void BM_Crosscheck(benchmark::State& st)
{
    for (auto _ : st) {
        std::ostringstream out, err;
        benchmark::DoNotOptimize(cli::run({"crosscheck", "--cases", "8", "--threads", "1"}, out, err));
    }
}
BENCHMARK(BM_Crosscheck)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
