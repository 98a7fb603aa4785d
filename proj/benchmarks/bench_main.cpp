#include <benchmark/benchmark.h>

#include <random>

#include "smallgain/graph.hpp"
#include "smallgain/lyapunov.hpp"
#include "smallgain/omega_path.hpp"
#include "smallgain/parser.hpp"
#include "smallgain/simulate.hpp"
#include "smallgain/smallgain.hpp"

using namespace smallgain;

namespace {

GainNetwork ring(std::size_t n, const Maf& mu) {
    std::vector<std::vector<GainExpr>> g(n, std::vector<GainExpr>(n));
    for (std::size_t i = 0; i < n; ++i) {
        g[i][(i + 1) % n] = GainExpr::linear(0.3);
        g[i][(i + n - 1) % n] = GainExpr::saturating(0.2);
    }
    return GainNetwork(g, std::vector<GainExpr>(n), std::vector<Maf>(n, mu));
}

GainNetwork complete(std::size_t n, const Maf& mu) {
    std::vector<std::vector<GainExpr>> g(n, std::vector<GainExpr>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j) g[i][j] = GainExpr::linear(0.5 / static_cast<double>(n));
        }
    }
    return GainNetwork(g, std::vector<GainExpr>(n), std::vector<Maf>(n, mu));
}

LinearParams demo() {
    LinearParams p;
    p.A = {{{-1.0}}, {{-1.0}}};
    p.Q = {{{2.0}}, {{2.0}}};
    p.B = {{{1.0}}, {{1.0}}};
    p.Delta = {{{}, {{0.2}}}, {{{0.2}}, {}}};
    p.input_dim = 1;
    return p;
}

}  // namespace

static void BM_ParseGain(benchmark::State& st) {
    const std::string text = "max(0.3*s, (1*s/(1+s)) o (2*sqrt(s))) + id+(0.1*atan(s))";
    for (auto _ : st) benchmark::DoNotOptimize(parse_gain(text));
}
BENCHMARK(BM_ParseGain);

static void BM_InvertGain(benchmark::State& st) {
    const GainExpr g = parse_gain("max(0.3*s, (1*s/(1+s)) o (2*sqrt(s))) + 0.1*atan(s)");
    double y = 0.5;
    for (auto _ : st) {
        benchmark::DoNotOptimize(invert_gain(g, y));
        y = y < 10.0 ? y * 1.01 : 0.5;
    }
}
BENCHMARK(BM_InvertGain);

static void BM_CycleCondition(benchmark::State& st) {
    const GainNetwork net = complete(static_cast<std::size_t>(st.range(0)), Maf::max());
    for (auto _ : st) benchmark::DoNotOptimize(check_cycle_condition(net));
}
BENCHMARK(BM_CycleCondition)->DenseRange(3, 7, 2)->Unit(benchmark::kMillisecond);

static void BM_Falsify(benchmark::State& st) {
    const GainNetwork net = ring(static_cast<std::size_t>(st.range(0)), Maf::sum());
    for (auto _ : st) benchmark::DoNotOptimize(falsify_sgc(net));
}
BENCHMARK(BM_Falsify)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_PathIrreducible(benchmark::State& st) {
    const GainNetwork net = ring(static_cast<std::size_t>(st.range(0)), Maf::sum());
    for (auto _ : st) benchmark::DoNotOptimize(path_irreducible(net));
}
BENCHMARK(BM_PathIrreducible)->Arg(3)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_PathThreeSum(benchmark::State& st) {
    const GainNetwork net = complete(3, Maf::sum());
    for (auto _ : st) benchmark::DoNotOptimize(path_three_sum(net));
}
BENCHMARK(BM_PathThreeSum)->Unit(benchmark::kMillisecond);

static void BM_Compose(benchmark::State& st) {
    const LinearGains lg = linear_gains(demo());
    const OmegaPath sigma = construct_path(lg.net).sigma;
    std::vector<SubsystemSpec> subs;
    for (const Matrix& P : lg.P) subs.push_back(SubsystemSpec::quadratic(P));
    for (auto _ : st) benchmark::DoNotOptimize(compose(lg.net, sigma, subs));
}
BENCHMARK(BM_Compose)->Unit(benchmark::kMillisecond);

static void BM_CheckDecrease(benchmark::State& st) {
    const LinearGains lg = linear_gains(demo());
    std::vector<SubsystemSpec> subs;
    for (const Matrix& P : lg.P) subs.push_back(SubsystemSpec::quadratic(P));
    const CompositeLyapunov cl = compose(lg.net, construct_path(lg.net).sigma, subs);
    const SystemModel m = SystemModel::linear(demo());
    DecreaseSpec s;
    s.samples = 1000;
    for (auto _ : st) benchmark::DoNotOptimize(check_decrease(m, cl, s));
}
BENCHMARK(BM_CheckDecrease)->Unit(benchmark::kMillisecond);

static void BM_IntegrateRk4(benchmark::State& st) {
    const SystemModel m = SystemModel::linear(demo());
    for (auto _ : st) benchmark::DoNotOptimize(integrate(m, {1.0, -0.5}, InputSignal::step({1.0}), 20.0, 0.01));
}
BENCHMARK(BM_IntegrateRk4)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
