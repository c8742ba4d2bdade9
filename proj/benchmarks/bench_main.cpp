#include <vector>

#include <benchmark/benchmark.h>

#include "rsf/model.hpp"
#include "rsf/operators.hpp"
#include "rsf/random.hpp"
#include "rsf/regress.hpp"
#include "rsf/symbols.hpp"

using namespace rsf;

namespace {

GridFunction noise(const SpaceTimeGrid& g, std::uint64_t seed) {
    Philox rng(seed);
    std::vector<double> v(g.size());
    rng.fill_normal(v);
    return GridFunction(g, std::move(v));
}

void BM_EnumerateBurgers(benchmark::State& state) {
    const DegreeConfig deg{2.0, -1.5, {{"c", 0.5}}, DegreeRule::Sum};
    EnumerateOptions eo;
    eo.degree = deg;
    eo.gamma = 2.5;
    for (auto _ : state) benchmark::DoNotOptimize(enumerate(3, Alpha{2, 0, 0, 1}, {"c"}, eo));
}
BENCHMARK(BM_EnumerateBurgers)->Unit(benchmark::kMillisecond);

void BM_EnumerateParabolic(benchmark::State& state) {
    const DegreeConfig deg{2.0, -1.5, {}, DegreeRule::Sum};
    EnumerateOptions eo;
    eo.degree = deg;
    eo.gamma = 5.0;
    for (auto _ : state) benchmark::DoNotOptimize(enumerate(4, Alpha{3, 2, 1, 0}, {}, eo));
}
BENCHMARK(BM_EnumerateParabolic)->Unit(benchmark::kMillisecond);

void BM_HeatApply(benchmark::State& state) {
    const SpaceTimeGrid g{0.0, 1.0, 1000, 0.0, 1.0, static_cast<int>(state.range(0)), 1, true};
    const auto ops = OperatorBundle::heat(g, 1.0);
    const auto f = noise(g, 1);
    for (auto _ : state) benchmark::DoNotOptimize(ops.apply(f));
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * g.size()));
}
BENCHMARK(BM_HeatApply)->Arg(100)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_EvaluateParabolicModel(benchmark::State& state) {
    const SpaceTimeGrid g{0.0, 1.0, 1000, 0.0, 1.0, 100, 1, true};
    const DegreeConfig deg{2.0, -1.5, {}, DegreeRule::Sum};
    EnumerateOptions eo;
    eo.degree = deg;
    eo.gamma = 5.0;
    const auto fs = enumerate(4, Alpha{3, 2, 1, 0}, {}, eo);
    const auto ops = OperatorBundle::heat(g, 1.0);
    ModelInput in;
    in.xi.push_back(noise(g, 2));
    for (auto _ : state) benchmark::DoNotOptimize(evaluate(fs, in, ops));
    state.counters["features"] = static_cast<double>(fs.size());
}
BENCHMARK(BM_EvaluateParabolicModel)->Unit(benchmark::kMillisecond);

void BM_OlsFit(benchmark::State& state) {
    const auto rows = static_cast<int>(state.range(0));
    const auto cols = static_cast<int>(state.range(1));
    Philox rng(3);
    Eigen::MatrixXd X(rows, cols);
    Eigen::VectorXd y(rows);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) X(i, j) = rng.next_normal();
        y(i) = rng.next_normal();
    }
    for (auto _ : state) benchmark::DoNotOptimize(ols_fit(X, y));
}
BENCHMARK(BM_OlsFit)->Args({700, 56})->Args({20000, 20})->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
