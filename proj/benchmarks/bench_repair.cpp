#include "ftrepair/case_studies.hpp"
#include "ftrepair/dsl.hpp"
#include "ftrepair/fault_tolerance.hpp"
#include "ftrepair/semantics.hpp"
#include "ftrepair/stabilize.hpp"

#include <benchmark/benchmark.h>

using namespace ftrepair;

namespace {

// Argument: largest sensor value; the model has 4 (max + 1)^3 states.
void BM_GridStabilizeK2(benchmark::State& state)
{
    const Model m = smart_grid_model(static_cast<int>(state.range(0)), GridVariant::Db);
    for (auto _ : state)
        benchmark::DoNotOptimize(add_stabilization_k2(m));
    state.counters["states"] = static_cast<double>(m.size());
}
BENCHMARK(BM_GridStabilizeK2)->DenseRange(3, 15, 4)->Unit(benchmark::kMillisecond);

void BM_GridStabilizeGeneralK3(benchmark::State& state)
{
    const Model m = smart_grid_model(static_cast<int>(state.range(0)), GridVariant::Db2, 3);
    for (auto _ : state)
        benchmark::DoNotOptimize(add_stabilization_general(m));
    state.counters["states"] = static_cast<double>(m.size());
}
BENCHMARK(BM_GridStabilizeGeneralK3)->DenseRange(1, 7, 2)->Unit(benchmark::kMillisecond);

void BM_GridVerify(benchmark::State& state)
{
    const Model m = smart_grid_model(static_cast<int>(state.range(0)), GridVariant::Db);
    const RepairOutcome r = add_stabilization_k2(m);
    for (auto _ : state)
        benchmark::DoNotOptimize(verify_stabilization(m, r.program));
    state.counters["states"] = static_cast<double>(m.size());
}
BENCHMARK(BM_GridVerify)->DenseRange(3, 11, 4)->Unit(benchmark::kMillisecond);

void BM_GridElaborate(benchmark::State& state)
{
    const dsl::ModelSpec spec = dsl::parse_model(smart_grid_source(static_cast<int>(state.range(0)), GridVariant::Db));
    for (auto _ : state)
        benchmark::DoNotOptimize(dsl::elaborate(spec));
}
BENCHMARK(BM_GridElaborate)->DenseRange(1, 5, 2)->Unit(benchmark::kMillisecond);

void BM_CookerMasking(benchmark::State& state)
{
    const Model m = dsl::elaborate(dsl::parse_model(pressure_cooker_source()));
    for (auto _ : state)
        benchmark::DoNotOptimize(add_masking(m, FtOptions{true}));
}
BENCHMARK(BM_CookerMasking);

}  // namespace

BENCHMARK_MAIN();
