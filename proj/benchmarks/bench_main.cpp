#include <benchmark/benchmark.h>

#include "stripflow/assembly.hpp"
#include "stripflow/brownian.hpp"
#include "stripflow/heat_engine.hpp"

using namespace stripflow;

namespace {

StripComplex treebolic(int k_max) {
    TreebolicParams tp;
    tp.k_min = -1;
    tp.k_max = k_max;
    tp.R = 2.0;
    return build_treebolic(tp);
}

void BM_Assemble(benchmark::State& state) {
    const StripComplex sc = treebolic(static_cast<int>(state.range(0)));
    GridOptions o{9, 17, SSpacing::Automatic};
    for (auto _ : state) {
        Discretization d = assemble(sc, o);
        benchmark::DoNotOptimize(d.mass.data());
        state.counters["dofs"] = static_cast<double>(d.dof_count());
    }
}
BENCHMARK(BM_Assemble)->Arg(1)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_HeatStep(benchmark::State& state) {
    const Discretization d = assemble(treebolic(static_cast<int>(state.range(0))), GridOptions{9, 17, SSpacing::Automatic});
    HeatPropagator prop(d, 1e-3, Scheme::CrankNicolson);
    Field f = Field::Zero(static_cast<Eigen::Index>(d.dof_count()));
    f[0] = 1.0;
    for (auto _ : state) {
        f = prop.advance(f, 1);
        benchmark::DoNotOptimize(f.data());
    }
    state.counters["dofs"] = static_cast<double>(d.dof_count());
}
BENCHMARK(BM_HeatStep)->Arg(1)->Arg(3)->Arg(5)->Unit(benchmark::kMicrosecond);

void BM_Ctmc(benchmark::State& state) {
    const Discretization d = assemble(treebolic(1), GridOptions{5, 9, SSpacing::Automatic});
    const std::size_t src = d.grid.vertex_node(tree_origin(d.complex.graph()), 4);
    std::uint64_t seed = 1;
    for (auto _ : state) {
        EmpiricalMeasure m = sample_ctmc(d, src, 0.2, static_cast<std::size_t>(state.range(0)),
                                         McOptions{seed++, 1});
        benchmark::DoNotOptimize(m.counts.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Ctmc)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
