#include <benchmark/benchmark.h>

#include "zefoz/decoherence.hpp"
#include "zefoz/spin_algebra.hpp"
#include "zefoz/zefoz_search.hpp"

using namespace zefoz;

namespace {

const SpinHamiltonian& site1() {
    static const SpinHamiltonian h(make_spin_system(5), build_tensors(pr_yso_site1()));
    return h;
}

void BM_Eigensystem(benchmark::State& state) {
    const auto two_i = static_cast<int>(state.range(0));
    const SpinHamiltonian h(make_spin_system(two_i), build_tensors(pr_yso_site1()));
    const CMatrix m = h.at(Field(732, 173, -219));
    for (auto _ : state) benchmark::DoNotOptimize(eigensystem(m));
}
BENCHMARK(BM_Eigensystem)->Arg(5)->Arg(9)->Arg(15);

void BM_Sensitivity(benchmark::State& state) {
    const Field b(521.9, -365.6, -399.3);
    for (auto _ : state) benchmark::DoNotOptimize(sensitivity(site1(), b, Transition{1, 2, std::nullopt}));
}
BENCHMARK(BM_Sensitivity);

void BM_Scan(benchmark::State& state) {
    SearchBox box;
    box.lower = Vec3::Constant(-500);
    box.upper = Vec3::Constant(500);
    box.grid_step = 50;
    box.workers = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(scan_gradient_norm(site1(), Transition{1, 2, std::nullopt}, box));
    state.SetItemsProcessed(state.iterations() * 21 * 21 * 21);
}
BENCHMARK(BM_Scan)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Refine(benchmark::State& state) {
    SearchBox box;
    for (auto _ : state)
        benchmark::DoNotOptimize(refine_critical_point(site1(), Transition{1, 2, std::nullopt}, Field(500, -350, -400), box));
}
BENCHMARK(BM_Refine);

void BM_Fit(benchmark::State& state) {
    const auto kind = static_cast<DecayKind>(state.range(0));
    const DecayModel model = kind == DecayKind::biexponential ? DecayModel::biexponential(0.5, 0.02, 0.5, 0.6)
                                                              : DecayModel{kind, {1.0, 0.082, 0.0, 0.0}};
    const auto data = generate(model, log_times(1e-3, 1.0, 60), 0.01, 3);
    for (auto _ : state) benchmark::DoNotOptimize(fit(data, kind));
}
BENCHMARK(BM_Fit)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
