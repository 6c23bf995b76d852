#include <benchmark/benchmark.h>

#include "epl/data/dataset.hpp"
#include "epl/data/equilibrium.hpp"
#include "epl/estimation/epl.hpp"
#include "epl/estimation/likelihood.hpp"
#include "epl/jacobian.hpp"
#include "epl/numerics/finite_difference.hpp"

using namespace epl;

namespace {

// Default game evaluated at its equilibrium under the reference parameters.
struct Point {
    game::Game game{game::GameConfig{}};
    game::Theta theta = game::Theta::reference(5);
    Vector y = data::solve_equilibrium(game, theta).v.flat();
    Vector direction = Vector::LinSpaced(game.n_values(), -1.0, 1.0);
};

const Point& point() {
    static const Point p;
    return p;
}

void BM_ConstraintG(benchmark::State& state) {
    const auto& p = point();
    for (auto _ : state) benchmark::DoNotOptimize(p.game.constraint_G(p.theta, p.y));
}
BENCHMARK(BM_ConstraintG)->Unit(benchmark::kMicrosecond);

void BM_FdJvp(benchmark::State& state) {
    const auto& p = point();
    const auto g = [&](const Vector& y) { return p.game.constraint_G(p.theta, y); };
    for (auto _ : state) benchmark::DoNotOptimize(numerics::fd_jvp(g, p.y, p.direction));
}
BENCHMARK(BM_FdJvp)->Unit(benchmark::kMicrosecond);

void BM_AnalyticJacobian(benchmark::State& state) {
    const auto& p = point();
    const auto v = p.game.as_values(p.y);
    for (auto _ : state) benchmark::DoNotOptimize(p.game.analytic_jacobian(p.theta, v));
}
BENCHMARK(BM_AnalyticJacobian)->Unit(benchmark::kMillisecond);

void BM_AnalyticJvp(benchmark::State& state) {
    const auto& p = point();
    const auto jac = p.game.analytic_jacobian(p.theta, p.game.as_values(p.y));
    for (auto _ : state) benchmark::DoNotOptimize(jac.apply(p.direction));
}
BENCHMARK(BM_AnalyticJvp)->Unit(benchmark::kMicrosecond);

void BM_BuildHz(benchmark::State& state) {
    const auto& p = point();
    const auto v = p.game.as_values(p.y);
    for (auto _ : state) benchmark::DoNotOptimize(p.game.build_H_z(v));
}
BENCHMARK(BM_BuildHz)->Unit(benchmark::kMicrosecond);

void BM_LinearStep(benchmark::State& state) {
    const auto& p = point();
    const auto mode = static_cast<estimation::LinearSolveMode>(state.range(0));
    state.SetLabel(std::string(estimation::to_string(mode)));
    for (auto _ : state) benchmark::DoNotOptimize(estimation::epl_linear_step(p.game, p.theta, p.y, mode));
}
BENCHMARK(BM_LinearStep)
    ->Arg(static_cast<int>(estimation::LinearSolveMode::Analytic))
    ->Arg(static_cast<int>(estimation::LinearSolveMode::AnalyticKrylov))
    ->Arg(static_cast<int>(estimation::LinearSolveMode::JacobianFree))
    ->Unit(benchmark::kMillisecond);

void BM_Equilibrium(benchmark::State& state) {
    const auto& p = point();
    for (auto _ : state) benchmark::DoNotOptimize(data::solve_equilibrium(p.game, p.theta));
}
BENCHMARK(BM_Equilibrium)->Unit(benchmark::kMillisecond);

void BM_LogLik(benchmark::State& state) {
    const auto& p = point();
    const auto counts =
        estimation::count_actions(p.game, data::simulate_dataset(p.game, p.theta, 1600, 1));
    for (auto _ : state) benchmark::DoNotOptimize(estimation::loglik(counts, p.y));
}
BENCHMARK(BM_LogLik)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
