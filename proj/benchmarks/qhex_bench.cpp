#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "qhex/dataset.hpp"
#include "qhex/dti.hpp"
#include "qhex/geometry.hpp"
#include "qhex/hemihex.hpp"
#include "qhex/mlp.hpp"
#include "qhex/phantom.hpp"
#include "qhex/rng.hpp"
#include "qhex/scheme.hpp"
#include "qhex/upsample.hpp"

using namespace qhex;

namespace {

const NestedScheme& scheme() {
    static const NestedScheme s = build_nested(21, 61, 2000, 7);
    return s;
}

std::vector<UnitVector> random_queries(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<UnitVector> q;
    q.reserve(n);
    while (q.size() < n) {
        const Eigen::Vector3d v(rng.next_normal(), rng.next_normal(), rng.next_normal());
        if (v.norm() > 1e-6) q.emplace_back(v.normalized());
    }
    return q;
}

} // namespace

static void LocateQuery(benchmark::State& state) {
    const auto tri = build_triangulation(scheme().lar());
    const auto queries = random_queries(1024, 99);
    std::size_t i = 0;
    for (auto _ : state) {
        auto c = tri.locate(queries[i++ & 1023]);
        benchmark::DoNotOptimize(c);
    }
}
BENCHMARK(LocateQuery);

static void GreedyConstruct(benchmark::State& state) {
    const DirectionSet pool = generate_candidates(static_cast<std::size_t>(state.range(0)), 11);
    for (auto _ : state) {
        DirectionSet s = greedy_construct(21, pool, DirectionSet());
        benchmark::DoNotOptimize(s);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(GreedyConstruct)->RangeMultiplier(2)->Range(250, 2000)->Complexity();

static void DecomposeScheme(benchmark::State& state) {
    const NestedScheme& s = scheme();
    for (auto _ : state) {
        auto nbhds = decompose(s);
        benchmark::DoNotOptimize(nbhds);
    }
}
BENCHMARK(DecomposeScheme);

static void MlpForwardBatch(benchmark::State& state) {
    const MLPParams p = mlp_init({81, 64, 32, 1}, 1);
    const int n = static_cast<int>(state.range(0));
    Rng rng(5);
    Eigen::MatrixXd X(81, n);
    for (int j = 0; j < n; ++j)
        for (int r = 0; r < 81; ++r) X(r, j) = rng.next_double();
    for (auto _ : state) {
        auto out = mlp_forward(p, X, nullptr);
        benchmark::DoNotOptimize(out);
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(MlpForwardBatch)->Arg(64)->Arg(256)->Arg(1024);

static void MlpTrainStep(benchmark::State& state) {
    MLPParams p = mlp_init({81, 64, 32, 1}, 1);
    OptState st = OptState::zeros(p);
    const int n = 256;
    Rng rng(5);
    Eigen::MatrixXd X(81, n);
    Eigen::RowVectorXd y(n);
    for (int j = 0; j < n; ++j) {
        for (int r = 0; r < 81; ++r) X(r, j) = rng.next_double();
        y(j) = rng.next_double();
    }
    MLPGrads g;
    for (auto _ : state) {
        const double loss = mse_loss_and_grads(p, X, y, g);
        adam_step(p, g, st, 1e-3, 0.9, 0.999, 1e-8);
        benchmark::DoNotOptimize(loss);
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(MlpTrainStep);

static void DtiFitVoxel(benchmark::State& state) {
    const NestedScheme& s = scheme();
    std::vector<Volume4D::Channel> channels;
    channels.push_back({0.0, Eigen::Vector3d::Zero()});
    for (std::size_t i = 0; i < s.har.size(); ++i)
        channels.push_back({s.har.bval(i), s.har.dir(i).vec()});
    const DtiDesign design(channels);
    const Tensor3 d(1.6e-3, 4e-4, 3e-4, 1e-4, -5e-5, 2e-5);
    Eigen::VectorXd sig(channels.size());
    for (std::size_t i = 0; i < channels.size(); ++i)
        sig(static_cast<Eigen::Index>(i)) =
            channels[i].bval == 0.0
                ? 1200.0
                : tensor_signal(1200.0, channels[i].bval, UnitVector(channels[i].dir), d);
    for (auto _ : state) {
        auto fit = design.fit(sig);
        benchmark::DoNotOptimize(fit);
    }
}
BENCHMARK(DtiFitVoxel);

static void ExtractVolumeSamples(benchmark::State& state) {
    const NestedScheme& s = scheme();
    const auto nbhds = decompose(s);
    const PhantomSpec spec = PhantomSpec::desk_mixed(3, 10, 10, 6);
    auto [har, lar] = make_phantom(spec, s);
    const auto mask = make_interior_mask(lar);
    for (auto _ : state) {
        auto samples = extract_samples(lar, har, s, nbhds, mask);
        benchmark::DoNotOptimize(samples);
    }
}
BENCHMARK(ExtractVolumeSamples);

static void PredictVolumeBaseline(benchmark::State& state) {
    const NestedScheme& s = scheme();
    const auto nbhds = decompose(s);
    const PhantomSpec spec = PhantomSpec::desk_mixed(3, 10, 10, 6);
    auto [har, lar] = make_phantom(spec, s);
    benchmark::DoNotOptimize(har);
    const auto mask = make_interior_mask(lar);
    for (auto _ : state) {
        auto out = predict_volume_baseline(lar, s, nbhds, mask);
        benchmark::DoNotOptimize(out);
    }
}
BENCHMARK(PredictVolumeBaseline);

BENCHMARK_MAIN();
