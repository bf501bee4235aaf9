// SPDX-License-Identifier: Apache-2.0
//
// rbp -- resonant-beam positioning simulator

#include "rbp/doa.hpp"
#include "rbp/pipeline.hpp"
#include "rbp/resonance.hpp"
#include "rbp/rng.hpp"
#include "rbp/triangulation.hpp"

#include <benchmark/benchmark.h>

using namespace rbp;

namespace {

ChannelMatrix make_square_channel(int side) {
    const GainPattern pat = GainPattern::default_element();
    const ArrayGeometry tx = make_array(make_element_grid(side, side, 0.005), Vec3::Zero(),
                                        Vec3::UnitZ(), Vec3::UnitX());
    const ArrayGeometry rx = make_array(make_element_grid(side, side, 0.005), Vec3(0, 1, 3),
                                        -Vec3::UnitZ(), Vec3::UnitX());
    return build_channel_between(tx, rx, pat, pat, 0.01);
}

void BM_BuildChannel(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    for (auto _ : state) {
        ChannelMatrix ch = make_square_channel(side);
        benchmark::DoNotOptimize(ch.entries.data());
    }
    state.SetComplexityN(side * side);
}
BENCHMARK(BM_BuildChannel)->Arg(8)->Arg(16)->Arg(32)->Arg(40)->Complexity();

void BM_ResonanceRoundTrip(benchmark::State& state) {
    const ChannelMatrix ch = make_square_channel(static_cast<int>(state.range(0)));
    const AmplifierModel amp{1e4, 0.1};
    CVector a = CVector::Constant(ch.tx_count(), Complex(1e-3, 0.0));
    for (auto _ : state) {
        const CVector rx = ch.entries * a;
        const CVector back = ch.entries.transpose() * rx_reflect(rx, 0.004, 0.0);
        a = tx_amplify(back, amp, 0.0);
        benchmark::DoNotOptimize(a.data());
    }
}
BENCHMARK(BM_ResonanceRoundTrip)->Arg(16)->Arg(40);

void BM_MusicSpectrum(benchmark::State& state) {
    const ArrayGeometry a = make_array(make_element_grid(8, 8, 0.005), Vec3::Zero(),
                                       Vec3::UnitZ(), Vec3::UnitX());
    const auto elements = central_subarray(a, 8, 8);
    const CVector alpha = steering_vector(elements, {0.5, 0.7}, 0.01);
    Eigen::HouseholderQR<CMatrix> qr(alpha);
    const CMatrix noise_basis = CMatrix(qr.householderQ()).rightCols(63);
    const MusicEstimator estimator(elements, 0.01, SearchGrid{});
    for (auto _ : state) {
        MusicSpectrum sp = estimator.spectrum(noise_basis);
        benchmark::DoNotOptimize(sp.peak.peak_value);
    }
}
BENCHMARK(BM_MusicSpectrum);

void BM_Triangulate(benchmark::State& state) {
    TriangulationInput in;
    in.tx1_origin = Vec3(0, 0, 0);
    in.tx2_origin = Vec3(2, 0, 0);
    in.doa1 = unit_vector_to_direction(Vec3(0.5, 1.0, 3.0));
    in.doa2 = unit_vector_to_direction(Vec3(-1.5, 1.0, 3.0));
    for (auto _ : state) {
        PositionEstimate est = triangulate(in);
        benchmark::DoNotOptimize(est.coordinates.data());
    }
}
BENCHMARK(BM_Triangulate);

void BM_PipelineTrial(benchmark::State& state) {
    PipelineConfig cfg;
    cfg.scenario.tx1 = {.origin = Vec3(0, 0, 0), .rows = 16, .cols = 16};
    cfg.scenario.tx2 = {.origin = Vec3(0.8, 0, 0), .rows = 16, .cols = 16};
    cfg.scenario.rx = {.origin = Vec3(0.3, 0.2, 1.2),
                       .rows = 16,
                       .cols = 16,
                       .boresight = -Vec3::UnitZ()};
    cfg.resonance.amplifier_gain_db = 60.0;
    cfg.resonance.p_saturation_w = 1e-4;
    cfg.doa.noise_power_w = 1e-9;
    const PipelineContext ctx = prepare_pipeline(cfg);
    std::uint64_t seed = 1;
    for (auto _ : state) {
        PipelineResult res = run_trial(ctx, seed++);
        benchmark::DoNotOptimize(res.position_error);
    }
}
BENCHMARK(BM_PipelineTrial);

}  // namespace

BENCHMARK_MAIN();
