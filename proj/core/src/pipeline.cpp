// SPDX-License-Identifier: Apache-2.0
//
// rbp -- resonant-beam positioning simulator

#include "rbp/pipeline.hpp"

#include "rbp/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace rbp {

namespace {

[[noreturn]] void stage_error(const std::string& stage, const std::exception& e) {
    throw std::runtime_error("[" + stage + "] " + e.what());
}

std::vector<int> subarray_indices(const ArrayGeometry& array, int rows, int cols) {
    const int full_r = array.grid.rows;
    const int full_c = array.grid.cols;
    if (rows < 1 || cols < 1 || rows > full_r || cols > full_c)
        throw std::invalid_argument("subarray does not fit inside the array");
    const int r0 = (full_r - rows) / 2;
    const int c0 = (full_c - cols) / 2;
    std::vector<int> idx;
    idx.reserve(static_cast<size_t>(rows) * cols);
    for (int r = r0; r < r0 + rows; ++r)
        for (int c = c0; c < c0 + cols; ++c) idx.push_back(r * full_c + c);
    return idx;
}

double angular_separation_deg(const SphericalDirection& a, const SphericalDirection& b) {
    const double c = std::clamp(
        direction_to_unit_vector(a).dot(direction_to_unit_vector(b)), -1.0, 1.0);
    return std::acos(c) * 180.0 / M_PI;
}

TxContext prepare_tx(const Scenario& scenario, ArrayId tx_id, const GainPattern& pattern,
                     const PipelineConfig& config, bool with_doa) {
    TxContext ctx;
    try {
        ctx.channel = build_channel(scenario, tx_id, pattern, pattern, config.phase_offset);
    } catch (const std::exception& e) {
        stage_error("channel " + to_string(tx_id), e);
    }
    try {
        ctx.state = run_resonance(ctx.channel, make_amplifier(config.resonance),
                                  make_resonance_options(config.resonance));
        ctx.steady_efficiency = ctx.state.power_history.empty()
                                    ? 0.0
                                    : ctx.state.power_history.back().efficiency;
    } catch (const std::exception& e) {
        stage_error("resonance " + to_string(tx_id), e);
    }
    if (!with_doa) return ctx;
    try {
        const ArrayGeometry& array = scenario.array(tx_id);
        ctx.subarray_indices =
            subarray_indices(array, config.doa.subarray_rows, config.doa.subarray_cols);
        ctx.subarray = central_subarray(array, config.doa.subarray_rows,
                                        config.doa.subarray_cols);
        double acc = 0.0;
        for (int i : ctx.subarray_indices) acc += std::norm(ctx.state.tx_incident[i]);
        ctx.echo_power = acc / static_cast<double>(ctx.subarray_indices.size());
        ctx.truth_local = true_direction(scenario, tx_id, scenario.rx.origin);
    } catch (const std::exception& e) {
        stage_error("doa setup " + to_string(tx_id), e);
    }
    return ctx;
}

}  // namespace

GainPattern make_pattern(const GainConfig& config) {
    const double g_max = std::pow(10.0, config.g_max_dbi / 10.0);
    const double q =
        config.rolloff_exponent >= 0.0 ? config.rolloff_exponent : g_max / 2.0 - 1.0;
    return GainPattern{g_max, q};
}

AmplifierModel make_amplifier(const ResonanceConfig& config) {
    return AmplifierModel{std::pow(10.0, config.amplifier_gain_db / 10.0),
                          config.p_saturation_w};
}

ResonanceOptions make_resonance_options(const ResonanceConfig& config) {
    ResonanceOptions opt;
    opt.reflection_ratio = config.reflection_ratio;
    opt.initial_tx_power = config.initial_tx_power_w;
    opt.delta_phi_rx = config.delta_phi_rx;
    opt.delta_phi_tx = config.delta_phi_tx;
    opt.tolerance = config.tolerance;
    opt.max_iterations = config.max_iterations;
    return opt;
}

PipelineContext prepare_pipeline(const PipelineConfig& config,
                                 std::shared_ptr<const MusicEstimator> shared_estimator,
                                 bool with_doa, bool tx1_only) {
    PipelineContext ctx;
    ctx.config = config;
    try {
        ctx.scenario = build_scenario(config.scenario);
    } catch (const std::exception& e) {
        stage_error("scenario", e);
    }
    ctx.pattern = make_pattern(config.gain);
    ctx.tx1 = prepare_tx(ctx.scenario, ArrayId::tx1, ctx.pattern, config, with_doa);
    if (!tx1_only)
        ctx.tx2 = prepare_tx(ctx.scenario, ArrayId::tx2, ctx.pattern, config, with_doa);
    if (!with_doa) return ctx;

    auto matches = [&](const MusicEstimator& est, const std::vector<Vec3>& elements) {
        if (est.wavelength() != ctx.scenario.wavelength) return false;
        if (est.elements().size() != elements.size()) return false;
        for (std::size_t i = 0; i < elements.size(); ++i)
            if (est.elements()[i] != elements[i]) return false;
        const SearchGrid& g = est.grid();
        const SearchGrid& want = config.doa.search;
        return g.theta_min_deg == want.theta_min_deg && g.theta_max_deg == want.theta_max_deg &&
               g.phi_min_deg == want.phi_min_deg && g.phi_max_deg == want.phi_max_deg &&
               g.coarse_step_deg == want.coarse_step_deg &&
               g.refine_step_deg == want.refine_step_deg;
    };

    if (shared_estimator && matches(*shared_estimator, ctx.tx1.subarray)) {
        ctx.estimator_tx1 = shared_estimator;
    } else {
        ctx.estimator_tx1 = std::make_shared<MusicEstimator>(
            ctx.tx1.subarray, ctx.scenario.wavelength, config.doa.search);
    }
    if (tx1_only) return ctx;
    if (matches(*ctx.estimator_tx1, ctx.tx2.subarray)) {
        ctx.estimator_tx2 = ctx.estimator_tx1;
    } else {
        ctx.estimator_tx2 = std::make_shared<MusicEstimator>(
            ctx.tx2.subarray, ctx.scenario.wavelength, config.doa.search);
    }
    return ctx;
}

PipelineResult run_trial(const PipelineContext& context, std::uint64_t seed) {
    if (!context.estimator_tx1 || !context.estimator_tx2)
        throw std::logic_error("pipeline context prepared without DOA support");

    Rng seeder(seed);
    const std::uint64_t seed_tx1 = seeder.next_u64();
    const std::uint64_t seed_tx2 = seeder.next_u64();

    PipelineResult result;
    result.rx_truth = context.scenario.rx.origin;

    auto run_tx = [&](const TxContext& tx, const MusicEstimator& estimator,
                      const ArrayGeometry& array, std::uint64_t tx_seed,
                      const std::string& stage) {
        TxTrialReport rep;
        try {
            const SnapshotBatch batch = synthesize_snapshots(
                tx.subarray, tx.truth_local, context.scenario.wavelength, tx.echo_power,
                context.config.doa.noise_power_w, context.config.doa.snapshots, tx_seed);
            rep.doa_local = estimator.estimate(batch);
        } catch (const std::exception& e) {
            stage_error(stage, e);
        }
        rep.doa_world = to_world_direction(array, rep.doa_local.direction);
        rep.truth_local = tx.truth_local;
        rep.doa_error_deg = angular_separation_deg(rep.doa_local.direction, tx.truth_local);
        rep.echo_power = tx.echo_power;
        rep.converged = tx.state.converged;
        rep.iterations = tx.state.iterations;
        return rep;
    };

    result.tx1 = run_tx(context.tx1, *context.estimator_tx1, context.scenario.tx1, seed_tx1,
                        "doa tx1");
    result.tx2 = run_tx(context.tx2, *context.estimator_tx2, context.scenario.tx2, seed_tx2,
                        "doa tx2");

    try {
        TriangulationInput input;
        input.doa1 = result.tx1.doa_world;
        input.doa2 = result.tx2.doa_world;
        input.tx1_origin = context.scenario.tx1.origin;
        input.tx2_origin = context.scenario.tx2.origin;
        result.position = triangulate(input);
    } catch (const std::exception& e) {
        stage_error("triangulation", e);
    }
    result.position_error = (result.position.coordinates - result.rx_truth).norm();
    return result;
}

PipelineResult run_pipeline(const PipelineConfig& config, std::uint64_t seed) {
    return run_trial(prepare_pipeline(config), seed);
}

}  // namespace rbp
