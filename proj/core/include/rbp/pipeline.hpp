// SPDX-License-Identifier: Apache-2.0
//
// rbp -- resonant-beam positioning simulator
// End-to-end localization pipeline: channels, resonance to steady state,
// echo snapshots, per-Tx MUSIC and baseline triangulation.

#pragma once

#include "rbp/doa.hpp"
#include "rbp/resonance.hpp"
#include "rbp/triangulation.hpp"

#include <cstdint>
#include <memory>
#include <optional>

namespace rbp {

struct GainConfig {
    double g_max_dbi = 4.97;
    /// Negative: derive q so the hemispherical directivity 2 (q + 1)
    /// matches the peak gain.
    double rolloff_exponent = -1.0;
};

GainPattern make_pattern(const GainConfig& config);

struct ResonanceConfig {
    // The 24 dB amplifier of the reference setup cannot close the loop
    // against delta = 0.004 plus two passes of spatial loss; 40 dB lets the
    // cycle build up to saturation. See README "Loop gain".
    double amplifier_gain_db = 40.0;
    double p_saturation_w = 0.1;  // per element
    double reflection_ratio = 0.004;
    double initial_tx_power_w = 1e-3;  // total, uniform split, zero phase
    double delta_phi_rx = 0.0;
    double delta_phi_tx = 0.0;
    double tolerance = 1e-6;
    int max_iterations = 1000;
};

AmplifierModel make_amplifier(const ResonanceConfig& config);
ResonanceOptions make_resonance_options(const ResonanceConfig& config);

struct DoaConfig {
    double noise_power_w = 2e-5;  // 0.02 mW per element
    int snapshots = 256;
    int subarray_rows = 8;
    int subarray_cols = 8;
    int source_count = 1;
    SearchGrid search;
};

struct FieldMapConfig {
    bool enabled = false;
    Vec3 lo = Vec3(-0.5, 0.0, 0.0);
    Vec3 hi = Vec3(2.5, 1.5, 3.5);
    int nx = 121, ny = 1, nz = 141;
};

struct PipelineConfig {
    ScenarioConfig scenario;
    GainConfig gain;
    ResonanceConfig resonance;
    DoaConfig doa;
    FieldMapConfig field_map;
    double phase_offset = 0.0;  // phi_0 of the carrier
};

/// Per-transmitter deterministic preparation: channel, steady-state
/// resonance and the echo level feeding snapshot synthesis.
struct TxContext {
    ChannelMatrix channel;
    ResonanceState state;
    double echo_power = 0.0;  // mean per-element incident power on the subarray, W
    double steady_efficiency = 0.0;
    SphericalDirection truth_local;  // direction to the Rx center, array frame
    std::vector<int> subarray_indices;
    std::vector<Vec3> subarray;      // local coordinates
};

/// Heavy, trial-independent state reused across Monte Carlo trials.
/// Immutable after construction; safe to share across worker threads.
struct PipelineContext {
    Scenario scenario;
    GainPattern pattern;
    PipelineConfig config;
    TxContext tx1;
    TxContext tx2;
    std::shared_ptr<const MusicEstimator> estimator_tx1;
    std::shared_ptr<const MusicEstimator> estimator_tx2;  // == tx1 when geometry matches
};

/// Builds channels and runs both resonators. `shared_estimator` lets sweeps
/// reuse the coarse-grid steering table when the subarray geometry is
/// unchanged; pass nullptr to build one. `with_doa=false` skips estimator
/// and echo preparation, `tx1_only=true` skips the Tx2 resonator
/// (efficiency sweeps).
PipelineContext prepare_pipeline(const PipelineConfig& config,
                                 std::shared_ptr<const MusicEstimator> shared_estimator = nullptr,
                                 bool with_doa = true, bool tx1_only = false);

struct TxTrialReport {
    DoaEstimate doa_local;
    SphericalDirection doa_world;
    SphericalDirection truth_local;
    double doa_error_deg = 0.0;  // great-circle angle between estimate and truth
    double echo_power = 0.0;
    bool converged = false;
    int iterations = 0;
};

struct PipelineResult {
    TxTrialReport tx1;
    TxTrialReport tx2;
    PositionEstimate position;
    Vec3 rx_truth = Vec3::Zero();
    double position_error = 0.0;  // m
};

/// One seeded trial on a prepared context (snapshots, MUSIC, triangulation).
PipelineResult run_trial(const PipelineContext& context, std::uint64_t seed);

/// prepare_pipeline + run_trial. Fully deterministic in (config, seed).
PipelineResult run_pipeline(const PipelineConfig& config, std::uint64_t seed);

}  // namespace rbp
