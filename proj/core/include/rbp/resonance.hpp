// SPDX-License-Identifier: Apache-2.0
//
// rbp -- resonant-beam positioning simulator
// Phase-conjugate round-trip power cycle: forward propagation, passive
// reflection, backward propagation and saturating amplification iterated
// to a self-reproducing steady state.

#pragma once

#include "rbp/channel.hpp"

#include <functional>
#include <iosfwd>
#include <vector>

namespace rbp {

/// Saturating power amplifier: output min(gain * p_in, p_saturation),
/// monotone with f(0) = 0.
struct AmplifierModel {
    double gain_linear = 1e4;       // 40 dB; see README on loop closure
    double p_saturation = 0.1;      // W per element

    double amplify_power(double p_in) const {
        return std::min(gain_linear * p_in, p_saturation);
    }
};

/// -phase + delta, wrapped to (-pi, pi].
double conjugate_phase(double phase_in, double delta_phi);

/// Passive retrodirective reflection: sqrt(delta) * conj(x) * e^{j dphi}.
/// Requires 0 < delta <= 1.
CVector rx_reflect(const CVector& rx_incident, double reflection_ratio, double delta_phi);

/// Per element: power through the amplifier, phase conjugated. Elements at
/// saturation clip power but keep phase.
CVector tx_amplify(const CVector& tx_incident, const AmplifierModel& amp, double delta_phi);

struct PowerSample {
    int iteration = 0;        // round trips completed
    double p_tx_total = 0.0;  // W
    double p_rx_total = 0.0;  // W
    double efficiency = 0.0;  // p_rx / p_tx
};

struct ResonanceState {
    CVector tx_amplitudes;   // transmit amplitudes after the last amplification
    CVector rx_amplitudes;   // field incident on the Rx on the last forward pass
    CVector tx_incident;     // echo incident on the Tx before amplification
    int iterations = 0;
    std::vector<PowerSample> power_history;
    bool converged = false;
};

struct ResonanceOptions {
    double reflection_ratio = 0.004;
    double initial_tx_power = 1e-3;  // W total, split uniformly, zero phase
    double delta_phi_rx = 0.0;
    double delta_phi_tx = 0.0;
    double tolerance = 1e-6;
    int max_iterations = 1000;
    double divergence_power = 1e12;  // W; growth beyond this aborts as non-converged

    /// Observer called after every round trip with the current state; used
    /// by tests to watch invariants while the loop runs.
    std::function<void(const ResonanceState&)> observer;
};

/// Iterates forward -> reflect -> backward -> amplify until the total Rx
/// power is stable to `tolerance` relative AND the normalized transmit
/// vector stops rotating (alignment >= 1 - tolerance), or until
/// max_iterations. Divergence without saturation ends with converged=false.
ResonanceState run_resonance(const ChannelMatrix& channel, const AmplifierModel& amp,
                             const ResonanceOptions& options = {});

/// Rectilinear evaluation grid; any dimension may be 1 for planar cuts.
struct FieldMapGrid {
    Vec3 lo = Vec3::Zero();
    Vec3 hi = Vec3::Zero();
    int nx = 1, ny = 1, nz = 1;

    int size() const { return nx * ny * nz; }
};

struct FieldMap {
    FieldMapGrid grid;
    std::vector<Vec3> points;           // x fastest, then y, then z
    std::vector<double> power_density;  // W/m^2
    int iteration_snapshot = 0;
};

/// Coherent superposition of per-element spherical waves radiated by the
/// given transmit amplitudes; reports |E|^2 / (2 mu) per grid point.
/// Throws if a grid point touches an element position.
FieldMap compute_field_map(const CVector& tx_amplitudes, const ArrayGeometry& tx,
                           const GainPattern& pattern, double wavelength,
                           const FieldMapGrid& grid, int iteration_snapshot = 0,
                           unsigned threads = 1);

/// Adds the power densities of `other` into `base` (incoherent sources).
void accumulate_field_map(FieldMap& base, const FieldMap& other);

void export_power_history_csv(const std::vector<PowerSample>& history, std::ostream& os);
void export_field_map_csv(const FieldMap& map, std::ostream& os);
void export_field_map_grid(const FieldMap& map, std::ostream& os);

}  // namespace rbp
