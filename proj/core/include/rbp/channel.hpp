// SPDX-License-Identifier: Apache-2.0
//
// rbp -- resonant-beam positioning simulator
// Element-pair propagation model: Friis amplitude coupling, carrier phase
// and cosine-power element patterns, assembled into a dense complex
// channel matrix.

#pragma once

#include "rbp/geometry.hpp"

#include <complex>
#include <iosfwd>

namespace rbp {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Free-space wave impedance, ohms.
inline constexpr double kWaveImpedance = 376.730313668;

/// Time-averaged Poynting power density E^2 / (2 mu) in W/m^2.
double power_density(double e_field_amplitude, double wave_impedance = kWaveImpedance);

/// Axially symmetric element pattern g_max * cos(theta)^q on the front
/// hemisphere, zero behind the array plane.
struct GainPattern {
    double g_max = 1.0;
    double rolloff_exponent = 0.0;  // q

    /// Default element: peak 4.97 dBi with q chosen so the hemispherical
    /// directivity 2 (q + 1) matches the peak gain.
    static GainPattern default_element();

    double gain(double theta) const;
};

double element_gain(const GainPattern& pattern, const SphericalDirection& direction);

/// Dense per-element-pair coupling. Row n = receive element, column m =
/// transmit element. |entries(n,m)|^2 is the Friis power coupling
/// lambda^2 G_T G_R / (16 pi^2 l^2) for unit transmit power and
/// arg(entries(n,m)) = -k l + phi_0.
struct ChannelMatrix {
    CMatrix entries;             // N x M
    Eigen::MatrixXd distances;   // N x M, meters
    double wavelength = 0.0;
    double phase_offset = 0.0;   // phi_0

    int rx_count() const { return static_cast<int>(entries.rows()); }
    int tx_count() const { return static_cast<int>(entries.cols()); }
};

/// Couples two arbitrary arrays. Gains are evaluated per element pair at the
/// departure/arrival angles off each element's own boresight. Throws when a
/// pair of elements coincides.
ChannelMatrix build_channel_between(const ArrayGeometry& tx, const ArrayGeometry& rx,
                                    const GainPattern& pattern_tx,
                                    const GainPattern& pattern_rx, double wavelength,
                                    double phase_offset = 0.0);

/// Tx (tx1 or tx2) towards the scenario Rx.
ChannelMatrix build_channel(const Scenario& scenario, ArrayId tx,
                            const GainPattern& pattern_tx, const GainPattern& pattern_rx,
                            double phase_offset = 0.0);

struct ReceivedPower {
    Eigen::VectorXd per_element;  // W
    double total = 0.0;           // W
};

/// Coherent sum over transmit elements; |a_m|^2 is the element transmit
/// power in watts.
ReceivedPower receive_power(const ChannelMatrix& channel, const CVector& tx_amplitudes);

/// Total received over total transmitted power.
double transmission_efficiency(const ChannelMatrix& channel, const CVector& tx_amplitudes);

/// Debug export: header with dimensions and wavelength, then one row per
/// element pair (n, m, distance, |entry|, arg entry).
void export_channel_csv(const ChannelMatrix& channel, std::ostream& os);

}  // namespace rbp
