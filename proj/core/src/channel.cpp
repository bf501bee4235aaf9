// SPDX-License-Identifier: Apache-2.0
//
// rbp -- resonant-beam positioning simulator

#include "rbp/channel.hpp"

#include "rbp/csv.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace rbp {

double power_density(double e_field_amplitude, double wave_impedance) {
    if (wave_impedance <= 0.0)
        throw std::invalid_argument("wave impedance must be positive");
    return e_field_amplitude * e_field_amplitude / (2.0 * wave_impedance);
}

GainPattern GainPattern::default_element() {
    const double g_max = std::pow(10.0, 4.97 / 10.0);
    return GainPattern{g_max, g_max / 2.0 - 1.0};
}

double GainPattern::gain(double theta) const {
    if (!(theta < M_PI / 2.0)) return 0.0;  // back lobe suppressed
    const double c = std::cos(theta);
    if (c <= 0.0) return 0.0;
    return g_max * std::pow(c, rolloff_exponent);
}

double element_gain(const GainPattern& pattern, const SphericalDirection& direction) {
    return pattern.gain(direction.theta);
}

ChannelMatrix build_channel_between(const ArrayGeometry& tx, const ArrayGeometry& rx,
                                    const GainPattern& pattern_tx,
                                    const GainPattern& pattern_rx, double wavelength,
                                    double phase_offset) {
    if (wavelength <= 0.0) throw std::invalid_argument("wavelength must be positive");

    const auto tx_pts = tx.world_positions();
    const auto rx_pts = rx.world_positions();
    const Vec3 tx_bore = tx.boresight;
    const Vec3 rx_bore = rx.boresight;

    const int m_count = static_cast<int>(tx_pts.size());
    const int n_count = static_cast<int>(rx_pts.size());
    const double k = 2.0 * M_PI / wavelength;
    const double amp0 = wavelength / (4.0 * M_PI);

    ChannelMatrix ch;
    ch.entries.resize(n_count, m_count);
    ch.distances.resize(n_count, m_count);
    ch.wavelength = wavelength;
    ch.phase_offset = phase_offset;

    for (int m = 0; m < m_count; ++m) {
        for (int n = 0; n < n_count; ++n) {
            const Vec3 d = rx_pts[n] - tx_pts[m];
            const double l = d.norm();
            if (l == 0.0)
                throw std::invalid_argument("coincident Tx/Rx elements in channel build");
            const double cos_dep = d.dot(tx_bore) / l;
            const double cos_arr = -d.dot(rx_bore) / l;
            const double g = pattern_tx.gain(std::acos(std::clamp(cos_dep, -1.0, 1.0))) *
                             pattern_rx.gain(std::acos(std::clamp(cos_arr, -1.0, 1.0)));
            const double amp = amp0 / l * std::sqrt(g);
            ch.entries(n, m) = std::polar(amp, -(k * l) + phase_offset);
            ch.distances(n, m) = l;
        }
    }
    return ch;
}

ChannelMatrix build_channel(const Scenario& scenario, ArrayId tx,
                            const GainPattern& pattern_tx, const GainPattern& pattern_rx,
                            double phase_offset) {
    if (tx == ArrayId::rx)
        throw std::invalid_argument("build_channel: tx side must be tx1 or tx2");
    return build_channel_between(scenario.array(tx), scenario.rx, pattern_tx, pattern_rx,
                                 scenario.wavelength, phase_offset);
}

ReceivedPower receive_power(const ChannelMatrix& channel, const CVector& tx_amplitudes) {
    if (tx_amplitudes.size() != channel.entries.cols())
        throw std::invalid_argument("tx amplitude vector does not match channel columns");
    ReceivedPower out;
    const CVector field = channel.entries * tx_amplitudes;
    out.per_element = field.cwiseAbs2();
    out.total = out.per_element.sum();
    return out;
}

double transmission_efficiency(const ChannelMatrix& channel, const CVector& tx_amplitudes) {
    const double p_tx = tx_amplitudes.squaredNorm();
    if (p_tx <= 0.0) throw std::invalid_argument("zero transmit power");
    return receive_power(channel, tx_amplitudes).total / p_tx;
}

void export_channel_csv(const ChannelMatrix& channel, std::ostream& os) {
    os << "# rows=" << channel.rx_count() << " cols=" << channel.tx_count()
       << " wavelength_m=" << format_double(channel.wavelength) << "\n";
    os << "rx,tx,distance_m,magnitude,phase_rad\n";
    for (int n = 0; n < channel.rx_count(); ++n) {
        for (int m = 0; m < channel.tx_count(); ++m) {
            os << n << ',' << m << ',' << format_double(channel.distances(n, m)) << ','
               << format_double(std::abs(channel.entries(n, m))) << ','
               << format_double(std::arg(channel.entries(n, m))) << '\n';
        }
    }
}

}  // namespace rbp
