// SPDX-License-Identifier: Apache-2.0
//
// rbp -- resonant-beam positioning simulator

#include "rbp/resonance.hpp"

#include "rbp/csv.hpp"
#include "rbp/thread_pool.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace rbp {

double conjugate_phase(double phase_in, double delta_phi) {
    double p = std::remainder(-phase_in + delta_phi, 2.0 * M_PI);
    if (p <= -M_PI) p = M_PI;
    return p;
}

CVector rx_reflect(const CVector& rx_incident, double reflection_ratio, double delta_phi) {
    if (!(reflection_ratio > 0.0 && reflection_ratio <= 1.0))
        throw std::invalid_argument("reflection ratio must lie in (0, 1]");
    const Complex rot = std::polar(std::sqrt(reflection_ratio), delta_phi);
    return rot * rx_incident.conjugate();
}

CVector tx_amplify(const CVector& tx_incident, const AmplifierModel& amp, double delta_phi) {
    CVector out(tx_incident.size());
    for (Eigen::Index m = 0; m < tx_incident.size(); ++m) {
        const double p_out = amp.amplify_power(std::norm(tx_incident[m]));
        out[m] = std::polar(std::sqrt(p_out),
                            conjugate_phase(std::arg(tx_incident[m]), delta_phi));
    }
    return out;
}

ResonanceState run_resonance(const ChannelMatrix& channel, const AmplifierModel& amp,
                             const ResonanceOptions& options) {
    if (options.initial_tx_power <= 0.0)
        throw std::invalid_argument("initial transmit power must be positive");

    const int m_count = channel.tx_count();

    ResonanceState state;
    state.tx_amplitudes =
        CVector::Constant(m_count, Complex(std::sqrt(options.initial_tx_power / m_count), 0.0));
    state.power_history.reserve(64);

    double prev_rx_power = -1.0;
    CVector prev_direction;

    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        const double p_tx = state.tx_amplitudes.squaredNorm();
        state.rx_amplitudes = channel.entries * state.tx_amplitudes;
        const double p_rx = state.rx_amplitudes.squaredNorm();
        state.power_history.push_back({iter, p_tx, p_rx, p_rx / p_tx});
        state.iterations = iter;

        const CVector reflected =
            rx_reflect(state.rx_amplitudes, options.reflection_ratio, options.delta_phi_rx);
        state.tx_incident = channel.entries.transpose() * reflected;
        const CVector next = tx_amplify(state.tx_incident, amp, options.delta_phi_tx);

        const double norm_next = next.norm();
        bool aligned = false;
        if (norm_next > 0.0 && prev_direction.size() == next.size()) {
            const double overlap = std::abs(prev_direction.dot(next)) / norm_next;
            aligned = overlap >= 1.0 - options.tolerance;
        }
        const bool power_stable =
            prev_rx_power > 0.0 &&
            std::abs(p_rx - prev_rx_power) <= options.tolerance * prev_rx_power;

        prev_rx_power = p_rx;
        if (norm_next > 0.0) prev_direction = next / norm_next;
        state.tx_amplitudes = next;

        if (options.observer) options.observer(state);

        if (power_stable && aligned) {
            state.converged = true;
            break;
        }
        if (next.squaredNorm() > options.divergence_power || norm_next == 0.0) {
            break;  // divergence or total extinction; reported as non-converged
        }
    }
    return state;
}

FieldMap compute_field_map(const CVector& tx_amplitudes, const ArrayGeometry& tx,
                           const GainPattern& pattern, double wavelength,
                           const FieldMapGrid& grid, int iteration_snapshot,
                           unsigned threads) {
    if (grid.nx < 1 || grid.ny < 1 || grid.nz < 1)
        throw std::invalid_argument("field map grid dimensions must be >= 1");
    const auto elem_pts = tx.world_positions();
    if (static_cast<Eigen::Index>(elem_pts.size()) != tx_amplitudes.size())
        throw std::invalid_argument("amplitude vector does not match array size");

    FieldMap map;
    map.grid = grid;
    map.iteration_snapshot = iteration_snapshot;
    map.points.resize(grid.size());
    map.power_density.assign(grid.size(), 0.0);

    auto axis = [](double lo, double hi, int n, int i) {
        return n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    };
    int idx = 0;
    for (int iz = 0; iz < grid.nz; ++iz)
        for (int iy = 0; iy < grid.ny; ++iy)
            for (int ix = 0; ix < grid.nx; ++ix)
                map.points[idx++] = Vec3(axis(grid.lo.x(), grid.hi.x(), grid.nx, ix),
                                         axis(grid.lo.y(), grid.hi.y(), grid.ny, iy),
                                         axis(grid.lo.z(), grid.hi.z(), grid.nz, iz));

    const double k = 2.0 * M_PI / wavelength;
    const Vec3 bore = tx.boresight;

    auto evaluate = [&](std::size_t p) {
        const Vec3& r = map.points[p];
        Complex field(0.0, 0.0);
        for (std::size_t m = 0; m < elem_pts.size(); ++m) {
            const Vec3 d = r - elem_pts[m];
            const double l = d.norm();
            if (l == 0.0)
                throw std::invalid_argument("field map grid point coincides with an element");
            const double p_m = std::norm(tx_amplitudes[m]);
            if (p_m == 0.0) continue;
            const double g = pattern.gain(std::acos(std::clamp(d.dot(bore) / l, -1.0, 1.0)));
            const double w = p_m * g / (4.0 * M_PI * l * l);
            const double psi = std::arg(tx_amplitudes[m]);
            field += std::polar(std::sqrt(2.0 * kWaveImpedance * w), -(k * l) + psi);
        }
        map.power_density[p] = std::norm(field) / (2.0 * kWaveImpedance);
    };

    if (threads > 1 && map.points.size() > 1024) {
        ThreadPool pool(threads);
        const std::size_t chunk = 512;
        const std::size_t chunks = (map.points.size() + chunk - 1) / chunk;
        pool.parallel_for(chunks, [&](std::size_t c) {
            const std::size_t end = std::min(map.points.size(), (c + 1) * chunk);
            for (std::size_t p = c * chunk; p < end; ++p) evaluate(p);
        });
    } else {
        for (std::size_t p = 0; p < map.points.size(); ++p) evaluate(p);
    }
    return map;
}

void accumulate_field_map(FieldMap& base, const FieldMap& other) {
    if (base.power_density.size() != other.power_density.size())
        throw std::invalid_argument("field map grids differ");
    for (std::size_t i = 0; i < base.power_density.size(); ++i)
        base.power_density[i] += other.power_density[i];
}

void export_power_history_csv(const std::vector<PowerSample>& history, std::ostream& os) {
    os << "iteration,p_tx_total_w,p_rx_total_w,efficiency\n";
    for (const auto& s : history) {
        os << s.iteration << ',' << format_double(s.p_tx_total) << ','
           << format_double(s.p_rx_total) << ',' << format_double(s.efficiency) << '\n';
    }
}

void export_field_map_csv(const FieldMap& map, std::ostream& os) {
    os << "x_m,y_m,z_m,power_density_w_m2\n";
    for (std::size_t i = 0; i < map.points.size(); ++i) {
        const Vec3& p = map.points[i];
        os << format_double(p.x()) << ',' << format_double(p.y()) << ','
           << format_double(p.z()) << ',' << format_double(map.power_density[i]) << '\n';
    }
}

void export_field_map_grid(const FieldMap& map, std::ostream& os) {
    const auto& g = map.grid;
    os << "nx,ny,nz,xmin,xmax,ymin,ymax,zmin,zmax,iteration\n";
    os << g.nx << ',' << g.ny << ',' << g.nz << ',' << format_double(g.lo.x()) << ','
       << format_double(g.hi.x()) << ',' << format_double(g.lo.y()) << ','
       << format_double(g.hi.y()) << ',' << format_double(g.lo.z()) << ','
       << format_double(g.hi.z()) << ',' << map.iteration_snapshot << '\n';
    for (double v : map.power_density) os << format_double(v) << '\n';
}

}  // namespace rbp
