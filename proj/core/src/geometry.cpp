// SPDX-License-Identifier: Apache-2.0
//
// rbp -- resonant-beam positioning simulator

#include "rbp/geometry.hpp"

#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace rbp {

namespace {

constexpr double kOrthoTol = 1e-12;

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

Vec3 direction_to_unit_vector(const SphericalDirection& dir) {
    const double st = std::sin(dir.theta);
    return {st * std::cos(dir.phi), st * std::sin(dir.phi), std::cos(dir.theta)};
}

SphericalDirection unit_vector_to_direction(const Vec3& u) {
    const double n = u.norm();
    require(n > 0.0, "unit_vector_to_direction: zero vector");
    SphericalDirection dir;
    dir.theta = std::acos(std::clamp(u.z() / n, -1.0, 1.0));
    dir.phi = (u.x() == 0.0 && u.y() == 0.0) ? 0.0 : std::atan2(u.y(), u.x());
    if (dir.phi <= -M_PI) dir.phi = M_PI;
    return dir;
}

std::vector<Vec3> ElementGrid::local_positions() const {
    std::vector<Vec3> pts;
    pts.reserve(static_cast<size_t>(rows) * cols);
    const double x0 = -0.5 * (cols - 1) * spacing;
    const double y0 = -0.5 * (rows - 1) * spacing;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            pts.emplace_back(x0 + c * spacing, y0 + r * spacing, 0.0);
    return pts;
}

ElementGrid make_element_grid(int rows, int cols, double spacing) {
    require(rows >= 1 && cols >= 1, "element grid needs rows >= 1 and cols >= 1");
    require(spacing > 0.0 && std::isfinite(spacing), "element spacing must be positive");
    return ElementGrid{rows, cols, spacing};
}

Mat3 ArrayGeometry::rotation() const {
    Mat3 r;
    r.col(0) = in_plane_axis;
    r.col(1) = boresight.cross(in_plane_axis);
    r.col(2) = boresight;
    return r;
}

std::vector<Vec3> ArrayGeometry::world_positions() const {
    const Mat3 r = rotation();
    std::vector<Vec3> pts = grid.local_positions();
    for (auto& p : pts) p = origin + r * p;
    return pts;
}

ArrayGeometry make_array(const ElementGrid& grid, const Vec3& origin,
                         const Vec3& boresight, const Vec3& in_plane_axis) {
    require(std::abs(boresight.norm() - 1.0) <= kOrthoTol, "boresight must be unit length");
    require(std::abs(in_plane_axis.norm() - 1.0) <= kOrthoTol,
            "in_plane_axis must be unit length");
    require(std::abs(boresight.dot(in_plane_axis)) <= kOrthoTol,
            "boresight and in_plane_axis must be orthogonal");
    return ArrayGeometry{grid, origin, boresight, in_plane_axis};
}

std::string to_string(ArrayId id) {
    switch (id) {
        case ArrayId::tx1: return "tx1";
        case ArrayId::tx2: return "tx2";
        case ArrayId::rx: return "rx";
    }
    return "?";
}

const ArrayGeometry& Scenario::array(ArrayId id) const {
    switch (id) {
        case ArrayId::tx1: return tx1;
        case ArrayId::tx2: return tx2;
        case ArrayId::rx: return rx;
    }
    throw std::logic_error("unknown array id");
}

double far_field_min_distance(double element_aperture, double wavelength) {
    return 2.0 * element_aperture * element_aperture / wavelength;
}

namespace {

ArrayGeometry build_array(const ArrayConfig& cfg, double wavelength) {
    const double spacing = cfg.spacing_m > 0.0 ? cfg.spacing_m : 0.5 * wavelength;
    return make_array(make_element_grid(cfg.rows, cfg.cols, spacing), cfg.origin,
                      cfg.boresight, cfg.in_plane_axis);
}

double min_pair_distance(const ArrayGeometry& a, const ArrayGeometry& b) {
    double best = std::numeric_limits<double>::infinity();
    const auto pa = a.world_positions();
    const auto pb = b.world_positions();
    for (const auto& p : pa)
        for (const auto& q : pb) best = std::min(best, (p - q).norm());
    return best;
}

}  // namespace

Scenario build_scenario(const ScenarioConfig& config) {
    double wavelength = config.wavelength_m;
    double frequency = config.frequency_hz;
    if (wavelength > 0.0 && frequency > 0.0) {
        const double rel = std::abs(wavelength * frequency - kSpeedOfLight) / kSpeedOfLight;
        if (rel > 1e-6) {
            std::ostringstream os;
            os << "wavelength (" << wavelength << " m) and frequency (" << frequency
               << " Hz) disagree with c by relative " << rel;
            throw std::invalid_argument(os.str());
        }
    } else if (wavelength > 0.0) {
        frequency = kSpeedOfLight / wavelength;
    } else if (frequency > 0.0) {
        wavelength = kSpeedOfLight / frequency;
    } else {
        throw std::invalid_argument("scenario needs wavelength_m or frequency_hz");
    }

    Scenario s;
    s.wavelength = wavelength;
    s.frequency = frequency;
    s.tx1 = build_array(config.tx1, wavelength);
    s.tx2 = build_array(config.tx2, wavelength);
    s.rx = build_array(config.rx, wavelength);

    if (s.baseline() <= 0.0)
        throw std::invalid_argument("tx1 and tx2 origins coincide (zero baseline)");

    // Single-element far-field bound, with D taken as the element pitch.
    const double aperture = std::max({s.tx1.grid.spacing, s.tx2.grid.spacing,
                                      s.rx.grid.spacing});
    const double bound = far_field_min_distance(aperture, wavelength);
    const double lmin = std::min(min_pair_distance(s.tx1, s.rx),
                                 min_pair_distance(s.tx2, s.rx));
    s.far_field_ok = lmin >= bound;
    if (!s.far_field_ok) {
        std::cerr << "warning: closest Tx-Rx element pair at " << lmin
                  << " m violates the single-element far-field bound " << bound
                  << " m\n";
    }
    return s;
}

SphericalDirection true_direction(const Scenario& scenario, ArrayId from_array,
                                  const Vec3& to_point) {
    const ArrayGeometry& a = scenario.array(from_array);
    const Vec3 d = to_point - a.origin;
    if (d.norm() == 0.0)
        throw std::invalid_argument("true_direction: target coincides with the " +
                                    to_string(from_array) + " origin");
    return unit_vector_to_direction(a.world_to_local(d));
}

SphericalDirection to_world_direction(const ArrayGeometry& array,
                                      const SphericalDirection& local) {
    return unit_vector_to_direction(array.local_to_world(direction_to_unit_vector(local)));
}

}  // namespace rbp
