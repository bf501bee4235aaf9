// SPDX-License-Identifier: Apache-2.0
//
// rbp -- resonant-beam positioning simulator
// Scene geometry: element lattices, array placement and the spherical
// angle convention shared by every other module.

#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace rbp {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

/// Elevation theta is measured from the local +z axis (the array boresight),
/// azimuth phi from the local +x axis inside the x-y plane. Radians.
struct SphericalDirection {
    double theta = 0.0;
    double phi = 0.0;
};

/// (sin t cos p, sin t sin p, cos t). Unit norm for any finite input.
Vec3 direction_to_unit_vector(const SphericalDirection& dir);

/// Inverse of direction_to_unit_vector for unit-ish vectors.
/// theta in [0, pi], phi in (-pi, pi].
SphericalDirection unit_vector_to_direction(const Vec3& u);

/// Regular rows x cols lattice with pitch `spacing`, centered on the origin
/// of its local frame, lying in the local z = 0 plane. Columns run along
/// local x, rows along local y.
struct ElementGrid {
    int rows = 1;
    int cols = 1;
    double spacing = 0.005;  // m

    int size() const { return rows * cols; }

    /// Element index (r, c) -> r * cols + c.
    std::vector<Vec3> local_positions() const;
};

/// Throws std::invalid_argument unless rows, cols >= 1 and spacing > 0.
ElementGrid make_element_grid(int rows, int cols, double spacing);

/// A planar element grid placed in the world: origin is the lattice center,
/// boresight the outward array normal (local +z), in_plane_axis the lattice
/// x direction. The two must be unit length and orthogonal within 1e-12.
struct ArrayGeometry {
    ElementGrid grid;
    Vec3 origin = Vec3::Zero();
    Vec3 boresight = Vec3::UnitZ();
    Vec3 in_plane_axis = Vec3::UnitX();

    int size() const { return grid.size(); }

    /// Columns are the local x, y, z axes expressed in world coordinates.
    Mat3 rotation() const;

    std::vector<Vec3> world_positions() const;

    /// World direction -> local frame (rotation only, no translation).
    Vec3 world_to_local(const Vec3& v) const { return rotation().transpose() * v; }
    Vec3 local_to_world(const Vec3& v) const { return rotation() * v; }
};

ArrayGeometry make_array(const ElementGrid& grid, const Vec3& origin,
                         const Vec3& boresight, const Vec3& in_plane_axis);

enum class ArrayId { tx1, tx2, rx };

std::string to_string(ArrayId id);

struct ArrayConfig {
    Vec3 origin = Vec3::Zero();
    int rows = 40;
    int cols = 40;
    double spacing_m = 0.0;  // <= 0: use half the scenario wavelength
    Vec3 boresight = Vec3::UnitZ();
    Vec3 in_plane_axis = Vec3::UnitX();
};

/// Either wavelength_m or frequency_hz may be left at zero; the other is
/// derived from c. When both are set they must agree to 1e-6 relative.
struct ScenarioConfig {
    double frequency_hz = 0.0;
    double wavelength_m = 0.01;
    ArrayConfig tx1{.origin = Vec3(0, 0, 0)};
    ArrayConfig tx2{.origin = Vec3(2, 0, 0)};
    ArrayConfig rx{.origin = Vec3(0, 1, 3), .boresight = -Vec3::UnitZ()};
};

struct Scenario {
    ArrayGeometry tx1;
    ArrayGeometry tx2;
    ArrayGeometry rx;
    double wavelength = 0.01;   // m
    double frequency = 0.0;     // Hz
    bool far_field_ok = true;   // single-element far-field bound met on every pair

    double baseline() const { return (tx2.origin - tx1.origin).norm(); }
    const ArrayGeometry& array(ArrayId id) const;
};

/// Fraunhofer bound 2 D^2 / lambda for a single radiator of aperture D.
double far_field_min_distance(double element_aperture, double wavelength);

/// Materializes the scenario, derives wavelength/frequency, checks the
/// single-element far-field condition over every Tx-Rx element pair
/// (warning only) and validates orientations and the baseline.
Scenario build_scenario(const ScenarioConfig& config);

/// Direction from `from_array`'s origin to `to_point`, expressed in the
/// array's local frame. Throws on coincident points.
SphericalDirection true_direction(const Scenario& scenario, ArrayId from_array,
                                  const Vec3& to_point);

/// Re-expresses a direction measured in the array's local frame as a
/// world-frame direction. Identity for axis-aligned arrays.
SphericalDirection to_world_direction(const ArrayGeometry& array,
                                      const SphericalDirection& local);

}  // namespace rbp
