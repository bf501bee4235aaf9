// SPDX-License-Identifier: Apache-2.0
//
// rbp -- resonant-beam positioning simulator
// Two-ray angle-of-arrival triangulation against a known baseline, plus the
// Monte Carlo RMSE metric.

#pragma once

#include "rbp/geometry.hpp"

#include <span>

namespace rbp {

/// World-frame DOAs at the two transmitters plus their positions.
struct TriangulationInput {
    SphericalDirection doa1;
    SphericalDirection doa2;
    Vec3 tx1_origin = Vec3::Zero();
    Vec3 tx2_origin = Vec3::Zero();

    double baseline() const { return (tx2_origin - tx1_origin).norm(); }
};

struct InteriorAngles {
    double gamma1 = 0.0;  // between ray 1 and the baseline, radians
    double gamma2 = 0.0;  // between ray 2 and the reversed baseline
};

/// Unsigned angles of each ray against the baseline. Throws when a ray is
/// parallel to the baseline (receiver on the baseline) or the rays fail to
/// close a triangle (gamma1 + gamma2 >= pi).
InteriorAngles interior_angles(const TriangulationInput& input);

/// Sine rule: R1 = d sin(gamma2) / sin(gamma1 + gamma2). Throws when
/// sin(gamma1 + gamma2) < 1e-6 (unbounded range amplification).
double range_from_sine_rule(double gamma1, double gamma2, double baseline_d);

enum class ConditionFlag { ok, near_degenerate };

struct PositionEstimate {
    Vec3 coordinates = Vec3::Zero();
    double range_r1 = 0.0;
    InteriorAngles angles;
    ConditionFlag condition = ConditionFlag::ok;
    /// Closest approach of the two measured rays; noisy DOAs make them skew.
    double ray_skew_distance = 0.0;
};

struct TriangulationOptions {
    double skew_warn_distance = 0.05;  // m; diagnostic flag only
};

/// Anchored at Tx1: coordinates = tx1_origin + R1 u1.
PositionEstimate triangulate(const TriangulationInput& input,
                             const TriangulationOptions& options = {});

/// sqrt(mean ||p_i - truth||^2). Throws on an empty trial list.
double rmse(std::span<const Vec3> trials, const Vec3& truth);

}  // namespace rbp
