// SPDX-License-Identifier: Apache-2.0
//
// rbp -- resonant-beam positioning simulator

#include "rbp/triangulation.hpp"

#include <cmath>
#include <stdexcept>

namespace rbp {

namespace {

constexpr double kSinDegenerate = 1e-6;

double angle_between(const Vec3& a, const Vec3& b) {
    return std::acos(std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0));
}

/// Closest distance between the lines p1 + t u1 and p2 + s u2.
double skew_distance(const Vec3& p1, const Vec3& u1, const Vec3& p2, const Vec3& u2) {
    const Vec3 n = u1.cross(u2);
    const Vec3 d = p2 - p1;
    const double nn = n.norm();
    if (nn < 1e-15) {  // parallel rays
        return (d - d.dot(u1) * u1).norm();
    }
    return std::abs(d.dot(n)) / nn;
}

}  // namespace

InteriorAngles interior_angles(const TriangulationInput& input) {
    const double d = input.baseline();
    if (d <= 0.0) throw std::invalid_argument("zero baseline");
    const Vec3 b = (input.tx2_origin - input.tx1_origin) / d;
    const Vec3 u1 = direction_to_unit_vector(input.doa1);
    const Vec3 u2 = direction_to_unit_vector(input.doa2);

    InteriorAngles angles;
    angles.gamma1 = angle_between(u1, b);
    angles.gamma2 = angle_between(u2, -b);
    if (angles.gamma1 <= 0.0 || angles.gamma2 <= 0.0)
        throw std::invalid_argument("receiver lies on the baseline (zero interior angle)");
    if (angles.gamma1 + angles.gamma2 >= M_PI)
        throw std::invalid_argument("rays diverge: gamma1 + gamma2 >= pi, no triangle");
    return angles;
}

double range_from_sine_rule(double gamma1, double gamma2, double baseline_d) {
    if (gamma1 <= 0.0 || gamma2 <= 0.0 || gamma1 + gamma2 >= M_PI)
        throw std::invalid_argument("interior angles do not form a triangle");
    const double s = std::sin(gamma1 + gamma2);
    if (s < kSinDegenerate)
        throw std::invalid_argument("near-degenerate triangle: sin(gamma1+gamma2) < 1e-6");
    return baseline_d * std::sin(gamma2) / s;
}

PositionEstimate triangulate(const TriangulationInput& input,
                             const TriangulationOptions& options) {
    PositionEstimate est;
    est.angles = interior_angles(input);
    est.range_r1 = range_from_sine_rule(est.angles.gamma1, est.angles.gamma2,
                                        input.baseline());
    const Vec3 u1 = direction_to_unit_vector(input.doa1);
    const Vec3 u2 = direction_to_unit_vector(input.doa2);
    est.coordinates = input.tx1_origin + est.range_r1 * u1;
    est.ray_skew_distance = skew_distance(input.tx1_origin, u1, input.tx2_origin, u2);
    est.condition = est.ray_skew_distance > options.skew_warn_distance
                        ? ConditionFlag::near_degenerate
                        : ConditionFlag::ok;
    return est;
}

double rmse(std::span<const Vec3> trials, const Vec3& truth) {
    if (trials.empty()) throw std::invalid_argument("rmse of an empty trial list");
    double acc = 0.0;
    for (const Vec3& p : trials) acc += (p - truth).squaredNorm();
    return std::sqrt(acc / static_cast<double>(trials.size()));
}

}  // namespace rbp
