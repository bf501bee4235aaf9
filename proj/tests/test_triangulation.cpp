// SPDX-License-Identifier: Apache-2.0

#include "rbp/triangulation.hpp"
#include "rbp/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace rbp;

namespace {

constexpr double kDeg = M_PI / 180.0;

/// Forward-geometry oracle: exact world-frame DOAs for a known receiver.
TriangulationInput exact_input(const Vec3& tx1, const Vec3& tx2, const Vec3& rx) {
    TriangulationInput in;
    in.tx1_origin = tx1;
    in.tx2_origin = tx2;
    in.doa1 = unit_vector_to_direction(rx - tx1);
    in.doa2 = unit_vector_to_direction(rx - tx2);
    return in;
}

}  // namespace

TEST_CASE("interior angles") {
    TriangulationInput in;
    in.tx1_origin = Vec3(0, 0, 0);
    in.tx2_origin = Vec3(2, 0, 0);

    // ray perpendicular to the baseline
    in.doa1 = {90 * kDeg, 90 * kDeg};
    in.doa2 = {45 * kDeg, 135 * kDeg};
    CHECK(interior_angles(in).gamma1 == doctest::Approx(90 * kDeg));

    // canonical frame identity: gamma1 = acos(sin t cos p)
    in.doa1 = {30 * kDeg, 45 * kDeg};
    CHECK(interior_angles(in).gamma1 ==
          doctest::Approx(std::acos(std::sin(30 * kDeg) * std::cos(45 * kDeg))));
    CHECK(interior_angles(in).gamma1 == doctest::Approx(69.2952 * kDeg).epsilon(1e-4));

    // ray along the baseline: receiver on the baseline, degenerate
    in.doa1 = {90 * kDeg, 0.0};
    CHECK_THROWS_AS(interior_angles(in), std::invalid_argument);

    // diverging rays never close a triangle
    in.doa1 = {90 * kDeg, 170 * kDeg};
    in.doa2 = {90 * kDeg, 10 * kDeg};
    CHECK_THROWS_AS(interior_angles(in), std::invalid_argument);
}

TEST_CASE("sine rule range") {
    CHECK(range_from_sine_rule(60 * kDeg, 60 * kDeg, 2.0) == doctest::Approx(2.0));
    CHECK(range_from_sine_rule(45 * kDeg, 45 * kDeg, 2.0) ==
          doctest::Approx(1.41421).epsilon(1e-5));
    CHECK_THROWS_AS(range_from_sine_rule(90 * kDeg, 90 * kDeg, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(range_from_sine_rule(89.9999999 * kDeg, 90 * kDeg, 2.0),
                    std::invalid_argument);  // sin(g1+g2) below 1e-6
    CHECK_THROWS_AS(range_from_sine_rule(0.0, 60 * kDeg, 2.0), std::invalid_argument);
}

TEST_CASE("noiseless triangulation recovers known receivers") {
    const Vec3 tx1(0, 0, 0), tx2(2, 0, 0);
    for (const Vec3& rx : {Vec3(0, 1, 3), Vec3(0, 1.5, 3), Vec3(1, -0.3, 2.2)}) {
        const PositionEstimate est = triangulate(exact_input(tx1, tx2, rx));
        CHECK((est.coordinates - rx).norm() <= 1e-9);
        CHECK(est.condition == ConditionFlag::ok);
        CHECK(est.ray_skew_distance <= 1e-9);
    }

    // perpendicular-bisector symmetry pins x at d/2
    const PositionEstimate mid = triangulate(exact_input(tx1, tx2, Vec3(1, 0.8, 2.5)));
    CHECK(mid.coordinates.x() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("exact recovery over random geometry") {
    Rng rng(17);
    const Vec3 tx1(0, 0, 0), tx2(2, 0, 0);
    int tested = 0;
    while (tested < 200) {
        const SphericalDirection dir{(5.0 + rng.next_double() * 55.0) * kDeg,
                                     (rng.next_double() * 2.0 - 1.0) * M_PI};
        const double range = 1.0 + rng.next_double() * 5.0;
        const Vec3 rx = tx1 + range * direction_to_unit_vector(dir);
        const SphericalDirection at2 = unit_vector_to_direction(rx - tx2);
        if (at2.theta < 5.0 * kDeg || at2.theta > 60.0 * kDeg) continue;
        const PositionEstimate est = triangulate(exact_input(tx1, tx2, rx));
        CHECK((est.coordinates - rx).norm() <= 1e-9);
        ++tested;
    }
}

TEST_CASE("translation equivariance") {
    Rng rng(18);
    const Vec3 tx1(0, 0, 0), tx2(2, 0, 0), rx(0.4, 0.9, 2.8);
    const Vec3 shift(rng.next_double() * 10 - 5, rng.next_double() * 10 - 5,
                     rng.next_double() * 10 - 5);
    const PositionEstimate base = triangulate(exact_input(tx1, tx2, rx));
    const PositionEstimate moved =
        triangulate(exact_input(tx1 + shift, tx2 + shift, rx + shift));
    CHECK((moved.coordinates - (base.coordinates + shift)).norm() <= 1e-9);
}

TEST_CASE("swapping the transmitters leaves the position unchanged") {
    const Vec3 tx1(0, 0, 0), tx2(2, 0, 0), rx(0.7, 1.1, 2.9);
    const PositionEstimate a = triangulate(exact_input(tx1, tx2, rx));
    const PositionEstimate b = triangulate(exact_input(tx2, tx1, rx));
    CHECK((a.coordinates - b.coordinates).norm() <= 1e-9);
}

TEST_CASE("triangle closure") {
    const Vec3 tx1(0, 0, 0), tx2(2, 0, 0), rx(0.3, 1.2, 3.1);
    const TriangulationInput in = exact_input(tx1, tx2, rx);
    const PositionEstimate est = triangulate(in);
    const InteriorAngles g = est.angles;
    const double r2 = in.baseline() * std::sin(g.gamma1) / std::sin(g.gamma1 + g.gamma2);
    CHECK(std::abs((est.coordinates - tx2).norm() - r2) <= 1e-9);
}

TEST_CASE("skew rays raise the diagnostic flag") {
    const Vec3 tx1(0, 0, 0), tx2(2, 0, 0), rx(0.5, 1.0, 3.0);
    TriangulationInput in = exact_input(tx1, tx2, rx);
    in.doa2.theta += 5.0 * kDeg;  // a grossly inconsistent second ray
    const PositionEstimate est = triangulate(in);
    CHECK(est.ray_skew_distance > 0.05);
    CHECK(est.condition == ConditionFlag::near_degenerate);
}

TEST_CASE("rmse") {
    const Vec3 truth(1, 2, 3);
    std::vector<Vec3> same{truth, truth, truth};
    CHECK(rmse(same, truth) == 0.0);

    std::vector<Vec3> offset{truth + Vec3(3e-3, 4e-3, 0)};
    CHECK(rmse(offset, truth) == doctest::Approx(5e-3).epsilon(1e-12));

    std::vector<Vec3> two{truth + Vec3(1e-3, 0, 0), truth + Vec3(0, 7e-3, 0)};
    CHECK(rmse(two, truth) == doctest::Approx(5e-3).epsilon(1e-12));

    CHECK_THROWS_AS(rmse(std::vector<Vec3>{}, truth), std::invalid_argument);
}
