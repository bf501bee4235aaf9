// SPDX-License-Identifier: Apache-2.0

#include "rbp/doa.hpp"
#include "rbp/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace rbp;

namespace {

constexpr double kDeg = M_PI / 180.0;

std::vector<Vec3> upa8x8() {
    const ArrayGeometry a = make_array(make_element_grid(8, 8, 0.005), Vec3::Zero(),
                                       Vec3::UnitZ(), Vec3::UnitX());
    return central_subarray(a, 8, 8);
}

/// Noise basis as the explicit orthogonal complement of one steering vector.
CMatrix complement_of(const CVector& alpha) {
    Eigen::HouseholderQR<CMatrix> qr(alpha);
    const CMatrix q = qr.householderQ();
    return q.rightCols(q.cols() - 1);
}

SearchGrid fast_grid() {
    SearchGrid g;
    g.coarse_step_deg = 2.0;
    g.refine_step_deg = 0.01;
    return g;
}

}  // namespace

TEST_CASE("central subarray extraction") {
    const ArrayGeometry a = make_array(make_element_grid(40, 40, 0.005), Vec3(1, 2, 3),
                                       Vec3::UnitZ(), Vec3::UnitX());
    const auto sub = central_subarray(a, 8, 8);
    REQUIRE(sub.size() == 64);
    // the central block of an even grid is itself centered
    Vec3 mean = Vec3::Zero();
    for (const auto& p : sub) mean += p;
    CHECK(mean.norm() / sub.size() <= 1e-12);
    CHECK((sub[1] - sub[0]).isApprox(Vec3(0.005, 0, 0), 1e-15));
    CHECK_THROWS_AS(central_subarray(a, 41, 8), std::invalid_argument);
}

TEST_CASE("steering vector phases") {
    const auto elements = upa8x8();
    // boresight: planar array in z = 0 sees zero path difference
    const CVector bore = steering_vector(elements, {0.0, 0.3}, 0.01);
    for (Eigen::Index i = 0; i < bore.size(); ++i)
        CHECK(std::abs(bore[i] - Complex(1.0, 0.0)) <= 1e-12);

    // two elements half a wavelength apart along x, endfire: pi phase gap
    const std::vector<Vec3> pair{Vec3::Zero(), Vec3(0.005, 0, 0)};
    const CVector endfire = steering_vector(pair, {M_PI / 2, 0.0}, 0.01);
    CHECK(std::abs(std::remainder(std::arg(endfire[1]) - std::arg(endfire[0]), 2.0 * M_PI)) ==
          doctest::Approx(M_PI).epsilon(1e-12));

    // unit modulus, exact at double precision
    const CVector a = steering_vector(elements, {0.7, -2.1}, 0.01);
    for (Eigen::Index i = 0; i < a.size(); ++i)
        CHECK(std::abs(std::abs(a[i]) - 1.0) <= 1e-15);
}

TEST_CASE("snapshot synthesis") {
    const auto elements = upa8x8();
    const SphericalDirection dir{30 * kDeg, 45 * kDeg};

    const SnapshotBatch a = synthesize_snapshots(elements, dir, 0.01, 1e-3, 1e-5, 64, 42);
    const SnapshotBatch b = synthesize_snapshots(elements, dir, 0.01, 1e-3, 1e-5, 64, 42);
    CHECK((a.snapshots - b.snapshots).norm() == 0.0);  // same seed, same batch

    const SnapshotBatch c = synthesize_snapshots(elements, dir, 0.01, 1e-3, 1e-5, 64, 43);
    CHECK((a.snapshots - c.snapshots).norm() > 0.0);

    CHECK_THROWS_AS(synthesize_snapshots(elements, dir, 0.01, -1.0, 1e-5, 64, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(synthesize_snapshots(elements, dir, 0.01, 1e-3, 1e-5, 0, 1),
                    std::invalid_argument);
}

TEST_CASE("sample covariance properties") {
    const auto elements = upa8x8();
    const SphericalDirection dir{20 * kDeg, -60 * kDeg};

    // single snapshot: R = x x^H
    const SnapshotBatch one = synthesize_snapshots(elements, dir, 0.01, 1e-3, 1e-6, 1, 7);
    const CMatrix r1 = sample_covariance(one);
    const CVector x = one.snapshots.col(0);
    CHECK((r1 - x * x.adjoint()).cwiseAbs().maxCoeff() <= 1e-15);

    // Hermitian within 1e-12, PSD
    const SnapshotBatch batch = synthesize_snapshots(elements, dir, 0.01, 1e-3, 1e-5, 128, 7);
    const CMatrix r = sample_covariance(batch);
    CHECK((r - r.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(r);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12 * es.eigenvalues().maxCoeff());

    // noiseless single source: rank 1
    const SnapshotBatch clean = synthesize_snapshots(elements, dir, 0.01, 1e-3, 0.0, 64, 9);
    Eigen::SelfAdjointEigenSolver<CMatrix> es2(sample_covariance(clean));
    const auto ev = es2.eigenvalues();
    CHECK(ev(ev.size() - 2) <= 1e-12 * ev(ev.size() - 1));

    // law of large numbers: R -> echo_power * alpha alpha^H
    const double echo = 2.5e-4;
    const SnapshotBatch big = synthesize_snapshots(elements, dir, 0.01, echo, 0.0, 10000, 11);
    const CMatrix rb = sample_covariance(big);
    const CVector alpha = steering_vector(elements, dir, 0.01);
    const CMatrix expect = echo * alpha * alpha.adjoint();
    CHECK((rb - expect).norm() / expect.norm() <= 0.05);
}

TEST_CASE("subspace split") {
    const auto elements = upa8x8();
    const Eigen::Index m = 64;

    // rank-1 plus scaled identity has a closed form
    const CVector alpha = steering_vector(elements, {35 * kDeg, 10 * kDeg}, 0.01);
    const double sigma2 = 0.3;
    const CMatrix r = alpha * alpha.adjoint() + sigma2 * CMatrix::Identity(m, m);
    const SubspaceSplit split = subspace_split(r, 1);
    CHECK(split.eigenvalues(0) ==
          doctest::Approx(static_cast<double>(m) + sigma2).epsilon(1e-12));
    const double align = std::abs(split.signal_basis.col(0).dot(alpha)) / alpha.norm();
    CHECK(align >= 1.0 - 1e-10);

    // reconstruction U Lambda U^H = R
    CMatrix basis(m, m);
    basis << split.signal_basis, split.noise_basis;
    const CMatrix recon = basis * split.eigenvalues.asDiagonal() * basis.adjoint();
    CHECK((recon - r).norm() <= 1e-10 * r.norm());

    // combined basis unitary
    CHECK((basis.adjoint() * basis - CMatrix::Identity(m, m)).norm() <= 1e-10);

    // eigenvalue sum equals the trace
    CHECK(std::abs(split.eigenvalues.sum() - r.trace().real()) <=
          1e-10 * std::abs(r.trace().real()));

    // descending order
    for (Eigen::Index i = 1; i < split.eigenvalues.size(); ++i)
        CHECK(split.eigenvalues(i) <= split.eigenvalues(i - 1) + 1e-12);

    CHECK_THROWS_AS(subspace_split(r, 64), std::invalid_argument);
    CHECK_THROWS_AS(subspace_split(r, 0), std::invalid_argument);
    CMatrix skew = r;
    skew(0, 1) += Complex(0.0, 1.0);
    CHECK_THROWS_AS(subspace_split(skew, 1), std::invalid_argument);

    // identity covariance: degenerate spectrum, reconstruction still holds
    const SubspaceSplit id = subspace_split(CMatrix::Identity(8, 8), 2);
    CHECK(id.eigenvalues.isApproxToConstant(1.0, 1e-12));
    CMatrix idb(8, 8);
    idb << id.signal_basis, id.noise_basis;
    CHECK((idb * idb.adjoint() - CMatrix::Identity(8, 8)).norm() <= 1e-10);
}

TEST_CASE("exact-subspace MUSIC peaks at the construction angle") {
    const auto elements = upa8x8();
    const SphericalDirection truth{30 * kDeg, 45 * kDeg};
    const CVector alpha = steering_vector(elements, truth, 0.01);
    const CMatrix noise_basis = complement_of(alpha);

    const MusicSpectrum sp = music_spectrum(elements, noise_basis, 0.01, fast_grid());
    CHECK(sp.peak.refined);
    CHECK(std::abs(sp.peak.direction.theta - truth.theta) <= 0.05 * kDeg);
    CHECK(std::abs(std::remainder(sp.peak.direction.phi - truth.phi, 2.0 * M_PI)) <=
          0.05 * kDeg);

    // the pseudospectrum is positive and finite everywhere
    CHECK(sp.pseudospectrum.minCoeff() > 0.0);
    CHECK(sp.pseudospectrum.allFinite());

    // orthogonality by construction makes the truth the global max
    const double at_truth = 1.0;  // P(truth) is the refined peak by construction
    CHECK(sp.peak.peak_value >= sp.pseudospectrum.maxCoeff() * at_truth);
}

TEST_CASE("estimator with cached steering table agrees with the direct path") {
    const auto elements = upa8x8();
    const SphericalDirection truth{42 * kDeg, -117 * kDeg};
    const CMatrix noise_basis = complement_of(steering_vector(elements, truth, 0.01));

    const MusicEstimator estimator(elements, 0.01, fast_grid());
    const MusicSpectrum cached = estimator.spectrum(noise_basis);
    const MusicSpectrum direct = music_spectrum(elements, noise_basis, 0.01, fast_grid());

    CHECK(std::abs(cached.peak.direction.theta - direct.peak.direction.theta) <= 1e-9);
    CHECK(std::abs(std::remainder(cached.peak.direction.phi - direct.peak.direction.phi,
                                  2.0 * M_PI)) <= 1e-9);
    CHECK((cached.pseudospectrum - direct.pseudospectrum).cwiseAbs().maxCoeff() <=
          1e-9 * direct.pseudospectrum.maxCoeff());
}

TEST_CASE("estimate_doa on noiseless boresight snapshots") {
    const auto elements = upa8x8();
    const SnapshotBatch batch =
        synthesize_snapshots(elements, {0.0, 0.0}, 0.01, 1e-3, 0.0, 64, 3);
    const DoaEstimate est = estimate_doa(batch, elements, 0.01, fast_grid());
    CHECK(est.direction.theta <= 0.05 * kDeg);
}

TEST_CASE("azimuth estimates wrap modulo 2 pi") {
    const auto elements = upa8x8();
    const SphericalDirection a{25 * kDeg, 170 * kDeg};
    const SphericalDirection b{25 * kDeg, 170 * kDeg + 2.0 * M_PI};
    const SnapshotBatch ba = synthesize_snapshots(elements, a, 0.01, 1e-3, 1e-6, 64, 5);
    const SnapshotBatch bb = synthesize_snapshots(elements, b, 0.01, 1e-3, 1e-6, 64, 5);
    const DoaEstimate ea = estimate_doa(ba, elements, 0.01, fast_grid());
    const DoaEstimate eb = estimate_doa(bb, elements, 0.01, fast_grid());
    CHECK(std::abs(std::remainder(ea.direction.phi - eb.direction.phi, 2.0 * M_PI)) <=
          0.02 * kDeg);
}

TEST_CASE("Monte Carlo estimates are centered on the truth") {
    const auto elements = upa8x8();
    const SphericalDirection truth{30 * kDeg, 45 * kDeg};
    const MusicEstimator estimator(elements, 0.01, fast_grid());

    const int trials = 100;
    double mean_dth = 0.0, mean_dph = 0.0, var_dth = 0.0, var_dph = 0.0;
    std::vector<double> dths, dphs;
    for (int t = 0; t < trials; ++t) {
        const SnapshotBatch batch = synthesize_snapshots(
            elements, truth, 0.01, 1e-4, 1e-5, 64, 1000 + static_cast<std::uint64_t>(t));
        const DoaEstimate est = estimator.estimate(batch);
        dths.push_back((est.direction.theta - truth.theta) / kDeg);
        dphs.push_back(std::remainder(est.direction.phi - truth.phi, 2.0 * M_PI) / kDeg);
    }
    for (double v : dths) mean_dth += v / trials;
    for (double v : dphs) mean_dph += v / trials;
    for (double v : dths) var_dth += (v - mean_dth) * (v - mean_dth) / trials;
    for (double v : dphs) var_dph += (v - mean_dph) * (v - mean_dph) / trials;

    // bias bounded by one refinement step plus Monte Carlo uncertainty
    CHECK(std::abs(mean_dth) <= 0.01 + 3.0 * std::sqrt(var_dth / trials));
    CHECK(std::abs(mean_dph) <= 0.01 + 3.0 * std::sqrt(var_dph / trials));
}

TEST_CASE("spectrum CSV export") {
    const auto elements = upa8x8();
    const CMatrix noise_basis =
        complement_of(steering_vector(elements, {10 * kDeg, 0.0}, 0.01));
    SearchGrid tiny;
    tiny.theta_max_deg = 4.0;
    tiny.phi_min_deg = -4.0;
    tiny.phi_max_deg = 4.0;
    tiny.coarse_step_deg = 2.0;
    const MusicSpectrum sp = music_spectrum(elements, noise_basis, 0.01, tiny);
    std::ostringstream os;
    export_music_spectrum_csv(sp, os);
    CHECK(os.str().starts_with("theta_deg,phi_deg,pseudospectrum_db\n"));
}
