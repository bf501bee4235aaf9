// SPDX-License-Identifier: Apache-2.0
//
// rbp -- resonant-beam positioning simulator
// Snapshot synthesis and 2-D MUSIC direction finding on a planar subarray.

#pragma once

#include "rbp/channel.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

namespace rbp {

/// Local-frame coordinates of the central rows x cols block of the array.
std::vector<Vec3> central_subarray(const ArrayGeometry& array, int rows, int cols);

/// Per-element plane-wave phase response e^{-j k r_m . u(theta, phi)} using
/// the elements' local-frame coordinates. Entries are unit modulus.
CVector steering_vector(const std::vector<Vec3>& elements, const SphericalDirection& dir,
                        double wavelength);

struct SnapshotBatch {
    CMatrix snapshots;        // M x T
    double noise_power = 0.0; // W per element
    int source_count = 1;     // K, assumed known
};

/// Narrowband single-source model: column t = sqrt(echo_power) s_t a + n_t
/// with unit-power circular Gaussian symbols s_t and white circular
/// Gaussian noise of per-element variance noise_power. Deterministic in
/// `seed`.
SnapshotBatch synthesize_snapshots(const std::vector<Vec3>& elements,
                                   const SphericalDirection& true_dir, double wavelength,
                                   double echo_power, double noise_power, int snapshots,
                                   std::uint64_t seed);

/// R = X X^H / T. Hermitian positive semidefinite.
CMatrix sample_covariance(const SnapshotBatch& batch);

struct SubspaceSplit {
    CMatrix signal_basis;       // M x K, top eigenvectors
    CMatrix noise_basis;        // M x (M - K)
    Eigen::VectorXd eigenvalues;  // descending
};

/// Eigendecomposition of a Hermitian matrix split at source count K.
/// Throws for K >= M or inputs that are not Hermitian within 1e-9 relative.
SubspaceSplit subspace_split(const CMatrix& covariance, int source_count);

struct DoaEstimate {
    SphericalDirection direction;
    double peak_value = 0.0;
    bool refined = false;
};

struct SearchGrid {
    double theta_min_deg = 0.0;
    double theta_max_deg = 80.0;
    double phi_min_deg = -180.0;
    double phi_max_deg = 180.0;
    double coarse_step_deg = 0.5;
    double refine_step_deg = 0.01;
};

struct MusicSpectrum {
    std::vector<double> theta_grid;  // radians
    std::vector<double> phi_grid;    // radians
    Eigen::MatrixXd pseudospectrum;  // theta x phi, positive
    DoaEstimate peak;
};

/// Reciprocal MUSIC pseudospectrum 1 / (a^H U_N U_N^H a) on the coarse grid
/// with local shrinking-neighborhood refinement of the peak down to
/// refine_step_deg.
MusicSpectrum music_spectrum(const std::vector<Vec3>& elements, const CMatrix& noise_basis,
                             double wavelength, const SearchGrid& grid);

/// Covariance -> subspace split -> pseudospectrum peak.
DoaEstimate estimate_doa(const SnapshotBatch& batch, const std::vector<Vec3>& elements,
                         double wavelength, const SearchGrid& grid);

/// Reusable estimator that caches the coarse-grid steering table; intended
/// for Monte Carlo loops where thousands of spectra share one geometry.
/// Immutable after construction and safe to share across threads.
class MusicEstimator {
  public:
    MusicEstimator(std::vector<Vec3> elements, double wavelength, SearchGrid grid);
    ~MusicEstimator();
    MusicEstimator(MusicEstimator&&) noexcept;
    MusicEstimator& operator=(MusicEstimator&&) noexcept;

    const std::vector<Vec3>& elements() const;
    const SearchGrid& grid() const;
    double wavelength() const;

    MusicSpectrum spectrum(const CMatrix& noise_basis) const;
    DoaEstimate estimate(const SnapshotBatch& batch) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

void export_music_spectrum_csv(const MusicSpectrum& spectrum, std::ostream& os);

}  // namespace rbp
