// SPDX-License-Identifier: Apache-2.0
//
// rbp -- resonant-beam positioning simulator

#include "rbp/doa.hpp"

#include "rbp/csv.hpp"
#include "rbp/rng.hpp"

#include <cmath>
#include <iostream>
#include <ostream>
#include <stdexcept>

namespace rbp {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

double wrap_pi(double a) {
    double r = std::remainder(a, 2.0 * M_PI);
    if (r <= -M_PI) r = M_PI;
    return r;
}

/// Denominator a^H U_N U_N^H a, evaluated through the orthogonal complement
/// when the signal subspace is the smaller of the two.
struct Projection {
    CMatrix basis;          // M x B
    bool complement = false;  // true: basis spans the signal side
    double full_norm = 0.0;   // ||a||^2 = M for unit-modulus steering entries

    double denom(const CVector& a) const {
        const double proj = (basis.adjoint() * a).squaredNorm();
        const double d = complement ? a.squaredNorm() - proj : proj;
        return std::max(d, 1e-18 * std::max(1.0, a.squaredNorm()));
    }
};

Projection make_projection(const CMatrix& noise_basis) {
    const Eigen::Index m = noise_basis.rows();
    const Eigen::Index n_cols = noise_basis.cols();
    if (n_cols == 0 || n_cols >= m + 1)
        throw std::invalid_argument("noise basis must have between 1 and M-1 columns");
    Projection p;
    p.full_norm = static_cast<double>(m);
    const Eigen::Index k = m - n_cols;
    if (k < n_cols) {
        // Complete the unitary basis; the last K columns of Q span the
        // orthogonal complement of the noise subspace.
        Eigen::HouseholderQR<CMatrix> qr(noise_basis);
        CMatrix q = qr.householderQ();
        p.basis = q.rightCols(k);
        p.complement = true;
    } else {
        p.basis = noise_basis;
    }
    return p;
}

std::vector<double> linear_grid(double lo_deg, double hi_deg, double step_deg,
                                bool drop_first) {
    std::vector<double> g;
    const int n = static_cast<int>(std::llround((hi_deg - lo_deg) / step_deg));
    for (int i = drop_first ? 1 : 0; i <= n; ++i) g.push_back((lo_deg + i * step_deg) * kDegToRad);
    return g;
}

}  // namespace

std::vector<Vec3> central_subarray(const ArrayGeometry& array, int rows, int cols) {
    const int full_r = array.grid.rows;
    const int full_c = array.grid.cols;
    if (rows < 1 || cols < 1 || rows > full_r || cols > full_c)
        throw std::invalid_argument("subarray does not fit inside the array");
    const auto local = array.grid.local_positions();
    const int r0 = (full_r - rows) / 2;
    const int c0 = (full_c - cols) / 2;
    std::vector<Vec3> out;
    out.reserve(static_cast<size_t>(rows) * cols);
    for (int r = r0; r < r0 + rows; ++r)
        for (int c = c0; c < c0 + cols; ++c)
            out.push_back(local[static_cast<size_t>(r) * full_c + c]);
    return out;
}

CVector steering_vector(const std::vector<Vec3>& elements, const SphericalDirection& dir,
                        double wavelength) {
    if (wavelength <= 0.0) throw std::invalid_argument("wavelength must be positive");
    const Vec3 u = direction_to_unit_vector(dir);
    const double k = 2.0 * M_PI / wavelength;
    CVector a(static_cast<Eigen::Index>(elements.size()));
    for (std::size_t m = 0; m < elements.size(); ++m)
        a[static_cast<Eigen::Index>(m)] = std::polar(1.0, -k * elements[m].dot(u));
    return a;
}

SnapshotBatch synthesize_snapshots(const std::vector<Vec3>& elements,
                                   const SphericalDirection& true_dir, double wavelength,
                                   double echo_power, double noise_power, int snapshots,
                                   std::uint64_t seed) {
    if (echo_power < 0.0 || noise_power < 0.0)
        throw std::invalid_argument("powers must be non-negative");
    if (snapshots < 1) throw std::invalid_argument("need at least one snapshot");

    const Eigen::Index m = static_cast<Eigen::Index>(elements.size());
    if (snapshots < m)
        std::cerr << "warning: " << snapshots << " snapshots < " << m
                  << " elements; sample covariance will be rank-deficient\n";

    const CVector a = steering_vector(elements, true_dir, wavelength);
    const double s_amp = std::sqrt(echo_power);
    const double n_amp = std::sqrt(noise_power);

    SnapshotBatch batch;
    batch.noise_power = noise_power;
    batch.source_count = 1;
    batch.snapshots.resize(m, snapshots);

    Rng rng(seed);
    for (int t = 0; t < snapshots; ++t) {
        const Complex s = rng.next_complex_gaussian();
        for (Eigen::Index i = 0; i < m; ++i)
            batch.snapshots(i, t) = s_amp * s * a[i] + n_amp * rng.next_complex_gaussian();
    }
    return batch;
}

CMatrix sample_covariance(const SnapshotBatch& batch) {
    const Eigen::Index t = batch.snapshots.cols();
    if (t < 1) throw std::invalid_argument("empty snapshot batch");
    return (batch.snapshots * batch.snapshots.adjoint()) / static_cast<double>(t);
}

SubspaceSplit subspace_split(const CMatrix& covariance, int source_count) {
    const Eigen::Index m = covariance.rows();
    if (covariance.cols() != m) throw std::invalid_argument("covariance must be square");
    if (source_count < 1 || source_count >= m)
        throw std::invalid_argument("source count must satisfy 1 <= K < M");

    const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
    if (((covariance - covariance.adjoint()).cwiseAbs().maxCoeff()) > 1e-9 * scale)
        throw std::invalid_argument("covariance is not Hermitian within tolerance");

    Eigen::SelfAdjointEigenSolver<CMatrix> solver(
        (covariance + covariance.adjoint()) * 0.5);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigendecomposition failed");

    // Eigen orders ascending; flip to descending.
    SubspaceSplit split;
    split.eigenvalues = solver.eigenvalues().reverse();
    CMatrix vectors = solver.eigenvectors().rowwise().reverse();
    split.signal_basis = vectors.leftCols(source_count);
    split.noise_basis = vectors.rightCols(m - source_count);
    return split;
}

namespace {

DoaEstimate refine_peak(const std::vector<Vec3>& elements, double wavelength,
                        const Projection& proj, const SearchGrid& grid,
                        SphericalDirection start, double start_value) {
    const double theta_lo = grid.theta_min_deg * kDegToRad;
    const double theta_hi = grid.theta_max_deg * kDegToRad;
    const double refine = grid.refine_step_deg * kDegToRad;

    auto value_at = [&](double th, double ph) {
        return 1.0 / proj.denom(steering_vector(elements, {th, ph}, wavelength));
    };

    double th = start.theta, ph = start.phi;
    double best = start_value;
    double step = grid.coarse_step_deg * kDegToRad;
    while (step >= 0.5 * refine) {
        double cand_th = th, cand_ph = ph, cand = best;
        for (int dt = -1; dt <= 1; ++dt) {
            for (int dp = -1; dp <= 1; ++dp) {
                if (dt == 0 && dp == 0) continue;
                const double t2 = std::clamp(th + dt * step, theta_lo, theta_hi);
                const double p2 = wrap_pi(ph + dp * step);
                const double v = value_at(t2, p2);
                if (v > cand) {
                    cand = v;
                    cand_th = t2;
                    cand_ph = p2;
                }
            }
        }
        if (cand > best) {
            best = cand;
            th = cand_th;
            ph = cand_ph;
        } else {
            step *= 0.5;
        }
    }
    return DoaEstimate{{th, ph}, best, true};
}

}  // namespace

MusicSpectrum music_spectrum(const std::vector<Vec3>& elements, const CMatrix& noise_basis,
                             double wavelength, const SearchGrid& grid) {
    if (static_cast<Eigen::Index>(elements.size()) != noise_basis.rows())
        throw std::invalid_argument("noise basis rows must match element count");

    const Projection proj = make_projection(noise_basis);

    MusicSpectrum sp;
    sp.theta_grid = linear_grid(grid.theta_min_deg, grid.theta_max_deg,
                                grid.coarse_step_deg, false);
    const bool full_circle =
        std::abs((grid.phi_max_deg - grid.phi_min_deg) - 360.0) < 1e-9;
    sp.phi_grid = linear_grid(grid.phi_min_deg, grid.phi_max_deg, grid.coarse_step_deg,
                              full_circle);
    if (sp.theta_grid.empty() || sp.phi_grid.empty())
        throw std::invalid_argument("empty pseudospectrum grid");

    sp.pseudospectrum.resize(static_cast<Eigen::Index>(sp.theta_grid.size()),
                             static_cast<Eigen::Index>(sp.phi_grid.size()));

    double best = -1.0;
    Eigen::Index best_t = 0, best_p = 0;
    for (std::size_t ti = 0; ti < sp.theta_grid.size(); ++ti) {
        for (std::size_t pi = 0; pi < sp.phi_grid.size(); ++pi) {
            const CVector a =
                steering_vector(elements, {sp.theta_grid[ti], sp.phi_grid[pi]}, wavelength);
            const double v = 1.0 / proj.denom(a);
            sp.pseudospectrum(static_cast<Eigen::Index>(ti), static_cast<Eigen::Index>(pi)) = v;
            if (v > best) {
                best = v;
                best_t = static_cast<Eigen::Index>(ti);
                best_p = static_cast<Eigen::Index>(pi);
            }
        }
    }
    sp.peak = refine_peak(elements, wavelength, proj, grid,
                          {sp.theta_grid[best_t], sp.phi_grid[best_p]}, best);
    return sp;
}

DoaEstimate estimate_doa(const SnapshotBatch& batch, const std::vector<Vec3>& elements,
                         double wavelength, const SearchGrid& grid) {
    const CMatrix r = sample_covariance(batch);
    const SubspaceSplit split = subspace_split(r, batch.source_count);
    return music_spectrum(elements, split.noise_basis, wavelength, grid).peak;
}

struct MusicEstimator::Impl {
    std::vector<Vec3> elements;
    double wavelength;
    SearchGrid grid;
    std::vector<double> theta_grid;  // radians
    std::vector<double> phi_grid;
    CMatrix steering_table;          // M x (n_theta * n_phi), theta-major
};

MusicEstimator::MusicEstimator(std::vector<Vec3> elements, double wavelength, SearchGrid grid)
    : impl_(std::make_unique<Impl>()) {
    impl_->elements = std::move(elements);
    impl_->wavelength = wavelength;
    impl_->grid = grid;
    impl_->theta_grid =
        linear_grid(grid.theta_min_deg, grid.theta_max_deg, grid.coarse_step_deg, false);
    const bool full_circle = std::abs((grid.phi_max_deg - grid.phi_min_deg) - 360.0) < 1e-9;
    impl_->phi_grid =
        linear_grid(grid.phi_min_deg, grid.phi_max_deg, grid.coarse_step_deg, full_circle);
    if (impl_->theta_grid.empty() || impl_->phi_grid.empty())
        throw std::invalid_argument("empty pseudospectrum grid");

    const Eigen::Index m = static_cast<Eigen::Index>(impl_->elements.size());
    const Eigen::Index pts =
        static_cast<Eigen::Index>(impl_->theta_grid.size() * impl_->phi_grid.size());
    impl_->steering_table.resize(m, pts);
    Eigen::Index col = 0;
    for (double th : impl_->theta_grid)
        for (double ph : impl_->phi_grid)
            impl_->steering_table.col(col++) =
                steering_vector(impl_->elements, {th, ph}, wavelength);
}

MusicEstimator::~MusicEstimator() = default;
MusicEstimator::MusicEstimator(MusicEstimator&&) noexcept = default;
MusicEstimator& MusicEstimator::operator=(MusicEstimator&&) noexcept = default;

const std::vector<Vec3>& MusicEstimator::elements() const { return impl_->elements; }
const SearchGrid& MusicEstimator::grid() const { return impl_->grid; }
double MusicEstimator::wavelength() const { return impl_->wavelength; }

MusicSpectrum MusicEstimator::spectrum(const CMatrix& noise_basis) const {
    if (noise_basis.rows() != static_cast<Eigen::Index>(impl_->elements.size()))
        throw std::invalid_argument("noise basis rows must match element count");
    const Projection proj = make_projection(noise_basis);
    const Eigen::Index n_phi = static_cast<Eigen::Index>(impl_->phi_grid.size());
    const Eigen::Index n_theta = static_cast<Eigen::Index>(impl_->theta_grid.size());
    const double m = static_cast<double>(impl_->elements.size());

    // One GEMM against the cached steering table gives every projection norm.
    Eigen::VectorXd proj_norm =
        (proj.basis.adjoint() * impl_->steering_table).colwise().squaredNorm().transpose();

    MusicSpectrum sp;
    sp.theta_grid = impl_->theta_grid;
    sp.phi_grid = impl_->phi_grid;
    sp.pseudospectrum.resize(n_theta, n_phi);
    double best = -1.0;
    Eigen::Index best_t = 0, best_p = 0;
    for (Eigen::Index ti = 0; ti < n_theta; ++ti) {
        for (Eigen::Index pi = 0; pi < n_phi; ++pi) {
            const double raw = proj.complement ? m - proj_norm[ti * n_phi + pi]
                                               : proj_norm[ti * n_phi + pi];
            const double v = 1.0 / std::max(raw, 1e-18 * m);
            sp.pseudospectrum(ti, pi) = v;
            if (v > best) {
                best = v;
                best_t = ti;
                best_p = pi;
            }
        }
    }
    sp.peak = refine_peak(impl_->elements, impl_->wavelength, proj, impl_->grid,
                          {impl_->theta_grid[best_t], impl_->phi_grid[best_p]}, best);
    return sp;
}

DoaEstimate MusicEstimator::estimate(const SnapshotBatch& batch) const {
    const CMatrix r = sample_covariance(batch);
    const SubspaceSplit split = subspace_split(r, batch.source_count);
    return spectrum(split.noise_basis).peak;
}

void export_music_spectrum_csv(const MusicSpectrum& spectrum, std::ostream& os) {
    os << "theta_deg,phi_deg,pseudospectrum_db\n";
    for (std::size_t ti = 0; ti < spectrum.theta_grid.size(); ++ti) {
        for (std::size_t pi = 0; pi < spectrum.phi_grid.size(); ++pi) {
            const double v = spectrum.pseudospectrum(static_cast<Eigen::Index>(ti),
                                                     static_cast<Eigen::Index>(pi));
            os << format_double(spectrum.theta_grid[ti] / kDegToRad) << ','
               << format_double(spectrum.phi_grid[pi] / kDegToRad) << ','
               << format_double(10.0 * std::log10(v)) << '\n';
        }
    }
}

}  // namespace rbp
