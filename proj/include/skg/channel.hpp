#pragma once

#include <Eigen/Dense>
#include <vector>

#include "skg/rng.hpp"

namespace skg {

// Dense complex square matrix with a checked Hermitian (optionally PSD) invariant.
class HermitianMatrix {
public:
    // Validates entries[i][j] == conj(entries[j][i]) within 1e-12 per entry;
    // with require_psd, smallest eigenvalue must be >= -1e-10 * largest.
    explicit HermitianMatrix(Eigen::MatrixXcd entries, bool require_psd = false);

    const Eigen::MatrixXcd& mat() const { return m_; }
    long dim() const { return m_.rows(); }

private:
    Eigen::MatrixXcd m_;
};

// Compact eigen-pair of a covariance: orthonormal directions Q (M x S) and
// strictly positive mode gains lambda, sorted descending.
struct SpatialModeBasis {
    long M = 0;
    long S = 0;
    Eigen::MatrixXcd Q;      // M x S, orthonormal columns
    Eigen::VectorXd lambda;  // length S, descending, > 0

    Eigen::MatrixXcd reconstruct() const;  // Q diag(lambda) Q^H
};

struct UserStatistics {
    SpatialModeBasis modes;
    double uplink_snr = 1.0;  // rho_UL = p_UL / sigma_UL^2, linear
};

struct ArrayGeometry {
    std::vector<Eigen::Vector3d> positions;  // wavelength units
    long count() const { return static_cast<long>(positions.size()); }

    static ArrayGeometry ula(long M, double spacing = 0.5);
    static ArrayGeometry planar(long rows, long cols, double spacing = 0.5);
};

struct ClusterSpec {
    double azimuth = 0.0;        // radians
    double elevation = 0.0;      // radians
    double angular_spread = 0.1; // radians, std dev of azimuth around center
    double power = 1.0;          // linear
};

// R[i][j] = rho^(j-i) for i <= j, conjugate below; unit diagonal, PSD for |rho| < 1.
HermitianMatrix make_exp_correlation(long M, std::complex<double> rho);

// Sum over clusters of power-weighted E[a(theta) a(theta)^H], azimuth drawn
// Gaussian around the cluster center, evaluated by Gauss-Legendre quadrature
// (>= 64 nodes per cluster, truncated at +-4 spreads).  Normalized to tr R = M.
HermitianMatrix make_clustered_covariance(const ArrayGeometry& geom,
                                          const std::vector<ClusterSpec>& clusters,
                                          int nodes_per_cluster = 64);

Eigen::VectorXcd steering_vector(const ArrayGeometry& geom, double azimuth, double elevation);

// Keeps eigen-pairs with lambda >= rank_tol * lambda_max, descending; eigenvector
// phases fixed so the first significant component is real positive.
SpatialModeBasis compact_eig(const HermitianMatrix& R, double rank_tol = 1e-8);

// h = Q diag(sqrt(lambda)) g with g standard complex Gaussian.
Eigen::VectorXcd sample_channel(const SpatialModeBasis& modes, CounterRng& rng);

// max over distinct users k != k' of |q_{s,k}^H q_{s',k'}|, in [0, 1]
double cross_user_coherence(const std::vector<SpatialModeBasis>& bases);

}  // namespace skg
