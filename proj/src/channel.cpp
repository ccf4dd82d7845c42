#include "skg/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace skg {

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
}

}  // namespace

HermitianMatrix::HermitianMatrix(Eigen::MatrixXcd entries, bool require_psd)
    : m_(std::move(entries)) {
    if (m_.rows() != m_.cols() || m_.rows() < 1)
        throw std::invalid_argument("HermitianMatrix: matrix must be square and non-empty");
    for (long i = 0; i < m_.rows(); ++i)
        for (long j = i; j < m_.cols(); ++j)
            if (std::abs(m_(i, j) - std::conj(m_(j, i))) > 1e-12)
                throw std::invalid_argument("HermitianMatrix: entries not Hermitian within 1e-12");
    if (require_psd) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m_, Eigen::EigenvaluesOnly);
        const double lmax = es.eigenvalues().maxCoeff();
        if (es.eigenvalues().minCoeff() < -1e-10 * std::max(lmax, 0.0))
            throw std::invalid_argument("HermitianMatrix: matrix is not PSD within tolerance");
    }
}

Eigen::MatrixXcd SpatialModeBasis::reconstruct() const {
    if (S == 0) return Eigen::MatrixXcd::Zero(M, M);
    return Q * lambda.asDiagonal() * Q.adjoint();
}

ArrayGeometry ArrayGeometry::ula(long M, double spacing) {
    if (M < 1) throw std::invalid_argument("ula: M must be >= 1");
    ArrayGeometry g;
    g.positions.reserve(M);
    for (long m = 0; m < M; ++m) g.positions.emplace_back(m * spacing, 0.0, 0.0);
    return g;
}

ArrayGeometry ArrayGeometry::planar(long rows, long cols, double spacing) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("planar: rows/cols must be >= 1");
    ArrayGeometry g;
    g.positions.reserve(rows * cols);
    for (long r = 0; r < rows; ++r)
        for (long c = 0; c < cols; ++c)
            g.positions.emplace_back(c * spacing, 0.0, r * spacing);
    return g;
}

HermitianMatrix make_exp_correlation(long M, std::complex<double> rho) {
    if (M < 1) throw std::invalid_argument("make_exp_correlation: M must be >= 1");
    if (std::abs(rho) >= 1.0)
        throw std::invalid_argument("make_exp_correlation: |rho| must be < 1");
    Eigen::MatrixXcd R(M, M);
    for (long i = 0; i < M; ++i) {
        R(i, i) = 1.0;
        for (long j = i + 1; j < M; ++j) {
            const std::complex<double> v = std::pow(rho, static_cast<double>(j - i));
            R(i, j) = v;
            R(j, i) = std::conj(v);
        }
    }
    return HermitianMatrix(std::move(R), true);
}

Eigen::VectorXcd steering_vector(const ArrayGeometry& geom, double azimuth, double elevation) {
    const long M = geom.count();
    Eigen::VectorXcd a(M);
    const Eigen::Vector3d u(std::cos(elevation) * std::cos(azimuth),
                            std::cos(elevation) * std::sin(azimuth),
                            std::sin(elevation));
    for (long m = 0; m < M; ++m) {
        const double phase = 2.0 * M_PI * geom.positions[m].dot(u);
        a(m) = std::complex<double>(std::cos(phase), std::sin(phase));
    }
    return a;
}

HermitianMatrix make_clustered_covariance(const ArrayGeometry& geom,
                                          const std::vector<ClusterSpec>& clusters,
                                          int nodes_per_cluster) {
    if (clusters.empty())
        throw std::invalid_argument("make_clustered_covariance: cluster list is empty");
    if (nodes_per_cluster < 64) nodes_per_cluster = 64;
    const long M = geom.count();
    if (M < 1) throw std::invalid_argument("make_clustered_covariance: empty array");

    std::vector<double> gx, gw;
    gauss_legendre(nodes_per_cluster, gx, gw);

    Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(M, M);
    for (const auto& c : clusters) {
        if (c.power <= 0.0)
            throw std::invalid_argument("make_clustered_covariance: cluster power must be > 0");
        if (c.angular_spread <= 0.0)
            throw std::invalid_argument("make_clustered_covariance: angular spread must be > 0");
        // integrate over azimuth in [center - 4*spread, center + 4*spread]
        const double half = 4.0 * c.angular_spread;
        Eigen::MatrixXcd Rc = Eigen::MatrixXcd::Zero(M, M);
        double wsum = 0.0;
        for (int q = 0; q < nodes_per_cluster; ++q) {
            const double theta = c.azimuth + half * gx[q];
            const double dev = half * gx[q];
            const double pdf = std::exp(-0.5 * dev * dev / (c.angular_spread * c.angular_spread));
            const double wq = gw[q] * pdf;
            const Eigen::VectorXcd a = steering_vector(geom, theta, c.elevation);
            Rc.noalias() += wq * (a * a.adjoint());
            wsum += wq;
        }
        R += (c.power / wsum) * Rc;
    }
    // normalize to tr R = M
    R *= static_cast<double>(M) / R.trace().real();
    R = 0.5 * (R + R.adjoint().eval());
    return HermitianMatrix(std::move(R), true);
}

SpatialModeBasis compact_eig(const HermitianMatrix& R, double rank_tol) {
    if (rank_tol <= 0.0 || rank_tol >= 1.0)
        throw std::invalid_argument("compact_eig: rank_tol must be in (0, 1)");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(R.mat());
    if (es.info() != Eigen::Success)
        throw std::invalid_argument("compact_eig: eigendecomposition failed");
    const long M = R.dim();
    const double lmax = es.eigenvalues().maxCoeff();

    SpatialModeBasis b;
    b.M = M;
    std::vector<long> keep;
    for (long i = M - 1; i >= 0; --i)  // Eigen sorts ascending; reverse to descending
        if (es.eigenvalues()(i) >= rank_tol * lmax && es.eigenvalues()(i) > 0.0)
            keep.push_back(i);
    b.S = static_cast<long>(keep.size());
    b.Q.resize(M, b.S);
    b.lambda.resize(b.S);
    for (long s = 0; s < b.S; ++s) {
        b.lambda(s) = es.eigenvalues()(keep[s]);
        Eigen::VectorXcd q = es.eigenvectors().col(keep[s]);
        // phase convention: first significant component real positive
        for (long i = 0; i < M; ++i) {
            if (std::abs(q(i)) > 1e-9) {
                q *= std::conj(q(i)) / std::abs(q(i));
                break;
            }
        }
        b.Q.col(s) = q;
    }
    return b;
}

Eigen::VectorXcd sample_channel(const SpatialModeBasis& modes, CounterRng& rng) {
    Eigen::VectorXcd h = Eigen::VectorXcd::Zero(modes.M);
    for (long s = 0; s < modes.S; ++s)
        h += std::sqrt(modes.lambda(s)) * rng.next_complex_gaussian() * modes.Q.col(s);
    return h;
}

double cross_user_coherence(const std::vector<SpatialModeBasis>& bases) {
    if (bases.size() < 2)
        throw std::invalid_argument("cross_user_coherence: need at least 2 users");
    const long M = bases[0].M;
    for (const auto& b : bases)
        if (b.M != M) throw std::invalid_argument("cross_user_coherence: mismatched antenna counts");
    double best = 0.0;
    for (size_t k = 0; k < bases.size(); ++k)
        for (size_t kp = k + 1; kp < bases.size(); ++kp) {
            if (bases[k].S == 0 || bases[kp].S == 0) continue;
            const Eigen::MatrixXd ip = (bases[k].Q.adjoint() * bases[kp].Q).cwiseAbs();
            best = std::max(best, ip.maxCoeff());
        }
    return std::min(best, 1.0);
}

}  // namespace skg
