#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <functional>

#include "skg/capacity.hpp"
#include "skg/channel.hpp"
#include "skg/rng.hpp"

namespace testutil {

inline Eigen::MatrixXcd random_gaussian_matrix(long r, long c, skg::CounterRng& rng) {
    Eigen::MatrixXcd m(r, c);
    for (long i = 0; i < r; ++i)
        for (long j = 0; j < c; ++j) m(i, j) = rng.next_complex_gaussian();
    return m;
}

// random orthonormal M x S frame with descending positive mode gains
inline skg::SpatialModeBasis random_basis(long M, long S, skg::CounterRng& rng,
                                          double lam_lo = 0.1, double lam_hi = 5.0) {
    const Eigen::MatrixXcd g = random_gaussian_matrix(M, S, rng);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    skg::SpatialModeBasis b;
    b.M = M;
    b.S = S;
    b.Q = qr.householderQ() * Eigen::MatrixXcd::Identity(M, S);
    b.lambda.resize(S);
    for (long s = 0; s < S; ++s)
        b.lambda(s) = lam_lo + (lam_hi - lam_lo) * rng.next_uniform();
    std::sort(b.lambda.data(), b.lambda.data() + S, std::greater<double>());
    return b;
}

inline skg::TrainingSequence random_training(long M, long T, double total_power,
                                             skg::CounterRng& rng) {
    Eigen::MatrixXcd S = random_gaussian_matrix(M, T, rng);
    S *= std::sqrt(total_power) / S.norm();
    return skg::TrainingSequence{std::move(S)};
}

// random Hermitian PSD with exactly the given trace
inline Eigen::MatrixXcd random_psd(long n, double trace, skg::CounterRng& rng) {
    const Eigen::MatrixXcd g = random_gaussian_matrix(n, n, rng);
    Eigen::MatrixXcd p = g * g.adjoint();
    p *= trace / p.trace().real();
    return 0.5 * (p + p.adjoint().eval());
}

// independent water level oracle: bisect mu so that sum (mu - s2/lambda)^+ = budget
inline double waterfill_mu_bisect(const Eigen::VectorXd& lambda, double budget, double s2) {
    auto spent = [&](double mu) {
        return (mu - s2 * lambda.array().inverse()).max(0.0).sum();
    };
    double lo = 0.0, hi = budget + s2 / lambda.minCoeff();
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (spent(mid) < budget ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// central finite differences w.r.t. a Hermitian matrix, convention df = tr(G dY)
inline Eigen::MatrixXcd fd_gradient(const std::function<double(const Eigen::MatrixXcd&)>& f,
                                    const Eigen::MatrixXcd& Y, double step) {
    const long n = Y.rows();
    Eigen::MatrixXcd G(n, n);
    for (long i = 0; i < n; ++i) {
        Eigen::MatrixXcd E = Eigen::MatrixXcd::Zero(n, n);
        E(i, i) = 1.0;
        G(i, i) = (f(Y + step * E) - f(Y - step * E)) / (2.0 * step);
    }
    for (long i = 0; i < n; ++i)
        for (long j = i + 1; j < n; ++j) {
            Eigen::MatrixXcd Er = Eigen::MatrixXcd::Zero(n, n);
            Er(i, j) = Er(j, i) = 1.0;
            const double re = (f(Y + step * Er) - f(Y - step * Er)) / (4.0 * step);
            Eigen::MatrixXcd Ei = Eigen::MatrixXcd::Zero(n, n);
            Ei(i, j) = std::complex<double>(0.0, 1.0);
            Ei(j, i) = std::complex<double>(0.0, -1.0);
            const double im = (f(Y + step * Ei) - f(Y - step * Ei)) / (4.0 * step);
            G(i, j) = std::complex<double>(re, im);
            G(j, i) = std::conj(G(i, j));
        }
    return G;
}

}  // namespace testutil
