#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "clustering.hpp"
#include "errors.hpp"

namespace kgraph {

/// Co-clustering frequency of every pair of series over M partitions.
struct ConsensusMatrix {
    Matrix values;
    std::size_t partitions = 0;

    std::size_t size() const noexcept { return values.rows; }
};

inline ConsensusMatrix consensus_matrix(std::span<const Partition> parts) {
    if (parts.empty()) throw DataError("consensus needs at least one partition");
    const std::size_t n = parts.front().size();
    for (const auto& p : parts) {
        if (p.size() != n) throw DataError("partitions differ in length");
    }
    std::vector<std::size_t> together(n * n, 0);
    for (const auto& p : parts) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i; j < n; ++j) {
                if (p.labels[i] == p.labels[j]) ++together[i * n + j];
            }
        }
    }
    ConsensusMatrix mc{Matrix(n, n), parts.size()};
    const double m = static_cast<double>(parts.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = static_cast<double>(together[i * n + j]) / m;
            mc.values(i, j) = v;
            mc.values(j, i) = v;
        }
    }
    return mc;
}

/// The k smallest eigenpairs of the symmetric normalized Laplacian of an affinity matrix.
struct SpectralEmbedding {
    Eigen::MatrixXd laplacian;
    Eigen::VectorXd eigenvalues;  // all of them, ascending
    Eigen::MatrixXd eigenvectors; // n x k, columns match eigenvalues(0..k)
};

inline constexpr double kDegreeFloor = 1e-12;

inline SpectralEmbedding spectral_embedding(const Matrix& affinity, std::size_t k) {
    const auto n = static_cast<Eigen::Index>(affinity.rows);
    if (affinity.rows != affinity.cols) throw DataError("affinity matrix must be square");
    if (k == 0 || k > affinity.rows) throw ConfigError("k must be in [1, number of series]");

    Eigen::VectorXd inv_sqrt_deg(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double deg = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) deg += affinity(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        inv_sqrt_deg(i) = 1.0 / std::sqrt(std::max(deg, kDegreeFloor));
    }
    SpectralEmbedding out;
    out.laplacian = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            out.laplacian(i, j) -=
                inv_sqrt_deg(i) * affinity(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) * inv_sqrt_deg(j);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.laplacian);
    if (eig.info() != Eigen::Success) throw DataError("Laplacian eigendecomposition failed");
    out.eigenvalues = eig.eigenvalues();
    out.eigenvectors = eig.eigenvectors().leftCols(static_cast<Eigen::Index>(k));
    for (Eigen::Index c = 0; c < out.eigenvectors.cols(); ++c) {
        Eigen::VectorXd v = out.eigenvectors.col(c);
        detail::canonical_sign(v);
        out.eigenvectors.col(c) = v;
    }
    return out;
}

/// Ng-Jordan-Weiss spectral clustering on an affinity matrix.
inline Partition spectral_cluster(const Matrix& affinity, std::size_t k, std::uint64_t seed) {
    const auto emb = spectral_embedding(affinity, k);
    const std::size_t n = affinity.rows;
    Matrix rows(n, k);
    for (std::size_t i = 0; i < n; ++i) {
        double norm = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            const double v = emb.eigenvectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (std::size_t c = 0; c < k; ++c) {
            const double v = emb.eigenvectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
            rows(i, c) = norm > 0.0 ? v / norm : 0.0;
        }
    }
    return kmeans(rows, k, seed);
}

inline Partition spectral_cluster(const ConsensusMatrix& mc, std::size_t k, std::uint64_t seed) {
    return spectral_cluster(mc.values, k, seed);
}

} // namespace kgraph
