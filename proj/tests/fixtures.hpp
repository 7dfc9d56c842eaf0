#pragma once

// Synthetic datasets and independent oracles shared by the test suites.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "kgraph/clustering.hpp"
#include "kgraph/random.hpp"
#include "kgraph/timeseries.hpp"

namespace kgraph::fixtures {

/// `per_class` noisy sines then `per_class` noisy squares (sign of a sine),
/// period 32, phase uniform in [0, phase_range), additive Gaussian noise `sigma`.
inline Dataset sine_square(std::size_t per_class = 20, std::size_t n = 128, double sigma = 0.1,
                           std::uint64_t seed = 7, double phase_range = 2.0 * std::numbers::pi) {
    Rng rng(seed);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int cls = 0; cls < 2; ++cls) {
        for (std::size_t s = 0; s < per_class; ++s) {
            const double phase = uniform01(rng) * phase_range;
            std::vector<double> v(n);
            for (std::size_t t = 0; t < n; ++t) {
                const double w = std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 32.0 + phase);
                v[t] = (cls == 0 ? w : (w >= 0.0 ? 1.0 : -1.0)) + sigma * normal01(rng);
            }
            rows.push_back(std::move(v));
            labels.push_back(cls);
        }
    }
    return make_dataset(std::move(rows), std::move(labels), "sine_square");
}

/// Three classes sharing a low-amplitude noise background; each class carries
/// its own motif (sine period, square pulse, sawtooth ramp) repeated along the series.
inline Dataset private_motifs(std::size_t per_class = 15, std::size_t n = 160, std::uint64_t seed = 11) {
    Rng rng(seed);
    constexpr std::size_t motif_len = 24;
    auto motif = [](int cls, std::size_t t) {
        const double u = static_cast<double>(t) / static_cast<double>(motif_len);
        switch (cls) {
        case 0: return std::sin(2.0 * std::numbers::pi * u);
        case 1: return u < 0.5 ? 1.0 : -1.0;
        default: return 2.0 * u - 1.0;
        }
    };
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int cls = 0; cls < 3; ++cls) {
        for (std::size_t s = 0; s < per_class; ++s) {
            std::vector<double> v(n);
            for (auto& x : v) x = 0.05 * normal01(rng);
            // Motif copies separated by short noise gaps at a random offset.
            std::size_t pos = uniform_index(rng, 16);
            while (pos + motif_len <= n) {
                for (std::size_t t = 0; t < motif_len; ++t) v[pos + t] += motif(cls, t);
                pos += motif_len + 8 + uniform_index(rng, 16);
            }
            rows.push_back(std::move(v));
            labels.push_back(cls);
        }
    }
    return make_dataset(std::move(rows), std::move(labels), "private_motifs");
}

/// Gaussian blobs in `dim` dimensions, `per_blob` points each, centers `spread` apart along axis 0.
inline Matrix blobs(std::size_t n_blobs, std::size_t per_blob, std::size_t dim, double spread, std::uint64_t seed,
                    std::vector<int>* truth = nullptr) {
    Rng rng(seed);
    Matrix x(n_blobs * per_blob, dim);
    for (std::size_t b = 0; b < n_blobs; ++b) {
        for (std::size_t p = 0; p < per_blob; ++p) {
            auto row = x.row(b * per_blob + p);
            for (std::size_t d = 0; d < dim; ++d) row[d] = normal01(rng) + (d == 0 ? spread * static_cast<double>(b) : 0.0);
            if (truth) truth->push_back(static_cast<int>(b));
        }
    }
    return x;
}

/// Random labels in [0, k).
inline std::vector<int> random_labels(Rng& rng, std::size_t n, std::size_t k) {
    std::vector<int> out(n);
    for (auto& l : out) l = static_cast<int>(uniform_index(rng, k));
    return out;
}

/// ARI from the four pair-agreement counts, O(n^2).
inline double ari_pair_oracle(const std::vector<int>& a, const std::vector<int>& b) {
    double both = 0, only_a = 0, only_b = 0, neither = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const bool sa = a[i] == a[j];
            const bool sb = b[i] == b[j];
            if (sa && sb) ++both;
            else if (sa) ++only_a;
            else if (sb) ++only_b;
            else ++neither;
        }
    }
    const double den = (both + only_a) * (only_a + neither) + (both + only_b) * (only_b + neither);
    if (den == 0.0) return 1.0;
    return 2.0 * (both * neither - only_a * only_b) / den;
}

/// Fraction of concordant pairs, O(n^2).
inline double rand_index_oracle(const std::vector<int>& a, const std::vector<int>& b) {
    double agree = 0, total = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            agree += ((a[i] == a[j]) == (b[i] == b[j])) ? 1 : 0;
            ++total;
        }
    }
    return agree / total;
}

#ifdef KGRAPH_TEST_TMP
/// Fresh empty directory under the test build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::path(KGRAPH_TEST_TMP) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}
#endif

} // namespace kgraph::fixtures
