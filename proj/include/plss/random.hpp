#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace plss {

/// Counter-mode generator: the SplitMix64 finalizer applied to a Weyl
/// sequence derived from the seed. The i-th draw for a given seed is the
/// same on every platform, which std::normal_distribution does not promise.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = seed_ + 0x9e3779b97f4a7c15ULL * ++counter_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in (0, 1); never returns 0, so log() below is safe.
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via the Box-Muller transform; the paired variate is
    /// cached and returned by the following call.
    double next_normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        cached_ = radius * std::sin(angle);
        has_cached_ = true;
        return radius * std::cos(angle);
    }

    /// Uniform index in [0, n).
    std::size_t next_index(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

/// Fixed discrete distribution sampled by inverse CDF.
class DiscreteSampler {
public:
    static DiscreteSampler uniform(std::size_t n) {
        if (n == 0) throw std::invalid_argument("cannot sample from an empty range");
        DiscreteSampler s;
        s.n_ = n;
        return s;
    }

    static DiscreteSampler weighted(std::span<const double> weights) {
        DiscreteSampler s;
        s.n_ = weights.size();
        s.cumulative_.resize(weights.size());
        double total = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] < 0.0)
                throw std::invalid_argument("negative sampling weight");
            total += weights[i];
            s.cumulative_[i] = total;
        }
        if (!(total > 0.0)) throw std::invalid_argument("all sampling weights are zero");
        return s;
    }

    std::size_t sample(CounterRng& rng) const {
        if (cumulative_.empty()) return rng.next_index(n_);
        const double target = rng.next_uniform() * cumulative_.back();
        const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), target);
        return static_cast<std::size_t>(it - cumulative_.begin());
    }

    std::size_t size() const { return n_; }

private:
    DiscreteSampler() = default;
    std::size_t n_ = 0;
    std::vector<double> cumulative_;
};

}  // namespace plss
