#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace sidalign {

// Deterministic random source. mt19937_64's bit stream is pinned by the
// standard; the distribution transforms are hand-rolled because the
// std::*_distribution adapters are implementation-defined and would break
// seed reproducibility across standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53 bits of mantissa.
    double next_double() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // Uniform in (0, 1]; safe to feed into log().
    double next_double_open() {
        return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Uniform integer in [0, n); n stays far below 2^32 here.
    std::uint64_t next_below(std::uint64_t n) { return gen_() % n; }

    // Standard normal via Box-Muller.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_double_open();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    double next_exponential() { return -std::log(next_double_open()); }

    // Symmetric Dirichlet(1,...,1) over k components.
    std::vector<double> next_dirichlet(std::size_t k) {
        std::vector<double> w(k);
        double sum = 0.0;
        for (auto& v : w) {
            v = next_exponential();
            sum += v;
        }
        for (auto& v : w) v /= sum;
        return w;
    }

    // In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& xs) {
        for (std::size_t i = xs.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(xs[i - 1], xs[j]);
        }
    }

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// splitmix64; used to derive independent per-item seeds from a master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace sidalign
