#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace bif {

// Deterministic random stream used everywhere in the library.
// All draw paths go through this class so that a run is reproducible
// from its seed and so tests can count how often the stream is touched.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // U(0,1), open at both ends.
    double uniform() {
        ++draws_;
        // 53-bit mantissa, shifted away from exact 0.
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // N(0,1) via polar Box-Muller; caches the spare deviate.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        ++draws_;
        // Rejection-free modulo is fine here; n is tiny next to 2^64.
        return eng_() % n;
    }

    std::uint64_t draw_count() const { return draws_; }

    // Independent child stream, for parallel or per-instance use.
    Rng fork(std::uint64_t salt) {
        ++draws_;
        return Rng(eng_() ^ (salt * 0x9e3779b97f4a7c15ULL));
    }

private:
    std::mt19937_64 eng_;
    std::uint64_t draws_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace bif
