#include "bif/dataset.hpp"

#include <cstring>

namespace bif {

std::uint64_t dataset_fingerprint(const Dataset& d) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 0x100000001b3ULL;
        }
    };
    const std::uint64_t dim = d.dim, tc = d.train_count;
    mix(&dim, sizeof dim);
    mix(&tc, sizeof tc);
    mix(d.features.data(), d.features.size() * sizeof(double));
    mix(d.labels.data(), d.labels.size() * sizeof(int));
    return h;
}

}  // namespace bif
