#include "kpa/rng.hpp"

#include <unordered_set>

namespace kpa {

std::vector<size_t> Rng::sample_indices(size_t n, size_t k) {
    std::vector<size_t> out;
    out.reserve(k);
    if (k >= n) {
        out.resize(n);
        for (size_t i = 0; i < n; ++i) out[i] = i;
        shuffle(out);
        return out;
    }
    std::unordered_set<size_t> seen;
    while (out.size() < k) {
        size_t idx = static_cast<size_t>(below(n));
        if (seen.insert(idx).second) out.push_back(idx);
    }
    return out;
}

}  // namespace kpa
