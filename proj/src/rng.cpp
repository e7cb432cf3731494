#include "pmgc/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pmgc {

double SeededRng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double SeededRng::normal(double mean, double stddev) {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    const double u2 = uniform();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return mean + stddev * z;
}

std::uint64_t seed_for(std::uint64_t base_seed, std::string_view stream_name) {
    std::uint64_t h = 14695981039346656037ull;  // FNV-1a offset basis
    for (char c : stream_name) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    h ^= base_seed + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
}

Matrix2D seeded_init(std::uint64_t seed, int rows, int cols, InitScheme scheme) {
    if (rows <= 0 || cols <= 0)
        throw std::invalid_argument("seeded_init: invalid shape " + std::to_string(rows) + "x" +
                                    std::to_string(cols));
    SeededRng rng(seed);
    Matrix2D m(rows, cols);
    switch (scheme) {
        case InitScheme::GlorotUniform: {
            const double bound = std::sqrt(6.0 / (rows + cols));
            for (double& v : m.data) v = rng.uniform(-bound, bound);
            break;
        }
        case InitScheme::Gaussian: {
            for (double& v : m.data) v = rng.normal(0.0, 0.1);
            break;
        }
    }
    return m;
}

}  // namespace pmgc
