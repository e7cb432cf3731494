#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "pmgc/matrix.hpp"

namespace pmgc {

// Deterministic RNG with a fully pinned algorithm so runs reproduce across
// platforms. Engine is std::mt19937_64 (bit-exact by the standard); the
// distributions are hand-rolled here because the std:: ones are
// implementation-defined:
//   uniform():  (x >> 11) * 2^-53                      -> [0, 1)
//   normal():   Box-Muller, z = sqrt(-2 ln(1-u1)) * cos(2 pi u2), no spare cache
//   shuffle():  Fisher-Yates with index draw next_u64() % (i+1)
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    double uniform();                          // [0, 1)
    double uniform(double lo, double hi);      // [lo, hi)
    double normal(double mean, double stddev);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(next_u64() % i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// Stable per-stream sub-seed: FNV-1a over the stream name, mixed into the base
// seed. Used to give every parameter matrix its own RNG stream.
std::uint64_t seed_for(std::uint64_t base_seed, std::string_view stream_name);

enum class InitScheme {
    GlorotUniform,  // U(-b, b), b = sqrt(6 / (rows + cols))
    Gaussian,       // N(0, 0.1)
};

// Deterministic given (seed, shape, scheme). Throws std::invalid_argument on
// a zero or negative dimension.
Matrix2D seeded_init(std::uint64_t seed, int rows, int cols, InitScheme scheme);

}  // namespace pmgc
