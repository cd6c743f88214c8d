#ifndef CADMM_RNG_HPP
#define CADMM_RNG_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace cadmm {

/// splitmix64 step; used to derive independent sub-seeds from a base seed so
/// that Monte Carlo trials and per-run helper streams never share state.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a) {
    return mix_seed(base ^ mix_seed(a));
}

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    return mix_seed(mix_seed(base, a), b);
}

/// Deterministic RNG. Wraps mt19937_64 but converts to doubles by hand so the
/// byte-exact stream does not depend on the standard library's distribution
/// implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform direction on the unit sphere in R^d (rejection from the cube).
    Eigen::VectorXd unit_vector(int dim) {
        while (true) {
            Eigen::VectorXd v(dim);
            for (int i = 0; i < dim; ++i) v(i) = uniform(-1.0, 1.0);
            const double n = v.norm();
            if (n > 1e-3 && n <= 1.0) return v / n;
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace cadmm

#endif  // CADMM_RNG_HPP
