#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace luvli {

// Deterministic random stream. All sampling in the library goes through this
// wrapper so that a given seed produces bit-identical output on every platform
// (std::mt19937_64 has a fully specified sequence; the distributions here are
// hand-rolled because the standard library ones are not portable).
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on (0, 1]. Never returns 0, so log(uniform()) is always finite.
    double uniform() {
        const std::uint64_t bits = engine_() >> 11;  // top 53 bits
        return 1.0 - static_cast<double>(bits) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller. Draws two uniforms per pair.
    void normal_pair(double& z1, double& z2) {
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * kPi * u2;
        z1 = r * std::cos(t);
        z2 = r * std::sin(t);
    }

    double normal() {
        double z1, z2;
        normal_pair(z1, z2);
        return z1;
    }

    // Derives an independent stream. Mixing the drawn word through a
    // splitmix64 round decorrelates the child from the parent sequence.
    RngStream split() {
        std::uint64_t z = engine_() + 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return RngStream(z ^ (z >> 31));
    }

private:
    static constexpr double kPi = 3.14159265358979323846;
    std::mt19937_64 engine_;
};

}  // namespace luvli
