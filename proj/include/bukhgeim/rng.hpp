#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace bukhgeim {

/// Deterministic RNG: mt19937_64 with explicit uniform/normal mappings so
/// streams are identical across platforms and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() {  // [0,1)
        return (eng_() >> 11) * (1.0 / 9007199254740992.0);
    }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    /// Box-Muller, one value per call (second value discarded for stream clarity)
    double normal() {
        double u1 = 0.0;
        do { u1 = uniform(); } while (u1 <= 0.0);
        double u2 = uniform();
        const double two_pi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }
    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

/// Derive a stream seed from a master seed and a label (splitmix-style mixing).
std::uint64_t derive_seed(std::uint64_t master, const std::string& label);

/// FNV-1a 64-bit hash of a byte string, as lowercase hex.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace bukhgeim
