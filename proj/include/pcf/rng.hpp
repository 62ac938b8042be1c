#ifndef PCF_RNG_HPP
#define PCF_RNG_HPP

#include <cstdint>
#include <cmath>

namespace pcf {

// Fixed-algorithm RNG so seeded runs reproduce bit-identically across
// platforms and standard libraries (std::normal_distribution is
// implementation-defined).
struct SplitMix64 {
    uint64_t state;
    explicit SplitMix64(uint64_t seed) : state(seed) {}
    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    // Box-Muller
    void gauss(double& a, double& b) {
        double u1 = u01();
        while (u1 <= 0.0) u1 = u01();
        const double u2 = u01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        a = r * std::cos(2.0 * M_PI * u2);
        b = r * std::sin(2.0 * M_PI * u2);
    }
};

} // namespace pcf

#endif
