#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gkpsim {

// Deterministic random stream for one trajectory.
//
// Every trajectory draws from its own generator seeded with
// (master_seed, stream_index), so results do not depend on how trajectories
// are distributed over worker threads. Gaussian variates use an explicit
// Box-Muller transform instead of std::normal_distribution, whose output
// sequence is implementation defined.
class Rng {
  public:
    Rng(std::uint64_t master_seed, std::uint64_t stream_index) {
        std::seed_seq seq{static_cast<std::uint32_t>(master_seed & 0xffffffffu),
                          static_cast<std::uint32_t>(master_seed >> 32),
                          static_cast<std::uint32_t>(stream_index & 0xffffffffu),
                          static_cast<std::uint32_t>(stream_index >> 32)};
        eng_.seed(seq);
    }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Standard normal (sigma = 1).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double sigma) { return sigma * normal(); }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace gkpsim
