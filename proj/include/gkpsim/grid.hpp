#pragma once

#include <cmath>
#include <string>

#include "gkpsim/errors.hpp"

namespace gkpsim {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrtPi = 1.7724538509055160273;
inline constexpr double kSqrt2Pi = 2.5066282746310005024;

// Uniform position grid q_i = -L + i h, i = 0..N-1, h = 2L/N.
//
// The matching momentum axis follows DFT frequency ordering:
// k_j = 2 pi j / (N h) for j < N/2 and 2 pi (j - N) / (N h) otherwise.
struct GridSpec {
    double half_width = 0.0;  // L
    int points = 0;           // N, power of two

    double spacing() const { return 2.0 * half_width / points; }
    double q(int i) const { return -half_width + spacing() * i; }
    double k(int j) const {
        const int jj = (j < points / 2) ? j : j - points;
        return 2.0 * kPi * jj / (points * spacing());
    }
    double dk() const { return 2.0 * kPi / (points * spacing()); }

    bool operator==(const GridSpec& o) const {
        return half_width == o.half_width && points == o.points;
    }

    void validate() const {
        if (!(half_width > 0.0)) throw ConfigError("grid half_width must be positive");
        if (points < 2 || (points & (points - 1)) != 0)
            throw ConfigError("grid points must be a power of two >= 2");
    }

    // Enforce resolution and extent bounds for states with squeezing delta.
    void validate_for(double delta) const {
        validate();
        if (spacing() > delta / 8.0 + 1e-15)
            throw GridError("grid-too-coarse: need h <= delta/8, got h=" +
                            std::to_string(spacing()) + " for delta=" + std::to_string(delta));
        if (half_width < 8.0 * kSqrtPi - 1e-12)
            throw GridError("grid half_width below 8 sqrt(pi)");
    }

    // Historic default window. For delta <= 0.3 the envelope of a grid state
    // no longer decays below 1e-8 at |q| = 10 sqrt(pi); prefer suggest().
    static GridSpec standard() { return GridSpec{10.0 * kSqrtPi, 4096}; }

    // Window wide enough that comb envelopes decay past the working
    // precision of the preparation routines, with h <= delta/8.
    static GridSpec suggest(double delta, double factor = 3.75, int min_points = 4096) {
        if (!(delta > 0.0) || !(delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
        const double cells = std::max(8.0, std::ceil(factor / delta));
        GridSpec g{kSqrtPi * cells, min_points};
        while (g.spacing() > delta / 8.0) g.points *= 2;
        return g;
    }

    // Wider window used by the error-correction loop, where feedback-free
    // trajectories random-walk the envelope center by several sqrt(pi).
    static GridSpec for_ec(double delta) { return suggest(delta, 7.0); }
};

}  // namespace gkpsim
