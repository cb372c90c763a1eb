#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "gkpsim/errors.hpp"
#include "gkpsim/grid.hpp"

namespace gkpsim {

enum class StateKind { gkp0, gkp1, sensor };

inline const char* to_string(StateKind k) {
    switch (k) {
        case StateKind::gkp0: return "gkp0";
        case StateKind::gkp1: return "gkp1";
        default: return "sensor";
    }
}

// Number-basis expansion of a damped comb state. coeffs[n] already includes
// the overall normalization; tail_mass is the weight sitting above n_max.
struct FockExpansion {
    std::vector<double> coeffs;
    double delta = 0.0;
    StateKind state_kind = StateKind::gkp0;
    double tail_mass = 0.0;
    int n_max = 0;
};

// Harmonic-oscillator eigenfunctions psi_n(q) for n = 0..n_max at one point.
//
// The three-term recurrence runs on Gaussian-weighted values with a shared
// log-scale offset so intermediate terms can exceed the double range (the
// bare weighted values underflow long before the polynomial growth matters).
inline std::vector<double> hermite_psi_ladder(int n_max, double q) {
    if (n_max < 0) throw ConfigError("hermite ladder needs n_max >= 0");
    std::vector<double> out(static_cast<std::size_t>(n_max) + 1, 0.0);
    double logscale = -0.25 * std::log(kPi) - 0.5 * q * q;
    double hm2 = 0.0;
    double hm1 = 1.0;
    out[0] = hm1 * std::exp(logscale);
    constexpr double kRescale = 1e250;
    for (int n = 1; n <= n_max; ++n) {
        const double h = std::sqrt(2.0 / n) * q * hm1 - std::sqrt((n - 1.0) / n) * hm2;
        hm2 = hm1;
        hm1 = h;
        if (std::abs(hm1) > kRescale) {
            hm1 /= kRescale;
            hm2 /= kRescale;
            logscale += std::log(kRescale);
        }
        out[n] = hm1 * std::exp(logscale);
    }
    return out;
}

inline double hermite_psi(int n, double q) { return hermite_psi_ladder(n, q).back(); }

// Lattice sum theta[a; b](0, ix) = sum_k exp(-pi x (k+a)^2) cos(2 pi (k+a) b).
inline double theta(double a, double b, double x) {
    if (!(x > 0.0)) throw ConfigError("theta requires a positive lattice parameter");
    // exp(-pi x K^2) < 1e-18 once pi x K^2 > 42.
    const int reach = static_cast<int>(std::ceil(std::sqrt(42.0 / (kPi * x)) + std::abs(a))) + 2;
    double s = 0.0;
    for (int k = -reach; k <= reach; ++k) {
        const double v = k + a;
        s += std::exp(-kPi * x * v * v) * std::cos(2.0 * kPi * v * b);
    }
    return s;
}

inline double theta3(double x) { return theta(0.0, 0.0, x); }

// Normalization sum_n exp(-2 delta^2 n) (sum_k psi_n(x_k))^2 for the damped
// codeword comb x_k = (2k + j) sqrt(pi), written as a product of two theta
// functions plus its half-integer companion.
inline double gkp_normalization(double delta, int j) {
    if (!(delta > 0.0) || !(delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
    if (j != 0 && j != 1) throw ConfigError("logical index must be 0 or 1");
    const double u = std::exp(-2.0 * delta * delta);
    const double sig2 = std::tanh(delta * delta) / 2.0;
    const double a1 = j / 2.0;
    const double a2 = (j + 1) / 2.0;
    const double term1 = theta(a1, 0.0, 8.0 * sig2) * theta(0.0, 0.0, sig2 / 2.0);
    const double term2 = theta(a2, 0.0, 8.0 * sig2) * theta(0.0, 0.5, sig2 / 2.0);
    return (term1 + term2) / (2.0 * kSqrtPi * (1.0 + u));
}

namespace detail {

// Direct two-dimensional lattice quadrature of the same normalization via the
// Mehler kernel. pitch_sq is the squared comb pitch divided by pi (4 for the
// codeword comb 2 sqrt(pi), 2 for the sensor comb sqrt(2 pi)).
inline double normalization_riemann(double delta, double offset, double pitch_sq) {
    const double u = std::exp(-2.0 * delta * delta);
    const double pref = pitch_sq / (2.0 * (1.0 - u * u));
    // Smallest decay direction is v1 = v2: quadratic coefficient
    // pi*pref*2*(1-u)^2 = pi*pitch_sq*(1-u)/(1+u).
    const double lam = kPi * pitch_sq * (1.0 - u) / (1.0 + u);
    const int reach = static_cast<int>(std::ceil(std::sqrt(90.0 / lam))) + 3;
    double s = 0.0;
    for (int k1 = -reach; k1 <= reach; ++k1) {
        const double v1 = k1 + offset;
        for (int k2 = -reach; k2 <= reach; ++k2) {
            const double v2 = k2 + offset;
            const double expo =
                -kPi * pref * ((1.0 + u * u) * (v1 * v1 + v2 * v2) - 4.0 * u * v1 * v2);
            s += std::exp(expo);
        }
    }
    return s / std::sqrt(kPi * (1.0 - u * u));
}

}  // namespace detail

inline double gkp_normalization_riemann(double delta, int j) {
    if (j != 0 && j != 1) throw ConfigError("logical index must be 0 or 1");
    return detail::normalization_riemann(delta, j / 2.0, 4.0);
}

inline double sensor_normalization(double delta) {
    return detail::normalization_riemann(delta, 0.0, 2.0);
}

namespace detail {

// Unnormalized coefficients exp(-delta^2 n) sum_k psi_n(x_k) with the comb
// sum for level n truncated at |x_k| <= 2 sqrt(n) + 5. Odd levels vanish by
// the q -> -q symmetry of every comb handled here and are pinned to zero.
// The sensor comb has the self-dual pitch sqrt(2 pi), so its sum also
// vanishes on n = 2 mod 4 (Fourier eigenvalue i^n must be +1); those levels
// are pinned too, since the float sum only cancels to rounding.
inline std::vector<double> fock_coeffs_raw(double delta, StateKind kind, int n_max) {
    const double pitch = (kind == StateKind::sensor) ? std::sqrt(2.0 * kPi) : 2.0 * kSqrtPi;
    const double offset = (kind == StateKind::gkp1) ? kSqrtPi : 0.0;
    std::vector<double> raw(static_cast<std::size_t>(n_max) + 1, 0.0);
    const double x_reach = 2.0 * std::sqrt(static_cast<double>(n_max)) + 5.0;
    const int k_reach = static_cast<int>(std::floor((x_reach - offset) / pitch)) + 1;
    for (int k = -k_reach; k <= k_reach; ++k) {
        const double x = pitch * k + offset;
        if (std::abs(x) > x_reach) continue;
        const double margin = std::max(std::abs(x) - 5.0, 0.0);
        const int n_min = static_cast<int>(std::ceil(margin * margin / 4.0));
        const auto ladder = hermite_psi_ladder(n_max, x);
        for (int n = n_min; n <= n_max; ++n) raw[n] += ladder[n];
    }
    for (int n = 0; n <= n_max; ++n) {
        const bool forbidden =
            (n % 2 == 1) || (kind == StateKind::sensor && n % 4 != 0);
        if (forbidden) raw[n] = 0.0;
        raw[n] *= std::exp(-delta * delta * n);
    }
    return raw;
}

}  // namespace detail

inline int default_fock_cutoff(double delta) {
    return 4 * static_cast<int>(std::ceil(1.0 / (delta * delta))) + 100;
}

inline FockExpansion fock_coeffs(double delta, StateKind kind, int n_max = -1) {
    if (!(delta > 0.0) || !(delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
    if (n_max < 0) n_max = default_fock_cutoff(delta);
    if (n_max < 4.0 / (delta * delta))
        throw ConfigError("fock cutoff must be at least 4/delta^2");
    const double norm = (kind == StateKind::sensor)
                            ? sensor_normalization(delta)
                            : gkp_normalization(delta, kind == StateKind::gkp1 ? 1 : 0);
    FockExpansion out;
    out.delta = delta;
    out.state_kind = kind;
    out.n_max = n_max;
    out.coeffs = detail::fock_coeffs_raw(delta, kind, n_max);
    const double inv = 1.0 / std::sqrt(norm);
    double captured = 0.0;
    for (auto& c : out.coeffs) {
        c *= inv;
        captured += c * c;
    }
    out.tail_mass = 1.0 - captured;
    if (out.tail_mass > 1e-4)
        throw NumericalError("fock cutoff too small: tail mass " + std::to_string(out.tail_mass));
    return out;
}

// Mean occupation of the thermal envelope the photon distribution relaxes
// toward, nbar = u/(1-u) with u = exp(-2 delta^2).
inline double thermal_asymptote(double delta) {
    const double u = std::exp(-2.0 * delta * delta);
    return u / (1.0 - u);
}

inline double thermal_pn(double delta, int n) {
    const double u = std::exp(-2.0 * delta * delta);
    return (1.0 - u) * std::pow(u, n);
}

// Photon-number distribution left after full phase diffusion.
inline std::vector<double> dephased_distribution(const FockExpansion& e) {
    std::vector<double> p(e.coeffs.size());
    for (std::size_t n = 0; n < e.coeffs.size(); ++n) p[n] = e.coeffs[n] * e.coeffs[n];
    return p;
}

// Ratio of state weight to thermal weight inside a window around n0.
inline double thermal_window_ratio(const FockExpansion& e, int n0, int half_width = 10) {
    double num = 0.0, den = 0.0;
    for (int n = std::max(0, n0 - half_width); n <= n0 + half_width; ++n) {
        if (n < static_cast<int>(e.coeffs.size())) num += e.coeffs[n] * e.coeffs[n];
        den += thermal_pn(e.delta, n);
    }
    if (den <= 0.0) throw NumericalError("empty thermal window");
    return num / den;
}

struct RomikSign {
    int sign = 0;
    bool indeterminate = false;
};

// Sign of the sensor-comb coefficient at level 4n from the closed-form
// Gaussian lattice sum sum_z exp(-pi|z|^2/2) z^{4n} (-1)^{Re z Im z} over
// z = t + is. Terms are accumulated against the largest log magnitude so the
// result is a pure sign query; a cancellation below 1e-12 of the leading
// term is reported as indeterminate rather than guessed.
inline RomikSign romik_sign(int n) {
    if (n < 0 || n > 40) throw ConfigError("romik sign implemented for 0 <= n <= 40");
    const int reach = static_cast<int>(std::ceil(2.0 * std::sqrt(4.0 * n))) + 10;
    double max_log = -1e300;
    for (int pass = 0; pass < 2; ++pass) {
        double acc = 0.0;
        for (int t = -reach; t <= reach; ++t) {
            for (int s = -reach; s <= reach; ++s) {
                if (t == 0 && s == 0) {
                    if (n == 0) {
                        if (pass == 0)
                            max_log = std::max(max_log, 0.0);
                        else
                            acc += std::exp(0.0 - max_log);
                    }
                    continue;
                }
                const double r2 = static_cast<double>(t) * t + static_cast<double>(s) * s;
                const double logm = -kPi * r2 / 2.0 + 2.0 * n * std::log(r2);
                if (pass == 0) {
                    max_log = std::max(max_log, logm);
                } else {
                    const double phase = 4.0 * n * std::atan2(static_cast<double>(s),
                                                              static_cast<double>(t));
                    double val = std::exp(logm - max_log) * std::cos(phase);
                    if ((static_cast<long long>(t) * s) % 2 != 0) val = -val;
                    acc += val;
                }
            }
        }
        if (pass == 1) {
            RomikSign out;
            if (std::abs(acc) < 1e-12) {
                out.indeterminate = true;
            } else {
                out.sign = acc > 0.0 ? 1 : -1;
            }
            return out;
        }
    }
    return {};
}

inline void write_fock_csv(const FockExpansion& e, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open " + path);
    char buf[160];
    std::snprintf(buf, sizeof buf, "# gkpsim fock v1, delta=%.17g, kind=%s, n_max=%d\n",
                  e.delta, to_string(e.state_kind), e.n_max);
    f << buf << "n,c_n,c_n_squared,thermal_pn\n";
    for (std::size_t n = 0; n < e.coeffs.size(); ++n) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", n, e.coeffs[n],
                      e.coeffs[n] * e.coeffs[n], thermal_pn(e.delta, static_cast<int>(n)));
        f << buf;
    }
}

}  // namespace gkpsim
