#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "gkpsim/errors.hpp"
#include "gkpsim/grid.hpp"
#include "gkpsim/rng.hpp"

namespace gkpsim {

// Centered modulus: x - round(x/m) m, in [-m/2, m/2).
inline double centered_mod(double x, double m) { return x - std::lround(x / m) * m; }

inline double gauss_pdf(double x, double sigma) {
    return std::exp(-x * x / (2.0 * sigma * sigma)) / (sigma * kSqrt2Pi);
}

inline double gauss_cdf(double x, double sigma) {
    return 0.5 * std::erfc(-x / (sigma * std::sqrt(2.0)));
}

// Classical random-shift model of repeated error correction: each round adds
// a fresh position shift of width sigma0, measures the accumulated shift
// through noisy modular readout (measurement noise also sigma0), and applies
// the centered syndrome as correction.
struct ShiftTrajectory {
    double sigma0 = 0.0;
    std::vector<double> syndromes;       // s_m
    std::vector<int> prefix_parity;      // logical error indicator after round m
    double final_residual = 0.0;
};

inline ShiftTrajectory simulate_stochastic(double sigma0, int rounds, Rng& rng) {
    if (!(sigma0 > 0.0)) throw ConfigError("sigma0 must be positive");
    if (rounds < 1) throw ConfigError("rounds must be at least 1");
    ShiftTrajectory t;
    t.sigma0 = sigma0;
    double e = 0.0;
    for (int m = 0; m < rounds; ++m) {
        e += rng.normal(sigma0);
        const double eta = rng.normal(sigma0);
        const double s = centered_mod(e + eta, kSqrtPi);
        e -= s;
        t.syndromes.push_back(s);
        t.prefix_parity.push_back(
            static_cast<int>(((std::lround(e / kSqrtPi) % 2) + 2) % 2));
    }
    t.final_residual = e;
    return t;
}

struct CosetDecision {
    int flip = 0;
    double odd_posterior = 0.0;
};

namespace detail {

// Posterior odd-coset masses after each prefix of the syndrome sequence,
// propagated over a density grid for the uncorrected accumulated shift E.
// The applied corrections C are classical knowns folded into the likelihood
// and the coset question, never into the density itself.
inline std::vector<CosetDecision> coset_dp(const std::vector<double>& syndromes,
                                           double sigma0) {
    const int rounds = static_cast<int>(syndromes.size());
    if (rounds < 1) throw ConfigError("need at least one syndrome");
    if (!(sigma0 > 0.0)) throw ConfigError("sigma0 must be positive");
    const int n = 2048;
    const double half = 6.0 * sigma0 * std::sqrt(static_cast<double>(rounds)) + 2.0 * kSqrtPi;
    const double de = 2.0 * half / (n - 1);
    std::vector<double> xs(n), dens(n);
    for (int i = 0; i < n; ++i) {
        xs[i] = -half + de * i;
        dens[i] = gauss_pdf(xs[i], sigma0);
    }
    const int k_half = static_cast<int>(std::ceil(8.0 * sigma0 / de));
    std::vector<double> ker(2 * k_half + 1);
    for (int j = -k_half; j <= k_half; ++j) ker[j + k_half] = gauss_pdf(j * de, sigma0) * de;

    std::vector<CosetDecision> out;
    std::vector<double> next(n);
    double corr = 0.0;
    for (int m = 0; m < rounds; ++m) {
        if (m > 0) {
            for (int i = 0; i < n; ++i) {
                double acc = 0.0;
                for (int j = -k_half; j <= k_half; ++j) {
                    const int src = i - j;
                    if (src < 0 || src >= n) continue;
                    acc += dens[src] * ker[j + k_half];
                }
                next[i] = acc;
            }
            dens.swap(next);
        }
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            double like = 0.0;
            for (int j = -6; j <= 6; ++j)
                like += gauss_pdf(syndromes[m] + j * kSqrtPi - xs[i] - corr, sigma0);
            dens[i] *= like;
            total += dens[i];
        }
        total *= de;
        if (!(total > 1e-280)) throw NumericalError("stochastic posterior vanished");
        for (auto& v : dens) v /= total;
        corr -= syndromes[m];
        double odd = 0.0;
        for (int i = 0; i < n; ++i) {
            const long r = std::lround((xs[i] + corr) / kSqrtPi);
            if (((r % 2) + 2) % 2 == 1) odd += dens[i];
        }
        odd *= de;
        out.push_back({odd > 0.5 ? 1 : 0, odd});
    }
    return out;
}

}  // namespace detail

// Maximum-likelihood coset decision from the full syndrome sequence.
inline CosetDecision ml_coset_decode(const std::vector<double>& syndromes, double sigma0) {
    return detail::coset_dp(syndromes, sigma0).back();
}

// Decision the ML decoder would have announced after each round.
inline std::vector<CosetDecision> ml_coset_decode_prefixes(const std::vector<double>& syndromes,
                                                           double sigma0) {
    return detail::coset_dp(syndromes, sigma0);
}

// Parity of the summed corrections, the memoryless baseline.
inline int naive_parity_decode(const std::vector<double>& syndromes) {
    double s = 0.0;
    for (double v : syndromes) s += v;
    return static_cast<int>(((std::lround(s / kSqrtPi) % 2) + 2) % 2);
}

// One-round residual-shift density f(e' | previous residual x): the comb of
// measurement-noise Gaussians gated by the probability that the syndrome
// rounds to the matching lattice cell.
inline double residual_density_reference(double e_prime, double x_prev, double sigma0) {
    double comb = 0.0;
    for (int k = -8; k <= 8; ++k) comb += gauss_pdf(e_prime - k * kSqrtPi, sigma0);
    const double gate = gauss_cdf(e_prime - x_prev + kSqrtPi / 2.0, sigma0) -
                        gauss_cdf(e_prime - x_prev - kSqrtPi / 2.0, sigma0);
    return comb * gate;
}

// Marginal residual density after `rounds` rounds, by iterating the
// one-round kernel on a grid (transfer-matrix propagation).
inline std::pair<std::vector<double>, std::vector<double>> residual_marginal_dp(
    double sigma0, int rounds, int n = 1024) {
    if (rounds < 1) throw ConfigError("rounds must be at least 1");
    const double half = kSqrtPi + 8.0 * sigma0;
    const double dx = 2.0 * half / (n - 1);
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) xs[i] = -half + dx * i;
    std::vector<double> dens(n);
    for (int i = 0; i < n; ++i) dens[i] = residual_density_reference(xs[i], 0.0, sigma0);
    for (int m = 1; m < rounds; ++m) {
        std::vector<double> next(n, 0.0);
        for (int i = 0; i < n; ++i) {
            if (dens[i] == 0.0) continue;
            for (int j = 0; j < n; ++j)
                next[j] += residual_density_reference(xs[j], xs[i], sigma0) * dens[i] * dx;
        }
        dens.swap(next);
    }
    double mass = 0.0;
    for (double v : dens) mass += v;
    mass *= dx;
    for (auto& v : dens) v /= mass;
    return {xs, dens};
}

}  // namespace gkpsim
