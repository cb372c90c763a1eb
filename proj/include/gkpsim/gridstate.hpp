#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gkpsim/errors.hpp"
#include "gkpsim/fft.hpp"
#include "gkpsim/fockrep.hpp"
#include "gkpsim/grid.hpp"

namespace gkpsim {

enum class Kind { E, D, F, FV };
enum class Logical { zero, one, plus, minus };

inline const char* to_string(Kind k) {
    switch (k) {
        case Kind::E: return "E";
        case Kind::D: return "D";
        case Kind::F: return "F";
        default: return "FV";
    }
}

inline const char* to_string(Logical l) {
    switch (l) {
        case Logical::zero: return "zero";
        case Logical::one: return "one";
        case Logical::plus: return "plus";
        default: return "minus";
    }
}

struct GkpApprox {
    Kind kind = Kind::F;
    double delta = 0.3;
    Logical logical = Logical::zero;
};

struct WaveFunction {
    GridSpec grid;
    std::vector<std::complex<double>> amp;
    bool normalized = false;
};

inline double norm_squared(const WaveFunction& psi) {
    double s = 0.0;
    for (const auto& a : psi.amp) s += std::norm(a);
    return s * psi.grid.spacing();
}

// Momentum amplitudes in DFT frequency order, phased so that
// phi(k) = (1/sqrt(2 pi)) integral psi(q) e^{-ikq} dq on the periodic window.
inline std::vector<std::complex<double>> to_momentum(const WaveFunction& psi) {
    auto v = fft(psi.amp);
    const double pref = psi.grid.spacing() / kSqrt2Pi;
    for (int j = 0; j < psi.grid.points; ++j) {
        const double ph = psi.grid.k(j) * psi.grid.half_width;
        v[j] *= pref * std::complex<double>(std::cos(ph), std::sin(ph));
    }
    return v;
}

inline WaveFunction from_momentum(const GridSpec& grid,
                                  std::vector<std::complex<double>> phi) {
    for (int j = 0; j < grid.points; ++j) {
        const double ph = -grid.k(j) * grid.half_width;
        phi[j] *= std::complex<double>(std::cos(ph), std::sin(ph));
    }
    auto amp = ifft(std::move(phi));
    const double pref = kSqrt2Pi / grid.spacing();
    for (auto& a : amp) a *= pref;
    return WaveFunction{grid, std::move(amp), false};
}

// Normalize in place and fix the global phase: the reference amplitude (the
// center point q=0, falling back to the first amplitude above 1e-12 of the
// peak when the center is unresolved) is rotated to the positive real axis.
inline void normalize(WaveFunction& psi) {
    const double n2 = norm_squared(psi);
    if (!(n2 > 1e-280)) throw NumericalError("cannot normalize: vanishing state");
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& a : psi.amp) a *= inv;
    double peak = 0.0;
    for (const auto& a : psi.amp) peak = std::max(peak, std::abs(a));
    std::complex<double> ref = psi.amp[psi.grid.points / 2];
    if (std::abs(ref) <= 1e-12 * peak) {
        for (const auto& a : psi.amp) {
            if (std::abs(a) > 1e-12 * peak) {
                ref = a;
                break;
            }
        }
    }
    const std::complex<double> rot = std::conj(ref) / std::abs(ref);
    for (auto& a : psi.amp) a *= rot;
    psi.normalized = true;
}

namespace detail {

inline void check_envelope_contained(const WaveFunction& psi) {
    double peak = 0.0;
    for (const auto& a : psi.amp) peak = std::max(peak, std::abs(a));
    const double edge = std::max(std::abs(psi.amp.front()), std::abs(psi.amp.back()));
    if (edge > 1e-8 * peak)
        throw GridError("envelope-truncated: window too narrow for this state");
}

struct CombPeak {
    double center;
    double sign;
};

// Comb centers within the window (pitch m + offset, optional alternating
// sign), keeping every peak whose Gaussian envelope weight is representable.
inline std::vector<CombPeak> comb_peaks(const GridSpec& g, double delta, Logical logical) {
    double pitch = 2.0 * kSqrtPi, offset = 0.0;
    bool alternating = false;
    switch (logical) {
        case Logical::zero: break;
        case Logical::one: offset = kSqrtPi; break;
        case Logical::plus: pitch = kSqrtPi; break;
        case Logical::minus:
            pitch = kSqrtPi;
            alternating = true;
            break;
    }
    const double reach = g.half_width + 8.0 * delta;
    const int m_max = static_cast<int>(std::floor((reach - offset) / pitch)) + 1;
    std::vector<CombPeak> peaks;
    for (int m = -m_max; m <= m_max; ++m) {
        const double c = pitch * m + offset;
        if (std::abs(c) > reach) continue;
        if (std::exp(-0.5 * delta * delta * c * c) < 1e-250) continue;
        const double s = (alternating && (m % 2 != 0)) ? -1.0 : 1.0;
        peaks.push_back({c, s});
    }
    return peaks;
}

inline std::vector<std::complex<double>> synthesize_fock(const GridSpec& g,
                                                         const std::vector<double>& coeffs) {
    std::vector<std::complex<double>> amp(g.points, 0.0);
    const int n_max = static_cast<int>(coeffs.size()) - 1;
    for (int i = 0; i < g.points; ++i) {
        const auto ladder = hermite_psi_ladder(n_max, g.q(i));
        double s = 0.0;
        for (int n = 0; n <= n_max; ++n) s += coeffs[n] * ladder[n];
        amp[i] = s;
    }
    return amp;
}

}  // namespace detail

inline WaveFunction prepare_gkp(const GridSpec& grid, const GkpApprox& approx) {
    if (!(approx.delta > 0.0) || !(approx.delta < 1.0))
        throw ConfigError("delta must lie in (0,1)");
    grid.validate_for(approx.delta);
    const double d = approx.delta;
    const double d2 = d * d;
    const int n = grid.points;
    WaveFunction psi{grid, std::vector<std::complex<double>>(n, 0.0), false};

    switch (approx.kind) {
        case Kind::F: {
            const auto peaks = detail::comb_peaks(grid, d, approx.logical);
            for (int i = 0; i < n; ++i) {
                const double q = grid.q(i);
                double s = 0.0;
                for (const auto& pk : peaks) {
                    const double dq = q - pk.center;
                    s += pk.sign * std::exp(-0.5 * d2 * pk.center * pk.center) *
                         std::exp(-dq * dq / (2.0 * d2));
                }
                psi.amp[i] = s;
            }
            break;
        }
        case Kind::E: {
            const auto peaks = detail::comb_peaks(grid, d, approx.logical);
            for (int i = 0; i < n; ++i) {
                const double q = grid.q(i);
                double s = 0.0;
                for (const auto& pk : peaks) {
                    const double dq = q - pk.center;
                    const double sq = q + pk.center;
                    s += pk.sign * std::exp(-dq * dq / (2.0 * d2)) *
                         std::exp(-d2 * sq * sq / 8.0);
                }
                psi.amp[i] = s;
            }
            break;
        }
        case Kind::FV: {
            for (int i = 0; i < n; ++i) {
                const double q = grid.q(i);
                switch (approx.logical) {
                    case Logical::zero:
                        psi.amp[i] = std::exp(-0.5 * d2 * q * q +
                                              (std::cos(kSqrtPi * q) - 1.0) / (kPi * d2));
                        break;
                    case Logical::one: {
                        const double qs = q - kSqrtPi;
                        psi.amp[i] = std::exp(-0.5 * d2 * qs * qs -
                                              (std::cos(kSqrtPi * q) + 1.0) / (kPi * d2));
                        break;
                    }
                    case Logical::plus:
                        psi.amp[i] = std::exp(-0.5 * d2 * q * q +
                                              (std::cos(2.0 * kSqrtPi * q) - 1.0) /
                                                  (4.0 * kPi * d2));
                        break;
                    case Logical::minus: {
                        const double mag = std::exp(-0.5 * d2 * q * q +
                                                    (std::cos(2.0 * kSqrtPi * q) - 1.0) /
                                                        (4.0 * kPi * d2));
                        const double ph = kSqrtPi * q;
                        psi.amp[i] = mag * std::complex<double>(std::cos(ph), std::sin(ph));
                        break;
                    }
                }
            }
            break;
        }
        case Kind::D: {
            const int n_max = default_fock_cutoff(d);
            auto raw0 = detail::fock_coeffs_raw(d, StateKind::gkp0, n_max);
            auto raw1 = detail::fock_coeffs_raw(d, StateKind::gkp1, n_max);
            std::vector<double> coeffs(raw0.size());
            for (std::size_t m = 0; m < coeffs.size(); ++m) {
                switch (approx.logical) {
                    case Logical::zero: coeffs[m] = raw0[m]; break;
                    case Logical::one: coeffs[m] = raw1[m]; break;
                    case Logical::plus: coeffs[m] = raw0[m] + raw1[m]; break;
                    case Logical::minus: coeffs[m] = raw0[m] - raw1[m]; break;
                }
            }
            psi.amp = detail::synthesize_fock(grid, coeffs);
            break;
        }
    }
    normalize(psi);
    detail::check_envelope_contained(psi);
    return psi;
}

// <psi| e^{i shift_q qhat} e^{-i shift_p phat} |psi>. The translation acts on
// the momentum side, so no interpolation error enters.
inline std::complex<double> expectation_displacement(const WaveFunction& psi, double shift_q,
                                                     double shift_p) {
    if (std::abs(shift_q) >= psi.grid.half_width / 2.0 ||
        std::abs(shift_p) >= psi.grid.half_width / 2.0)
        throw GridError("displacement-margin: |shift| must stay below L/2");
    auto phi = to_momentum(psi);
    for (int j = 0; j < psi.grid.points; ++j) {
        const double ph = -psi.grid.k(j) * shift_p;
        phi[j] *= std::complex<double>(std::cos(ph), std::sin(ph));
    }
    const WaveFunction shifted = from_momentum(psi.grid, std::move(phi));
    std::complex<double> acc = 0.0;
    for (int i = 0; i < psi.grid.points; ++i) {
        const double ph = shift_q * psi.grid.q(i);
        acc += std::conj(psi.amp[i]) * std::complex<double>(std::cos(ph), std::sin(ph)) *
               shifted.amp[i];
    }
    return acc * psi.grid.spacing();
}

inline constexpr double kSqueezingSaturated = std::numeric_limits<double>::infinity();

// Effective squeezing parameters (delta_q, delta_p) from the two stabilizer
// expectations. A stabilizer magnitude below 1e-12 cannot be resolved and
// yields the saturated sentinel.
inline std::pair<double, double> effective_squeezing(const WaveFunction& psi) {
    const int n = psi.grid.points;
    std::complex<double> sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double ph = 2.0 * kSqrtPi * psi.grid.q(i);
        sq += std::norm(psi.amp[i]) * std::complex<double>(std::cos(ph), std::sin(ph));
    }
    sq *= psi.grid.spacing();
    const auto phi = to_momentum(psi);
    std::complex<double> sp = 0.0;
    for (int j = 0; j < n; ++j) {
        const double ph = -2.0 * kSqrtPi * psi.grid.k(j);
        sp += std::norm(phi[j]) * std::complex<double>(std::cos(ph), std::sin(ph));
    }
    sp *= psi.grid.dk();
    const auto to_delta = [](double mag) {
        if (mag < 1e-12) return kSqueezingSaturated;
        return std::sqrt(std::log(1.0 / (mag * mag)) / (2.0 * kPi));
    };
    return {to_delta(std::abs(sq)), to_delta(std::abs(sp))};
}

inline double mean_photon_number(const WaveFunction& psi) {
    const int n = psi.grid.points;
    double q2 = 0.0;
    for (int i = 0; i < n; ++i) q2 += std::norm(psi.amp[i]) * psi.grid.q(i) * psi.grid.q(i);
    q2 *= psi.grid.spacing();
    const auto phi = to_momentum(psi);
    double k2 = 0.0;
    for (int j = 0; j < n; ++j) k2 += std::norm(phi[j]) * psi.grid.k(j) * psi.grid.k(j);
    k2 *= psi.grid.dk();
    return 0.5 * (q2 + k2) - 0.5;
}

namespace detail {

// Piecewise-linear (trapezoid) integral of a sampled density, split exactly
// at the logical bin boundaries (k +- 1/2) sqrt(pi). The cell-center rule
// leaves an O(h) boundary error that swamps small minority masses.
class DensityIntegrator {
  public:
    DensityIntegrator(double x0, double h, const std::vector<double>& dens)
        : x0_(x0), h_(h), dens_(dens), cum_(dens.size(), 0.0) {
        for (std::size_t i = 1; i < dens.size(); ++i)
            cum_[i] = cum_[i - 1] + 0.5 * (dens_[i] + dens_[i - 1]) * h_;
    }

    double total() const { return cum_.back(); }
    double x_min() const { return x0_; }
    double x_max() const { return x0_ + h_ * (dens_.size() - 1); }

    // Integral from x_min to x, interpolating inside the containing cell.
    double cumulative(double x) const {
        const int last = static_cast<int>(dens_.size()) - 2;
        int i = static_cast<int>(std::floor((x - x0_) / h_));
        i = std::clamp(i, 0, last);
        const double dx = x - (x0_ + h_ * i);
        return cum_[i] + dens_[i] * dx + 0.5 * (dens_[i + 1] - dens_[i]) * dx * dx / h_;
    }

    double window(double lo, double hi) const {
        const double a = std::max(lo, x_min());
        const double b = std::min(hi, x_max());
        if (b <= a) return 0.0;
        return cumulative(b) - cumulative(a);
    }

  private:
    double x0_, h_;
    const std::vector<double>& dens_;
    std::vector<double> cum_;
};

inline std::pair<double, double> logical_masses(double x0, double h,
                                                const std::vector<double>& dens) {
    DensityIntegrator integ(x0, h, dens);
    const double tot = integ.total();
    if (!(tot > 1e-300)) throw NumericalError("degenerate density");
    const int k_max = static_cast<int>(std::ceil(integ.x_max() / kSqrtPi)) + 1;
    double odd = 0.0;
    for (int k = -k_max; k <= k_max; ++k) {
        if ((k % 2 + 2) % 2 != 1) continue;
        odd += integ.window((k - 0.5) * kSqrtPi, (k + 0.5) * kSqrtPi);
    }
    odd /= tot;
    return {1.0 - odd, odd};
}

}  // namespace detail

// Probability of reading logical 0 / logical 1 from an ideal homodyne
// measurement of qhat binned into intervals around even / odd multiples of
// sqrt(pi). Returns (P0, P1) with P0 + P1 = 1.
inline std::pair<double, double> homodyne_logical_prob(const WaveFunction& psi) {
    std::vector<double> dens(psi.grid.points);
    for (int i = 0; i < psi.grid.points; ++i) dens[i] = std::norm(psi.amp[i]);
    const double n2 = norm_squared(psi);
    if (!(n2 > 1e-280)) throw NumericalError("degenerate state");
    return detail::logical_masses(-psi.grid.half_width, psi.grid.spacing(), dens);
}

// Position shift by dq followed by a momentum boost by dp,
// psi(q) -> e^{i dp q} psi(q - dq).
inline WaveFunction apply_displacement(const WaveFunction& psi, double dq, double dp) {
    if (std::abs(dq) >= psi.grid.half_width / 2.0)
        throw GridError("displacement-margin: |dq| must stay below L/2");
    auto phi = to_momentum(psi);
    for (int j = 0; j < psi.grid.points; ++j) {
        const double ph = -psi.grid.k(j) * dq;
        phi[j] *= std::complex<double>(std::cos(ph), std::sin(ph));
    }
    WaveFunction out = from_momentum(psi.grid, std::move(phi));
    for (int i = 0; i < psi.grid.points; ++i) {
        const double ph = dp * psi.grid.q(i);
        out.amp[i] *= std::complex<double>(std::cos(ph), std::sin(ph));
    }
    out.normalized = psi.normalized;
    return out;
}

inline std::complex<double> overlap(const WaveFunction& a, const WaveFunction& b) {
    if (!(a.grid == b.grid)) throw ConfigError("overlap requires matching grids");
    std::complex<double> s = 0.0;
    for (int i = 0; i < a.grid.points; ++i) s += std::conj(a.amp[i]) * b.amp[i];
    return s * a.grid.spacing();
}

inline double fidelity(const WaveFunction& a, const WaveFunction& b) {
    return std::norm(overlap(a, b));
}

// <e^{i pi nhat}> = integral psi*(q) psi(-q) dq, using the periodic mirror
// index (the two window edges alias to the same point).
inline std::complex<double> parity_expectation(const WaveFunction& psi) {
    const int n = psi.grid.points;
    std::complex<double> s = 0.0;
    for (int i = 0; i < n; ++i) s += std::conj(psi.amp[i]) * psi.amp[(n - i) % n];
    return s * psi.grid.spacing();
}

inline void write_wavefunction_csv(const WaveFunction& psi, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open " + path);
    char buf[160];
    std::snprintf(buf, sizeof buf, "# gkpsim wavefunction v1, L=%.17g, N=%d\n",
                  psi.grid.half_width, psi.grid.points);
    f << buf << "q,re_psi,im_psi\n";
    for (int i = 0; i < psi.grid.points; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", psi.grid.q(i),
                      psi.amp[i].real(), psi.amp[i].imag());
        f << buf;
    }
}

inline WaveFunction read_wavefunction_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open " + path);
    std::string line;
    if (!std::getline(f, line) || line.rfind("# gkpsim wavefunction v1", 0) != 0)
        throw ConfigError("not a wavefunction csv: " + path);
    GridSpec grid;
    {
        const auto lpos = line.find("L=");
        const auto npos = line.find("N=");
        if (lpos == std::string::npos || npos == std::string::npos)
            throw ConfigError("malformed wavefunction header");
        grid.half_width = std::stod(line.substr(lpos + 2));
        grid.points = std::stoi(line.substr(npos + 2));
    }
    grid.validate();
    std::getline(f, line);  // column names
    WaveFunction psi{grid, {}, false};
    psi.amp.reserve(grid.points);
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        double vals[3] = {0, 0, 0};
        for (int c = 0; c < 3 && std::getline(ss, cell, ','); ++c) vals[c] = std::stod(cell);
        psi.amp.emplace_back(vals[1], vals[2]);
    }
    if (static_cast<int>(psi.amp.size()) != grid.points)
        throw ConfigError("wavefunction csv row count mismatch");
    return psi;
}

}  // namespace gkpsim
