#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "gkpsim/errors.hpp"
#include "gkpsim/fockrep.hpp"
#include "gkpsim/grid.hpp"
#include "gkpsim/gridstate.hpp"

namespace gkpsim {

// Photon loss of strength kappa*t, expressed through the induced classical
// map on quadrature samples: contraction by exp(-kappa t / 2) plus Gaussian
// fuzz of variance (1 - exp(-kappa t)) / 2.
struct LossParams {
    double kappa_t = 0.0;

    void validate() const {
        if (!(kappa_t >= 0.0)) throw ConfigError("kappa_t must be nonnegative");
    }
    double contraction() const { return std::exp(-kappa_t / 2.0); }
    double fuzz_variance() const { return 0.5 * (1.0 - std::exp(-kappa_t)); }
};

// Classical probability density sampled on a position grid.
struct QDensity {
    GridSpec grid;
    std::vector<double> p;

    double mass() const {
        double s = 0.0;
        for (double v : p) s += v;
        return s * grid.spacing();
    }
    void validate() const {
        grid.validate();
        if (static_cast<int>(p.size()) != grid.points)
            throw ConfigError("density size does not match grid");
        if (std::abs(mass() - 1.0) > 1e-9) throw NumericalError("density mass not 1");
    }
};

inline QDensity density_of(const WaveFunction& psi) {
    QDensity d{psi.grid, std::vector<double>(psi.grid.points)};
    for (int i = 0; i < psi.grid.points; ++i) d.p[i] = std::norm(psi.amp[i]);
    return d;
}

// Evolve a position density under loss for time kappa_t. Each source column
// spreads into a locally normalized Gaussian window, which preserves mass
// and nonnegativity exactly regardless of grid resolution.
inline QDensity ou_evolve(const QDensity& in, LossParams loss) {
    loss.validate();
    if (loss.kappa_t == 0.0) return in;
    const GridSpec& g = in.grid;
    const int n = g.points;
    const double h = g.spacing();
    const double s = loss.contraction();
    const double sig2 = loss.fuzz_variance();
    const double sig = std::sqrt(sig2);
    const double window = 8.0 * sig;
    QDensity out{g, std::vector<double>(n, 0.0)};
    std::vector<double> w;
    for (int j = 0; j < n; ++j) {
        if (in.p[j] == 0.0) continue;
        const double c = s * g.q(j);
        const int i0 = std::max(0, static_cast<int>((c - window + g.half_width) / h));
        const int i1 = std::min(n - 1, static_cast<int>((c + window + g.half_width) / h) + 1);
        w.assign(i1 - i0 + 1, 0.0);
        double tot = 0.0;
        for (int i = i0; i <= i1; ++i) {
            const double d = g.q(i) - c;
            w[i - i0] = std::exp(-d * d / (2.0 * sig2));
            tot += w[i - i0];
        }
        const double scale = in.p[j] / tot;
        for (int i = i0; i <= i1; ++i) out.p[i] += w[i - i0] * scale;
    }
    return out;
}

// Decay law for the expectation of a displacement of length alpha under
// loss: a deterministic phase from any sqrt(pi) frame shift m_shift, the
// Gaussian-fuzz attenuation, and the initial-state expectation evaluated at
// the contracted length alpha(t). initial_expect must accept alpha(t).
template <typename F>
inline std::complex<double> stabilizer_expectation_decay(double alpha, LossParams loss,
                                                         F&& initial_expect, int m_shift) {
    loss.validate();
    const double s = loss.contraction();
    const double alpha_t = alpha * s;
    const double ph = 2.0 * kPi * m_shift * s;
    const std::complex<double> phase(std::cos(ph), std::sin(ph));
    const double atten = std::exp(-(alpha * alpha - alpha_t * alpha_t) / 4.0);
    return phase * atten * initial_expect(alpha_t);
}

enum class NoiseConvention { half, full };

// Displacement-noise strength equivalent to envelope parameter delta.
inline double gaussian_displacement_params(double delta, NoiseConvention c) {
    if (!(delta > 0.0)) throw ConfigError("delta must be positive");
    return c == NoiseConvention::half ? delta / std::sqrt(2.0) : delta;
}

inline double squeezing_db(double delta) {
    if (!(delta > 0.0)) throw ConfigError("delta must be positive");
    return -10.0 * std::log10(delta * delta);
}

enum class ReadoutModel { single_ancilla_logical, surface_check };

// Intrinsic misassignment probability of a binned quadrature readout.
inline double readout_flip_prob(double delta, ReadoutModel model) {
    if (!(delta > 0.0) || !(delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
    const double e = model == ReadoutModel::single_ancilla_logical
                         ? std::exp(-kPi * delta * delta / 4.0)
                         : std::exp(-kPi * delta * delta);
    return 0.5 * (1.0 - e);
}

// Number-basis density matrix, dense row-major (dim x dim).
struct FockDensity {
    int dim = 0;
    std::vector<double> rho;

    double& at(int n, int m) { return rho[static_cast<std::size_t>(n) * dim + m]; }
    double at(int n, int m) const { return rho[static_cast<std::size_t>(n) * dim + m]; }
};

// Gaussian random-rotation dephasing with angle variance var_theta applied
// to a pure number-basis expansion: rho_nm picks up exp(-var (n-m)^2 / 2).
// The small-angle regime keeps var_theta well below 1; larger values are
// outside the model's validity and rejected.
inline FockDensity dephasing_smallangle(const FockExpansion& e, double var_theta) {
    if (!(var_theta >= 0.0) || var_theta >= 0.5)
        throw ConfigError("var_theta must lie in [0, 0.5)");
    const int dim = static_cast<int>(e.coeffs.size());
    FockDensity rho{dim, std::vector<double>(static_cast<std::size_t>(dim) * dim)};
    for (int n = 0; n < dim; ++n)
        for (int m = 0; m < dim; ++m) {
            const double damp = std::exp(-0.5 * var_theta * (n - m) * (n - m));
            rho.at(n, m) = e.coeffs[n] * e.coeffs[m] * damp;
        }
    return rho;
}

inline double purity(const FockDensity& rho) {
    double s = 0.0;
    for (double v : rho.rho) s += v * v;
    return s;
}

// Logical bin masses of a classical position density, same splitting rule
// as the wavefunction homodyne readout.
inline std::pair<double, double> homodyne_logical_prob(const QDensity& d) {
    return detail::logical_masses(-d.grid.half_width, d.grid.spacing(), d.p);
}

inline void write_loss_csv(const std::vector<double>& kappa_ts,
                           const std::vector<double>& p_correct,
                           const std::vector<std::complex<double>>& expectation,
                           const std::string& path) {
    if (kappa_ts.size() != p_correct.size() || kappa_ts.size() != expectation.size())
        throw ConfigError("loss csv column mismatch");
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open " + path);
    f << "kappa_t,p_correct,expectation_re,expectation_im\n";
    char buf[160];
    for (std::size_t i = 0; i < kappa_ts.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", kappa_ts[i], p_correct[i],
                      expectation[i].real(), expectation[i].imag());
        f << buf;
    }
}

}  // namespace gkpsim
