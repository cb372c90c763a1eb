#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "gkpsim/errors.hpp"
#include "gkpsim/fft.hpp"
#include "gkpsim/grid.hpp"
#include "gkpsim/gridstate.hpp"
#include "gkpsim/rng.hpp"

namespace gkpsim {

enum class FeedbackMode { none, recenter, memoryless };

inline const char* to_string(FeedbackMode m) {
    switch (m) {
        case FeedbackMode::none: return "none";
        case FeedbackMode::recenter: return "recenter";
        default: return "memoryless";
    }
}

inline FeedbackMode feedback_from_string(const std::string& s) {
    if (s == "none") return FeedbackMode::none;
    if (s == "recenter") return FeedbackMode::recenter;
    if (s == "memoryless") return FeedbackMode::memoryless;
    throw ConfigError("unknown feedback mode: " + s);
}

// One error-correction round: momentum syndrome p_out, position syndrome
// q_out, and the displacement actually applied afterwards.
struct EcRound {
    double p_out = 0.0;
    double q_out = 0.0;
    double fb_q = 0.0;
    double fb_p = 0.0;
    bool feedback_applied = false;
};

// Classical measurement record of one trajectory, enough to replay the
// trajectory deterministically on any input hypothesis.
struct EcRecord {
    double delta = 0.0;
    FeedbackMode feedback_mode = FeedbackMode::none;
    std::uint64_t master_seed = 0;
    std::uint64_t traj_index = 0;
    std::vector<EcRound> rounds;
};

struct RoundDiag {
    double dq_eff = 0.0;
    double dp_eff = 0.0;
    double nbar = 0.0;
    double p0 = 0.0;  // logical-0 mass if the trajectory stopped here
    double p1 = 0.0;
};

struct Trajectory {
    EcRecord record;
    std::vector<RoundDiag> diags;
    int final_homodyne_bit = 0;
    WaveFunction final_state;  // empty unless requested
    bool has_final_state = false;
};

// Decomposition of a real outcome x = (2n + l) sqrt(pi) + e with l in {0,1}
// and |e| <= sqrt(pi)/2: l is the logical part, n the stabilizer part, e the
// residual displacement.
struct OutcomeDecomposition {
    long stabilizer_n = 0;
    int logical_l = 0;
    double residual_e = 0.0;
};

inline OutcomeDecomposition decompose_outcome(double x) {
    const long r = std::lround(x / kSqrtPi);
    const double e = x - r * kSqrtPi;
    const int l = static_cast<int>(((r % 2) + 2) % 2);
    return {(r - l) / 2, l, e};
}

// Shared per-(grid, delta) data for the two syndrome extractions: the
// normalized approximate ancillas, spectra reused by every round, and the
// sorted outcome axes with their permutation from DFT bin order.
class EcContext {
  public:
    EcContext(const GridSpec& grid_in, double delta_in) : grid(grid_in), delta(delta_in) {
        grid.validate_for(delta);
        anc_zero = prepare_gkp(grid, GkpApprox{Kind::FV, delta, Logical::zero});
        anc_plus = prepare_gkp(grid, GkpApprox{Kind::FV, delta, Logical::plus});
        anc_plus_momentum = to_momentum(anc_plus);

        const int n = grid.points;
        std::vector<double> anc_momentum_density(n);
        {
            const auto phi = to_momentum(anc_zero);
            for (int j = 0; j < n; ++j) anc_momentum_density[j] = std::norm(phi[j]);
        }
        fft_anc_momentum_density = fft_real(anc_momentum_density);
        std::vector<double> anc_plus_density(n);
        for (int i = 0; i < n; ++i) anc_plus_density[i] = std::norm(anc_plus.amp[i]);
        fft_anc_plus_density = fft_real(anc_plus_density);

        p_order.resize(n);
        q_order.resize(n);
        std::vector<double> p_raw(n), q_raw(n);
        for (int j = 0; j < n; ++j) p_raw[j] = grid.k(j);
        for (int i = 0; i < n; ++i) {
            double q = -i * grid.spacing();
            if (q < -grid.half_width) q += 2.0 * grid.half_width;
            q_raw[i] = q;
        }
        for (int i = 0; i < n; ++i) p_order[i] = q_order[i] = i;
        std::sort(p_order.begin(), p_order.end(),
                  [&](int a, int b) { return p_raw[a] < p_raw[b]; });
        std::sort(q_order.begin(), q_order.end(),
                  [&](int a, int b) { return q_raw[a] < q_raw[b]; });
        p_axis.resize(n);
        q_axis.resize(n);
        for (int i = 0; i < n; ++i) {
            p_axis[i] = p_raw[p_order[i]];
            q_axis[i] = q_raw[q_order[i]];
        }
    }

    GridSpec grid;
    double delta;
    WaveFunction anc_zero, anc_plus;
    std::vector<std::complex<double>> anc_plus_momentum;
    std::vector<std::complex<double>> fft_anc_momentum_density;
    std::vector<std::complex<double>> fft_anc_plus_density;
    std::vector<double> p_axis, q_axis;  // ascending outcome values
    std::vector<int> p_order, q_order;   // DFT bin feeding each axis entry
};

inline const EcContext& ec_context(const GridSpec& grid, double delta) {
    static std::mutex mu;
    static std::map<std::tuple<double, int, double>, std::unique_ptr<EcContext>> cache;
    std::lock_guard<std::mutex> lock(mu);
    const auto key = std::make_tuple(grid.half_width, grid.points, delta);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<EcContext>(grid, delta)).first;
    return *it->second;
}

// Born masses for the momentum syndrome, aligned with ctx.p_axis: the cyclic
// cross-correlation of the ancilla and state momentum densities.
inline std::vector<double> z_born_masses(const EcContext& ctx, const WaveFunction& psi) {
    const int n = ctx.grid.points;
    std::vector<double> state_density(n);
    {
        const auto phi = to_momentum(psi);
        for (int j = 0; j < n; ++j) state_density[j] = std::norm(phi[j]);
    }
    auto spec = fft_real(state_density);
    for (int j = 0; j < n; ++j) spec[j] = ctx.fft_anc_momentum_density[j] * std::conj(spec[j]);
    const auto corr = ifft(std::move(spec));
    std::vector<double> masses(n);
    for (int i = 0; i < n; ++i)
        masses[i] = std::max(corr[ctx.p_order[i]].real() * ctx.grid.dk(), 0.0);
    return masses;
}

// Born masses for the position syndrome, aligned with ctx.q_axis.
inline std::vector<double> x_born_masses(const EcContext& ctx, const WaveFunction& psi) {
    const int n = ctx.grid.points;
    std::vector<double> dens(n);
    for (int i = 0; i < n; ++i) dens[i] = std::norm(psi.amp[i]);
    auto spec = fft_real(dens);
    for (int j = 0; j < n; ++j) spec[j] = ctx.fft_anc_plus_density[j] * std::conj(spec[j]);
    const auto corr = ifft(std::move(spec));
    std::vector<double> masses(n);
    for (int i = 0; i < n; ++i)
        masses[i] = std::max(corr[ctx.q_order[i]].real() * ctx.grid.spacing(), 0.0);
    return masses;
}

// Draw from a binned distribution by inverting the cumulative mass, linear
// within the selected bin. axis must be uniformly spaced ascending.
inline double sample_from_masses(const std::vector<double>& axis,
                                 const std::vector<double>& masses, double u) {
    const std::size_t n = masses.size();
    std::vector<double> cum(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += masses[i];
        cum[i] = acc;
    }
    if (!(acc > 1e-300) || !std::isfinite(acc))
        throw NumericalError("degenerate outcome density");
    const double dx = axis[1] - axis[0];
    const double t = u * acc;
    std::size_t i = std::lower_bound(cum.begin(), cum.end(), t) - cum.begin();
    i = std::min(i, n - 1);
    const double c0 = i > 0 ? cum[i - 1] : 0.0;
    return axis[i] - dx + (t - c0) / std::max(cum[i] - c0, 1e-300) * dx;
}

// Convolve the state with kernel(q) e^{-i p_out q}. This is the state update
// of a momentum-syndrome extraction for an arbitrary ancilla wavefunction.
inline WaveFunction modulated_convolution(const WaveFunction& kernel, const WaveFunction& psi,
                                          double p_out) {
    const int n = psi.grid.points;
    std::vector<std::complex<double>> ker(n);
    for (int i = 0; i < n; ++i) {
        const double ph = -p_out * psi.grid.q(i);
        ker[i] = kernel.amp[i] * std::complex<double>(std::cos(ph), std::sin(ph));
    }
    auto fk = fft(std::move(ker));
    auto fp = fft(psi.amp);
    for (int j = 0; j < n; ++j) fk[j] *= fp[j];
    const auto conv = ifft(std::move(fk));
    WaveFunction out{psi.grid, std::vector<std::complex<double>>(n), false};
    const double h = psi.grid.spacing();
    for (int i = 0; i < n; ++i) out.amp[i] = conv[(i + n / 2) % n] * h;
    normalize(out);
    return out;
}

inline WaveFunction z_apply(const EcContext& ctx, const WaveFunction& psi, double p_out) {
    return modulated_convolution(ctx.anc_zero, psi, p_out);
}

// Multiply by the ancilla translated to the measured position offset. The
// translation happens on the ancilla's momentum side, so no interpolation.
inline WaveFunction x_apply(const EcContext& ctx, const WaveFunction& psi, double q_out) {
    const int n = psi.grid.points;
    auto phi = ctx.anc_plus_momentum;
    for (int j = 0; j < n; ++j) {
        const double ph = -ctx.grid.k(j) * q_out;
        phi[j] *= std::complex<double>(std::cos(ph), std::sin(ph));
    }
    const WaveFunction shifted = from_momentum(ctx.grid, std::move(phi));
    WaveFunction out{psi.grid, std::vector<std::complex<double>>(n), false};
    for (int i = 0; i < n; ++i) out.amp[i] = shifted.amp[i] * psi.amp[i];
    normalize(out);
    return out;
}

inline std::pair<WaveFunction, double> z_correct(const WaveFunction& psi, double delta,
                                                 Rng& rng) {
    const EcContext& ctx = ec_context(psi.grid, delta);
    const auto masses = z_born_masses(ctx, psi);
    const double p_out = sample_from_masses(ctx.p_axis, masses, rng.uniform());
    return {z_apply(ctx, psi, p_out), p_out};
}

inline std::pair<WaveFunction, double> x_correct(const WaveFunction& psi, double delta,
                                                 Rng& rng) {
    const EcContext& ctx = ec_context(psi.grid, delta);
    const auto masses = x_born_masses(ctx, psi);
    const double q_out = sample_from_masses(ctx.q_axis, masses, rng.uniform());
    return {x_apply(ctx, psi, q_out), q_out};
}

// Feedback displacement (dq, dp) for the chosen mode given the round's
// syndromes. recenter undoes both outcomes in full; memoryless undoes only
// the non-logical part of each outcome.
inline std::pair<double, double> feedback_displacement(FeedbackMode mode, double p_out,
                                                       double q_out) {
    switch (mode) {
        case FeedbackMode::none:
            return {0.0, 0.0};
        case FeedbackMode::recenter:
            return {-q_out, p_out};
        case FeedbackMode::memoryless: {
            const auto dq = decompose_outcome(q_out);
            const auto dp = decompose_outcome(p_out);
            const double shift_q = dq.stabilizer_n * 2.0 * kSqrtPi + dq.residual_e;
            const double shift_p = dp.stabilizer_n * 2.0 * kSqrtPi + dp.residual_e;
            return {-shift_q, shift_p};
        }
    }
    return {0.0, 0.0};
}

// Squeezing and photon diagnostics sharing one momentum transform.
inline RoundDiag state_diagnostics(const WaveFunction& psi) {
    const int n = psi.grid.points;
    RoundDiag d;
    std::complex<double> sq = 0.0;
    double q2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double w = std::norm(psi.amp[i]);
        const double q = psi.grid.q(i);
        const double ph = 2.0 * kSqrtPi * q;
        sq += w * std::complex<double>(std::cos(ph), std::sin(ph));
        q2 += w * q * q;
    }
    sq *= psi.grid.spacing();
    q2 *= psi.grid.spacing();
    const auto phi = to_momentum(psi);
    std::complex<double> sp = 0.0;
    double k2 = 0.0;
    for (int j = 0; j < n; ++j) {
        const double w = std::norm(phi[j]);
        const double k = psi.grid.k(j);
        const double ph = -2.0 * kSqrtPi * k;
        sp += w * std::complex<double>(std::cos(ph), std::sin(ph));
        k2 += w * k * k;
    }
    sp *= psi.grid.dk();
    k2 *= psi.grid.dk();
    const auto to_delta = [](double mag) {
        if (mag < 1e-12) return kSqueezingSaturated;
        return std::sqrt(std::log(1.0 / (mag * mag)) / (2.0 * kPi));
    };
    d.dq_eff = to_delta(std::abs(sq));
    d.dp_eff = to_delta(std::abs(sp));
    d.nbar = 0.5 * (q2 + k2) - 0.5;
    return d;
}

struct TrajectoryOptions {
    bool collect_diagnostics = true;
    bool keep_final_state = false;
};

// Run `rounds` rounds of syndrome extraction plus feedback, then read the
// logical bit once. rounds = 0 reads the input directly.
inline Trajectory run_trajectory(const WaveFunction& input, double delta, int rounds,
                                 FeedbackMode feedback, std::uint64_t master_seed,
                                 std::uint64_t traj_index,
                                 const TrajectoryOptions& opts = {}) {
    if (rounds < 0) throw ConfigError("rounds must be nonnegative");
    const EcContext& ctx = ec_context(input.grid, delta);
    Rng rng(master_seed, traj_index);
    WaveFunction psi = input;
    if (!psi.normalized) normalize(psi);

    Trajectory traj;
    traj.record.delta = delta;
    traj.record.feedback_mode = feedback;
    traj.record.master_seed = master_seed;
    traj.record.traj_index = traj_index;

    for (int m = 0; m < rounds; ++m) {
        const auto z_masses = z_born_masses(ctx, psi);
        const double p_out = sample_from_masses(ctx.p_axis, z_masses, rng.uniform());
        psi = z_apply(ctx, psi, p_out);
        const auto x_masses = x_born_masses(ctx, psi);
        const double q_out = sample_from_masses(ctx.q_axis, x_masses, rng.uniform());
        psi = x_apply(ctx, psi, q_out);

        const auto [fb_q, fb_p] = feedback_displacement(feedback, p_out, q_out);
        const bool applied = (fb_q != 0.0 || fb_p != 0.0);
        if (applied) {
            psi = apply_displacement(psi, fb_q, fb_p);
            normalize(psi);
        }
        traj.record.rounds.push_back({p_out, q_out, fb_q, fb_p, applied});

        if (opts.collect_diagnostics) {
            RoundDiag diag = state_diagnostics(psi);
            const auto [p0, p1] = homodyne_logical_prob(psi);
            diag.p0 = p0;
            diag.p1 = p1;
            traj.diags.push_back(diag);
        }
    }

    const auto [p0, p1] = homodyne_logical_prob(psi);
    traj.final_homodyne_bit = (rng.uniform() < p1) ? 1 : 0;
    if (opts.keep_final_state) {
        traj.final_state = psi;
        traj.has_final_state = true;
    }
    if (!opts.collect_diagnostics || rounds == 0) {
        // Preserve the stopping-point masses even without per-round diagnostics.
        RoundDiag diag;
        diag.p0 = p0;
        diag.p1 = p1;
        if (traj.diags.empty()) traj.diags.push_back(diag);
    }
    return traj;
}

// Closed-form unnormalized output of one momentum-syndrome round applied to
// Gaussian-comb (F-kind) data with a Gaussian-comb kernel: a double comb of
// Gaussians carrying the measured-phase modulation.
inline WaveFunction gaussian_comb_round_reference(const GridSpec& grid, double delta,
                                                  double p_out) {
    const double d2 = delta * delta;
    const double reach = grid.half_width + 8.0 * delta;
    const int k_max = static_cast<int>(std::ceil(reach / (2.0 * kSqrtPi))) + 1;
    WaveFunction out{grid, std::vector<std::complex<double>>(grid.points, 0.0), false};
    for (int k = -k_max; k <= k_max; ++k) {
        for (int kp = -k_max; kp <= k_max; ++kp) {
            const double w = std::exp(-2.0 * d2 * kPi * (static_cast<double>(k) * k +
                                                         static_cast<double>(kp) * kp));
            if (w < 1e-250) continue;
            const double center = 2.0 * kSqrtPi * (k + kp);
            const double skew = 2.0 * kSqrtPi * (k - kp);
            for (int i = 0; i < grid.points; ++i) {
                const double q = grid.q(i);
                const double g = std::exp(-(q - center) * (q - center) / (4.0 * d2));
                if (g * w < 1e-280) continue;
                const double ph = -0.5 * p_out * (q + skew);
                out.amp[i] += w * g * std::complex<double>(std::cos(ph), std::sin(ph));
            }
        }
    }
    return out;
}

inline void write_trajectory_csv(const std::vector<Trajectory>& trajs, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open " + path);
    f << "traj_id,round,p_out,q_out,fb_q,fb_p,dq_eff,dp_eff,nbar,final_bit\n";
    char buf[320];
    for (std::size_t t = 0; t < trajs.size(); ++t) {
        const auto& traj = trajs[t];
        const std::size_t rounds = traj.record.rounds.size();
        for (std::size_t m = 0; m < rounds; ++m) {
            const auto& r = traj.record.rounds[m];
            const RoundDiag d = m < traj.diags.size() ? traj.diags[m] : RoundDiag{};
            if (m + 1 < rounds) {
                std::snprintf(buf, sizeof buf,
                              "%zu,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,\n", t, m + 1,
                              r.p_out, r.q_out, r.fb_q, r.fb_p, d.dq_eff, d.dp_eff, d.nbar);
            } else {
                std::snprintf(buf, sizeof buf,
                              "%zu,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", t, m + 1,
                              r.p_out, r.q_out, r.fb_q, r.fb_p, d.dq_eff, d.dp_eff, d.nbar,
                              traj.final_homodyne_bit);
            }
            f << buf;
        }
    }
}

}  // namespace gkpsim
