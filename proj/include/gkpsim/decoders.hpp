#pragma once

#include <cmath>
#include <cstdlib>
#include <string>
#include <utility>
#include <vector>

#include "gkpsim/errors.hpp"
#include "gkpsim/grid.hpp"
#include "gkpsim/gridstate.hpp"
#include "gkpsim/steane_ec.hpp"

namespace gkpsim {

enum class DecoderKind { mld, forward, passive, memoryless, parity };

inline const char* to_string(DecoderKind d) {
    switch (d) {
        case DecoderKind::mld: return "mld";
        case DecoderKind::forward: return "forward";
        case DecoderKind::passive: return "passive";
        case DecoderKind::memoryless: return "memoryless";
        default: return "parity";
    }
}

inline DecoderKind decoder_from_string(const std::string& s) {
    if (s == "mld") return DecoderKind::mld;
    if (s == "forward") return DecoderKind::forward;
    if (s == "passive") return DecoderKind::passive;
    if (s == "memoryless") return DecoderKind::memoryless;
    if (s == "parity") return DecoderKind::parity;
    throw ConfigError("unknown decoder: " + s);
}

struct DecoderVerdict {
    DecoderKind decoder = DecoderKind::passive;
    int flip = 0;
};

// Per-step energies of the discrete path integral. kinetic_term scores the
// position advance through the momentum-syndrome kernel, potential_term the
// mismatch between a position syndrome and the path.
inline double kinetic_term(double x, double delta) {
    const double d2 = delta * delta;
    return 0.5 * d2 * x * x - std::cos(kSqrtPi * x) / (d2 * kPi);
}

inline double potential_term(double x, double delta) {
    const double d2 = delta * delta;
    return 0.5 * d2 * x * x - std::cos(2.0 * kSqrtPi * x) / (4.0 * kPi * d2);
}

// Real part of the path action for path = (q_0, ..., q_M) against a record
// of M rounds. With feedback_adapted the path lives in the displaced frame
// of the recenter feedback: the round-m advance in the measured frame is
// q_m + qsynd_m - q_{m-1}, and the position syndrome is consumed by the
// frame change so the potential acts on q_m itself.
inline double action_re(const std::vector<double>& path, const EcRecord& rec, double delta,
                        bool feedback_adapted) {
    const std::size_t m_rounds = rec.rounds.size();
    if (path.size() != m_rounds + 1)
        throw ConfigError("path must have one entry per round plus the starting point");
    double s = 0.0;
    for (std::size_t m = 1; m <= m_rounds; ++m) {
        const double qs = rec.rounds[m - 1].q_out;
        if (feedback_adapted) {
            s += kinetic_term(path[m] + qs - path[m - 1], delta);
            s += potential_term(path[m], delta);
        } else {
            s += kinetic_term(path[m] - path[m - 1], delta);
            s += potential_term(qs - path[m], delta);
        }
    }
    return s;
}

// Companion phase accumulated by the measured-momentum modulation along the
// same path.
inline double action_im(const std::vector<double>& path, const EcRecord& rec,
                        bool feedback_adapted) {
    const std::size_t m_rounds = rec.rounds.size();
    if (path.size() != m_rounds + 1)
        throw ConfigError("path must have one entry per round plus the starting point");
    double s = 0.0;
    for (std::size_t m = 1; m <= m_rounds; ++m) {
        const double advance = feedback_adapted
                                   ? path[m] + rec.rounds[m - 1].q_out - path[m - 1]
                                   : path[m] - path[m - 1];
        s += rec.rounds[m - 1].p_out * advance;
    }
    return s;
}

// Replay the recorded rounds on an input hypothesis and read the exact
// logical masses of the surviving state. Returns the verdict plus (P0, P1).
inline std::pair<DecoderVerdict, std::pair<double, double>> mld_decode(
    const WaveFunction& input_hypothesis, const EcRecord& rec) {
    const EcContext& ctx = ec_context(input_hypothesis.grid, rec.delta);
    WaveFunction psi = input_hypothesis;
    if (!psi.normalized) normalize(psi);
    for (const auto& r : rec.rounds) {
        psi = z_apply(ctx, psi, r.p_out);
        psi = x_apply(ctx, psi, r.q_out);
        if (r.feedback_applied) {
            psi = apply_displacement(psi, r.fb_q, r.fb_p);
            normalize(psi);
        }
    }
    const auto [p0, p1] = homodyne_logical_prob(psi);
    DecoderVerdict v{DecoderKind::mld, p1 > p0 ? 1 : 0};
    return {v, {p0, p1}};
}

namespace detail {

template <typename F>
inline double golden_section_min(F&& f, double a, double b, int iters = 40) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    for (int i = 0; i < iters; ++i) {
        if (f(c) < f(d))
            b = d;
        else
            a = c;
        c = b - gr * (b - a);
        d = a + gr * (b - a);
    }
    return 0.5 * (a + b);
}

}  // namespace detail

// Greedy semiclassical decoder: advance one round at a time, minimizing the
// action increment over candidate positions near each lattice coset, refined
// by golden-section search. q0 is the dominant peak of the input hypothesis.
inline DecoderVerdict forward_decode(const EcRecord& rec, double delta, double q0,
                                     bool feedback_adapted) {
    double q_prev = q0;
    for (const auto& round : rec.rounds) {
        const double qs = round.q_out;
        const auto increment = [&](double q) {
            return feedback_adapted
                       ? kinetic_term(q + qs - q_prev, delta) + potential_term(q, delta)
                       : kinetic_term(q - q_prev, delta) + potential_term(qs - q, delta);
        };
        double best_q = 0.0;
        double best_val = 0.0;
        bool first = true;
        for (int k = -4; k <= 4; ++k) {
            const double center = feedback_adapted ? k * kSqrtPi : qs + k * kSqrtPi;
            const double q = detail::golden_section_min(increment, center - kSqrtPi / 4.0,
                                                        center + kSqrtPi / 4.0);
            const double val = increment(q);
            if (first || val < best_val) {
                best_q = q;
                best_val = val;
                first = false;
            }
        }
        q_prev = best_q;
    }
    const long coset = std::lround(q_prev / kSqrtPi);
    return {DecoderKind::forward, static_cast<int>(((coset % 2) + 2) % 2)};
}

inline DecoderVerdict passive_decode(const EcRecord&) { return {DecoderKind::passive, 0}; }

// XOR of the logical part of every position syndrome; matches the feedback
// mode that physically undoes only the non-logical part each round.
inline DecoderVerdict memoryless_decode(const EcRecord& rec) {
    int flip = 0;
    for (const auto& r : rec.rounds) flip ^= decompose_outcome(r.q_out).logical_l;
    return {DecoderKind::memoryless, flip};
}

// Parity of the net recenter feedback in units of sqrt(pi).
inline DecoderVerdict parity_decode(const EcRecord& rec) {
    double fb_sum = 0.0;
    for (const auto& r : rec.rounds) fb_sum += r.fb_q;
    const long steps = std::lround(fb_sum / kSqrtPi);
    return {DecoderKind::parity, static_cast<int>(((steps % 2) + 2) % 2)};
}

inline double argmax_position(const WaveFunction& psi) {
    int best = 0;
    double best_val = -1.0;
    for (int i = 0; i < psi.grid.points; ++i) {
        const double v = std::abs(psi.amp[i]);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    return psi.grid.q(best);
}

}  // namespace gkpsim
