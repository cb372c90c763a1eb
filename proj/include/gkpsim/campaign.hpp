#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gkpsim/channels.hpp"
#include "gkpsim/codes.hpp"
#include "gkpsim/decoders.hpp"
#include "gkpsim/errors.hpp"
#include "gkpsim/fockrep.hpp"
#include "gkpsim/gridstate.hpp"
#include "gkpsim/steane_ec.hpp"
#include "gkpsim/stochastic.hpp"

namespace gkpsim {

inline constexpr const char* kVersion = "gkpsim 1.0.0";

inline int default_workers() {
    if (const char* env = std::getenv("GKPSIM_WORKERS")) {
        const int w = std::atoi(env);
        if (w < 1) throw ConfigError("GKPSIM_WORKERS must be a positive integer");
        return w;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Run f(0..n-1) on `workers` threads pulling indices from a shared counter.
// Each index writes only its own output slot, so results are identical for
// any worker count.
template <typename F>
inline void parallel_for(int n, int workers, F&& f) {
    if (n <= 0) return;
    workers = std::clamp(workers, 1, n);
    if (workers == 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!error) error = std::current_exception();
                    next.store(n);
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

struct CampaignConfig {
    std::string experiment = "decode";
    std::vector<double> deltas = {0.3, 0.4};
    int rounds = 10;
    int n_traj = 5000;
    std::vector<DecoderKind> decoders = {DecoderKind::mld, DecoderKind::forward,
                                         DecoderKind::passive, DecoderKind::memoryless,
                                         DecoderKind::parity};
    std::uint64_t seed = 42;
    int workers = 0;  // 0: use default_workers()
    std::string out_dir = ".";
    int log_trajectories = 0;
    double kappa_t_max = 0.5;
    int kappa_t_steps = 11;
    int fock_n_max = -1;

    int effective_workers() const { return workers > 0 ? workers : default_workers(); }
};

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(s);
    while (std::getline(ss, cur, sep)) out.push_back(cur);
    return out;
}

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace detail

// Flat key = value configuration file. Unknown keys are rejected so typos
// fail loudly. '#' starts a comment.
inline void apply_config_line(CampaignConfig& cfg, const std::string& key,
                              const std::string& value) {
    try {
        if (key == "experiment") {
            cfg.experiment = value;
        } else if (key == "deltas") {
            cfg.deltas.clear();
            for (const auto& tok : detail::split(value, ','))
                cfg.deltas.push_back(std::stod(detail::trim(tok)));
        } else if (key == "rounds") {
            cfg.rounds = std::stoi(value);
        } else if (key == "n_traj") {
            cfg.n_traj = std::stoi(value);
        } else if (key == "decoders") {
            cfg.decoders.clear();
            for (const auto& tok : detail::split(value, ','))
                cfg.decoders.push_back(decoder_from_string(detail::trim(tok)));
        } else if (key == "seed") {
            cfg.seed = std::stoull(value);
        } else if (key == "workers") {
            cfg.workers = std::stoi(value);
        } else if (key == "out_dir") {
            cfg.out_dir = value;
        } else if (key == "log_trajectories") {
            cfg.log_trajectories = std::stoi(value);
        } else if (key == "kappa_t_max") {
            cfg.kappa_t_max = std::stod(value);
        } else if (key == "kappa_t_steps") {
            cfg.kappa_t_steps = std::stoi(value);
        } else if (key == "fock_n_max") {
            cfg.fock_n_max = std::stoi(value);
        } else {
            throw ConfigError("unknown config key: " + key);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("bad value for config key " + key + ": " + value);
    }
}

inline void load_config_file(CampaignConfig& cfg, const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file " + path);
    std::string line;
    while (std::getline(f, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line without '=': " + line);
        apply_config_line(cfg, detail::trim(line.substr(0, eq)),
                          detail::trim(line.substr(eq + 1)));
    }
}

// Raw per-trajectory outputs of one (delta, feedback) ensemble. Everything
// downstream (estimator rows, photon curves, consistency checks) reduces
// from these trajectory-ordered buffers.
struct DecodeEnsemble {
    double delta = 0.0;
    int rounds = 0;
    int n_traj = 0;
    FeedbackMode feedback = FeedbackMode::none;
    std::uint64_t seed = 0;
    std::vector<DecoderKind> decoders;

    // contrib[d][i * rounds + m]: residual error probability the trajectory
    // contributes if decoding stopped after round m+1.
    std::vector<std::vector<double>> contrib;
    std::vector<std::vector<int>> final_flip;  // [d][i]
    std::vector<double> nbar, dq_eff, dp_eff;  // [i * rounds + m]
    std::vector<int> final_bit;                // [i]

    int decoder_index(DecoderKind d) const {
        for (std::size_t k = 0; k < decoders.size(); ++k)
            if (decoders[k] == d) return static_cast<int>(k);
        throw ConfigError(std::string("decoder ") + to_string(d) +
                          " not available for feedback mode " + to_string(feedback));
    }
    double p_logical(DecoderKind d, int m) const {
        const auto& c = contrib[decoder_index(d)];
        double s = 0.0;
        for (int i = 0; i < n_traj; ++i) s += c[static_cast<std::size_t>(i) * rounds + m];
        return s / n_traj;
    }
    double std_error(DecoderKind d, int m) const {
        const double p = p_logical(d, m);
        return std::sqrt(std::max(p * (1.0 - p), 0.0) / n_traj);
    }
    // Sample standard deviation of the per-trajectory contributions.
    double mean_fluctuation(DecoderKind d, int m) const {
        const auto& c = contrib[decoder_index(d)];
        const double mean = p_logical(d, m);
        if (n_traj < 2) return 0.0;
        double s = 0.0;
        for (int i = 0; i < n_traj; ++i) {
            const double v = c[static_cast<std::size_t>(i) * rounds + m] - mean;
            s += v * v;
        }
        return std::sqrt(s / (n_traj - 1));
    }
    double mean_nbar(int m) const {
        double s = 0.0;
        for (int i = 0; i < n_traj; ++i) s += nbar[static_cast<std::size_t>(i) * rounds + m];
        return s / n_traj;
    }
    double mean_dq(int m) const {
        double s = 0.0;
        for (int i = 0; i < n_traj; ++i) s += dq_eff[static_cast<std::size_t>(i) * rounds + m];
        return s / n_traj;
    }
    double mean_dp(int m) const {
        double s = 0.0;
        for (int i = 0; i < n_traj; ++i) s += dp_eff[static_cast<std::size_t>(i) * rounds + m];
        return s / n_traj;
    }
};

inline std::vector<DecoderKind> decoders_for_feedback(FeedbackMode fb) {
    switch (fb) {
        case FeedbackMode::none:
            return {DecoderKind::mld, DecoderKind::forward, DecoderKind::passive};
        case FeedbackMode::recenter:
            return {DecoderKind::mld, DecoderKind::parity};
        default:
            return {DecoderKind::mld, DecoderKind::memoryless};
    }
}

inline DecodeEnsemble run_decode_ensemble(double delta, int rounds, int n_traj,
                                          FeedbackMode feedback, std::uint64_t seed,
                                          int workers) {
    if (rounds < 1) throw ConfigError("rounds must be at least 1");
    if (n_traj < 1) throw ConfigError("n_traj must be at least 1");
    const GridSpec grid = GridSpec::for_ec(delta);
    ec_context(grid, delta);  // build the shared context before threading
    const WaveFunction input = prepare_gkp(grid, GkpApprox{Kind::F, delta, Logical::zero});
    const double q0 = argmax_position(input);

    DecodeEnsemble e;
    e.delta = delta;
    e.rounds = rounds;
    e.n_traj = n_traj;
    e.feedback = feedback;
    e.seed = seed;
    e.decoders = decoders_for_feedback(feedback);
    const std::size_t cells = static_cast<std::size_t>(n_traj) * rounds;
    e.contrib.assign(e.decoders.size(), std::vector<double>(cells, 0.0));
    e.final_flip.assign(e.decoders.size(), std::vector<int>(n_traj, 0));
    e.nbar.assign(cells, 0.0);
    e.dq_eff.assign(cells, 0.0);
    e.dp_eff.assign(cells, 0.0);
    e.final_bit.assign(n_traj, 0);

    parallel_for(n_traj, workers, [&](int i) {
        const Trajectory traj =
            run_trajectory(input, delta, rounds, feedback, seed, static_cast<std::uint64_t>(i));
        EcRecord prefix;
        prefix.delta = delta;
        prefix.feedback_mode = feedback;
        prefix.master_seed = seed;
        prefix.traj_index = static_cast<std::uint64_t>(i);
        int memo_flip = 0;
        double fb_q_sum = 0.0;
        for (int m = 0; m < rounds; ++m) {
            const auto& round = traj.record.rounds[m];
            prefix.rounds.push_back(round);
            memo_flip ^= decompose_outcome(round.q_out).logical_l;
            fb_q_sum += round.fb_q;
            const double p0 = traj.diags[m].p0;
            const double p1 = traj.diags[m].p1;
            const std::size_t cell = static_cast<std::size_t>(i) * rounds + m;
            for (std::size_t d = 0; d < e.decoders.size(); ++d) {
                int flip = 0;
                switch (e.decoders[d]) {
                    case DecoderKind::mld: flip = p1 > p0 ? 1 : 0; break;
                    case DecoderKind::forward:
                        flip = forward_decode(prefix, delta, q0, false).flip;
                        break;
                    case DecoderKind::passive: flip = 0; break;
                    case DecoderKind::memoryless: flip = memo_flip; break;
                    case DecoderKind::parity: {
                        const long steps = std::lround(fb_q_sum / kSqrtPi);
                        flip = static_cast<int>(((steps % 2) + 2) % 2);
                        break;
                    }
                }
                e.contrib[d][cell] = flip ? p0 : p1;
                if (m == rounds - 1) e.final_flip[d][i] = flip;
            }
            e.nbar[cell] = traj.diags[m].nbar;
            e.dq_eff[cell] = traj.diags[m].dq_eff;
            e.dp_eff[cell] = traj.diags[m].dp_eff;
        }
        e.final_bit[i] = traj.final_homodyne_bit;
    });
    return e;
}

// Classical shift-model ensemble: per record, maximum-likelihood and naive
// parity decisions after every prefix, scored against the true coset.
struct StochasticEnsemble {
    double sigma0 = 0.0;
    int rounds = 0;
    int n_records = 0;
    std::uint64_t seed = 0;
    std::vector<int> ml_err;     // [i * rounds + m]
    std::vector<int> naive_err;  // [i * rounds + m]

    double p_logical(int m, bool naive = false) const {
        const auto& e = naive ? naive_err : ml_err;
        double s = 0.0;
        for (int i = 0; i < n_records; ++i) s += e[static_cast<std::size_t>(i) * rounds + m];
        return s / n_records;
    }
    double std_error(int m, bool naive = false) const {
        const double p = p_logical(m, naive);
        return std::sqrt(std::max(p * (1.0 - p), 0.0) / n_records);
    }
    double mean_fluctuation(int m, bool naive = false) const {
        if (n_records < 2) return 0.0;
        const double p = p_logical(m, naive);
        double s = 0.0;
        const auto& e = naive ? naive_err : ml_err;
        for (int i = 0; i < n_records; ++i) {
            const double v = e[static_cast<std::size_t>(i) * rounds + m] - p;
            s += v * v;
        }
        return std::sqrt(s / (n_records - 1));
    }
};

inline StochasticEnsemble run_stochastic_ensemble(double sigma0, int rounds, int n_records,
                                                  std::uint64_t seed, int workers) {
    StochasticEnsemble e;
    e.sigma0 = sigma0;
    e.rounds = rounds;
    e.n_records = n_records;
    e.seed = seed;
    const std::size_t cells = static_cast<std::size_t>(n_records) * rounds;
    e.ml_err.assign(cells, 0);
    e.naive_err.assign(cells, 0);
    parallel_for(n_records, workers, [&](int i) {
        Rng rng(seed, static_cast<std::uint64_t>(i));
        const ShiftTrajectory traj = simulate_stochastic(sigma0, rounds, rng);
        const auto decisions = ml_coset_decode_prefixes(traj.syndromes, sigma0);
        double syn_sum = 0.0;
        for (int m = 0; m < rounds; ++m) {
            const std::size_t cell = static_cast<std::size_t>(i) * rounds + m;
            e.ml_err[cell] = decisions[m].flip != traj.prefix_parity[m] ? 1 : 0;
            syn_sum += traj.syndromes[m];
            const int naive = static_cast<int>(((std::lround(syn_sum / kSqrtPi) % 2) + 2) % 2);
            e.naive_err[cell] = naive != traj.prefix_parity[m] ? 1 : 0;
        }
    });
    return e;
}

namespace detail {

inline void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create directory " + dir + ": " + ec.message());
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open " + path);
    return f;
}

}  // namespace detail

inline void write_manifest(const CampaignConfig& cfg, const std::string& note) {
    auto f = detail::open_out(cfg.out_dir + "/run_manifest.txt");
    f << "tool = " << kVersion << "\n";
    f << "experiment = " << cfg.experiment << "\n";
    f << "deltas =";
    for (double d : cfg.deltas) f << " " << detail::fmt(d);
    f << "\nrounds = " << cfg.rounds << "\n";
    f << "n_traj = " << cfg.n_traj << "\n";
    f << "seed = " << cfg.seed << "\n";
    f << "decoders =";
    for (auto d : cfg.decoders) f << " " << to_string(d);
    f << "\n";
    for (double d : cfg.deltas) {
        const GridSpec g = GridSpec::for_ec(d);
        f << "grid(delta=" << detail::fmt(d) << ") = L:" << detail::fmt(g.half_width)
          << " N:" << g.points << "\n";
    }
    if (!note.empty()) f << note << "\n";
}

struct ResultRow {
    double delta = 0.0;
    int rounds = 0;
    DecoderKind decoder = DecoderKind::mld;
    std::string feedback;
    int n_traj = 0;
    std::uint64_t seed = 0;
    double p_logical = 0.0;
    double std_err = 0.0;
    double mean_fluct = 0.0;
    double sigma0 = -1.0;       // < 0: column absent
    bool stochastic = false;
};

inline void write_results_csv(const std::vector<ResultRow>& rows, const std::string& path,
                              bool with_sigma0) {
    auto f = detail::open_out(path);
    f << "delta,M,decoder,feedback,n_traj,seed,p_logical,stderr,mean_fluctuation";
    if (with_sigma0) f << ",sigma0";
    f << "\n";
    for (const auto& r : rows) {
        f << detail::fmt(r.delta) << "," << r.rounds << ","
          << (r.stochastic ? "mld_stochastic" : to_string(r.decoder)) << "," << r.feedback
          << "," << r.n_traj << "," << r.seed << "," << detail::fmt(r.p_logical) << ","
          << detail::fmt(r.std_err) << "," << detail::fmt(r.mean_fluct);
        if (with_sigma0) {
            f << ",";
            if (r.sigma0 >= 0.0) f << detail::fmt(r.sigma0);
        }
        f << "\n";
    }
}

namespace detail {

struct CurveFile {
    std::string path;
    std::string title;
};

inline void write_curve(const std::string& path, const std::vector<double>& x,
                        const std::vector<double>& y, const std::vector<double>& yerr) {
    auto f = open_out(path);
    for (std::size_t i = 0; i < x.size(); ++i) {
        f << fmt(x[i]) << " " << fmt(y[i]);
        if (!yerr.empty()) f << " " << fmt(yerr[i]);
        f << "\n";
    }
}

inline void write_gnuplot(const std::string& path, const std::string& png,
                          const std::string& xlabel, const std::string& ylabel, bool logy,
                          const std::vector<CurveFile>& curves, bool with_err) {
    auto f = open_out(path);
    f << "set terminal pngcairo size 960,640\n";
    f << "set output '" << png << "'\n";
    f << "set xlabel '" << xlabel << "'\n";
    f << "set ylabel '" << ylabel << "'\n";
    if (logy) f << "set logscale y\n";
    f << "set key outside\n";
    f << "plot ";
    for (std::size_t i = 0; i < curves.size(); ++i) {
        if (i) f << ", \\\n     ";
        f << "'" << curves[i].path << "' using 1:2";
        if (with_err) f << ":3 with yerrorlines";
        else f << " with linespoints";
        f << " title '" << curves[i].title << "'";
    }
    f << "\n";
}

}  // namespace detail

// Experiment: full decoder comparison. One ensemble per needed feedback mode
// per delta; every decoder is scored on the ensemble it physically belongs
// to (mld/forward/passive on none, parity on recenter, memoryless on its own
// feedback mode).
inline std::vector<ResultRow> experiment_decode(const CampaignConfig& cfg,
                                                bool emit_files = true) {
    const int workers = cfg.effective_workers();
    std::vector<ResultRow> rows;
    std::vector<detail::CurveFile> curves;
    if (emit_files) {
        detail::ensure_dir(cfg.out_dir);
        detail::ensure_dir(cfg.out_dir + "/plot_data");
    }
    for (double delta : cfg.deltas) {
        std::vector<std::pair<FeedbackMode, DecodeEnsemble>> ensembles;
        const auto need = [&](FeedbackMode fb) -> const DecodeEnsemble& {
            for (auto& [mode, ens] : ensembles)
                if (mode == fb) return ens;
            ensembles.emplace_back(
                fb, run_decode_ensemble(delta, cfg.rounds, cfg.n_traj, fb, cfg.seed, workers));
            return ensembles.back().second;
        };
        for (DecoderKind d : cfg.decoders) {
            FeedbackMode fb = FeedbackMode::none;
            if (d == DecoderKind::parity) fb = FeedbackMode::recenter;
            if (d == DecoderKind::memoryless) fb = FeedbackMode::memoryless;
            const DecodeEnsemble& ens = need(fb);
            std::vector<double> xs, ys, es;
            for (int m = 0; m < cfg.rounds; ++m) {
                ResultRow r;
                r.delta = delta;
                r.rounds = m + 1;
                r.decoder = d;
                r.feedback = to_string(fb);
                r.n_traj = cfg.n_traj;
                r.seed = cfg.seed;
                r.p_logical = ens.p_logical(d, m);
                r.std_err = ens.std_error(d, m);
                r.mean_fluct = ens.mean_fluctuation(d, m);
                rows.push_back(r);
                xs.push_back(m + 1);
                ys.push_back(r.p_logical);
                es.push_back(r.std_err);
            }
            if (emit_files) {
                std::ostringstream name;
                name << "plot_data/sim_" << detail::fmt(delta) << "_" << to_string(d) << ".dat";
                detail::write_curve(cfg.out_dir + "/" + name.str(), xs, ys, es);
                curves.push_back({name.str(), "delta=" + detail::fmt(delta) + " " +
                                                  to_string(d)});
            }
        }
        if (emit_files && cfg.log_trajectories > 0) {
            std::vector<Trajectory> trajs;
            const GridSpec grid = GridSpec::for_ec(delta);
            const WaveFunction input =
                prepare_gkp(grid, GkpApprox{Kind::F, delta, Logical::zero});
            for (int i = 0; i < cfg.log_trajectories; ++i)
                trajs.push_back(run_trajectory(input, delta, cfg.rounds, FeedbackMode::none,
                                               cfg.seed, static_cast<std::uint64_t>(i)));
            std::ostringstream name;
            name << cfg.out_dir << "/trajectories_" << detail::fmt(delta) << ".csv";
            write_trajectory_csv(trajs, name.str());
        }
    }
    if (emit_files) {
        write_results_csv(rows, cfg.out_dir + "/results.csv", false);
        detail::write_gnuplot(cfg.out_dir + "/sim.gp", "sim.png", "rounds M",
                              "logical error probability", true, curves, true);
        write_manifest(cfg, "");
    }
    return rows;
}

// Experiment: mld with and without recenter feedback, plus per-round state
// diagnostics (photon number, effective squeezing).
inline std::vector<ResultRow> experiment_decode_feedback(const CampaignConfig& cfg,
                                                         bool emit_files = true) {
    const int workers = cfg.effective_workers();
    std::vector<ResultRow> rows;
    std::vector<detail::CurveFile> curves, photon_curves, squeeze_curves;
    if (emit_files) {
        detail::ensure_dir(cfg.out_dir);
        detail::ensure_dir(cfg.out_dir + "/plot_data");
    }
    std::ostringstream diag_csv;
    diag_csv << "delta,feedback,round,nbar,dq_eff,dp_eff\n";
    for (double delta : cfg.deltas) {
        for (FeedbackMode fb : {FeedbackMode::none, FeedbackMode::recenter}) {
            const DecodeEnsemble ens =
                run_decode_ensemble(delta, cfg.rounds, cfg.n_traj, fb, cfg.seed, workers);
            std::vector<double> xs, ys, es, nb, dq, dp;
            for (int m = 0; m < cfg.rounds; ++m) {
                ResultRow r;
                r.delta = delta;
                r.rounds = m + 1;
                r.decoder = DecoderKind::mld;
                r.feedback = to_string(fb);
                r.n_traj = cfg.n_traj;
                r.seed = cfg.seed;
                r.p_logical = ens.p_logical(DecoderKind::mld, m);
                r.std_err = ens.std_error(DecoderKind::mld, m);
                r.mean_fluct = ens.mean_fluctuation(DecoderKind::mld, m);
                rows.push_back(r);
                xs.push_back(m + 1);
                ys.push_back(r.p_logical);
                es.push_back(r.std_err);
                nb.push_back(ens.mean_nbar(m));
                dq.push_back(ens.mean_dq(m));
                dp.push_back(ens.mean_dp(m));
                diag_csv << detail::fmt(delta) << "," << to_string(fb) << "," << m + 1 << ","
                         << detail::fmt(nb.back()) << "," << detail::fmt(dq.back()) << ","
                         << detail::fmt(dp.back()) << "\n";
            }
            if (emit_files) {
                const std::string tag =
                    detail::fmt(delta) + "_" + to_string(fb);
                detail::write_curve(cfg.out_dir + "/plot_data/mld_" + tag + ".dat", xs, ys, es);
                curves.push_back({"plot_data/mld_" + tag + ".dat",
                                  "delta=" + detail::fmt(delta) + " " + to_string(fb)});
                detail::write_curve(cfg.out_dir + "/plot_data/nbar_" + tag + ".dat", xs, nb, {});
                photon_curves.push_back({"plot_data/nbar_" + tag + ".dat",
                                         "delta=" + detail::fmt(delta) + " " + to_string(fb)});
                detail::write_curve(cfg.out_dir + "/plot_data/dq_" + tag + ".dat", xs, dq, {});
                detail::write_curve(cfg.out_dir + "/plot_data/dp_" + tag + ".dat", xs, dp, {});
                squeeze_curves.push_back({"plot_data/dq_" + tag + ".dat",
                                          "dq delta=" + detail::fmt(delta) + " " +
                                              to_string(fb)});
                squeeze_curves.push_back({"plot_data/dp_" + tag + ".dat",
                                          "dp delta=" + detail::fmt(delta) + " " +
                                              to_string(fb)});
            }
        }
    }
    if (emit_files) {
        write_results_csv(rows, cfg.out_dir + "/results_feedback.csv", false);
        auto f = detail::open_out(cfg.out_dir + "/diagnostics.csv");
        f << diag_csv.str();
        detail::write_gnuplot(cfg.out_dir + "/feedback.gp", "feedback.png", "rounds M",
                              "logical error probability", true, curves, true);
        detail::write_gnuplot(cfg.out_dir + "/photons.gp", "photons.png", "round",
                              "mean photon number", false, photon_curves, false);
        detail::write_gnuplot(cfg.out_dir + "/effsq.gp", "effsq.png", "round",
                              "effective squeezing", false, squeeze_curves, false);
        write_manifest(cfg, "");
    }
    return rows;
}

// Experiment: coherent simulation against the classical shift model at the
// two noise-matching conventions.
inline std::vector<ResultRow> experiment_stoch_compare(const CampaignConfig& cfg,
                                                       bool emit_files = true) {
    const int workers = cfg.effective_workers();
    std::vector<ResultRow> rows;
    std::vector<detail::CurveFile> curves;
    if (emit_files) {
        detail::ensure_dir(cfg.out_dir);
        detail::ensure_dir(cfg.out_dir + "/plot_data");
    }
    for (double delta : cfg.deltas) {
        const DecodeEnsemble coherent = run_decode_ensemble(
            delta, cfg.rounds, cfg.n_traj, FeedbackMode::none, cfg.seed, workers);
        std::vector<double> xs, ys, es;
        for (int m = 0; m < cfg.rounds; ++m) {
            ResultRow r;
            r.delta = delta;
            r.rounds = m + 1;
            r.decoder = DecoderKind::mld;
            r.feedback = "none";
            r.n_traj = cfg.n_traj;
            r.seed = cfg.seed;
            r.p_logical = coherent.p_logical(DecoderKind::mld, m);
            r.std_err = coherent.std_error(DecoderKind::mld, m);
            r.mean_fluct = coherent.mean_fluctuation(DecoderKind::mld, m);
            rows.push_back(r);
            xs.push_back(m + 1);
            ys.push_back(r.p_logical);
            es.push_back(r.std_err);
        }
        if (emit_files) {
            const std::string name = "plot_data/coherent_" + detail::fmt(delta) + ".dat";
            detail::write_curve(cfg.out_dir + "/" + name, xs, ys, es);
            curves.push_back({name, "coherent mld delta=" + detail::fmt(delta)});
        }
        for (NoiseConvention conv : {NoiseConvention::half, NoiseConvention::full}) {
            const double sigma0 = gaussian_displacement_params(delta, conv);
            const StochasticEnsemble stoch =
                run_stochastic_ensemble(sigma0, cfg.rounds, cfg.n_traj, cfg.seed, workers);
            std::vector<double> sxs, sys, ses;
            for (int m = 0; m < cfg.rounds; ++m) {
                ResultRow r;
                r.delta = delta;
                r.rounds = m + 1;
                r.feedback = "none";
                r.n_traj = cfg.n_traj;
                r.seed = cfg.seed;
                r.p_logical = stoch.p_logical(m);
                r.std_err = stoch.std_error(m);
                r.mean_fluct = stoch.mean_fluctuation(m);
                r.sigma0 = sigma0;
                r.stochastic = true;
                rows.push_back(r);
                sxs.push_back(m + 1);
                sys.push_back(r.p_logical);
                ses.push_back(r.std_err);
            }
            if (emit_files) {
                const std::string name = "plot_data/stoch_" + detail::fmt(delta) + "_" +
                                         (conv == NoiseConvention::half ? "half" : "full") +
                                         ".dat";
                detail::write_curve(cfg.out_dir + "/" + name, sxs, sys, ses);
                curves.push_back({name, "shift model sigma0=" + detail::fmt(sigma0)});
            }
        }
    }
    if (emit_files) {
        write_results_csv(rows, cfg.out_dir + "/results_stochastic.csv", true);
        detail::write_gnuplot(cfg.out_dir + "/stoch_compare.gp", "stoch_compare.png",
                              "rounds M", "logical error probability", true, curves, true);
        write_manifest(cfg, "");
    }
    return rows;
}

// Experiment: photon-number expansions of the three comb states.
inline void experiment_fock(const CampaignConfig& cfg) {
    detail::ensure_dir(cfg.out_dir);
    const double delta = cfg.deltas.empty() ? 0.3 : cfg.deltas.front();
    std::vector<detail::CurveFile> curves;
    for (StateKind kind : {StateKind::gkp0, StateKind::gkp1, StateKind::sensor}) {
        const FockExpansion e = fock_coeffs(delta, kind, cfg.fock_n_max);
        const std::string name = std::string("fock_") + to_string(kind) + ".csv";
        write_fock_csv(e, cfg.out_dir + "/" + name);
        curves.push_back({name, std::string(to_string(kind)) + " |c_n|^2"});
    }
    auto f = detail::open_out(cfg.out_dir + "/fock.gp");
    f << "set terminal pngcairo size 1200,480\n";
    f << "set output 'fock.png'\n";
    f << "set datafile separator ','\n";
    f << "set multiplot layout 1,3\n";
    for (const auto& c : curves) {
        f << "set title '" << c.title << "'\n";
        f << "set xlabel 'n'\nset ylabel 'probability'\n";
        f << "plot '" << c.path << "' skip 2 using 1:3 with impulses title 'state', \\\n"
          << "     '" << c.path << "' skip 2 using 1:4 with lines title 'thermal'\n";
    }
    f << "unset multiplot\n";
    write_manifest(cfg, "fock_delta = " + detail::fmt(delta));
}

// Experiment: logical survival of a position comb under photon loss.
inline void experiment_loss(const CampaignConfig& cfg) {
    detail::ensure_dir(cfg.out_dir);
    const double delta = cfg.deltas.empty() ? 0.3 : cfg.deltas.front();
    const GridSpec grid = GridSpec::suggest(delta);
    const WaveFunction psi = prepare_gkp(grid, GkpApprox{Kind::F, delta, Logical::zero});
    const QDensity start = density_of(psi);
    std::vector<double> kts, pc;
    std::vector<std::complex<double>> expect;
    for (int i = 0; i < cfg.kappa_t_steps; ++i) {
        const double kt = cfg.kappa_t_max * i / std::max(cfg.kappa_t_steps - 1, 1);
        const QDensity evolved = ou_evolve(start, LossParams{kt});
        const auto [p0, p1] = homodyne_logical_prob(evolved);
        std::complex<double> z = 0.0;
        for (int j = 0; j < grid.points; ++j) {
            const double ph = kSqrtPi * grid.q(j);
            z += evolved.p[j] * std::complex<double>(std::cos(ph), std::sin(ph));
        }
        z *= grid.spacing();
        kts.push_back(kt);
        pc.push_back(p0);
        expect.push_back(z);
        (void)p1;
    }
    write_loss_csv(kts, pc, expect, cfg.out_dir + "/loss.csv");
    auto f = detail::open_out(cfg.out_dir + "/loss.gp");
    f << "set terminal pngcairo size 960,640\n"
      << "set output 'loss.png'\n"
      << "set datafile separator ','\n"
      << "set xlabel 'kappa t'\nset ylabel 'P(correct bin)'\n"
      << "plot 'loss.csv' skip 1 using 1:2 with linespoints title 'delta="
      << detail::fmt(delta) << "'\n";
    write_manifest(cfg, "loss_delta = " + detail::fmt(delta));
}

// Experiment: run every spectral / algebraic code check and write a report.
inline void experiment_codes(const CampaignConfig& cfg) {
    detail::ensure_dir(cfg.out_dir);
    auto f = detail::open_out(cfg.out_dir + "/codes_report.txt");
    const int n_cut = 60;

    {
        CodePair kitten = kitten_code(20);
        kitten.errors = loss_errors_identity(0.01, 20);
        const QecReport r1 = qec_check(kitten, 1e-12);
        f << "kitten {I, sqrt(g) a}: " << (r1.pass ? "pass" : "fail")
          << " balance=" << detail::fmt(r1.dev_balance)
          << " offdiag=" << detail::fmt(r1.dev_offdiag) << "\n";
        kitten.errors = loss_errors_kraus(0.01, 20);
        const QecReport r2 = qec_check(kitten, 1e-12);
        f << "kitten no-jump Kraus: " << (r2.pass ? "pass" : "fail")
          << " balance=" << detail::fmt(r2.dev_balance) << " (expected order 2 g^2)\n";
        CodePair two = two_mode_kitten_code(20);
        two.errors = two_mode_loss_errors(0.01, 20);
        const QecReport r3 = qec_check(two, 1e-12);
        f << "two-mode kitten Kraus: " << (r3.pass ? "pass" : "fail")
          << " balance=" << detail::fmt(r3.dev_balance)
          << " offdiag=" << detail::fmt(r3.dev_offdiag) << "\n";
    }
    {
        const auto roots = cat_sweet_spots(4);
        f << "cat sweet spots:";
        for (double r : roots) f << " " << detail::fmt(r);
        f << "\n";
    }
    {
        const KerrCatReport r = kerr_cat_spectrum(1.0, 6.25, n_cut);
        f << "kerr cat: top=" << detail::fmt(r.top_value)
          << " splitting=" << detail::fmt(r.pair_splitting)
          << " gap=" << detail::fmt(r.gap_to_third)
          << " overlap_even=" << detail::fmt(r.overlap_even)
          << " overlap_odd=" << detail::fmt(r.overlap_odd)
          << " stab_residual=" << detail::fmt(r.stabilizer_residual) << "\n";
    }
    f << "dissipative fixed point residual (alpha=1.5): "
      << detail::fmt(dissipative_fixed_point_check(1.5, n_cut)) << "\n";
    {
        const BlochMessiahReport r = bloch_messiah_cnot();
        f << "coupler decomposition: dev_A=" << detail::fmt(r.recon_dev_a)
          << " dev_B=" << detail::fmt(r.recon_dev_b)
          << " symplectic=" << detail::fmt(r.symplectic_dev)
          << " xi=" << detail::fmt(r.squeeze_xi) << "\n";
    }
    {
        const CodePair kitten = kitten_code(20);
        f << "rotation check kitten word0 S=1: "
          << detail::fmt(rotation_symmetry_check(kitten.word0, 1).real()) << "\n";
        const CodePair cat = four_cat_code(cat_sweet_spots(1).front(), n_cut);
        f << "rotation check 4-cat word0 S=3: "
          << detail::fmt(rotation_symmetry_check(cat.word0, 3).real()) << "\n";
    }
    write_manifest(cfg, "");
}

inline void run_campaign(const CampaignConfig& cfg) {
    if (cfg.experiment == "decode")
        experiment_decode(cfg);
    else if (cfg.experiment == "decode_feedback")
        experiment_decode_feedback(cfg);
    else if (cfg.experiment == "stoch_compare")
        experiment_stoch_compare(cfg);
    else if (cfg.experiment == "fock")
        experiment_fock(cfg);
    else if (cfg.experiment == "loss")
        experiment_loss(cfg);
    else if (cfg.experiment == "codes")
        experiment_codes(cfg);
    else
        throw ConfigError("unknown experiment: " + cfg.experiment);
}

}  // namespace gkpsim
