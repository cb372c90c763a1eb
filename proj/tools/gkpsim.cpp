#include <array>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gkpsim/campaign.hpp"

namespace {

using gkpsim::CampaignConfig;

void add_common_options(CLI::App* sub, CampaignConfig& cfg, std::string& config_path,
                        std::vector<double>& deltas, std::vector<std::string>& decoders) {
    sub->add_option("--config", config_path, "key = value configuration file");
    sub->add_option("--delta", deltas, "envelope width(s)");
    sub->add_option("--rounds,-M", cfg.rounds, "number of correction rounds");
    sub->add_option("--trajectories,-n", cfg.n_traj, "trajectories per ensemble");
    sub->add_option("--decoders", decoders, "subset of mld,forward,passive,memoryless,parity");
    sub->add_option("--seed", cfg.seed, "master seed");
    sub->add_option("--workers", cfg.workers, "worker threads (0: auto)");
    sub->add_option("--out,-o", cfg.out_dir, "output directory");
}

// CLI flags override the config file, so defer assembly until after parsing.
void finalize(CampaignConfig& cfg, const std::string& config_path,
              const std::vector<double>& deltas, const std::vector<std::string>& decoders,
              const CampaignConfig& defaults) {
    if (!config_path.empty()) {
        CampaignConfig from_file = defaults;
        from_file.experiment = cfg.experiment;
        gkpsim::load_config_file(from_file, config_path);
        from_file.experiment = cfg.experiment;
        // Fields still at their defaults take the file value.
        if (cfg.rounds == defaults.rounds) cfg.rounds = from_file.rounds;
        if (cfg.n_traj == defaults.n_traj) cfg.n_traj = from_file.n_traj;
        if (cfg.seed == defaults.seed) cfg.seed = from_file.seed;
        if (cfg.workers == defaults.workers) cfg.workers = from_file.workers;
        if (cfg.out_dir == defaults.out_dir) cfg.out_dir = from_file.out_dir;
        if (cfg.log_trajectories == defaults.log_trajectories)
            cfg.log_trajectories = from_file.log_trajectories;
        if (cfg.kappa_t_max == defaults.kappa_t_max) cfg.kappa_t_max = from_file.kappa_t_max;
        if (cfg.kappa_t_steps == defaults.kappa_t_steps)
            cfg.kappa_t_steps = from_file.kappa_t_steps;
        if (cfg.fock_n_max == defaults.fock_n_max) cfg.fock_n_max = from_file.fock_n_max;
        if (deltas.empty()) cfg.deltas = from_file.deltas;
        if (decoders.empty()) cfg.decoders = from_file.decoders;
    }
    if (!deltas.empty()) cfg.deltas = deltas;
    if (!decoders.empty()) {
        cfg.decoders.clear();
        for (const auto& name : decoders) cfg.decoders.push_back(gkpsim::decoder_from_string(name));
    }
    if (cfg.deltas.empty()) throw gkpsim::ConfigError("at least one delta is required");
    for (double d : cfg.deltas)
        if (!(d > 0.0) || !(d < 1.0))
            throw gkpsim::ConfigError("delta must lie in (0, 1)");
    if (cfg.rounds < 1) throw gkpsim::ConfigError("rounds must be at least 1");
    if (cfg.n_traj < 1) throw gkpsim::ConfigError("trajectories must be at least 1");
    if (cfg.workers < 0) throw gkpsim::ConfigError("workers must be >= 0");
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int col(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        throw gkpsim::ConfigError("csv column not found: " + name);
    }
};

CsvTable read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw gkpsim::ConfigError("cannot open " + path);
    CsvTable t;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ss(line);
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (t.header.empty()) t.header = cells;
        else t.rows.push_back(cells);
    }
    if (t.header.empty()) throw gkpsim::ConfigError("empty csv: " + path);
    return t;
}

// Rebuild per-curve data files plus a gnuplot script from a previously
// written results table.
void plot_from_results(const std::string& data, const std::string& out_dir,
                       const std::string& figure) {
    const CsvTable t = read_csv(data);
    gkpsim::detail::ensure_dir(out_dir);
    gkpsim::detail::ensure_dir(out_dir + "/plot_data");
    std::map<std::string, std::vector<std::array<double, 3>>> curves;
    if (figure == "sim" || figure == "stoch_compare") {
        const int c_delta = t.col("delta");
        const int c_m = t.col("M");
        const int c_dec = t.col("decoder");
        const int c_p = t.col("p_logical");
        const int c_se = t.col("stderr");
        for (const auto& r : t.rows) {
            std::string key = r[c_delta] + "_" + r[c_dec];
            curves[key].push_back({std::stod(r[c_m]), std::stod(r[c_p]), std::stod(r[c_se])});
        }
    } else if (figure == "photons" || figure == "effsq") {
        const int c_delta = t.col("delta");
        const int c_fb = t.col("feedback");
        const int c_round = t.col("round");
        const int c_val = t.col(figure == "photons" ? "nbar" : "dq_eff");
        for (const auto& r : t.rows) {
            std::string key = r[c_delta] + "_" + r[c_fb];
            curves[key].push_back({std::stod(r[c_round]), std::stod(r[c_val]), 0.0});
        }
    } else {
        throw gkpsim::ConfigError("unknown plot figure: " + figure);
    }
    std::vector<gkpsim::detail::CurveFile> files;
    for (const auto& [key, pts] : curves) {
        const std::string rel = "plot_data/" + figure + "_" + key + ".dat";
        std::vector<double> x, y, e;
        for (const auto& p : pts) {
            x.push_back(p[0]);
            y.push_back(p[1]);
            e.push_back(p[2]);
        }
        const bool with_err = figure == "sim" || figure == "stoch_compare";
        gkpsim::detail::write_curve(out_dir + "/" + rel, x, y, with_err ? e : std::vector<double>{});
        files.push_back({rel, key});
    }
    const bool logy = figure == "sim" || figure == "stoch_compare";
    gkpsim::detail::write_gnuplot(out_dir + "/" + figure + ".gp", figure + ".png",
                                  logy ? "rounds M" : "round",
                                  logy ? "logical error probability" : figure, logy, files,
                                  logy);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finitely squeezed comb-qubit simulator"};
    app.require_subcommand(1);

    const CampaignConfig defaults;
    CampaignConfig cfg;
    std::string config_path;
    std::vector<double> deltas;
    std::vector<std::string> decoder_names;
    bool feedback_sweep = false;

    CLI::App* sim = app.add_subcommand("simulate", "coherent error-correction campaign");
    add_common_options(sim, cfg, config_path, deltas, decoder_names);
    sim->add_flag("--feedback-sweep", feedback_sweep,
                  "compare recenter feedback against no feedback");
    sim->add_option("--log-trajectories", cfg.log_trajectories,
                    "additionally dump this many raw trajectories per delta");

    CLI::App* stoch = app.add_subcommand("stochastic",
                                         "classical shift model vs coherent simulation");
    add_common_options(stoch, cfg, config_path, deltas, decoder_names);

    CLI::App* fock = app.add_subcommand("fock", "photon-number expansions");
    fock->add_option("--delta", deltas, "envelope width");
    fock->add_option("--n-max", cfg.fock_n_max, "expansion cutoff (default: automatic)");
    fock->add_option("--out,-o", cfg.out_dir, "output directory");

    CLI::App* loss = app.add_subcommand("loss", "logical survival under photon loss");
    loss->add_option("--delta", deltas, "envelope width");
    loss->add_option("--kappa-t-max", cfg.kappa_t_max, "largest loss exponent");
    loss->add_option("--steps", cfg.kappa_t_steps, "number of loss values");
    loss->add_option("--out,-o", cfg.out_dir, "output directory");

    CLI::App* codes = app.add_subcommand("codes", "algebraic and spectral code checks");
    codes->add_option("--out,-o", cfg.out_dir, "output directory");

    CLI::App* plot = app.add_subcommand("plot", "regenerate gnuplot scripts from a results csv");
    std::string plot_figure = "sim";
    std::string plot_data;
    plot->add_option("--figure", plot_figure, "sim, stoch_compare, photons or effsq");
    plot->add_option("--data", plot_data, "input csv")->required();
    plot->add_option("--out,-o", cfg.out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (plot->parsed()) {
            plot_from_results(plot_data, cfg.out_dir, plot_figure);
            return 0;
        }
        if (sim->parsed()) cfg.experiment = feedback_sweep ? "decode_feedback" : "decode";
        else if (stoch->parsed()) cfg.experiment = "stoch_compare";
        else if (fock->parsed()) cfg.experiment = "fock";
        else if (loss->parsed()) cfg.experiment = "loss";
        else if (codes->parsed()) cfg.experiment = "codes";
        finalize(cfg, config_path, deltas, decoder_names, defaults);
        gkpsim::run_campaign(cfg);
        std::fprintf(stdout, "%s: experiment %s written to %s\n", gkpsim::kVersion,
                     cfg.experiment.c_str(), cfg.out_dir.c_str());
        return 0;
    } catch (const gkpsim::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const gkpsim::NumericalError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
