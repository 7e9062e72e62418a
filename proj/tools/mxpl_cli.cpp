#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mxpl/harness.hpp"

namespace fs = std::filesystem;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> replicates;
    std::string out;
    int threads = 0;
    bool full = false;
};

void add_common(CLI::App* app, Common& c, bool needs_config) {
    auto* opt = app->add_option("--config", c.config, "experiment config (JSON)");
    if (needs_config) opt->required();
    app->add_option("--seed", c.seed, "override the config seed");
    app->add_option("--replicates", c.replicates, "override the replicate count")->check(CLI::PositiveNumber);
    app->add_option("--out", c.out, "output path (default: standard output)");
    app->add_option("--threads", c.threads, "worker threads (default: MXPL_THREADS or all cores)");
    app->add_flag("--full", c.full, "use the full-scale settings of the config");
}

mxpl::ExperimentConfig load(const std::string& path, const Common& c) {
    mxpl::ExperimentConfig config = mxpl::load_config(path, c.full);
    if (c.seed) config.seed = *c.seed;
    if (c.replicates) config.replicates = *c.replicates;
    return config;
}

int threads_of(const Common& c) { return c.threads > 0 ? c.threads : mxpl::default_threads(); }

// Output is buffered so a failure never leaves a partial file behind.
void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    std::ofstream out(target, std::ios::binary);
    if (!out) throw mxpl::Error("cannot write " + path);
    out << text;
    if (!out) throw mxpl::Error("failed writing " + path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conditional randomization tests, knockoffs and their asymptotic power"};
    app.require_subcommand(1);

    Common theory_opts;
    auto* theory = app.add_subcommand("theory", "emit asymptotic curves for a config");
    add_common(theory, theory_opts, true);

    Common sim_opts;
    auto* simulate = app.add_subcommand("simulate", "run a Monte Carlo experiment");
    add_common(simulate, sim_opts, true);

    Common cmp_opts;
    std::string cmp_input;
    auto* compare = app.add_subcommand("compare", "join empirical rows with theory rows");
    add_common(compare, cmp_opts, false);
    compare->add_option("--input", cmp_input, "existing results CSV instead of running --config");

    Common fig_opts;
    std::vector<std::string> only;
    std::string config_dir = MXPL_CONFIG_DIR;
    auto* figures = app.add_subcommand("figures", "run the bundled figure configs");
    add_common(figures, fig_opts, false);
    figures->add_option("--only", only, "config names to run, e.g. fig8");
    figures->add_option("--config-dir", config_dir, "directory holding fig*.json");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*theory) {
            const auto config = load(theory_opts.config, theory_opts);
            std::ostringstream s;
            mxpl::write_theory_csv(mxpl::run_theory(config), s);
            emit(s.str(), theory_opts.out);
        } else if (*simulate) {
            const auto config = load(sim_opts.config, sim_opts);
            std::ostringstream s;
            mxpl::write_results_csv(mxpl::run_experiment(config, threads_of(sim_opts)), s);
            emit(s.str(), sim_opts.out);
        } else if (*compare) {
            std::vector<mxpl::ResultRow> rows;
            if (!cmp_input.empty()) {
                std::ifstream in(cmp_input);
                if (!in) throw mxpl::Error("cannot open " + cmp_input);
                rows = mxpl::read_results_csv(in);
            } else if (!cmp_opts.config.empty()) {
                rows = mxpl::run_experiment(load(cmp_opts.config, cmp_opts), threads_of(cmp_opts));
            } else {
                throw mxpl::Error("compare needs --config or --input");
            }
            std::ostringstream s;
            mxpl::write_comparison_csv(rows, s);
            emit(s.str(), cmp_opts.out);
        } else if (*figures) {
            if (only.empty())
                for (int k = 1; k <= 8; ++k) only.push_back("fig" + std::to_string(k));
            std::vector<mxpl::ExperimentConfig> configs;
            for (const auto& name : only) configs.push_back(load((fs::path(config_dir) / (name + ".json")).string(), fig_opts));
            const std::string out_dir = fig_opts.out.empty() ? "." : fig_opts.out;
            for (std::size_t k = 0; k < configs.size(); ++k) {
                std::cerr << "mxpl: running " << only[k] << " (" << configs[k].figure << ")\n";
                std::ostringstream s;
                mxpl::write_results_csv(mxpl::run_experiment(configs[k], threads_of(fig_opts)), s);
                emit(s.str(), (fs::path(out_dir) / (only[k] + ".csv")).string());
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "mxpl: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
