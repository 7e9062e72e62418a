#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mxpl/asymptotics.hpp"
#include "mxpl/crt.hpp"
#include "mxpl/knockoff.hpp"
#include "mxpl/model_gen.hpp"

namespace mxpl {

enum class Setting { focal, full, retrospective, unlabeled };

/// Model parameters before a sweep value is applied. Dimensions are given as
/// p and ratios so a sweep over n/p keeps p fixed.
struct ModelTemplate {
    Setting setting = Setting::focal;
    int p = 200;
    double n_over_p = 2.5;
    double n_star_over_p = 0.0;
    double sigma2 = 1.0;
    double h = 0.0;
    /// Explicit atoms; used when signal_tied_to_h is false.
    std::vector<Atom> atoms{{0.0, 1.0}};
    /// gamma delta_0 + (1 - gamma) delta_h, with h the current h value.
    bool signal_tied_to_h = false;
    double gamma = 0.9;
    /// Screening threshold in units of sqrt(sigma2 + v_Z^2).
    double screen_c = 0.0;

    int n() const;
    double kappa() const { return 1.0 / n_over_p; }
    SignalMixture signal() const;
    double v_z2() const { return kappa() * signal().second_moment(); }
    ModelConfig model_config(std::uint64_t seed, std::uint64_t replicate) const;
};

enum class ProcedureKind { crt, conditional_crt, bh, adapt, knockoff };

struct MethodSpec {
    ProcedureKind procedure = ProcedureKind::crt;
    /// mc, ols, distilled (CRT family) or mc, ols, lasso (knockoffs).
    std::string statistic = "mc";
    Sided sided = Sided::one_sided_upper;
    double level = 0.05;
    PMethod pvalue = PMethod::analytic;
    int M = 999;
    Antisym antisym = Antisym::abs_difference;
    /// "min_tau", "sweep", or a number.
    std::string lambda = "min_tau";
    bool known_variance = true;
    double signal_scale = 1.0;
    bool theory_only = false;
    bool theory = true;
    std::string label;
};

struct SweepSpec {
    std::string parameter = "h";
    std::vector<double> values{0.0};
};

struct Panel {
    std::string label;
    nlohmann::json overrides = nlohmann::json::object();
};

struct ExperimentConfig {
    int schema = 1;
    std::string name;
    std::string figure;
    std::string comment;
    /// "simulation" or "theory".
    std::string kind = "simulation";
    /// Raw model object; panels patch it before parsing.
    nlohmann::json model_json = nlohmann::json::object();
    ModelTemplate model;
    std::vector<Panel> panels;
    SweepSpec sweep;
    std::vector<MethodSpec> methods;
    int replicates = 100;
    std::uint64_t seed = 1;
    std::string output_path;

    void validate() const;
};

ModelTemplate parse_model(const nlohmann::json& j);

/// Parses a schema-1 config. With full = true the "full" object is merged
/// over the top-level fields first.
ExperimentConfig parse_config(const nlohmann::json& j, bool full = false);
ExperimentConfig load_config(const std::string& path, bool full = false);

struct ResultRow {
    std::string experiment;
    std::string method;
    double sweep_value = 0.0;
    std::string metric;
    double estimate = 0.0;
    double std_error = 0.0;
    int replicates_used = 0;
};

/// Runs every panel, sweep value and method; appends theory rows. Output is
/// independent of the thread count.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config, int threads = 1);

/// Theory values for every panel, sweep value and method.
std::vector<TheoryRow> run_theory(const ExperimentConfig& config);

void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& out);
std::vector<ResultRow> read_results_csv(std::istream& in);

/// Joins empirical rows with their theory rows:
/// experiment,method,sweep_value,metric,empirical,std_error,theory,z_score.
void write_comparison_csv(const std::vector<ResultRow>& rows, std::ostream& out);

std::string method_label(const MethodSpec& m);

/// Thread count from MXPL_THREADS, else the hardware concurrency.
int default_threads();

/// Runs body(i) for i in [0, count) on up to `threads` workers; rethrows the
/// first failure by index.
void parallel_for(int count, int threads, const std::function<void(int)>& body);

}  // namespace mxpl
