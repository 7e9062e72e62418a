#include "mxpl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <istream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "mxpl/amp.hpp"
#include "mxpl/selection.hpp"

namespace mxpl {

using nlohmann::json;

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

Setting parse_setting(const std::string& s) {
    if (s == "focal") return Setting::focal;
    if (s == "full") return Setting::full;
    if (s == "retrospective") return Setting::retrospective;
    if (s == "unlabeled") return Setting::unlabeled;
    throw Error("unknown setting: " + s);
}

ProcedureKind parse_procedure(const std::string& s) {
    if (s == "crt") return ProcedureKind::crt;
    if (s == "conditional_crt") return ProcedureKind::conditional_crt;
    if (s == "bh") return ProcedureKind::bh;
    if (s == "adapt") return ProcedureKind::adapt;
    if (s == "knockoff") return ProcedureKind::knockoff;
    throw Error("unknown procedure: " + s);
}

std::string procedure_name(ProcedureKind p) {
    switch (p) {
        case ProcedureKind::crt: return "crt";
        case ProcedureKind::conditional_crt: return "conditional_crt";
        case ProcedureKind::bh: return "bh";
        case ProcedureKind::adapt: return "adapt";
        case ProcedureKind::knockoff: return "knockoff";
    }
    return "unknown";
}

StatKind crt_stat(const std::string& s) {
    if (s == "mc") return StatKind::marginal_covariance;
    if (s == "ols") return StatKind::ols;
    if (s == "distilled" || s == "lasso") return StatKind::distilled_lasso;
    throw Error("unknown CRT statistic: " + s);
}

KnockoffStat knockoff_stat(const std::string& s) {
    if (s == "mc") return KnockoffStat::mc;
    if (s == "ols") return KnockoffStat::ols;
    if (s == "lasso" || s == "distilled") return KnockoffStat::lasso;
    throw Error("unknown knockoff statistic: " + s);
}

bool uses_lasso(const MethodSpec& m) { return m.statistic == "distilled" || m.statistic == "lasso"; }

MethodSpec parse_method(const json& j) {
    MethodSpec m;
    m.procedure = parse_procedure(j.at("procedure").get<std::string>());
    m.statistic = j.value("statistic", std::string("mc"));
    const bool multiple = m.procedure == ProcedureKind::bh || m.procedure == ProcedureKind::adapt ||
                          m.procedure == ProcedureKind::knockoff;
    const std::string sided = j.value("sided", std::string(multiple ? "two" : "one"));
    if (sided != "one" && sided != "two") throw Error("sided must be one or two");
    m.sided = sided == "two" ? Sided::two_sided : Sided::one_sided_upper;
    m.level = j.value("level", multiple ? 0.1 : 0.05);
    const std::string pv = j.value("pvalue", std::string(m.statistic == "ols" ? "exact" : "analytic"));
    if (pv == "analytic") m.pvalue = PMethod::analytic;
    else if (pv == "exact") m.pvalue = PMethod::exact_integral;
    else if (pv == "resampled") m.pvalue = PMethod::resampled;
    else throw Error("unknown p-value method: " + pv);
    m.M = j.value("M", 999);
    const std::string f = j.value("antisym", std::string("absdiff"));
    if (f != "diff" && f != "absdiff") throw Error("antisym must be diff or absdiff");
    m.antisym = f == "diff" ? Antisym::difference : Antisym::abs_difference;
    if (j.contains("lambda")) {
        const auto& l = j.at("lambda");
        m.lambda = l.is_number() ? fmt(l.get<double>()) : l.get<std::string>();
    }
    m.known_variance = j.value("known_variance", true);
    m.signal_scale = j.value("signal_scale", 1.0);
    m.theory_only = j.value("theory_only", false);
    m.theory = j.value("theory", true);
    m.label = j.value("label", std::string());
    if (!(m.level > 0.0 && m.level < 1.0)) throw Error("method level must lie in (0, 1)");
    return m;
}

SweepSpec parse_sweep(const json& j) {
    SweepSpec s;
    s.parameter = j.at("parameter").get<std::string>();
    if (j.contains("values")) {
        s.values = j.at("values").get<std::vector<double>>();
    } else if (j.contains("range")) {
        const auto& r = j.at("range");
        const double from = r.at("from").get<double>();
        const double to = r.at("to").get<double>();
        const int count = r.at("count").get<int>();
        const bool log_scale = r.value("log", false);
        if (count < 1) throw Error("sweep range needs count >= 1");
        if (log_scale && !(from > 0.0 && to > 0.0)) throw Error("log sweep needs positive ends");
        s.values.clear();
        for (int i = 0; i < count; ++i) {
            const double u = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
            s.values.push_back(log_scale ? from * std::pow(to / from, u) : from + (to - from) * u);
        }
    } else {
        throw Error("sweep needs values or range");
    }
    return s;
}

// A method with its lambda and state evolution resolved for one cell.
struct Resolved {
    MethodSpec spec;
    std::string label;
    double lambda = 0.0;
    std::optional<AmpSolution> amp;
    bool applicable = true;
};

struct Cell {
    std::string experiment;
    double sweep_value = 0.0;
    ModelTemplate model;
    std::vector<Resolved> methods;
};

void apply_sweep(ModelTemplate& m, const std::string& name, double v) {
    if (name == "h") m.h = v;
    else if (name == "n_over_p") m.n_over_p = v;
    else if (name == "n_star_over_p") m.n_star_over_p = v;
    else if (name == "sigma2") m.sigma2 = v;
    else if (name == "p") m.p = static_cast<int>(std::lround(v));
    else if (name == "screen_c") m.screen_c = v;
    else if (name == "gamma") m.gamma = v;
    else if (name != "lambda") throw Error("unknown sweep parameter: " + name);
}

bool applicable(const MethodSpec& m, const ModelTemplate& model) {
    const int n = model.n();
    const int p = model.p;
    switch (m.procedure) {
        case ProcedureKind::crt:
            if (model.setting != Setting::focal && model.setting != Setting::retrospective) return false;
            return m.statistic != "ols" || n - p >= 2;
        case ProcedureKind::conditional_crt:
            return model.setting == Setting::unlabeled && m.statistic == "mc";
        case ProcedureKind::bh:
        case ProcedureKind::adapt:
            if (model.setting != Setting::full) return false;
            return m.statistic != "ols" || n - p >= 1;
        case ProcedureKind::knockoff:
            if (model.setting != Setting::full) return false;
            return m.statistic != "ols" || 2 * p < n;
    }
    return false;
}

Resolved resolve(const MethodSpec& spec, const ModelTemplate& model, const std::string& sweep_param,
                 double sweep_value) {
    Resolved r;
    r.spec = spec;
    r.label = method_label(spec);
    r.applicable = applicable(spec, model);
    if (!r.applicable || !uses_lasso(spec)) return r;
    const bool doubled = spec.procedure == ProcedureKind::knockoff;
    const AmpProblem problem{model.kappa(), model.sigma2, model.signal().scaled(spec.signal_scale), doubled};
    if (spec.lambda == "min_tau") {
        r.amp = min_tau_over_lambda(problem);
    } else {
        const double lam = spec.lambda == "sweep" ? sweep_value : std::stod(spec.lambda);
        if (spec.lambda == "sweep" && sweep_param != "lambda") throw Error("lambda = sweep needs a lambda sweep");
        r.amp = solve_fixed_point(lam, problem);
    }
    r.lambda = r.amp->lambda;
    return r;
}

std::vector<Cell> build_cells(const ExperimentConfig& config) {
    std::vector<Panel> panels = config.panels;
    if (panels.empty()) panels.push_back(Panel{});
    std::vector<Cell> cells;
    for (const auto& panel : panels) {
        json mj = config.model_json;
        mj.merge_patch(panel.overrides);
        const ModelTemplate base = parse_model(mj);
        for (double v : config.sweep.values) {
            Cell c;
            c.experiment = panel.label.empty() ? config.name : config.name + "/" + panel.label;
            c.sweep_value = v;
            c.model = base;
            apply_sweep(c.model, config.sweep.parameter, v);
            for (const auto& m : config.methods) c.methods.push_back(resolve(m, c.model, config.sweep.parameter, v));
            cells.push_back(std::move(c));
        }
    }
    return cells;
}

struct TheoryValue {
    std::string suffix;
    std::string metric;
    double value;
    std::string flag;
};

std::vector<TheoryValue> theory_values(const ModelTemplate& model, const Resolved& r) {
    std::vector<TheoryValue> out;
    const MethodSpec& m = r.spec;
    const double kappa = model.kappa();
    const SignalMixture signal = model.signal();
    switch (m.procedure) {
        case ProcedureKind::crt: {
            const StatKind kind = crt_stat(m.statistic);
            double eff = 0.0;
            if (model.setting == Setting::retrospective) {
                if (kind != StatKind::marginal_covariance) return out;
                const double v2 = model.v_z2();
                eff = effect_size_retro(model.h, model.screen_c * std::sqrt(model.sigma2 + v2), model.sigma2, v2);
            } else if (kind == StatKind::marginal_covariance) {
                eff = effect_size_mc(model.h, kappa, model.sigma2, signal);
            } else if (kind == StatKind::ols) {
                if (!(kappa < 1.0)) return out;
                eff = effect_size_ols(model.h, kappa, model.sigma2);
            } else {
                eff = effect_size_distilled(model.h, *r.amp);
            }
            out.push_back({"", "power_limit", ztest_power(eff, m.level, m.sided), ""});
            break;
        }
        case ProcedureKind::conditional_crt: {
            const double kappa_star = model.n_over_p / model.n_star_over_p;
            const UnlabeledEffect e = effect_size_unlabeled(model.h, kappa, kappa_star, model.sigma2, model.v_z2());
            out.push_back({"_lower", "power_limit", ztest_power(e.lower, m.level, m.sided), "bound"});
            out.push_back({"_upper", "power_limit", ztest_power(e.upper, m.level, m.sided),
                           e.upper_clipped ? "bound_clipped" : "bound"});
            out.push_back({"_conjectured", "power_limit", ztest_power(e.conjectured, m.level, m.sided),
                           "conjectured"});
            break;
        }
        case ProcedureKind::bh:
        case ProcedureKind::adapt: {
            const StatKind kind = crt_stat(m.statistic);
            if (kind == StatKind::ols && !(kappa < 1.0)) return out;
            const double gamma = signal.null_weight();
            if (!(gamma > 0.0 && gamma < 1.0)) return out;
            const SignalMixture scaled = signal.scaled(m.signal_scale);
            const SignalMixture pi_mu =
                effective_pi_mu(kind, kappa, model.sigma2, scaled, r.amp ? r.amp->tau : 0.0);
            const LimitResult lr = limit_bh_adapt(pi_mu, gamma, m.level, m.sided,
                                                  m.procedure == ProcedureKind::bh ? Procedure::bh : Procedure::adapt);
            out.push_back({"", "power_limit", lr.power_limit, to_string(lr.case_tag)});
            out.push_back({"", "fdp_limit", lr.fdp_limit, to_string(lr.case_tag)});
            break;
        }
        case ProcedureKind::knockoff: {
            const KnockoffStat kind = knockoff_stat(m.statistic);
            if (kind == KnockoffStat::ols && !(2.0 * kappa < 1.0)) return out;
            const double gamma = signal.null_weight();
            if (!(gamma > 0.0 && gamma < 1.0)) return out;
            const KnockoffScenario sc{kind, m.antisym, kappa, model.sigma2, signal, m.signal_scale};
            const LimitResult lr = limit_knockoff(sc, m.level, r.amp ? &*r.amp : nullptr);
            out.push_back({"", "power_limit", lr.power_limit, to_string(lr.case_tag)});
            out.push_back({"", "fdp_limit", lr.fdp_limit, to_string(lr.case_tag)});
            break;
        }
    }
    return out;
}

struct Outcome {
    bool ok = true;
    double power = 0.0;
    double fdp = 0.0;
    std::string error;
};

std::vector<Outcome> run_replicate(const Cell& cell, std::uint64_t seed, int r) {
    std::vector<Outcome> out(cell.methods.size());
    bool any = false;
    for (const auto& m : cell.methods) any = any || (m.applicable && !m.spec.theory_only);
    if (!any) return out;
    const auto rep = static_cast<std::uint64_t>(r);
    Dataset data;
    try {
        data = generate(cell.model.model_config(seed, rep));
    } catch (const std::exception& e) {
        for (auto& o : out) o = Outcome{false, 0.0, 0.0, e.what()};
        return out;
    }
    std::map<std::pair<std::string, int>, Eigen::VectorXd> pval_cache;
    std::optional<Eigen::MatrixXd> knockoffs;

    for (std::size_t k = 0; k < cell.methods.size(); ++k) {
        const Resolved& rm = cell.methods[k];
        const MethodSpec& m = rm.spec;
        if (!rm.applicable || m.theory_only) continue;
        Outcome& o = out[k];
        try {
            switch (m.procedure) {
                case ProcedureKind::crt: {
                    const StatKind sk = crt_stat(m.statistic);
                    const CrtStatKind kind{sk, rm.lambda};
                    PValue pv;
                    if (m.pvalue == PMethod::resampled) pv = crt_pvalue_resampling(kind, data, m.M, m.sided, seed, rep);
                    else if (sk == StatKind::ols) pv = crt_pvalue_ols_exact(data, m.sided);
                    else pv = crt_pvalue_analytic(kind, data, m.sided);
                    o.power = pv.value <= m.level ? 1.0 : 0.0;
                    break;
                }
                case ProcedureKind::conditional_crt: {
                    const PValue pv = conditional_crt_unlabeled(data, m.known_variance, m.sided, m.M, seed, rep);
                    o.power = pv.value <= m.level ? 1.0 : 0.0;
                    break;
                }
                case ProcedureKind::bh:
                case ProcedureKind::adapt: {
                    const CrtStatKind kind{crt_stat(m.statistic), rm.lambda};
                    const auto key = std::make_pair(m.statistic + "/" + fmt(rm.lambda), static_cast<int>(m.sided));
                    auto it = pval_cache.find(key);
                    if (it == pval_cache.end()) it = pval_cache.emplace(key, crt_pvalues_all(kind, data, m.sided)).first;
                    SelectionResult sel = m.procedure == ProcedureKind::bh ? bh(it->second, m.level)
                                                                           : adapt(it->second, m.level);
                    score(sel, data.beta_truth);
                    o.power = sel.power;
                    o.fdp = sel.fdp;
                    break;
                }
                case ProcedureKind::knockoff: {
                    if (!knockoffs) knockoffs = sample_knockoffs_iid(data.X, seed, rep);
                    const WVector w =
                        w_statistics(data.X, *knockoffs, data.y, knockoff_stat(m.statistic), m.antisym, rm.lambda);
                    const KnockoffSelection ks = knockoff_threshold(w.w, m.level);
                    std::tie(o.fdp, o.power) = evaluate(ks.selected, data.beta_truth);
                    break;
                }
            }
        } catch (const std::exception& e) {
            o = Outcome{false, 0.0, 0.0, e.what()};
        }
    }
    return out;
}

std::pair<double, double> mean_se(const std::vector<double>& xs) {
    if (xs.empty()) return {0.0, 0.0};
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double mean = sum / xs.size();
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (xs.size() - 1) / xs.size())};
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

int ModelTemplate::n() const {
    const long n = std::lround(n_over_p * p);
    if (n < 1) throw Error("n/p gives fewer than one row");
    return static_cast<int>(n);
}

SignalMixture ModelTemplate::signal() const {
    if (signal_tied_to_h) return SignalMixture::sparse(gamma, h);
    return SignalMixture(atoms);
}

ModelConfig ModelTemplate::model_config(std::uint64_t seed, std::uint64_t replicate) const {
    ModelConfig c;
    c.n = n();
    c.p = p;
    c.sigma2 = sigma2;
    c.h = h;
    c.signal = signal();
    c.design = setting == Setting::full ? Design::full : Design::focal;
    c.seed = seed;
    c.replicate = replicate;
    if (setting == Setting::unlabeled) {
        const long total = std::lround(n_star_over_p * p);
        if (total < c.n) throw Error("n_* must be at least n");
        c.unlabeled_m = static_cast<int>(total - c.n);
    }
    if (setting == Setting::retrospective) c.screen_threshold = screen_c * std::sqrt(sigma2 + v_z2());
    return c;
}

ModelTemplate parse_model(const json& j) {
    ModelTemplate m;
    m.setting = parse_setting(j.value("setting", std::string("focal")));
    m.p = j.value("p", m.p);
    m.n_over_p = j.value("n_over_p", m.n_over_p);
    m.n_star_over_p = j.value("n_star_over_p", m.n_star_over_p);
    m.sigma2 = j.value("sigma2", m.sigma2);
    m.h = j.value("h", m.h);
    m.screen_c = j.value("screen_c", m.screen_c);
    if (j.contains("signal")) {
        const auto& s = j.at("signal");
        if (s.contains("atoms")) {
            m.atoms.clear();
            for (const auto& a : s.at("atoms")) m.atoms.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
        } else {
            m.gamma = s.at("gamma").get<double>();
            const auto& v = s.at("value");
            if (v.is_string()) {
                if (v.get<std::string>() != "h") throw Error("signal value must be a number or \"h\"");
                m.signal_tied_to_h = true;
            } else {
                m.atoms = {{0.0, m.gamma}, {v.get<double>(), 1.0 - m.gamma}};
            }
        }
    }
    if (m.p < 1) throw Error("p must be >= 1");
    if (!(m.n_over_p > 0.0)) throw Error("n_over_p must be positive");
    (void)m.signal();
    return m;
}

void ExperimentConfig::validate() const {
    if (schema != 1) throw Error("unsupported config schema");
    if (name.empty()) throw Error("config needs a name");
    if (kind != "simulation" && kind != "theory") throw Error("config kind must be simulation or theory");
    if (replicates < 1) throw Error("replicates must be >= 1");
    if (methods.empty()) throw Error("config needs at least one method");
    if (sweep.values.empty()) throw Error("sweep needs at least one value");
}

ExperimentConfig parse_config(const json& input, bool full) {
    json j = input;
    if (full && j.contains("full")) j.merge_patch(j.at("full"));
    ExperimentConfig c;
    c.schema = j.value("schema", 0);
    c.name = j.value("name", std::string());
    c.figure = j.value("figure", std::string());
    c.comment = j.value("comment", std::string());
    c.kind = j.value("kind", std::string("simulation"));
    c.model_json = j.value("model", json::object());
    c.model = parse_model(c.model_json);
    if (j.contains("panels"))
        for (const auto& p : j.at("panels")) {
            Panel panel;
            panel.label = p.at("label").get<std::string>();
            panel.overrides = p.value("model", json::object());
            c.panels.push_back(std::move(panel));
        }
    if (j.contains("sweep")) c.sweep = parse_sweep(j.at("sweep"));
    for (const auto& m : j.value("methods", json::array())) c.methods.push_back(parse_method(m));
    c.replicates = j.value("replicates", c.replicates);
    c.seed = j.value("seed", c.seed);
    c.output_path = j.value("output_path", std::string());
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path, bool full) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error("invalid JSON in " + path + ": " + e.what());
    }
    try {
        return parse_config(j, full);
    } catch (const json::exception& e) {
        throw Error("invalid config " + path + ": " + e.what());
    }
}

std::string method_label(const MethodSpec& m) {
    if (!m.label.empty()) return m.label;
    std::string s = procedure_name(m.procedure) + "_" + m.statistic;
    if (m.procedure == ProcedureKind::crt) {
        s += m.pvalue == PMethod::resampled ? "_resampled" : m.pvalue == PMethod::exact_integral ? "_exact" : "_analytic";
    }
    if (m.procedure == ProcedureKind::conditional_crt) s += m.known_variance ? "_known" : "_unknown";
    if (m.procedure == ProcedureKind::knockoff) s += "_" + to_string(m.antisym);
    else s += m.sided == Sided::two_sided ? "_two" : "_one";
    if (m.signal_scale != 1.0) s += "_x" + fmt(m.signal_scale);
    return s;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config, int threads) {
    config.validate();
    const std::vector<Cell> cells = build_cells(config);
    std::vector<ResultRow> rows;
    for (const Cell& cell : cells) {
        std::vector<std::vector<Outcome>> outcomes(static_cast<std::size_t>(config.replicates));
        if (config.kind == "simulation")
            parallel_for(config.replicates, threads,
                         [&](int r) { outcomes[r] = run_replicate(cell, config.seed, r); });
        for (std::size_t k = 0; k < cell.methods.size(); ++k) {
            const Resolved& rm = cell.methods[k];
            if (!rm.applicable) continue;
            const bool multiple = rm.spec.procedure == ProcedureKind::bh ||
                                  rm.spec.procedure == ProcedureKind::adapt ||
                                  rm.spec.procedure == ProcedureKind::knockoff;
            if (config.kind == "simulation" && !rm.spec.theory_only) {
                std::vector<double> power;
                std::vector<double> fdp;
                int failures = 0;
                std::string first_error;
                for (const auto& rep : outcomes) {
                    if (!rep[k].ok) {
                        if (failures++ == 0) first_error = rep[k].error;
                        continue;
                    }
                    power.push_back(rep[k].power);
                    fdp.push_back(rep[k].fdp);
                }
                if (failures > 0) {
                    std::cerr << "mxpl: " << cell.experiment << " " << rm.label << " at " << fmt(cell.sweep_value)
                              << ": " << failures << " replicate(s) failed: " << first_error << "\n";
                    rows.push_back({cell.experiment, rm.label, cell.sweep_value, "error", static_cast<double>(failures),
                                    0.0, static_cast<int>(power.size())});
                } else {
                    const auto [pm, ps] = mean_se(power);
                    rows.push_back({cell.experiment, rm.label, cell.sweep_value, "power", pm, ps,
                                    static_cast<int>(power.size())});
                    if (multiple) {
                        const auto [fm, fs] = mean_se(fdp);
                        rows.push_back({cell.experiment, rm.label, cell.sweep_value, "fdr", fm, fs,
                                        static_cast<int>(fdp.size())});
                    }
                }
            }
            if (!rm.spec.theory) continue;
            try {
                for (const auto& tv : theory_values(cell.model, rm))
                    rows.push_back({cell.experiment, rm.label + tv.suffix, cell.sweep_value, tv.metric, tv.value, 0.0, 0});
            } catch (const std::exception& e) {
                std::cerr << "mxpl: theory for " << rm.label << " at " << fmt(cell.sweep_value) << ": " << e.what()
                          << "\n";
                rows.push_back({cell.experiment, rm.label, cell.sweep_value, "error", 1.0, 0.0, 0});
            }
        }
    }
    return rows;
}

std::vector<TheoryRow> run_theory(const ExperimentConfig& config) {
    config.validate();
    std::vector<TheoryRow> rows;
    for (const Cell& cell : build_cells(config)) {
        for (const Resolved& rm : cell.methods) {
            if (!rm.applicable || !rm.spec.theory) continue;
            for (const auto& tv : theory_values(cell.model, rm))
                rows.push_back({cell.experiment + "/" + rm.label + tv.suffix + "/" + tv.metric, cell.sweep_value,
                                tv.value, tv.flag});
        }
    }
    return rows;
}

void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
    out << "experiment,method,sweep_value,metric,estimate,std_error,replicates_used\n";
    for (const auto& r : rows)
        out << r.experiment << ',' << r.method << ',' << fmt(r.sweep_value) << ',' << r.metric << ','
            << fmt(r.estimate) << ',' << fmt(r.std_error) << ',' << r.replicates_used << '\n';
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "experiment,method,sweep_value,metric,estimate,std_error,replicates_used")
        throw Error("results CSV has an unexpected header");
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 7) throw Error("malformed results CSV line: " + line);
        rows.push_back({f[0], f[1], std::stod(f[2]), f[3], std::stod(f[4]), std::stod(f[5]), std::stoi(f[6])});
    }
    return rows;
}

void write_comparison_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
    std::map<std::tuple<std::string, std::string, std::string, std::string>, double> theory;
    for (const auto& r : rows) {
        if (r.metric == "power_limit") theory[{r.experiment, r.method, fmt(r.sweep_value), "power"}] = r.estimate;
        if (r.metric == "fdp_limit") theory[{r.experiment, r.method, fmt(r.sweep_value), "fdr"}] = r.estimate;
    }
    out << "experiment,method,sweep_value,metric,empirical,std_error,theory,z_score\n";
    for (const auto& r : rows) {
        if (r.metric != "power" && r.metric != "fdr") continue;
        const auto it = theory.find({r.experiment, r.method, fmt(r.sweep_value), r.metric});
        const double th = it == theory.end() ? std::nan("") : it->second;
        const double z = (it == theory.end() || r.std_error == 0.0) ? std::nan("") : (r.estimate - th) / r.std_error;
        out << r.experiment << ',' << r.method << ',' << fmt(r.sweep_value) << ',' << r.metric << ',' << fmt(r.estimate)
            << ',' << fmt(r.std_error) << ',' << fmt(th) << ',' << fmt(z) << '\n';
    }
}

int default_threads() {
    if (const char* env = std::getenv("MXPL_THREADS")) {
        const int t = std::atoi(env);
        if (t >= 1) return t;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    if (count <= 0) return;
    const int workers = std::max(1, std::min(threads, count));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
    std::atomic<int> next{0};
    auto work = [&] {
        for (int i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace mxpl
