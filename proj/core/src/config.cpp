#include "rrproc/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rrproc/mgf.hpp"
#include "rrproc/renewal.hpp"
#include "rrproc/report.hpp"

namespace rrproc {

using nlohmann::json;

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
    std::string out = "invalid config:";
    for (const std::string& p : problems) out += "\n  - " + p;
    return out;
}

struct FieldReader {
    const json& j;
    std::vector<std::string>& problems;

    bool has(const char* name) const { return j.contains(name); }

    template <class T>
    std::optional<T> get(const char* name, const char* expected) {
        if (!j.contains(name)) return std::nullopt;
        try {
            return j.at(name).get<T>();
        } catch (const std::exception&) {
            problems.push_back(std::string(name) + ": expected " + expected);
            return std::nullopt;
        }
    }
};

std::vector<double> read_grid(const json& spec, const char* name,
                              std::vector<std::string>& problems) {
    std::vector<double> grid;
    if (spec.is_array()) {
        for (const json& v : spec) {
            if (!v.is_number()) {
                problems.push_back(std::string(name) + ": grid entries must be numbers");
                return {};
            }
            grid.push_back(v.get<double>());
        }
        if (grid.empty()) problems.push_back(std::string(name) + ": grid is empty");
        return grid;
    }
    if (spec.is_object() && spec.contains("from") && spec.contains("to") &&
        spec.contains("step")) {
        double from = spec.at("from").get<double>();
        double to = spec.at("to").get<double>();
        double step = spec.at("step").get<double>();
        if (!(step > 0.0) || to < from) {
            problems.push_back(std::string(name) + ": need step > 0 and to >= from");
            return {};
        }
        for (double v = from; v <= to + 0.5 * step; v += step)
            grid.push_back(std::fabs(v) < 1e-15 ? 0.0 : v);
        return grid;
    }
    problems.push_back(std::string(name) + ": expected an array or {from,to,step}");
    return grid;
}

json summary_skeleton(const RunConfig& config, const JointLaw& law, bool rng_used) {
    json summary;
    summary["version"] = kVersion;
    summary["command"] = command_name(config.command);
    summary["seed"] = config.seed.value_or(0);
    summary["rng_used"] = rng_used;
    summary["threads"] = config.threads;
    summary["config"] = json::parse(config.raw_text);
    MomentReport report = validate(law);
    summary["law"] = {{"mean_tau", report.mean_tau},
                      {"mean_x", report.mean_x},
                      {"var_x", report.var_x},
                      {"standardized", report.standardized},
                      {"sq_exp_moment", report.condition_flags.sq_exp_moment},
                      {"all_lambda_moment", report.condition_flags.all_lambda_moment}};
    return summary;
}

void write_summary(const std::string& path, const json& summary) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << summary.dump(2) << '\n';
}

}  // namespace

const char* command_name(Command c) {
    switch (c) {
        case Command::Eta: return "eta";
        case Command::Mgf: return "mgf";
        case Command::Renewal: return "renewal";
        case Command::Blackwell: return "blackwell";
        case Command::Dri: return "dri";
        case Command::Mdp: return "mdp";
        case Command::IdentityCheck: return "identity-check";
    }
    return "?";
}

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join_problems(problems)), problems_(std::move(problems)) {}

RunConfig parse_config(const std::string& text) {
    std::vector<std::string> problems;
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError({std::string("config is not valid JSON: ") + e.what()});
    }
    if (!j.is_object()) throw ConfigError({"config must be a JSON object"});

    RunConfig config;
    config.raw_text = j.dump();
    FieldReader top{j, problems};

    std::optional<std::string> cmd = top.get<std::string>("command", "a string");
    if (!cmd) {
        if (!j.contains("command")) problems.push_back("command: required");
    } else if (*cmd == "eta") {
        config.command = Command::Eta;
    } else if (*cmd == "mgf") {
        config.command = Command::Mgf;
    } else if (*cmd == "renewal") {
        config.command = Command::Renewal;
    } else if (*cmd == "blackwell") {
        config.command = Command::Blackwell;
    } else if (*cmd == "dri") {
        config.command = Command::Dri;
    } else if (*cmd == "mdp") {
        config.command = Command::Mdp;
    } else if (*cmd == "identity-check") {
        config.command = Command::IdentityCheck;
    } else {
        problems.push_back("command: unknown command '" + *cmd + "'");
        cmd.reset();
    }

    if (auto law = top.get<std::string>("law", "a file path")) {
        config.law_path = *law;
        if (!std::filesystem::exists(config.law_path)) {
            problems.push_back("law: file not found '" + config.law_path + "'");
        } else {
            try {
                load_law_file(config.law_path);
            } catch (const std::exception& e) {
                problems.push_back(std::string("law: ") + e.what());
            }
        }
    } else if (!j.contains("law")) {
        problems.push_back("law: required");
    }

    if (auto seed = top.get<uint64_t>("seed", "an unsigned integer")) config.seed = *seed;
    if (auto threads = top.get<unsigned>("threads", "a positive integer")) {
        if (*threads < 1)
            problems.push_back("threads: must be >= 1");
        else
            config.threads = *threads;
    }

    if (cmd) {
        Command c = config.command;
        bool needs_lambda_grid = c == Command::Eta || c == Command::Mgf ||
                                 c == Command::IdentityCheck || c == Command::Blackwell ||
                                 c == Command::Dri;
        if (needs_lambda_grid) {
            if (!j.contains("lambda_grid")) {
                if (c == Command::Blackwell || c == Command::Dri)
                    config.lambda_grid = {0.0};
                else
                    problems.push_back("lambda_grid: required for " + std::string(*cmd));
            } else {
                config.lambda_grid = read_grid(j.at("lambda_grid"), "lambda_grid", problems);
            }
        }
        if (auto tol = top.get<double>("tol", "a number")) {
            if (!(*tol > 0.0))
                problems.push_back("tol: must be positive");
            else
                config.tol = *tol;
        }
        if (auto v = top.get<size_t>("t_max_steps", "a positive integer")) config.t_max_steps = *v;
        if (auto v = top.get<size_t>("n_max", "a positive integer")) config.n_max = *v;
        if (auto v = top.get<uint64_t>("inequality_trials", "an unsigned integer"))
            config.inequality_trials = *v;
        if (auto v = top.get<size_t>("v_steps", "a positive integer")) {
            if (*v < 1)
                problems.push_back("v_steps: must be >= 1");
            else
                config.v_steps = *v;
        }
        if (auto v = top.get<size_t>("u_min_steps", "an integer")) config.u_min_steps = *v;
        if (auto v = top.get<double>("threshold", "a number")) config.threshold = *v;
        if (c == Command::IdentityCheck && !j.contains("threshold")) config.threshold = 1e-9;

        if (c == Command::Dri) {
            config.delta_grid = {1.0, 0.5, 0.25, 0.125};
            config.n_grid = {0.0, 5.0, 10.0, 20.0, 40.0};
            config.t_max = 80.0;
            if (j.contains("delta_grid"))
                config.delta_grid = read_grid(j.at("delta_grid"), "delta_grid", problems);
            if (j.contains("n_grid"))
                config.n_grid = read_grid(j.at("n_grid"), "n_grid", problems);
            if (auto v = top.get<double>("t_max", "a number")) config.t_max = *v;
        }

        if (c == Command::Mdp) {
            if (!j.contains("schedule") || !j.at("schedule").is_array()) {
                problems.push_back("schedule: required array of {t, x, n_samples} for mdp");
            } else {
                for (const json& pt : j.at("schedule")) {
                    SchedulePoint sp;
                    try {
                        sp.t = pt.at("t").get<double>();
                        sp.x = pt.at("x").get<double>();
                        sp.n_samples = pt.at("n_samples").get<uint64_t>();
                    } catch (const std::exception&) {
                        problems.push_back("schedule: each point needs numeric t, x, n_samples");
                        break;
                    }
                    if (sp.n_samples < 1) problems.push_back("schedule: n_samples must be >= 1");
                    config.schedule.push_back(sp);
                }
            }
            if (auto m = top.get<std::string>("method", "a string")) {
                if (*m == "naive")
                    config.method = TailMethod::Naive;
                else if (*m == "tilted")
                    config.method = TailMethod::Tilted;
                else if (*m == "both")
                    config.run_both_methods = true;
                else
                    problems.push_back("method: expected naive, tilted, or both");
            }
            if (!config.seed) problems.push_back("seed: required for mdp");
        }
        if (c == Command::Renewal && config.inequality_trials > 0 && !config.seed)
            problems.push_back("seed: required when inequality_trials > 0");
    }

    if (!problems.empty()) throw ConfigError(std::move(problems));
    return config;
}

namespace {

int run_impl(const RunConfig& config, const std::string& out_dir, RunResult& result) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::string base = out_dir + "/" + command_name(config.command);

    JointLaw law = load_law_file(config.law_path);
    bool rng_used = config.command == Command::Mdp ||
                    (config.command == Command::Renewal && config.inequality_trials > 0);
    json summary = summary_skeleton(config, law, rng_used);
    CsvTable csv;
    bool pass = true;

    switch (config.command) {
        case Command::Eta: {
            csv.header = {"lambda", "eta", "ratio", "drift"};
            auto points = eta_curve(law, config.lambda_grid, config.tol);
            for (const EtaCurvePoint& pt : points)
                csv.rows.push_back({format_double(pt.lambda), format_double(pt.eta),
                                    format_double(pt.ratio), format_double(pt.drift)});
            double max_eta = 0.0;
            for (const EtaCurvePoint& pt : points) max_eta = std::max(max_eta, pt.eta);
            summary["results"] = {{"points", points.size()}, {"max_eta", max_eta}};
            break;
        }
        case Command::Mgf:
        case Command::IdentityCheck: {
            csv.header = {"lambda", "t", "direct", "tilted", "normalized", "limit"};
            double max_gap = 0.0;
            double delta_d = to_double(span(law));
            json fits = json::array();
            for (double lambda : config.lambda_grid) {
                MGFSeries s = mgf_series(law, lambda, config.t_max_steps, config.tol);
                max_gap = std::max(max_gap, s.max_relative_gap());
                fits.push_back({{"lambda", lambda},
                                {"one_over_t_coefficient", convergence_rate_fit(s)}});
                for (size_t n = 0; n < s.direct.size(); ++n) {
                    csv.rows.push_back({format_double(lambda),
                                        format_double(delta_d * static_cast<double>(n)),
                                        format_double(s.direct[n]), format_double(s.tilted[n]),
                                        format_double(s.normalized[n]), format_double(s.limit)});
                }
            }
            summary["results"] = {{"max_relative_gap", max_gap},
                                  {"convergence_fits", std::move(fits)}};
            if (config.command == Command::IdentityCheck) {
                pass = max_gap <= config.threshold;
                summary["results"]["threshold"] = config.threshold;
            }
            break;
        }
        case Command::Renewal: {
            DiscreteMeasure marginal = law.tau_marginal();
            Rational delta = marginal.span();
            RenewalTable table = renewal_table(marginal, delta, config.n_max);
            double limit = to_double(delta) * table.inv_mean;
            csv.header = {"n", "t", "mass", "limit"};
            for (size_t n = 0; n < table.masses.size(); ++n)
                csv.rows.push_back({std::to_string(n),
                                    format_double(to_double(delta) * static_cast<double>(n)),
                                    format_double(table.masses[n]), format_double(limit)});
            summary["results"] = {{"delta", rational_to_string(delta)},
                                  {"inv_mean", table.inv_mean}};
            if (config.inequality_trials > 0) {
                InequalityCheck check = renewal_inequality_check(table, config.inequality_trials,
                                                                 config.seed.value_or(0));
                summary["results"]["inequality_ok"] = check.ok;
                summary["results"]["inequality_trials"] = check.trials;
                if (!check.ok) {
                    summary["results"]["witness"] = {{"u_steps", check.witness_u},
                                                     {"v_steps", check.witness_v},
                                                     {"lhs", check.lhs},
                                                     {"rhs", check.rhs}};
                    pass = false;
                }
            }
            break;
        }
        case Command::Blackwell: {
            LawFamily family = tilt_family(law, config.lambda_grid, config.tol);
            std::vector<size_t> u_steps(config.n_max + 1);
            for (size_t u = 0; u <= config.n_max; ++u) u_steps[u] = u;
            auto gaps = blackwell_gap(family, config.v_steps, u_steps, config.n_max);
            double delta_d = to_double(family.span);
            csv.header = {"u_steps", "t", "sup_gap"};
            double max_gap_tail = 0.0;
            for (const BlackwellGapPoint& pt : gaps) {
                csv.rows.push_back({std::to_string(pt.u_steps),
                                    format_double(delta_d * static_cast<double>(pt.u_steps)),
                                    format_double(pt.sup_gap)});
                if (pt.u_steps >= config.u_min_steps)
                    max_gap_tail = std::max(max_gap_tail, pt.sup_gap);
            }
            summary["results"] = {{"max_gap_beyond_burnin", max_gap_tail},
                                  {"u_min_steps", config.u_min_steps},
                                  {"family_size", family.members.size()}};
            if (config.threshold > 0.0) {
                pass = max_gap_tail <= config.threshold;
                summary["results"]["threshold"] = config.threshold;
            }
            break;
        }
        case Command::Dri: {
            std::vector<DRIFunction> family;
            for (double lambda : config.lambda_grid) {
                TiltResult tilt = solve_eta(law, lambda, config.tol);
                HFunction h = h_function(tilt, config.n_max);
                family.push_back({h.eval, true, "lambda=" + format_double(lambda)});
            }
            DRIReport report = dri_check(family, config.delta_grid, config.n_grid, config.t_max);
            csv.header = {"metric", "param", "value"};
            csv.rows.push_back({"block_sum", "0", format_double(report.sup_block_sum)});
            for (auto [n, v] : report.tail_curve)
                csv.rows.push_back({"tail", format_double(n), format_double(v)});
            for (auto [d, v] : report.riemann_gap_curve)
                csv.rows.push_back({"riemann_gap", format_double(d), format_double(v)});
            summary["results"] = {{"sup_block_sum", report.sup_block_sum}};
            break;
        }
        case Command::Mdp: {
            csv.header = {"t", "x", "method", "p_hat", "std_err", "rate", "reference"};
            std::vector<TailMethod> methods;
            if (config.run_both_methods)
                methods = {TailMethod::Naive, TailMethod::Tilted};
            else
                methods = {config.method};
            for (TailMethod m : methods) {
                auto rows = mdp_rate_scan(law, config.schedule, m, *config.seed, config.threads);
                for (const MdpScanRow& row : rows) {
                    const TailEstimate& e = row.estimate;
                    csv.rows.push_back({format_double(e.t), format_double(e.x),
                                        e.method == TailMethod::Naive ? "naive" : "tilted",
                                        format_double(e.p_hat), format_double(e.std_err),
                                        format_double(e.rate), format_double(row.reference)});
                }
            }
            summary["results"] = {{"points", config.schedule.size()}};
            break;
        }
    }

    std::string csv_path = base + ".csv";
    write_csv(csv_path, csv);
    result.files_written.push_back(csv_path);
    summary["pass"] = pass;
    result.summary_path = base + "_summary.json";
    write_summary(result.summary_path, summary);
    result.files_written.push_back(result.summary_path);
    return pass ? 0 : 1;
}

}  // namespace

RunResult run(const RunConfig& config, const std::string& out_dir) {
    RunResult result;
    try {
        result.exit_code = run_impl(config, out_dir, result);
    } catch (const std::exception& e) {
        json err;
        err["error"] = e.what();
        err["command"] = command_name(config.command);
        try {
            err["config"] = json::parse(config.raw_text);
        } catch (...) {
        }
        std::filesystem::create_directories(out_dir);
        std::string path = out_dir + "/error.json";
        write_summary(path, err);
        result.files_written.push_back(path);
        result.exit_code = 2;
    }
    return result;
}

}  // namespace rrproc
