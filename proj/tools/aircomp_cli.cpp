#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "aircomp/aircomp.hpp"
#include "aircomp/io_json.hpp"

namespace fs = std::filesystem;
using namespace aircomp;

namespace {

struct Common {
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
    std::string format = "csv";
};

struct Manifest {
    std::string command;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> hashes;
    std::vector<std::string> outputs;
    json extra = json::object();
};

std::shared_ptr<spdlog::logger> make_logger() {
    auto log = spdlog::stderr_logger_mt("aircomp");
    log->set_pattern("[%l] %v");
    const char* env = std::getenv("AIRCOMP_LOG");
    log->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
    return log;
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidInput(path + ": " + e.what());
    }
}

json parse_inline(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidInput(std::string(what) + ": " + e.what());
    }
}

fs::path out_dir(const Common& c) {
    const fs::path p(c.out);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec || !fs::is_directory(p)) throw InvalidInput("output directory not writable: " + c.out);
    return p;
}

void write_file(const fs::path& p, const std::string& text, Manifest& m) {
    std::ofstream os(p);
    if (!os) throw InvalidInput("cannot write " + p.string());
    os << text;
    m.outputs.push_back(p.filename().string());
}

std::string results_text(const SweepResult& r, const std::string& format) {
    std::ostringstream os;
    if (format == "json") os << to_json(r).dump(2) << '\n';
    else write_results_csv(os, r);
    return os.str();
}

std::string long_text(const SweepResult& r, const std::string& metric) {
    std::ostringstream os;
    write_long_csv(os, r, metric);
    return os.str();
}

const char* long_metric(const Scenario& sc) { return sc.experiment == ExperimentKind::csi ? "mse" : "nmse"; }

json manifest_json(const Manifest& m, const Common& c) {
    json j{{"tool", "aircomp"},
           {"version", AIRCOMP_VERSION},
           {"command", m.command},
           {"seeds", m.seeds},
           {"scenario_hashes", m.hashes},
           {"workers", c.workers},
           {"outputs", m.outputs},
           {"libraries",
            {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." + std::to_string(EIGEN_MINOR_VERSION)},
             {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                   std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
             {"cli11", CLI11_VERSION},
             {"spdlog", std::to_string(SPDLOG_VER_MAJOR) + "." + std::to_string(SPDLOG_VER_MINOR) + "." + std::to_string(SPDLOG_VER_PATCH)}}},
           {"compiler", __VERSION__}};
    for (auto& [k, v] : m.extra.items()) j[k] = v;
    return j;
}

void emit_manifest(Manifest& m, const Common& c) {
    if (!c.out.empty()) {
        m.outputs.push_back("manifest.json");
        std::ofstream os(out_dir(c) / "manifest.json");
        os << manifest_json(m, c).dump(2) << '\n';
    } else {
        std::cerr << json{{"manifest", manifest_json(m, c)}}.dump() << '\n';
    }
}

std::vector<Scenario> load_scenarios(const std::string& path, const Common& c) {
    auto v = scenarios_from_json(read_json(path));
    if (c.seed_set)
        for (auto& s : v) s.seed = c.seed;
    return v;
}

// ---- subcommands ----

void run_scenarios(std::vector<Scenario> scenarios, const Common& c, Manifest& m) {
    auto log = spdlog::get("aircomp");
    for (auto& sc : scenarios) {
        const json sj = to_json(sc);
        log->info("running {} ({} trials, seed {})", sc.name, sc.trials, sc.seed);
        SweepResult r = run_sweep(sc, c.workers);
        r.scenario_hash = fingerprint(sj);
        m.seeds.push_back(sc.seed);
        m.hashes.push_back(r.scenario_hash);
        log->info("{} done in {:.2f} s", sc.name, r.wall_time_s);
        if (c.out.empty()) {
            std::cout << results_text(r, c.format);
            continue;
        }
        const fs::path dir = out_dir(c);
        write_file(dir / (sc.name + ".scenario.json"), sj.dump(2) + "\n", m);
        if (c.format == "json") write_file(dir / (sc.name + ".results.json"), results_text(r, "json"), m);
        else {
            write_file(dir / (sc.name + ".results.csv"), results_text(r, "csv"), m);
            write_file(dir / (sc.name + ".long.csv"), long_text(r, long_metric(sc)), m);
        }
    }
}

fs::path scenario_dir() {
    if (const char* env = std::getenv("AIRCOMP_SCENARIOS")) return env;
    return AIRCOMP_SCENARIO_DIR;
}

void figure(const std::string& name, long trials, const Common& c, Manifest& m) {
    static const std::vector<std::string> known{"fig7a", "fig7b", "fig9", "fig10"};
    if (std::find(known.begin(), known.end(), name) == known.end())
        throw InvalidInput("unknown figure '" + name + "' (expected fig7a, fig7b, fig9 or fig10)");
    if (c.out.empty()) throw InvalidInput("figure needs --out");
    const json bundle = read_json((scenario_dir() / (name + ".json")).string());
    auto scenarios = scenarios_from_json(bundle);
    for (auto& s : scenarios) {
        if (c.seed_set) s.seed = c.seed;
        if (trials > 0) s.trials = trials;
    }
    SweepResult all;
    json emitted{{"name", name}, {"scenarios", json::array()}};
    std::string metric = "nmse";
    for (const auto& sc : scenarios) {
        spdlog::get("aircomp")->info("figure {}: {} ({} trials)", name, sc.name, sc.trials);
        const json sj = to_json(sc);
        emitted["scenarios"].push_back(sj);
        SweepResult r = run_sweep(sc, c.workers);
        m.seeds.push_back(sc.seed);
        m.hashes.push_back(fingerprint(sj));
        for (auto& s : r.series) all.series.push_back(std::move(s));
        metric = long_metric(sc);
    }
    const fs::path dir = out_dir(c);
    write_file(dir / (name + ".scenario.json"), emitted.dump(2) + "\n", m);
    write_file(dir / (name + ".results.csv"), results_text(all, "csv"), m);
    write_file(dir / (name + ".long.csv"), long_text(all, metric), m);
    m.extra["figure"] = name;
    m.extra["metric"] = metric;
}

Interval parse_range(const std::string& s) {
    const auto j = parse_inline(s, "--range");
    return interval_from_json(j);
}

void design(const std::string& fn, double param, int K, int M, const std::string& range_s, int restarts, double budget,
            bool untied, const Common& c, Manifest& m) {
    require(K >= 1 && M >= 1, "--users and --levels must be >= 1");
    FunctionSpec spec;
    spec.kind = function_kind_from_string(fn);
    spec.param = param;
    spec.K = K;
    spec.input_range = range_s.empty() ? Interval{0.0, static_cast<double>(M - 1)} : parse_range(range_s);
    spec.validate();
    const Quantizer q(M, spec.input_range);
    const auto table = make_function_table(spec, q, kMaxDesignTuples);
    DesignOptions opt;
    opt.restarts = restarts;
    opt.tied = !untied;
    opt.seed = c.seed_set ? c.seed : 1;
    m.seeds.push_back(opt.seed);
    const auto res = optimize_channelcomp(table, std::vector<double>(static_cast<std::size_t>(K), budget), opt);
    std::vector<double> values;
    for (int i = 0; i < M; ++i) values.push_back(q.value(i));
    json j = to_json(res.constellation, values);
    j["function"] = to_json(spec);
    j["delta"] = res.unbounded ? json(nullptr) : json(res.delta);
    j["feasible"] = res.feasible;
    j["unbounded"] = res.unbounded;
    if (c.out.empty()) std::cout << j.dump(2) << '\n';
    else {
        const fs::path dir = out_dir(c);
        write_file(dir / "constellation.json", j.dump(2) + "\n", m);
        std::ostringstream os;
        write_constellation_csv(os, res.constellation);
        write_file(dir / "constellation.csv", os.str(), m);
    }
    if (!res.feasible) throw ConstraintViolation("no feasible constellation found");
}

void check(const std::string& in, const std::string& fn, double param, const Common& c, Manifest& m) {
    const auto file = constellation_file_from_json(read_json(in));
    const auto cons = build_constellation(file, function_kind_from_string(fn), param);
    const auto rep = check_feasibility(cons);
    json j = to_json(rep);
    if (rep.feasible) j["delta"] = achieved_delta(cons);
    std::cout << j.dump(2) << '\n';
    if (!c.out.empty()) write_file(out_dir(c) / "feasibility.json", j.dump(2) + "\n", m);
    if (!rep.feasible) {
        std::ostringstream msg;
        msg << "constellation infeasible:";
        for (const auto& v : rep.violations) msg << " f=" << format_number(v.f_a) << " collides with f=" << format_number(v.f_b) << ";";
        throw ConstraintViolation(msg.str());
    }
}

void power(const std::string& ch, const std::string& bud, double noise, const Common& c, Manifest& m) {
    const auto h = parse_inline(ch, "--channels").get<std::vector<double>>();
    const auto P = bud.empty() ? std::vector<double>(h.size(), 1.0) : parse_inline(bud, "--budgets").get<std::vector<double>>();
    const auto pol = solve_optimal_policy(h, P, noise);
    const json j = to_json(pol);
    std::cout << j.dump(2) << '\n';
    if (!c.out.empty()) write_file(out_dir(c) / "policy.json", j.dump(2) + "\n", m);
}

void mimo(const std::string& path, const std::string& random_shape, const Common& c, Manifest& m) {
    MimoScenario sc;
    if (!path.empty()) sc = mimo_from_json(read_json(path));
    else {
        const auto dims = parse_inline(random_shape, "--random").get<std::vector<int>>();
        require(dims.size() == 4, "--random needs [K, Nr, Nt, Q]");
        Stream rng(c.seed_set ? c.seed : 1);
        m.seeds.push_back(c.seed_set ? c.seed : 1);
        sc = random_mimo_scenario(dims[0], dims[1], dims[2], dims[3], rng);
    }
    const auto bf = aggregation_beamformer(sc);
    json j = to_json(bf);
    j["mse"] = mimo_mse(sc, bf);
    if (path.empty()) j["scenario"] = to_json(sc);
    std::cout << j.dump(2) << '\n';
    if (!c.out.empty()) write_file(out_dir(c) / "beamformers.json", j.dump(2) + "\n", m);
}

void sync_predict(const std::string& in, const Common& c, Manifest& m) {
    const json j = read_json(in);
    const OfdmConfig cfg = j.contains("ofdm") ? ofdm_config_from_json(j.at("ofdm")) : OfdmConfig{};
    const auto ch = channel_from_json(detail::field(j, "channel"));
    const auto prof = j.contains("impairments") ? impairment_from_json(j.at("impairments"), ch.num_nodes())
                                                : ImpairmentProfile::zero(ch.num_nodes());
    SyncConditions cond;
    if (j.contains("conditions")) {
        const auto& k = j.at("conditions");
        cond.static_phase = detail::get_or(k, "static_phase", true);
        cond.static_timing = detail::get_or(k, "static_timing", true);
        cond.zero_cfo = detail::get_or(k, "zero_cfo", true);
    }
    const auto comp = predict_composite(cfg, ch, prof, cond);
    std::ostringstream os;
    if (c.format == "json") {
        json out = json::array();
        for (const auto& row : comp) {
            json r = json::array();
            for (cplx z : row) r.push_back(to_json(z));
            out.push_back(r);
        }
        os << json{{"composite", out}}.dump(2) << '\n';
    } else {
        write_composite_csv(os, comp);
    }
    if (c.out.empty()) std::cout << os.str();
    else write_file(out_dir(c) / (c.format == "json" ? "composite.json" : "composite.csv"), os.str(), m);
}

int report(const char* kind, int code, const std::string& msg) {
    std::cerr << json{{"error", {{"kind", kind}, {"message", msg}, {"exit_code", code}}}}.dump() << '\n';
    return code;
}

} // namespace

int main(int argc, char** argv) {
    auto log = make_logger();
    CLI::App app{"Over-the-air computation simulator and design tools", "aircomp"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", AIRCOMP_VERSION);

    Common c;
    auto common = [&c](CLI::App* sub) {
        sub->add_option("--out", c.out, "output directory");
        sub->add_option("--seed", c.seed, "master seed override");
        sub->add_option("--workers", c.workers, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
        sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    };

    std::string scenario, schemes_csv;
    auto* run = app.add_subcommand("run", "run every scenario in a scenario or bundle file");
    run->add_option("--scenario", scenario, "scenario JSON")->required();
    common(run);

    auto* compare = app.add_subcommand("compare", "paired scheme comparison");
    compare->add_option("--scenario", scenario, "scenario JSON")->required();
    compare->add_option("--schemes", schemes_csv, "comma-separated scheme list overriding the file");
    common(compare);

    std::string fig;
    long fig_trials = 0;
    auto* figure_cmd = app.add_subcommand("figure", "regenerate a figure bundle (fig7a, fig7b, fig9, fig10)");
    figure_cmd->add_option("name", fig, "figure name")->required();
    figure_cmd->add_option("--trials", fig_trials, "override the trial count");
    common(figure_cmd);

    std::string fn = "sum", range_s;
    double param = 100.0, budget = 1.0;
    int K = 2, M = 4, restarts = 32;
    bool untied = false;
    auto* des = app.add_subcommand("design-constellation", "optimize a ChannelComp constellation");
    des->add_option("--function", fn, "function kind");
    des->add_option("--param", param, "p or p0");
    des->add_option("--users", K, "K");
    des->add_option("--levels", M, "M");
    des->add_option("--range", range_s, "input range as [lo, hi]");
    des->add_option("--restarts", restarts, "optimizer restarts")->check(CLI::PositiveNumber);
    des->add_option("--budget", budget, "per-node power budget")->check(CLI::PositiveNumber);
    des->add_flag("--untied", untied, "separate constellation per node");
    common(des);

    std::string cons_in;
    auto* chk = app.add_subcommand("check-constellation", "feasibility report for a constellation file");
    chk->add_option("--in", cons_in, "constellation JSON")->required();
    chk->add_option("--function", fn, "function kind");
    chk->add_option("--param", param, "p or p0");
    common(chk);

    std::string channels, budgets;
    double noise = 0.0;
    auto* pow_cmd = app.add_subcommand("power-policy", "optimal single-antenna power policy");
    pow_cmd->add_option("--channels", channels, "channel magnitudes as a JSON array")->required();
    pow_cmd->add_option("--budgets", budgets, "power budgets as a JSON array (default all 1)");
    pow_cmd->add_option("--noise", noise, "noise variance")->required();
    common(pow_cmd);

    std::string random_shape;
    auto* mim = app.add_subcommand("mimo-beamform", "aggregation and zero-forcing beamformers");
    auto* mim_sc = mim->add_option("--scenario", scenario, "MIMO scenario JSON");
    mim->add_option("--random", random_shape, "random scenario [K, Nr, Nt, Q]")->excludes(mim_sc);
    common(mim);

    std::string sync_in;
    auto* syn = app.add_subcommand("sync-predict", "composite OFDM coefficients under offsets");
    syn->add_option("--in", sync_in, "JSON with ofdm, channel and impairments")->required();
    common(syn);

    auto* list = app.add_subcommand("list-schemes", "print the available schemes");
    common(list);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report("usage", 2, e.what());
    }
    c.seed_set = app.get_subcommands().front()->count("--seed") > 0;

    Manifest m;
    m.command = app.get_subcommands().front()->get_name();
    try {
        if (run->parsed()) {
            run_scenarios(load_scenarios(scenario, c), c, m);
        } else if (compare->parsed()) {
            auto v = load_scenarios(scenario, c);
            for (auto& sc : v) {
                if (sc.experiment != ExperimentKind::scheme_sweep) throw InvalidInput("compare needs a scheme_sweep scenario");
                if (!schemes_csv.empty()) {
                    sc.schemes.clear();
                    std::stringstream ss(schemes_csv);
                    for (std::string name; std::getline(ss, name, ',');) {
                        SchemeConfig cfg;
                        cfg.kind = scheme_kind_from_string(name);
                        cfg.validate();
                        sc.schemes.push_back(cfg);
                    }
                }
            }
            run_scenarios(v, c, m);
        } else if (figure_cmd->parsed()) {
            figure(fig, fig_trials, c, m);
        } else if (des->parsed()) {
            design(fn, param, K, M, range_s, restarts, budget, untied, c, m);
        } else if (chk->parsed()) {
            check(cons_in, fn, param, c, m);
        } else if (pow_cmd->parsed()) {
            power(channels, budgets, noise, c, m);
        } else if (mim->parsed()) {
            if (scenario.empty() && random_shape.empty()) throw InvalidInput("mimo-beamform needs --scenario or --random");
            mimo(scenario, random_shape, c, m);
        } else if (syn->parsed()) {
            sync_predict(sync_in, c, m);
        } else if (list->parsed()) {
            if (c.format == "json") std::cout << json(scheme_names()).dump() << '\n';
            else
                for (const auto& n : scheme_names()) std::cout << n << '\n';
        }
        emit_manifest(m, c);
    } catch (const NumericalFailure& e) {
        emit_manifest(m, c);
        return report("numerical_failure", 4, e.what());
    } catch (const ConstraintViolation& e) {
        emit_manifest(m, c);
        return report("constraint_violation", 3, e.what());
    } catch (const InvalidInput& e) {
        return report("invalid_input", 2, e.what());
    } catch (const json::exception& e) {
        return report("invalid_input", 2, e.what());
    } catch (const std::invalid_argument& e) {
        return report("invalid_input", 2, e.what());
    } catch (const std::exception& e) {
        return report("internal", 4, e.what());
    }
    return 0;
}
