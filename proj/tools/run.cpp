#include "run.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "gelfand/checks.hpp"
#include "gelfand/errors.hpp"
#include "gelfand/galerkin.hpp"
#include "gelfand/io.hpp"
#include "gelfand/noise.hpp"
#include "gelfand/zoo.hpp"

namespace gelfand::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

const std::set<std::string> kCommands{"solve", "horizon", "check", "converge", "ensemble"};
const std::set<std::string> kHypotheses{"local_monotonicity", "coercivity", "growth", "hemicontinuity",
                                        "uniqueness_growth"};

void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

json resolved_operator(const json& cfg) {
    json op = cfg.at("operator");
    if (op.is_string()) op = {{"name", op}};
    require_keys(op, {"name", "params"}, "operator");
    const auto name = op.at("name").get<std::string>();
    const auto& entry = zoo_entry(name);
    json params = entry.defaults;
    const json given = op.value("params", json::object());
    if (!given.is_object()) throw ConfigError("operator.params: expected an object");
    for (auto it = given.begin(); it != given.end(); ++it) params[it.key()] = it.value();
    if (cfg.contains("resolution")) params["resolution"] = cfg.at("resolution");
    for (auto it = params.begin(); it != params.end(); ++it)
        if (!entry.defaults.contains(it.key()))
            throw ConfigError("operator " + name + ": unknown parameter '" + it.key() + "'");
    return {{"name", name}, {"params", params}};
}

}  // namespace

json resolve_config(const json& input, const std::optional<std::uint64_t>& seed_override) {
    json doc = input;
    if (doc.is_object() && doc.contains("tool") && doc.contains("config")) doc = doc.at("config");
    require_keys(doc,
                 {"command", "operator", "resolution", "initial", "solve", "seed", "check", "converge", "noise",
                  "paths", "output"},
                 "config");
    json r;
    const auto command = doc.at("command").get<std::string>();
    if (!kCommands.count(command)) throw ConfigError("config: unknown command '" + command + "'");
    r["command"] = command;
    r["operator"] = resolved_operator(doc);
    const std::uint64_t seed = seed_override ? *seed_override : doc.value("seed", std::uint64_t{1});
    r["seed"] = seed;
    r["output"] = doc.value("output", std::string("run"));

    json initial = doc.value("initial", json{{"profile", "sine"}, {"amplitude", 0.1}});
    require_keys(initial, {"profile", "amplitude", "decay", "values"}, "initial");
    if (!initial.contains("profile")) initial["profile"] = "sine";
    if (initial.at("profile") != "coefficients" && !initial.contains("amplitude")) initial["amplitude"] = 0.1;
    r["initial"] = initial;

    SolveConfig sc;
    if (doc.contains("solve")) sc = doc.at("solve").get<SolveConfig>();
    sc.validate();
    r["solve"] = sc;

    if (command == "check") {
        json c = doc.value("check", json::object());
        require_keys(c, {"trials", "hypotheses", "sampler", "rel_tol", "workers"}, "check");
        CheckOptions co;
        co.sampler.seed = seed;
        if (c.contains("sampler")) {
            json s = c.at("sampler");
            if (!s.contains("seed") || seed_override) s["seed"] = seed;
            co.sampler = s.get<SamplerConfig>();
        }
        json hyp = c.value("hypotheses", json(std::vector<std::string>{"local_monotonicity", "coercivity", "growth",
                                                                      "hemicontinuity", "uniqueness_growth"}));
        for (const auto& h : hyp)
            if (!kHypotheses.count(h.get<std::string>()))
                throw ConfigError("check: unknown hypothesis '" + h.get<std::string>() + "'");
        const auto trials = c.value("trials", std::size_t{10000});
        if (trials == 0) throw ConfigError("check: trials must be positive");
        r["check"] = {{"trials", trials},
                      {"hypotheses", hyp},
                      {"sampler", co.sampler},
                      {"rel_tol", c.value("rel_tol", co.rel_tol)},
                      {"workers", c.value("workers", 0)}};
    }
    if (command == "converge") {
        json c = doc.value("converge", json::object());
        require_keys(c, {"resolutions"}, "converge");
        const auto res = c.value("resolutions", std::vector<int>{16, 32, 64});
        if (res.size() < 2) throw ConfigError("converge: need at least two resolutions");
        for (std::size_t i = 1; i < res.size(); ++i)
            if (res[i] <= res[i - 1]) throw ConfigError("converge: resolutions must increase");
        r["converge"] = {{"resolutions", res}};
    }
    if (command == "ensemble") {
        if (!doc.contains("noise")) throw ConfigError("ensemble: missing 'noise'");
        r["noise"] = doc.at("noise");
        PathConfig pc;
        pc.seed = seed;
        if (doc.contains("paths")) {
            json p = doc.at("paths");
            if (!p.contains("seed") || seed_override) p["seed"] = seed;
            pc = p.get<PathConfig>();
        }
        pc.validate(sc);
        r["paths"] = pc;
    }
    return r;
}

namespace {

struct Context {
    json config;
    fs::path out;
    bool quiet = true;
    json results = json::object();
    std::vector<std::string> artifacts;
    int exit_code = kOk;
    std::string termination;
    std::string message;

    void log(const std::string& s) const {
        if (!quiet) std::cerr << s << '\n';
    }
    void write(const std::string& name, const std::string& text) {
        write_text_atomic(out / name, text);
        artifacts.push_back(name);
    }
    void write_json(const std::string& name, const json& doc) {
        write_json_atomic(out / name, doc);
        artifacts.push_back(name);
    }
};

OperatorPtr build(const json& config) {
    const auto& op = config.at("operator");
    try {
        return build_operator(op.at("name").get<std::string>(), op.at("params"));
    } catch (const ContractViolation& e) {
        throw ConfigError(e.what());
    }
}

int exit_for(Termination t) {
    switch (t) {
        case Termination::EnvelopeBreach: return kEnvelopeBreach;
        case Termination::Overflow: return kOverflow;
        default: return kOk;
    }
}

json horizon_json(const HorizonEstimate& h) {
    json g;
    to_json(g, h.g);
    return {{"t0", h.t0},           {"t_requested", h.t_requested}, {"sup_g", h.sup_g}, {"initial", h.initial},
            {"g_at_k", h.g_at_k}, {"effective", h.effective},     {"g", g}};
}

void run_solve(Context& ctx) {
    const auto op = build(ctx.config);
    const auto u0 = initial_condition(*op, ctx.config.at("initial"), ctx.config.at("seed").get<std::uint64_t>());
    const auto sc = ctx.config.at("solve").get<SolveConfig>();
    ctx.log("solving " + op->name() + " on " + std::to_string(op->space().size()) + " coefficients");
    const auto traj = solve(*op, u0, sc);
    ctx.write("series.csv", format_series_csv(traj));
    write_states(ctx.out, op->space(), traj);
    ctx.artifacts.push_back("states.bin");
    ctx.artifacts.push_back("states.json");
    double min_margin = INFINITY;
    for (std::size_t i = 0; i < traj.times.size(); ++i) min_margin = std::min(min_margin, traj.margin(i));
    ctx.termination = to_string(traj.termination);
    ctx.results = {{"horizon", horizon_json(traj.horizon)},
                   {"t_final", traj.times.back()},
                   {"snapshots", traj.times.size()},
                   {"accepted_steps", traj.accepted_steps},
                   {"rejected_steps", traj.rejected_steps},
                   {"min_margin", min_margin},
                   {"energy_residual", energy_residual(*op, traj)},
                   {"message", traj.message},
                   {"warnings", traj.warnings}};
    ctx.exit_code = exit_for(traj.termination);
    ctx.message = traj.message.empty() ? ctx.termination : traj.message;
}

void run_horizon(Context& ctx) {
    const auto op = build(ctx.config);
    const auto u0 = initial_condition(*op, ctx.config.at("initial"), ctx.config.at("seed").get<std::uint64_t>());
    const auto sc = ctx.config.at("solve").get<SolveConfig>();
    const auto& c = op->constants();
    const auto h = horizon(pairing(op->space(), u0.coeffs, u0.coeffs), [&](double t) { return c.f.integral(t); },
                           c.g, sc.t_end_request);
    ctx.results = horizon_json(h);
    ctx.termination = h.t0 < sc.t_end_request ? "local" : "global";
    ctx.write_json("horizon.json", ctx.results);
}

void run_check(Context& ctx) {
    const auto op = build(ctx.config);
    const auto& cc = ctx.config.at("check");
    CheckOptions co;
    co.trials = cc.at("trials").get<std::size_t>();
    co.sampler = cc.at("sampler").get<SamplerConfig>();
    co.rel_tol = cc.at("rel_tol").get<double>();
    co.workers = cc.at("workers").get<unsigned>();
    json reports = json::array();
    bool all = true;
    for (const auto& h : cc.at("hypotheses")) {
        const auto name = h.get<std::string>();
        ctx.log("checking " + name);
        CheckReport rep;
        if (name == "local_monotonicity") rep = check_local_monotonicity(*op, co);
        else if (name == "coercivity") rep = check_coercivity(*op, co);
        else if (name == "growth") rep = check_growth(*op, co);
        else if (name == "hemicontinuity") rep = check_hemicontinuity(*op, co);
        else rep = check_uniqueness_growth(*op, op->constants(), co);
        all = all && rep.passed();
        json j;
        to_json(j, rep);
        reports.push_back(j);
    }
    ctx.write_json("report.json", {{"operator", op->name()}, {"passed", all}, {"reports", reports}});
    ctx.results = {{"passed", all}};
    ctx.termination = all ? "passed" : "violations";
}

void run_converge(Context& ctx) {
    const auto name = ctx.config.at("operator").at("name").get<std::string>();
    const auto params = ctx.config.at("operator").at("params");
    const auto rule = ctx.config.at("initial");
    const auto seed = ctx.config.at("seed").get<std::uint64_t>();
    const auto sc = ctx.config.at("solve").get<SolveConfig>();
    std::map<const SpectralSpace*, OperatorPtr> owners;
    OperatorBuilder builder = [&](int n) {
        auto p = params;
        p["resolution"] = n;
        try {
            auto op = build_operator(name, p);
            owners[&op->space()] = op;
            return op;
        } catch (const ContractViolation& e) {
            throw ConfigError(e.what());
        }
    };
    InitialRule init = [&](const SpectralSpace& space) { return initial_condition(*owners.at(&space), rule, seed); };
    const auto rows = convergence_study(builder, init, ctx.config.at("converge").at("resolutions").get<std::vector<int>>(), sc);
    ctx.write("convergence.csv", format_convergence_csv(rows));
    json jr = json::array();
    int code = kOk;
    for (const auto& r : rows) {
        jr.push_back({{"resolution", r.resolution},
                      {"modes", r.modes},
                      {"final_h_norm", r.final_h_norm},
                      {"difference", std::isnan(r.difference) ? json(nullptr) : json(r.difference)},
                      {"termination", to_string(r.termination)}});
        if (exit_for(r.termination) != kOk && code == kOk) code = exit_for(r.termination);
    }
    ctx.results = {{"rows", jr}};
    ctx.exit_code = code;
    ctx.termination = code == kOk ? "completed" : to_string(rows.back().termination);
    ctx.message = ctx.termination;
}

void run_ensemble(Context& ctx) {
    const auto op = build(ctx.config);
    const auto u0 = initial_condition(*op, ctx.config.at("initial"), ctx.config.at("seed").get<std::uint64_t>());
    const auto sc = ctx.config.at("solve").get<SolveConfig>();
    const auto model = noise_model_from_json(ctx.config.at("noise"), op->space());
    const auto pc = ctx.config.at("paths").get<PathConfig>();
    ctx.log("running " + std::to_string(pc.n_paths) + " paths");
    const auto ens = run_ensemble(u0, *op, model, sc, pc);
    for (const auto& p : ens.paths) {
        if (!p.ok) continue;
        char name[32];
        std::snprintf(name, sizeof name, "paths/path_%05zu.csv", p.index);
        ctx.write(name, format_series_csv(p.x));
    }
    ctx.write("paths.csv", format_ensemble_csv(ens));
    const auto agg = ens.aggregate_json(sc.t_end_request);
    ctx.write_json("aggregate.json", agg);
    ctx.results = {{"succeeded", agg.at("succeeded")}, {"completed", agg.at("completed")}, {"paths", agg.at("paths")}};
    ctx.termination = "completed";
}

}  // namespace

RunOutcome run(const json& input, const fs::path& out_dir, bool quiet) {
    const auto start = std::chrono::steady_clock::now();
    Context ctx;
    ctx.quiet = quiet;
    ctx.out = out_dir;
    RunOutcome outcome;
    outcome.out_dir = out_dir;
    json raw = input;
    try {
        ctx.config = resolve_config(input, std::nullopt);
        raw = ctx.config;
        fs::create_directories(ctx.out);
        const auto command = ctx.config.at("command").get<std::string>();
        if (command == "solve") run_solve(ctx);
        else if (command == "horizon") run_horizon(ctx);
        else if (command == "check") run_check(ctx);
        else if (command == "converge") run_converge(ctx);
        else run_ensemble(ctx);
    } catch (const ConfigError& e) {
        ctx.exit_code = kConfigError;
        outcome.message = e.what();
    } catch (const nlohmann::json::exception& e) {
        ctx.exit_code = kConfigError;
        outcome.message = std::string("config: ") + e.what();
    } catch (const PreconditionFailure& e) {
        ctx.exit_code = kPreconditionFailure;
        outcome.message = e.what();
    } catch (const IoError& e) {
        ctx.exit_code = kIoError;
        outcome.message = e.what();
    } catch (const fs::filesystem_error& e) {
        ctx.exit_code = kIoError;
        outcome.message = e.what();
    } catch (const OperatorOverflow& e) {
        ctx.exit_code = kOverflow;
        outcome.message = e.what();
    } catch (const ContractViolation& e) {
        ctx.exit_code = kConfigError;
        outcome.message = e.what();
    }
    if (outcome.message.empty() && ctx.exit_code != kOk) outcome.message = ctx.message;
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    static const char* kStatus[] = {"ok", "io_error", "config_error", "precondition_failure", "envelope_breach",
                                    "overflow"};
    json manifest = {{"tool", "gelfand"},
                     {"version", kVersion},
                     {"config", raw},
                     {"seed", raw.is_object() ? raw.value("seed", json(nullptr)) : json(nullptr)},
                     {"status", kStatus[ctx.exit_code]},
                     {"exit_code", ctx.exit_code},
                     {"termination", ctx.termination},
                     {"message", outcome.message},
                     {"results", ctx.results},
                     {"artifacts", ctx.artifacts},
                     {"wall_time_s", wall}};
    try {
        write_json_atomic(ctx.out / "manifest.json", manifest);
    } catch (const std::exception& e) {
        if (ctx.exit_code == kOk) {
            ctx.exit_code = kIoError;
            outcome.message = e.what();
        }
    }
    outcome.exit_code = ctx.exit_code;
    outcome.manifest = std::move(manifest);
    return outcome;
}

RunOutcome run(const RunOptions& opt) {
    json doc;
    try {
        doc = json::parse(read_text(opt.config));
    } catch (const IoError& e) {
        return {kIoError, e.what(), {}, {}};
    } catch (const json::exception& e) {
        return {kConfigError, std::string("config: ") + e.what(), {}, {}};
    }
    json resolved;
    try {
        resolved = resolve_config(doc, opt.seed);
    } catch (const std::exception&) {
        fs::path out = opt.out ? *opt.out : fs::path("run");
        if (!opt.out && doc.is_object() && doc.contains("output") && doc.at("output").is_string())
            out = doc.at("output").get<std::string>();
        return run(doc, out, opt.quiet);
    }
    const fs::path out = opt.out ? *opt.out : fs::path(resolved.at("output").get<std::string>());
    return run(resolved, out, opt.quiet);
}

}  // namespace gelfand::cli
