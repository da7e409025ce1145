#include "cli.hpp"
#include "commands.hpp"

#include <certbayes/io.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <map>

namespace certbayes::cli {

namespace {

int exit_code_for(ErrorCode code)
{
    switch (code) {
        case ErrorCode::PreconditionViolated:
        case ErrorCode::BudgetMismatch:
        case ErrorCode::CgfRangeViolation: return 2;
        case ErrorCode::DivergentTrajectory:
        case ErrorCode::NonFiniteDensity: return 3;
        default: return 1;
    }
}

bool ends_with(const std::string& s, const std::string& suffix)
{
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void emit_json(const json& j, const json& cfg, std::ostream& out)
{
    if (cfg.contains("out") && !cfg["out"].is_null())
        io::write_text_file(cfg["out"].get<std::string>(), j.dump(2) + "\n");
    else
        out << j.dump(2) << "\n";
}

std::string inputs_digest(const json& cfg)
{
    std::string material = cfg.dump();
    for (const char* key : {"data", "test"}) {
        if (!cfg.contains(key) || cfg[key].is_null()) continue;
        std::ifstream in(cfg[key].get<std::string>(), std::ios::binary);
        material += "\n" + std::string(std::istreambuf_iterator<char>(in), {});
    }
    return sha256_hex(material);
}

int dispatch(const std::string& command, const json& cfg, std::ostream& out)
{
    if (command == "gen-data") {
        const auto r = cmd_gen_data(cfg);
        out << json{{"files", r.files}, {"config", cfg}}.dump(2) << "\n";
        return 0;
    }
    if (command == "certify") {
        const auto r = cmd_certify(cfg);
        emit_json(r.output, cfg, out);
        return r.all_ok ? 0 : 2;
    }
    const std::string digest = inputs_digest(cfg);
    if (command == "fit-eval") {
        const auto r = cmd_fit_eval(cfg);
        const json meta = {{"config", cfg}, {"inputs_digest", digest}, {"diagnostics", r.diagnostics},
                           {"summary", r.summary}};
        const std::string path = cfg["out"].is_null() ? std::string() : cfg["out"].get<std::string>();
        if (ends_with(path, ".csv")) {
            io::write_text_file(path, metrics_csv(r));
            io::write_text_file(path + ".json", meta.dump(2) + "\n");
        } else {
            json j = meta;
            j["rows"] = json::array();
            for (const auto& row : r.rows)
                j["rows"].push_back({{"seed", row.seed},
                                     {"posterior", row.posterior},
                                     {"delta_hat", row.delta_hat},
                                     {"risk", row.risk},
                                     {"std_error", row.std_error}});
            emit_json(j, cfg, out);
        }
        return 0;
    }
    // sweep
    const auto r = cmd_sweep(cfg);
    const std::string csv = sweep_csv(r);
    if (cfg["out"].is_null()) {
        out << csv;
    } else {
        const std::string path = cfg["out"].get<std::string>();
        io::write_text_file(path, csv);
        io::write_text_file(path + ".json",
                            json{{"config", cfg}, {"inputs_digest", digest}, {"summary", r.summary}}.dump(2) + "\n");
    }
    const bool all_ok = std::all_of(r.rows.begin(), r.rows.end(), [](const SweepRow& row) { return row.precondition_ok; });
    return all_ok ? 0 : 2;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Certified adversarially robust Bayesian linear regression"};
    app.require_subcommand(1);
    app.footer("Exit codes: 0 success, 1 usage/IO error, 2 precondition violation, 3 sampler divergence.");

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"gen-data", "generate a synthetic dataset with a JSON sidecar"},
        {"certify", "compute generalization certificates"},
        {"fit-eval", "fit Bayes and robust posteriors and evaluate test risks"},
        {"sweep", "certificates and empirical risks over a grid of training sizes"},
    };
    std::map<std::string, std::map<std::string, std::string>> storage;
    std::map<std::string, std::map<std::string, CLI::Option*>> handles;
    std::map<std::string, std::string> config_paths;
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, desc] : commands) {
        CLI::App* sub = app.add_subcommand(name, desc);
        subs[name] = sub;
        sub->add_option("--config", config_paths[name], "JSON config file; flags override it");
        for (const auto& spec : options_for(name)) {
            std::string help = spec.help;
            if (!spec.fallback.is_null()) help += " [default: " + spec.fallback.dump() + "]";
            handles[name][spec.name] = sub->add_option("--" + spec.name, storage[name][spec.name], help);
        }
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            const CLI::App* shown = &app;
            for (const auto& [name, sub] : subs)
                if (sub->parsed()) shown = sub;
            out << shown->help();
            return 0;
        }
        err << "error: " << e.what() << "\n" << "run with --help for usage\n";
        return 1;
    }

    std::string command;
    for (const auto& [name, sub] : subs)
        if (sub->parsed()) command = name;

    try {
        json flags = json::object();
        for (const auto& [key, opt] : handles[command])
            if (opt->count() > 0) flags[key] = storage[command][key];
        json file_cfg = nullptr;
        if (!config_paths[command].empty()) file_cfg = io::read_json_file(config_paths[command]);
        const json cfg = resolve_config(command, file_cfg, flags);
        err << "resolved config: " << cfg.dump() << "\n";
        return dispatch(command, cfg, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace certbayes::cli
