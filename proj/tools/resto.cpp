// resto: command-line front end for the restoration planner.
//
//   resto solve <scenario.json> [--no-simplify] [--target BUS] [--dump FILE] [--session FILE]
//   resto step <session.json> '<observation json>'
//   resto stats <scenario.json> [--no-simplify]
//   resto serve [--host H] [--port N] [--state-dir DIR]

#include "resto/http.hpp"
#include "resto/resto.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

namespace {

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string next_line(const resto::Session& s) {
    auto a = s.recommend();
    return a ? "next=" + a->to_string() : std::string("next=none (goal reached)");
}

int run_solve(const std::string& path, bool no_simplify, const std::string& target, const std::string& dump,
              const std::string& session_out) {
    resto::Scenario sc = resto::load_scenario_file(path);
    if (!target.empty()) sc.goal = resto::GoalMode::target(target);
    resto::Session s = resto::start_session(sc, !no_simplify);
    std::cout << "states=" << s.mdp().size() << " value=" << format_value(s.current_value()) << '\n';
    const auto seq = s.expected_sequence();
    std::cout << "sequence=" << resto::to_string(seq) << '\n';
    if (!s.history().empty()) std::cout << "state=" << s.current_state().to_string() << '\n';
    if (!dump.empty()) {
        std::ofstream out(dump);
        if (!out) throw resto::Error(resto::ErrorCode::not_found, "cannot write " + dump);
        resto::dump_mdp(out, s.mdp());
    }
    if (!session_out.empty()) resto::service::atomic_write(session_out, resto::to_json(s).dump(2) + "\n");
    return 0;
}

int run_step(const std::string& path, const std::string& observation) {
    const auto doc = resto::detail::parse_json(resto::read_text_file(path));
    resto::Session s = resto::session_from_json(doc);
    s.apply_observation(resto::parse_observation(resto::detail::parse_json(observation)));
    resto::service::atomic_write(path, resto::to_json(s).dump(2) + "\n");
    std::cout << "state=" << s.current_state().to_string() << " value=" << format_value(s.current_value()) << '\n';
    std::cout << next_line(s) << '\n';
    return 0;
}

int run_stats(const std::string& path, bool no_simplify) {
    const resto::Scenario sc = resto::load_scenario_file(path);
    resto::BuildOptions build;
    build.simplify = !no_simplify;
    build.constraints = sc.options;
    const auto mdp = resto::build_mdp(*sc.network, sc.p_f, build);
    const auto st = resto::mdp_stats(mdp);
    std::cout << "states=" << st.states << " actions=" << st.actions << " transitions=" << st.transitions
              << " terminals=" << st.terminals << " max_depth=" << st.max_depth << '\n';
    return 0;
}

httplib::Server* g_server = nullptr;

int run_serve(const std::string& host, int port, std::string state_dir) {
    if (state_dir.empty())
        if (const char* env = std::getenv("RESTO_STATE_DIR")) state_dir = env;
    std::optional<std::filesystem::path> dir;
    if (!state_dir.empty()) dir = state_dir;
    resto::service::Service service(dir);
    httplib::Server server;
    resto::service::bind(server, service);
    g_server = &server;
    std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
    std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
    std::cerr << "resto: " << service.store().size() << " session(s) loaded";
    if (dir) std::cerr << " from " << dir->string();
    std::cerr << "; listening on " << host << ':' << port << std::endl;
    if (!server.listen(host, port)) {
        std::cerr << "resto: cannot listen on " << host << ':' << port << '\n';
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Post-earthquake distribution restoration planner"};
    app.require_subcommand(1);

    std::string scenario, target, dump, session_out;
    bool no_simplify = false;
    auto* solve = app.add_subcommand("solve", "Build and solve a scenario; print state count, value and nominal sequence");
    solve->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
    solve->add_flag("--no-simplify", no_simplify, "Use every valid action set instead of the maximal ones");
    solve->add_option("--target", target, "Minimize expected steps until this bus is energized");
    solve->add_option("--dump", dump, "Write the MDP dump to this file");
    solve->add_option("--session", session_out, "Write a session snapshot for 'step'");

    std::string session_file, observation;
    auto* step = app.add_subcommand("step", "Apply an observation to a session snapshot and print the next action");
    step->add_option("session", session_file, "Session snapshot file")->required()->check(CLI::ExistingFile);
    step->add_option("observation", observation, R"(Observation JSON, e.g. '{"action":[1,4],"outcomes":{"1":"D","4":"E"}}')")
        ->required();

    std::string stats_scenario;
    bool stats_no_simplify = false;
    auto* stats = app.add_subcommand("stats", "Print MDP size statistics for a scenario");
    stats->add_option("scenario", stats_scenario, "Scenario file")->required()->check(CLI::ExistingFile);
    stats->add_flag("--no-simplify", stats_no_simplify, "Use every valid action set instead of the maximal ones");

    std::string host = "127.0.0.1", state_dir;
    int port = 8080;
    auto* serve = app.add_subcommand("serve", "Run the HTTP+JSON session service");
    serve->add_option("--host", host, "Bind address")->capture_default_str();
    serve->add_option("--port", port, "Port")->capture_default_str()->check(CLI::Range(0, 65535));
    serve->add_option("--state-dir", state_dir, "Session directory (default: $RESTO_STATE_DIR, else in-memory)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve) return run_solve(scenario, no_simplify, target, dump, session_out);
        if (*step) return run_step(session_file, observation);
        if (*stats) return run_stats(stats_scenario, stats_no_simplify);
        if (*serve) return run_serve(host, port, state_dir);
    } catch (const resto::Error& e) {
        std::cerr << "error: " << resto::to_string(e.code()) << ": " << e.what();
        if (!e.field().empty()) std::cerr << " (at " << e.field() << ')';
        std::cerr << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
