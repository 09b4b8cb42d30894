// incprune: solve, evaluate, simulate and benchmark POMDPs from the command line.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "incprune/incprune.hpp"

namespace ip = incprune;

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kUsage = 2, kNumerical = 3, kTimeout = 4 };

ip::PomdpModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ip::UsageError("cannot open problem file '" + path + "'");
    return ip::parse_pomdp(in);
}

ip::VectorSet load_alpha(const std::string& path, const ip::PomdpModel& model) {
    std::ifstream in(path);
    if (!in) throw ip::UsageError("cannot open alpha file '" + path + "'");
    ip::VectorSet set = ip::read_alpha_file(in, model.action_names(), model.num_states());
    if (set.empty()) throw ip::UsageError("alpha file '" + path + "' holds no vectors");
    return set;
}

// Comma-separated probabilities; the empty string means the uniform belief.
ip::Belief parse_belief(const std::string& text, const ip::PomdpModel& model) {
    if (text.empty()) return ip::Belief::uniform(model.num_states());
    std::vector<double> probs;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto v = ip::detail::to_number(item);
        if (!v) throw ip::UsageError("bad belief entry '" + item + "'");
        probs.push_back(*v);
    }
    if (probs.size() != model.num_states())
        throw ip::UsageError("belief has " + std::to_string(probs.size()) + " entries, the model has " +
                             std::to_string(model.num_states()) + " states");
    return ip::Belief(std::move(probs), 1e-6);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ip::UsageError("cannot write '" + path + "'");
    out << text;
}

ip::RunControl control_for(double timeout_seconds) {
    ip::RunControl control;
    if (timeout_seconds > 0)
        control.deadline = std::chrono::steady_clock::now() +
                           std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                               std::chrono::duration<double>(timeout_seconds));
    return control;
}

struct SolveArgs {
    std::string problem;
    std::string algorithm = "ip";
    std::string order = "natural";
    std::size_t stages = ip::kDefaultStageCap;
    double residual = 0.0;
    std::string out;
    std::string stats;
    std::uint64_t seed = 0;
    double timeout = 0.0;
    bool parallel = false;
};

int cmd_solve(const SolveArgs& args) {
    const ip::PomdpModel model = load_model(args.problem);
    ip::SolveConfig config;
    config.variant = {ip::parse_algorithm(args.algorithm), ip::parse_order(args.order)};
    config.max_stages = args.stages;
    if (args.residual > 0) config.residual_target = args.residual;
    config.seed = args.seed;
    config.parallel_actions = args.parallel;
    config.control = control_for(args.timeout);

    ip::RunInfo info{args.algorithm, args.order, args.problem, std::chrono::system_clock::now(), {}, false};
    const ip::Solution solution = ip::value_iterate(model, config);
    info.finished = std::chrono::system_clock::now();
    info.timed_out = solution.timed_out;

    const ip::VectorSet vf = ip::canonical(solution.value_function);
    if (!args.out.empty()) write_text(args.out, ip::alpha_file_text(vf, model.action_names()));
    if (!args.stats.empty()) write_text(args.stats, ip::stats_report(solution, info).dump(2) + "\n");

    std::cout << "stages " << solution.stages_run << "\nvectors " << vf.size() << "\n";
    if (!solution.residuals.empty())
        std::cout << "residual " << ip::detail::format_number(solution.residuals.back()) << "\n";
    if (solution.timed_out) {
        std::cerr << "incprune: time limit reached after " << solution.stages_run << " stages\n";
        return kTimeout;
    }
    return kOk;
}

int cmd_eval(const std::string& problem, const std::string& vf_path, const std::string& belief_text) {
    const ip::PomdpModel model = load_model(problem);
    const ip::VectorSet vf = load_alpha(vf_path, model);
    const ip::Belief x = parse_belief(belief_text, model);
    const ip::Evaluation e = ip::evaluate(vf, x);
    std::cout << "value " << ip::detail::format_number(e.value) << "\n";
    const auto& tag = vf[e.index].action;
    std::cout << "action " << (tag ? model.action_names()[*tag] : std::string("-")) << "\n";
    return kOk;
}

int cmd_oracle(const std::string& problem, std::size_t horizon, const std::string& belief_text) {
    const ip::PomdpModel model = load_model(problem);
    const ip::Belief x = parse_belief(belief_text, model);
    std::cout << "value " << ip::detail::format_number(ip::oracle_value(model, x, horizon)) << "\n";
    return kOk;
}

int cmd_simulate(const std::string& problem, const std::string& vf_path, const std::string& belief_text,
                 std::size_t trials, std::size_t horizon, std::uint64_t seed, unsigned threads) {
    const ip::PomdpModel model = load_model(problem);
    const ip::VectorSet vf = load_alpha(vf_path, model);
    const ip::Belief x = parse_belief(belief_text, model);
    const ip::SimulationResult r = ip::simulate(model, vf, x, trials, horizon, seed, threads);
    std::cout << "mean " << ip::detail::format_number(r.mean) << "\nstderr "
              << ip::detail::format_number(r.standard_error) << "\ntrials " << trials << "\n";
    return kOk;
}

struct BenchArgs {
    std::vector<std::string> problems;
    std::vector<std::string> algorithms{"ip", "rr"};
    std::string order = "natural";
    std::size_t stages = 10;
    double timeout = 0.0;
    std::string json;
    bool concurrent = false;
    std::size_t random = 0;
    std::uint64_t random_seed = 0;
    std::pair<std::size_t, std::size_t> states{2, 4};
    std::pair<std::size_t, std::size_t> actions{2, 3};
    std::pair<std::size_t, std::size_t> observations{3, 4};
    double discount = 0.9;
};

struct BenchCell {
    std::string problem;
    std::string algorithm;
    ip::Json report;
    double t_total = 0.0;
    double t_sa_build = 0.0;
    bool timed_out = false;
};

BenchCell run_cell(const std::string& name, const ip::PomdpModel& model, const std::string& algorithm,
                   const BenchArgs& args) {
    ip::SolveConfig config;
    config.variant = {ip::parse_algorithm(algorithm), ip::parse_order(args.order)};
    config.max_stages = args.stages;
    config.control = control_for(args.timeout);
    ip::RunInfo info{algorithm, args.order, name, std::chrono::system_clock::now(), {}, false};
    const auto start = std::chrono::steady_clock::now();
    const ip::Solution solution = ip::value_iterate(model, config);
    const auto stop = std::chrono::steady_clock::now();
    info.finished = std::chrono::system_clock::now();
    info.timed_out = solution.timed_out;

    BenchCell cell{name, algorithm, ip::stats_report(solution, info), 0.0, 0.0, solution.timed_out};
    cell.t_total = ip::round_ms(std::chrono::duration<double>(stop - start).count());
    cell.t_sa_build = cell.report["totals"]["phases"]["sa_build"]["seconds"].get<double>();
    return cell;
}

std::string fixed3(double v) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(3) << v;
    return out.str();
}

int cmd_bench(const BenchArgs& args) {
    for (const auto& a : args.algorithms) ip::parse_algorithm(a);
    ip::parse_order(args.order);

    std::vector<std::pair<std::string, ip::PomdpModel>> problems;
    for (const auto& path : args.problems) problems.emplace_back(path, load_model(path));
    for (std::size_t i = 0; i < args.random; ++i) {
        const std::uint64_t seed = args.random_seed + i;
        problems.emplace_back("random-" + std::to_string(seed),
                              ip::random_model_in_ranges(args.states.first, args.states.second, args.actions.first,
                                                         args.actions.second, args.observations.first,
                                                         args.observations.second, args.discount, seed));
    }
    if (problems.empty()) throw ip::UsageError("bench needs problem files or --random N");

    std::vector<BenchCell> cells;
    if (args.concurrent) {
        std::vector<std::future<BenchCell>> jobs;
        for (const auto& [name, model] : problems)
            for (const auto& a : args.algorithms)
                jobs.push_back(std::async(std::launch::async, run_cell, std::cref(name), std::cref(model),
                                          std::cref(a), std::cref(args)));
        for (auto& j : jobs) cells.push_back(j.get());
    } else {
        for (const auto& [name, model] : problems)
            for (const auto& a : args.algorithms) cells.push_back(run_cell(name, model, a, args));
    }

    int name_width = 9;
    for (const auto& c : cells) name_width = std::max(name_width, static_cast<int>(c.problem.size()) + 2);
    std::cout << std::left << std::setw(name_width) << "problem" << std::setw(12) << "algorithm" << std::right
              << std::setw(8) << "stages" << std::setw(8) << "|S'|" << std::setw(12) << "T_TOTAL" << std::setw(12)
              << "T_SA_BUILD" << std::setw(12) << "lp_count" << std::setw(18) << "constraint_total" << "\n";
    bool any_timeout = false;
    ip::Json rows = ip::Json::array();
    for (const auto& c : cells) {
        const ip::Json& totals = c.report["totals"];
        any_timeout = any_timeout || c.timed_out;
        std::cout << std::left << std::setw(name_width) << c.problem << std::setw(12) << c.algorithm << std::right
                  << std::setw(8) << totals["stages_run"].get<std::size_t>() << std::setw(8)
                  << totals["result_size"].get<std::size_t>() << std::setw(12)
                  << (c.timed_out ? std::string(">TIMEOUT") : fixed3(c.t_total)) << std::setw(12)
                  << fixed3(c.t_sa_build) << std::setw(12) << totals["lp_count"].get<std::uint64_t>() << std::setw(18)
                  << totals["constraint_total"].get<std::uint64_t>() << "\n";
        ip::Json row;
        row["problem"] = c.problem;
        row["algorithm"] = c.algorithm;
        row["stages_run"] = totals["stages_run"];
        row["result_size"] = totals["result_size"];
        row["t_total"] = c.t_total;
        row["t_sa_build"] = c.t_sa_build;
        row["lp_count"] = totals["lp_count"];
        row["constraint_total"] = totals["constraint_total"];
        row["timed_out"] = c.timed_out;
        row["stats"] = c.report;
        rows.push_back(std::move(row));
    }
    if (args.concurrent) std::cout << "(cells ran concurrently; times are contended)\n";

    if (!args.json.empty()) {
        ip::Json doc;
        doc["stages"] = args.stages;
        doc["order"] = args.order;
        doc["timeout_seconds"] = args.timeout;
        doc["contended"] = args.concurrent;
        doc["cells"] = std::move(rows);
        const std::string text = doc.dump(2) + "\n";
        if (args.json == "-")
            std::cout << text;
        else
            write_text(args.json, text);
    }
    return any_timeout ? kTimeout : kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact POMDP value iteration with incremental pruning"};
    app.require_subcommand(1);

    SolveArgs solve;
    auto* solve_cmd = app.add_subcommand("solve", "Run value iteration and write the value function");
    solve_cmd->add_option("problem", solve.problem, "Problem file")->required();
    solve_cmd->add_option("--algorithm", solve.algorithm, "exhaustive, ip, rr or rr-min")
        ->check(CLI::IsMember({"exhaustive", "ip", "rr", "rr-min"}));
    solve_cmd->add_option("--order", solve.order, "Observation fold order")
        ->check(CLI::IsMember({"natural", "smallest-first"}));
    solve_cmd->add_option("--stages", solve.stages, "Stage cap (default 100)");
    solve_cmd->add_option("--residual", solve.residual, "Stop once the residual estimate is at most EPS");
    solve_cmd->add_option("--out", solve.out, "Alpha file to write");
    solve_cmd->add_option("--stats", solve.stats, "Stats JSON to write");
    solve_cmd->add_option("--seed", solve.seed, "Seed for the residual estimate's random beliefs");
    solve_cmd->add_option("--timeout", solve.timeout, "Wall-clock limit in seconds (0 = none)");
    solve_cmd->add_flag("--parallel", solve.parallel, "Build the per-action sets concurrently");

    std::string problem, vf_path, belief;
    std::size_t horizon = 0, trials = 1000;
    std::uint64_t seed = 0;
    unsigned threads = 1;

    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a value function at a belief");
    eval_cmd->add_option("problem", problem, "Problem file")->required();
    eval_cmd->add_option("--vf", vf_path, "Alpha file")->required();
    eval_cmd->add_option("--belief", belief, "p1,p2,... (default uniform)");

    auto* oracle_cmd = app.add_subcommand("oracle", "Finite-horizon value by expectimax search");
    oracle_cmd->add_option("problem", problem, "Problem file")->required();
    oracle_cmd->add_option("--horizon", horizon, "Horizon t")->required();
    oracle_cmd->add_option("--belief", belief, "p1,p2,... (default uniform)");

    auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo return of the greedy policy");
    sim_cmd->add_option("problem", problem, "Problem file")->required();
    sim_cmd->add_option("--vf", vf_path, "Alpha file")->required();
    sim_cmd->add_option("--belief", belief, "p1,p2,... (default uniform)");
    sim_cmd->add_option("--trials", trials, "Number of rollouts");
    sim_cmd->add_option("--horizon", horizon, "Steps per rollout")->required();
    sim_cmd->add_option("--seed", seed, "Base seed");
    sim_cmd->add_option("--threads", threads, "Worker threads");

    BenchArgs bench;
    std::string algorithms = "ip,rr";
    auto* bench_cmd = app.add_subcommand("bench", "Compare algorithms on a set of problems");
    bench_cmd->add_option("problems", bench.problems, "Problem files");
    bench_cmd->add_option("--algorithms", algorithms, "Comma-separated list (default ip,rr)");
    bench_cmd->add_option("--order", bench.order, "Observation fold order")
        ->check(CLI::IsMember({"natural", "smallest-first"}));
    bench_cmd->add_option("--stages", bench.stages, "Stages per run (default 10)");
    bench_cmd->add_option("--timeout", bench.timeout, "Per-cell wall-clock limit in seconds (0 = none)");
    bench_cmd->add_option("--json", bench.json, "Write the machine-readable table here ('-' for stdout)");
    bench_cmd->add_flag("--concurrent", bench.concurrent, "Run cells concurrently");
    bench_cmd->add_option("--random", bench.random, "Add N seeded random models");
    bench_cmd->add_option("--random-seed", bench.random_seed, "Seed of the first random model");
    bench_cmd->add_option("--states", bench.states, "Range LO HI of |S| for random models");
    bench_cmd->add_option("--actions", bench.actions, "Range LO HI of |A| for random models");
    bench_cmd->add_option("--observations", bench.observations, "Range LO HI of |Z| for random models");
    bench_cmd->add_option("--discount", bench.discount, "Discount of random models");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*solve_cmd) return cmd_solve(solve);
        if (*eval_cmd) return cmd_eval(problem, vf_path, belief);
        if (*oracle_cmd) return cmd_oracle(problem, horizon, belief);
        if (*sim_cmd) return cmd_simulate(problem, vf_path, belief, trials, horizon, seed, threads);
        if (*bench_cmd) {
            bench.algorithms.clear();
            std::stringstream ss(algorithms);
            std::string item;
            while (std::getline(ss, item, ','))
                if (!item.empty()) bench.algorithms.push_back(item);
            return cmd_bench(bench);
        }
    } catch (const ip::TimeoutExpired& e) {
        std::cerr << "incprune: " << e.what() << "\n";
        return kTimeout;
    } catch (const ip::NumericalFailure& e) {
        std::cerr << "incprune: numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const ip::ZeroProbabilityObservation& e) {
        std::cerr << "incprune: " << e.what() << "\n";
        return kNumerical;
    } catch (const ip::CombinatorialBlowup& e) {
        std::cerr << "incprune: " << e.what() << "\n";
        return kNumerical;
    } catch (const ip::ParseError& e) {
        std::cerr << "incprune: parse error at " << e.what() << "\n";
        return kUsage;
    } catch (const ip::ValidationError& e) {
        std::cerr << "incprune: invalid model: " << e.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        // UsageError, NonConvergent, EmptySet
        std::cerr << "incprune: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "incprune: internal error: " << e.what() << "\n";
        return kInternal;
    }
    return kUsage;
}
