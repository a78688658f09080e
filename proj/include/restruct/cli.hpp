#pragma once

// The restruct command line: search, translate, evaluate, neighbors, explain
// and make-planted. run_cli takes the argument list and output streams so
// the commands can be driven from tests.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "restruct/agents.hpp"
#include "restruct/error.hpp"
#include "restruct/evolution.hpp"
#include "restruct/grammar.hpp"
#include "restruct/log.hpp"
#include "restruct/metastructure.hpp"
#include "restruct/mutations.hpp"
#include "restruct/run_config.hpp"
#include "restruct/synthetic.hpp"

namespace restruct {

enum ExitCode { exit_ok = 0, exit_usage = 1, exit_data = 2, exit_backend = 3 };

namespace cli {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string structure;
    std::string schema;
    std::string result;
    std::string split = "val";
    std::optional<std::size_t> cap;
    std::optional<std::size_t> insertion_max_interior;
    std::optional<std::size_t> grafting_max_nodes;
    std::optional<std::size_t> max_nodes;
    std::optional<std::size_t> top_k;
    std::optional<std::size_t> explain_neighbors;
    std::string dir;
};

inline Schema schema_for(const Options& o) {
    if (!o.schema.empty()) return load_schema(o.schema);
    if (!o.config.empty()) {
        const auto c = RunConfig::load(o.config);
        return load_schema(c.schema);
    }
    throw UsageError("a schema is required: pass --schema or --config");
}

/// Loads a structure file and rejects it unless it is valid for `schema`.
inline MetaStructure checked_structure(const std::string& path, const Schema& schema) {
    const auto ms = load_metastructure(path);
    const auto problems = validate(ms, schema);
    if (!problems.empty()) {
        std::string msg = "invalid structure " + path + ":";
        for (const auto& p : problems) msg += "\n  " + p;
        throw DataError(msg);
    }
    return ms;
}

inline RunConfig config_with_overrides(const Options& o) {
    if (o.config.empty()) throw UsageError("--config is required");
    auto c = RunConfig::load(o.config);
    if (o.seed) c.search.seed = *o.seed;
    if (!o.out.empty()) c.output = o.out;
    return c;
}

inline int cmd_search(const Options& o, std::ostream& out) {
    const auto c = config_with_overrides(o);
    Workspace ws(c);
    const auto backend = make_backend(c);
    fs::create_directories(c.output);
    TranscriptLog transcript(c.output / "transcript.jsonl");
    Agents agents(*backend, load_prompts(c), agent_config(c, ws), &transcript);
    const auto r = run_search(c.search, ws.schema(), ws.evaluator(), agents, c.output);
    const auto metric = to_string(r.metric);
    out << "best " << metric << " val=" << format_number(r.best->second.value)
        << " test=" << format_number(*r.best_test) << "\n"
        << r.best->second.view.sentence << "\n"
        << "pool=" << r.pool.size() << " evaluator_calls=" << r.evaluator_calls << "\n"
        << "results written to " << c.output.string() << "\n";
    return exit_ok;
}

inline int cmd_translate(const Options& o, std::ostream& out) {
    const auto schema = schema_for(o);
    out << encode_metastructure(checked_structure(o.structure, schema), schema) << "\n";
    return exit_ok;
}

inline int cmd_evaluate(const Options& o, std::ostream& out) {
    if (o.config.empty()) throw UsageError("--config is required");
    Workspace ws(RunConfig::load(o.config));
    const auto ms = checked_structure(o.structure, ws.schema());
    const auto r = ws.evaluator().evaluate(ms, split_tag_from_string(o.split));
    out << to_string(r.metric) << " " << format_number(r.value) << " split=" << to_string(r.split) << "\n";
    return exit_ok;
}

inline int cmd_neighbors(const Options& o, std::ostream& out) {
    const auto schema = schema_for(o);
    ComponentLimits limits;
    if (!o.config.empty()) limits = RunConfig::load(o.config).search.limits;
    if (o.insertion_max_interior) limits.insertion_max_interior = *o.insertion_max_interior;
    if (o.grafting_max_nodes) limits.grafting_max_nodes = *o.grafting_max_nodes;
    if (o.max_nodes) limits.max_structure_nodes = *o.max_nodes;
    const auto ms = checked_structure(o.structure, schema);
    Rng rng(o.seed.value_or(0));
    const auto cs = one_step_neighbors(ms, build_component_library(schema, limits), schema, rng,
                                       o.cap.value_or(std::numeric_limits<std::size_t>::max()));
    out << "neighbors=" << cs.total << " sampled=" << (cs.sampled ? "true" : "false") << "\n";
    for (const auto& n : cs.candidates)
        out << to_string(n.op.op) << "\t" << n.key.value << "\t" << encode_metastructure(n.structure, schema) << "\t"
            << n.op.detail.dump() << "\n";
    return exit_ok;
}

inline Individual individual_from_json(const json& structure, double fitness) {
    auto ind = make_individual(metastructure_from_json(structure));
    ind.fitness = fitness;
    ind.evaluated = true;
    return ind;
}

inline int cmd_explain(const Options& o, std::ostream& out) {
    const fs::path result_path = o.result;
    if (!fs::exists(result_path)) throw DataError("result file not found: " + result_path.string());
    const auto result = read_json_file(result_path);
    const auto result_dir = result_path.parent_path().empty() ? fs::path(".") : result_path.parent_path();

    auto c = config_with_overrides(o);
    Workspace ws(c);
    auto search = SearchConfig::from_json(result.at("config"));
    if (o.seed) search.seed = *o.seed;
    const auto k = o.top_k.value_or(search.explain_top_k);
    const auto n = o.explain_neighbors.value_or(search.explain_neighbors);
    if (k < 1 || n < 1) throw UsageError("--top-k and --neighbors must be >= 1");

    std::optional<Individual> best;
    std::vector<Individual> finals;
    try {
        if (result.contains("best"))
            best = individual_from_json(result["best"].at("structure"), result["best"].at("validation").get<double>());
        for (const auto& f : result.at("final_population"))
            finals.push_back(individual_from_json(f.at("structure"), f.at("fitness").get<double>()));
    } catch (const json::exception& e) {
        throw DataError("malformed result file " + result_path.string() + ": " + e.what());
    }
    const auto pool_path = result_dir / "pool.json";
    const auto pool = fs::exists(pool_path) ? PerformancePool::from_json(read_json_file(pool_path), ws.schema())
                                            : PerformancePool{};

    const fs::path out_dir = o.out.empty() ? result_dir : fs::path(o.out);
    fs::create_directories(out_dir);
    const auto backend = make_backend(c);
    TranscriptLog transcript(out_dir / "explain_transcript.jsonl");
    Agents agents(*backend, load_prompts(c), agent_config(c, ws), &transcript);
    auto rng = explain_rng(search.seed);
    SearchResult r;
    r.explanations = explain_structures(select_explain_targets(best, finals, k), ws.schema(), ws.evaluator(), agents,
                                        build_component_library(ws.schema(), search.limits), pool, n, rng);
    write_file_atomic(out_dir / "explanations.json", r.explanations_json().dump(2) + "\n");
    out << "explained " << r.explanations.size() << " structures; reports written to "
        << (out_dir / "explanations.json").string() << "\n";
    return exit_ok;
}

inline int cmd_make_planted(const Options& o, std::ostream& out) {
    PlantedParams p;
    if (o.seed) p.seed = *o.seed;
    const fs::path dir = o.dir;
    write_planted(generate_planted(p), dir);
    const json config = {{"schema", "schema.json"},
                         {"dataset", "data"},
                         {"task", {{"recommendation", {{"relation", "rates"}, {"ratings", "data/ratings.tsv"}}}}},
                         {"split", {{"seed", 0}}},
                         {"search", {{"seed", 0}}},
                         {"backend", {{"kind", "stub"}}},
                         {"output", "out"}};
    write_file_atomic(dir / "config.json", config.dump(2) + "\n");
    write_file_atomic(dir / "planted_structure.json", to_json(planted_structure()).dump(2) + "\n");
    out << "planted dataset written to " << dir.string() << "\n";
    return exit_ok;
}

} // namespace cli

/// Parses `args` (without the program name) and runs the chosen command.
/// Diagnostics and warnings go to `err`; the return value is the exit code.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Meta-structure search over heterogeneous information networks", "restruct"};
    app.require_subcommand(1);
    cli::Options o;

    auto config_flag = [&](CLI::App* sub, bool required) {
        auto* opt = sub->add_option("--config", o.config, "Run configuration file (JSON)");
        if (required) opt->required();
    };
    auto seed_flag = [&](CLI::App* sub, const std::string& what) { sub->add_option("--seed", o.seed, what); };
    auto out_flag = [&](CLI::App* sub, const std::string& what) { sub->add_option("--out", o.out, what); };

    auto* search = app.add_subcommand("search", "Run the evolutionary search described by a config");
    config_flag(search, true);
    seed_flag(search, "Override the search seed");
    out_flag(search, "Override the output directory");

    auto* translate = app.add_subcommand("translate", "Print the sentence for a structure file");
    translate->add_option("structure", o.structure, "Structure JSON file")->required();
    translate->add_option("--schema", o.schema, "Schema JSON file");
    config_flag(translate, false);

    auto* evaluate = app.add_subcommand("evaluate", "Score a structure file on the configured task");
    evaluate->add_option("structure", o.structure, "Structure JSON file")->required();
    config_flag(evaluate, true);
    evaluate->add_option("--split", o.split, "Split to score on")->check(CLI::IsMember({"train", "val", "test"}));

    auto* neighbors = app.add_subcommand("neighbors", "List the one-step neighbors of a structure file");
    neighbors->add_option("structure", o.structure, "Structure JSON file")->required();
    neighbors->add_option("--schema", o.schema, "Schema JSON file");
    config_flag(neighbors, false);
    seed_flag(neighbors, "Seed for sampling when --cap is exceeded");
    neighbors->add_option("--cap", o.cap, "Keep a uniform sample of at most this many neighbors")
        ->check(CLI::PositiveNumber);
    neighbors->add_option("--insertion-max-interior", o.insertion_max_interior, "Interior nodes of an insertion component");
    neighbors->add_option("--grafting-max-nodes", o.grafting_max_nodes, "Total nodes of a grafting component");
    neighbors->add_option("--max-nodes", o.max_nodes, "Size cap on produced structures");

    auto* explain = app.add_subcommand("explain", "Re-run the explainer on a saved search result");
    explain->add_option("result", o.result, "result.json written by search")->required();
    config_flag(explain, true);
    seed_flag(explain, "Override the seed of the explainer's neighbor sampling");
    out_flag(explain, "Directory for the reports (default: next to the result file)");
    explain->add_option("--top-k", o.top_k, "Number of structures to explain");
    explain->add_option("--neighbors", o.explain_neighbors, "Neighbors sampled per structure");

    auto* planted = app.add_subcommand("make-planted", "Write the synthetic planted dataset and a config for it");
    planted->add_option("dir", o.dir, "Output directory")->required();
    seed_flag(planted, "Generator seed");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    auto previous = set_log_sink([&err](std::string_view level, std::string_view message) {
        err << level << ": " << message << "\n";
    });
    int code = exit_ok;
    try {
        if (*search) code = cli::cmd_search(o, out);
        else if (*translate) code = cli::cmd_translate(o, out);
        else if (*evaluate) code = cli::cmd_evaluate(o, out);
        else if (*neighbors) code = cli::cmd_neighbors(o, out);
        else if (*explain) code = cli::cmd_explain(o, out);
        else if (*planted) code = cli::cmd_make_planted(o, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        code = exit_usage;
    } catch (const BackendError& e) {
        err << "backend error: " << e.what() << "\n";
        code = exit_backend;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        code = exit_data;
    }
    set_log_sink(std::move(previous));
    return code;
}

} // namespace restruct
