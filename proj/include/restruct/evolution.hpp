#pragma once

#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "restruct/agents.hpp"
#include "restruct/canonical.hpp"
#include "restruct/evaluator.hpp"
#include "restruct/grammar.hpp"
#include "restruct/io.hpp"
#include "restruct/log.hpp"
#include "restruct/mutations.hpp"
#include "restruct/random.hpp"
#include "restruct/seeding.hpp"

namespace restruct {

struct SearchConfig {
    int generations = 30;
    std::size_t population = 5;
    double elimination_rate = 0.2;
    std::size_t candidate_cap = 20;
    std::size_t pool_sample = 30;
    std::uint64_t seed = 0;
    ComponentLimits limits;
    bool explain = true;
    std::size_t explain_top_k = 3;
    std::size_t explain_neighbors = 4;
    std::size_t eval_threads = 0; ///< 0: hardware concurrency

    void check() const {
        if (generations < 0) throw UsageError("generations must be >= 0");
        if (population < 2) throw UsageError("population must be >= 2");
        if (!(elimination_rate > 0.0 && elimination_rate < 1.0)) throw UsageError("elimination rate must be in (0, 1)");
        if (candidate_cap < 1 || pool_sample < 1) throw UsageError("candidate cap and pool sample must be >= 1");
        if (explain && (explain_top_k < 1 || explain_neighbors < 1))
            throw UsageError("explainer top-k and neighbor count must be >= 1");
    }

    json to_json() const {
        return {{"generations", generations},
                {"population", population},
                {"elimination_rate", elimination_rate},
                {"candidate_cap", candidate_cap},
                {"pool_sample", pool_sample},
                {"seed", seed},
                {"insertion_max_interior", limits.insertion_max_interior},
                {"grafting_max_nodes", limits.grafting_max_nodes},
                {"max_structure_nodes", limits.max_structure_nodes},
                {"explain", explain},
                {"explain_top_k", explain_top_k},
                {"explain_neighbors", explain_neighbors}};
    }

    /// Fields present in `j` override the defaults.
    static SearchConfig from_json(const json& j) {
        SearchConfig c;
        try {
            c.generations = j.value("generations", c.generations);
            c.population = j.value("population", c.population);
            c.elimination_rate = j.value("elimination_rate", c.elimination_rate);
            c.candidate_cap = j.value("candidate_cap", c.candidate_cap);
            c.pool_sample = j.value("pool_sample", c.pool_sample);
            c.seed = j.value("seed", c.seed);
            c.limits.insertion_max_interior = j.value("insertion_max_interior", c.limits.insertion_max_interior);
            c.limits.grafting_max_nodes = j.value("grafting_max_nodes", c.limits.grafting_max_nodes);
            c.limits.max_structure_nodes = j.value("max_structure_nodes", c.limits.max_structure_nodes);
            c.explain = j.value("explain", c.explain);
            c.explain_top_k = j.value("explain_top_k", c.explain_top_k);
            c.explain_neighbors = j.value("explain_neighbors", c.explain_neighbors);
            c.eval_threads = j.value("eval_threads", c.eval_threads);
        } catch (const json::exception& e) {
            throw UsageError(std::string("bad search settings: ") + e.what());
        }
        c.check();
        return c;
    }
};

struct Individual {
    MetaStructure structure;
    CanonicalKey key;
    double fitness = 0.0;
    bool evaluated = false;
};

inline Individual make_individual(MetaStructure ms) {
    Individual ind;
    ind.key = canonical_key(ms);
    ind.structure = std::move(ms);
    return ind;
}

struct PoolEntry {
    MetaStructure structure;
    StructureView view;
    double value = 0.0;
    int generation = 0; ///< generation of the first evaluation
};

/// Every evaluated structure by canonical key. Insert-once: a second insert
/// of a key returns the stored entry unchanged.
class PerformancePool {
public:
    PerformancePool() = default;
    PerformancePool(const PerformancePool& other) {
        std::lock_guard lock(other.mutex_);
        index_ = other.index_;
        entries_ = other.entries_;
    }

    std::pair<PoolEntry, bool> insert_or_get(const CanonicalKey& key, PoolEntry entry) {
        std::lock_guard lock(mutex_);
        const auto [it, fresh] = index_.emplace(key, entries_.size());
        if (fresh) entries_.emplace_back(key, std::move(entry));
        return {entries_[it->second].second, fresh};
    }

    std::optional<PoolEntry> find(const CanonicalKey& key) const {
        std::lock_guard lock(mutex_);
        const auto it = index_.find(key);
        if (it == index_.end()) return std::nullopt;
        return entries_[it->second].second;
    }

    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return entries_.size();
    }

    /// Entries in insertion order.
    std::vector<std::pair<CanonicalKey, PoolEntry>> entries() const {
        std::lock_guard lock(mutex_);
        return entries_;
    }

    /// `k` records drawn without replacement (the whole pool when smaller),
    /// in insertion order.
    std::vector<PoolRecord> sample(Rng& rng, std::size_t k) const {
        std::lock_guard lock(mutex_);
        std::vector<PoolRecord> out;
        for (auto i : sample_indices(rng, entries_.size(), k))
            out.push_back({entries_[i].second.view, entries_[i].second.value});
        return out;
    }

    /// Highest value; ties go to fewer edges, then the smaller key.
    std::optional<std::pair<CanonicalKey, PoolEntry>> best() const {
        std::lock_guard lock(mutex_);
        const std::pair<CanonicalKey, PoolEntry>* best = nullptr;
        for (const auto& e : entries_) {
            if (!best || e.second.value > best->second.value ||
                (e.second.value == best->second.value &&
                 std::pair(e.second.structure.edge_count(), e.first) < std::pair(best->second.structure.edge_count(), best->first)))
                best = &e;
        }
        if (!best) return std::nullopt;
        return *best;
    }

    json to_json(MetricKind metric) const {
        json out = json::array();
        for (const auto& [key, e] : entries())
            out.push_back({{"key", key.value},
                           {"sentence", e.view.sentence},
                           {"metric", to_string(metric)},
                           {"value", e.value},
                           {"split", "val"},
                           {"generation", e.generation},
                           {"structure", restruct::to_json(e.structure)}});
        return out;
    }

    /// Rebuilds a pool written by to_json.
    static PerformancePool from_json(const json& j, const Schema& schema) {
        PerformancePool pool;
        try {
            for (const auto& e : j) {
                auto ms = metastructure_from_json(e.at("structure"));
                const auto key = canonical_key(ms);
                if (key.value != e.at("key").get<std::string>())
                    throw DataError("pool entry key does not match its structure: " + key.value);
                auto view = describe(ms, schema);
                pool.insert_or_get(key, {std::move(ms), std::move(view), e.at("value").get<double>(),
                                         e.at("generation").get<int>()});
            }
        } catch (const json::exception& e) {
            throw DataError(std::string("malformed pool file: ") + e.what());
        }
        return pool;
    }

private:
    mutable std::mutex mutex_;
    std::map<CanonicalKey, std::size_t> index_;
    std::vector<std::pair<CanonicalKey, PoolEntry>> entries_;
};

/// JSON-lines search events, each stamped with the generation and the rng
/// state digest at the time of the event.
class EventLog {
public:
    void add(int generation, const Rng& rng, std::string_view kind, json fields = json::object()) {
        json e = {{"generation", generation}, {"event", kind}};
        for (auto& [k, v] : fields.items()) e[k] = std::move(v);
        e["rng"] = state_digest(rng);
        events_.push_back(std::move(e));
    }
    const std::vector<json>& events() const { return events_; }
    std::string dump() const {
        std::string out;
        for (const auto& e : events_) out += e.dump() + "\n";
        return out;
    }

private:
    std::vector<json> events_;
};

/// ⌊N·rate⌋ (with a small tolerance for rates like 0.2 that are inexact in
/// binary), at least 1 and at most N−1.
inline std::size_t elimination_count(std::size_t n, double rate) {
    auto k = static_cast<std::size_t>(std::floor(static_cast<double>(n) * rate + 1e-9));
    k = std::max<std::size_t>(k, 1);
    return std::min(k, n > 1 ? n - 1 : 0);
}

struct Elimination {
    std::vector<Individual> survivors; ///< in their original order
    std::vector<Individual> eliminated;
};

/// Removes the lowest-fitness individuals. Among equal fitness the one with
/// more edges goes first, then the one with the larger canonical key.
inline Elimination eliminate(const std::vector<Individual>& population, double rate) {
    const auto k = elimination_count(population.size(), rate);
    std::vector<std::size_t> order(population.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& x = population[a];
        const auto& y = population[b];
        if (x.fitness != y.fitness) return x.fitness < y.fitness;
        if (x.structure.edge_count() != y.structure.edge_count())
            return x.structure.edge_count() > y.structure.edge_count();
        return x.key > y.key;
    });
    std::vector<bool> out(population.size(), false);
    for (std::size_t i = 0; i < k; ++i) out[order[i]] = true;
    Elimination e;
    for (std::size_t i = 0; i < population.size(); ++i) (out[i] ? e.eliminated : e.survivors).push_back(population[i]);
    return e;
}

/// Draw probabilities for reproduction: fitness over total fitness, uniform
/// when the total is zero.
inline std::vector<double> reproduction_probabilities(const std::vector<Individual>& survivors) {
    double total = 0.0;
    for (const auto& s : survivors) total += s.fitness;
    std::vector<double> p;
    for (const auto& s : survivors)
        p.push_back(total > 0.0 ? s.fitness / total : 1.0 / static_cast<double>(survivors.size()));
    return p;
}

struct Reproduction {
    std::vector<Individual> population;
    std::vector<std::size_t> draws; ///< survivor index of each appended duplicate
};

/// Keeps every survivor and appends fitness-proportional duplicates up to `n`.
inline Reproduction reproduce(const std::vector<Individual>& survivors, std::size_t n, Rng& rng) {
    if (survivors.empty()) throw UsageError("reproduce needs at least one survivor");
    std::vector<double> weights;
    for (const auto& s : survivors) weights.push_back(std::max(0.0, s.fitness));
    Reproduction r{survivors, {}};
    while (r.population.size() < n) {
        const auto i = weighted_index(rng, weights);
        r.draws.push_back(i);
        r.population.push_back(survivors[i]);
    }
    return r;
}

/// Fills in fitness from the pool, evaluating (on the validation split) only
/// keys the pool has not seen. Distinct missing keys are evaluated in
/// parallel and inserted in population order. Returns the number of
/// evaluator calls.
inline std::size_t evaluate_population(std::vector<Individual>& population, const Evaluator& evaluator,
                                       PerformancePool& pool, const Schema& schema, int generation,
                                       std::size_t threads = 0) {
    std::vector<std::size_t> todo;
    std::set<CanonicalKey> queued;
    for (std::size_t i = 0; i < population.size(); ++i)
        if (!pool.find(population[i].key) && queued.insert(population[i].key).second) todo.push_back(i);

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    std::vector<double> values(todo.size());
    for (std::size_t start = 0; start < todo.size(); start += threads) {
        const auto stop = std::min(todo.size(), start + threads);
        std::vector<std::future<double>> running;
        for (std::size_t j = start; j < stop; ++j) {
            const auto& ms = population[todo[j]].structure;
            running.push_back(std::async(threads > 1 ? std::launch::async : std::launch::deferred,
                                         [&evaluator, &ms] { return evaluator.evaluate(ms, SplitTag::val).value; }));
        }
        for (std::size_t j = start; j < stop; ++j) values[j] = running[j - start].get();
    }
    for (std::size_t j = 0; j < todo.size(); ++j) {
        const auto& ind = population[todo[j]];
        pool.insert_or_get(ind.key, {ind.structure, describe(ind.structure, schema), values[j], generation});
    }
    for (auto& ind : population) {
        ind.fitness = pool.find(ind.key)->value;
        ind.evaluated = true;
    }
    return todo.size();
}

struct MutationOutcome {
    Individual individual;
    json event;
};

/// Replaces one individual by the neighbor the agents pick. With no
/// neighbors, or when an agent fails, the individual passes through.
inline MutationOutcome mutate_individual(const Individual& ind, const ComponentLibrary& lib, const Schema& schema,
                                         const Agents& agents, const PerformancePool& pool,
                                         const SearchConfig& config, Rng& rng) {
    json ev = {{"from", ind.key.value}};
    const auto cs = one_step_neighbors(ind.structure, lib, schema, rng, config.candidate_cap);
    ev["neighbors"] = cs.total;
    ev["sampled"] = cs.sampled;
    if (cs.candidates.empty()) {
        ev["to"] = ind.key.value;
        ev["outcome"] = "no neighbors";
        return {ind, ev};
    }
    std::vector<StructureView> views;
    for (const auto& c : cs.candidates) views.push_back(describe(c.structure, schema));
    const auto sample = pool.sample(rng, config.pool_sample);
    try {
        const auto preds = agents.predict_candidates(views, sample);
        std::vector<SelectorItem> items;
        std::size_t fallbacks = 0;
        for (std::size_t j = 0; j < views.size(); ++j) {
            items.push_back({views[j], preds[j].p, preds[j].c});
            fallbacks += preds[j].fallback;
        }
        const auto d = agents.select_candidate(items);
        const auto& chosen = cs.candidates[d.index];
        ev["to"] = chosen.key.value;
        ev["outcome"] = "mutated";
        ev["op"] = chosen.op.to_json();
        ev["offered"] = cs.candidates.size();
        ev["pool_sample"] = sample.size();
        ev["choice"] = d.index;
        ev["p"] = preds[d.index].p;
        ev["c"] = preds[d.index].c;
        ev["predictor_fallbacks"] = fallbacks;
        ev["selector_fallback"] = d.fallback;
        ev["rationale"] = d.rationale;
        Individual next;
        next.structure = chosen.structure;
        next.key = chosen.key;
        return {next, ev};
    } catch (const BackendError& e) {
        log_warning(std::string("agent failure, individual kept: ") + e.what());
        ev["to"] = ind.key.value;
        ev["outcome"] = "agent failure";
        ev["error"] = e.what();
        return {ind, ev};
    }
}

/// Mutates every individual in order; the rng advances per individual, so
/// duplicates can take different neighbors.
inline std::vector<Individual> mutate_population(const std::vector<Individual>& population, const ComponentLibrary& lib,
                                                 const Schema& schema, const Agents& agents, const PerformancePool& pool,
                                                 const SearchConfig& config, Rng& rng, EventLog* log = nullptr,
                                                 int generation = 0) {
    std::vector<Individual> out;
    for (std::size_t i = 0; i < population.size(); ++i) {
        auto m = mutate_individual(population[i], lib, schema, agents, pool, config, rng);
        if (log) {
            m.event["index"] = i;
            log->add(generation, rng, "mutation", std::move(m.event));
        }
        out.push_back(std::move(m.individual));
    }
    return out;
}

struct GenerationSummary {
    int generation = 0;
    double best = 0.0;
    double mean = 0.0;
    std::vector<Individual> population;
};

struct ExplainTarget {
    MetaStructure structure;
    double value = 0.0;
};

struct ExplainedStructure {
    CanonicalKey key;
    ExplainerReport report;
};

/// Rng stream for post-search explanations, separate from the search so that
/// re-running the explainer on a saved result reproduces it.
inline Rng explain_rng(std::uint64_t seed) { return Rng(seed ^ 0x9e3779b97f4a7c15ULL); }

/// Runs the explainer on each target with `n` sampled one-step neighbors.
/// Neighbor metrics come from the pool when present and are otherwise
/// computed here without being added to it.
inline std::vector<ExplainedStructure> explain_structures(const std::vector<ExplainTarget>& targets, const Schema& schema,
                                                          const Evaluator& evaluator, const Agents& agents,
                                                          const ComponentLibrary& lib, const PerformancePool& pool,
                                                          std::size_t n, Rng& rng) {
    std::vector<ExplainedStructure> out;
    std::map<CanonicalKey, double> local;
    auto metric_of = [&](const Neighbor& nb) {
        if (auto e = pool.find(nb.key)) return e->value;
        const auto it = local.find(nb.key);
        if (it != local.end()) return it->second;
        return local[nb.key] = evaluator.evaluate(nb.structure, SplitTag::val).value;
    };
    for (const auto& t : targets) {
        const auto cs = one_step_neighbors(t.structure, lib, schema, rng, std::numeric_limits<std::size_t>::max());
        if (cs.candidates.empty()) {
            log_warning("structure has no one-step neighbors, nothing to explain: " + canonical_key(t.structure).value);
            continue;
        }
        std::vector<StructureView> views;
        std::vector<double> metrics;
        for (auto i : sample_indices(rng, cs.candidates.size(), n)) {
            views.push_back(describe(cs.candidates[i].structure, schema));
            metrics.push_back(metric_of(cs.candidates[i]));
        }
        out.push_back({canonical_key(t.structure), agents.explain(describe(t.structure, schema), t.value, views, metrics)});
    }
    return out;
}

/// Best-ever structure first, then the distinct final structures by fitness
/// (ties: fewer edges, smaller key); at most `k`.
inline std::vector<ExplainTarget> select_explain_targets(const std::optional<Individual>& best,
                                                         std::vector<Individual> finals, std::size_t k) {
    std::vector<ExplainTarget> out;
    std::set<CanonicalKey> seen;
    if (best) {
        out.push_back({best->structure, best->fitness});
        seen.insert(best->key);
    }
    std::stable_sort(finals.begin(), finals.end(), [](const Individual& a, const Individual& b) {
        if (a.fitness != b.fitness) return a.fitness > b.fitness;
        if (a.structure.edge_count() != b.structure.edge_count()) return a.structure.edge_count() < b.structure.edge_count();
        return a.key < b.key;
    });
    for (const auto& f : finals)
        if (seen.insert(f.key).second) out.push_back({f.structure, f.fitness});
    if (out.size() < k)
        log_warning("only " + std::to_string(out.size()) + " distinct structures to explain (asked for " +
                    std::to_string(k) + ")");
    if (out.size() > k) out.resize(k);
    return out;
}

struct SearchResult {
    std::string status = "complete";
    std::string error;
    SearchConfig config;
    MetricKind metric = MetricKind::auc;
    std::string backend;
    std::vector<GenerationSummary> generations;
    PerformancePool pool;
    std::size_t evaluator_calls = 0;
    std::optional<std::pair<CanonicalKey, PoolEntry>> best;
    std::optional<double> best_test;
    std::vector<ExplainedStructure> explanations;
    EventLog events;

    std::vector<ExplainTarget> explain_targets(std::size_t k) const {
        std::optional<Individual> b;
        if (best) b = Individual{best->second.structure, best->first, best->second.value, true};
        return select_explain_targets(b, generations.empty() ? std::vector<Individual>{} : generations.back().population, k);
    }

    json to_json() const {
        json gens = json::array();
        for (const auto& g : generations) {
            json pop = json::array();
            for (const auto& ind : g.population) pop.push_back({{"key", ind.key.value}, {"fitness", ind.fitness}});
            gens.push_back({{"generation", g.generation}, {"best_fitness", g.best}, {"mean_fitness", g.mean}, {"population", pop}});
        }
        json finals = json::array();
        if (!generations.empty())
            for (const auto& ind : generations.back().population)
                finals.push_back({{"key", ind.key.value},
                                  {"sentence", pool.find(ind.key) ? pool.find(ind.key)->view.sentence : ""},
                                  {"fitness", ind.fitness},
                                  {"structure", restruct::to_json(ind.structure)}});
        json j = {{"status", status},
                  {"config", config.to_json()},
                  {"metric", to_string(metric)},
                  {"backend", backend},
                  {"generations", gens},
                  {"final_population", finals},
                  {"pool_size", pool.size()},
                  {"evaluator_calls", evaluator_calls}};
        if (!error.empty()) j["error"] = error;
        if (best) {
            j["best"] = {{"key", best->first.value},
                         {"sentence", best->second.view.sentence},
                         {"structure", restruct::to_json(best->second.structure)},
                         {"validation", best->second.value},
                         {"generation", best->second.generation}};
            if (best_test) j["best"]["test"] = *best_test;
        }
        return j;
    }

    std::string curve_csv() const {
        std::string out = "generation,best_fitness,mean_fitness\n";
        for (const auto& g : generations)
            out += std::to_string(g.generation) + "," + format_number(g.best) + "," + format_number(g.mean) + "\n";
        return out;
    }

    json explanations_json() const {
        json out = json::array();
        for (const auto& e : explanations) {
            auto r = e.report.to_json();
            r["key"] = e.key.value;
            out.push_back(std::move(r));
        }
        return out;
    }
};

/// result.json, pool.json, curve.csv, events.jsonl and explanations.json
/// under `dir`, each written atomically.
inline void write_search_outputs(const SearchResult& r, const fs::path& dir) {
    write_file_atomic(dir / "result.json", r.to_json().dump(2) + "\n");
    write_file_atomic(dir / "pool.json", r.pool.to_json(r.metric).dump(2) + "\n");
    write_file_atomic(dir / "curve.csv", r.curve_csv());
    write_file_atomic(dir / "events.jsonl", r.events.dump());
    write_file_atomic(dir / "explanations.json", r.explanations_json().dump(2) + "\n");
}

namespace detail {

inline GenerationSummary summarize(int generation, const std::vector<Individual>& population) {
    GenerationSummary g{generation, 0.0, 0.0, population};
    for (const auto& ind : population) {
        g.best = std::max(g.best, ind.fitness);
        g.mean += ind.fitness;
    }
    g.mean /= static_cast<double>(population.size());
    return g;
}

} // namespace detail

/// Seeds a population of meta-paths, then repeats evaluate → eliminate →
/// reproduce → mutate for the configured generations. The best pooled
/// structure is evaluated once on the test split at the end. When `out_dir`
/// is set and the search fails, the partial result is written there before
/// the error propagates.
inline SearchResult run_search(const SearchConfig& config, const Schema& schema, const Evaluator& evaluator,
                               const Agents& agents, const std::optional<fs::path>& out_dir = std::nullopt) {
    config.check();
    SearchResult r;
    r.config = config;
    r.metric = evaluator.metric();
    r.backend = agents.backend().identity();
    Rng rng(config.seed);
    const auto lib = build_component_library(schema, config.limits);

    auto evaluate = [&](std::vector<Individual>& pop, int gen) {
        std::set<CanonicalKey> known;
        for (const auto& ind : pop)
            if (r.pool.find(ind.key)) known.insert(ind.key);
        r.evaluator_calls += evaluate_population(pop, evaluator, r.pool, schema, gen, config.eval_threads);
        std::set<CanonicalKey> logged;
        for (const auto& ind : pop)
            if (logged.insert(ind.key).second)
                r.events.add(gen, rng, "evaluation",
                             {{"key", ind.key.value}, {"value", ind.fitness}, {"cached", known.count(ind.key) > 0}});
        auto g = detail::summarize(gen, pop);
        r.events.add(gen, rng, "generation", {{"best_fitness", g.best}, {"mean_fitness", g.mean}});
        r.generations.push_back(std::move(g));
    };

    try {
        std::vector<Individual> pop;
        for (auto& ms : seed_population(schema, evaluator.source_type(), evaluator.target_type(), config.population,
                                        config.limits.max_structure_nodes))
            pop.push_back(make_individual(std::move(ms)));
        evaluate(pop, 0);

        for (int gen = 1; gen <= config.generations; ++gen) {
            auto el = eliminate(pop, config.elimination_rate);
            for (const auto& ind : el.eliminated)
                r.events.add(gen, rng, "elimination", {{"key", ind.key.value}, {"fitness", ind.fitness}});
            const auto probs = reproduction_probabilities(el.survivors);
            auto rep = reproduce(el.survivors, config.population, rng);
            for (auto i : rep.draws)
                r.events.add(gen, rng, "reproduction",
                             {{"survivor", i}, {"key", el.survivors[i].key.value}, {"probability", probs[i]}});
            pop = mutate_population(rep.population, lib, schema, agents, r.pool, config, rng, &r.events, gen);
            evaluate(pop, gen);
        }

        r.best = r.pool.best();
        r.best_test = evaluator.evaluate(r.best->second.structure, SplitTag::test).value;
        r.events.add(config.generations, rng, "final",
                     {{"key", r.best->first.value}, {"validation", r.best->second.value}, {"test", *r.best_test}});

        if (config.explain) {
            auto erng = explain_rng(config.seed);
            r.explanations = explain_structures(r.explain_targets(config.explain_top_k), schema, evaluator, agents, lib,
                                                r.pool, config.explain_neighbors, erng);
        }
    } catch (const std::exception& e) {
        r.status = "aborted";
        r.error = e.what();
        r.best = r.pool.best();
        if (out_dir) write_search_outputs(r, *out_dir);
        throw;
    }
    if (out_dir) write_search_outputs(r, *out_dir);
    return r;
}

} // namespace restruct
