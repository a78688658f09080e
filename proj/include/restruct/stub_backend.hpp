#pragma once

// Deterministic offline backend. It recognizes the four agent prompts by the
// answer format they request and answers from the data blocks alone, so
// paraphrased prompt templates keep working.
//
//   predictor   nearest pool record by edge-multiset Jaccard; p = its value,
//               c = the similarity; prior (0.5, 0) with an empty pool
//   selector    highest p, then fewest edges, then smallest canonical key
//   explainer   step 1 lists each structure's sub-logics; step 2 compares
//               each neighbor's edges with the target's: a neighbor scoring
//               above the target credits the edges it adds, one scoring
//               below blames them

#include <cstdint>
#include <set>
#include <string>

#include "restruct/agent_protocol.hpp"
#include "restruct/chat_backend.hpp"

namespace restruct {

class StubBackend : public ChatBackend {
public:
    explicit StubBackend(std::uint64_t seed = 0) : seed_(seed) {}

    std::string identity() const override { return "stub-" + std::to_string(seed_); }

    std::string complete(const std::string& /*system*/, const std::string& user,
                         const DecodingParams& /*params*/) const override {
        if (contains(user, "BENEFICIAL: <")) return attribution(user);
        if (contains(user, "STRUCTURE <k>:")) return structure_analysis(user);
        if (contains(user, "CHOICE: <")) return selection(user);
        if (contains(user, "CANDIDATE <i>: p=")) return prediction(user);
        throw BackendError("stub backend: prompt does not request a known answer format");
    }

private:
    static bool contains(const std::string& s, std::string_view needle) { return s.find(needle) != std::string::npos; }

    static std::string prediction(const std::string& user) {
        std::vector<PoolRecord> records;
        for (const auto& b : protocol::parse_blocks(user, "RECORD")) {
            PoolRecord r;
            r.view.sentence = b.head;
            r.view.edges = b.list("edges");
            if (!parse_double(b.attrs.count("performance") ? b.attrs.at("performance") : "", r.value))
                throw BackendError("stub backend: record without performance");
            records.push_back(std::move(r));
        }
        std::string out;
        for (const auto& c : protocol::parse_blocks(user, "CANDIDATE")) {
            const auto pred = protocol::nearest_record_prediction(c.list("edges"), records);
            out += "CANDIDATE " + std::to_string(c.index) + ": p=" + format_number(pred.p) +
                   ", c=" + format_number(pred.c) + "\n";
        }
        return out;
    }

    static std::string selection(const std::string& user) {
        static const std::regex size_re(R"((\d+) nodes, (\d+) edges)");
        static const std::regex pred_re(R"(p=([^,\s]+), c=([^,\s]+))");
        const auto blocks = protocol::parse_blocks(user, "CANDIDATE");
        if (blocks.empty()) throw BackendError("stub backend: selector prompt without candidates");
        std::vector<SelectorItem> items;
        for (const auto& b : blocks) {
            SelectorItem it;
            std::smatch m;
            const auto size = b.attrs.count("size") ? b.attrs.at("size") : "";
            const auto pred = b.attrs.count("predicted") ? b.attrs.at("predicted") : "";
            if (!std::regex_search(size, m, size_re)) throw BackendError("stub backend: candidate without size");
            parse_int(m[1].str(), it.view.node_count);
            parse_int(m[2].str(), it.view.edge_count);
            if (!std::regex_search(pred, m, pred_re) || !parse_double(m[1].str(), it.p) || !parse_double(m[2].str(), it.c))
                throw BackendError("stub backend: candidate without prediction");
            it.view.key = b.attrs.count("key") ? b.attrs.at("key") : "";
            items.push_back(std::move(it));
        }
        const auto i = protocol::rule_based_choice(items);
        return "CHOICE: " + std::to_string(blocks[i].index) + "\nREASON: highest predicted performance (p=" +
               format_number(items[i].p) + ", c=" + format_number(items[i].c) + ") with " +
               std::to_string(items[i].view.edge_count) + " edges.\n";
    }

    static std::string structure_analysis(const std::string& user) {
        std::string out;
        for (const auto& b : protocol::parse_blocks(user, "STRUCTURE")) {
            out += "STRUCTURE " + std::to_string(b.index) + ":\n";
            for (auto part : split_logics(b.head)) out += "- " + part + "\n";
        }
        return out;
    }

    static std::vector<std::string> split_logics(const std::string& sentence) {
        std::vector<std::string> out;
        std::size_t at = 0;
        for (;;) {
            const auto pos = sentence.find(kLogicJoiner, at);
            out.push_back(sentence.substr(at, pos == std::string::npos ? std::string::npos : pos - at));
            if (pos == std::string::npos) return out;
            at = pos + kLogicJoiner.size();
        }
    }

    static std::string attribution(const std::string& user) {
        struct Scored {
            std::size_t index;
            double value;
            std::vector<std::string> edges;
        };
        std::vector<Scored> all;
        for (const auto& b : protocol::parse_blocks(user, "STRUCTURE")) {
            const auto eq = b.head.find('=');
            double v = 0;
            if (eq == std::string::npos || !parse_double(b.head.substr(eq + 1), v)) continue;
            all.push_back({b.index, v, b.list("edges")});
        }
        if (all.size() < 2) throw BackendError("stub backend: attribution prompt needs a structure and a neighbor");
        const auto& target = all.front();
        // A neighbor that beats the target credits the edges it adds and
        // blames the edges it drops; a neighbor that loses does the opposite.
        std::vector<std::string> beneficial, detrimental;
        std::set<std::string> seen_good, seen_bad;
        auto note = [](std::vector<std::string>& list, std::set<std::string>& seen, const std::vector<std::string>& edges,
                       std::size_t index) {
            for (const auto& e : edges)
                if (seen.insert(e).second) list.push_back(e + " (STRUCTURE " + std::to_string(index) + ")");
        };
        std::size_t above = 0, below = 0, best = 1, worst = 1;
        for (std::size_t i = 1; i < all.size(); ++i) {
            if (all[i].value > all[best].value) best = i;
            if (all[i].value < all[worst].value) worst = i;
            if (all[i].value == target.value) continue;
            const auto added = protocol::multiset_difference(all[i].edges, target.edges);
            const auto dropped = protocol::multiset_difference(target.edges, all[i].edges);
            if (all[i].value > target.value) {
                ++above;
                note(beneficial, seen_good, added, all[i].index);
                note(detrimental, seen_bad, dropped, all[i].index);
            } else {
                ++below;
                note(detrimental, seen_bad, added, all[i].index);
                note(beneficial, seen_good, dropped, all[i].index);
            }
        }
        auto listing = [](const std::vector<std::string>& v) { return v.empty() ? std::string("none") : protocol::join(v, "; "); };
        const auto n = all.size() - 1;
        std::string summary = std::to_string(above) + " of " + std::to_string(n) + " neighbors score above STRUCTURE 0 (" +
                              format_number(target.value) + ") and " + std::to_string(below) + " below";
        if (above + below == 0) summary += "; the differing edges make no measurable difference";
        else
            summary += "; STRUCTURE " + std::to_string(all[best].index) + " is best (" + format_number(all[best].value) +
                       "), STRUCTURE " + std::to_string(all[worst].index) + " worst (" + format_number(all[worst].value) +
                       ")";
        return "BENEFICIAL: " + listing(beneficial) + "\nDETRIMENTAL: " + listing(detrimental) + "\nSUMMARY: " + summary +
               ".\n";
    }

    std::uint64_t seed_;
};

} // namespace restruct
