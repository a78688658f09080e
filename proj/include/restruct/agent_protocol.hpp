#pragma once

// Line-oriented text conventions shared by the agents and the stub backend:
// the data blocks embedded in prompts, the answer formats requested from the
// model, and parsers for both directions.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "restruct/canonical.hpp"
#include "restruct/grammar.hpp"
#include "restruct/io.hpp"
#include "restruct/log.hpp"
#include "restruct/metastructure.hpp"
#include "restruct/schema.hpp"

namespace restruct {

/// Everything an agent prompt says about one structure.
struct StructureView {
    std::string sentence;
    std::vector<std::string> sub_logics;
    std::vector<std::string> edges; ///< sorted edge phrases
    std::size_t node_count = 0;
    std::size_t edge_count = 0;
    std::string key;
};

inline StructureView describe(const MetaStructure& ms, const Schema& schema) {
    StructureView v;
    for (const auto& sl : sub_logics(ms, schema)) {
        if (!v.sentence.empty()) v.sentence += kLogicJoiner;
        v.sentence += sl.sentence;
        v.sub_logics.push_back(sl.sentence);
    }
    v.edges = edge_phrases(ms, schema);
    v.node_count = ms.node_count();
    v.edge_count = ms.edge_count();
    v.key = canonical_key(ms).value;
    return v;
}

struct PoolRecord {
    StructureView view;
    double value = 0.0;
};

struct PredictorOutput {
    double p = 0.5;
    double c = 0.0;
    bool fallback = false;
};

struct SelectorItem {
    StructureView view;
    double p = 0.5;
    double c = 0.0;
};

namespace protocol {

inline constexpr std::string_view kPredictorFormat =
    "Answer with one line per candidate and nothing else:\n"
    "CANDIDATE <i>: p=<predicted performance in [0,1]>, c=<confidence in [0,1]>";
inline constexpr std::string_view kSelectorFormat =
    "Answer with exactly two lines:\n"
    "CHOICE: <candidate index>\n"
    "REASON: <one or two sentences>";
inline constexpr std::string_view kStructureFormat =
    "Answer with one block per structure, in order:\n"
    "STRUCTURE <k>:\n"
    "- <sub-structure and its meaning>";
inline constexpr std::string_view kAttributionFormat =
    "Answer with three sections:\n"
    "BENEFICIAL: <sub-structures whose presence raises performance>\n"
    "DETRIMENTAL: <sub-structures whose presence lowers performance>\n"
    "SUMMARY: <a short explanation>";

inline std::string join(const std::vector<std::string>& v, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += v[i];
    }
    return out;
}

inline std::string records_block(const std::vector<PoolRecord>& records) {
    if (records.empty()) return "(no records yet)";
    std::string out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (i) out += '\n';
        out += "RECORD " + std::to_string(i + 1) + ": " + records[i].view.sentence + "\n";
        out += "  edges: " + join(records[i].view.edges, "; ") + "\n";
        out += "  performance: " + format_number(records[i].value);
    }
    return out;
}

inline std::string predictor_candidates_block(const std::vector<StructureView>& candidates) {
    std::string out;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (i) out += '\n';
        out += "CANDIDATE " + std::to_string(i) + ": " + candidates[i].sentence + "\n";
        out += "  edges: " + join(candidates[i].edges, "; ");
    }
    return out;
}

inline std::string selector_candidates_block(const std::vector<SelectorItem>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& v = items[i].view;
        if (i) out += '\n';
        out += "CANDIDATE " + std::to_string(i) + ": " + v.sentence + "\n";
        out += "  edges: " + join(v.edges, "; ") + "\n";
        out += "  size: " + std::to_string(v.node_count) + " nodes, " + std::to_string(v.edge_count) + " edges\n";
        out += "  predicted: p=" + format_number(items[i].p) + ", c=" + format_number(items[i].c) + "\n";
        out += "  key: " + v.key;
    }
    return out;
}

inline std::string structures_block(const std::vector<StructureView>& structures) {
    std::string out;
    for (std::size_t i = 0; i < structures.size(); ++i) {
        if (i) out += '\n';
        out += "STRUCTURE " + std::to_string(i) + ": " + structures[i].sentence + "\n";
        out += "  edges: " + join(structures[i].edges, "; ");
    }
    return out;
}

inline std::string metrics_block(const std::vector<StructureView>& structures, const std::vector<double>& values,
                                 std::string_view metric) {
    std::string out;
    for (std::size_t i = 0; i < structures.size(); ++i) {
        if (i) out += '\n';
        out += "STRUCTURE " + std::to_string(i) + ": " + std::string(metric) + "=" + format_number(values[i]) + "\n";
        out += "  edges: " + join(structures[i].edges, "; ");
    }
    return out;
}

/// A "TAG <n>: head" line followed by indented "name: value" attribute lines.
struct Block {
    std::string tag;
    std::size_t index = 0;
    std::string head;
    std::map<std::string, std::string> attrs;

    std::vector<std::string> list(const std::string& name) const {
        std::vector<std::string> out;
        const auto it = attrs.find(name);
        if (it == attrs.end() || it->second.empty()) return out;
        for (auto part : split(it->second, ';')) out.emplace_back(trim(part));
        return out;
    }
};

inline std::vector<Block> parse_blocks(std::string_view text, std::string_view tag) {
    static const std::regex header(R"(^([A-Z]+) (\d+): ?(.*)$)");
    static const std::regex attr(R"(^  ([a-z_]+): ?(.*)$)");
    std::vector<Block> out;
    bool open = false;
    for (auto line_view : split(text, '\n')) {
        const std::string line(line_view);
        std::smatch m;
        if (std::regex_match(line, m, header)) {
            open = m[1].str() == tag;
            if (open) out.push_back({m[1], std::stoul(m[2]), m[3], {}});
        } else if (open && std::regex_match(line, m, attr)) {
            out.back().attrs[m[1]] = m[2];
        } else {
            open = false;
        }
    }
    return out;
}

inline double clamp_unit(double x, std::string_view what) {
    if (x >= 0.0 && x <= 1.0) return x;
    log_warning(std::string(what) + " " + format_number(x) + " outside [0,1], clamped");
    return std::clamp(x, 0.0, 1.0);
}

/// Per-candidate (p, c) read from a predictor answer; entries that are absent
/// or unparseable stay empty. Values outside [0,1] are clamped.
inline std::vector<std::optional<PredictorOutput>> parse_predictions(std::string_view text, std::size_t count) {
    static const std::regex line_re(R"(CANDIDATE\s+(\d+)\s*:\s*p\s*=\s*([^,\s]+)\s*,\s*c\s*=\s*([^,\s]+))");
    std::vector<std::optional<PredictorOutput>> out(count);
    for (auto line_view : split(text, '\n')) {
        const std::string line(line_view);
        std::smatch m;
        if (!std::regex_search(line, m, line_re)) continue;
        std::size_t i = 0;
        double p = 0, c = 0;
        if (!parse_int(m[1].str(), i) || i >= count || out[i]) continue;
        if (!parse_double(m[2].str(), p) || !parse_double(m[3].str(), c) || std::isnan(p) || std::isnan(c)) continue;
        out[i] = PredictorOutput{clamp_unit(p, "predicted performance"), clamp_unit(c, "confidence"), false};
    }
    return out;
}

struct ParsedChoice {
    std::size_t index = 0;
    std::string rationale;
};

inline std::optional<ParsedChoice> parse_choice(std::string_view text, std::size_t count) {
    static const std::regex choice_re(R"(CHOICE\s*:\s*(\d+))");
    static const std::regex reason_re(R"(REASON\s*:\s*(.*))");
    const std::string s(text);
    std::smatch m;
    if (!std::regex_search(s, m, choice_re)) return std::nullopt;
    ParsedChoice out;
    if (!parse_int(m[1].str(), out.index) || out.index >= count) return std::nullopt;
    if (std::regex_search(s, m, reason_re)) out.rationale = std::string(trim(m[1].str()));
    return out;
}

/// Text split at lines starting with one of the given section headers. The
/// concatenation of `preamble` and every section's `raw` equals the input.
struct Sections {
    struct Section {
        std::string header;
        std::size_t index = 0; ///< number after the header, when present
        std::string body;      ///< text after the header line's colon, with following lines
        std::string raw;
    };
    std::string preamble;
    std::vector<Section> sections;

    std::string reassemble() const {
        std::string out = preamble;
        for (const auto& s : sections) out += s.raw;
        return out;
    }
};

inline Sections parse_sections(std::string_view text, const std::regex& header) {
    Sections out;
    std::size_t at = 0;
    while (at < text.size()) {
        auto nl = text.find('\n', at);
        const std::size_t end = nl == std::string_view::npos ? text.size() : nl + 1;
        const std::string line(text.substr(at, end - at));
        std::smatch m;
        if (std::regex_search(line, m, header)) {
            Sections::Section s;
            s.header = m[1];
            if (m.size() > 2 && m[2].matched) parse_int(m[2].str(), s.index);
            s.body = line.substr(static_cast<std::size_t>(m.position(0) + m.length(0)));
            s.raw = line;
            out.sections.push_back(std::move(s));
        } else if (out.sections.empty()) {
            out.preamble += line;
        } else {
            out.sections.back().body += line;
            out.sections.back().raw += line;
        }
        at = end;
    }
    for (auto& s : out.sections) s.body = std::string(trim(s.body));
    return out;
}

inline Sections parse_structure_analysis(std::string_view text) {
    static const std::regex header(R"(^\W*(STRUCTURE)\s+(\d+)\W*:\**)");
    return parse_sections(text, header);
}

inline Sections parse_attribution(std::string_view text) {
    static const std::regex header(R"(^\W*(BENEFICIAL|DETRIMENTAL|SUMMARY)()\W*:\**)");
    return parse_sections(text, header);
}

/// Multiset Jaccard similarity of two sorted phrase lists.
inline double multiset_jaccard(std::vector<std::string> a, std::vector<std::string> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a.empty() && b.empty()) return 1.0;
    std::vector<std::string> inter, uni;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(uni));
    return static_cast<double>(inter.size()) / static_cast<double>(uni.size());
}

/// Phrases of `a` not matched in `b`, counting multiplicity.
inline std::vector<std::string> multiset_difference(std::vector<std::string> a, std::vector<std::string> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<std::string> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

/// Nearest record by edge-multiset Jaccard; ties go to the higher value, then
/// the earlier record. Returns (value, similarity), or the prior (0.5, 0).
inline PredictorOutput nearest_record_prediction(const std::vector<std::string>& edges,
                                                 const std::vector<PoolRecord>& records) {
    PredictorOutput best{0.5, 0.0, false};
    bool any = false;
    for (const auto& r : records) {
        const double sim = multiset_jaccard(edges, r.view.edges);
        if (!any || sim > best.c || (sim == best.c && r.value > best.p)) {
            best = {r.value, sim, false};
            any = true;
        }
    }
    return best;
}

/// Highest p, then fewest edges, then smallest canonical key.
inline std::size_t rule_based_choice(const std::vector<SelectorItem>& items) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < items.size(); ++i) {
        const auto& a = items[i];
        const auto& b = items[best];
        if (a.p != b.p) {
            if (a.p > b.p) best = i;
        } else if (a.view.edge_count != b.view.edge_count) {
            if (a.view.edge_count < b.view.edge_count) best = i;
        } else if (a.view.key < b.view.key) {
            best = i;
        }
    }
    return best;
}

} // namespace protocol

} // namespace restruct
