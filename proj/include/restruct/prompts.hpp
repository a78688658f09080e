#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "restruct/error.hpp"
#include "restruct/io.hpp"

namespace restruct {

enum class PromptKind { system, predictor, selector, explainer_structure, explainer_attribution };

inline constexpr std::array<PromptKind, 5> kPromptKinds = {PromptKind::system, PromptKind::predictor, PromptKind::selector,
                                                           PromptKind::explainer_structure,
                                                           PromptKind::explainer_attribution};

inline std::string to_string(PromptKind k) {
    switch (k) {
    case PromptKind::system: return "system";
    case PromptKind::predictor: return "predictor";
    case PromptKind::selector: return "selector";
    case PromptKind::explainer_structure: return "explainer_structure";
    case PromptKind::explainer_attribution: return "explainer_attribution";
    }
    return "?";
}

namespace detail {

struct PromptSpec {
    std::vector<std::string> required;
    std::vector<std::string> optional;
    std::string_view text;
};

inline const PromptSpec& prompt_spec(PromptKind k) {
    static const std::map<PromptKind, PromptSpec> specs = {
        {PromptKind::system,
         {{},
          {},
          R"(You are an expert in heterogeneous information networks and graph representation learning. Follow the requested answer format exactly.
)"}},
        {PromptKind::predictor,
         {{"records", "candidates", "response_format"},
          {"task", "metric"},
          R"(We are searching for meta-structures of a heterogeneous information network. A meta-structure is written as sub-logics joined by AND, and each sub-logic reads as a chain of relations joined by THAT.

The performance pool below lists meta-structures that were already evaluated on the {{task}} task, with their {{metric}} on the validation split.

{{records}}

Estimate the {{metric}} of each candidate meta-structure below. Meta-structures with similar structure tend to perform similarly. For each estimate, also give your confidence, from 0 (a guess) to 1 (certain).

{{candidates}}

{{response_format}}
)"}},
        {PromptKind::selector,
         {{"candidates", "response_format"},
          {"task", "metric"},
          R"(You are choosing how to mutate a meta-structure in an evolutionary search on the {{task}} task. Pick exactly one candidate. Weigh the following factors:
(1) the meaning of the candidate's sub-logics for the task;
(2) its structural complexity, since simpler structures are cheaper and generalize better;
(3) its predicted {{metric}};
(4) how credible that prediction is, given the stated confidence.

{{candidates}}

{{response_format}}
)"}},
        {PromptKind::explainer_structure,
         {{"structures", "response_format"},
          {"task", "metric", "neighbor_count"},
          R"(Below are a meta-structure (STRUCTURE 0) and {{neighbor_count}} of its one-step neighbors. Understand the meaning of each of them by breaking down each of them into meaningful sub-structures.

{{structures}}

{{response_format}}
)"}},
        {PromptKind::explainer_attribution,
         {{"analysis", "metrics", "response_format"},
          {"task", "metric", "neighbor_count"},
          R"(Here is your earlier analysis of the structures:

{{analysis}}

Their {{metric}} on the {{task}} task:

{{metrics}}

Explain the differences in performance by the presence/absence of beneficial/detrimental sub-structures.

{{response_format}}
)"}},
    };
    return specs.at(k);
}

/// Names of the `{{name}}` placeholders in `text`, in order of appearance.
inline std::vector<std::string> placeholders(std::string_view text) {
    std::vector<std::string> out;
    for (std::size_t pos = text.find("{{"); pos != std::string_view::npos; pos = text.find("{{", pos + 2)) {
        const auto end = text.find("}}", pos + 2);
        if (end == std::string_view::npos) break;
        out.emplace_back(text.substr(pos + 2, end - pos - 2));
    }
    return out;
}

} // namespace detail

inline std::string_view default_prompt_text(PromptKind k) { return detail::prompt_spec(k).text; }

/// A prompt with named `{{placeholder}}` slots.
class PromptTemplate {
public:
    PromptTemplate() = default;
    PromptTemplate(PromptKind kind, std::string text, std::string origin = "built-in")
        : kind_(kind), text_(std::move(text)), origin_(std::move(origin)) {
        const auto& spec = detail::prompt_spec(kind_);
        const auto found = detail::placeholders(text_);
        const std::set<std::string> have(found.begin(), found.end());
        for (const auto& r : spec.required)
            if (!have.count(r))
                throw UsageError("prompt template " + origin_ + " is missing placeholder {{" + r + "}}");
        for (const auto& name : have) {
            const bool known = std::count(spec.required.begin(), spec.required.end(), name) +
                               std::count(spec.optional.begin(), spec.optional.end(), name);
            if (!known) throw UsageError("prompt template " + origin_ + " has unknown placeholder {{" + name + "}}");
        }
    }

    /// Substitutes every placeholder; a placeholder without a value is an error.
    std::string render(const std::map<std::string, std::string>& values) const {
        std::string out;
        std::size_t at = 0;
        for (;;) {
            const auto pos = text_.find("{{", at);
            const auto end = pos == std::string::npos ? std::string::npos : text_.find("}}", pos + 2);
            if (end == std::string::npos) {
                out.append(text_, at, std::string::npos);
                return out;
            }
            const auto name = text_.substr(pos + 2, end - pos - 2);
            const auto it = values.find(name);
            if (it == values.end()) throw UsageError("no value for placeholder {{" + name + "}} in " + origin_);
            out.append(text_, at, pos - at);
            out += it->second;
            at = end + 2;
        }
    }

    PromptKind kind() const { return kind_; }
    const std::string& text() const { return text_; }
    const std::string& origin() const { return origin_; }

private:
    PromptKind kind_ = PromptKind::system;
    std::string text_;
    std::string origin_;
};

/// One template per prompt kind. Files in a template directory are named
/// `<kind>.txt`; missing files fall back to the built-in text.
class PromptSet {
public:
    PromptSet() {
        for (auto k : kPromptKinds) templates_[k] = PromptTemplate(k, std::string(default_prompt_text(k)));
    }

    static PromptSet from_directory(const fs::path& dir) {
        if (!fs::is_directory(dir)) throw UsageError("prompt directory not found: " + dir.string());
        PromptSet set;
        for (auto k : kPromptKinds) {
            const auto file = dir / (to_string(k) + ".txt");
            if (fs::exists(file)) set.templates_[k] = PromptTemplate(k, read_text_file(file), file.string());
        }
        return set;
    }

    const PromptTemplate& get(PromptKind k) const { return templates_.at(k); }
    void set(PromptTemplate t) { templates_[t.kind()] = std::move(t); }

private:
    std::map<PromptKind, PromptTemplate> templates_;
};

} // namespace restruct
