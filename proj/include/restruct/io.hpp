#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "restruct/error.hpp"

namespace restruct {

using json = nlohmann::json;
namespace fs = std::filesystem;

inline std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json read_json_file(const fs::path& path) {
    const std::string text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError("invalid JSON in " + path.string() + ": " + e.what());
    }
}

/// Write through a sibling temp file and rename, so readers never see a partial file.
inline void write_file_atomic(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write file: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw DataError("short write: " + tmp.string());
    }
    fs::rename(tmp, path);
}

/// Shortest decimal text that parses back to exactly `x`.
inline std::string format_number(double x) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
    s = trim(s);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

inline bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

/// Iterate the tab-separated integer rows of a data file, skipping blanks and `#` comments.
/// The callback receives the 1-based line number and the parsed fields.
inline void for_each_tsv_row(const fs::path& path, std::size_t expected_fields,
                             const std::function<void(std::size_t, std::span<const long long>)>& fn) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path.string());
    std::string line;
    std::vector<long long> fields;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view = line;
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        const auto parts = split(view, '\t');
        if (parts.size() != expected_fields)
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(expected_fields) + " tab-separated fields");
        fields.clear();
        for (auto p : parts) {
            long long v = 0;
            if (!parse_int(p, v))
                throw DataError(path.string() + ":" + std::to_string(lineno) + ": not an integer: '" +
                                std::string(p) + "'");
            fields.push_back(v);
        }
        fn(lineno, fields);
    }
}

} // namespace restruct
