#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace nlpfspl::text {

inline bool is_space(char c) noexcept
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool is_ascii_upper(char c) noexcept { return c >= 'A' && c <= 'Z'; }
inline bool is_ascii_lower(char c) noexcept { return c >= 'a' && c <= 'z'; }
inline bool is_ascii_alpha(char c) noexcept { return is_ascii_upper(c) || is_ascii_lower(c); }
inline bool is_ascii_digit(char c) noexcept { return c >= '0' && c <= '9'; }

inline std::string to_lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](char c) {
        return is_ascii_upper(c) ? static_cast<char>(c - 'A' + 'a') : c;
    });
    return out;
}

inline std::string_view trim(std::string_view s) noexcept
{
    while (!s.empty() && is_space(s.front())) {
        s.remove_prefix(1);
    }
    while (!s.empty() && is_space(s.back())) {
        s.remove_suffix(1);
    }
    return s;
}

inline std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            return out;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::vector<std::string> split_ws(std::string_view s)
{
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) {
            ++i;
        }
        std::size_t j = i;
        while (j < s.size() && !is_space(s[j])) {
            ++j;
        }
        if (j > i) {
            out.emplace_back(s.substr(i, j - i));
        }
        i = j;
    }
    return out;
}

template <typename Range>
std::string join(const Range& parts, std::string_view sep)
{
    std::string out;
    bool first = true;
    for (const auto& p : parts) {
        if (!first) {
            out += sep;
        }
        out += p;
        first = false;
    }
    return out;
}

inline bool ends_with(std::string_view s, std::string_view suffix) noexcept
{
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

/// Byte offsets of UTF-8 code point starts. Invalid continuation bytes count as
/// single characters.
inline std::vector<std::size_t> utf8_boundaries(std::string_view s)
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto byte = static_cast<unsigned char>(s[i]);
        if ((byte & 0xC0) != 0x80 || i == 0) {
            out.push_back(i);
        }
    }
    return out;
}

inline std::size_t utf8_length(std::string_view s) { return utf8_boundaries(s).size(); }

/// First `n` code points.
inline std::string utf8_prefix(std::string_view s, std::size_t n)
{
    auto b = utf8_boundaries(s);
    if (n >= b.size()) {
        return std::string(s);
    }
    return std::string(s.substr(0, b[n]));
}

/// Last `n` code points.
inline std::string utf8_suffix(std::string_view s, std::size_t n)
{
    auto b = utf8_boundaries(s);
    if (n >= b.size()) {
        return std::string(s);
    }
    return std::string(s.substr(b[b.size() - n]));
}

/// Shortest decimal text that round-trips the double.
inline std::string format_double(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, std::string_view content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw IoError("write failed for " + path);
    }
}

}  // namespace nlpfspl::text
