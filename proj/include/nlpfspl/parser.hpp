#pragma once

#include <charconv>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "spec.hpp"
#include "text.hpp"

// Concrete syntax:
//
//   spec       := { statement }
//   statement  := key ':=' value ( ';' | NEWLINE | EOF )
//   key        := identifier                      (case-insensitive)
//   value      := identifier | number | string | tuple | alternation | su-expr
//   tuple      := '[' item { ',' item } ']'
//   string     := '"' { char | '\"' | '\\' } '"'
//   su-expr    := and { 'OR' and }
//   and        := unary { 'AND' unary }
//   unary      := 'NOT' unary | '(' su-expr ')' | leaf
//   leaf       := 'Word' | 'Phrase' | 'NGram' '(' int ')'
//               | 'POS' 'Regex' string | 'Regex' string
//
// '#' starts a comment outside strings. Newlines inside brackets or
// parentheses do not end a statement.

namespace nlpfspl {

namespace detail {

class SourceMap {
  public:
    explicit SourceMap(std::string_view src)
    {
        m_line_starts.push_back(0);
        for (std::size_t i = 0; i < src.size(); ++i) {
            if (src[i] == '\n') {
                m_line_starts.push_back(i + 1);
            }
        }
    }

    SourcePosition at(std::size_t offset) const
    {
        std::size_t lo = 0;
        std::size_t hi = m_line_starts.size();
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            if (m_line_starts[mid] <= offset) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return {lo + 1, offset - m_line_starts[lo] + 1};
    }

  private:
    std::vector<std::size_t> m_line_starts;
};

struct Statement {
    std::string key;
    std::size_t key_offset;
    std::string value;
    std::size_t value_offset;
    std::vector<std::size_t> value_offsets;  // source offset of each value byte
};

class SpecParser {
  public:
    explicit SpecParser(std::string_view src) : m_src(src), m_map(src) {}

    FeatureSpec run()
    {
        FeatureSpec spec;
        bool have_au = false;
        bool have_su = false;
        bool have_norm = false;
        std::vector<bool> seen(all_feature_names.size(), false);

        for (const auto& st : split_statements()) {
            const std::string key = text::to_lower(st.key);
            if (key == "analysis_unit") {
                if (have_au) {
                    fail("Analysis_Unit declared more than once", st.key_offset);
                }
                have_au = true;
                spec.meta.analysis_unit = parse_au(st);
            } else if (key == "syntactic_unit") {
                if (have_su) {
                    fail("Syntactic_Unit declared more than once", st.key_offset);
                }
                have_su = true;
                spec.meta.syntactic_unit = parse_su(st);
            } else if (key == "normalize_morphosyntactic_variants") {
                if (have_norm) {
                    fail("Normalize_Morphosyntactic_Variants declared more than once", st.key_offset);
                }
                have_norm = true;
                spec.meta.normalize_variants = parse_yes_no(st);
            } else {
                auto name = feature_from_key(key);
                if (!name) {
                    fail("unknown key '" + st.key + "'", st.key_offset);
                }
                auto idx = static_cast<std::size_t>(*name);
                if (seen[idx]) {
                    fail(std::string(to_string(*name)) + " declared more than once", st.key_offset);
                }
                seen[idx] = true;
                FeatureDecl decl{parse_params(*name, st), m_map.at(st.key_offset)};
                spec.features.push_back(std::move(decl));
            }
        }

        for (const auto& d : validate(spec)) {
            if (d.message == "no features declared") {
                continue;
            }
            throw ParseError(d.message, d.where.line, d.where.column);
        }
        return spec;
    }

  private:
    // ---- statement splitting ------------------------------------------------

    std::vector<Statement> split_statements()
    {
        std::vector<Statement> out;
        std::size_t i = 0;
        const std::size_t n = m_src.size();
        int depth = 0;
        std::vector<std::size_t> openers;
        std::string buffer;
        std::size_t buffer_start = std::string::npos;
        std::vector<std::size_t> offsets;  // source offset of each buffer byte

        auto finish = [&] {
            if (buffer_start != std::string::npos) {
                make_statement(buffer, offsets, out);
            }
            buffer.clear();
            offsets.clear();
            buffer_start = std::string::npos;
        };

        while (i < n) {
            char c = m_src[i];
            if (c == '"') {
                std::size_t open = i;
                if (buffer_start == std::string::npos) {
                    buffer_start = i;
                }
                buffer += c;
                offsets.push_back(i);
                ++i;
                bool closed = false;
                while (i < n) {
                    char d = m_src[i];
                    if (d == '\n') {
                        break;
                    }
                    buffer += d;
                    offsets.push_back(i);
                    ++i;
                    if (d == '\\' && i < n && m_src[i] != '\n') {
                        buffer += m_src[i];
                        offsets.push_back(i);
                        ++i;
                        continue;
                    }
                    if (d == '"') {
                        closed = true;
                        break;
                    }
                }
                if (!closed) {
                    fail("unterminated string", open);
                }
                continue;
            }
            if (c == '#') {
                while (i < n && m_src[i] != '\n') {
                    ++i;
                }
                continue;
            }
            if (c == '[' || c == '(') {
                ++depth;
                openers.push_back(i);
            } else if (c == ']' || c == ')') {
                if (depth == 0) {
                    fail(std::string("unbalanced '") + c + "'", i);
                }
                --depth;
                openers.pop_back();
            }
            if ((c == ';' || c == '\n') && depth == 0) {
                finish();
                ++i;
                continue;
            }
            if (buffer_start == std::string::npos && !text::is_space(c)) {
                buffer_start = i;
            }
            if (buffer_start != std::string::npos) {
                buffer += c;
                offsets.push_back(i);
            }
            ++i;
        }
        if (depth != 0) {
            fail("unclosed bracket", openers.back());
        }
        finish();
        return out;
    }

    void make_statement(const std::string& buf, const std::vector<std::size_t>& offsets,
                        std::vector<Statement>& out) const
    {
        auto trimmed_end = buf.size();
        while (trimmed_end > 0 && text::is_space(buf[trimmed_end - 1])) {
            --trimmed_end;
        }
        if (trimmed_end == 0) {
            return;
        }
        // find ':=' outside strings
        std::size_t assign = std::string::npos;
        bool in_str = false;
        for (std::size_t k = 0; k + 1 < trimmed_end; ++k) {
            char c = buf[k];
            if (in_str) {
                if (c == '\\') {
                    ++k;
                } else if (c == '"') {
                    in_str = false;
                }
                continue;
            }
            if (c == '"') {
                in_str = true;
                continue;
            }
            if (c == ':' && buf[k + 1] == '=') {
                assign = k;
                break;
            }
        }
        if (assign == std::string::npos) {
            fail("expected 'Key := Value'", offsets.front());
        }
        std::string_view key = text::trim(std::string_view(buf).substr(0, assign));
        if (key.empty()) {
            fail("missing key before ':='", offsets.front());
        }
        for (std::size_t k = 0; k < key.size(); ++k) {
            char c = key[k];
            bool ok = text::is_ascii_alpha(c) || c == '_' || (k > 0 && text::is_ascii_digit(c));
            if (!ok) {
                fail("invalid key '" + std::string(key) + "'", offsets.front());
            }
        }
        std::size_t vb = assign + 2;
        while (vb < trimmed_end && text::is_space(buf[vb])) {
            ++vb;
        }
        if (vb >= trimmed_end) {
            fail("missing value for '" + std::string(key) + "'", offsets[assign]);
        }
        out.push_back(Statement{std::string(key), offsets.front(), buf.substr(vb, trimmed_end - vb), offsets[vb],
                                std::vector<std::size_t>(offsets.begin() + static_cast<std::ptrdiff_t>(vb),
                                                         offsets.begin() + static_cast<std::ptrdiff_t>(trimmed_end))});
    }

    // ---- value lexing -------------------------------------------------------

    enum class Tok { Ident, Number, String, LBracket, RBracket, LParen, RParen, Comma, Pipe, End };

    struct Lexeme {
        Tok kind;
        std::string text;
        std::size_t offset;
    };

    std::vector<Lexeme> lex(const Statement& st)
    {
        const auto& offs = value_offsets(st);
        const std::string& v = st.value;
        std::vector<Lexeme> out;
        std::size_t i = 0;
        while (i < v.size()) {
            char c = v[i];
            if (text::is_space(c)) {
                ++i;
                continue;
            }
            const std::size_t at = offs[i];
            if (text::is_ascii_alpha(c) || c == '_') {
                std::size_t j = i;
                while (j < v.size() && (text::is_ascii_alpha(v[j]) || text::is_ascii_digit(v[j]) || v[j] == '_')) {
                    ++j;
                }
                out.push_back({Tok::Ident, v.substr(i, j - i), at});
                i = j;
            } else if (text::is_ascii_digit(c) || c == '-' || c == '+' || c == '.') {
                std::size_t j = i + 1;
                while (j < v.size() && (text::is_ascii_digit(v[j]) || v[j] == '.' || v[j] == 'e' || v[j] == 'E' ||
                                        ((v[j] == '-' || v[j] == '+') && (v[j - 1] == 'e' || v[j - 1] == 'E')))) {
                    ++j;
                }
                out.push_back({Tok::Number, v.substr(i, j - i), at});
                i = j;
            } else if (c == '"') {
                std::string s;
                std::size_t j = i + 1;
                bool closed = false;
                while (j < v.size()) {
                    char d = v[j];
                    if (d == '\\' && j + 1 < v.size() && (v[j + 1] == '"' || v[j + 1] == '\\')) {
                        s += v[j + 1];
                        j += 2;
                        continue;
                    }
                    if (d == '"') {
                        closed = true;
                        ++j;
                        break;
                    }
                    s += d;
                    ++j;
                }
                if (!closed) {
                    fail("unterminated string", at);
                }
                out.push_back({Tok::String, std::move(s), at});
                i = j;
            } else {
                Tok k;
                switch (c) {
                case '[':
                    k = Tok::LBracket;
                    break;
                case ']':
                    k = Tok::RBracket;
                    break;
                case '(':
                    k = Tok::LParen;
                    break;
                case ')':
                    k = Tok::RParen;
                    break;
                case ',':
                    k = Tok::Comma;
                    break;
                case '|':
                    k = Tok::Pipe;
                    break;
                default:
                    fail(std::string("unexpected character '") + printable(c) + "'", at);
                }
                out.push_back({k, std::string(1, c), at});
                ++i;
            }
        }
        out.push_back({Tok::End, "", offs.empty() ? st.value_offset : offs.back() + 1});
        return out;
    }

    static std::string printable(char c)
    {
        auto u = static_cast<unsigned char>(c);
        if (u < 0x20 || u >= 0x7F) {
            const char* hex = "0123456789ABCDEF";
            return std::string("\\x") + hex[u >> 4] + hex[u & 0xF];
        }
        return std::string(1, c);
    }

    static const std::vector<std::size_t>& value_offsets(const Statement& st) { return st.value_offsets; }

    // ---- helpers ------------------------------------------------------------

    [[noreturn]] void fail(const std::string& msg, std::size_t offset) const
    {
        auto pos = m_map.at(offset);
        throw ParseError(msg, pos.line, pos.column);
    }

    static bool iequals(std::string_view a, std::string_view b) { return text::to_lower(a) == text::to_lower(b); }

    std::size_t parse_size(const Lexeme& l, const char* what)
    {
        if (l.kind != Tok::Number) {
            fail(std::string("expected integer ") + what, l.offset);
        }
        std::size_t v = 0;
        auto [ptr, ec] = std::from_chars(l.text.data(), l.text.data() + l.text.size(), v);
        if (ec != std::errc() || ptr != l.text.data() + l.text.size()) {
            fail(std::string("expected non-negative integer ") + what + ", got '" + l.text + "'", l.offset);
        }
        return v;
    }

    double parse_double(const Lexeme& l, const char* what)
    {
        if (l.kind != Tok::Number) {
            fail(std::string("expected number ") + what, l.offset);
        }
        double v = 0;
        const char* begin = l.text.data();
        if (!l.text.empty() && l.text[0] == '+') {
            ++begin;
        }
        auto [ptr, ec] = std::from_chars(begin, l.text.data() + l.text.size(), v);
        if (ec != std::errc() || ptr != l.text.data() + l.text.size()) {
            fail(std::string("invalid number '") + l.text + "'", l.offset);
        }
        return v;
    }

    std::vector<Lexeme> tuple_items(const Statement& st, std::size_t arity)
    {
        auto toks = lex(st);
        if (toks[0].kind != Tok::LBracket) {
            fail("expected '[' to open tuple", toks[0].offset);
        }
        std::vector<Lexeme> items;
        std::size_t i = 1;
        while (true) {
            if (toks[i].kind == Tok::RBracket && items.empty()) {
                fail("empty tuple", toks[i].offset);
            }
            const auto& t = toks[i];
            if (t.kind != Tok::Ident && t.kind != Tok::Number && t.kind != Tok::String) {
                fail("malformed tuple: expected value", t.offset);
            }
            items.push_back(t);
            ++i;
            if (toks[i].kind == Tok::Comma) {
                ++i;
                continue;
            }
            if (toks[i].kind == Tok::RBracket) {
                ++i;
                break;
            }
            fail("malformed tuple: expected ',' or ']'", toks[i].offset);
        }
        if (toks[i].kind != Tok::End) {
            fail("unexpected text after tuple", toks[i].offset);
        }
        if (items.size() != arity) {
            fail(st.key + " expects " + std::to_string(arity) + " values, got " + std::to_string(items.size()),
                 toks[0].offset);
        }
        return items;
    }

    const Lexeme single(const Statement& st)
    {
        auto toks = lex(st);
        if (toks.size() != 2) {
            fail("expected a single value for " + st.key, toks[toks.size() > 1 ? 1 : 0].offset);
        }
        return toks[0];
    }

    std::string parse_keyword(const Statement& st, std::initializer_list<const char*> options)
    {
        auto t = single(st);
        if (t.kind == Tok::Ident) {
            for (const char* o : options) {
                if (iequals(t.text, o)) {
                    return o;
                }
            }
        }
        std::string expected;
        for (const char* o : options) {
            expected += expected.empty() ? o : std::string("|") + o;
        }
        fail("invalid value '" + t.text + "' for " + st.key + " (expected " + expected + ")", t.offset);
    }

    bool parse_yes_no(const Statement& st) { return parse_keyword(st, {"YES", "NO"}) == "YES"; }

    void require_yes(const Statement& st) { parse_keyword(st, {"YES"}); }

    AnalysisUnit parse_au(const Statement& st)
    {
        auto v = parse_keyword(st, {"Corpus", "Document", "Para", "Paragraph", "Sentence"});
        if (v == "Corpus") {
            return AnalysisUnit::Corpus;
        }
        if (v == "Document") {
            return AnalysisUnit::Document;
        }
        if (v == "Sentence") {
            return AnalysisUnit::Sentence;
        }
        return AnalysisUnit::Para;
    }

    /// A regex either quoted or written bare (no whitespace), e.g. NN|VB.
    std::string parse_pattern(const Statement& st)
    {
        const std::string& v = st.value;
        if (!v.empty() && v.front() == '"') {
            auto t = single(st);
            if (t.kind != Tok::String) {
                fail("expected quoted regex", t.offset);
            }
            if (t.text.empty()) {
                fail("empty regex", t.offset);
            }
            return t.text;
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (text::is_space(v[i])) {
                fail("bare regex must not contain whitespace; quote it", value_offsets(st)[i]);
            }
        }
        return v;
    }

    std::string parse_term(const Statement& st)
    {
        auto t = single(st);
        if (t.kind != Tok::Ident && t.kind != Tok::String) {
            fail("expected a term (identifier or quoted string)", t.offset);
        }
        if (text::trim(t.text).empty()) {
            fail("empty term", t.offset);
        }
        return t.text;
    }

    std::vector<std::string> parse_char_list(const Statement& st)
    {
        const auto& offs = value_offsets(st);
        const std::string& v = st.value;
        std::vector<std::string> out;
        std::size_t i = 0;
        while (i <= v.size()) {
            while (i < v.size() && text::is_space(v[i])) {
                ++i;
            }
            if (i >= v.size()) {
                fail("expected character", offs.empty() ? st.value_offset : offs.back());
            }
            std::size_t item_at = offs[i];
            std::string item;
            if (v[i] == '"') {
                std::size_t j = i + 1;
                bool closed = false;
                while (j < v.size()) {
                    if (v[j] == '\\' && j + 1 < v.size() && (v[j + 1] == '"' || v[j + 1] == '\\')) {
                        item += v[j + 1];
                        j += 2;
                        continue;
                    }
                    if (v[j] == '"') {
                        closed = true;
                        ++j;
                        break;
                    }
                    item += v[j++];
                }
                if (!closed) {
                    fail("unterminated string", item_at);
                }
                i = j;
            } else {
                std::size_t j = i;
                while (j < v.size() && v[j] != ',' && !text::is_space(v[j])) {
                    ++j;
                }
                item = v.substr(i, j - i);
                i = j;
            }
            if (item.empty()) {
                fail("empty character in list", item_at);
            }
            if (text::utf8_length(item) != 1) {
                fail("'" + item + "' is not a single character", item_at);
            }
            out.push_back(std::move(item));
            while (i < v.size() && text::is_space(v[i])) {
                ++i;
            }
            if (i >= v.size()) {
                break;
            }
            if (v[i] != ',') {
                fail("expected ',' between characters", offs[i]);
            }
            ++i;
        }
        return out;
    }

    // ---- syntactic-unit expressions ----------------------------------------

    SUExpr parse_su(const Statement& st)
    {
        m_toks = lex(st);
        m_pos = 0;
        m_depth = 0;
        SUExpr e = su_or();
        if (peek().kind != Tok::End) {
            fail("unexpected '" + peek().text + "' in Syntactic_Unit", peek().offset);
        }
        if (e.kind == SUExpr::Kind::Not) {
            fail("NOT must be used in conjunction with another operator", m_toks[0].offset);
        }
        if (!e.generates()) {
            fail("Syntactic_Unit needs at least one non-negated operand", m_toks[0].offset);
        }
        return e;
    }

    const Lexeme& peek() const { return m_toks[m_pos]; }
    const Lexeme& next() { return m_toks[m_pos < m_toks.size() - 1 ? m_pos++ : m_pos]; }
    bool at_keyword(const char* kw) const { return peek().kind == Tok::Ident && iequals(peek().text, kw); }

    SUExpr su_or()
    {
        std::vector<SUExpr> parts{su_and()};
        while (at_keyword("OR")) {
            next();
            parts.push_back(su_and());
        }
        return parts.size() == 1 ? std::move(parts[0]) : SUExpr::any_of(std::move(parts));
    }

    SUExpr su_and()
    {
        std::vector<SUExpr> parts{su_unary()};
        while (at_keyword("AND")) {
            next();
            parts.push_back(su_unary());
        }
        return parts.size() == 1 ? std::move(parts[0]) : SUExpr::all_of(std::move(parts));
    }

    SUExpr su_unary()
    {
        if (++m_depth > 200) {
            fail("Syntactic_Unit nested too deeply", peek().offset);
        }
        struct DepthGuard {
            int& d;
            ~DepthGuard() { --d; }
        } guard{m_depth};

        if (at_keyword("NOT")) {
            next();
            return SUExpr::negate(su_unary());
        }
        if (peek().kind == Tok::LParen) {
            next();
            SUExpr inner = su_or();
            if (peek().kind != Tok::RParen) {
                fail("expected ')'", peek().offset);
            }
            next();
            return inner;
        }
        const Lexeme t = next();
        if (t.kind != Tok::Ident) {
            fail("expected syntactic unit, got '" + t.text + "'", t.offset);
        }
        if (iequals(t.text, "Word")) {
            return SUExpr::word();
        }
        if (iequals(t.text, "Phrase")) {
            return SUExpr::phrase();
        }
        if (iequals(t.text, "NGram")) {
            if (peek().kind != Tok::LParen) {
                fail("expected '(' after NGram", peek().offset);
            }
            next();
            const Lexeme num = next();
            std::size_t n = parse_size(num, "for NGram");
            if (n < 1) {
                fail("NGram size must be >= 1", num.offset);
            }
            if (peek().kind != Tok::RParen) {
                fail("expected ')'", peek().offset);
            }
            next();
            return SUExpr::ngram(n);
        }
        if (iequals(t.text, "POS")) {
            const Lexeme r = next();
            if (r.kind != Tok::Ident || !iequals(r.text, "Regex")) {
                fail("expected 'Regex' after 'POS'", r.offset);
            }
            return SUExpr::pos_regex(su_pattern());
        }
        if (iequals(t.text, "POS_Regex")) {
            return SUExpr::pos_regex(su_pattern());
        }
        if (iequals(t.text, "Regex") || iequals(t.text, "Char_Regex")) {
            return SUExpr::char_regex(su_pattern());
        }
        fail("unknown syntactic unit '" + t.text + "'", t.offset);
    }

    std::string su_pattern()
    {
        const Lexeme s = next();
        if (s.kind != Tok::String) {
            fail("expected quoted regex", s.offset);
        }
        if (s.text.empty()) {
            fail("empty regex", s.offset);
        }
        if (!regex_compiles(s.text)) {
            fail("regex does not compile: " + s.text, s.offset);
        }
        return s.text;
    }

    // ---- features -----------------------------------------------------------

    static std::optional<FeatureName> feature_from_key(const std::string& lower_key)
    {
        for (auto f : all_feature_names) {
            if (text::to_lower(to_string(f)) == lower_key) {
                return f;
            }
        }
        return std::nullopt;
    }

    std::string checked_regex(const Statement& st, std::string p)
    {
        if (!regex_compiles(p)) {
            fail("regex does not compile: " + p, st.value_offset);
        }
        return p;
    }

    FeatureParams parse_params(FeatureName name, const Statement& st)
    {
        switch (name) {
        case FeatureName::POS_Sequence:
            require_yes(st);
            return PosSequenceParams{};
        case FeatureName::POS_Regex:
            return PosRegexParams{checked_regex(st, parse_pattern(st))};
        case FeatureName::POSContext:
            return PosContextParams{checked_regex(st, parse_pattern(st))};
        case FeatureName::Suffix_Prefix: {
            auto items = tuple_items(st, 3);
            SuffixPrefixParams p;
            if (items[0].kind == Tok::Ident && iequals(items[0].text, "Suffix")) {
                p.kind = AffixKind::Suffix;
            } else if (items[0].kind == Tok::Ident && iequals(items[0].text, "Prefix")) {
                p.kind = AffixKind::Prefix;
            } else {
                fail("expected Suffix or Prefix", items[0].offset);
            }
            p.length = parse_size(items[1], "length");
            if (p.length < 1) {
                fail("length must be >= 1", items[1].offset);
            }
            if (items[2].kind == Tok::Ident && items[2].text == "NULL") {
                p.pattern = std::nullopt;
            } else if (items[2].kind == Tok::String) {
                if (!regex_compiles(items[2].text)) {
                    fail("regex does not compile: " + items[2].text, items[2].offset);
                }
                p.pattern = items[2].text;
            } else {
                fail("expected NULL or quoted regex", items[2].offset);
            }
            return p;
        }
        case FeatureName::Capitalization: {
            auto v = parse_keyword(st, {"First", "All", "Any"});
            return CapitalizationParams{v == "First" ? CapitalizationMode::First
                                        : v == "All" ? CapitalizationMode::All
                                                     : CapitalizationMode::Any};
        }
        case FeatureName::Special_Chars:
            return SpecialCharsParams{parse_char_list(st)};
        case FeatureName::Context_Window: {
            auto items = tuple_items(st, 2);
            ContextWindowParams p;
            p.width = parse_size(items[0], "width");
            if (p.width < 1) {
                fail("width must be >= 1", items[0].offset);
            }
            if (items[1].kind != Tok::Ident) {
                fail("expected scope Sentence|Para|Document", items[1].offset);
            }
            if (iequals(items[1].text, "Sentence")) {
                p.scope = ContextScope::Sentence;
            } else if (iequals(items[1].text, "Para") || iequals(items[1].text, "Paragraph")) {
                p.scope = ContextScope::Para;
            } else if (iequals(items[1].text, "Document")) {
                p.scope = ContextScope::Document;
            } else {
                fail("expected scope Sentence|Para|Document", items[1].offset);
            }
            return p;
        }
        case FeatureName::Head_Directionality: {
            auto v = parse_keyword(st, {"YES", "NP", "VP"});
            return HeadDirectionalityParams{v == "NP" ? PhraseFilter::NP
                                            : v == "VP" ? PhraseFilter::VP
                                                        : PhraseFilter::Any};
        }
        case FeatureName::NGram: {
            auto t = single(st);
            std::size_t n = parse_size(t, "n-gram size");
            if (n < 1) {
                fail("n-gram size must be >= 1", t.offset);
            }
            return NGramParams{n};
        }
        case FeatureName::Semantic_Similarity:
            return SemanticSimilarityParams{parse_term(st)};
        case FeatureName::Term_Frequency:
            require_yes(st);
            return TermFrequencyParams{};
        case FeatureName::BM25_Weight: {
            if (!st.value.empty() && st.value.front() == '[') {
                auto items = tuple_items(st, 2);
                Bm25WeightParams p{parse_double(items[0], "k1"), parse_double(items[1], "b")};
                if (!(p.k1 >= 0.0)) {
                    fail("k1 must be >= 0", items[0].offset);
                }
                if (!(p.b >= 0.0 && p.b <= 1.0)) {
                    fail("b must lie in [0, 1]", items[1].offset);
                }
                return p;
            }
            require_yes(st);
            return Bm25WeightParams{};
        }
        case FeatureName::InterArrival_Delay:
            return InterArrivalDelayParams{parse_term(st)};
        }
        fail("unsupported feature", st.key_offset);
    }

    std::string_view m_src;
    SourceMap m_map;
    std::vector<Lexeme> m_toks;
    std::size_t m_pos = 0;
    int m_depth = 0;
};

}  // namespace detail

/// Parses nlpFSpL source text. Throws ParseError (with line/column) on syntax
/// errors, domain violations, duplicate declarations and feature/AU
/// incompatibility. A spec with no features parses; validate() reports it.
inline FeatureSpec parse(std::string_view source) { return detail::SpecParser(source).run(); }

inline FeatureSpec load_spec(const std::string& path) { return parse(text::read_file(path)); }

}  // namespace nlpfspl
