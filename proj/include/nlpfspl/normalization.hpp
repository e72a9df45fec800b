#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "corpus.hpp"
#include "error.hpp"
#include "stemmer.hpp"
#include "text.hpp"

namespace nlpfspl {

/// Variant -> representative pairs, keys and values case-folded.
using Thesaurus = std::map<std::string, std::string>;

/// Parses `variant TAB representative` lines. `#` starts a comment line.
/// Chains (a -> b, b -> c) are resolved to their final representative.
inline Thesaurus parse_thesaurus(std::string_view content)
{
    Thesaurus raw;
    std::map<std::string, std::size_t> line_of;
    auto lines = text::split(content, '\n');
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string line = lines[i];
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        auto trimmed = text::trim(line);
        if (trimmed.empty() || trimmed.front() == '#') {
            continue;
        }
        auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw ParseError("expected 'variant<TAB>representative'", i + 1);
        }
        std::string variant = text::to_lower(text::trim(std::string_view(line).substr(0, tab)));
        std::string rep = text::to_lower(text::trim(std::string_view(line).substr(tab + 1)));
        if (variant.empty() || rep.empty()) {
            throw ParseError("empty thesaurus field", i + 1);
        }
        if (auto it = raw.find(variant); it != raw.end() && it->second != rep) {
            throw ParseError("conflicting representatives for '" + variant + "'", i + 1);
        }
        raw[variant] = rep;
        line_of.emplace(variant, i + 1);
    }

    Thesaurus resolved;
    for (const auto& [variant, rep] : raw) {
        std::set<std::string> visited{variant};
        std::string current = rep;
        while (true) {
            auto it = raw.find(current);
            if (it == raw.end() || it->second == current) {
                break;
            }
            if (!visited.insert(current).second) {
                throw ParseError("cyclic thesaurus entry for '" + variant + "'", line_of.at(variant));
            }
            current = it->second;
        }
        if (current != variant) {
            resolved[variant] = current;
        }
    }
    return resolved;
}

inline Thesaurus load_thesaurus(const std::string& path) { return parse_thesaurus(text::read_file(path)); }

/// Maps surface forms to representative terms: thesaurus representative when
/// listed, otherwise the Porter stem (iterated to a fixpoint). Case folding
/// happens before stemming. normalize() is idempotent.
class NormalizationTable {
  public:
    NormalizationTable() = default;
    explicit NormalizationTable(Thesaurus thesaurus) : m_thesaurus(std::move(thesaurus))
    {
        for (const auto& [variant, rep] : m_thesaurus) {
            m_table[variant] = rep;
            m_table[rep] = rep;
        }
    }

    std::string normalize(std::string_view word) const
    {
        std::string lower = text::to_lower(word);
        if (auto it = m_table.find(lower); it != m_table.end()) {
            return it->second;
        }
        return compute(lower);
    }

    /// Records `word` so that table() lists it.
    void add(std::string_view word)
    {
        std::string lower = text::to_lower(word);
        if (m_table.count(lower) != 0) {
            return;
        }
        std::string rep = compute(lower);
        m_table.emplace(lower, rep);
        m_table.emplace(rep, rep);
    }

    const std::map<std::string, std::string>& table() const noexcept { return m_table; }
    const Thesaurus& thesaurus() const noexcept { return m_thesaurus; }

  private:
    std::string compute(const std::string& lower) const
    {
        if (auto it = m_thesaurus.find(lower); it != m_thesaurus.end()) {
            return it->second;
        }
        std::string stem = lower;
        for (int guard = 0; guard < 16; ++guard) {
            std::string next = porter_stem(stem);
            if (next == stem) {
                break;
            }
            stem = std::move(next);
        }
        if (auto it = m_thesaurus.find(stem); it != m_thesaurus.end()) {
            return it->second;
        }
        return stem;
    }

    Thesaurus m_thesaurus;
    std::map<std::string, std::string> m_table;
};

inline NormalizationTable build_normalization(const AnnotatedCorpus& corpus,
                                              const std::optional<Thesaurus>& thesaurus = std::nullopt)
{
    NormalizationTable table(thesaurus.value_or(Thesaurus{}));
    for (const auto& doc : corpus.documents()) {
        for (const auto& para : doc.paragraphs) {
            for (const auto& sent : para.sentences) {
                for (const auto& tok : sent.tokens) {
                    table.add(tok.surface);
                }
            }
        }
    }
    return table;
}

/// Copy of `corpus` with every token's norm_class filled from `table`.
inline AnnotatedCorpus with_norm_classes(const AnnotatedCorpus& corpus, const NormalizationTable& table)
{
    auto docs = corpus.documents();
    for (auto& doc : docs) {
        for (auto& para : doc.paragraphs) {
            for (auto& sent : para.sentences) {
                for (auto& tok : sent.tokens) {
                    tok.norm_class = table.normalize(tok.surface);
                }
            }
        }
    }
    return AnnotatedCorpus(std::move(docs));
}

}  // namespace nlpfspl
