#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "error.hpp"
#include "text.hpp"

namespace nlpfspl {

struct Token {
    std::string surface;
    std::string pos;  // Penn Treebank tag
    std::string doc_id;
    std::size_t para_idx = 0;
    std::size_t sent_idx = 0;
    std::size_t token_idx = 0;  // position within sentence
    std::optional<std::string> norm_class;

    bool operator==(const Token&) const = default;
};

struct Sentence {
    std::size_t index = 0;
    std::vector<Token> tokens;

    bool operator==(const Sentence&) const = default;
};

struct Paragraph {
    std::size_t index = 0;
    std::vector<Sentence> sentences;

    bool operator==(const Paragraph&) const = default;
};

struct Document {
    std::string id;
    std::vector<Paragraph> paragraphs;

    bool operator==(const Document&) const = default;
};

/// Position of a token inside an AnnotatedCorpus, by container offsets
/// (not by the stored para/sent indices, which may be sparse).
struct TokenAddress {
    std::size_t doc = 0;
    std::size_t para = 0;
    std::size_t sent = 0;
    std::size_t token = 0;

    auto operator<=>(const TokenAddress&) const = default;
};

/// Documents -> paragraphs -> sentences -> tokens. Immutable once built;
/// concurrent readers need no synchronisation.
class AnnotatedCorpus {
  public:
    AnnotatedCorpus() = default;
    explicit AnnotatedCorpus(std::vector<Document> documents) : m_documents(std::move(documents)) {}

    const std::vector<Document>& documents() const noexcept { return m_documents; }
    bool empty() const noexcept { return m_documents.empty(); }

    const Token& at(const TokenAddress& a) const
    {
        return m_documents.at(a.doc).paragraphs.at(a.para).sentences.at(a.sent).tokens.at(a.token);
    }

    std::size_t token_count() const
    {
        std::size_t n = 0;
        for (const auto& d : m_documents) {
            for (const auto& p : d.paragraphs) {
                for (const auto& s : p.sentences) {
                    n += s.tokens.size();
                }
            }
        }
        return n;
    }

    std::size_t sentence_count() const
    {
        std::size_t n = 0;
        for (const auto& d : m_documents) {
            for (const auto& p : d.paragraphs) {
                n += p.sentences.size();
            }
        }
        return n;
    }

    /// All token addresses in global (doc, para, sent, token) order.
    std::vector<TokenAddress> addresses() const
    {
        std::vector<TokenAddress> out;
        for (std::size_t d = 0; d < m_documents.size(); ++d) {
            const auto& doc = m_documents[d];
            for (std::size_t p = 0; p < doc.paragraphs.size(); ++p) {
                const auto& para = doc.paragraphs[p];
                for (std::size_t s = 0; s < para.sentences.size(); ++s) {
                    for (std::size_t t = 0; t < para.sentences[s].tokens.size(); ++t) {
                        out.push_back({d, p, s, t});
                    }
                }
            }
        }
        return out;
    }

    bool operator==(const AnnotatedCorpus&) const = default;

  private:
    std::vector<Document> m_documents;
};

namespace detail {

inline std::size_t parse_index(const std::string& field, std::size_t line_no, const char* what)
{
    if (field.empty() || field.size() > 18) {
        throw ParseError(std::string("invalid ") + what + " '" + field + "'", line_no);
    }
    std::size_t v = 0;
    for (char c : field) {
        if (!text::is_ascii_digit(c)) {
            throw ParseError(std::string("invalid ") + what + " '" + field + "'", line_no);
        }
        v = v * 10 + static_cast<std::size_t>(c - '0');
    }
    return v;
}

}  // namespace detail

/// Parses the 5-column TAB annotation format:
///   doc_id TAB para_idx TAB sent_idx TAB surface TAB pos
/// A blank line ends a sentence; extra columns are ignored; lines starting
/// with '#' are comments.
inline AnnotatedCorpus parse_conll(std::string_view content)
{
    std::vector<Document> docs;
    std::set<std::string> closed_docs;
    std::set<std::tuple<std::string, std::size_t, std::size_t>> seen_sentences;
    bool sentence_open = false;

    auto lines = text::split(content, '\n');
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        std::string line = lines[i];
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (text::trim(line).empty()) {
            sentence_open = false;
            continue;
        }
        if (line.front() == '#') {
            continue;
        }
        auto cols = text::split(line, '\t');
        if (cols.size() < 5) {
            throw ParseError("expected 5 TAB-separated columns, found " + std::to_string(cols.size()),
                             line_no);
        }
        const std::string& doc_id = cols[0];
        if (doc_id.empty()) {
            throw ParseError("empty doc_id", line_no);
        }
        std::size_t para = detail::parse_index(cols[1], line_no, "para_idx");
        std::size_t sent = detail::parse_index(cols[2], line_no, "sent_idx");
        if (cols[3].empty()) {
            throw ParseError("empty surface form", line_no);
        }
        if (cols[4].empty()) {
            throw ParseError("empty POS tag", line_no);
        }

        if (docs.empty() || docs.back().id != doc_id) {
            if (!docs.empty()) {
                closed_docs.insert(docs.back().id);
            }
            if (closed_docs.count(doc_id) != 0) {
                throw StructureError("line " + std::to_string(line_no) + ": document '" + doc_id +
                                     "' reappears after another document");
            }
            docs.push_back(Document{doc_id, {}});
            sentence_open = false;
        }
        Document& doc = docs.back();
        if (!doc.paragraphs.empty()) {
            const auto& last_para = doc.paragraphs.back();
            const auto last_sent = last_para.sentences.back().index;
            if (para < last_para.index || (para == last_para.index && sent < last_sent)) {
                throw StructureError("line " + std::to_string(line_no) +
                                     ": non-monotone paragraph/sentence indices");
            }
            if (para != last_para.index || sent != last_sent) {
                sentence_open = false;
            }
        }
        if (!sentence_open) {
            if (!seen_sentences.emplace(doc_id, para, sent).second) {
                throw StructureError("line " + std::to_string(line_no) + ": sentence (" + doc_id + ", " +
                                     std::to_string(para) + ", " + std::to_string(sent) +
                                     ") appears twice");
            }
            if (doc.paragraphs.empty() || doc.paragraphs.back().index != para) {
                doc.paragraphs.push_back(Paragraph{para, {}});
            }
            doc.paragraphs.back().sentences.push_back(Sentence{sent, {}});
            sentence_open = true;
        }
        auto& tokens = doc.paragraphs.back().sentences.back().tokens;
        tokens.push_back(Token{cols[3], cols[4], doc_id, para, sent, tokens.size(), std::nullopt});
    }
    return AnnotatedCorpus(std::move(docs));
}

inline AnnotatedCorpus load_conll(const std::string& path) { return parse_conll(text::read_file(path)); }

/// Writes the 5-column format back out, one blank line after every sentence.
inline std::string serialize_conll(const AnnotatedCorpus& corpus)
{
    std::string out;
    for (const auto& doc : corpus.documents()) {
        for (const auto& para : doc.paragraphs) {
            for (const auto& sent : para.sentences) {
                for (const auto& tok : sent.tokens) {
                    out += doc.id;
                    out += '\t';
                    out += std::to_string(para.index);
                    out += '\t';
                    out += std::to_string(sent.index);
                    out += '\t';
                    out += tok.surface;
                    out += '\t';
                    out += tok.pos;
                    out += '\n';
                }
                out += '\n';
            }
        }
    }
    return out;
}

}  // namespace nlpfspl
