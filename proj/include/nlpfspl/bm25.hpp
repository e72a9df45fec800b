#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "error.hpp"

namespace nlpfspl {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

/// BM25 weights of the words of one document, plus the corpus statistics
/// they were computed from. Words absent from the document are absent here.
struct Bm25Weights {
    std::map<std::string, double> weights;
    Bm25Params params;
    std::size_t doc_count = 0;
    double avg_doc_length = 0.0;

    /// 0 for words without a weight.
    double weight(const std::string& word) const
    {
        auto it = weights.find(word);
        return it == weights.end() ? 0.0 : it->second;
    }

    bool contains(const std::string& word) const { return weights.count(word) != 0; }
};

/// Corpus statistics for Okapi BM25:
///   idf(w)     = ln(1 + (N - df + 0.5) / (df + 0.5))
///   weight(w,d) = idf(w) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * |d| / avgdl))
class Bm25Corpus {
  public:
    Bm25Corpus(const std::vector<std::vector<std::string>>& documents, Bm25Params params = {})
        : m_params(params)
    {
        if (documents.empty()) {
            throw ValidationError("BM25 needs at least one document");
        }
        double total = 0.0;
        for (const auto& doc : documents) {
            std::map<std::string, std::size_t> tf;
            for (const auto& w : doc) {
                ++tf[w];
            }
            for (const auto& [w, _] : tf) {
                ++m_doc_freq[w];
            }
            m_term_freqs.push_back(std::move(tf));
            m_lengths.push_back(doc.size());
            total += static_cast<double>(doc.size());
        }
        m_avg_length = total / static_cast<double>(documents.size());
    }

    std::size_t doc_count() const noexcept { return m_lengths.size(); }
    double avg_doc_length() const noexcept { return m_avg_length; }
    const Bm25Params& params() const noexcept { return m_params; }

    std::size_t doc_freq(const std::string& w) const
    {
        auto it = m_doc_freq.find(w);
        return it == m_doc_freq.end() ? 0 : it->second;
    }

    double idf(const std::string& w) const
    {
        const auto n = static_cast<double>(doc_count());
        const auto df = static_cast<double>(doc_freq(w));
        return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    }

    /// Weight of `w` in document `doc`; 0 when the word does not occur there.
    double weight(const std::string& w, std::size_t doc) const
    {
        const auto& tf_map = m_term_freqs.at(doc);
        auto it = tf_map.find(w);
        if (it == tf_map.end()) {
            return 0.0;
        }
        return score(idf(w), static_cast<double>(it->second), static_cast<double>(m_lengths[doc]));
    }

    Bm25Weights weights_for(std::size_t doc) const
    {
        Bm25Weights out{{}, m_params, doc_count(), m_avg_length};
        for (const auto& [w, tf] : m_term_freqs.at(doc)) {
            out.weights.emplace(w, score(idf(w), static_cast<double>(tf), static_cast<double>(m_lengths[doc])));
        }
        return out;
    }

    /// Weights for the concatenation of every document, against the same
    /// per-document statistics.
    Bm25Weights weights_for_all() const
    {
        std::map<std::string, std::size_t> tf;
        double len = 0.0;
        for (std::size_t d = 0; d < doc_count(); ++d) {
            for (const auto& [w, n] : m_term_freqs[d]) {
                tf[w] += n;
            }
            len += static_cast<double>(m_lengths[d]);
        }
        Bm25Weights out{{}, m_params, doc_count(), m_avg_length};
        for (const auto& [w, n] : tf) {
            out.weights.emplace(w, score(idf(w), static_cast<double>(n), len));
        }
        return out;
    }

  private:
    double score(double idf, double tf, double len) const
    {
        const double norm = m_avg_length > 0.0 ? len / m_avg_length : 0.0;
        return idf * (tf * (m_params.k1 + 1.0)) / (tf + m_params.k1 * (1.0 - m_params.b + m_params.b * norm));
    }

    Bm25Params m_params;
    std::vector<std::map<std::string, std::size_t>> m_term_freqs;
    std::vector<std::size_t> m_lengths;
    std::map<std::string, std::size_t> m_doc_freq;
    double m_avg_length = 0.0;
};

/// Each inner vector is one document's word sequence.
inline Bm25Corpus compute_bm25(const std::vector<std::vector<std::string>>& documents, Bm25Params params = {})
{
    return Bm25Corpus(documents, params);
}

}  // namespace nlpfspl
