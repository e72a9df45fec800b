#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bm25.hpp"
#include "error.hpp"
#include "text.hpp"

namespace nlpfspl {

using Vector = std::vector<double>;

/// Pre-trained word vectors sharing one dimension.
class EmbeddingStore {
  public:
    EmbeddingStore() = default;
    explicit EmbeddingStore(std::size_t dimension) : m_dimension(dimension)
    {
        if (dimension == 0) {
            throw ValidationError("embedding dimension must be >= 1");
        }
    }

    std::size_t dimension() const noexcept { return m_dimension; }
    std::size_t size() const noexcept { return m_vectors.size(); }

    void add(std::string word, Vector v)
    {
        if (v.size() != m_dimension) {
            throw ValidationError("vector for '" + word + "' has dimension " + std::to_string(v.size()) +
                                  ", expected " + std::to_string(m_dimension));
        }
        m_vectors.insert_or_assign(std::move(word), std::move(v));
    }

    /// Exact lookup first, then the lower-cased form. nullptr when absent.
    const Vector* find(const std::string& word) const
    {
        if (auto it = m_vectors.find(word); it != m_vectors.end()) {
            return &it->second;
        }
        if (auto it = m_vectors.find(text::to_lower(word)); it != m_vectors.end()) {
            return &it->second;
        }
        return nullptr;
    }

    bool contains(const std::string& word) const { return find(word) != nullptr; }

  private:
    std::size_t m_dimension = 0;
    std::unordered_map<std::string, Vector> m_vectors;
};

/// Parses `word v1 ... vd` lines. The dimension comes from the first vector
/// line; a leading "count dimension" header line (word2vec text format) is
/// skipped.
inline EmbeddingStore parse_embeddings(std::string_view content)
{
    auto lines = text::split(content, '\n');
    EmbeddingStore store;
    bool have_store = false;
    bool first_content = true;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto fields = text::split_ws(lines[i]);
        if (fields.empty()) {
            continue;
        }
        if (first_content && fields.size() == 2) {
            auto all_digits = [](const std::string& s) {
                return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return text::is_ascii_digit(c); });
            };
            if (all_digits(fields[0]) && all_digits(fields[1])) {
                first_content = false;
                continue;
            }
        }
        first_content = false;
        if (fields.size() < 2) {
            throw ParseError("expected a word followed by at least one value", i + 1);
        }
        Vector v;
        v.reserve(fields.size() - 1);
        for (std::size_t k = 1; k < fields.size(); ++k) {
            double x = 0;
            const auto& f = fields[k];
            const char* begin = f.data();
            if (!f.empty() && f[0] == '+') {
                ++begin;
            }
            auto [ptr, ec] = std::from_chars(begin, f.data() + f.size(), x);
            if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(x)) {
                throw ParseError("invalid number '" + f + "'", i + 1);
            }
            v.push_back(x);
        }
        if (!have_store) {
            store = EmbeddingStore(v.size());
            have_store = true;
        } else if (v.size() != store.dimension()) {
            throw ParseError("dimension mismatch: expected " + std::to_string(store.dimension()) + ", got " +
                                 std::to_string(v.size()),
                             i + 1);
        }
        store.add(fields[0], std::move(v));
    }
    if (!have_store) {
        throw ParseError("embedding file is empty", 1);
    }
    return store;
}

inline EmbeddingStore load_embeddings(const std::string& path) { return parse_embeddings(text::read_file(path)); }

/// u.v / (|u||v|); 0 when either norm is 0.
inline double cosine(const Vector& u, const Vector& v)
{
    if (u.size() != v.size()) {
        throw ValidationError("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                              std::to_string(v.size()) + ")");
    }
    double dot = 0.0;
    double nu = 0.0;
    double nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) {
        return 0.0;
    }
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

inline bool is_zero(const Vector& v)
{
    for (double x : v) {
        if (x != 0.0) {
            return false;
        }
    }
    return true;
}

inline void add_into(Vector& acc, const Vector& v)
{
    for (std::size_t i = 0; i < acc.size(); ++i) {
        acc[i] += v[i];
    }
}

/// BM25(w) * v(w); the zero vector for out-of-vocabulary or weightless words.
inline Vector weighted_word_vector(const std::string& word, const EmbeddingStore& store, const Bm25Weights& weights)
{
    Vector out(store.dimension(), 0.0);
    const Vector* v = store.find(word);
    if (v == nullptr) {
        return out;
    }
    double w = weights.weight(word);
    if (w == 0.0) {
        w = weights.weight(text::to_lower(word));
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = w * (*v)[i];
    }
    return out;
}

/// v(w) with unit weight; zero for out-of-vocabulary words.
inline Vector word_vector(const std::string& word, const EmbeddingStore& store)
{
    const Vector* v = store.find(word);
    return v == nullptr ? Vector(store.dimension(), 0.0) : *v;
}

namespace detail {

template <typename WordVec>
Vector mean_of_words(std::string_view term, std::size_t dim, WordVec&& word_vec)
{
    Vector acc(dim, 0.0);
    std::size_t counted = 0;
    for (const auto& w : text::split_ws(term)) {
        Vector v = word_vec(w);
        if (is_zero(v)) {
            continue;
        }
        add_into(acc, v);
        ++counted;
    }
    if (counted > 1) {
        for (double& x : acc) {
            x /= static_cast<double>(counted);
        }
    }
    return acc;
}

}  // namespace detail

/// Mean of the weighted vectors of the term's words. Words with a zero
/// weighted vector (OOV or weightless) are left out of the mean.
inline Vector term_embedding(std::string_view term, const EmbeddingStore& store, const Bm25Weights& weights)
{
    return detail::mean_of_words(term, store.dimension(),
                                 [&](const std::string& w) { return weighted_word_vector(w, store, weights); });
}

/// Unweighted variant (every in-vocabulary word has weight 1).
inline Vector term_embedding(std::string_view term, const EmbeddingStore& store)
{
    return detail::mean_of_words(term, store.dimension(), [&](const std::string& w) { return word_vector(w, store); });
}

/// Entity terms, action terms and remaining words of one text field.
struct KeyTerms {
    std::vector<std::string> entities;
    std::vector<std::string> actions;
    std::vector<std::string> residual;

    bool operator==(const KeyTerms&) const = default;
};

/// Three-channel field representation. A channel with no terms is absent
/// and zero-valued.
struct FieldEmbedding {
    Vector en;
    Vector act;
    Vector r;
    bool has_en = false;
    bool has_act = false;
    bool has_r = false;
};

/// Per-channel sums of term embeddings.
inline FieldEmbedding field_embedding(const KeyTerms& terms, const EmbeddingStore& store, const Bm25Weights& weights)
{
    const auto dim = store.dimension();
    FieldEmbedding fe{Vector(dim, 0.0), Vector(dim, 0.0), Vector(dim, 0.0), !terms.entities.empty(),
                      !terms.actions.empty(), !terms.residual.empty()};
    for (const auto& t : terms.entities) {
        add_into(fe.en, term_embedding(t, store, weights));
    }
    for (const auto& t : terms.actions) {
        add_into(fe.act, term_embedding(t, store, weights));
    }
    for (const auto& t : terms.residual) {
        add_into(fe.r, term_embedding(t, store, weights));
    }
    return fe;
}

}  // namespace nlpfspl
