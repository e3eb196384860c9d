#include "entail/bm25.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "entail/errors.hpp"
#include "entail/text.hpp"

namespace entail {

Bm25Index::Bm25Index(std::vector<std::string> documents, double k1, double b)
    : m_docs(std::move(documents)), m_k1(k1), m_b(b)
{
    if (!(k1 >= 0.0) || !(b >= 0.0 && b <= 1.0)) {
        throw ConfigError("BM25 needs k1 >= 0 and 0 <= b <= 1");
    }
    m_tf.reserve(m_docs.size());
    std::size_t total = 0;
    for (auto const& doc : m_docs) {
        auto tokens = tokenize(doc);
        std::unordered_map<std::string, std::uint32_t> tf;
        for (auto& t : tokens) {
            ++tf[t];
        }
        for (auto const& entry : tf) {
            ++m_df[entry.first];
        }
        m_length.push_back(tokens.size());
        total += tokens.size();
        m_tf.push_back(std::move(tf));
    }
    if (!m_docs.empty()) {
        m_avgdl = static_cast<double>(total) / static_cast<double>(m_docs.size());
    }
}

std::size_t Bm25Index::document_frequency(std::string const& term) const
{
    auto it = m_df.find(term);
    return it == m_df.end() ? 0 : it->second;
}

double Bm25Index::idf(std::string const& term) const
{
    auto n = static_cast<double>(m_docs.size());
    auto df = static_cast<double>(document_frequency(term));
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

std::vector<std::string> Bm25Index::query_terms(std::string_view query) const
{
    auto terms = tokenize(query);
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    return terms;
}

double Bm25Index::score_terms(std::vector<std::string> const& terms, std::size_t doc) const
{
    auto const& tf = m_tf[doc];
    double norm = m_avgdl > 0.0 ? static_cast<double>(m_length[doc]) / m_avgdl : 0.0;
    double total = 0.0;
    for (auto const& t : terms) {
        auto it = tf.find(t);
        if (it == tf.end()) {
            continue;
        }
        double f = it->second;
        total += idf(t) * f * (m_k1 + 1.0) / (f + m_k1 * (1.0 - m_b + m_b * norm));
    }
    return total;
}

double Bm25Index::score(std::string_view query, std::size_t doc) const
{
    return score_terms(query_terms(query), doc);
}

std::vector<double> Bm25Index::scores(std::string_view query) const
{
    auto terms = query_terms(query);
    std::vector<double> out(m_docs.size());
    for (std::size_t d = 0; d < m_docs.size(); ++d) {
        out[d] = score_terms(terms, d);
    }
    return out;
}

std::vector<double> Bm25Index::scores_parallel(std::string_view query) const
{
    auto terms = query_terms(query);
    std::vector<double> out(m_docs.size());
    auto n = static_cast<std::int64_t>(m_docs.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t d = 0; d < n; ++d) {
        out[static_cast<std::size_t>(d)] = score_terms(terms, static_cast<std::size_t>(d));
    }
    return out;
}

std::vector<std::pair<std::string, double>> bm25_topk(Bm25Index const& index,
                                                      std::string_view query,
                                                      std::size_t k,
                                                      std::set<std::string> const& exclude)
{
    if (index.empty()) {
        throw EmptyCorpus("BM25 index has no documents");
    }
    if (k == 0) {
        throw ConfigError("bm25_topk needs k >= 1");
    }
    auto scores = index.scores(query);
    std::vector<std::size_t> order;
    for (std::size_t d = 0; d < index.size(); ++d) {
        if (exclude.count(index.documents()[d]) == 0) {
            order.push_back(d);
        }
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    order.resize(std::min(order.size(), k));
    std::vector<std::pair<std::string, double>> out;
    for (auto d : order) {
        out.emplace_back(index.documents()[d], scores[d]);
    }
    return out;
}

}  // namespace entail
