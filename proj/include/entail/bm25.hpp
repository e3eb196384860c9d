#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace entail {

/// Okapi BM25 over a fixed document list. Terms are lowercase alphanumeric
/// runs; no stemming or stopwords.
class Bm25Index {
  public:
    explicit Bm25Index(std::vector<std::string> documents, double k1 = 1.2, double b = 0.75);

    std::size_t size() const { return m_docs.size(); }
    bool empty() const { return m_docs.empty(); }
    std::vector<std::string> const& documents() const { return m_docs; }
    double k1() const { return m_k1; }
    double b() const { return m_b; }
    double average_length() const { return m_avgdl; }
    std::size_t document_frequency(std::string const& term) const;

    /// ln(1 + (N - df + 0.5) / (df + 0.5)); never negative.
    double idf(std::string const& term) const;
    double score(std::string_view query, std::size_t doc) const;

    /// Scores of every document for `query`, in document order.
    std::vector<double> scores(std::string_view query) const;
    /// Same values as scores(), documents split across OpenMP threads.
    std::vector<double> scores_parallel(std::string_view query) const;

  private:
    std::vector<std::string> query_terms(std::string_view query) const;
    double score_terms(std::vector<std::string> const& terms, std::size_t doc) const;

    std::vector<std::string> m_docs;
    std::vector<std::unordered_map<std::string, std::uint32_t>> m_tf;
    std::vector<std::size_t> m_length;
    std::unordered_map<std::string, std::size_t> m_df;
    double m_avgdl = 0.0;
    double m_k1;
    double m_b;
};

/// Top `k` documents for `query` with scores, best first. Documents whose
/// text is in `exclude` are removed before truncation; ties go to the lower
/// document index. Throws EmptyCorpus for an empty index and ConfigError
/// for k = 0.
std::vector<std::pair<std::string, double>> bm25_topk(Bm25Index const& index,
                                                      std::string_view query,
                                                      std::size_t k,
                                                      std::set<std::string> const& exclude = {});

}  // namespace entail
