#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tampers/text.hpp"

namespace tampers {

/// Cosine similarity of two dense vectors. Zero-norm inputs yield 0.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& a,
                                 const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (na == Scalar(0) || nb == Scalar(0)) return Scalar(0);
  return a.dot(b) / (na * nb);
}

/// Merged synonym/sememe thesaurus keyed by (word, pos).
class CandidateLexicon {
 public:
  using Key = std::pair<std::string, Pos>;

  /// Adds candidates for (word, pos), dropping self-references and
  /// duplicates. All words are lowercased.
  void add(std::string_view word, Pos pos, const std::vector<std::string>& candidates);

  /// nullptr when (word, pos) has no entry.
  const std::vector<std::string>* find(std::string_view word, Pos pos) const;

  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t malformed_rows() const noexcept { return malformed_rows_; }
  const std::map<Key, std::vector<std::string>>& entries() const noexcept { return entries_; }

 private:
  friend CandidateLexicon load_lexicon(const std::string& path);

  std::map<Key, std::vector<std::string>> entries_;
  std::size_t malformed_rows_ = 0;
};

/// TSV `word<TAB>pos<TAB>cand1,cand2,...`. Throws IoError / EmptyLexicon.
CandidateLexicon load_lexicon(const std::string& path);

/// Word vectors stored row-wise in one dense matrix.
template <typename Scalar_>
class BasicEmbeddingTable {
 public:
  using Scalar = Scalar_;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Row = decltype(std::declval<const Matrix&>().row(0));

  BasicEmbeddingTable() = default;
  BasicEmbeddingTable(std::vector<std::string> words, Matrix vectors)
      : words_(std::move(words)), vectors_(std::move(vectors)) {
    index_.reserve(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) index_.emplace(words_[i], i);
  }

  Eigen::Index dim() const noexcept { return vectors_.cols(); }
  std::size_t size() const noexcept { return words_.size(); }
  bool contains(std::string_view word) const { return index_.count(std::string(word)) != 0; }

  std::optional<Row> find(std::string_view word) const {
    auto it = index_.find(std::string(word));
    if (it == index_.end()) return std::nullopt;
    return vectors_.row(static_cast<Eigen::Index>(it->second));
  }

  /// nullopt if either word is missing.
  std::optional<Scalar> similarity(std::string_view a, std::string_view b) const {
    auto va = find(a);
    auto vb = find(b);
    if (!va || !vb) return std::nullopt;
    return cosine(*va, *vb);
  }

  const std::vector<std::string>& words() const noexcept { return words_; }
  const Matrix& vectors() const noexcept { return vectors_; }

 private:
  std::vector<std::string> words_;
  Matrix vectors_;
  std::unordered_map<std::string, std::size_t> index_;
};

using EmbeddingTable = BasicEmbeddingTable<double>;

/// Text format `word v1 ... vd`; duplicate words keep the first row.
/// Throws IoError, DimensionMismatch, or ParseError (with line number).
EmbeddingTable load_embeddings(const std::string& path);

struct CandidateSet {
  std::size_t position = 0;
  std::vector<std::string> words;

  bool empty() const noexcept { return words.empty(); }
  std::size_t size() const noexcept { return words.size(); }
};

/// Top-z substitutes for token `position`, by descending cosine to the
/// source word. Ties and unembedded candidates fall back to lexicographic
/// order, unembedded ones after all embedded ones.
CandidateSet build_candidates(const Text& text, std::size_t position,
                              const CandidateLexicon& lexicon,
                              const EmbeddingTable& embeddings, std::size_t z);

/// One CandidateSet per token; non-content tokens get an empty set.
std::vector<CandidateSet> build_all_candidates(const Text& text, const CandidateLexicon& lexicon,
                                               const EmbeddingTable& embeddings, std::size_t z);

}  // namespace tampers
