#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "tampers/eval.hpp"
#include "tampers/lexicon.hpp"
#include "tampers/text.hpp"

namespace tampers::toy {

/// A small self-consistent world: thesaurus, embeddings, POS lexicon, a
/// 3-class linear victim (0 = negative, 1 = positive, 2 = neutral) and a
/// labelled dataset built from sentence templates.
struct World {
  std::vector<std::string> words;  // every vocabulary word
  CandidateLexicon lexicon;
  EmbeddingTable embeddings;
  LexiconTagger tagger;
  std::unordered_map<std::string, Eigen::VectorXd> weights;
  Eigen::VectorXd bias;
  std::vector<Sample> dataset;

  ClassifierHandle victim() const;
  /// Thesaurus rows, i.e. the number of (word, pos) entries.
  std::size_t thesaurus_size() const { return lexicon.size(); }
};

struct WorldOptions {
  std::uint64_t seed = 7;
  std::size_t samples = 200;
  std::size_t embedding_dim = 16;
  // Fraction of samples whose gold label disagrees with the victim.
  double mislabeled = 0.05;
};

World make_world(const WorldOptions& options = {});

/// Writes thesaurus.tsv, embeddings.txt, pos.tsv, victim.weights and
/// dataset.jsonl under `dir`.
void write_world(const World& world, const std::filesystem::path& dir);

}  // namespace tampers::toy
