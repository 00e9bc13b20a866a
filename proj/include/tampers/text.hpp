#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace tampers {

enum class Pos { Noun, Verb, Adjective, Adverb, Other };

std::string_view to_string(Pos pos) noexcept;

/// Parses the file spelling (NOUN, VERB, ADJ, ADV). Returns nullopt otherwise.
std::optional<Pos> parse_pos(std::string_view tag) noexcept;

struct Token {
  std::string surface;
  std::string normal;
  Pos pos = Pos::Other;
  bool is_content = false;
  // Punctuation-only tokens are not words and do not count towards N.
  bool is_word = false;
  // False when the token was glued to its predecessor in the raw input
  // (split-off punctuation, or the very first token).
  bool space_before = false;
};

/// Position -> replacement word.
using SubstitutionMap = std::map<std::size_t, std::string>;

struct Text {
  std::vector<Token> tokens;
  std::optional<int> label;
  std::string id;

  /// Number of word tokens, the perturbation-rate denominator.
  std::size_t word_count() const noexcept;
  std::vector<std::size_t> content_positions() const;
};

std::string ascii_lower(std::string_view s);

/// Splits on whitespace, peeling leading/trailing punctuation runs off each
/// chunk as separate tokens. Throws Error(EmptyText) when nothing remains.
Text tokenize(std::string_view raw);

/// Joins tokens back into a string. Substituted words inherit the leading
/// capital of the original surface. Throws Error(InvalidSubstitution) for a
/// position that is not a content token.
std::string render(const Text& text, const SubstitutionMap& substitutions = {});

class StopwordList {
 public:
  StopwordList() = default;
  explicit StopwordList(std::unordered_set<std::string> words) : words_(std::move(words)) {}

  /// The built-in English list; data/stopwords.txt carries the same entries.
  static const StopwordList& english();
  /// One lowercase word per line; blank lines and '#' comments ignored.
  static StopwordList load(const std::string& path);

  bool contains(std::string_view word) const { return words_.count(std::string(word)) != 0; }
  std::size_t size() const noexcept { return words_.size(); }
  const std::unordered_set<std::string>& words() const noexcept { return words_; }

 private:
  std::unordered_set<std::string> words_;
};

/// Assigns a part of speech per token. A contextual tagger can implement this
/// in place of the lexicon lookup.
class PosTagger {
 public:
  virtual ~PosTagger() = default;
  virtual std::vector<Pos> tag(const Text& text) const = 0;
};

class LexiconTagger final : public PosTagger {
 public:
  LexiconTagger() = default;

  /// TSV `word<TAB>pos`, one row per (word, pos) pair. A word listed with
  /// several tags is tagged with the first one in file order.
  static LexiconTagger load(const std::string& path);

  void add(std::string_view word, Pos pos);
  std::vector<Pos> tag(const Text& text) const override;
  std::optional<Pos> lookup(std::string_view word) const;
  std::size_t size() const noexcept { return table_.size(); }

 private:
  std::unordered_map<std::string, Pos> table_;
};

/// Returns a copy of `text` with POS tags and the content mask recomputed.
Text pos_tag(const Text& text, const PosTagger& tagger,
             const StopwordList& stopwords = StopwordList::english());

}  // namespace tampers
