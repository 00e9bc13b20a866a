#include "tampers/lexicon.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tampers/error.hpp"

namespace tampers {

namespace {

std::string_view trim(std::string_view s) {
  auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto at = s.find(sep, start);
    out.push_back(s.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start));
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  return out;
}

}  // namespace

void CandidateLexicon::add(std::string_view word, Pos pos,
                           const std::vector<std::string>& candidates) {
  std::string source = ascii_lower(word);
  auto& list = entries_[{source, pos}];
  for (const auto& raw : candidates) {
    std::string cand = ascii_lower(trim(raw));
    if (cand.empty() || cand == source) continue;
    if (std::find(list.begin(), list.end(), cand) == list.end()) list.push_back(std::move(cand));
  }
}

const std::vector<std::string>* CandidateLexicon::find(std::string_view word, Pos pos) const {
  auto it = entries_.find({std::string(word), pos});
  return it == entries_.end() ? nullptr : &it->second;
}

CandidateLexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open thesaurus " + path);

  CandidateLexicon lexicon;
  std::size_t valid = 0;
  std::string line;
  while (std::getline(in, line)) {
    auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto fields = split(view, '\t');
    std::optional<Pos> pos;
    if (fields.size() == 3) pos = parse_pos(trim(fields[1]));
    if (!pos || trim(fields[0]).empty()) {
      ++lexicon.malformed_rows_;
      continue;
    }
    std::vector<std::string> cands;
    for (auto c : split(fields[2], ',')) cands.emplace_back(trim(c));
    lexicon.add(trim(fields[0]), *pos, cands);
    ++valid;
  }
  if (valid == 0) throw Error(ErrorKind::EmptyLexicon, "no valid rows in " + path);
  return lexicon;
}

EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open embeddings " + path);

  std::vector<std::string> words;
  std::vector<double> values;
  std::unordered_map<std::string, std::size_t> seen;
  Eigen::Index dim = -1;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> row;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = trim(line);
    if (view.empty()) continue;
    std::istringstream fields{std::string(view)};
    std::string word;
    fields >> word;
    row.clear();
    std::string tok;
    while (fields >> tok) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v))
        throw Error(ErrorKind::ParseError,
                    path + ":" + std::to_string(line_no) + ": bad component '" + tok + "'");
      row.push_back(v);
    }
    if (row.empty())
      throw Error(ErrorKind::ParseError, path + ":" + std::to_string(line_no) + ": no components");
    if (dim < 0) dim = static_cast<Eigen::Index>(row.size());
    if (static_cast<Eigen::Index>(row.size()) != dim)
      throw Error(ErrorKind::DimensionMismatch,
                  path + ":" + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                      " components, got " + std::to_string(row.size()));
    if (!seen.emplace(word, words.size()).second) continue;
    words.push_back(word);
    values.insert(values.end(), row.begin(), row.end());
  }
  if (words.empty()) throw Error(ErrorKind::ParseError, path + ": no vectors");

  EmbeddingTable::Matrix vectors =
      Eigen::Map<const EmbeddingTable::Matrix>(values.data(), static_cast<Eigen::Index>(words.size()), dim);
  return EmbeddingTable(std::move(words), std::move(vectors));
}

CandidateSet build_candidates(const Text& text, std::size_t position,
                              const CandidateLexicon& lexicon,
                              const EmbeddingTable& embeddings, std::size_t z) {
  if (position >= text.tokens.size() || !text.tokens[position].is_content)
    throw Error(ErrorKind::InvalidSubstitution,
                "position " + std::to_string(position) + " is not a content word");
  if (z == 0) throw Error(ErrorKind::ConfigError, "candidate set size z must be positive");

  const Token& tok = text.tokens[position];
  CandidateSet out{position, {}};
  const auto* pool = lexicon.find(tok.normal, tok.pos);
  if (pool == nullptr || pool->empty()) return out;

  struct Scored {
    const std::string* word;
    std::optional<double> sim;
  };
  std::vector<Scored> scored;
  scored.reserve(pool->size());
  auto source = embeddings.find(tok.normal);
  for (const auto& cand : *pool) {
    std::optional<double> sim;
    if (source) {
      if (auto v = embeddings.find(cand)) sim = cosine(*v, *source);
    }
    scored.push_back({&cand, sim});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.sim.has_value() != b.sim.has_value()) return a.sim.has_value();
    if (a.sim && *a.sim != *b.sim) return *a.sim > *b.sim;
    return *a.word < *b.word;
  });
  const std::size_t keep = std::min(z, scored.size());
  out.words.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.words.push_back(*scored[i].word);
  return out;
}

std::vector<CandidateSet> build_all_candidates(const Text& text, const CandidateLexicon& lexicon,
                                               const EmbeddingTable& embeddings, std::size_t z) {
  std::vector<CandidateSet> out(text.tokens.size());
  for (std::size_t i = 0; i < text.tokens.size(); ++i) {
    out[i].position = i;
    if (text.tokens[i].is_content) out[i] = build_candidates(text, i, lexicon, embeddings, z);
  }
  return out;
}

}  // namespace tampers
