#include "tampers/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "tampers/error.hpp"

namespace tampers {

// Generated from data/stopwords.txt at configure time.
extern const char* const kEnglishStopwords;

std::string_view to_string(Pos pos) noexcept {
  switch (pos) {
    case Pos::Noun: return "NOUN";
    case Pos::Verb: return "VERB";
    case Pos::Adjective: return "ADJ";
    case Pos::Adverb: return "ADV";
    case Pos::Other: return "OTHER";
  }
  return "OTHER";
}

std::optional<Pos> parse_pos(std::string_view tag) noexcept {
  if (tag == "NOUN") return Pos::Noun;
  if (tag == "VERB") return Pos::Verb;
  if (tag == "ADJ") return Pos::Adjective;
  if (tag == "ADV") return Pos::Adverb;
  return std::nullopt;
}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Non-ASCII bytes count as word characters so UTF-8 letters stay intact.
bool is_punct(char c) {
  auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u) != 0;
}

bool has_word_char(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return !is_punct(c); });
}

Token make_token(std::string_view surface, bool space_before) {
  Token t;
  t.surface = std::string(surface);
  t.normal = ascii_lower(surface);
  t.is_word = has_word_char(surface);
  t.space_before = space_before;
  return t;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::size_t Text::word_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(tokens.begin(), tokens.end(), [](const Token& t) { return t.is_word; }));
}

std::vector<std::size_t> Text::content_positions() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (tokens[i].is_content) out.push_back(i);
  return out;
}

Text tokenize(std::string_view raw) {
  Text text;
  std::size_t i = 0;
  while (i < raw.size()) {
    while (i < raw.size() && is_space(raw[i])) ++i;
    if (i >= raw.size()) break;
    std::size_t end = i;
    while (end < raw.size() && !is_space(raw[end])) ++end;
    std::string_view chunk = raw.substr(i, end - i);
    bool space_before = !text.tokens.empty();

    std::size_t lead = 0;
    while (lead < chunk.size() && is_punct(chunk[lead])) ++lead;
    if (lead == chunk.size()) {
      text.tokens.push_back(make_token(chunk, space_before));
    } else {
      std::size_t tail = chunk.size();
      while (tail > lead && is_punct(chunk[tail - 1])) --tail;
      if (lead > 0) {
        text.tokens.push_back(make_token(chunk.substr(0, lead), space_before));
        space_before = false;
      }
      text.tokens.push_back(make_token(chunk.substr(lead, tail - lead), space_before));
      if (tail < chunk.size()) text.tokens.push_back(make_token(chunk.substr(tail), false));
    }
    i = end;
  }
  if (text.tokens.empty()) throw Error(ErrorKind::EmptyText, "input has no tokens");
  return text;
}

std::string render(const Text& text, const SubstitutionMap& substitutions) {
  for (const auto& [pos, word] : substitutions) {
    if (pos >= text.tokens.size() || !text.tokens[pos].is_content)
      throw Error(ErrorKind::InvalidSubstitution,
                  "position " + std::to_string(pos) + " is not a content word");
  }
  std::string out;
  for (std::size_t i = 0; i < text.tokens.size(); ++i) {
    const Token& tok = text.tokens[i];
    if (tok.space_before) out.push_back(' ');
    auto it = substitutions.find(i);
    if (it == substitutions.end()) {
      out += tok.surface;
      continue;
    }
    std::string word = it->second;
    if (!word.empty() && !tok.surface.empty() &&
        std::isupper(static_cast<unsigned char>(tok.surface.front())))
      word.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(word.front())));
    out += word;
  }
  return out;
}

const StopwordList& StopwordList::english() {
  static const StopwordList list = [] {
    std::unordered_set<std::string> words;
    std::istringstream in(kEnglishStopwords);
    std::string line;
    while (std::getline(in, line)) {
      auto w = trim(line);
      if (!w.empty() && w.front() != '#') words.insert(ascii_lower(w));
    }
    return StopwordList(std::move(words));
  }();
  return list;
}

StopwordList StopwordList::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open stopword file " + path);
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    auto w = trim(line);
    if (!w.empty() && w.front() != '#') words.insert(ascii_lower(w));
  }
  return StopwordList(std::move(words));
}

LexiconTagger LexiconTagger::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open POS lexicon " + path);
  LexiconTagger tagger;
  std::string line;
  while (std::getline(in, line)) {
    auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto tab = view.find('\t');
    if (tab == std::string_view::npos) continue;
    auto pos = parse_pos(trim(view.substr(tab + 1)));
    if (!pos) continue;
    tagger.add(trim(view.substr(0, tab)), *pos);
  }
  return tagger;
}

void LexiconTagger::add(std::string_view word, Pos pos) {
  table_.emplace(ascii_lower(word), pos);
}

std::optional<Pos> LexiconTagger::lookup(std::string_view word) const {
  auto it = table_.find(std::string(word));
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

std::vector<Pos> LexiconTagger::tag(const Text& text) const {
  std::vector<Pos> out;
  out.reserve(text.tokens.size());
  for (const auto& tok : text.tokens)
    out.push_back(tok.is_word ? lookup(tok.normal).value_or(Pos::Other) : Pos::Other);
  return out;
}

Text pos_tag(const Text& text, const PosTagger& tagger, const StopwordList& stopwords) {
  Text out = text;
  auto tags = tagger.tag(text);
  for (std::size_t i = 0; i < out.tokens.size(); ++i) {
    Token& tok = out.tokens[i];
    tok.pos = i < tags.size() ? tags[i] : Pos::Other;
    tok.is_content = tok.is_word && tok.pos != Pos::Other && !stopwords.contains(tok.normal);
  }
  return out;
}

}  // namespace tampers
