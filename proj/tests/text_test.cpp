#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "tampers/error.hpp"
#include "tampers/text.hpp"

using namespace tampers;

namespace {

const char* kCamera =
    "A good film with a solid pedigree both in front of and, more specifically, behind the "
    "camera.";

std::vector<std::string> surfaces(const Text& t) {
  std::vector<std::string> out;
  for (const auto& tok : t.tokens) out.push_back(tok.surface);
  return out;
}

Text all_content(std::string_view raw) {
  Text t = tokenize(raw);
  for (auto& tok : t.tokens)
    if (tok.is_word) {
      tok.is_content = true;
      tok.pos = Pos::Noun;
    }
  return t;
}

}  // namespace

TEST(Tokenize, SplitsPunctuation) {
  Text t = tokenize("A good film.");
  EXPECT_EQ(surfaces(t), (std::vector<std::string>{"A", "good", "film", "."}));
  EXPECT_EQ(t.word_count(), 3u);
  EXPECT_EQ(t.tokens[0].normal, "a");
  EXPECT_FALSE(t.tokens[3].is_word);
}

TEST(Tokenize, KeepsInternalApostrophe) {
  Text t = tokenize("don't");
  ASSERT_EQ(t.tokens.size(), 1u);
  EXPECT_EQ(t.tokens[0].surface, "don't");
}

TEST(Tokenize, CameraSentenceHasSeventeenWords) {
  Text t = tokenize(kCamera);
  EXPECT_EQ(t.word_count(), 17u);
  EXPECT_EQ(t.tokens.size(), 20u);  // two commas and a full stop
}

TEST(Tokenize, LeadingAndTrailingRuns) {
  Text t = tokenize("(\"wow\"!) ok");
  EXPECT_EQ(surfaces(t), (std::vector<std::string>{"(\"", "wow", "\"!)", "ok"}));
}

TEST(Tokenize, EmptyThrows) {
  for (const char* raw : {"", "   ", "\t\n"}) {
    try {
      tokenize(raw);
      FAIL() << "no throw for '" << raw << "'";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::EmptyText);
    }
  }
}

TEST(Render, Identity) {
  EXPECT_EQ(render(tokenize(kCamera)), kCamera);
  EXPECT_EQ(render(tokenize("  spaced   out  text ")), "spaced out text");
}

TEST(Render, CameraHarmless) {
  Text t = all_content(kCamera);
  EXPECT_EQ(render(t, {{1, "harmless"}}),
            "A harmless film with a solid pedigree both in front of and, more specifically, "
            "behind the camera.");
}

TEST(Render, InheritsCapital) {
  Text t = all_content("Good film");
  EXPECT_EQ(render(t, {{0, "harmless"}}), "Harmless film");
}

TEST(Render, NonContentPositionThrows) {
  Text t = tokenize("A good film.");
  t.tokens[1].is_content = true;
  EXPECT_NO_THROW(render(t, {{1, "fine"}}));
  for (std::size_t bad : {std::size_t{0}, std::size_t{3}, std::size_t{9}}) {
    try {
      render(t, {{bad, "x"}});
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::InvalidSubstitution);
    }
  }
}

TEST(PosTag, LookupAndStopwords) {
  LexiconTagger tagger;
  tagger.add("film", Pos::Noun);
  tagger.add("the", Pos::Noun);
  Text t = pos_tag(tokenize("the film zzqx ."), tagger);
  EXPECT_EQ(t.tokens[0].pos, Pos::Noun);
  EXPECT_FALSE(t.tokens[0].is_content);
  EXPECT_EQ(t.tokens[1].pos, Pos::Noun);
  EXPECT_TRUE(t.tokens[1].is_content);
  EXPECT_EQ(t.tokens[2].pos, Pos::Other);
  EXPECT_FALSE(t.tokens[2].is_content);
  EXPECT_FALSE(t.tokens[3].is_content);
  EXPECT_EQ(t.content_positions(), std::vector<std::size_t>{1});
}

TEST(PosTag, FirstTagWins) {
  std::string path = ::testing::TempDir() + "pos_first.tsv";
  std::ofstream(path) << "run\tVERB\nrun\tNOUN\nfast\tADV\nbogus\tXYZ\n";
  auto tagger = LexiconTagger::load(path);
  EXPECT_EQ(tagger.lookup("run"), Pos::Verb);
  EXPECT_EQ(tagger.lookup("fast"), Pos::Adverb);
  EXPECT_FALSE(tagger.lookup("bogus").has_value());
}

TEST(Stopwords, FileMatchesBuiltin) {
  auto file = StopwordList::load(TAMPERS_SOURCE_DIR "/data/stopwords.txt");
  EXPECT_EQ(file.words(), StopwordList::english().words());
  EXPECT_GT(file.size(), 100u);
  EXPECT_TRUE(file.contains("the"));
  EXPECT_FALSE(file.contains("film"));
}

// Random texts over a small alphabet of words, punctuation and whitespace.
TEST(TextProperty, RoundTripAndLocality) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> pieces = {"good", "Film", "don't", "a", "Zoë", ",", ".", "!",
                                           "(", ")", "\"", "well-made", "x"};
  const std::vector<std::string> gaps = {" ", "  ", "\t", ""};
  std::uniform_int_distribution<std::size_t> pick_piece(0, pieces.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_gap(0, gaps.size() - 1);
  std::uniform_int_distribution<int> len(1, 14);

  for (int trial = 0; trial < 500; ++trial) {
    std::string raw = "w";
    for (int i = len(rng); i > 0; --i) raw += gaps[pick_gap(rng)] + pieces[pick_piece(rng)];

    Text t = tokenize(raw);
    std::string once = render(t);
    Text again = tokenize(once);
    ASSERT_EQ(surfaces(again), surfaces(t)) << raw;
    ASSERT_EQ(render(again), once) << raw;
    ASSERT_EQ(again.word_count(), t.word_count());

    // Substitute a random subset of word tokens with fresh words.
    Text c = all_content(raw);
    SubstitutionMap m;
    std::bernoulli_distribution coin(0.4);
    for (std::size_t i = 0; i < c.tokens.size(); ++i)
      if (c.tokens[i].is_content && coin(rng)) m[i] = "sub" + std::to_string(i);
    Text base = tokenize(render(c));
    Text perturbed = tokenize(render(c, m));
    ASSERT_EQ(base.tokens.size(), perturbed.tokens.size()) << raw;
    std::size_t diff = 0;
    for (std::size_t i = 0; i < base.tokens.size(); ++i)
      diff += base.tokens[i].surface != perturbed.tokens[i].surface;
    ASSERT_EQ(diff, m.size()) << raw;
  }
}
