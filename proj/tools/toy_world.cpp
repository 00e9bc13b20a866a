#include "toy_world.hpp"

#include <algorithm>
#include <fstream>
#include <random>

#include <json.hpp>

#include "tampers/error.hpp"
#include "tampers/victim.hpp"

namespace tampers::toy {

namespace {

const std::vector<std::string> kPositive = {
    "good",     "great",     "fine",      "solid",    "superb",     "excellent",
    "wonderful", "brilliant", "lovely",   "charming", "delightful", "splendid",
    "terrific", "fantastic", "marvelous", "pleasant", "enjoyable",  "admirable",
    "remarkable", "impressive", "gorgeous", "stunning", "touching",  "clever",
    "witty",    "engaging",  "gripping",  "moving",   "elegant",    "vibrant"};

const std::vector<std::string> kNegative = {
    "bad",    "awful",    "terrible", "dreadful", "poor",    "dull",    "boring", "weak",
    "lousy",  "horrible", "tedious",  "clumsy",   "bland",   "shallow", "messy",  "painful",
    "sloppy", "stale",    "tiresome", "dismal",   "feeble",  "lame",    "awkward", "hollow",
    "grim",   "atrocious", "flat",    "dire",     "cheap",   "tacky"};

const std::vector<std::string> kHedge = {
    "harmless", "ordinary", "passable", "average",   "modest",   "plain",   "routine",
    "standard", "typical",  "moderate", "fair",      "acceptable", "adequate", "middling",
    "tolerable", "regular", "usual",    "common",    "mild",     "uneven"};

const std::vector<std::string> kNouns = {
    "film",      "movie",    "story",    "plot",     "cast",       "acting",    "script",
    "camera",    "scene",    "ending",   "director", "music",      "score",     "pace",
    "tone",      "humor",    "dialogue", "character", "picture",   "drama",     "comedy",
    "performance", "production", "show", "series",   "episode",    "book",      "meal",
    "food",      "service",  "place",    "room",     "staff",      "dish",      "menu",
    "price",     "sauce",    "drink",    "view",     "design",     "style",     "effort",
    "idea",      "moment",   "detail",   "voice",    "sound",      "color",     "light",
    "setting",   "visuals",  "editing",  "writing",  "narrative",  "premise",   "finale",
    "hero",      "villain",  "lead",     "crew",       "actor",     "sequel",    "trailer",
    "soundtrack", "chapter", "singer",   "band",       "song",      "album",     "stage"};

const std::vector<std::string> kVerbs = {
    "works", "feels",  "looks", "seems", "delivers", "offers", "shows",    "plays",
    "moves", "holds",  "builds", "brings", "runs",   "keeps",  "makes",    "tells",
    "gives", "leaves", "turns", "comes", "lands",    "drags",  "stumbles", "shines",
    "soars", "sings",  "flows", "grows", "hits",     "stays"};

const std::vector<std::string> kAdverbs = {
    "really", "truly",  "quite",   "rather", "fairly", "somewhat", "slightly",
    "mostly", "largely", "simply", "clearly", "deeply", "highly",  "oddly",
    "barely", "nearly", "almost",  "mainly", "partly", "merely"};

const std::vector<std::string> kHedgeAdverbs = {"somewhat", "slightly", "fairly", "rather",
                                                "partly",   "merely",   "barely", "mostly"};

enum Family { kPos, kNeg, kNeu, kNoun, kVerb, kAdv, kFamilies };

const std::vector<std::string>& family_words(int f) {
  switch (f) {
    case kPos: return kPositive;
    case kNeg: return kNegative;
    case kNeu: return kHedge;
    case kNoun: return kNouns;
    case kVerb: return kVerbs;
    default: return kAdverbs;
  }
}

Pos family_pos(int f) {
  switch (f) {
    case kPos:
    case kNeg:
    case kNeu: return Pos::Adjective;
    case kNoun: return Pos::Noun;
    case kVerb: return Pos::Verb;
    default: return Pos::Adverb;
  }
}

template <typename T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
  return v[d(rng)];
}

std::vector<std::string> sample_others(const std::vector<std::string>& pool, const std::string& self,
                                       std::size_t n, std::mt19937_64& rng) {
  std::vector<std::string> others;
  for (const auto& w : pool)
    if (w != self) others.push_back(w);
  std::shuffle(others.begin(), others.end(), rng);
  others.resize(std::min(n, others.size()));
  return others;
}

}  // namespace

ClassifierHandle World::victim() const { return make_builtin_softmax(weights, bias); }

World make_world(const WorldOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  World world;

  // Victim weights over (negative, positive, neutral).
  world.bias = Eigen::Vector3d(0.0, 0.0, 0.3);
  for (int f = 0; f < kFamilies; ++f) {
    for (const auto& w : family_words(f)) {
      world.words.push_back(w);
      world.tagger.add(w, family_pos(f));
      Eigen::Vector3d row = Eigen::Vector3d::Zero();
      switch (f) {
        case kPos: row(1) = uniform(1.2, 2.6); break;
        case kNeg: row(0) = uniform(1.2, 2.6); break;
        case kNeu: row(2) = uniform(0.8, 2.2); break;
        case kAdv:
          if (std::find(kHedgeAdverbs.begin(), kHedgeAdverbs.end(), w) != kHedgeAdverbs.end())
            row(2) = uniform(0.2, 0.8);
          break;
        default:
          for (int c = 0; c < 3; ++c) row(c) = 0.1 * gauss(rng);
      }
      world.weights.emplace(w, row);
    }
  }

  // Thesaurus: same-family synonyms plus a few cross-family substitutes.
  for (int f = 0; f < kFamilies; ++f) {
    const Pos pos = family_pos(f);
    for (const auto& w : family_words(f)) {
      std::vector<std::string> cands;
      auto add = [&](const std::vector<std::string>& more) {
        cands.insert(cands.end(), more.begin(), more.end());
      };
      switch (f) {
        case kPos:
          add(sample_others(kPositive, w, 5, rng));
          add(sample_others(kHedge, w, 1, rng));
          if (unit(rng) < 0.3) add(sample_others(kNegative, w, 1, rng));
          break;
        case kNeg:
          add(sample_others(kNegative, w, 5, rng));
          add(sample_others(kHedge, w, 1, rng));
          if (unit(rng) < 0.3) add(sample_others(kPositive, w, 1, rng));
          break;
        case kNeu:
          add(sample_others(kHedge, w, 5, rng));
          if (unit(rng) < 0.5) add(sample_others(kPositive, w, 1, rng));
          else add(sample_others(kNegative, w, 1, rng));
          break;
        case kNoun: add(sample_others(kNouns, w, 4, rng)); break;
        case kVerb: add(sample_others(kVerbs, w, 4, rng)); break;
        default: add(sample_others(kAdverbs, w, 3, rng)); break;
      }
      world.lexicon.add(w, pos, cands);
    }
  }

  // Embeddings: family centres around a shared adjective direction, so
  // antonyms stay close the way distributional vectors do.
  const auto dim = static_cast<Eigen::Index>(options.embedding_dim);
  auto random_vec = [&](double scale) {
    Eigen::VectorXd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = scale * gauss(rng);
    return v;
  };
  const Eigen::VectorXd adjective_axis = random_vec(1.0);
  std::vector<Eigen::VectorXd> centres;
  for (int f = 0; f < kFamilies; ++f) {
    Eigen::VectorXd c = random_vec(1.0);
    if (family_pos(f) == Pos::Adjective) c = adjective_axis + 0.6 * c;
    centres.push_back(c);
  }
  EmbeddingTable::Matrix vectors(static_cast<Eigen::Index>(world.words.size()), dim);
  {
    Eigen::Index row = 0;
    for (int f = 0; f < kFamilies; ++f)
      for (std::size_t i = 0; i < family_words(f).size(); ++i)
        vectors.row(row++) = (centres[static_cast<std::size_t>(f)] + random_vec(0.6)).transpose();
  }
  world.embeddings = EmbeddingTable(world.words, vectors);

  // Dataset.
  auto victim = world.victim();
  auto adjective = [&](int label) -> const std::string& {
    // Mostly on-label adjectives with some off-label noise.
    int f = label == 0 ? kNeg : label == 1 ? kPos : kNeu;
    if (unit(rng) < 0.2) f = static_cast<int>(unit(rng) * 3.0);
    return pick(family_words(f), rng);
  };
  for (std::size_t s = 0; s < options.samples; ++s) {
    const int label = static_cast<int>(s % 3);
    std::string text;
    const int clauses = 2 + static_cast<int>(unit(rng) * 3.0);
    for (int c = 0; c < clauses; ++c) {
      std::string clause;
      switch (static_cast<int>(unit(rng) * 4.0)) {
        case 0:
          clause = "the " + pick(kNouns, rng) + " " + pick(kVerbs, rng) + " " + pick(kAdverbs, rng) +
                   " " + adjective(label);
          break;
        case 1: clause = "a " + adjective(label) + " " + pick(kNouns, rng); break;
        case 2:
          clause = adjective(label) + " " + pick(kNouns, rng) + " and " + adjective(label) + " " +
                   pick(kNouns, rng);
          break;
        default: clause = "it " + pick(kVerbs, rng) + " " + adjective(label); break;
      }
      if (!text.empty()) text += unit(rng) < 0.5 ? ", " : " and ";
      text += clause;
    }
    text.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(text.front())));
    text += ".";

    int gold = victim->classify(text).label();
    if (unit(rng) < options.mislabeled) gold = (gold + 1 + static_cast<int>(unit(rng) * 2.0)) % 3;
    world.dataset.push_back({"toy-" + std::to_string(s), text, gold});
  }
  return world;
}

void write_world(const World& world, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw Error(ErrorKind::IoError, "cannot write " + (dir / name).string());
    f.precision(17);
    return f;
  };

  {
    auto f = open("thesaurus.tsv");
    for (const auto& [key, cands] : world.lexicon.entries()) {
      f << key.first << '\t' << to_string(key.second) << '\t';
      for (std::size_t i = 0; i < cands.size(); ++i) f << (i ? "," : "") << cands[i];
      f << '\n';
    }
  }
  {
    auto f = open("pos.tsv");
    for (const auto& w : world.words) f << w << '\t' << to_string(*world.tagger.lookup(w)) << '\n';
  }
  {
    auto f = open("embeddings.txt");
    for (std::size_t i = 0; i < world.embeddings.size(); ++i) {
      f << world.embeddings.words()[i];
      const auto row = world.embeddings.vectors().row(static_cast<Eigen::Index>(i));
      for (Eigen::Index j = 0; j < row.size(); ++j) f << ' ' << row(j);
      f << '\n';
    }
  }
  {
    auto f = open("victim.weights");
    f << "__bias__";
    for (Eigen::Index c = 0; c < world.bias.size(); ++c) f << ' ' << world.bias(c);
    f << '\n';
    for (const auto& w : world.words) {
      const auto& row = world.weights.at(w);
      f << w;
      for (Eigen::Index c = 0; c < row.size(); ++c) f << ' ' << row(c);
      f << '\n';
    }
  }
  {
    auto f = open("dataset.jsonl");
    for (const auto& s : world.dataset)
      f << nlohmann::json{{"id", s.id}, {"text", s.text}, {"label", s.label}}.dump() << '\n';
  }
}

}  // namespace tampers::toy
