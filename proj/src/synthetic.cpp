#include "fet/synthetic.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "fet/enrichment_backends.hpp"
#include "fet/error.hpp"
#include "fet/io.hpp"
#include "fet/text.hpp"

namespace fet {

namespace {

struct TypeSpec {
  const char* path;
  std::vector<std::string> keywords;
};

// Keyword pools are pairwise disjoint and contain no stopwords.
const std::vector<TypeSpec>& type_specs() {
  static const std::vector<TypeSpec> specs = {
      {"/person", {"born", "childhood", "married", "biography", "personal", "grew", "hometown", "parents", "memoir", "nickname", "lifelong", "youth"}},
      {"/person/artist", {"painted", "gallery", "canvas", "sculpture", "exhibition", "portrait", "studio", "brushwork", "mural", "curator", "sketches", "watercolor"}},
      {"/person/athlete", {"scored", "stadium", "league", "coach", "playoff", "trophy", "medal", "tournament", "sprint", "defender", "championship", "goals"}},
      {"/person/politician", {"elected", "senate", "campaign", "ballot", "parliament", "minister", "legislation", "voters", "cabinet", "governor", "caucus", "referendum"}},
      {"/organization", {"founded", "headquartered", "members", "chairman", "board", "staff", "charter", "annual", "subsidiary", "committee", "organized", "merger"}},
      {"/organization/company", {"shares", "revenue", "profits", "shareholders", "quarterly", "products", "startup", "investors", "earnings", "retail", "acquisition", "brand"}},
      {"/organization/sports_team", {"roster", "franchise", "squad", "fixtures", "relegation", "kits", "mascot", "derby", "lineup", "promotion", "supporters", "transfers"}},
      {"/organization/university", {"campus", "faculty", "undergraduate", "professors", "tuition", "lectures", "alumni", "dormitory", "syllabus", "graduates", "semester", "scholarship"}},
      {"/location", {"located", "region", "situated", "north", "south", "territory", "nearby", "area", "border", "coastal", "latitude", "province"}},
      {"/location/city", {"downtown", "mayor", "suburbs", "skyline", "boroughs", "commuters", "municipal", "streets", "metro", "neighborhoods", "tram", "plaza"}},
      {"/location/country", {"nation", "sovereign", "constitution", "currency", "independence", "monarchy", "embassy", "citizens", "anthem", "republic", "passport", "nationwide"}},
      {"/location/river", {"flows", "tributary", "banks", "upstream", "downstream", "estuary", "delta", "floods", "meanders", "riverbed", "watershed", "rapids"}},
  };
  return specs;
}

const std::vector<std::string>& syllables() {
  static const std::vector<std::string> s = {"va", "ro", "ke", "li", "zan", "mo", "tor", "bel", "qui", "dra", "sel",
                                             "nu", "fen", "ga", "shi", "pol", "ter", "wyn", "dex", "ul", "ari", "bo",
                                             "cor", "ine", "jas", "mik", "ola", "pre", "rud", "sta", "vik", "yel"};
  return s;
}

class NameFactory {
 public:
  explicit NameFactory(std::mt19937_64& rng) : rng_(rng) {}

  std::string next() {
    // Name words are never shared between instances, so no two instances overlap.
    return fresh(2) + " " + fresh(3);
  }

 private:
  std::string fresh(std::size_t max_syllables) {
    for (;;) {
      auto w = word(max_syllables);
      if (used_.insert(w).second) return w;
    }
  }

  std::string word(std::size_t max_syllables) {
    std::uniform_int_distribution<std::size_t> pick(0, syllables().size() - 1);
    std::uniform_int_distribution<std::size_t> count(2, max_syllables);
    std::string w;
    for (std::size_t i = count(rng_); i > 0; --i) w += syllables()[pick(rng_)];
    w[0] = static_cast<char>(w[0] - 'a' + 'A');
    return w;
  }

  std::mt19937_64& rng_;
  std::set<std::string> used_;
};

std::vector<std::string> draw(const std::vector<std::string>& pool, std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(pool[pick(rng)]);
  return out;
}

/// `n` keywords of which `shared` come from `shared_pools` (one pool drawn per word) and the
/// rest from `own`, shuffled.
std::vector<std::string> mixed_words(const std::vector<std::string>& own,
                                     const std::vector<const std::vector<std::string>*>& shared_pools,
                                     std::size_t n, std::size_t shared, std::mt19937_64& rng) {
  auto words = draw(own, n - shared, rng);
  std::uniform_int_distribution<std::size_t> pick_pool(0, shared_pools.empty() ? 0 : shared_pools.size() - 1);
  for (std::size_t i = 0; i < shared && !shared_pools.empty(); ++i) {
    words.push_back(draw(*shared_pools[pick_pool(rng)], 1, rng).front());
  }
  std::shuffle(words.begin(), words.end(), rng);
  return words;
}

/// Inserts the words of `name` at `position` (clamped) and joins with spaces.
std::string sentence_with(std::vector<std::string> words, const std::string& name, std::size_t position) {
  position = std::min(position, words.size());
  words.insert(words.begin() + static_cast<std::ptrdiff_t>(position), name);
  return text::join(words, " ");
}

}  // namespace

SyntheticFixture make_synthetic_fixture(const SyntheticOptions& options) {
  std::mt19937_64 rng(options.seed);
  NameFactory names(rng);
  const auto& specs = type_specs();

  std::vector<std::string> paths;
  for (const auto& s : specs) paths.emplace_back(s.path);
  SyntheticFixture fx{TypeOntology::from_paths(paths), {}, {}, {}, {}};

  std::map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < specs.size(); ++i) index_of[specs[i].path] = i;
  auto pool_of = [&](const std::string& path) { return &specs[index_of.at(path)].keywords; };

  // A root type's contexts mix its own keywords with those of its children, as
  // a generic instance of the root may be any of its subtypes. A leaf's training
  // contexts use only its own keywords; its test contexts add root keywords.
  auto training_words = [&](std::size_t i, std::size_t n) {
    std::vector<const std::vector<std::string>*> children;
    for (const auto& c : fx.ontology.children(specs[i].path)) children.push_back(pool_of(c));
    return mixed_words(specs[i].keywords, children, n, children.empty() ? 0 : n / 2, rng);
  };
  auto test_words = [&](std::size_t i, std::size_t n) {
    return mixed_words(specs[i].keywords, {pool_of(fx.ontology.root_of(specs[i].path))}, n, n / 2, rng);
  };

  std::uniform_int_distribution<std::size_t> length(6, 10);
  std::map<std::string, std::vector<std::string>> sentences_of;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& path = specs[i].path;
    const bool leaf = fx.ontology.children(path).empty();
    const auto count = leaf ? options.train_instances_per_leaf : options.train_instances_per_root;
    for (std::size_t k = 0; k < count; ++k) {
      const auto name = names.next();
      fx.enrichment.add_instance(path, name);
      for (std::size_t s = 0; s < options.lm_sentences_per_instance; ++s) {
        // Encyclopedic style: the sentence opens with its subject.
        fx.lm_corpus.push_back(text::to_lower(sentence_with(training_words(i, length(rng)), name, 0)));
        sentences_of[path].push_back(fx.lm_corpus.back());
      }
    }
  }

  // Topics are mined from each type's own sentences, as the enrich stage would.
  const TfidfTopicMiner miner(text::BackgroundTable::from_documents(fx.lm_corpus));
  for (const auto& [path, sentences] : sentences_of) {
    for (const auto& topic : miner.mine(fx.ontology.node(path).name, sentences, options.topics_per_type)) {
      fx.enrichment.add_topic(path, topic);
    }
  }

  std::size_t id = 0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (!fx.ontology.children(specs[i].path).empty()) continue;
    for (std::size_t m = 0; m < options.test_mentions_per_leaf; ++m) {
      const auto name = names.next();
      auto words = test_words(i, length(rng));
      std::uniform_int_distribution<std::size_t> pos(0, words.size());
      const auto at = std::min(pos(rng), words.size());
      std::string prefix = text::join(std::vector<std::string>(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(at)), " ");
      std::string suffix = text::join(std::vector<std::string>(words.begin() + static_cast<std::ptrdiff_t>(at), words.end()), " ");
      std::string context = prefix.empty() ? "" : prefix + " ";
      const auto begin = context.size();
      context += name;
      const auto end = context.size();
      if (!suffix.empty()) context += " " + suffix;
      context += ".";
      if (begin > 0) context[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(context[0])));

      DatasetRecord rec;
      rec.id = "syn-" + std::to_string(id++);
      rec.mention = Mention{context, name, begin, end};
      rec.types = fx.ontology.lineage(specs[i].path);
      fx.test.push_back(std::move(rec));
    }
  }

  fx.background = fx.lm_corpus;
  return fx;
}

void write_synthetic_fixture(const SyntheticFixture& fixture, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "corpus");
  fixture.ontology.save(dir / "ontology.jsonl");
  fixture.enrichment.save(dir / "enrichment.jsonl");
  save_dataset(dir / "test.jsonl", fixture.test);

  std::string lm;
  for (const auto& s : fixture.lm_corpus) lm += s + "\n";
  io::write_text_file(dir / "lm_corpus.txt", lm);

  {
    auto out = io::open_output(dir / "background.tsv");
    text::BackgroundTable::from_documents(fixture.background).write(out);
  }

  // Retrieval corpus: one document per type with "<Name> is a <type> ..." sentences,
  // so the enrich stage can rediscover instances and topics.
  for (const auto& node : fixture.ontology.nodes()) {
    std::string doc;
    const auto& topics = fixture.enrichment.topics(node.path);
    for (const auto& inst : fixture.enrichment.instances(node.path)) {
      doc += inst + " is a " + node.name + " known for " + text::join(topics, " and ") + ".\n";
    }
    auto file = node.path.substr(1);
    std::replace(file.begin(), file.end(), '/', '_');
    io::write_text_file(dir / "corpus" / (file + ".txt"), doc);
  }

  const io::Json config{
      {"seed", 13},
      {"backends", {{"lm_smoothing", 1e-6}}},
      {"generation", {{"alpha", 5.0}, {"samples_per_instance", 4}}},
      {"nli", {{"n_neutral", 0}, {"contradiction_topics", "source"}}},
      {"train", {{"learning_rate", 0.5}, {"batch_size", 1}}},
      {"ablation", {{"include_siblings", true}}},
  };
  io::write_text_file(dir / "config.json", config.dump(2) + "\n");
}

}  // namespace fet
