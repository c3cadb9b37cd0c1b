#include "catch_amalgamated.hpp"

#include <atomic>
#include <fstream>
#include <thread>

#include "fet/enrichment.hpp"
#include "fet/enrichment_backends.hpp"
#include "fet/error.hpp"
#include "fet/io.hpp"
#include "support.hpp"

#include "httplib.h"

using namespace fet;

namespace {

class FixedRetriever final : public CorpusRetriever {
 public:
  explicit FixedRetriever(std::vector<std::string> docs) : docs_(std::move(docs)) {}
  std::vector<std::string> retrieve(const std::string&, std::size_t k) const override {
    return {docs_.begin(), docs_.begin() + static_cast<long>(std::min(k, docs_.size()))};
  }

 private:
  std::vector<std::string> docs_;
};

class ThrowingRetriever final : public CorpusRetriever {
 public:
  std::vector<std::string> retrieve(const std::string&, std::size_t) const override {
    throw std::runtime_error("search is down");
  }
};

class ConstantQA final : public QAExtractor {
 public:
  explicit ConstantQA(std::string a) : a_(std::move(a)) {}
  std::optional<std::string> answer(const std::string& q, const std::string& ctx) const override {
    questions.push_back(q);
    if (ctx.find(a_) == std::string::npos) return std::nullopt;
    return a_;
  }
  mutable std::vector<std::string> questions;

 private:
  std::string a_;
};

// Answers with the first word of the sentence.
class FirstWordQA final : public QAExtractor {
 public:
  std::optional<std::string> answer(const std::string&, const std::string& ctx) const override {
    return ctx.substr(0, ctx.find(' '));
  }
};

class PassThroughExpander final : public InstanceExpander {
 public:
  explicit PassThroughExpander(std::vector<std::string> extra) : extra_(std::move(extra)) {}
  std::vector<std::string> expand(const std::vector<std::string>& seeds, const CorpusRetriever&,
                                  std::size_t target) const override {
    auto out = seeds;
    for (const auto& e : extra_) out.push_back(e);
    if (out.size() > target) out.resize(target);
    return out;
  }

 private:
  std::vector<std::string> extra_;
};

class FixedMiner final : public TopicMiner {
 public:
  explicit FixedMiner(std::vector<std::string> t) : t_(std::move(t)) {}
  std::vector<std::string> mine(const std::string&, const std::vector<std::string>&, std::size_t k) const override {
    auto out = t_;
    if (out.size() > k) out.resize(k);
    return out;
  }

 private:
  std::vector<std::string> t_;
};

}  // namespace

TEST_CASE("qa query template", "[enrichment]") {
  CHECK(build_qa_query("artist", "x") == "[CLS]What is the instance of artist in this sentence?[SEP]x[SEP]");
  CHECK(build_qa_query("movie", "Lepa Shandy was a Nigerian Yoruba movie.") ==
        "[CLS]What is the instance of movie in this sentence?[SEP]Lepa Shandy was a Nigerian Yoruba movie.[SEP]");
  CHECK_THROWS_AS(build_qa_query("", "x"), InvalidArgument);
}

TEST_CASE("sentence splitting", "[enrichment]") {
  CHECK(split_sentences("A b. C d!\nE f? 3.5 g") == std::vector<std::string>{"A b.", "C d!", "E f?", "3.5 g"});
}

TEST_CASE("collect seeds deduplicates answers", "[enrichment]") {
  const auto onto = TypeOntology::from_paths({"/movie"});
  FixedRetriever docs({"Lepa Shandy was a Nigerian Yoruba movie. Lepa Shandy made money.",
                       "Later, Lepa Shandy was remade."});
  ConstantQA qa("Lepa Shandy");
  CHECK(collect_seeds("/movie", onto, docs, qa, 3) == std::vector<std::string>{"Lepa Shandy"});
  REQUIRE_FALSE(qa.questions.empty());
  CHECK(qa.questions.front() ==
        "[CLS]What is the instance of movie in this sentence?[SEP]Lepa Shandy was a Nigerian Yoruba movie.[SEP]");
}

TEST_CASE("collect seeds stops at n and handles empty retrieval", "[enrichment]") {
  const auto onto = TypeOntology::from_paths({"/movie"});
  FixedRetriever five({"Alpha x. Beta x. Gamma x. Delta x. Epsilon x."});
  FirstWordQA qa;
  CHECK(collect_seeds("/movie", onto, five, qa, 3) == std::vector<std::string>{"Alpha", "Beta", "Gamma"});

  FixedRetriever none({});
  CHECK(collect_seeds("/movie", onto, none, qa, 3).empty());
  CHECK_THROWS_AS(collect_seeds("/movie", onto, none, qa, 0), InvalidArgument);
}

TEST_CASE("enrichment passes stub lists through", "[enrichment]") {
  const auto onto = TypeOntology::from_paths({"/artist"});
  FixedRetriever docs({"Leonardo Da Vinci was a painter."});
  ConstantQA qa("Leonardo Da Vinci");
  PassThroughExpander expander({"Michelangelo", "Raphael"});
  FixedMiner miner({"creativity", "art history", "style"});
  const auto report = enrich_ontology(onto, docs, qa, expander, miner);
  CHECK(report.failures.empty());
  CHECK(report.enrichment.instances("/artist") ==
        std::vector<std::string>{"Leonardo Da Vinci", "Michelangelo", "Raphael"});
  CHECK(report.enrichment.topics("/artist") == std::vector<std::string>{"creativity", "art history", "style"});
}

TEST_CASE("expansion short of the target keeps what exists", "[enrichment]") {
  const auto onto = TypeOntology::from_paths({"/artist"});
  FixedRetriever docs({"Leonardo Da Vinci was a painter."});
  ConstantQA qa("Leonardo Da Vinci");
  std::vector<std::string> extra;
  for (int i = 0; i < 11; ++i) extra.push_back("Painter " + std::to_string(i));
  PassThroughExpander expander(extra);
  FixedMiner miner({"art"});
  EnrichOptions opts;
  opts.instances_per_type = 30;
  const auto report = enrich_ontology(onto, docs, qa, expander, miner, opts);
  CHECK(report.enrichment.instances("/artist").size() == 12);
}

TEST_CASE("a failing backend is recorded per node", "[enrichment]") {
  const auto onto = TypeOntology::from_paths({"/a", "/b"});
  ThrowingRetriever broken;
  ConstantQA qa("X");
  PassThroughExpander expander({});
  FixedMiner miner({"t"});
  const auto report = enrich_ontology(onto, broken, qa, expander, miner);
  // Both the topic and the instance step of each node lose their documents.
  REQUIRE(report.failures.size() == 4);
  CHECK(report.failures[0].path == "/a");
  CHECK(report.failures[3].path == "/b");
  CHECK(report.failures[0].message.find("search is down") != std::string::npos);
  CHECK(report.enrichment.topics("/a").empty());
  CHECK(report.enrichment.instances("/a").empty());
}

TEST_CASE("heuristic qa picks the copular subject", "[enrichment][backends]") {
  HeuristicQAExtractor qa;
  const std::string ctx = "In Lagos, Lepa Shandy was a Nigerian Yoruba movie.";
  CHECK(qa.answer(build_qa_query("movie", ctx), ctx) == std::optional<std::string>("Lepa Shandy"));
  const std::string no_copula = "Yesterday the Oakland Athletics won.";
  CHECK(qa.answer(build_qa_query("team", no_copula), no_copula) == std::optional<std::string>("Yesterday"));
  const std::string lower = "nothing here at all";
  CHECK_FALSE(qa.answer(build_qa_query("team", lower), lower).has_value());
}

TEST_CASE("in-memory retriever ranks by tf-idf", "[enrichment][backends]") {
  InMemoryCorpusRetriever r({"cats and dogs", "the painter paints a painter", "a painter sleeps"});
  CHECK(r.retrieve("painter", 5) == std::vector<std::string>{"the painter paints a painter", "a painter sleeps"});
  CHECK(r.retrieve("painter", 1).size() == 1);
  CHECK(r.retrieve("the", 5).empty());
}

TEST_CASE("embedding expander follows cosine similarity", "[enrichment][backends]") {
  EmbeddingInstanceExpander ex({{"a", {1, 0}}, {"b", {0.9, 0.1}}, {"c", {0, 1}}, {"d", {0.95, 0.05}}});
  FixedRetriever unused({});
  CHECK(ex.expand({"a"}, unused, 3) == std::vector<std::string>{"a", "d", "b"});
  CHECK(ex.expand({"a", "zz"}, unused, 1) == std::vector<std::string>{"a"});
  CHECK(ex.expand({"zz"}, unused, 3) == std::vector<std::string>{"zz"});

  const auto dir = testing::fresh_dir("embeddings");
  io::write_text_file(dir / "e.tsv", "x\t1 0\ny\t0 1\n");
  CHECK(EmbeddingInstanceExpander::load(dir / "e.tsv").expand({"x"}, unused, 2).size() == 2);
  io::write_text_file(dir / "bad.tsv", "x 1 0\n");
  CHECK_THROWS_AS(EmbeddingInstanceExpander::load(dir / "bad.tsv"), ParseError);
}

TEST_CASE("tf-idf topic miner drops the query and stopwords", "[enrichment][backends]") {
  const auto bg = text::BackgroundTable::from_documents(std::vector<std::string>{"the art of war", "a style guide"});
  TfidfTopicMiner miner(bg);
  const auto topics = miner.mine("artist", {"The artist studied art history and creativity.",
                                            "Her style changed art history."}, 3);
  REQUIRE(topics.size() == 3);
  CHECK(topics.front() == "art history");
  CHECK(std::find(topics.begin(), topics.end(), "artist") == topics.end());
}

TEST_CASE("search service retriever speaks the _search protocol", "[enrichment][backends]") {
  httplib::Server server;
  std::string seen_body;
  server.Post("/wiki/_search", [&](const httplib::Request& req, httplib::Response& res) {
    seen_body = req.body;
    const auto q = io::Json::parse(req.body);
    io::Json hits = io::Json::array();
    for (int i = 0; i < q["size"].get<int>(); ++i) {
      hits.push_back({{"_source", {{"text", "doc " + std::to_string(i)}}}});
    }
    res.set_content(io::Json{{"hits", {{"hits", hits}}}}.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  SearchServiceRetriever r("http://127.0.0.1:" + std::to_string(port), "wiki");
  const auto docs = r.retrieve("artist", 2);
  server.stop();
  t.join();

  CHECK(docs == std::vector<std::string>{"doc 0", "doc 1"});
  const auto body = io::Json::parse(seen_body);
  CHECK(body["query"]["match"]["text"] == "artist");
  CHECK(body["size"] == 2);

  SearchServiceRetriever dead("http://127.0.0.1:1", "wiki");
  CHECK_THROWS_AS(dead.retrieve("x", 1), BackendError);
}
