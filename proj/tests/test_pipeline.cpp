#include "catch_amalgamated.hpp"

#include <fstream>
#include <sstream>

#include "fet/dataset.hpp"
#include "fet/error.hpp"
#include "fet/io.hpp"
#include "fet/pipeline.hpp"
#include "fet/synthetic.hpp"
#include "support.hpp"

using namespace fet;

namespace {

DatasetRecord record(const std::string& id, const std::string& ctx, const std::string& surface,
                     std::vector<std::string> types) {
  const auto at = ctx.find(surface);
  return {id, {ctx, surface, at, at + surface.size()}, std::move(types)};
}

PredictionRecord prediction(const std::string& id, const std::string& path) {
  PredictionRecord p;
  p.id = id;
  p.prediction.path = path;
  return p;
}

TypeOntology small_tree() {
  return TypeOntology::from_paths({"/person", "/person/artist", "/location", "/location/city", "/product",
                                   "/product/food", "/organization", "/organization/company"});
}

}  // namespace

TEST_CASE("config defaults and overrides", "[pipeline][config]") {
  const auto defaults = PipelineConfig::from_json(io::Json::object(), "/tmp");
  CHECK(defaults.enrich.instances_per_type == 30);
  CHECK(defaults.enrich.topics_per_type == 5);
  CHECK(defaults.train.epochs == 10);
  CHECK(defaults.train.learning_rate == 1e-5);
  CHECK(defaults.generation.samples_per_instance == 1);
  CHECK(defaults.model.q == 0.7);
  CHECK(defaults.nli.contradiction_topics == TopicSource::Hypothesis);

  auto cfg = PipelineConfig::from_json(io::Json::parse(R"({"seed": 5, "generation": {"alpha": 3}})"), "/data");
  CHECK(cfg.seed == 5);
  CHECK(cfg.generation.alpha == 3.0);
  CHECK(cfg.generation.seed == 5);
  CHECK(cfg.train.seed == 5);
  CHECK(cfg.resolve("x.jsonl") == std::filesystem::path("/data/x.jsonl"));
  CHECK(cfg.resolve("/abs/y") == std::filesystem::path("/abs/y"));

  cfg.set("files.model", "m.json");
  cfg.set("ablation.flat_inference", "true");
  cfg.set("nli.contradiction_topics", "source");
  cfg.set("files.samples", "123");
  CHECK(cfg.files.model == "m.json");
  CHECK(cfg.ablation.flat_inference);
  CHECK(cfg.nli.contradiction_topics == TopicSource::Source);
  CHECK(cfg.files.samples == "123");
  CHECK_THROWS_AS(cfg.set("nli.bogus", "1"), InvalidArgument);
  CHECK_THROWS_AS(PipelineConfig::from_json(io::Json::parse(R"({"bogus": 1})"), "."), InvalidArgument);
  CHECK_THROWS_AS(PipelineConfig::from_json(io::Json::parse(R"({"inference": {"threshold": 1.5}})"), "."),
                  InvalidArgument);
}

TEST_CASE("config json round trip and digest", "[pipeline][config]") {
  auto cfg = PipelineConfig::from_json(io::Json::object(), "/a");
  cfg.set("generation.tau", "0.8");
  const auto again = PipelineConfig::from_json(cfg.to_json(), "/b");
  CHECK(again.to_json() == cfg.to_json());
  CHECK(again.digest() == cfg.digest());
  cfg.set("generation.tau", "0.9");
  CHECK(again.digest() != cfg.digest());
}

TEST_CASE("evaluation against gold", "[pipeline][evaluate]") {
  const auto onto = small_tree();
  const std::vector<DatasetRecord> data = {record("1", "Ann painted .", "Ann", {"/person", "/person/artist"}),
                                           record("2", "Lima grew .", "Lima", {"/location", "/location/city"})};
  const auto exact = evaluate_predictions(data, {prediction("1", "/person/artist"), prediction("2", "/location/city")}, onto);
  CHECK(exact.metrics.strict_accuracy == 1.0);
  CHECK(exact.metrics.macro_f1 == 1.0);

  const auto coarse = evaluate_predictions(data, {prediction("1", "/person"), prediction("2", "/location/city")}, onto);
  CHECK(coarse.metrics.strict_accuracy == 0.5);
  CHECK(coarse.metrics.macro_precision == 1.0);
  CHECK(coarse.metrics.macro_recall == 0.75);

  const auto missing = evaluate_predictions(data, {prediction("2", "/location/city")}, onto);
  CHECK(missing.pairs[0].predicted.empty());
  CHECK(missing.metrics.macro_precision == 0.5);
}

TEST_CASE("unmapped gold types are left out of strict accuracy", "[pipeline][evaluate]") {
  const auto onto = small_tree();
  const std::vector<DatasetRecord> data = {record("1", "Pho is good .", "Pho", {"/other", "/other/food"}),
                                           record("2", "Ann sang .", "Ann", {"/person"})};
  const auto e = evaluate_predictions(data, {prediction("1", "/product/food"), prediction("2", "/person")}, onto);
  CHECK(e.unmapped_gold == std::vector<std::string>{"/other", "/other/food"});
  CHECK(e.strict_mentions == 1);
  CHECK(e.metrics.strict_accuracy == 1.0);
  CHECK(e.metrics.macro_recall == 0.5);
}

TEST_CASE("error categories", "[pipeline][report]") {
  const auto onto = small_tree();
  CHECK(classify_error({"/location", "/location/city"}, "/location", onto) == ErrorCategory::IncorrectFineGrained);
  CHECK(classify_error({"/other", "/other/food"}, "/product", onto) == ErrorCategory::Debatable);
  CHECK(classify_error({"/person"}, "/person/artist", onto) == ErrorCategory::Debatable);
  CHECK(classify_error({"/person"}, "/organization/company", onto) == ErrorCategory::Other);
  CHECK(to_string(ErrorCategory::Other) == "other");
}

TEST_CASE("nesting heuristic", "[pipeline][report]") {
  CHECK(possibly_nested(record("1", "He flew to New York City yesterday", "York", {}).mention));
  CHECK_FALSE(possibly_nested(record("1", "He flew to New York City yesterday", "New York City", {}).mention));
  CHECK_FALSE(possibly_nested(record("1", "the city of Lima, Peru", "Lima", {}).mention));
}

TEST_CASE("error report buckets", "[pipeline][report]") {
  const auto onto = small_tree();
  std::vector<EvalPair> pairs = {{{"/location", "/location/city"}, {"/location"}},
                                 {{"/person"}, {"/organization", "/organization/company"}},
                                 {{"/person"}, {"/person"}}};
  std::vector<TypePrediction> preds(3);
  preds[0].path = "/location";
  preds[1].path = "/organization/company";
  preds[2].path = "/person";
  const std::vector<std::string> ids = {"a", "b", "c"};
  const auto r = error_report(pairs, preds, onto, ids);
  CHECK(r.errors == 2);
  CHECK(r.buckets.at(ErrorCategory::IncorrectFineGrained).count == 1);
  CHECK(r.buckets.at(ErrorCategory::IncorrectFineGrained).exemplars == std::vector<std::string>{"a"});
  CHECK(r.buckets.at(ErrorCategory::Other).count == 1);
  const auto j = to_json(r);
  CHECK(j.contains("possible_nesting"));
}

TEST_CASE("dataset and prediction files round trip", "[pipeline][io]") {
  const auto dir = testing::fresh_dir("dataset");
  const std::vector<DatasetRecord> data = {record("m1", "Ann painted .", "Ann", {"/person/artist"})};
  save_dataset(dir / "d.jsonl", data);
  const auto back = load_dataset(dir / "d.jsonl");
  REQUIRE(back.size() == 1);
  CHECK(back[0].mention.span_end == 3);
  CHECK(back[0].types == data[0].types);

  io::write_text_file(dir / "bad.jsonl", R"({"id": "x", "context": "abc", "mention": "zz", "span": [0, 2], "types": []})" "\n");
  CHECK_THROWS_AS(load_dataset(dir / "bad.jsonl"), ParseError);

  PredictionRecord p = prediction("m1", "/person/artist");
  p.prediction.level_scores = {{"/person", 0.9}, {"/person/artist", 0.75}};
  save_predictions(dir / "p.jsonl", {p});
  const auto pb = load_predictions(dir / "p.jsonl");
  REQUIRE(pb.size() == 1);
  CHECK(pb[0].prediction.level_scores == p.prediction.level_scores);
  CHECK(pb[0].prediction.mode == InferenceMode::CoarseToFine);
}

TEST_CASE("synthetic fixture shape", "[pipeline][synthetic]") {
  const auto fx = make_synthetic_fixture();
  CHECK(fx.ontology.roots().size() == 3);
  for (const auto& r : fx.ontology.roots()) CHECK(fx.ontology.children(r).size() == 3);
  CHECK(fx.test.size() == 180);
  for (const auto& rec : fx.test) {
    rec.mention.validate();
    CHECK(rec.types.size() == 2);
  }
  for (const auto& n : fx.ontology.nodes()) {
    CHECK_FALSE(fx.enrichment.instances(n.path).empty());
    CHECK(fx.enrichment.topics(n.path).size() == 5);
  }
  // Test mentions never reuse a training instance.
  std::set<std::string> train;
  for (const auto& [_, list] : fx.enrichment.all_instances()) train.insert(list.begin(), list.end());
  for (const auto& rec : fx.test) CHECK_FALSE(train.count(rec.mention.surface));
}

TEST_CASE("pipeline stages on the synthetic fixture", "[pipeline][e2e]") {
  const auto dir = testing::fresh_dir("pipeline");
  write_synthetic_fixture(make_synthetic_fixture(), dir);
  const auto cfg = PipelineConfig::load(dir / "config.json");
  const auto results = run_pipeline(cfg);
  REQUIRE(results.size() == 6);
  CHECK(results[0].stage == "generate");
  CHECK(results[0].summary["kept"].get<std::size_t>() > 0);

  // Every stage leaves a manifest next to its primary output.
  for (const auto& r : results) {
    const auto manifest = r.outputs.front().string() + ".manifest.json";
    REQUIRE(std::filesystem::exists(manifest));
    const auto m = io::Json::parse(io::read_text_file(manifest));
    CHECK(m["stage"] == r.stage);
    CHECK(m["config_sha256"] == cfg.digest());
    for (const auto& [name, digest] : m["outputs"].items()) {
      if (std::filesystem::is_regular_file(cfg.resolve(name))) CHECK(digest == io::file_sha256_hex(cfg.resolve(name)));
    }
  }

  // The trained model prefers the true type for most held-out mentions.
  const auto model = EntailmentModel::load(cfg.resolve(cfg.files.model));
  const auto test = load_dataset(cfg.resolve(cfg.files.dataset));
  const auto onto = TypeOntology::load(cfg.resolve(cfg.files.ontology));
  const auto bg = text::BackgroundTable::load(cfg.resolve(cfg.files.background));
  ModelScorer scorer(model);
  std::size_t confident = 0, leaf_best = 0;
  for (const auto& rec : test) {
    const auto& leaf = rec.types.back();
    const auto kw = extract_keywords(rec.mention.context, 5, bg);
    const auto hyp = render_hypothesis(rec.mention.surface, onto.node(leaf).name);
    confident += scorer.entailment(rec.mention.context, hyp, kw) > 0.5;
    const auto scores = score_children(scorer, onto, rec.mention, onto.siblings(leaf), kw);
    const double own = scorer.entailment(rec.mention.context, hyp, kw);
    bool best = true;
    for (const auto& [_, s] : scores) best = best && own > s;
    leaf_best += best;
  }
  CHECK(confident >= test.size() * 8 / 10);
  CHECK(leaf_best >= test.size() * 8 / 10);

  const auto eval = io::Json::parse(io::read_text_file(cfg.resolve(cfg.files.evaluation)));
  CHECK(eval["strict_accuracy"].get<double>() >= 0.8);
}

TEST_CASE("stages report missing inputs", "[pipeline]") {
  const auto dir = testing::fresh_dir("missing");
  const auto cfg = PipelineConfig::from_json(io::Json::object(), dir);
  CHECK_THROWS_AS(run_train(cfg), Error);
  CHECK_THROWS_AS(run_stage("nope", cfg), InvalidArgument);
}
