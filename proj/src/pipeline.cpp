#include "fet/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "fet/enrichment_backends.hpp"
#include "fet/language_models.hpp"
#include "fet/text.hpp"

namespace fet {

// ---------------------------------------------------------------------------
// Configuration

io::Json PipelineConfig::to_json() const {
  return io::Json{
      {"seed", seed},
      {"files",
       {{"ontology", files.ontology},
        {"enrichment", files.enrichment},
        {"corpus_dir", files.corpus_dir},
        {"embeddings", files.embeddings},
        {"background", files.background},
        {"lm_corpus", files.lm_corpus},
        {"samples", files.samples},
        {"nli", files.nli},
        {"model", files.model},
        {"loss_trace", files.loss_trace},
        {"dataset", files.dataset},
        {"predictions", files.predictions},
        {"evaluation", files.evaluation},
        {"error_report", files.error_report}}},
      {"backends",
       {{"search_endpoint", search_endpoint},
        {"search_index", search_index},
        {"lm_endpoint", lm_endpoint},
        {"lm_style", lm_style},
        {"lm_smoothing", lm_smoothing}}},
      {"enrich",
       {{"instances_per_type", enrich.instances_per_type},
        {"topics_per_type", enrich.topics_per_type},
        {"docs_per_type", enrich.docs_per_type},
        {"seeds_per_type", enrich.seeds_per_type},
        {"max_answer_tokens", enrich.max_answer_tokens}}},
      {"generation",
       {{"tau", generation.tau},
        {"alpha", generation.alpha},
        {"beta", generation.beta},
        {"max_tokens", generation.max_tokens},
        {"samples_per_instance", generation.samples_per_instance}}},
      {"nli",
       {{"n_neutral", nli.n_neutral},
        {"n_contradiction", nli.n_contradiction},
        {"contradiction_topics", to_string(nli.contradiction_topics)}}},
      {"model",
       {{"dimension", model.dimension},
        {"buckets", model.buckets},
        {"q", model.q},
        {"use_projection", model.use_projection},
        {"init_scale", model.init_scale},
        {"embedding_scale", model.embedding_scale}}},
      {"train",
       {{"epochs", train.epochs},
        {"learning_rate", train.learning_rate},
        {"batch_size", train.batch_size},
        {"train_encoder", train.train_encoder}}},
      {"inference", {{"threshold", inference.threshold}, {"keywords", inference.keywords}}},
      {"ablation",
       {{"no_topics", ablation.no_topics},
        {"flat_inference", ablation.flat_inference},
        {"ce_loss", ablation.ce_loss},
        {"include_siblings", ablation.include_siblings}}},
      {"pipeline", {{"stages", pipeline_stages}}},
  };
}

namespace {

void check_known_keys(const io::Json& given, const io::Json& known, const std::string& prefix) {
  if (!given.is_object()) throw InvalidArgument("config: '" + prefix + "' must be an object");
  for (const auto& [key, value] : given.items()) {
    const auto name = prefix.empty() ? key : prefix + "." + key;
    if (!known.contains(key)) throw InvalidArgument("config: unknown key '" + name + "'");
    if (known[key].is_object()) check_known_keys(value, known[key], name);
  }
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const io::Json& j, const std::filesystem::path& base_dir) {
  PipelineConfig c;
  io::Json merged = c.to_json();
  check_known_keys(j, merged, "");
  merged.merge_patch(j);
  try {
    c.base_dir = base_dir;
    c.seed = merged.at("seed").get<std::uint64_t>();
    const auto& f = merged.at("files");
    c.files.ontology = f.at("ontology").get<std::string>();
    c.files.enrichment = f.at("enrichment").get<std::string>();
    c.files.corpus_dir = f.at("corpus_dir").get<std::string>();
    c.files.embeddings = f.at("embeddings").get<std::string>();
    c.files.background = f.at("background").get<std::string>();
    c.files.lm_corpus = f.at("lm_corpus").get<std::string>();
    c.files.samples = f.at("samples").get<std::string>();
    c.files.nli = f.at("nli").get<std::string>();
    c.files.model = f.at("model").get<std::string>();
    c.files.loss_trace = f.at("loss_trace").get<std::string>();
    c.files.dataset = f.at("dataset").get<std::string>();
    c.files.predictions = f.at("predictions").get<std::string>();
    c.files.evaluation = f.at("evaluation").get<std::string>();
    c.files.error_report = f.at("error_report").get<std::string>();
    const auto& b = merged.at("backends");
    c.search_endpoint = b.at("search_endpoint").get<std::string>();
    c.search_index = b.at("search_index").get<std::string>();
    c.lm_endpoint = b.at("lm_endpoint").get<std::string>();
    c.lm_style = b.at("lm_style").get<std::string>();
    c.lm_smoothing = b.at("lm_smoothing").get<double>();
    const auto& e = merged.at("enrich");
    c.enrich.instances_per_type = e.at("instances_per_type").get<std::size_t>();
    c.enrich.topics_per_type = e.at("topics_per_type").get<std::size_t>();
    c.enrich.docs_per_type = e.at("docs_per_type").get<std::size_t>();
    c.enrich.seeds_per_type = e.at("seeds_per_type").get<std::size_t>();
    c.enrich.max_answer_tokens = e.at("max_answer_tokens").get<std::size_t>();
    const auto& g = merged.at("generation");
    c.generation.tau = g.at("tau").get<double>();
    c.generation.alpha = g.at("alpha").get<double>();
    c.generation.beta = g.at("beta").get<double>();
    c.generation.max_tokens = g.at("max_tokens").get<std::size_t>();
    c.generation.samples_per_instance = g.at("samples_per_instance").get<std::size_t>();
    const auto& n = merged.at("nli");
    c.nli.n_neutral = n.at("n_neutral").get<std::size_t>();
    c.nli.n_contradiction = n.at("n_contradiction").get<std::size_t>();
    c.nli.contradiction_topics = parse_topic_source(n.at("contradiction_topics").get<std::string>());
    const auto& m = merged.at("model");
    c.model.dimension = m.at("dimension").get<std::size_t>();
    c.model.buckets = m.at("buckets").get<std::size_t>();
    c.model.q = m.at("q").get<double>();
    c.model.use_projection = m.at("use_projection").get<bool>();
    c.model.init_scale = m.at("init_scale").get<double>();
    c.model.embedding_scale = m.at("embedding_scale").get<double>();
    const auto& t = merged.at("train");
    c.train.epochs = t.at("epochs").get<std::size_t>();
    c.train.learning_rate = t.at("learning_rate").get<double>();
    c.train.batch_size = t.at("batch_size").get<std::size_t>();
    c.train.train_encoder = t.at("train_encoder").get<bool>();
    const auto& i = merged.at("inference");
    c.inference.threshold = i.at("threshold").get<double>();
    c.inference.keywords = i.at("keywords").get<std::size_t>();
    const auto& a = merged.at("ablation");
    c.ablation.no_topics = a.at("no_topics").get<bool>();
    c.ablation.flat_inference = a.at("flat_inference").get<bool>();
    c.ablation.ce_loss = a.at("ce_loss").get<bool>();
    c.ablation.include_siblings = a.at("include_siblings").get<bool>();
    c.pipeline_stages = merged.at("pipeline").at("stages").get<std::vector<std::string>>();
  } catch (const io::Json::exception& ex) {
    throw InvalidArgument(std::string("config: ") + ex.what());
  }
  c.generation.seed = c.seed;
  c.train.seed = c.seed;
  c.train.use_topics = !c.ablation.no_topics;
  c.inference.use_topics = !c.ablation.no_topics;
  c.generation.validate();
  c.train.validate();
  if (!(c.inference.threshold > 0.0 && c.inference.threshold < 1.0)) {
    throw InvalidArgument("config: inference.threshold must be in (0, 1)");
  }
  if (c.inference.keywords == 0) throw InvalidArgument("config: inference.keywords must be >= 1");
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& file) {
  io::Json j;
  try {
    j = io::Json::parse(io::read_text_file(file));
  } catch (const io::Json::parse_error& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
  return from_json(j, file.has_parent_path() ? file.parent_path() : std::filesystem::path("."));
}

void PipelineConfig::set(const std::string& dotted_key, const std::string& value) {
  io::Json parsed;
  try {
    parsed = io::Json::parse(value);
  } catch (const io::Json::parse_error&) {
    parsed = value;
  }
  io::Json patch = parsed;
  std::vector<std::string> parts;
  std::stringstream ss(dotted_key);
  for (std::string part; std::getline(ss, part, '.');) parts.push_back(part);
  if (parts.empty()) throw InvalidArgument("config: empty key");
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = io::Json{{*it, patch}};
  // Strings like "out/x.jsonl" parse as JSON errors, but numbers-as-strings for string
  // fields ("123") need to stay strings.
  io::Json current = to_json();
  const io::Json* slot = &current;
  for (const auto& p : parts) {
    if (!slot->is_object() || !slot->contains(p)) throw InvalidArgument("config: unknown key '" + dotted_key + "'");
    slot = &(*slot)[p];
  }
  if (slot->is_string() && !parsed.is_string()) {
    patch = value;
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = io::Json{{*it, patch}};
  }
  current.merge_patch(patch);
  *this = from_json(current, base_dir);
}

std::filesystem::path PipelineConfig::resolve(const std::string& file) const {
  const std::filesystem::path p(file);
  return p.is_absolute() ? p : base_dir / p;
}

std::string PipelineConfig::digest() const { return io::sha256_hex(to_json().dump()); }

// ---------------------------------------------------------------------------
// Stage plumbing

namespace {

std::string digest_of(const std::filesystem::path& p) {
  if (std::filesystem::is_directory(p)) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(p)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::string combined;
    for (const auto& f : files) {
      combined += std::filesystem::relative(f, p).generic_string() + '\0' + io::file_sha256_hex(f) + '\n';
    }
    return io::sha256_hex(combined);
  }
  return io::file_sha256_hex(p);
}

void require_input(const PipelineConfig& config, const std::string& file, const char* what) {
  if (file.empty()) throw Error(std::string("no ") + what + " file configured");
  if (!std::filesystem::exists(config.resolve(file))) {
    throw Error(std::string("missing ") + what + " input: " + config.resolve(file).string());
  }
}

/// Writes `<primary output>.manifest.json` with config digest, seed and file digests.
void write_manifest(const PipelineConfig& config, const std::string& stage, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
  io::Json in = io::Json::object();
  for (const auto& f : inputs) in[f] = digest_of(config.resolve(f));
  io::Json out = io::Json::object();
  for (const auto& f : outputs) out[f] = digest_of(config.resolve(f));
  const io::Json manifest{{"stage", stage},
                          {"config_sha256", config.digest()},
                          {"seed", config.seed},
                          {"inputs", in},
                          {"outputs", out}};
  io::write_text_file(config.resolve(outputs.front() + ".manifest.json"), manifest.dump(2) + "\n");
}

StageResult finish(const PipelineConfig& config, const std::string& stage, const std::vector<std::string>& inputs,
                   const std::vector<std::string>& outputs, io::Json summary) {
  write_manifest(config, stage, inputs, outputs);
  StageResult r{stage, std::move(summary), {}};
  for (const auto& o : outputs) r.outputs.push_back(config.resolve(o));
  return r;
}

double mean(std::span<const double> xs) {
  return xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace

StageResult run_enrich(const PipelineConfig& config) {
  require_input(config, config.files.ontology, "ontology");
  require_input(config, config.files.background, "background");
  std::vector<std::string> inputs{config.files.ontology, config.files.background};
  const auto ontology = TypeOntology::load(config.resolve(config.files.ontology));

  std::unique_ptr<CorpusRetriever> retriever;
  if (!config.search_endpoint.empty()) {
    retriever = std::make_unique<SearchServiceRetriever>(config.search_endpoint, config.search_index);
  } else {
    require_input(config, config.files.corpus_dir, "corpus");
    inputs.push_back(config.files.corpus_dir);
    retriever = std::make_unique<InMemoryCorpusRetriever>(
        InMemoryCorpusRetriever::from_directory(config.resolve(config.files.corpus_dir)));
  }
  std::map<std::string, std::vector<double>> no_table;
  auto expander = config.files.embeddings.empty()
                      ? EmbeddingInstanceExpander(no_table)
                      : EmbeddingInstanceExpander::load(config.resolve(config.files.embeddings));
  if (!config.files.embeddings.empty()) inputs.push_back(config.files.embeddings);
  const TfidfTopicMiner miner(text::BackgroundTable::load(config.resolve(config.files.background)));
  const HeuristicQAExtractor qa;

  const auto report = enrich_ontology(ontology, *retriever, qa, expander, miner, config.enrich);
  report.enrichment.save(config.resolve(config.files.enrichment));

  io::Json failures = io::Json::array();
  for (const auto& f : report.failures) failures.push_back({{"path", f.path}, {"stage", f.stage}, {"error", f.message}});
  std::size_t topics = 0;
  for (const auto& [_, list] : report.enrichment.all_topics()) topics += list.size();
  return finish(config, "enrich", inputs, {config.files.enrichment},
                {{"nodes", ontology.size()},
                 {"instances", report.enrichment.instance_count()},
                 {"topics", topics},
                 {"failures", failures}});
}

StageResult run_generate(const PipelineConfig& config) {
  require_input(config, config.files.ontology, "ontology");
  require_input(config, config.files.enrichment, "enrichment");
  std::vector<std::string> inputs{config.files.ontology, config.files.enrichment};
  const auto ontology = TypeOntology::load(config.resolve(config.files.ontology));
  const auto enrichment = Enrichment::load(config.resolve(config.files.enrichment));

  std::unique_ptr<TokenLM> lm;
  TokenSet stops;
  if (!config.lm_endpoint.empty()) {
    lm = std::make_unique<RemoteTokenLM>(config.lm_endpoint, config.lm_style);
    for (const char* t : {"</s>", "<eos>", "<|endoftext|>"}) {
      if (auto id = lm->token_id(t)) stops.insert(*id);
    }
  } else {
    require_input(config, config.files.lm_corpus, "language-model corpus");
    inputs.push_back(config.files.lm_corpus);
    auto bigram = BigramLM::train_file(config.resolve(config.files.lm_corpus), config.lm_smoothing);
    stops.insert(bigram.end_token());
    lm = std::make_unique<BigramLM>(std::move(bigram));
  }

  const auto report = generate_training_corpus(ontology, enrichment, *lm, config.generation, stops);
  save_samples(config.resolve(config.files.samples), report.samples);

  std::vector<double> lps;
  for (const auto& s : report.samples) lps.push_back(s.mean_log_prob);
  io::Json failures = io::Json::array();
  for (const auto& f : report.failures) {
    failures.push_back({{"path", f.type_path}, {"instance", f.instance}, {"error", f.message}});
  }
  std::map<std::string, std::size_t> per_type;
  for (const auto& s : report.samples) ++per_type[s.type_path];
  return finish(config, "generate", inputs, {config.files.samples},
                {{"pairs", enrichment.instance_count()},
                 {"candidates", report.candidates},
                 {"kept", report.samples.size()},
                 {"per_type", per_type},
                 {"mean_log_prob", mean(lps)},
                 {"failures", failures}});
}

StageResult run_build_nli(const PipelineConfig& config) {
  for (const auto* f : {&config.files.samples, &config.files.ontology, &config.files.enrichment}) {
    require_input(config, *f, "build-nli");
  }
  const auto ontology = TypeOntology::load(config.resolve(config.files.ontology));
  const auto enrichment = Enrichment::load(config.resolve(config.files.enrichment));
  const auto samples = load_samples(config.resolve(config.files.samples));
  const auto examples = build_examples(samples, ontology, enrichment, config.nli, config.ablation.include_siblings,
                                       config.seed ^ 0x9e3779b97f4a7c15ULL);
  save_examples(config.resolve(config.files.nli), examples);
  std::map<std::string, std::size_t> labels;
  for (const auto& ex : examples) ++labels[std::string(to_string(ex.label))];
  return finish(config, "build-nli", {config.files.samples, config.files.ontology, config.files.enrichment},
                {config.files.nli}, {{"samples", samples.size()}, {"examples", examples.size()}, {"labels", labels}});
}

StageResult run_train(const PipelineConfig& config) {
  require_input(config, config.files.nli, "NLI dataset");
  const auto examples = load_examples(config.resolve(config.files.nli));
  auto model = EntailmentModel::initialize(config.model, config.seed);
  const auto mode = config.ablation.ce_loss ? LossMode::CE : LossMode::GCE;
  auto result = train(std::move(model), examples, config.train, mode);
  result.model.save(config.resolve(config.files.model));
  save_loss_trace(config.resolve(config.files.loss_trace), result.loss_trace);
  return finish(config, "train", {config.files.nli}, {config.files.model, config.files.loss_trace},
                {{"examples", examples.size()},
                 {"epochs", config.train.epochs},
                 {"loss", mode == LossMode::GCE ? "gce" : "ce"},
                 {"loss_trace", result.loss_trace}});
}

StageResult run_infer(const PipelineConfig& config) {
  for (const auto* f : {&config.files.model, &config.files.ontology, &config.files.dataset, &config.files.background}) {
    require_input(config, *f, "infer");
  }
  const auto model = EntailmentModel::load(config.resolve(config.files.model));
  const auto ontology = TypeOntology::load(config.resolve(config.files.ontology));
  const auto dataset = load_dataset(config.resolve(config.files.dataset));
  const auto background = text::BackgroundTable::load(config.resolve(config.files.background));
  const ModelScorer scorer(model, config.inference.use_topics);

  std::vector<PredictionRecord> predictions;
  std::map<std::size_t, std::size_t> by_depth;
  for (const auto& rec : dataset) {
    auto pred = config.ablation.flat_inference
                    ? type_mention_flat(scorer, ontology, rec.mention, background, config.inference)
                    : type_mention(scorer, ontology, rec.mention, background, config.inference);
    ++by_depth[ontology.depth(pred.path)];
    predictions.push_back({rec.id, std::move(pred)});
  }
  save_predictions(config.resolve(config.files.predictions), predictions);
  io::Json depths = io::Json::object();
  for (const auto& [d, n] : by_depth) depths[std::to_string(d)] = n;
  return finish(config, "infer",
                {config.files.model, config.files.ontology, config.files.dataset, config.files.background},
                {config.files.predictions},
                {{"mentions", predictions.size()},
                 {"mode", config.ablation.flat_inference ? "flat" : "coarse_to_fine"},
                 {"topics", config.inference.use_topics},
                 {"predicted_depths", depths}});
}

StageResult run_evaluate(const PipelineConfig& config) {
  for (const auto* f : {&config.files.dataset, &config.files.predictions, &config.files.ontology}) {
    require_input(config, *f, "evaluate");
  }
  const auto ontology = TypeOntology::load(config.resolve(config.files.ontology));
  const auto eval = evaluate_predictions(load_dataset(config.resolve(config.files.dataset)),
                                         load_predictions(config.resolve(config.files.predictions)), ontology);
  io::Json summary = to_json(eval.metrics);
  summary["mentions"] = eval.mentions;
  summary["strict_accuracy_mentions"] = eval.strict_mentions;
  summary["unmapped_gold"] = {{"count", eval.unmapped_gold.size()}, {"types", eval.unmapped_gold}};
  io::write_text_file(config.resolve(config.files.evaluation), summary.dump(2) + "\n");

  std::ostringstream text;
  char line[160];
  std::snprintf(line, sizeof(line), "mentions          %zu\n", eval.mentions);
  text << line;
  std::snprintf(line, sizeof(line), "strict accuracy   %.4f\n", eval.metrics.strict_accuracy);
  text << line;
  std::snprintf(line, sizeof(line), "macro P/R/F1      %.4f %.4f %.4f\n", eval.metrics.macro_precision,
                eval.metrics.macro_recall, eval.metrics.macro_f1);
  text << line;
  std::snprintf(line, sizeof(line), "micro P/R/F1      %.4f %.4f %.4f\n", eval.metrics.micro_precision,
                eval.metrics.micro_recall, eval.metrics.micro_f1);
  text << line;
  std::snprintf(line, sizeof(line), "unmapped gold     %zu\n", eval.unmapped_gold.size());
  text << line;
  const auto text_file = config.files.evaluation + ".txt";
  io::write_text_file(config.resolve(text_file), text.str());
  return finish(config, "evaluate", {config.files.dataset, config.files.predictions, config.files.ontology},
                {config.files.evaluation, text_file}, summary);
}

StageResult run_report(const PipelineConfig& config) {
  for (const auto* f : {&config.files.dataset, &config.files.predictions, &config.files.ontology}) {
    require_input(config, *f, "report");
  }
  const auto ontology = TypeOntology::load(config.resolve(config.files.ontology));
  const auto dataset = load_dataset(config.resolve(config.files.dataset));
  const auto predictions = load_predictions(config.resolve(config.files.predictions));
  const auto eval = evaluate_predictions(dataset, predictions, ontology);

  std::unordered_map<std::string, const TypePrediction*> by_id;
  for (const auto& p : predictions) by_id[p.id] = &p.prediction;
  std::vector<EvalPair> pairs;
  std::vector<TypePrediction> preds;
  std::vector<std::string> ids;
  std::vector<Mention> mentions;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto it = by_id.find(dataset[i].id);
    if (it == by_id.end()) continue;
    pairs.push_back(eval.pairs[i]);
    preds.push_back(*it->second);
    ids.push_back(dataset[i].id);
    mentions.push_back(dataset[i].mention);
  }
  const auto report = error_report(pairs, preds, ontology, ids, mentions);
  const auto summary = to_json(report);
  io::write_text_file(config.resolve(config.files.error_report), summary.dump(2) + "\n");
  return finish(config, "report", {config.files.dataset, config.files.predictions, config.files.ontology},
                {config.files.error_report}, summary);
}

StageResult run_stage(const std::string& stage, const PipelineConfig& config) {
  if (stage == "enrich") return run_enrich(config);
  if (stage == "generate") return run_generate(config);
  if (stage == "build-nli") return run_build_nli(config);
  if (stage == "train") return run_train(config);
  if (stage == "infer") return run_infer(config);
  if (stage == "evaluate") return run_evaluate(config);
  if (stage == "report") return run_report(config);
  throw InvalidArgument("unknown stage '" + stage + "'");
}

std::vector<StageResult> run_pipeline(const PipelineConfig& config) {
  std::vector<StageResult> results;
  for (const auto& stage : config.pipeline_stages) results.push_back(run_stage(stage, config));
  return results;
}

// ---------------------------------------------------------------------------
// Evaluation and error analysis

Evaluation evaluate_predictions(const std::vector<DatasetRecord>& dataset,
                                const std::vector<PredictionRecord>& predictions, const TypeOntology& ontology) {
  if (dataset.empty()) throw InvalidArgument("evaluate: empty dataset");
  std::unordered_map<std::string, std::string> normalized_nodes;
  for (const auto& n : ontology.nodes()) normalized_nodes.emplace(normalize_path(n.path), n.path);
  std::unordered_map<std::string, const TypePrediction*> by_id;
  for (const auto& p : predictions) by_id[p.id] = &p.prediction;

  Evaluation eval;
  eval.mentions = dataset.size();
  std::set<std::string> unmapped;
  std::size_t strict_correct = 0;
  for (const auto& rec : dataset) {
    EvalPair pair;
    for (const auto& g : rec.types) pair.gold.insert(normalize_path(g));
    if (const auto it = by_id.find(rec.id); it != by_id.end()) {
      const auto& path = it->second->path;
      if (ontology.contains(path)) {
        for (const auto& p : ontology.lineage(path)) pair.predicted.insert(normalize_path(p));
      } else {
        const auto norm = normalize_path(path);
        for (std::size_t pos = norm.find('/', 1); pos != std::string::npos; pos = norm.find('/', pos + 1)) {
          pair.predicted.insert(norm.substr(0, pos));
        }
        if (!norm.empty()) pair.predicted.insert(norm);
      }
    }
    TypeSet mapped;
    for (const auto& g : pair.gold) {
      if (normalized_nodes.contains(g)) {
        mapped.insert(g);
      } else {
        unmapped.insert(g);
      }
    }
    if (!mapped.empty()) {
      ++eval.strict_mentions;
      strict_correct += mapped == pair.predicted ? 1 : 0;
    }
    eval.pairs.push_back(std::move(pair));
  }
  eval.metrics = evaluate(eval.pairs);
  if (!unmapped.empty()) {
    eval.metrics.strict_accuracy =
        eval.strict_mentions > 0 ? static_cast<double>(strict_correct) / static_cast<double>(eval.strict_mentions) : 0.0;
  }
  eval.unmapped_gold.assign(unmapped.begin(), unmapped.end());
  return eval;
}

std::string_view to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::IncorrectFineGrained: return "incorrect_fine_grained";
    case ErrorCategory::Debatable: return "debatable";
    case ErrorCategory::Other: return "other";
  }
  return "other";
}

ErrorCategory classify_error(const TypeSet& gold, const std::string& predicted_path, const TypeOntology& ontology) {
  const auto pred = normalize_path(predicted_path);
  std::vector<std::string> gold_norm;
  for (const auto& g : gold) gold_norm.push_back(normalize_path(g));
  for (const auto& g : gold_norm) {
    if (is_proper_ancestor_path(pred, g)) return ErrorCategory::IncorrectFineGrained;
  }
  for (const auto& g : gold_norm) {
    if (is_proper_ancestor_path(g, pred)) return ErrorCategory::Debatable;
  }
  std::set<std::string> known;
  for (const auto& n : ontology.nodes()) known.insert(normalize_path(n.path));
  for (const auto& g : gold_norm) {
    if (known.contains(g)) continue;
    const auto name = type_name_from_path(g);
    std::vector<std::string> same_name;
    for (const auto& n : ontology.nodes()) {
      if (n.name == name || type_name_from_path(n.path) == name) same_name.push_back(normalize_path(n.path));
    }
    if (same_name.size() != 1) continue;
    const auto& refined = same_name.front();
    if (refined == pred || is_proper_ancestor_path(pred, refined) || is_proper_ancestor_path(refined, pred)) {
      return ErrorCategory::Debatable;
    }
  }
  return ErrorCategory::Other;
}

bool possibly_nested(const Mention& mention) {
  const auto& ctx = mention.context;
  std::size_t i = 0;
  while (i < ctx.size()) {
    while (i < ctx.size() && std::isspace(static_cast<unsigned char>(ctx[i]))) ++i;
    if (i >= ctx.size()) break;
    if (!std::isupper(static_cast<unsigned char>(ctx[i]))) {
      while (i < ctx.size() && !std::isspace(static_cast<unsigned char>(ctx[i]))) ++i;
      continue;
    }
    // Extend a run of capitalized words separated by single spaces.
    const std::size_t run_begin = i;
    std::size_t run_end = i;
    while (true) {
      while (run_end < ctx.size() && !std::isspace(static_cast<unsigned char>(ctx[run_end]))) ++run_end;
      // A word ending in punctuation closes the run ("Lima, Peru").
      if (std::ispunct(static_cast<unsigned char>(ctx[run_end - 1]))) break;
      if (run_end + 1 < ctx.size() && ctx[run_end] == ' ' && std::isupper(static_cast<unsigned char>(ctx[run_end + 1]))) {
        ++run_end;
        continue;
      }
      break;
    }
    // Trailing punctuation is not part of the run.
    std::size_t trimmed_end = run_end;
    while (trimmed_end > run_begin && std::ispunct(static_cast<unsigned char>(ctx[trimmed_end - 1]))) --trimmed_end;
    if (run_begin <= mention.span_begin && mention.span_end <= trimmed_end &&
        trimmed_end - run_begin > mention.span_end - mention.span_begin) {
      return true;
    }
    i = run_end;
  }
  return false;
}

ErrorReport error_report(std::span<const EvalPair> pairs, std::span<const TypePrediction> predictions,
                         const TypeOntology& ontology, std::span<const std::string> ids,
                         std::span<const Mention> mentions, std::size_t max_exemplars) {
  if (pairs.size() != predictions.size() || (!ids.empty() && ids.size() != pairs.size()) ||
      (!mentions.empty() && mentions.size() != pairs.size())) {
    throw InvalidArgument("error_report: inputs are not aligned");
  }
  ErrorReport report;
  for (auto c : {ErrorCategory::IncorrectFineGrained, ErrorCategory::Debatable, ErrorCategory::Other}) {
    report.buckets[c] = {};
  }
  auto add = [&](ErrorBucket& bucket, std::size_t i) {
    ++bucket.count;
    if (bucket.exemplars.size() < max_exemplars) bucket.exemplars.push_back(ids.empty() ? std::to_string(i) : ids[i]);
  };
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto pair = normalized(pairs[i]);
    if (pair.gold == pair.predicted) continue;
    ++report.errors;
    add(report.buckets[classify_error(pair.gold, predictions[i].path, ontology)], i);
    if (!mentions.empty() && possibly_nested(mentions[i])) add(report.possible_nesting, i);
  }
  return report;
}

io::Json to_json(const MetricsReport& r) {
  return io::Json{{"strict_accuracy", r.strict_accuracy},
                  {"macro", {{"precision", r.macro_precision}, {"recall", r.macro_recall}, {"f1", r.macro_f1}}},
                  {"micro", {{"precision", r.micro_precision}, {"recall", r.micro_recall}, {"f1", r.micro_f1}}}};
}

io::Json to_json(const ErrorReport& r) {
  io::Json j{{"errors", r.errors}};
  for (const auto& [category, bucket] : r.buckets) {
    j[std::string(to_string(category))] = {{"count", bucket.count}, {"exemplars", bucket.exemplars}};
  }
  j["possible_nesting"] = {{"count", r.possible_nesting.count}, {"exemplars", r.possible_nesting.exemplars}};
  return j;
}

}  // namespace fet
