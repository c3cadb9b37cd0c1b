// Command-line entry point for the typing pipeline.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fet/error.hpp"
#include "fet/pipeline.hpp"
#include "fet/synthetic.hpp"

namespace {

struct Overrides {
  std::string config;
  std::vector<std::string> sets;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> tau, alpha, beta, lr, threshold;
  std::optional<std::size_t> max_tokens, samples_per_instance, epochs, keywords;
  bool ce_loss = false, include_siblings = false, flat = false, no_topics = false;
};

fet::PipelineConfig make_config(const Overrides& o) {
  auto config = o.config.empty() ? fet::PipelineConfig{} : fet::PipelineConfig::load(o.config);
  auto set = [&](const std::string& key, const auto& value) {
    if (value) config.set(key, fet::io::Json(*value).dump());
  };
  set("seed", o.seed);
  set("generation.tau", o.tau);
  set("generation.alpha", o.alpha);
  set("generation.beta", o.beta);
  set("generation.max_tokens", o.max_tokens);
  set("generation.samples_per_instance", o.samples_per_instance);
  set("train.epochs", o.epochs);
  set("train.learning_rate", o.lr);
  set("inference.threshold", o.threshold);
  set("inference.keywords", o.keywords);
  if (o.ce_loss) config.set("ablation.ce_loss", "true");
  if (o.include_siblings) config.set("ablation.include_siblings", "true");
  if (o.flat) config.set("ablation.flat_inference", "true");
  if (o.no_topics) config.set("ablation.no_topics", "true");
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw fet::InvalidArgument("--set expects key=value, got '" + kv + "'");
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!o.out_dir.empty()) {
    auto& f = config.files;
    for (auto* file : {&f.samples, &f.nli, &f.model, &f.loss_trace, &f.predictions, &f.evaluation, &f.error_report}) {
      *file = (std::filesystem::path(o.out_dir) / std::filesystem::path(*file).filename()).string();
    }
  }
  return config;
}

void print(const fet::StageResult& r) {
  std::cout << fet::io::Json{{"stage", r.stage}, {"summary", r.summary}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-shot fine-grained entity typing pipeline"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("-c,--config", o.config, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--set", o.sets, "Override a config key, e.g. --set generation.alpha=3");
  app.add_option("--out", o.out_dir, "Directory for all generated artifacts (relative to the config)");
  app.add_option("--seed", o.seed, "Global seed");
  app.add_option("--tau", o.tau, "Decoding temperature");
  app.add_option("--alpha", o.alpha, "Reward for instance tokens not yet emitted");
  app.add_option("--beta", o.beta, "Penalty for tokens already emitted");
  app.add_option("--max-tokens", o.max_tokens, "Maximum generated sentence length");
  app.add_option("--samples-per-instance", o.samples_per_instance, "Candidate sentences per instance");
  app.add_option("--epochs", o.epochs, "Training epochs");
  app.add_option("--lr", o.lr, "Learning rate");
  app.add_flag("--ce-loss", o.ce_loss, "Train with cross-entropy instead of GCE");
  app.add_flag("--include-siblings", o.include_siblings, "Use sibling types as contradiction hypotheses");
  app.add_option("--threshold", o.threshold, "Entailment probability needed to descend");
  app.add_flag("--flat", o.flat, "Score every type at once instead of coarse-to-fine");
  app.add_flag("--no-topics", o.no_topics, "Disable the topic branch in training and inference");
  app.add_option("--keywords", o.keywords, "Context keywords used as topics at inference");

  for (const char* stage : {"enrich", "generate", "build-nli", "train", "infer", "evaluate", "report"}) {
    app.add_subcommand(stage, std::string("Run the ") + stage + " stage");
  }
  auto* pipeline = app.add_subcommand("pipeline", "Run the configured stages in order");
  auto* synth = app.add_subcommand("synth", "Write the synthetic benchmark fixture");
  std::string synth_dir;
  std::uint64_t synth_seed = fet::SyntheticOptions{}.seed;
  synth->add_option("dir", synth_dir, "Output directory")->required();
  synth->add_option("--fixture-seed", synth_seed, "Seed for the fixture generator");
  std::size_t root_instances = fet::SyntheticOptions{}.train_instances_per_root;
  synth->add_option("--root-instances", root_instances, "Training instances per root type");
  std::size_t topics = fet::SyntheticOptions{}.topics_per_type;
  synth->add_option("--topics", topics, "Enriched topics per type");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      fet::SyntheticOptions options;
      options.seed = synth_seed;
      options.train_instances_per_root = root_instances;
      options.topics_per_type = topics;
      fet::write_synthetic_fixture(fet::make_synthetic_fixture(options), synth_dir);
      std::cout << "wrote synthetic fixture to " << synth_dir << "\n";
      return EXIT_SUCCESS;
    }
    const auto config = make_config(o);
    if (pipeline->parsed()) {
      for (const auto& r : fet::run_pipeline(config)) print(r);
    } else {
      print(fet::run_stage(app.get_subcommands().front()->get_name(), config));
    }
  } catch (const fet::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return EXIT_FAILURE;
  }
  return EXIT_SUCCESS;
}
