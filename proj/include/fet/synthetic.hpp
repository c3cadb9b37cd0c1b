#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fet/dataset.hpp"
#include "fet/ontology.hpp"

namespace fet {

struct SyntheticOptions {
  std::uint64_t seed = 2024;
  std::size_t train_instances_per_leaf = 15;
  std::size_t train_instances_per_root = 45;
  std::size_t lm_sentences_per_instance = 4;
  std::size_t test_mentions_per_leaf = 20;
  std::size_t topics_per_type = 5;
};

/// A small self-contained world: 3 root types with 3 children each, a
/// disjoint keyword pool per type, made-up instance names, a sentence corpus
/// for the toy language model and the retriever, and held-out test mentions
/// of the leaf types. Root sentences mix in keywords of the root's children;
/// test contexts mix leaf and root keywords.
struct SyntheticFixture {
  TypeOntology ontology;
  Enrichment enrichment;
  std::vector<std::string> lm_corpus;   // one lowercase sentence per entry
  std::vector<DatasetRecord> test;
  std::vector<std::string> background;  // documents for idf statistics
};

SyntheticFixture make_synthetic_fixture(const SyntheticOptions& options = {});

/// Writes ontology.jsonl, enrichment.jsonl, lm_corpus.txt, test.jsonl,
/// background.tsv, corpus/ (one document per type) and config.json into `dir`.
void write_synthetic_fixture(const SyntheticFixture& fixture, const std::filesystem::path& dir);

}  // namespace fet
