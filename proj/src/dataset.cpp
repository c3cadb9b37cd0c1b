#include "fet/dataset.hpp"

#include "fet/io.hpp"

namespace fet {

std::vector<DatasetRecord> load_dataset(const std::filesystem::path& file) {
  std::vector<DatasetRecord> records;
  io::read_jsonl_file(file, [&](const io::Json& rec, std::size_t line) {
    DatasetRecord r;
    r.id = rec.at("id").is_string() ? rec.at("id").get<std::string>() : rec.at("id").dump();
    r.mention.context = rec.at("context").get<std::string>();
    r.mention.surface = rec.at("mention").get<std::string>();
    const auto span = rec.at("span").get<std::vector<std::size_t>>();
    if (span.size() != 2) throw ParseError("line " + std::to_string(line) + ": span must be [begin, end]");
    r.mention.span_begin = span[0];
    r.mention.span_end = span[1];
    try {
      r.mention.validate();
    } catch (const InvalidArgument& e) {
      throw ParseError("line " + std::to_string(line) + ": " + e.what());
    }
    r.types = rec.at("types").get<std::vector<std::string>>();
    records.push_back(std::move(r));
  });
  return records;
}

void write_dataset(std::ostream& out, const std::vector<DatasetRecord>& records) {
  for (const auto& r : records) {
    io::write_jsonl_record(out, io::Json{{"id", r.id},
                                         {"context", r.mention.context},
                                         {"mention", r.mention.surface},
                                         {"span", {r.mention.span_begin, r.mention.span_end}},
                                         {"types", r.types}});
  }
}

void save_dataset(const std::filesystem::path& file, const std::vector<DatasetRecord>& records) {
  auto out = io::open_output(file);
  write_dataset(out, records);
}

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& file) {
  std::vector<PredictionRecord> records;
  io::read_jsonl_file(file, [&](const io::Json& rec, std::size_t line) {
    PredictionRecord r;
    r.id = rec.at("id").is_string() ? rec.at("id").get<std::string>() : rec.at("id").dump();
    r.prediction.path = rec.at("path").get<std::string>();
    for (const auto& ls : rec.value("level_scores", io::Json::array())) {
      r.prediction.level_scores.emplace_back(ls.at(0).get<std::string>(), ls.at(1).get<double>());
    }
    const auto mode = rec.value("mode", std::string("coarse_to_fine"));
    if (mode == "coarse_to_fine") {
      r.prediction.mode = InferenceMode::CoarseToFine;
    } else if (mode == "flat") {
      r.prediction.mode = InferenceMode::Flat;
    } else {
      throw ParseError("line " + std::to_string(line) + ": unknown mode '" + mode + "'");
    }
    records.push_back(std::move(r));
  });
  return records;
}

void write_predictions(std::ostream& out, const std::vector<PredictionRecord>& records) {
  for (const auto& r : records) {
    io::Json scores = io::Json::array();
    for (const auto& [path, score] : r.prediction.level_scores) scores.push_back({path, score});
    io::write_jsonl_record(out, io::Json{{"id", r.id},
                                         {"path", r.prediction.path},
                                         {"level_scores", scores},
                                         {"mode", to_string(r.prediction.mode)}});
  }
}

void save_predictions(const std::filesystem::path& file, const std::vector<PredictionRecord>& records) {
  auto out = io::open_output(file);
  write_predictions(out, records);
}

}  // namespace fet
