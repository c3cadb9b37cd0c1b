#include "fet/entailment_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "fet/io.hpp"
#include "fet/text.hpp"
#include "httplib.h"

namespace fet {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = normal(rng);
  }
  return m;
}

io::Json matrix_to_json(const Matrix& m) {
  io::Json rows = io::Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    io::Json row = io::Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const io::Json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j.at(0).size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw ParseError("checkpoint: ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

Vector sigmoid(const Vector& a) { return a.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); }); }

Vector softmax(const Vector& z) {
  const Vector shifted = (z.array() - z.maxCoeff()).exp();
  return shifted / shifted.sum();
}

}  // namespace

// ---------------------------------------------------------------------------

HashedBagEncoder::HashedBagEncoder(std::size_t dimension, std::size_t buckets, std::uint64_t seed,
                                   double init_scale) {
  if (dimension == 0 || buckets == 0) throw InvalidArgument("encoder dimension and buckets must be >= 1");
  std::mt19937_64 rng(seed);
  table_ = random_matrix(static_cast<Eigen::Index>(buckets), static_cast<Eigen::Index>(dimension),
                         init_scale, rng);
}

HashedBagEncoder::HashedBagEncoder(Matrix table) : table_(std::move(table)) {
  if (table_.rows() == 0 || table_.cols() == 0) throw InvalidArgument("encoder table is empty");
}

std::vector<std::size_t> HashedBagEncoder::features(std::string_view text) const {
  std::vector<std::vector<std::string>> segments;
  std::size_t start = 0;
  while (true) {
    const auto sep = text.find(kSeparator, start);
    segments.push_back(text::word_tokens(text.substr(start, sep == std::string_view::npos ? std::string_view::npos : sep - start)));
    if (sep == std::string_view::npos) break;
    start = sep + kSeparator.size();
  }
  const auto buckets = static_cast<std::uint64_t>(table_.rows());
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const std::string tag = std::to_string(s) + ":";
    for (const auto& tok : segments[s]) out.push_back(fnv1a(tag + tok) % buckets);
  }
  if (segments.size() >= 2) {
    const std::set<std::string> first(segments[0].begin(), segments[0].end());
    for (const auto& a : segments[0]) {
      if (text::is_stopword(a)) continue;
      for (const auto& b : segments[1]) {
        if (text::is_stopword(b) || first.contains(b)) continue;
        out.push_back(fnv1a("x:" + a + "|" + b) % buckets);
      }
    }
  }
  return out;
}

Vector HashedBagEncoder::pool(std::span<const std::size_t> features) const {
  Vector v = Vector::Zero(table_.cols());
  if (features.empty()) return v;
  for (auto f : features) v += table_.row(static_cast<Eigen::Index>(f)).transpose();
  return v / static_cast<double>(features.size());
}

Vector HashedBagEncoder::encode(std::string_view text) const { return pool(features(text)); }

std::unique_ptr<TextEncoder> HashedBagEncoder::clone() const {
  return std::make_unique<HashedBagEncoder>(*this);
}

RemoteTextEncoder::RemoteTextEncoder(std::string endpoint, std::size_t dimension)
    : endpoint_(std::move(endpoint)), dimension_(dimension) {
  if (dimension_ == 0) throw InvalidArgument("remote encoder dimension must be >= 1");
}

Vector RemoteTextEncoder::encode(std::string_view text) const {
  httplib::Client client(endpoint_);
  const io::Json body{{"text", std::string(text)}};
  auto res = client.Post("/encode", body.dump(), "application/json");
  if (!res || res->status != 200) throw BackendError("encode request to " + endpoint_ + " failed");
  std::vector<double> values;
  try {
    values = io::Json::parse(res->body).at("embedding").get<std::vector<double>>();
  } catch (const io::Json::exception& e) {
    throw BackendError(std::string("malformed encoder response: ") + e.what());
  }
  if (values.size() != dimension_) {
    throw BackendError("encoder returned dimension " + std::to_string(values.size()) + ", expected " +
                       std::to_string(dimension_));
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::unique_ptr<TextEncoder> RemoteTextEncoder::clone() const {
  return std::make_unique<RemoteTextEncoder>(*this);
}

// ---------------------------------------------------------------------------

Vector encode_context(const TextEncoder& encoder, std::string_view premise, std::string_view hypothesis) {
  if (text::trim(premise).empty() || text::trim(hypothesis).empty()) {
    throw InvalidArgument("encode_context: premise and hypothesis must be nonempty");
  }
  std::string joint(premise);
  joint += ' ';
  joint += kSeparator;
  joint += ' ';
  joint += hypothesis;
  return encoder.encode(joint);
}

Vector encode_topics(const TextEncoder& encoder, std::span<const std::string> topics) {
  if (topics.empty()) return Vector::Zero(static_cast<Eigen::Index>(encoder.dimension()));
  return encoder.encode(text::join(topics, kTopicDelimiter));
}

Vector gate_values(const Vector& context, const Vector& topics, const GatedFusionParams& params) {
  if (context.size() != topics.size() || params.gate_topic.cols() != topics.size() ||
      params.gate_context.cols() != context.size() || params.gate_topic.rows() != context.size() ||
      params.gate_context.rows() != context.size()) {
    throw InvalidArgument("gated_fuse: shape mismatch");
  }
  return sigmoid(params.gate_topic * topics + params.gate_context * context);
}

Vector gated_fuse(const Vector& context, const Vector& topics, const GatedFusionParams& params) {
  const Vector lambda = gate_values(context, topics, params);
  if (params.projection) {
    if (params.projection->rows() != context.size() || params.projection->cols() != topics.size()) {
      throw InvalidArgument("gated_fuse: projection shape mismatch");
    }
    return context + lambda.cwiseProduct(*params.projection * topics);
  }
  return context + lambda.cwiseProduct(topics);
}

double gce_loss(std::span<const double> probabilities, double q) {
  if (!(q > 0.0 && q <= 1.0)) throw InvalidArgument("gce_loss: q must be in (0, 1]");
  double total = 0.0;
  for (double p : probabilities) {
    if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("gce_loss: probabilities must lie in (0, 1]");
    total += (1.0 - std::pow(p, q)) / q;
  }
  return total;
}

double cross_entropy_loss(std::span<const double> probabilities) {
  double total = 0.0;
  for (double p : probabilities) {
    if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("cross_entropy_loss: probabilities must lie in (0, 1]");
    total -= std::log(p);
  }
  return total;
}

// ---------------------------------------------------------------------------

EntailmentModel::EntailmentModel(std::unique_ptr<TextEncoder> encoder, GatedFusionParams fusion,
                                 ClassifierParams classifier)
    : encoder_(std::move(encoder)), fusion_(std::move(fusion)), classifier_(std::move(classifier)) {
  if (!encoder_) throw InvalidArgument("entailment model needs an encoder");
  check_shapes();
}

EntailmentModel::EntailmentModel(const EntailmentModel& other)
    : encoder_(other.encoder_->clone()), fusion_(other.fusion_), classifier_(other.classifier_) {}

EntailmentModel& EntailmentModel::operator=(const EntailmentModel& other) {
  if (this != &other) {
    encoder_ = other.encoder_->clone();
    fusion_ = other.fusion_;
    classifier_ = other.classifier_;
  }
  return *this;
}

void EntailmentModel::check_shapes() const {
  const auto d = static_cast<Eigen::Index>(encoder_->dimension());
  auto square = [d](const Matrix& m) { return m.rows() == d && m.cols() == d; };
  if (!square(fusion_.gate_topic) || !square(fusion_.gate_context) ||
      (fusion_.projection && !square(*fusion_.projection))) {
    throw InvalidArgument("gate matrices must be d x d with d = " + std::to_string(d));
  }
  if (classifier_.head.rows() != static_cast<Eigen::Index>(kNumLabels) || classifier_.head.cols() != d ||
      classifier_.bias.size() != static_cast<Eigen::Index>(kNumLabels)) {
    throw InvalidArgument("classifier head must be 3 x d with a 3-vector bias");
  }
  if (!(classifier_.q > 0.0 && classifier_.q <= 1.0)) throw InvalidArgument("GCE q must be in (0, 1]");
}

EntailmentModel EntailmentModel::initialize(const ModelOptions& options, std::uint64_t seed) {
  auto encoder = std::make_unique<HashedBagEncoder>(options.dimension, options.buckets, seed ^ 0x5eedULL,
                                                    options.embedding_scale);
  return initialize_with(std::move(encoder), options, seed);
}

EntailmentModel EntailmentModel::initialize_with(std::unique_ptr<TextEncoder> encoder,
                                                 const ModelOptions& options, std::uint64_t seed) {
  if (!encoder) throw InvalidArgument("initialize_with: null encoder");
  const auto d = static_cast<Eigen::Index>(encoder->dimension());
  std::mt19937_64 rng(seed);
  const double gate_scale = 1.0 / std::sqrt(static_cast<double>(d));
  GatedFusionParams fusion;
  fusion.gate_topic = random_matrix(d, d, gate_scale, rng);
  fusion.gate_context = random_matrix(d, d, gate_scale, rng);
  if (options.use_projection) fusion.projection = Matrix::Identity(d, d);
  ClassifierParams classifier;
  classifier.head = random_matrix(static_cast<Eigen::Index>(kNumLabels), d, options.init_scale, rng);
  classifier.bias = Vector::Zero(static_cast<Eigen::Index>(kNumLabels));
  classifier.q = options.q;
  return EntailmentModel(std::move(encoder), std::move(fusion), std::move(classifier));
}

std::array<double, kNumLabels> EntailmentModel::predict_encoded(const Vector& context, const Vector& topics) const {
  const Vector fused = gated_fuse(context, topics, fusion_);
  const Vector probs = softmax(classifier_.head * fused + classifier_.bias);
  return {probs(0), probs(1), probs(2)};
}

std::array<double, kNumLabels> EntailmentModel::predict(std::string_view premise, std::string_view hypothesis,
                                                        std::span<const std::string> topics,
                                                        bool use_topics) const {
  const Vector context = encode_context(*encoder_, premise, hypothesis);
  const Vector topic_vec = use_topics ? encode_topics(*encoder_, topics)
                                      : Vector::Zero(static_cast<Eigen::Index>(dimension()));
  return predict_encoded(context, topic_vec);
}

HashedBagEncoder* EntailmentModel::trainable_encoder() { return dynamic_cast<HashedBagEncoder*>(encoder_.get()); }

const HashedBagEncoder* EntailmentModel::trainable_encoder() const {
  return dynamic_cast<const HashedBagEncoder*>(encoder_.get());
}

void EntailmentModel::write(std::ostream& out) const {
  io::Json enc{{"id", encoder_->identifier()}, {"dimension", encoder_->dimension()}};
  if (const auto* bag = trainable_encoder()) {
    enc["buckets"] = bag->buckets();
    enc["table"] = matrix_to_json(bag->table());
  }
  io::Json j{{"format", "fet-entailment-v1"},
             {"encoder", enc},
             {"gate_topic", matrix_to_json(fusion_.gate_topic)},
             {"gate_context", matrix_to_json(fusion_.gate_context)},
             {"projection", fusion_.projection ? matrix_to_json(*fusion_.projection) : io::Json(nullptr)},
             {"head", matrix_to_json(classifier_.head)},
             {"bias", std::vector<double>(classifier_.bias.data(), classifier_.bias.data() + classifier_.bias.size())},
             {"q", classifier_.q}};
  out << j.dump() << '\n';
}

void EntailmentModel::save(const std::filesystem::path& file) const {
  auto out = io::open_output(file);
  write(out);
}

EntailmentModel EntailmentModel::read(std::istream& in) {
  io::Json j;
  try {
    j = io::Json::parse(in);
    if (j.value("format", "") != "fet-entailment-v1") throw ParseError("checkpoint: unknown format");
    const auto& enc = j.at("encoder");
    const auto id = enc.at("id").get<std::string>();
    std::unique_ptr<TextEncoder> encoder;
    if (id == "hashed-bag") {
      encoder = std::make_unique<HashedBagEncoder>(matrix_from_json(enc.at("table")));
    } else if (id.starts_with("remote:")) {
      encoder = std::make_unique<RemoteTextEncoder>(id.substr(7), enc.at("dimension").get<std::size_t>());
    } else {
      throw ParseError("checkpoint: unknown encoder '" + id + "'");
    }
    GatedFusionParams fusion{matrix_from_json(j.at("gate_topic")), matrix_from_json(j.at("gate_context")),
                             std::nullopt};
    if (!j.at("projection").is_null()) fusion.projection = matrix_from_json(j.at("projection"));
    const auto bias = j.at("bias").get<std::vector<double>>();
    ClassifierParams classifier{matrix_from_json(j.at("head")),
                                Eigen::Map<const Vector>(bias.data(), static_cast<Eigen::Index>(bias.size())),
                                j.at("q").get<double>()};
    return EntailmentModel(std::move(encoder), std::move(fusion), std::move(classifier));
  } catch (const io::Json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
}

EntailmentModel EntailmentModel::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open model checkpoint " + file.string());
  return read(in);
}

// ---------------------------------------------------------------------------

namespace {

/// Inputs of one example, pre-encoded once per training run.
struct Encoded {
  std::vector<std::size_t> context_features;
  std::vector<std::size_t> topic_features;
  Vector context;  // used when the encoder is frozen
  Vector topics;
  std::size_t label = 0;
};

std::string joint_text(const NLIExample& ex) {
  return ex.premise + " " + std::string(kSeparator) + " " + ex.hypothesis;
}

Encoded encode_example(const EntailmentModel& model, const NLIExample& ex, bool use_topics, bool trainable) {
  Encoded e;
  e.label = static_cast<std::size_t>(ex.label);
  const auto* bag = model.trainable_encoder();
  if (trainable && bag) {
    if (text::trim(ex.premise).empty() || text::trim(ex.hypothesis).empty()) {
      throw InvalidArgument("training example with empty premise or hypothesis");
    }
    e.context_features = bag->features(joint_text(ex));
    if (use_topics && !ex.topics.empty()) {
      e.topic_features = bag->features(text::join(ex.topics, kTopicDelimiter));
    }
  } else {
    e.context = encode_context(model.encoder(), ex.premise, ex.hypothesis);
    e.topics = use_topics ? encode_topics(model.encoder(), ex.topics)
                          : Vector::Zero(static_cast<Eigen::Index>(model.dimension()));
  }
  return e;
}

Gradients zero_gradients(const EntailmentModel& model) {
  const auto d = static_cast<Eigen::Index>(model.dimension());
  Gradients g;
  g.gate_topic = Matrix::Zero(d, d);
  g.gate_context = Matrix::Zero(d, d);
  if (model.fusion().projection) g.projection = Matrix::Zero(d, d);
  g.head = Matrix::Zero(static_cast<Eigen::Index>(kNumLabels), d);
  g.bias = Vector::Zero(static_cast<Eigen::Index>(kNumLabels));
  return g;
}

double accumulate(const EntailmentModel& model, std::span<const Encoded> batch, LossMode mode, Gradients* grads) {
  const auto* bag = model.trainable_encoder();
  const auto& fusion = model.fusion();
  const auto& clf = model.classifier();
  const auto d = static_cast<Eigen::Index>(model.dimension());
  const double scale = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;

  for (const auto& ex : batch) {
    const bool from_features = bag && ex.context.size() == 0;
    const Vector c = from_features ? bag->pool(ex.context_features) : ex.context;
    const Vector t = from_features ? bag->pool(ex.topic_features) : ex.topics;

    const Vector lambda = sigmoid(fusion.gate_topic * t + fusion.gate_context * c);
    const Vector projected = fusion.projection ? Vector(*fusion.projection * t) : t;
    const Vector fused = c + lambda.cwiseProduct(projected);
    const Vector logits = clf.head * fused + clf.bias;
    const Vector probs = softmax(logits);
    // log p from the logits directly, so a vanishing probability stays finite under CE.
    const double log_p = logits(static_cast<Eigen::Index>(ex.label)) - logits.maxCoeff() -
                         std::log((logits.array() - logits.maxCoeff()).exp().sum());

    const double loss = mode == LossMode::GCE ? (1.0 - std::exp(clf.q * log_p)) / clf.q : -log_p;
    total += loss;
    if (!grads) continue;

    // d loss / d logits: (p - onehot), weighted by p_true^q for GCE.
    Vector g_logits = probs;
    g_logits(static_cast<Eigen::Index>(ex.label)) -= 1.0;
    if (mode == LossMode::GCE) g_logits *= std::exp(clf.q * log_p);
    g_logits *= scale;

    grads->head += g_logits * fused.transpose();
    grads->bias += g_logits;
    const Vector g_fused = clf.head.transpose() * g_logits;
    const Vector g_lambda = g_fused.cwiseProduct(projected);
    const Vector g_projected = g_fused.cwiseProduct(lambda);
    const Vector g_pre = g_lambda.cwiseProduct(lambda.cwiseProduct(Vector::Ones(d) - lambda));
    grads->gate_topic += g_pre * t.transpose();
    grads->gate_context += g_pre * c.transpose();
    Vector g_t = fusion.gate_topic.transpose() * g_pre;
    if (fusion.projection) {
      grads->projection += g_projected * t.transpose();
      g_t += fusion.projection->transpose() * g_projected;
    } else {
      g_t += g_projected;
    }
    const Vector g_c = g_fused + fusion.gate_context.transpose() * g_pre;

    if (from_features) {
      auto scatter = [&](const std::vector<std::size_t>& feats, const Vector& g) {
        if (feats.empty()) return;
        const Vector share = g / static_cast<double>(feats.size());
        for (auto f : feats) {
          auto [it, inserted] = grads->embedding_rows.try_emplace(f, Vector::Zero(d));
          it->second += share;
        }
      };
      scatter(ex.context_features, g_c);
      scatter(ex.topic_features, g_t);
    }
  }
  return total * scale;
}

void apply(EntailmentModel& model, const Gradients& g, double lr, bool train_encoder) {
  auto& fusion = model.fusion();
  auto& clf = model.classifier();
  fusion.gate_topic -= lr * g.gate_topic;
  fusion.gate_context -= lr * g.gate_context;
  if (fusion.projection) *fusion.projection -= lr * g.projection;
  clf.head -= lr * g.head;
  clf.bias -= lr * g.bias;
  if (auto* bag = model.trainable_encoder(); bag && train_encoder) {
    for (const auto& [row, grad] : g.embedding_rows) {
      bag->table().row(static_cast<Eigen::Index>(row)) -= lr * grad.transpose();
    }
  }
}

}  // namespace

double loss_and_gradients(const EntailmentModel& model, std::span<const NLIExample> batch, LossMode mode,
                          bool use_topics, Gradients* grads) {
  if (batch.empty()) throw InvalidArgument("loss_and_gradients: empty batch");
  std::vector<Encoded> encoded;
  encoded.reserve(batch.size());
  for (const auto& ex : batch) encoded.push_back(encode_example(model, ex, use_topics, true));
  if (grads) *grads = zero_gradients(model);
  return accumulate(model, encoded, mode, grads);
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgument("train: learning_rate must be > 0");
  }
  if (batch_size == 0) throw InvalidArgument("train: batch_size must be >= 1");
}

TrainResult train(EntailmentModel model, const std::vector<NLIExample>& examples, const TrainConfig& config,
                  LossMode mode) {
  config.validate();
  if (examples.empty()) throw InvalidArgument("train: no examples");
  const bool train_encoder = config.train_encoder && model.trainable_encoder() != nullptr;
  std::vector<Encoded> encoded;
  encoded.reserve(examples.size());
  for (const auto& ex : examples) encoded.push_back(encode_example(model, ex, config.use_topics, train_encoder));

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(encoded.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> trace;
  std::vector<Encoded> batch;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const auto stop = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(encoded[order[i]]);
      Gradients g = zero_gradients(model);
      const double loss = accumulate(model, batch, mode, &g);
      if (!std::isfinite(loss)) {
        std::string ids;
        for (std::size_t i = start; i < stop; ++i) ids += (ids.empty() ? "" : ",") + std::to_string(order[i]);
        throw NumericError("non-finite loss in epoch " + std::to_string(epoch + 1) + " on examples [" + ids + "]");
      }
      epoch_total += loss * static_cast<double>(stop - start);
      apply(model, g, config.learning_rate, train_encoder);
    }
    trace.push_back(epoch_total / static_cast<double>(order.size()));
  }
  return TrainResult{std::move(model), std::move(trace)};
}

void save_loss_trace(const std::filesystem::path& file, std::span<const double> trace) {
  auto out = io::open_output(file);
  out << "epoch\tloss\n";
  char buf[64];
  for (std::size_t i = 0; i < trace.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", trace[i]);
    out << (i + 1) << '\t' << buf << '\n';
  }
}

}  // namespace fet
