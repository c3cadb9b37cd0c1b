#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fet/nli_data.hpp"

namespace fet {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Marker separating premise and hypothesis in a jointly encoded sequence.
inline constexpr std::string_view kSeparator = "[SEP]";
/// Delimiter used when concatenating topic terms.
inline constexpr std::string_view kTopicDelimiter = " ; ";

class TextEncoder {
 public:
  virtual ~TextEncoder() = default;
  virtual Vector encode(std::string_view text) const = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::string identifier() const = 0;
  virtual std::unique_ptr<TextEncoder> clone() const = 0;
};

/// Trainable toy encoder: a table of hashed feature embeddings, mean pooled.
///
/// Features of a segment are its lowercased word tokens tagged with the
/// segment index. When the text holds a `[SEP]` marker, each content word of
/// the first segment is paired with each content word of the second segment
/// that the first segment lacks, adding one cross feature per pair. The pooled
/// vector thus depends on which words appear on which side of the separator.
class HashedBagEncoder final : public TextEncoder {
 public:
  HashedBagEncoder(std::size_t dimension, std::size_t buckets, std::uint64_t seed, double init_scale);
  explicit HashedBagEncoder(Matrix table);

  /// Bucket index of every feature, with multiplicity.
  std::vector<std::size_t> features(std::string_view text) const;

  Vector encode(std::string_view text) const override;
  Vector pool(std::span<const std::size_t> features) const;
  std::size_t dimension() const override { return static_cast<std::size_t>(table_.cols()); }
  std::size_t buckets() const { return static_cast<std::size_t>(table_.rows()); }
  std::string identifier() const override { return "hashed-bag"; }
  std::unique_ptr<TextEncoder> clone() const override;

  Matrix& table() { return table_; }
  const Matrix& table() const { return table_; }

 private:
  Matrix table_;  // buckets x dimension
};

/// Frozen encoder served over HTTP: POST /encode {"text": ...} -> {"embedding": [...]}.
class RemoteTextEncoder final : public TextEncoder {
 public:
  RemoteTextEncoder(std::string endpoint, std::size_t dimension);

  Vector encode(std::string_view text) const override;
  std::size_t dimension() const override { return dimension_; }
  std::string identifier() const override { return "remote:" + endpoint_; }
  std::unique_ptr<TextEncoder> clone() const override;

 private:
  std::string endpoint_;
  std::size_t dimension_;
};

/// H^c: premise and hypothesis encoded as one `premise [SEP] hypothesis` sequence.
Vector encode_context(const TextEncoder& encoder, std::string_view premise, std::string_view hypothesis);

/// H^t: topics joined by the topic delimiter; an empty list gives the zero vector.
Vector encode_topics(const TextEncoder& encoder, std::span<const std::string> topics);

struct GatedFusionParams {
  Matrix gate_topic;                // W_lambda, d x d
  Matrix gate_context;              // U_lambda, d x d
  std::optional<Matrix> projection; // maps H^t to the gated term; identity when absent
};

struct ClassifierParams {
  Matrix head;  // 3 x d
  Vector bias;  // 3
  double q = 0.7;
};

/// lambda = sigmoid(W H^t + U H^c);  H = H^c + lambda (elementwise) * (P H^t).
Vector gated_fuse(const Vector& context, const Vector& topics, const GatedFusionParams& params);
Vector gate_values(const Vector& context, const Vector& topics, const GatedFusionParams& params);

/// Sum over examples of (1 - p_i^q) / q. Requires 0 < q <= 1 and p_i in (0, 1].
double gce_loss(std::span<const double> probabilities, double q);
/// Sum over examples of -ln p_i.
double cross_entropy_loss(std::span<const double> probabilities);

enum class LossMode { GCE, CE };

struct ModelOptions {
  std::size_t dimension = 32;
  std::size_t buckets = 8192;
  double q = 0.7;
  bool use_projection = true;
  double init_scale = 0.1;       // head weights
  double embedding_scale = 0.01; // toy-encoder feature embeddings
};

/// Encoder + gated topic fusion + 3-way softmax head. Copies are deep.
class EntailmentModel {
 public:
  EntailmentModel(std::unique_ptr<TextEncoder> encoder, GatedFusionParams fusion,
                  ClassifierParams classifier);
  EntailmentModel(const EntailmentModel& other);
  EntailmentModel& operator=(const EntailmentModel& other);
  EntailmentModel(EntailmentModel&&) noexcept = default;
  EntailmentModel& operator=(EntailmentModel&&) noexcept = default;

  /// Toy-encoder model with small random weights and identity projection.
  static EntailmentModel initialize(const ModelOptions& options, std::uint64_t seed);
  /// Gate and head on top of an externally supplied (frozen) encoder.
  static EntailmentModel initialize_with(std::unique_ptr<TextEncoder> encoder, const ModelOptions& options,
                                         std::uint64_t seed);

  /// Probabilities in label order (Entailment, Neutral, Contradiction).
  /// With `use_topics` false, H^t is the zero vector.
  std::array<double, kNumLabels> predict(std::string_view premise, std::string_view hypothesis,
                                         std::span<const std::string> topics, bool use_topics = true) const;
  std::array<double, kNumLabels> predict_encoded(const Vector& context, const Vector& topics) const;

  const TextEncoder& encoder() const { return *encoder_; }
  TextEncoder& encoder() { return *encoder_; }
  /// Non-null when the encoder's parameters can be trained.
  HashedBagEncoder* trainable_encoder();
  const HashedBagEncoder* trainable_encoder() const;

  const GatedFusionParams& fusion() const { return fusion_; }
  GatedFusionParams& fusion() { return fusion_; }
  const ClassifierParams& classifier() const { return classifier_; }
  ClassifierParams& classifier() { return classifier_; }
  std::size_t dimension() const { return encoder_->dimension(); }

  /// Checkpoint: JSON with every matrix, the dimensions, q, and the encoder id.
  /// A remote encoder is re-attached from its id; the toy encoder's table is stored inline.
  void save(const std::filesystem::path& file) const;
  static EntailmentModel load(const std::filesystem::path& file);
  void write(std::ostream& out) const;
  static EntailmentModel read(std::istream& in);

 private:
  void check_shapes() const;

  std::unique_ptr<TextEncoder> encoder_;
  GatedFusionParams fusion_;
  ClassifierParams classifier_;
};

/// Gradient of the mean batch loss with respect to every trainable parameter.
struct Gradients {
  Matrix gate_topic;
  Matrix gate_context;
  Matrix projection;  // empty when the model has no projection
  Matrix head;
  Vector bias;
  std::map<std::size_t, Vector> embedding_rows;  // toy encoder rows touched by the batch
};

/// Mean per-example loss over `batch`; fills `grads` when non-null.
double loss_and_gradients(const EntailmentModel& model, std::span<const NLIExample> batch, LossMode mode,
                          bool use_topics, Gradients* grads);

struct TrainConfig {
  std::size_t epochs = 10;
  double learning_rate = 1e-5;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  bool use_topics = true;
  bool train_encoder = true;  // ignored for encoders without trainable parameters

  void validate() const;
};

struct TrainResult {
  EntailmentModel model;
  std::vector<double> loss_trace;  // mean per-example loss of each epoch
};

/// Minibatch SGD on the mean per-example loss. Deterministic for a given seed.
TrainResult train(EntailmentModel model, const std::vector<NLIExample>& examples, const TrainConfig& config,
                  LossMode mode);

/// Tab-separated `epoch<TAB>loss` lines with a header.
void save_loss_trace(const std::filesystem::path& file, std::span<const double> trace);

}  // namespace fet
