#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dhnet/feature_file.hpp"
#include "dhnet/nn/adam.hpp"
#include "dhnet/nn/checkpoint.hpp"
#include "dhnet/nn/layers.hpp"

namespace dhnet {

struct BlockSpec {
  int channels = 32;
  int stride = 1;
  bool operator==(const BlockSpec&) const = default;
};

// Widths of the three base blocks shared by every stream, plus the two hidden
// dense layers.
struct StreamConfig {
  std::array<BlockSpec, 3> blocks = {BlockSpec{32, 1}, BlockSpec{64, 1}, BlockSpec{128, 1}};
  std::array<int, 2> dense_widths = {512, 256};
  int alpha = 60;  // histogram inputs have 2 * alpha rows
  double bn_momentum = 0.99;
  double bn_epsilon = 1e-3;

  void validate() const;
  bool operator==(const StreamConfig&) const = default;
};

void to_json(nlohmann::json& j, const StreamConfig& c);
void from_json(const nlohmann::json& j, StreamConfig& c);

inline constexpr int kAuxLength = 64;

// A mini-batch in network layout: histograms [N, 1, 2 alpha, delta^2],
// aux [N, 64].
struct FeatureBatch {
  std::array<nn::Tensor, 3> hists;
  nn::Tensor aux;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

FeatureBatch make_batch(std::span<const FeatureRecord> records, std::span<const std::size_t> indices);
FeatureBatch make_batch(std::span<const FeatureRecord> records);

// Activations recorded during forward(): the output of every base block of
// every stream, in stream-then-block order.
struct ForwardTrace {
  std::vector<nn::Tensor> block_outputs;
};

class DHNet {
 public:
  DHNet(const StreamConfig& config, std::uint64_t seed);

  // Returns logits [N, 2].
  nn::Tensor forward(const FeatureBatch& batch, nn::Mode mode, ForwardTrace* trace = nullptr);
  // Backpropagates d(loss)/d(logits) from the last forward call.
  void backward(const nn::Tensor& dlogits);

  std::vector<nn::Parameter*> parameters();
  void zero_grad();

  const StreamConfig& config() const { return config_; }
  std::size_t parameter_count() const;
  static std::size_t count_parameters(const StreamConfig& config);
  // Length of the concatenated flattened stream outputs.
  std::size_t flat_width() const { return flat_width_; }

  // Parameters and batch-norm running statistics, in a fixed order.
  std::vector<nn::NamedTensor> state() const;
  // Throws IncompatibleArtifact if names or shapes differ from this model.
  void load_state(const std::vector<nn::NamedTensor>& tensors);

 private:
  struct BaseBlock {
    nn::Conv2d conv3;
    nn::BatchNorm2d bn3;
    nn::Relu relu3;
    nn::Conv2d conv1;
    nn::BatchNorm2d bn1;
    nn::Relu relu1;
    nn::MaxPool2x2 pool;
  };
  struct Stream {
    int delta;
    std::vector<BaseBlock> blocks;
    std::vector<std::size_t> output_shape;  // of the last forward
  };

  std::vector<std::pair<std::string, nn::Tensor*>> tensor_refs();

  StreamConfig config_;
  std::vector<Stream> streams_;
  std::size_t flat_width_ = 0;
  std::array<std::size_t, 3> stream_widths_{};
  nn::Dense fc1_, fc2_, fc3_;
  nn::Relu relu_fc1_, relu_fc2_;
};

struct Prediction {
  double score = 0.0;  // softmax probability of "double"
  int label = 0;
  int frame_index = 0;

  bool operator==(const Prediction&) const = default;
};

inline constexpr double kDecisionThreshold = 0.5;

// label = 1 iff score >= threshold.
Prediction make_prediction(double y0, double y1, int frame_index = 0, double threshold = kDecisionThreshold);

// Eval-mode predictions in record order; frame_index is the record position.
std::vector<Prediction> predict(DHNet& model, std::span<const FeatureRecord> records, std::size_t batch_size = 64);

struct TrainConfig {
  int batch_size = 32;
  int epochs = 60;
  double gamma = 1e-4;
  int alpha = 60;
  std::uint64_t seed = 0;
  nn::AdamConfig adam;

  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;  // mean of per-batch total loss
  double train_accuracy = 0.0;
  std::optional<double> val_accuracy;
};

struct TrainResult {
  std::vector<nn::NamedTensor> best_state;
  int best_epoch = 0;
  std::optional<double> best_val_accuracy;
  std::vector<EpochStats> history;
};

// Shuffled mini-batch Adam on L = L_c + L_r. After every epoch the model is
// scored on `validation`; the state with the highest validation accuracy
// (earliest on ties) is returned. With an empty validation set the final
// epoch is returned.
TrainResult train(DHNet& model, std::span<const FeatureRecord> training, std::span<const FeatureRecord> validation,
                  const TrainConfig& config, const std::function<void(const EpochStats&)>& on_epoch = {});

double accuracy(DHNet& model, std::span<const FeatureRecord> records);

// Feature extraction settings a checkpoint was trained with.
struct FeatureParams {
  int alpha = 60;
  std::vector<int> deltas = {4, 8, 16};
  std::string qm_id = "Q1";
  bool operator==(const FeatureParams&) const = default;
};

void to_json(nlohmann::json& j, const FeatureParams& c);
void from_json(const nlohmann::json& j, FeatureParams& c);

struct ModelCheckpoint {
  StreamConfig stream;
  TrainConfig train;
  FeatureParams features;
  std::vector<nn::NamedTensor> tensors;
};

// Writes `path` (DHW1) and `path` + ".json" (sidecar).
void save_checkpoint(const ModelCheckpoint& checkpoint, const std::filesystem::path& path);
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);
std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint);

// Builds a model from a checkpoint, validating every tensor shape.
DHNet instantiate(const ModelCheckpoint& checkpoint);
// Throws IncompatibleArtifact unless the record's tensor shapes match what
// the checkpoint was trained on.
void check_compatible(const ModelCheckpoint& checkpoint, const FeatureRecord& record);

}  // namespace dhnet
