#include "dhnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "dhnet/error.hpp"
#include "dhnet/nn/loss.hpp"
#include "dhnet/rng.hpp"

namespace dhnet {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

void StreamConfig::validate() const {
  for (const BlockSpec& b : blocks) {
    if (b.channels < 1) throw InvalidArgument("StreamConfig: block channels must be positive");
    if (b.stride < 1) throw InvalidArgument("StreamConfig: block stride must be positive");
  }
  for (int w : dense_widths)
    if (w < 1) throw InvalidArgument("StreamConfig: dense widths must be positive");
  if (alpha < 1) throw InvalidArgument("StreamConfig: alpha must be >= 1");
  if (bn_epsilon <= 0.0) throw InvalidArgument("StreamConfig: bn_epsilon must be positive");
  if (bn_momentum < 0.0 || bn_momentum > 1.0) throw InvalidArgument("StreamConfig: bn_momentum must be in [0, 1]");
}

void to_json(json& j, const StreamConfig& c) {
  json blocks = json::array();
  for (const BlockSpec& b : c.blocks) blocks.push_back({{"channels", b.channels}, {"stride", b.stride}});
  j = json{{"blocks", blocks},
           {"dense_widths", {c.dense_widths[0], c.dense_widths[1]}},
           {"alpha", c.alpha},
           {"bn_momentum", c.bn_momentum},
           {"bn_epsilon", c.bn_epsilon}};
}

void from_json(const json& j, StreamConfig& c) {
  const auto& blocks = j.at("blocks");
  if (!blocks.is_array() || blocks.size() != 3) throw ParseError("StreamConfig: exactly three blocks required");
  for (std::size_t i = 0; i < 3; ++i) {
    c.blocks[i].channels = blocks[i].at("channels").get<int>();
    c.blocks[i].stride = blocks[i].at("stride").get<int>();
  }
  const auto& dw = j.at("dense_widths");
  if (!dw.is_array() || dw.size() != 2) throw ParseError("StreamConfig: two dense widths required");
  c.dense_widths = {dw[0].get<int>(), dw[1].get<int>()};
  c.alpha = j.at("alpha").get<int>();
  c.bn_momentum = j.at("bn_momentum").get<double>();
  c.bn_epsilon = j.at("bn_epsilon").get<double>();
}

void TrainConfig::validate() const {
  if (batch_size < 2) throw InvalidArgument("TrainConfig: batch_size must be >= 2 (batch normalization)");
  if (epochs < 1) throw InvalidArgument("TrainConfig: epochs must be >= 1");
  if (gamma < 0.0) throw InvalidArgument("TrainConfig: gamma must be >= 0");
  if (alpha < 1) throw InvalidArgument("TrainConfig: alpha must be >= 1");
  if (adam.learning_rate <= 0.0) throw InvalidArgument("TrainConfig: learning rate must be positive");
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"batch_size", c.batch_size},
           {"epochs", c.epochs},
           {"gamma", c.gamma},
           {"alpha", c.alpha},
           {"seed", c.seed},
           {"learning_rate", c.adam.learning_rate},
           {"beta1", c.adam.beta1},
           {"beta2", c.adam.beta2},
           {"epsilon", c.adam.epsilon},
           {"selection", "max_validation_accuracy"}};
}

void from_json(const json& j, TrainConfig& c) {
  c.batch_size = j.at("batch_size").get<int>();
  c.epochs = j.at("epochs").get<int>();
  c.gamma = j.at("gamma").get<double>();
  c.alpha = j.at("alpha").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.adam.learning_rate = j.at("learning_rate").get<double>();
  c.adam.beta1 = j.at("beta1").get<double>();
  c.adam.beta2 = j.at("beta2").get<double>();
  c.adam.epsilon = j.at("epsilon").get<double>();
}

void to_json(json& j, const FeatureParams& c) {
  j = json{{"alpha", c.alpha}, {"deltas", c.deltas}, {"qm_id", c.qm_id}};
}

void from_json(const json& j, FeatureParams& c) {
  c.alpha = j.at("alpha").get<int>();
  c.deltas = j.at("deltas").get<std::vector<int>>();
  c.qm_id = j.at("qm_id").get<std::string>();
}

// ---------------------------------------------------------------------------
// Batches

FeatureBatch make_batch(std::span<const FeatureRecord> records, std::span<const std::size_t> indices) {
  if (indices.empty()) throw InvalidArgument("make_batch: empty batch");
  const FeatureRecord& first = records[indices[0]];
  const std::size_t n = indices.size();
  FeatureBatch batch;
  for (std::size_t s = 0; s < 3; ++s)
    batch.hists[s] = nn::Tensor({n, 1, first.blocks[s].rows, first.blocks[s].cols});
  batch.aux = nn::Tensor({n, static_cast<std::size_t>(kAuxLength)});
  batch.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const FeatureRecord& r = records[indices[i]];
    for (std::size_t s = 0; s < 3; ++s) {
      const FeatureBlock& b = r.blocks[s];
      if (b.rows != first.blocks[s].rows || b.cols != first.blocks[s].cols)
        throw InvalidArgument("make_batch: records with different histogram shapes");
      std::copy(b.values.begin(), b.values.end(), batch.hists[s].ptr() + i * b.values.size());
    }
    std::copy(r.aux.begin(), r.aux.end(), batch.aux.ptr() + i * kAuxLength);
    batch.labels[i] = r.label;
  }
  return batch;
}

FeatureBatch make_batch(std::span<const FeatureRecord> records) {
  std::vector<std::size_t> idx(records.size());
  std::iota(idx.begin(), idx.end(), 0);
  return make_batch(records, idx);
}

// ---------------------------------------------------------------------------
// Network

namespace {

std::size_t stream_output_width(const StreamConfig& c, int delta) {
  std::size_t h = static_cast<std::size_t>(2 * c.alpha), w = static_cast<std::size_t>(delta) * delta;
  for (const BlockSpec& b : c.blocks) {
    h = (h + b.stride - 1) / b.stride / 2;
    w = (w + b.stride - 1) / b.stride / 2;
    if (h == 0 || w == 0) throw InvalidArgument("StreamConfig: feature map vanishes before the last block");
  }
  return static_cast<std::size_t>(c.blocks[2].channels) * h * w;
}

std::size_t total_flat_width(const StreamConfig& c) {
  std::size_t total = 0;
  for (int d : kFeatureDeltas) total += stream_output_width(c, d);
  return total;
}

}  // namespace

DHNet::DHNet(const StreamConfig& config, std::uint64_t seed)
    : config_((config.validate(), config)),
      flat_width_(total_flat_width(config)),
      fc1_("fc1", static_cast<int>(flat_width_) + kAuxLength, config.dense_widths[0]),
      fc2_("fc2", config.dense_widths[0] + kAuxLength, config.dense_widths[1]),
      fc3_("fc3", config.dense_widths[1] + kAuxLength, 2) {
  Rng rng(seed);
  for (std::size_t s = 0; s < kFeatureDeltas.size(); ++s) {
    const int delta = kFeatureDeltas[s];
    stream_widths_[s] = stream_output_width(config, delta);
    Stream stream{delta, {}, {}};
    int in = 1;
    for (std::size_t b = 0; b < config.blocks.size(); ++b) {
      const std::string prefix = "s" + std::to_string(delta) + ".b" + std::to_string(b);
      const int d = config.blocks[b].channels;
      stream.blocks.push_back(BaseBlock{
          nn::Conv2d(prefix + ".conv3", in, d, 3, config.blocks[b].stride),
          nn::BatchNorm2d(prefix + ".bn3", d, config.bn_momentum, config.bn_epsilon),
          {},
          nn::Conv2d(prefix + ".conv1", d, d, 1, 1),
          nn::BatchNorm2d(prefix + ".bn1", d, config.bn_momentum, config.bn_epsilon),
          {},
          {}});
      in = d;
    }
    for (BaseBlock& blk : stream.blocks) {
      blk.conv3.init(rng);
      blk.conv1.init(rng);
    }
    streams_.push_back(std::move(stream));
  }
  fc1_.init(rng);
  fc2_.init(rng);
  fc3_.init(rng);
}

nn::Tensor DHNet::forward(const FeatureBatch& batch, nn::Mode mode, ForwardTrace* trace) {
  const std::size_t n = batch.size();
  if (n == 0) throw InvalidArgument("DHNet::forward: empty batch");
  for (std::size_t s = 0; s < 3; ++s) {
    const auto& t = batch.hists[s];
    const std::size_t cols = static_cast<std::size_t>(kFeatureDeltas[s]) * kFeatureDeltas[s];
    if (t.rank() != 4 || t.dim(0) != n || t.dim(1) != 1 || t.dim(2) != static_cast<std::size_t>(2 * config_.alpha) ||
        t.dim(3) != cols)
      throw InvalidArgument("DHNet::forward: histogram input " + std::to_string(s) + " has shape " +
                            nn::shape_string(t.shape()) + ", expected [" + std::to_string(n) + ",1," +
                            std::to_string(2 * config_.alpha) + "," + std::to_string(cols) + "]");
  }
  if (batch.aux.rank() != 2 || batch.aux.dim(0) != n || batch.aux.dim(1) != static_cast<std::size_t>(kAuxLength))
    throw InvalidArgument("DHNet::forward: aux input has shape " + nn::shape_string(batch.aux.shape()));
  if (trace) trace->block_outputs.clear();

  std::vector<nn::Tensor> flats;
  for (std::size_t s = 0; s < 3; ++s) {
    Stream& stream = streams_[s];
    nn::Tensor x = batch.hists[s];
    for (BaseBlock& blk : stream.blocks) {
      x = blk.relu3.forward(blk.bn3.forward(blk.conv3.forward(x), mode));
      x = blk.relu1.forward(blk.bn1.forward(blk.conv1.forward(x), mode));
      x = blk.pool.forward(x);
      if (trace) trace->block_outputs.push_back(x);
    }
    stream.output_shape = x.shape();
    flats.push_back(nn::flatten(x));
  }
  const nn::Tensor in1 = nn::concat({&flats[0], &flats[1], &flats[2], &batch.aux}, 1);
  const nn::Tensor a1 = relu_fc1_.forward(fc1_.forward(in1));
  const nn::Tensor in2 = nn::concat({&a1, &batch.aux}, 1);
  const nn::Tensor a2 = relu_fc2_.forward(fc2_.forward(in2));
  const nn::Tensor in3 = nn::concat({&a2, &batch.aux}, 1);
  return fc3_.forward(in3);
}

void DHNet::backward(const nn::Tensor& dlogits) {
  const std::size_t aux = kAuxLength;
  auto d3 = nn::split(fc3_.backward(dlogits), 1, {static_cast<std::size_t>(config_.dense_widths[1]), aux});
  auto d2 = nn::split(fc2_.backward(relu_fc2_.backward(d3[0])), 1,
                      {static_cast<std::size_t>(config_.dense_widths[0]), aux});
  auto d1 = nn::split(fc1_.backward(relu_fc1_.backward(d2[0])), 1,
                      {stream_widths_[0], stream_widths_[1], stream_widths_[2], aux});
  for (std::size_t s = 0; s < 3; ++s) {
    Stream& stream = streams_[s];
    nn::Tensor g = d1[s].reshaped(stream.output_shape);
    for (auto it = stream.blocks.rbegin(); it != stream.blocks.rend(); ++it) {
      g = it->pool.backward(g);
      g = it->conv1.backward(it->bn1.backward(it->relu1.backward(g)));
      g = it->conv3.backward(it->bn3.backward(it->relu3.backward(g)));
    }
  }
}

std::vector<nn::Parameter*> DHNet::parameters() {
  std::vector<nn::Parameter*> out;
  for (Stream& stream : streams_)
    for (BaseBlock& blk : stream.blocks) {
      out.insert(out.end(), {&blk.conv3.weight(), &blk.conv3.bias(), &blk.bn3.gamma(), &blk.bn3.beta(),
                             &blk.conv1.weight(), &blk.conv1.bias(), &blk.bn1.gamma(), &blk.bn1.beta()});
    }
  out.insert(out.end(), {&fc1_.weight(), &fc1_.bias(), &fc2_.weight(), &fc2_.bias(), &fc3_.weight(), &fc3_.bias()});
  return out;
}

void DHNet::zero_grad() {
  for (nn::Parameter* p : parameters()) p->zero_grad();
}

std::size_t DHNet::parameter_count() const {
  std::size_t n = 0;
  for (const nn::Parameter* p : const_cast<DHNet*>(this)->parameters()) n += p->value.size();
  return n;
}

std::size_t DHNet::count_parameters(const StreamConfig& c) {
  c.validate();
  std::size_t per_stream = 0;
  std::size_t in = 1;
  for (const BlockSpec& b : c.blocks) {
    const std::size_t d = static_cast<std::size_t>(b.channels);
    per_stream += in * d * 9 + d;  // 3x3 conv
    per_stream += d * d + d;       // 1x1 conv
    per_stream += 4 * d;           // two batch norms (gamma, beta)
    in = d;
  }
  const std::size_t w1 = static_cast<std::size_t>(c.dense_widths[0]);
  const std::size_t w2 = static_cast<std::size_t>(c.dense_widths[1]);
  const std::size_t a = kAuxLength;
  const std::size_t flat = total_flat_width(c);
  return 3 * per_stream + (flat + a) * w1 + w1 + (w1 + a) * w2 + w2 + (w2 + a) * 2 + 2;
}

std::vector<std::pair<std::string, nn::Tensor*>> DHNet::tensor_refs() {
  std::vector<std::pair<std::string, nn::Tensor*>> out;
  auto add_param = [&](nn::Parameter& p) { out.emplace_back(p.name, &p.value); };
  auto add_bn = [&](nn::BatchNorm2d& bn) {
    add_param(bn.gamma());
    add_param(bn.beta());
    out.emplace_back(bn.name() + ".running_mean", &bn.running_mean());
    out.emplace_back(bn.name() + ".running_var", &bn.running_var());
  };
  for (Stream& stream : streams_)
    for (BaseBlock& blk : stream.blocks) {
      add_param(blk.conv3.weight());
      add_param(blk.conv3.bias());
      add_bn(blk.bn3);
      add_param(blk.conv1.weight());
      add_param(blk.conv1.bias());
      add_bn(blk.bn1);
    }
  for (nn::Dense* fc : {&fc1_, &fc2_, &fc3_}) {
    add_param(fc->weight());
    add_param(fc->bias());
  }
  return out;
}

std::vector<nn::NamedTensor> DHNet::state() const {
  std::vector<nn::NamedTensor> out;
  for (const auto& [name, t] : const_cast<DHNet*>(this)->tensor_refs()) out.push_back({name, *t});
  return out;
}

void DHNet::load_state(const std::vector<nn::NamedTensor>& tensors) {
  auto refs = tensor_refs();
  if (tensors.size() != refs.size())
    throw IncompatibleArtifact("checkpoint has " + std::to_string(tensors.size()) + " tensors, model expects " +
                               std::to_string(refs.size()));
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (tensors[i].name != refs[i].first)
      throw IncompatibleArtifact("checkpoint tensor " + std::to_string(i) + " is '" + tensors[i].name +
                                 "', model expects '" + refs[i].first + "'");
    if (tensors[i].tensor.shape() != refs[i].second->shape())
      throw IncompatibleArtifact("checkpoint tensor '" + tensors[i].name + "' has shape " +
                                 nn::shape_string(tensors[i].tensor.shape()) + ", model expects " +
                                 nn::shape_string(refs[i].second->shape()));
  }
  for (std::size_t i = 0; i < refs.size(); ++i) *refs[i].second = tensors[i].tensor;
}

// ---------------------------------------------------------------------------
// Prediction and training

Prediction make_prediction(double y0, double y1, int frame_index, double threshold) {
  const auto p = nn::softmax2(y0, y1);
  return Prediction{p[1], p[1] >= threshold ? 1 : 0, frame_index};
}

std::vector<Prediction> predict(DHNet& model, std::span<const FeatureRecord> records, std::size_t batch_size) {
  std::vector<Prediction> out;
  out.reserve(records.size());
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < records.size(); start += batch_size) {
    const std::size_t end = std::min(records.size(), start + batch_size);
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const nn::Tensor logits = model.forward(make_batch(records, idx), nn::Mode::kEval);
    for (std::size_t i = 0; i < idx.size(); ++i)
      out.push_back(make_prediction(logits[2 * i], logits[2 * i + 1], static_cast<int>(idx[i])));
  }
  return out;
}

double accuracy(DHNet& model, std::span<const FeatureRecord> records) {
  if (records.empty()) throw InvalidArgument("accuracy: no records");
  const auto preds = predict(model, records);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) correct += preds[i].label == records[i].label;
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

TrainResult train(DHNet& model, std::span<const FeatureRecord> training, std::span<const FeatureRecord> validation,
                  const TrainConfig& config, const std::function<void(const EpochStats&)>& on_epoch) {
  config.validate();
  if (training.empty()) throw InvalidArgument("train: empty training set");
  if (config.alpha != model.config().alpha)
    throw InvalidArgument("train: TrainConfig alpha differs from the model's alpha");
  bool has0 = false, has1 = false;
  for (const FeatureRecord& r : training) (r.label ? has1 : has0) = true;
  if (!has0 || !has1)
    throw InvalidArgument(std::string("train: training set contains only class ") + (has0 ? "0 (single)" : "1 (double)") +
                          "; both classes are required");

  Rng rng(derive_seed(config.seed, 0x5348));
  nn::Adam adam(config.adam);
  const std::vector<nn::Parameter*> params = model.parameters();
  std::vector<std::size_t> order(training.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    double loss_sum = 0.0;
    std::size_t batches = 0, correct = 0, seen = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      if (end - start < 2) break;  // batch norm needs two samples
      const auto idx = std::span(order).subspan(start, end - start);
      const FeatureBatch batch = make_batch(training, idx);
      model.zero_grad();
      const nn::Tensor logits = model.forward(batch, nn::Mode::kTrain);
      const nn::BatchLoss lc = nn::softmax_xent(logits, batch.labels);
      const double lr = nn::l2_penalty(params, config.gamma);
      model.backward(lc.dlogits);
      nn::add_l2_gradient(params, config.gamma);
      adam.step(params);
      loss_sum += lc.loss + lr;
      ++batches;
      for (std::size_t i = 0; i < batch.size(); ++i)
        correct += (logits[2 * i + 1] > logits[2 * i] ? 1 : 0) == batch.labels[i];
      seen += batch.size();
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = batches ? loss_sum / static_cast<double>(batches) : 0.0;
    stats.train_accuracy = seen ? static_cast<double>(correct) / static_cast<double>(seen) : 0.0;
    if (!validation.empty()) stats.val_accuracy = accuracy(model, validation);
    result.history.push_back(stats);
    if (on_epoch) on_epoch(stats);

    const bool better = validation.empty() || !result.best_val_accuracy || *stats.val_accuracy > *result.best_val_accuracy;
    if (better) {
      result.best_state = model.state();
      result.best_epoch = epoch;
      result.best_val_accuracy = stats.val_accuracy;
    }
  }
  model.load_state(result.best_state);
  return result;
}

// ---------------------------------------------------------------------------
// Checkpoints

fs::path sidecar_path(const fs::path& checkpoint) { return fs::path(checkpoint.string() + ".json"); }

void save_checkpoint(const ModelCheckpoint& ckpt, const fs::path& path) {
  nn::write_checkpoint(ckpt.tensors, path);
  const json side{{"format", "DHW1"},
                  {"stream_config", ckpt.stream},
                  {"train_config", ckpt.train},
                  {"feature_params", ckpt.features}};
  std::ofstream out(sidecar_path(path), std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint sidecar " + sidecar_path(path).string());
  out << side.dump(2) << '\n';
  if (!out) throw IoError("error writing checkpoint sidecar " + sidecar_path(path).string());
}

ModelCheckpoint load_checkpoint(const fs::path& path) {
  ModelCheckpoint ckpt;
  const fs::path side = sidecar_path(path);
  std::ifstream in(side);
  if (!in) throw IoError("cannot open checkpoint sidecar " + side.string());
  try {
    const json j = json::parse(in);
    ckpt.stream = j.at("stream_config").get<StreamConfig>();
    ckpt.train = j.at("train_config").get<TrainConfig>();
    ckpt.features = j.at("feature_params").get<FeatureParams>();
  } catch (const json::exception& e) {
    throw ParseError("malformed checkpoint sidecar " + side.string() + ": " + e.what());
  }
  ckpt.tensors = nn::read_checkpoint(path);
  return ckpt;
}

DHNet instantiate(const ModelCheckpoint& ckpt) {
  if (ckpt.features.alpha != ckpt.stream.alpha)
    throw IncompatibleArtifact("checkpoint sidecar alpha disagrees between feature and stream config");
  if (ckpt.features.deltas != std::vector<int>(kFeatureDeltas.begin(), kFeatureDeltas.end()))
    throw IncompatibleArtifact("checkpoint was trained on an unsupported block-size set");
  DHNet model(ckpt.stream, 0);
  model.load_state(ckpt.tensors);
  return model;
}

void check_compatible(const ModelCheckpoint& ckpt, const FeatureRecord& record) {
  for (std::size_t s = 0; s < 3; ++s) {
    const FeatureBlock& b = record.blocks[s];
    const int delta = kFeatureDeltas[s];
    if (b.delta != delta || b.rows != 2 * ckpt.features.alpha || b.cols != delta * delta)
      throw IncompatibleArtifact("feature block " + std::to_string(s) + " (delta " + std::to_string(b.delta) + ", " +
                                 std::to_string(b.rows) + "x" + std::to_string(b.cols) +
                                 ") does not match the checkpoint (alpha " + std::to_string(ckpt.features.alpha) + ")");
  }
}

}  // namespace dhnet
