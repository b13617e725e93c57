// Copyright 2026 The doa-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "doalab/mlnn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include "doalab/detect.hpp"
#include "doalab/kernels.hpp"
#include "doalab/parallel.hpp"
#include "doalab/rng.hpp"

namespace doalab::mlnn {
namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double activate(Activation a, double z) {
  switch (a) {
    case Activation::kSigmoid:
      return sigmoid(z);
    case Activation::kTanh:
      return std::tanh(z);
    case Activation::kRelu:
      return z > 0.0 || std::isnan(z) ? z : 0.0;  // let NaN through
  }
  return z;
}

double activation_slope(Activation a, double z, double y) {
  switch (a) {
    case Activation::kSigmoid:
      return y * (1.0 - y);
    case Activation::kTanh:
      return 1.0 - y * y;
    case Activation::kRelu:
      return z > 0.0 ? 1.0 : 0.0;
  }
  return 1.0;
}

struct Workspace {
  std::vector<double> input;
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> post;
  std::vector<double> delta;
  std::vector<double> delta_prev;
};

double run_forward(const MlnnModel& model, std::span<const double> x, Workspace& ws) {
  if (static_cast<int>(x.size()) != model.input_size())
    throw ContractError(fmt::format("MLNN expects {} features, got {}", model.input_size(), x.size()));
  ws.input.assign(x.begin(), x.end());
  if (!model.input_mean.empty()) {
    for (std::size_t i = 0; i < ws.input.size(); ++i)
      ws.input[i] = (ws.input[i] - model.input_mean[i]) / model.input_scale[i];
  }
  ws.pre.resize(model.layers.size());
  ws.post.resize(model.layers.size());
  const auto& k = kernels::active();
  std::span<const double> a = ws.input;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const Layer& layer = model.layers[l];
    ws.pre[l].resize(static_cast<std::size_t>(layer.outputs));
    ws.post[l].resize(static_cast<std::size_t>(layer.outputs));
    k.affine(layer.weights, a, layer.bias, ws.pre[l]);
    for (std::size_t o = 0; o < ws.pre[l].size(); ++o) ws.post[l][o] = activate(layer.activation, ws.pre[l][o]);
    a = ws.post[l];
  }
  return ws.post.back().front();
}

Workspace& thread_workspace() {
  thread_local Workspace ws;
  return ws;
}

double loss_value(double y, double label, Loss loss) {
  if (loss == Loss::kMeanSquared) return (y - label) * (y - label);
  constexpr double kEps = 1e-15;
  const double yc = std::clamp(y, kEps, 1.0 - kEps);
  return -(label * std::log(yc) + (1.0 - label) * std::log(1.0 - yc));
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::kSigmoid:
      return "sigmoid";
    case Activation::kTanh:
      return "tanh";
    case Activation::kRelu:
      return "relu";
  }
  return "?";
}

Activation activation_from_string(std::string_view s) {
  if (s == "sigmoid") return Activation::kSigmoid;
  if (s == "tanh") return Activation::kTanh;
  if (s == "relu") return Activation::kRelu;
  throw ConfigError(fmt::format("unknown activation '{}'", s));
}

MlnnModel MlnnModel::create(int inputs, const std::vector<int>& hidden,
                            const std::vector<Activation>& activations, std::uint64_t seed) {
  if (inputs < 1) throw ContractError("MLNN needs at least one input");
  if (hidden.size() != activations.size())
    throw ContractError("one activation per hidden layer required");
  MlnnModel m;
  Philox4x32 rng(seed, stream_id(0, StreamPurpose::kInit));
  int fan_in = inputs;
  auto add_layer = [&](int outputs, Activation act) {
    if (outputs < 1) throw ContractError("hidden layers need at least one unit");
    Layer layer;
    layer.inputs = fan_in;
    layer.outputs = outputs;
    layer.activation = act;
    const double limit = std::sqrt(6.0 / (fan_in + outputs));
    std::uniform_real_distribution<double> dist(-limit, limit);
    layer.weights.resize(static_cast<std::size_t>(fan_in) * static_cast<std::size_t>(outputs));
    for (double& w : layer.weights) w = dist(rng);
    layer.bias.assign(static_cast<std::size_t>(outputs), 0.0);
    m.layers.push_back(std::move(layer));
    fan_in = outputs;
  };
  for (std::size_t i = 0; i < hidden.size(); ++i) add_layer(hidden[i], activations[i]);
  add_layer(1, Activation::kSigmoid);
  m.metadata.seed = seed;
  return m;
}

std::vector<int> MlnnModel::layer_sizes() const {
  std::vector<int> sizes{input_size()};
  for (const Layer& l : layers) sizes.push_back(l.outputs);
  return sizes;
}

std::vector<int> MlnnModel::hidden_sizes() const {
  std::vector<int> sizes;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) sizes.push_back(layers[l].outputs);
  return sizes;
}

std::vector<Activation> MlnnModel::hidden_activations() const {
  std::vector<Activation> acts;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) acts.push_back(layers[l].activation);
  return acts;
}

int MlnnModel::weight_count() const {
  int total = 0;
  for (const Layer& l : layers) total += l.inputs * l.outputs + l.outputs;
  return total;
}

double MlnnModel::forward(std::span<const double> x) const { return run_forward(*this, x, thread_workspace()); }

Gradient Gradient::zeros_like(const MlnnModel& m) {
  Gradient g;
  for (const Layer& l : m.layers) {
    g.weights.emplace_back(l.weights.size(), 0.0);
    g.bias.emplace_back(l.bias.size(), 0.0);
  }
  return g;
}

void Gradient::clear() {
  for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
  for (auto& b : bias) std::fill(b.begin(), b.end(), 0.0);
}

double example_loss(const MlnnModel& model, std::span<const double> x, double label, Loss loss) {
  return loss_value(model.forward(x), label, loss);
}

double loss_and_gradient(const MlnnModel& model, std::span<const double> x, double label,
                         Loss loss, Gradient& grad) {
  Workspace& ws = thread_workspace();
  const double y = run_forward(model, x, ws);
  const std::size_t n_layers = model.layers.size();

  ws.delta.assign(1, loss == Loss::kMeanSquared ? 2.0 * (y - label) * y * (1.0 - y) : y - label);
  for (std::size_t l = n_layers; l-- > 0;) {
    const Layer& layer = model.layers[l];
    const std::vector<double>& prev = l == 0 ? ws.input : ws.post[l - 1];
    const auto in = static_cast<std::size_t>(layer.inputs);
    auto& gw = grad.weights[l];
    auto& gb = grad.bias[l];
    for (std::size_t o = 0; o < ws.delta.size(); ++o) {
      const double d = ws.delta[o];
      gb[o] += d;
      double* row = gw.data() + o * in;
      for (std::size_t i = 0; i < in; ++i) row[i] += d * prev[i];
    }
    if (l == 0) break;
    const Layer& below = model.layers[l - 1];
    ws.delta_prev.assign(in, 0.0);
    for (std::size_t o = 0; o < ws.delta.size(); ++o) {
      const double d = ws.delta[o];
      const double* row = layer.weights.data() + o * in;
      for (std::size_t i = 0; i < in; ++i) ws.delta_prev[i] += row[i] * d;
    }
    for (std::size_t i = 0; i < in; ++i)
      ws.delta_prev[i] *= activation_slope(below.activation, ws.pre[l - 1][i], ws.post[l - 1][i]);
    std::swap(ws.delta, ws.delta_prev);
  }
  return loss_value(y, label, loss);
}

Features eig_features(const CovarianceEstimate& cov) {
  return eig_features(std::span<const double>(cov.eigenvalues.data(), static_cast<std::size_t>(cov.eigenvalues.size())));
}

Features eig_features(std::span<const double> eigs) {
  Features f;
  f.values.assign(eigs.begin(), eigs.end());
  std::sort(f.values.begin(), f.values.end(), std::greater<>());
  const double total = std::accumulate(f.values.begin(), f.values.end(), 0.0);
  if (!(total > 0.0)) {
    f.degenerate = true;
    std::fill(f.values.begin(), f.values.end(), 0.0);
    return f;
  }
  for (double& v : f.values) v = std::max(0.0, v / total);
  return f;
}

void TrainingSet::validate() const {
  if (n_features < 1) throw ContractError("training set has no features");
  if (features.size() != labels.size() * static_cast<std::size_t>(n_features))
    throw ContractError("training set feature matrix does not match label count");
  for (double v : features)
    if (!std::isfinite(v)) throw ContractError("training set contains non-finite features");
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  const auto negatives = std::count(labels.begin(), labels.end(), 0);
  if (positives + negatives != static_cast<std::ptrdiff_t>(labels.size()))
    throw ContractError("labels must be 0 or 1");
  if (std::abs(positives - negatives) > 1) throw ContractError("training classes are not balanced");
}

std::string DatasetSpec::describe() const {
  return fmt::format("N={} K={} M={} N_F={} L={} snr_db={} jitter_db={} signal={}", array.n_total,
                     array.k_sub, array.m_sub, array.n_fd, n_snapshots, snr_db, snr_jitter_db,
                     signal_model == SignalModel::kConstantModulus ? "constant-modulus" : "gaussian");
}

TrainingSet generate_dataset(const DatasetSpec& spec, std::size_t n_examples, std::uint64_t seed,
                             std::uint64_t first_index, int workers) {
  TrainingSet set;
  set.n_features = spec.array.n_total;
  set.features.resize(n_examples * static_cast<std::size_t>(set.n_features));
  set.labels.resize(n_examples);
  set.description = fmt::format("{} seed={} first={} n={}", spec.describe(), seed, first_index, n_examples);
  parallel_for(n_examples, workers, [&](std::size_t i) {
    const std::uint64_t index = first_index + i;
    const int label = static_cast<int>(index % 2);
    auto rng = trial_stream(seed, index, StreamPurpose::kTraining);
    EmitterScenario scen = EmitterScenario::noise_only(spec.n_snapshots, spec.noise_power);
    scen.signal_model = spec.signal_model;
    if (label == 1) {
      std::uniform_real_distribution<double> angle(-90.0, 90.0);
      double theta = angle(rng);
      while (theta <= -90.0) theta = angle(rng);
      double snr_db = spec.snr_db;
      if (spec.snr_jitter_db > 0.0)
        snr_db += std::uniform_real_distribution<double>(-spec.snr_jitter_db, spec.snr_jitter_db)(rng);
      scen.directions_deg = {theta};
      scen.powers = {spec.noise_power * std::pow(10.0, snr_db / 10.0)};
    }
    const auto cov = sample_covariance(synthesize_snapshots(spec.array, scen, rng), EigenMode::kValuesOnly);
    const Features f = eig_features(cov);
    std::copy(f.values.begin(), f.values.end(), set.features.begin() + static_cast<std::ptrdiff_t>(i * f.values.size()));
    set.labels[i] = label;
  });
  return set;
}

void fit_standardization(MlnnModel& model, const TrainingSet& data) {
  const auto p = static_cast<std::size_t>(data.n_features);
  if (static_cast<int>(p) != model.input_size()) throw ContractError("feature count does not match model");
  std::vector<double> mean(p, 0.0), sq(p, 0.0);
  const double n = static_cast<double>(data.size());
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto row = data.row(r);
    for (std::size_t i = 0; i < p; ++i) mean[i] += row[i];
  }
  for (double& m : mean) m /= n;
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto row = data.row(r);
    for (std::size_t i = 0; i < p; ++i) sq[i] += (row[i] - mean[i]) * (row[i] - mean[i]);
  }
  model.input_mean = mean;
  model.input_scale.resize(p);
  for (std::size_t i = 0; i < p; ++i) {
    const double sd = std::sqrt(sq[i] / n);
    model.input_scale[i] = sd > 1e-12 ? sd : 1.0;
  }
}

double score_eigenvalues(const MlnnModel& model, std::span<const double> eigs) {
  if (static_cast<int>(eigs.size()) != model.input_size())
    throw ContractError(fmt::format("model expects {} eigenvalues, got {}", model.input_size(), eigs.size()));
  const Features f = eig_features(eigs);
  return model.forward(f.values);
}

double mean_loss(const MlnnModel& model, const TrainingSet& data, Loss loss) {
  double total = 0.0;
  for (std::size_t r = 0; r < data.size(); ++r) total += example_loss(model, data.row(r), data.labels[r], loss);
  return total / static_cast<double>(data.size());
}

std::vector<double> scores(const MlnnModel& model, const TrainingSet& data) {
  std::vector<double> out(data.size());
  for (std::size_t r = 0; r < data.size(); ++r) out[r] = model.forward(data.row(r));
  return out;
}

TrainResult train(MlnnModel model, const TrainingSet& data, const Hyper& hyper) {
  data.validate();
  if (data.n_features != model.input_size()) throw ContractError("feature count does not match model");
  if (!(hyper.learning_rate >= 0.0) || hyper.batch_size < 1 || hyper.epochs < 0)
    throw ContractError("invalid training hyperparameters");
  TrainResult result;
  result.loss_history.push_back(mean_loss(model, data, hyper.loss));
  Gradient grad = Gradient::zeros_like(model);
  Gradient velocity = Gradient::zeros_like(model);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(hyper.batch_size);

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    Philox4x32 rng(hyper.seed, stream_id(static_cast<std::uint64_t>(epoch), StreamPurpose::kShuffle));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      grad.clear();
      for (std::size_t j = start; j < end; ++j)
        loss_and_gradient(model, data.row(order[j]), data.labels[order[j]], hyper.loss, grad);
      const double step = hyper.learning_rate / static_cast<double>(end - start);
      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        auto update = [&](std::vector<double>& param, std::vector<double>& vel, const std::vector<double>& g) {
          for (std::size_t i = 0; i < param.size(); ++i) {
            vel[i] = hyper.momentum * vel[i] - step * g[i];
            param[i] += vel[i];
          }
        };
        update(model.layers[l].weights, velocity.weights[l], grad.weights[l]);
        update(model.layers[l].bias, velocity.bias[l], grad.bias[l]);
      }
    }
    const double epoch_loss = mean_loss(model, data, hyper.loss);
    result.loss_history.push_back(epoch_loss);
    if (!std::isfinite(epoch_loss))
      throw TrainingFailure(fmt::format("training diverged at epoch {}", epoch + 1), result.loss_history);
  }
  model.metadata.loss_history = result.loss_history;
  result.model = std::move(model);
  return result;
}

bool dataset_size_ok(std::size_t n_examples, int weight_count) {
  const double n = static_cast<double>(n_examples);
  return n >= 5.0 * weight_count && n <= 10.0 * weight_count;
}

namespace {

int shape_weight_count(int inputs, const std::vector<int>& shape) {
  int total = 0, fan_in = inputs;
  for (int h : shape) {
    total += fan_in * h + h;
    fan_in = h;
  }
  return total + fan_in + 1;
}

std::uint64_t candidate_seed(std::uint64_t seed, std::uint64_t index) {
  Philox4x32 rng(seed, stream_id(index, StreamPurpose::kInit));
  return rng();
}

double validation_auc(const MlnnModel& model, const TrainingSet& val) {
  std::vector<double> h0, h1;
  for (std::size_t r = 0; r < val.size(); ++r) (val.labels[r] ? h1 : h0).push_back(model.forward(val.row(r)));
  if (h0.empty() || h1.empty()) return 0.5;
  return roc_auc(h0, h1);
}

}  // namespace

SelectionReport select_architecture(const std::vector<Activation>& candidate_activations,
                                    const std::vector<std::vector<int>>& candidate_shapes,
                                    const TrainingSet& train_set, const TrainingSet& validation,
                                    const DatasetFactory& final_data, const SelectionOptions& opts) {
  if (candidate_activations.empty() || candidate_shapes.empty())
    throw ContractError("architecture search needs at least one activation and one shape");
  if (!(opts.dataset_ratio >= 5.0 && opts.dataset_ratio <= 10.0))
    throw ContractError("final data set ratio must lie in [5, 10]");
  train_set.validate();
  validation.validate();
  const int inputs = train_set.n_features;
  SelectionReport report;
  std::uint64_t index = 0;

  auto evaluate = [&](int stage, Activation act, const std::vector<int>& shape) {
    MlnnModel m = MlnnModel::create(inputs, shape, std::vector<Activation>(shape.size(), act),
                                    candidate_seed(opts.seed, index++));
    fit_standardization(m, train_set);
    const TrainResult r = train(std::move(m), train_set, opts.hyper);
    CandidateScore score;
    score.stage = stage;
    score.activation = act;
    score.shape = shape;
    score.weight_count = r.model.weight_count();
    score.validation_loss = mean_loss(r.model, validation, opts.hyper.loss);
    score.validation_auc = validation_auc(r.model, validation);
    report.candidates.push_back(score);
    return score;
  };

  // Stage 1: activation on the smallest shape.
  const auto small = std::min_element(candidate_shapes.begin(), candidate_shapes.end(),
                                      [&](const auto& a, const auto& b) {
                                        return shape_weight_count(inputs, a) < shape_weight_count(inputs, b);
                                      });
  double best_loss = std::numeric_limits<double>::infinity();
  CandidateScore stage1_best;
  for (Activation act : candidate_activations) {
    const CandidateScore s = evaluate(1, act, *small);
    if (s.validation_loss < best_loss) {
      best_loss = s.validation_loss;
      stage1_best = s;
    }
  }
  report.activation = stage1_best.activation;

  // Stage 2: depth and width under the chosen activation.
  best_loss = std::numeric_limits<double>::infinity();
  for (const auto& shape : candidate_shapes) {
    const CandidateScore s = shape == *small ? [&] {
      CandidateScore again = stage1_best;
      again.stage = 2;
      report.candidates.push_back(again);
      return again;
    }()
                                             : evaluate(2, report.activation, shape);
    if (s.validation_loss < best_loss) {
      best_loss = s.validation_loss;
      report.shape = s.shape;
    }
  }

  // Stage 3: retrain the winner on a data set sized to its weight count.
  MlnnModel final_model = MlnnModel::create(inputs, report.shape,
                                            std::vector<Activation>(report.shape.size(), report.activation),
                                            candidate_seed(opts.seed, index++));
  report.weight_count = final_model.weight_count();
  auto n_final = static_cast<std::size_t>(std::llround(opts.dataset_ratio * report.weight_count));
  n_final += n_final % 2;
  if (!dataset_size_ok(n_final, report.weight_count)) n_final -= 2;
  const TrainingSet final_set = final_data(n_final);
  if (!dataset_size_ok(final_set.size(), report.weight_count))
    throw ContractError(fmt::format("final training set of {} examples violates the 5-10x rule for {} weights",
                                    final_set.size(), report.weight_count));
  fit_standardization(final_model, final_set);
  TrainResult r = train(std::move(final_model), final_set, opts.hyper);
  report.final_dataset_size = final_set.size();
  report.dataset_ratio = static_cast<double>(final_set.size()) / report.weight_count;
  report.final_loss_history = r.loss_history;
  report.model = std::move(r.model);
  report.model.metadata.seed = opts.seed;
  report.model.metadata.dataset = final_set.description;
  CandidateScore final_score;
  final_score.stage = 3;
  final_score.activation = report.activation;
  final_score.shape = report.shape;
  final_score.weight_count = report.weight_count;
  final_score.validation_loss = mean_loss(report.model, validation, opts.hyper.loss);
  final_score.validation_auc = validation_auc(report.model, validation);
  report.candidates.push_back(final_score);
  return report;
}

double decision_threshold(std::span<const double> h0_scores, double target_fap) {
  if (!(target_fap > 0.0 && target_fap < 1.0)) throw ContractError("false-alarm target must lie in (0, 1)");
  const double needed = std::ceil(10.0 / target_fap);
  if (static_cast<double>(h0_scores.size()) < needed)
    throw ContractError(fmt::format("{} noise-only scores cannot set a threshold for fap {} (need {})",
                                    h0_scores.size(), target_fap, needed));
  return upper_quantile({h0_scores.begin(), h0_scores.end()}, target_fap);
}

namespace {

constexpr const char* kFormatTag = "doa-lab-mlnn";
constexpr int kFormatVersion = 1;

}  // namespace

std::string serialize_model(const MlnnModel& model) {
  nlohmann::ordered_json j;
  j["format"] = kFormatTag;
  j["version"] = kFormatVersion;
  j["layer_sizes"] = model.layer_sizes();
  std::vector<std::string> acts;
  for (const Layer& l : model.layers) acts.emplace_back(to_string(l.activation));
  j["activations"] = acts;
  j["input_mean"] = model.input_mean;
  j["input_scale"] = model.input_scale;
  auto layers = nlohmann::ordered_json::array();
  for (const Layer& l : model.layers) {
    nlohmann::ordered_json lj;
    lj["weights"] = l.weights;
    lj["bias"] = l.bias;
    layers.push_back(lj);
  }
  j["layers"] = layers;
  nlohmann::ordered_json meta;
  meta["seed"] = model.metadata.seed;
  meta["dataset"] = model.metadata.dataset;
  meta["loss_history"] = model.metadata.loss_history;
  auto th = nlohmann::ordered_json::array();
  for (const auto& [fap, tau] : model.metadata.thresholds) th.push_back({{"fap", fap}, {"tau", tau}});
  meta["thresholds"] = th;
  j["metadata"] = meta;
  return j.dump(1) + "\n";
}

MlnnModel deserialize_model(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("model file is not valid JSON: {}", e.what()));
  }
  try {
    if (j.at("format").get<std::string>() != kFormatTag) throw ConfigError("not a doa-lab MLNN model file");
    if (j.at("version").get<int>() != kFormatVersion)
      throw ConfigError(fmt::format("unsupported model file version {}", j.at("version").get<int>()));
    const auto sizes = j.at("layer_sizes").get<std::vector<int>>();
    const auto acts = j.at("activations").get<std::vector<std::string>>();
    const auto& layers = j.at("layers");
    if (sizes.size() < 2 || acts.size() != sizes.size() - 1 || layers.size() != sizes.size() - 1)
      throw ConfigError("model file layer lists are inconsistent");
    if (sizes.back() != 1 || acts.back() != "sigmoid")
      throw ConfigError("model output layer must be a single sigmoid unit");
    MlnnModel m;
    m.input_mean = j.at("input_mean").get<std::vector<double>>();
    m.input_scale = j.at("input_scale").get<std::vector<double>>();
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      Layer layer;
      layer.inputs = sizes[l];
      layer.outputs = sizes[l + 1];
      layer.activation = activation_from_string(acts[l]);
      layer.weights = layers[l].at("weights").get<std::vector<double>>();
      layer.bias = layers[l].at("bias").get<std::vector<double>>();
      if (layer.weights.size() != static_cast<std::size_t>(layer.inputs) * static_cast<std::size_t>(layer.outputs) ||
          layer.bias.size() != static_cast<std::size_t>(layer.outputs))
        throw ConfigError(fmt::format("model layer {} has the wrong number of parameters", l));
      m.layers.push_back(std::move(layer));
    }
    if (!m.input_mean.empty() &&
        (m.input_mean.size() != static_cast<std::size_t>(sizes[0]) || m.input_scale.size() != m.input_mean.size()))
      throw ConfigError("model input standardization has the wrong length");
    const auto& meta = j.at("metadata");
    m.metadata.seed = meta.at("seed").get<std::uint64_t>();
    m.metadata.dataset = meta.at("dataset").get<std::string>();
    m.metadata.loss_history = meta.at("loss_history").get<std::vector<double>>();
    for (const auto& t : meta.at("thresholds"))
      m.metadata.thresholds.emplace_back(t.at("fap").get<double>(), t.at("tau").get<double>());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("malformed model file: {}", e.what()));
  }
}

void save_model(const MlnnModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot write model file {}", path.string()));
  out << serialize_model(model);
}

MlnnModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read model file {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace doalab::mlnn
