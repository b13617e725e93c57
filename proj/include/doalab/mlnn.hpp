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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "doalab/array_model.hpp"
#include "doalab/errors.hpp"
#include "doalab/spectral.hpp"

namespace doalab::mlnn {

enum class Activation { kSigmoid, kTanh, kRelu };
std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view s);

enum class Loss { kMeanSquared, kCrossEntropy };

struct Layer {
  int inputs = 0;
  int outputs = 0;
  std::vector<double> weights;  // row-major outputs x inputs
  std::vector<double> bias;
  Activation activation = Activation::kSigmoid;

  bool operator==(const Layer&) const = default;
};

struct ModelMetadata {
  std::uint64_t seed = 0;
  std::string dataset;              // free-form description of the training data
  std::vector<double> loss_history;
  std::vector<std::pair<double, double>> thresholds;  // (target fap, tau)

  bool operator==(const ModelMetadata&) const = default;
};

// Feed-forward binary classifier with a single sigmoid output unit. Inputs are
// standardized per feature before the first layer.
struct MlnnModel {
  std::vector<double> input_mean;
  std::vector<double> input_scale;
  std::vector<Layer> layers;  // hidden layers, then the 1-unit output layer
  ModelMetadata metadata;

  // Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  static MlnnModel create(int inputs, const std::vector<int>& hidden,
                          const std::vector<Activation>& activations, std::uint64_t seed);

  int input_size() const { return layers.empty() ? 0 : layers.front().inputs; }
  std::vector<int> layer_sizes() const;
  std::vector<int> hidden_sizes() const;
  std::vector<Activation> hidden_activations() const;
  // Trainable weights plus biases.
  int weight_count() const;

  double forward(std::span<const double> x) const;

  bool operator==(const MlnnModel&) const = default;
};

// Parameter-shaped buffers, used for gradients and momentum.
struct Gradient {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;

  static Gradient zeros_like(const MlnnModel& m);
  void clear();
};

// Loss of one example; adds d(loss)/d(parameters) into `grad`.
double loss_and_gradient(const MlnnModel& model, std::span<const double> x, double label,
                         Loss loss, Gradient& grad);
double example_loss(const MlnnModel& model, std::span<const double> x, double label, Loss loss);

// Sum-normalized descending eigenvalues; `degenerate` when the trace is not positive.
struct Features {
  std::vector<double> values;
  bool degenerate = false;
};
Features eig_features(const CovarianceEstimate& cov);
Features eig_features(std::span<const double> eigs);

// Score of a trained model on raw covariance eigenvalues (any order).
double score_eigenvalues(const MlnnModel& model, std::span<const double> eigs);

struct TrainingSet {
  int n_features = 0;
  std::vector<double> features;  // row-major examples x n_features
  std::vector<int> labels;       // 0 = noise only, 1 = emitter present
  std::string description;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * static_cast<std::size_t>(n_features), static_cast<std::size_t>(n_features)};
  }
  void validate() const;  // finite features, classes balanced within one example
};

// Monte Carlo construction of a balanced eigenvalue-feature data set.
struct DatasetSpec {
  ArrayConfig array = ArrayConfig::fully_digital(64);
  int n_snapshots = 200;
  double snr_db = -20.0;
  double snr_jitter_db = 0.0;  // H1 SNR drawn uniformly in snr_db +- jitter
  double noise_power = 1.0;
  SignalModel signal_model = SignalModel::kConstantModulus;

  std::string describe() const;
};
TrainingSet generate_dataset(const DatasetSpec& spec, std::size_t n_examples, std::uint64_t seed,
                             std::uint64_t first_index = 0, int workers = 1);

// Fits input_mean / input_scale on `data`.
void fit_standardization(MlnnModel& model, const TrainingSet& data);

struct Hyper {
  double learning_rate = 0.05;
  double momentum = 0.9;
  int batch_size = 32;
  int epochs = 40;
  std::uint64_t seed = 1;
  Loss loss = Loss::kMeanSquared;
};

struct TrainResult {
  MlnnModel model;
  std::vector<double> loss_history;  // [0] before training, then one entry per epoch
};

class TrainingFailure : public NumericalFailure {
 public:
  TrainingFailure(const std::string& what, std::vector<double> history)
      : NumericalFailure(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

double mean_loss(const MlnnModel& model, const TrainingSet& data, Loss loss);
std::vector<double> scores(const MlnnModel& model, const TrainingSet& data);

// Mini-batch SGD with momentum; deterministic for a given hyper.seed.
TrainResult train(MlnnModel model, const TrainingSet& data, const Hyper& hyper);

struct CandidateScore {
  int stage = 0;
  Activation activation = Activation::kSigmoid;
  std::vector<int> shape;
  int weight_count = 0;
  double validation_loss = 0.0;
  double validation_auc = 0.0;
};

struct SelectionOptions {
  Hyper hyper;
  double dataset_ratio = 8.0;  // final training set size / weight count, within [5, 10]
  std::uint64_t seed = 1;
  int workers = 1;
};

struct SelectionReport {
  std::vector<CandidateScore> candidates;
  Activation activation = Activation::kSigmoid;
  std::vector<int> shape;
  int weight_count = 0;
  std::size_t final_dataset_size = 0;
  double dataset_ratio = 0.0;
  MlnnModel model;
  std::vector<double> final_loss_history;
};

// Makes a data set of the requested size for final training.
using DatasetFactory = std::function<TrainingSet(std::size_t n_examples)>;

// Stage 1 picks the activation on the smallest candidate shape, stage 2 the
// shape under that activation, stage 3 retrains the winner on a fresh data set
// of dataset_ratio times its weight count.
SelectionReport select_architecture(const std::vector<Activation>& candidate_activations,
                                    const std::vector<std::vector<int>>& candidate_shapes,
                                    const TrainingSet& train_set, const TrainingSet& validation,
                                    const DatasetFactory& final_data, const SelectionOptions& opts);

// Final-training size rule: n in [5 W, 10 W].
bool dataset_size_ok(std::size_t n_examples, int weight_count);

// (1 - fap) quantile of noise-only validation scores.
double decision_threshold(std::span<const double> h0_scores, double target_fap);

void save_model(const MlnnModel& model, const std::filesystem::path& path);
MlnnModel load_model(const std::filesystem::path& path);
std::string serialize_model(const MlnnModel& model);
MlnnModel deserialize_model(const std::string& text);

}  // namespace doalab::mlnn
