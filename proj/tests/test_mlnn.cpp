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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <algorithm>
#include <numeric>
#include <limits>
#include <random>

#include "doalab/errors.hpp"
#include "doalab/mlnn.hpp"

using namespace doalab;
using namespace doalab::mlnn;

namespace {

std::vector<double> random_input(int n, std::mt19937_64& gen) {
  std::normal_distribution<double> g;
  std::vector<double> x(static_cast<std::size_t>(n));
  for (double& v : x) v = g(gen);
  return x;
}

// Two Gaussian blobs separated along every axis.
TrainingSet blobs(std::size_t n, int dims, double gap, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g;
  TrainingSet s;
  s.n_features = dims;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    for (int d = 0; d < dims; ++d) s.features.push_back(g(gen) + (label ? gap : -gap));
    s.labels.push_back(label);
  }
  return s;
}

}  // namespace

TEST_CASE("backprop matches central differences") {
  std::mt19937_64 gen(1);
  for (Activation act : {Activation::kSigmoid, Activation::kTanh, Activation::kRelu}) {
    for (Loss loss : {Loss::kMeanSquared, Loss::kCrossEntropy}) {
      MlnnModel m = MlnnModel::create(5, {6, 4}, {act, act}, 9);
      m.input_mean = {0.1, -0.2, 0.0, 0.3, 0.5};
      m.input_scale = {1.5, 0.7, 1.0, 2.0, 0.9};
      for (auto& l : m.layers)
        for (double& b : l.bias) b = 0.1;
      const auto x = random_input(5, gen);
      const double label = 1.0;
      Gradient grad = Gradient::zeros_like(m);
      loss_and_gradient(m, x, label, loss, grad);
      double worst = 0.0;
      const double h = 1e-6;
      for (std::size_t l = 0; l < m.layers.size(); ++l) {
        auto probe = [&](std::vector<double>& params, const std::vector<double>& analytic) {
          for (std::size_t i = 0; i < params.size(); ++i) {
            const double keep = params[i];
            params[i] = keep + h;
            const double up = example_loss(m, x, label, loss);
            params[i] = keep - h;
            const double down = example_loss(m, x, label, loss);
            params[i] = keep;
            const double numeric = (up - down) / (2 * h);
            const double rel = std::abs(numeric - analytic[i]) / std::max(std::abs(numeric), 1e-4);
            worst = std::max(worst, rel);
          }
        };
        probe(m.layers[l].weights, grad.weights[l]);
        probe(m.layers[l].bias, grad.bias[l]);
      }
      INFO("activation ", to_string(act));
      CHECK(worst <= 1e-5);
    }
  }
}

TEST_CASE("gradients accumulate across calls") {
  MlnnModel m = MlnnModel::create(3, {4}, {Activation::kTanh}, 2);
  std::vector<double> x{0.3, -1.0, 2.0};
  Gradient once = Gradient::zeros_like(m), twice = Gradient::zeros_like(m);
  loss_and_gradient(m, x, 0.0, Loss::kMeanSquared, once);
  loss_and_gradient(m, x, 0.0, Loss::kMeanSquared, twice);
  loss_and_gradient(m, x, 0.0, Loss::kMeanSquared, twice);
  for (std::size_t i = 0; i < once.weights[0].size(); ++i)
    CHECK(twice.weights[0][i] == doctest::Approx(2 * once.weights[0][i]));
}

TEST_CASE("a separable toy problem is learned") {
  const auto train_set = blobs(400, 4, 1.5, 3);
  MlnnModel m = MlnnModel::create(4, {8}, {Activation::kSigmoid}, 4);
  fit_standardization(m, train_set);
  Hyper hyper;
  hyper.epochs = 30;
  const auto r = train(m, train_set, hyper);
  CHECK(r.loss_history.size() == 31);
  CHECK(r.loss_history.back() < 0.5 * r.loss_history.front());
  const auto test_set = blobs(400, 4, 1.5, 5);
  const auto s = scores(r.model, test_set);
  int correct = 0;
  for (std::size_t i = 0; i < s.size(); ++i) correct += (s[i] > 0.5) == (test_set.labels[i] == 1);
  CHECK(correct >= 380);
}

TEST_CASE("zero learning rate leaves the model untouched") {
  const auto data = blobs(64, 3, 1.0, 1);
  MlnnModel m = MlnnModel::create(3, {5}, {Activation::kRelu}, 8);
  Hyper hyper;
  hyper.learning_rate = 0.0;
  hyper.epochs = 3;
  const auto r = train(m, data, hyper);
  CHECK(r.model.layers == m.layers);
  CHECK(r.loss_history.front() == r.loss_history.back());
}

TEST_CASE("training is deterministic for a fixed seed") {
  const auto data = blobs(128, 3, 1.0, 2);
  const MlnnModel m = MlnnModel::create(3, {4, 3}, {Activation::kTanh, Activation::kTanh}, 5);
  Hyper hyper;
  hyper.epochs = 5;
  CHECK(train(m, data, hyper).model == train(m, data, hyper).model);
  hyper.seed = 2;
  CHECK_FALSE(train(m, data, hyper).model.layers == train(m, data, Hyper{}).model.layers);
}

TEST_CASE("diverging training raises with its history") {
  const auto data = blobs(64, 2, 1.0, 2);
  MlnnModel m = MlnnModel::create(2, {3}, {Activation::kRelu}, 1);
  m.layers[0].weights[0] = std::numeric_limits<double>::quiet_NaN();
  Hyper hyper;
  hyper.epochs = 4;
  try {
    (void)train(m, data, hyper);
    FAIL("expected a training failure");
  } catch (const TrainingFailure& f) {
    CHECK_FALSE(f.history().empty());
  }
}

TEST_CASE("model files round-trip bit-exactly") {
  MlnnModel m = MlnnModel::create(4, {3, 2}, {Activation::kSigmoid, Activation::kRelu}, 77);
  m.input_mean = {0.1, 1.0 / 3.0, -2.5e-300, 7.0};
  m.input_scale = {1.0, std::nextafter(1.0, 2.0), 3.0, 0.1};
  m.metadata.dataset = "unit test, \"quoted\"";
  m.metadata.loss_history = {0.25, 0.125, 1e-17};
  m.metadata.thresholds = {{0.01, 0.93}, {0.1, 0.61}};
  const auto text = serialize_model(m);
  const MlnnModel back = deserialize_model(text);
  CHECK(back == m);
  CHECK(serialize_model(back) == text);

  const auto path = std::filesystem::temp_directory_path() / "doalab_model_roundtrip.json";
  save_model(m, path);
  CHECK(load_model(path) == m);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_model(path), ConfigError);
  CHECK_THROWS_AS(deserialize_model("{\"format\": \"something-else\"}"), ConfigError);
  CHECK_THROWS_AS(deserialize_model("not json"), ConfigError);
}

TEST_CASE("eigenvalue features are sorted and sum to one") {
  const std::vector<double> eigs{0.5, 3.0, 1.5};
  const auto f = eig_features(std::span<const double>(eigs));
  REQUIRE(f.values.size() == 3);
  CHECK(f.values[0] == doctest::Approx(0.6));
  CHECK(f.values[2] == doctest::Approx(0.1));
  CHECK_FALSE(f.degenerate);
  CHECK(eig_features(std::span<const double>(std::vector<double>{0.0, 0.0})).degenerate);
}

TEST_CASE("dataset generation is balanced, reproducible and worker-independent") {
  DatasetSpec spec;
  spec.array = ArrayConfig::fully_digital(8);
  spec.n_snapshots = 20;
  spec.snr_db = 0.0;
  const auto a = generate_dataset(spec, 50, 3, 0, 1);
  const auto b = generate_dataset(spec, 50, 3, 0, 4);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  a.validate();
  CHECK(std::count(a.labels.begin(), a.labels.end(), 1) == 25);
}

TEST_CASE("architecture selection follows the three stages") {
  const auto train_set = blobs(200, 4, 1.0, 10);
  const auto val = blobs(200, 4, 1.0, 11);
  SelectionOptions opts;
  opts.hyper.epochs = 5;
  opts.dataset_ratio = 6.0;
  std::size_t asked = 0;
  const DatasetFactory factory = [&](std::size_t n) {
    asked = n;
    return blobs(n, 4, 1.0, 12);
  };
  const auto rep = select_architecture({Activation::kSigmoid, Activation::kTanh}, {{2}, {3}, {2, 2}}, train_set, val,
                                       factory, opts);
  int per_stage[4] = {0, 0, 0, 0};
  for (const auto& c : rep.candidates) per_stage[c.stage] += 1;
  CHECK(per_stage[1] == 2);
  CHECK(per_stage[2] == 3);
  CHECK(per_stage[3] == 1);
  CHECK(rep.weight_count == rep.model.weight_count());
  CHECK(dataset_size_ok(rep.final_dataset_size, rep.weight_count));
  CHECK(asked == rep.final_dataset_size);
  CHECK(rep.dataset_ratio >= 5.0);
  CHECK(rep.dataset_ratio <= 10.0);
  CHECK(dataset_size_ok(50, 10));
  CHECK_FALSE(dataset_size_ok(49, 10));
  CHECK_FALSE(dataset_size_ok(101, 10));
}

TEST_CASE("decision threshold needs enough noise scores") {
  std::vector<double> h0(100);
  std::iota(h0.begin(), h0.end(), 0.0);
  CHECK(decision_threshold(h0, 0.1) == 89.0);
  CHECK_THROWS_AS(decision_threshold(h0, 0.01), ContractError);
}
