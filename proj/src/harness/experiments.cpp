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

#include "doalab/harness/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "doalab/adc_quant.hpp"
#include "doalab/crlb.hpp"
#include "doalab/doa_est.hpp"
#include "doalab/errors.hpp"
#include "doalab/harness/csv.hpp"
#include "doalab/parallel.hpp"
#include "doalab/spectral.hpp"

namespace doalab::harness {
namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Common {
  std::uint64_t seed = 0;
  int trials = 0;
  int workers = 1;
  std::string digest;
};

Common common(const Config& cfg) {
  Common c;
  c.seed = cfg.unsigned64("run.seed");
  c.trials = cfg.integer("run.trials");
  c.workers = cfg.integer("run.workers");
  c.digest = cfg.digest_hex();
  if (c.trials < 100) throw ConfigError(fmt::format("run.trials = {} is below the minimum of 100", c.trials));
  if (c.workers < 1) throw ConfigError("run.workers must be at least 1");
  return c;
}

void warn(const std::string& msg) { fmt::print(stderr, "doa-lab: warning: {}\n", msg); }

SignalModel signal_model(const Config& cfg) {
  const auto& s = cfg.text("scenario.signal");
  if (s == "constant-modulus") return SignalModel::kConstantModulus;
  if (s == "gaussian") return SignalModel::kComplexGaussian;
  throw ConfigError(fmt::format("scenario.signal = '{}' (constant-modulus or gaussian)", s));
}

double single_snr(const Config& cfg) {
  const auto snrs = cfg.reals("scenario.snr_db");
  if (snrs.size() != 1)
    throw ConfigError(fmt::format("{} takes exactly one scenario.snr_db value", to_string(cfg.experiment())));
  return snrs.front();
}

int positive(const Config& cfg, const std::string& key, int minimum = 1) {
  const int v = cfg.integer(key);
  if (v < minimum) throw ConfigError(fmt::format("{} must be at least {}", key, minimum));
  return v;
}

double theta_of(const Config& cfg) {
  const double theta = cfg.real("scenario.theta_deg");
  if (!(std::abs(theta) < 90.0)) throw ConfigError("scenario.theta_deg must lie strictly inside (-90, 90)");
  return theta;
}

double noise_of(const Config& cfg) {
  const double p = cfg.real("scenario.noise_power");
  if (!(p > 0.0)) throw ConfigError("scenario.noise_power must be positive");
  return p;
}

double spacing_of(const Config& cfg) {
  const double d = cfg.real("array.spacing");
  if (!(d > 0.0)) throw ConfigError("array.spacing must be positive");
  return d;
}

EmitterScenario emitter(const Config& cfg, double snr_db, int snapshots) {
  auto scen = EmitterScenario::single(theta_of(cfg), snr_db, snapshots, noise_of(cfg));
  scen.signal_model = signal_model(cfg);
  return scen;
}

// Degrees of error, NaN when the estimator gave up.
template <class F>
double attempt(F&& estimate, double theta_deg, double* consumed = nullptr, double* u = nullptr) {
  try {
    const DoaEstimate est = estimate();
    if (consumed) *consumed = est.snapshots_consumed;
    if (u) *u = est.u;
    return est.degrees - theta_deg;
  } catch (const EstimationFailure&) {
    if (consumed) *consumed = kNaN;
    if (u) *u = kNaN;
    return kNaN;
  }
}

MethodStats summarize(const std::vector<double>& err_deg, const std::vector<double>& u_hat,
                      const std::vector<double>& consumed, double u_true, double period) {
  MethodStats s;
  double sum = 0.0, sum_sq = 0.0, snaps = 0.0;
  int ok = 0, resolved = 0;
  for (std::size_t i = 0; i < err_deg.size(); ++i) {
    if (std::isnan(err_deg[i])) {
      ++s.failures;
      continue;
    }
    const double e2 = err_deg[i] * err_deg[i];
    sum += e2;
    sum_sq += e2 * e2;
    snaps += consumed[i];
    if (std::abs(u_hat[i] - u_true) < 0.5 * period) ++resolved;
    ++ok;
  }
  if (ok == 0) {
    s.rmse_deg = s.rmse_se_deg = s.snapshots = kNaN;
    return s;
  }
  const double mse = sum / ok;
  const double var_e2 = ok > 1 ? std::max(0.0, (sum_sq - ok * mse * mse) / (ok - 1)) : 0.0;
  s.rmse_deg = std::sqrt(mse);
  s.rmse_se_deg = mse > 0.0 ? std::sqrt(var_e2 / ok) / (2.0 * s.rmse_deg) : 0.0;
  s.resolved = static_cast<double>(resolved) / static_cast<double>(err_deg.size());
  s.snapshots = snaps / ok;
  return s;
}

double sqrt_deg(double crlb_rad2) { return std::sqrt(crlb_rad2) * kRadToDeg; }

}  // namespace

std::filesystem::path output_dir(const Config& cfg) { return cfg.text("run.out"); }

std::filesystem::path model_path(const Config& cfg) {
  const auto& m = cfg.text("run.model");
  return m.empty() ? output_dir(cfg) / "mlnn_model.json" : std::filesystem::path(m);
}

// ---- roc -------------------------------------------------------------------

RocResult run_roc(const Config& cfg) {
  if (cfg.experiment() != Experiment::kRoc) throw ContractError("run_roc needs a roc config");
  const Common c = common(cfg);
  const int n = positive(cfg, "array.antennas", 2);
  const int len = positive(cfg, "scenario.snapshots");
  const double snr = single_snr(cfg);
  const int calib_trials = positive(cfg, "detect.calibration_trials", 100);
  if (cfg.integer("array.subarray") != 1)
    throw ConfigError("roc runs on a fully-digital array; set array.subarray = 1");
  GlrtForm form = GlrtForm::kSphericity;
  if (cfg.text("detect.glrt") == "rank-one") form = GlrtForm::kRankOne;
  else if (cfg.text("detect.glrt") != "sphericity")
    throw ConfigError(fmt::format("detect.glrt = '{}' (sphericity or rank-one)", cfg.text("detect.glrt")));
  const auto faps = cfg.reals("detect.fap");
  for (double f : faps) {
    if (!(f > 0.0 && f < 1.0)) throw ConfigError("detect.fap values must lie in (0, 1)");
    if (calib_trials < std::ceil(100.0 / f - 1e-9))
      throw ConfigError(fmt::format("detect.calibration_trials = {} cannot resolve fap {}", calib_trials, f));
  }

  const auto mpath = model_path(cfg);
  if (!std::filesystem::exists(mpath))
    throw ConfigError(fmt::format("MLNN model {} not found; train one first with `doa-lab train-mlnn --config <file>`",
                                  mpath.string()));
  const mlnn::MlnnModel model = mlnn::load_model(mpath);
  if (model.input_size() != n)
    throw ConfigError(fmt::format("model {} expects {} antennas, config has {}", mpath.string(), model.input_size(), n));

  const ArrayConfig array = ArrayConfig::fully_digital(n, spacing_of(cfg));
  const double noise = noise_of(cfg);
  auto h0_scen = EmitterScenario::noise_only(len, noise);
  auto h1_scen = emitter(cfg, snr, len);

  RocResult res;
  res.detectors = {"glrt", "r-maxev-minev", "mlnn"};
  res.trials = c.trials;
  res.calibration_trials = calib_trials;
  constexpr std::size_t kDet = 3;
  auto score_all = [&](std::span<const double> eigs) {
    return std::array<double, kDet>{glrt_statistic(eigs, form).value, maxmin_statistic(eigs).value,
                                    mlnn::score_eigenvalues(model, eigs)};
  };
  auto evaluate = [&](const EmitterScenario& scen, StreamPurpose purpose, int trials) {
    std::vector<std::array<double, kDet>> out(static_cast<std::size_t>(trials));
    parallel_for(out.size(), c.workers, [&](std::size_t i) {
      auto rng = trial_stream(c.seed, i, purpose);
      const auto cov = sample_covariance(synthesize_snapshots(array, scen, rng), EigenMode::kValuesOnly);
      out[i] = score_all({cov.eigenvalues.data(), static_cast<std::size_t>(cov.eigenvalues.size())});
    });
    std::vector<std::vector<double>> by_det(kDet, std::vector<double>(out.size()));
    for (std::size_t i = 0; i < out.size(); ++i)
      for (std::size_t d = 0; d < kDet; ++d) by_det[d][i] = out[i][d];
    return by_det;
  };
  const auto calib = evaluate(h0_scen, StreamPurpose::kCalibration, calib_trials);
  res.h0 = evaluate(h0_scen, StreamPurpose::kNullHypothesis, c.trials);
  res.h1 = evaluate(h1_scen, StreamPurpose::kSignalHypothesis, c.trials);
  for (std::size_t d = 0; d < kDet; ++d) {
    for (double v : res.h0[d])
      if (std::isnan(v)) throw NumericalFailure(fmt::format("{} produced NaN scores", res.detectors[d]));
    res.curves.push_back(roc_from_scores(res.h0[d], res.h1[d]));
    res.auc.push_back(roc_auc(res.h0[d], res.h1[d]));
    for (double f : faps) {
      OperatingPoint op;
      op.detector = res.detectors[d];
      op.target_fap = f;
      op.threshold = upper_quantile(calib[d], f);
      op.pd = detection_rate(res.h1[d], op.threshold);
      op.empirical_fap = detection_rate(res.h0[d], op.threshold);
      res.operating.push_back(op);
    }
  }

  const auto dir = output_dir(cfg);
  const std::string snr_s = num(snr), n_s = std::to_string(n), l_s = std::to_string(len),
                    t_s = std::to_string(c.trials), seed_s = std::to_string(c.seed);
  {
    CsvWriter csv(dir / "roc.csv", {"fap", "pd", "detector", "snr_db", "n", "l", "trials", "seed"});
    for (std::size_t d = 0; d < kDet; ++d)
      for (const auto& p : res.curves[d]) csv.row({num(p.fap), num(p.pd), res.detectors[d], snr_s, n_s, l_s, t_s, seed_s});
    res.files.push_back(csv.path());
  }
  {
    CsvWriter csv(dir / "roc_summary.csv",
                  {"detector", "target_fap", "threshold", "pd", "pd_se", "empirical_fap", "auc", "snr_db", "n", "l",
                   "trials", "calibration_trials", "seed", "digest"});
    for (std::size_t i = 0; i < res.operating.size(); ++i) {
      const auto& op = res.operating[i];
      const double se = std::sqrt(op.pd * (1.0 - op.pd) / c.trials);
      csv.row({op.detector, num(op.target_fap), num(op.threshold), num(op.pd), num(se), num(op.empirical_fap),
               num(res.auc[i / faps.size()]), snr_s, n_s, l_s, t_s, std::to_string(calib_trials), seed_s, c.digest});
    }
    res.files.push_back(csv.path());
  }
  return res;
}

// ---- rmse-snr --------------------------------------------------------------

RmseSnrResult run_rmse_snr(const Config& cfg) {
  if (cfg.experiment() != Experiment::kRmseSnr) throw ContractError("run_rmse_snr needs a rmse-snr config");
  const Common c = common(cfg);
  const int n = positive(cfg, "array.antennas", 2);
  const int m = positive(cfg, "array.subarray", 2);
  const double d = spacing_of(cfg);
  const double eta = cfg.real("array.eta");
  const int t_snaps = positive(cfg, "scenario.snapshots");
  const double theta = theta_of(cfg);
  const auto snrs = cfg.reals("scenario.snr_db");
  if (n % m != 0) throw ConfigError(fmt::format("array.antennas = {} is not a multiple of array.subarray = {}", n, m));
  if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("array.eta must lie in (0, 1]");

  const ArrayConfig had = ArrayConfig::hybrid(n / m, m, d);
  const EtaLayout tl = layout_for_proportion(n, m, eta, d);
  if (tl.rounded)
    warn(fmt::format("eta {} rounded down to {} ({} FD antennas)", eta, tl.config.fd_proportion(), tl.config.n_fd));
  const double u_true = direction_sine(theta);
  const double period = 1.0 / (m * d);

  RmseSnrResult res;
  if (std::abs(subarray_gain(m, d, u_true, 0.0)) < 0.1 * std::sqrt(static_cast<double>(m))) {
    res.gain_null = true;
    warn(fmt::format("theta {} deg sits near a null of the broadside subarray beam; results flagged", theta));
  }
  const int total_snaps = std::max({static_cast<int>(std::ceil(2.0 * m * d)) + 1, 2, t_snaps});

  for (std::size_t s = 0; s < snrs.size(); ++s) {
    const double snr = snrs[s];
    const auto scen = emitter(cfg, snr, total_snaps);
    const auto nt = static_cast<std::size_t>(c.trials);
    std::array<std::vector<double>, 3> err, uh, used;
    for (int k = 0; k < 3; ++k) err[k].assign(nt, 0.0), uh[k].assign(nt, 0.0), used[k].assign(nt, 0.0);
    parallel_for(nt, c.workers, [&](std::size_t t) {
      auto rng = trial_stream(c.seed, s * nt + t, StreamPurpose::kEstimation);
      const SnapshotBatch batch = synthesize_snapshots(had, scen, rng);
      err[0][t] = attempt([&] { return had_root_music_classic(batch, had, snr); }, theta, &used[0][t], &uh[0][t]);
      err[1][t] = attempt([&] { return fhad_root_music(batch, had, snr); }, theta, &used[1][t], &uh[1][t]);
      err[2][t] = attempt([&] { return tlhad_estimate(batch, tl.config, snr, t_snaps); }, theta, &used[2][t],
                          &uh[2][t]);
    });
    RmseSnrRow row;
    row.snr_db = snr;
    row.classic = summarize(err[0], uh[0], used[0], u_true, period);
    row.fhad = summarize(err[1], uh[1], used[1], u_true, period);
    row.tlhad = summarize(err[2], uh[2], used[2], u_true, period);
    double sum = 0.0, sum_sq = 0.0;
    int ok = 0;
    for (std::size_t t = 0; t < nt; ++t) {
      if (std::isnan(err[0][t]) || std::isnan(err[2][t])) continue;
      const double diff = err[2][t] * err[2][t] - err[0][t] * err[0][t];
      sum += diff;
      sum_sq += diff * diff;
      ++ok;
    }
    row.paired_mse_diff_deg2 = ok ? sum / ok : kNaN;
    row.paired_mse_diff_se =
        ok > 1 ? std::sqrt(std::max(0.0, (sum_sq - ok * row.paired_mse_diff_deg2 * row.paired_mse_diff_deg2) /
                                                 (ok - 1)) / ok)
               : kNaN;
    row.crlb_had_sqrt_deg = sqrt_deg(crlb_had(had, theta, snr, 1));
    row.crlb_had_broadside_sqrt_deg = sqrt_deg(crlb_had(had, theta, snr, 1, 0.0));
    row.crlb_tlhad_sqrt_deg = sqrt_deg(crlb_tlhad(tl.config, theta, snr, t_snaps, 0.0));
    row.crlb_tlhad_matched_sqrt_deg = sqrt_deg(crlb_tlhad(tl.config, theta, snr, t_snaps));
    res.rows.push_back(row);
  }

  CsvWriter csv(output_dir(cfg) / "rmse_snr.csv",
                {"snr_db", "theta_deg", "n", "m", "eta", "rmse_classic_deg", "rmse_fhad_deg", "rmse_tlhad_deg",
                 "se_classic_deg", "se_fhad_deg", "se_tlhad_deg", "crlb_had_sqrt_deg", "crlb_had_broadside_sqrt_deg",
                 "crlb_tlhad_sqrt_deg", "crlb_tlhad_matched_sqrt_deg", "paired_mse_diff_deg2", "paired_mse_diff_se", "resolved_classic",
                 "resolved_fhad", "resolved_tlhad", "snapshots_classic", "snapshots_fhad", "snapshots_tlhad",
                 "failures_classic", "failures_fhad", "failures_tlhad", "gain_null", "trials", "seed", "digest"});
  for (const auto& r : res.rows)
    csv.row({num(r.snr_db), num(theta), std::to_string(n), std::to_string(m), num(tl.config.fd_proportion()),
             num(r.classic.rmse_deg), num(r.fhad.rmse_deg), num(r.tlhad.rmse_deg), num(r.classic.rmse_se_deg),
             num(r.fhad.rmse_se_deg), num(r.tlhad.rmse_se_deg), num(r.crlb_had_sqrt_deg), num(r.crlb_had_broadside_sqrt_deg),
             num(r.crlb_tlhad_sqrt_deg),
             num(r.crlb_tlhad_matched_sqrt_deg), num(r.paired_mse_diff_deg2), num(r.paired_mse_diff_se),
             num(r.classic.resolved), num(r.fhad.resolved), num(r.tlhad.resolved), num(r.classic.snapshots),
             num(r.fhad.snapshots), num(r.tlhad.snapshots), std::to_string(r.classic.failures),
             std::to_string(r.fhad.failures), std::to_string(r.tlhad.failures), res.gain_null ? "1" : "0",
             std::to_string(c.trials), std::to_string(c.seed), c.digest});
  res.files.push_back(csv.path());
  return res;
}

// ---- rmse-eta --------------------------------------------------------------

RmseEtaResult run_rmse_eta(const Config& cfg) {
  if (cfg.experiment() != Experiment::kRmseEta) throw ContractError("run_rmse_eta needs a rmse-eta config");
  const Common c = common(cfg);
  const int n = positive(cfg, "array.antennas", 2);
  const int m = positive(cfg, "array.subarray", 2);
  const double d = spacing_of(cfg);
  const int t_snaps = positive(cfg, "scenario.snapshots");
  const double theta = theta_of(cfg);
  const auto snrs = cfg.reals("scenario.snr_db");
  const auto grid = cfg.reals("eta.grid");
  const double u_true = direction_sine(theta);

  std::vector<EtaLayout> layouts;
  for (double eta : grid) {
    if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError(fmt::format("eta.grid value {} is outside (0, 1]", eta));
    layouts.push_back(layout_for_proportion(n, m, eta, d));
    const auto& l = layouts.back();
    if (l.rounded) warn(fmt::format("eta {} rounded down to {} ({} FD antennas)", eta, l.config.fd_proportion(), l.config.n_fd));
    if (l.config.n_fd < 2) throw ConfigError(fmt::format("eta {} leaves fewer than two FD antennas", eta));
  }

  RmseEtaResult res;
  const auto nt = static_cast<std::size_t>(c.trials);
  const ArrayConfig element_array = ArrayConfig::fully_digital(n, d);
  for (std::size_t s = 0; s < snrs.size(); ++s) {
    const double snr = snrs[s];
    const auto scen = emitter(cfg, snr, t_snaps);
    for (std::size_t e = 0; e < grid.size(); ++e) {
      const auto& layout = layouts[e];
      std::vector<double> err(nt), uh(nt), used(nt);
      // same realizations for every eta at this SNR
      parallel_for(nt, c.workers, [&](std::size_t t) {
        auto rng = trial_stream(c.seed, s * nt + t, StreamPurpose::kEstimation);
        const SnapshotBatch batch = synthesize_snapshots(element_array, scen, rng);
        err[t] = attempt([&] { return tlhad_estimate(batch, layout.config, snr, t_snaps); }, theta, &used[t], &uh[t]);
      });
      RmseEtaRow row;
      row.eta_requested = grid[e];
      row.eta = layout.config.fd_proportion();
      row.n_fd = layout.config.n_fd;
      row.k_sub = layout.config.k_sub;
      row.rounded = layout.rounded;
      row.snr_db = snr;
      const double period = layout.config.k_sub > 0 ? 1.0 / (m * d) : 2.0;
      row.tlhad = summarize(err, uh, used, u_true, period);
      row.crlb_sqrt_deg = sqrt_deg(crlb_tlhad(layout.config, theta, snr, t_snaps, 0.0));
      row.crlb_matched_sqrt_deg = sqrt_deg(crlb_tlhad(layout.config, theta, snr, t_snaps));
      row.ratio = row.tlhad.rmse_deg / row.crlb_sqrt_deg;
      res.rows.push_back(row);
    }
  }

  CsvWriter csv(output_dir(cfg) / "rmse_eta.csv",
                {"eta_requested", "eta", "n_fd", "k_sub", "rounded", "snr_db", "theta_deg", "rmse_tlhad_deg",
                 "se_tlhad_deg", "crlb_tlhad_sqrt_deg", "crlb_tlhad_matched_sqrt_deg", "rmse_over_sqrt_crlb",
                 "resolved", "snapshots", "failures", "trials", "seed", "digest"});
  for (const auto& r : res.rows)
    csv.row({num(r.eta_requested), num(r.eta), std::to_string(r.n_fd), std::to_string(r.k_sub), r.rounded ? "1" : "0",
             num(r.snr_db), num(theta), num(r.tlhad.rmse_deg), num(r.tlhad.rmse_se_deg), num(r.crlb_sqrt_deg),
             num(r.crlb_matched_sqrt_deg), num(r.ratio), num(r.tlhad.resolved), num(r.tlhad.snapshots),
             std::to_string(r.tlhad.failures), std::to_string(c.trials), std::to_string(c.seed), c.digest});
  res.files.push_back(csv.path());
  return res;
}

// ---- loss-bits -------------------------------------------------------------

LossBitsResult run_loss_bits(const Config& cfg) {
  if (cfg.experiment() != Experiment::kLossBits) throw ContractError("run_loss_bits needs a loss-bits config");
  const Common c = common(cfg);
  const int n = positive(cfg, "array.antennas", 2);
  const double d = spacing_of(cfg);
  const int t_snaps = positive(cfg, "scenario.snapshots", 2);
  const double theta = theta_of(cfg);
  const auto snrs = cfg.reals("scenario.snr_db");
  std::vector<int> bits;
  for (double b : cfg.reals("quant.bits")) {
    if (b != std::floor(b) || b < 1 || b > Bits::kMax)
      throw ConfigError(fmt::format("quant.bits value {} must be an integer in [1, {}]", b, Bits::kMax));
    bits.push_back(static_cast<int>(b));
  }
  const bool sentinel = cfg.flag("quant.include_unquantized");
  if (cfg.integer("array.subarray") != 1) throw ConfigError("loss-bits runs on a fully-digital array; set array.subarray = 1");

  const ArrayConfig array = ArrayConfig::fully_digital(n, d);
  const auto nt = static_cast<std::size_t>(c.trials);
  LossBitsResult res;
  for (std::size_t s = 0; s < snrs.size(); ++s) {
    const double snr = snrs[s];
    const auto scen = emitter(cfg, snr, t_snaps);
    std::vector<double> ideal(nt);
    std::vector<std::vector<double>> quant(bits.size(), std::vector<double>(nt));
    parallel_for(nt, c.workers, [&](std::size_t t) {
      auto rng = trial_stream(c.seed, s * nt + t, StreamPurpose::kEstimation);
      const SnapshotBatch batch = synthesize_snapshots(array, scen, rng);
      ideal[t] = attempt([&] { return fd_root_music(batch, d, snr); }, theta);
      for (std::size_t b = 0; b < bits.size(); ++b) {
        const auto q = quantize(batch, QuantizerConfig::make(Bits(bits[b])));
        quant[b][t] = attempt([&] { return fd_root_music(q.batch, d, snr); }, theta);
      }
    });
    auto row_for = [&](int b, const std::vector<double>& eq) {
      LossBitsRow row;
      row.bits = b;
      row.snr_db = snr;
      const Bits tag = b == 0 ? Bits::infinite() : Bits(b);
      row.rho = distortion_factor(tag);
      row.loss_db = performance_loss_db(tag, snr);
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      int ok = 0;
      for (std::size_t t = 0; t < nt; ++t) {
        if (std::isnan(eq[t]) || std::isnan(ideal[t])) {
          ++row.failures;
          continue;
        }
        const double a = eq[t] * eq[t], bb = ideal[t] * ideal[t];
        sa += a, sb += bb, saa += a * a, sbb += bb * bb, sab += a * bb;
        ++ok;
      }
      if (ok < 2) throw NumericalFailure(fmt::format("Root-MUSIC failed on nearly every trial at b = {}", b));
      const double ma = sa / ok, mb = sb / ok;
      const double va = saa / ok - ma * ma, vb = sbb / ok - mb * mb, cab = sab / ok - ma * mb;
      row.rmse_quantized_deg = std::sqrt(ma);
      row.rmse_ideal_deg = std::sqrt(mb);
      row.empirical_loss_db = 10.0 * std::log10(ma / mb);
      const double rel = std::max(0.0, va / (ma * ma) + vb / (mb * mb) - 2.0 * cab / (ma * mb)) / ok;
      row.empirical_se_db = 10.0 / std::numbers::ln10 * std::sqrt(rel);
      return row;
    };
    for (std::size_t b = 0; b < bits.size(); ++b) res.rows.push_back(row_for(bits[b], quant[b]));
    if (sentinel) res.rows.push_back(row_for(0, ideal));
  }

  CsvWriter csv(output_dir(cfg) / "loss_bits.csv",
                {"bits", "snr_db", "rho", "loss_db", "empirical_loss_db", "empirical_se_db", "rmse_quantized_deg",
                 "rmse_ideal_deg", "n", "snapshots", "theta_deg", "failures", "trials", "seed", "digest"});
  for (const auto& r : res.rows)
    csv.row({r.bits == 0 ? "inf" : std::to_string(r.bits), num(r.snr_db), num(r.rho), num(r.loss_db),
             num(r.empirical_loss_db), num(r.empirical_se_db), num(r.rmse_quantized_deg), num(r.rmse_ideal_deg),
             std::to_string(n), std::to_string(t_snaps), num(theta), std::to_string(r.failures),
             std::to_string(c.trials), std::to_string(c.seed), c.digest});
  res.files.push_back(csv.path());
  return res;
}

// ---- train-mlnn ------------------------------------------------------------

mlnn::DatasetSpec dataset_spec(const Config& cfg) {
  mlnn::DatasetSpec spec;
  if (cfg.integer("array.subarray") != 1) throw ConfigError("train-mlnn uses a fully-digital array; set array.subarray = 1");
  spec.array = ArrayConfig::fully_digital(positive(cfg, "array.antennas", 2), spacing_of(cfg));
  spec.n_snapshots = positive(cfg, "scenario.snapshots");
  spec.snr_db = single_snr(cfg);
  spec.snr_jitter_db = cfg.real("mlnn.snr_jitter_db");
  if (spec.snr_jitter_db < 0.0) throw ConfigError("mlnn.snr_jitter_db must not be negative");
  spec.noise_power = noise_of(cfg);
  spec.signal_model = signal_model(cfg);
  return spec;
}

namespace {

std::vector<std::vector<int>> parse_shapes(const Config& cfg) {
  std::vector<std::vector<int>> shapes;
  for (const auto& word : cfg.words("mlnn.shapes", ';')) {
    std::vector<int> shape;
    std::string_view rest = word;
    while (true) {
      const auto cut = rest.find('x');
      const std::string item(rest.substr(0, cut));
      int v = 0;
      try {
        std::size_t used = 0;
        v = std::stoi(item, &used);
        if (used != item.size()) v = 0;
      } catch (const std::exception&) {
        v = 0;
      }
      if (v < 1) throw ConfigError(fmt::format("mlnn.shapes entry '{}' is not a list of positive widths", word));
      shape.push_back(v);
      if (cut == std::string_view::npos) break;
      rest.remove_prefix(cut + 1);
    }
    shapes.push_back(shape);
  }
  return shapes;
}

std::string shape_text(const std::vector<int>& shape) {
  std::string s;
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "x" : "") + std::to_string(shape[i]);
  return s;
}

constexpr std::uint64_t kValidationOffset = 1ull << 40;
constexpr std::uint64_t kFinalOffset = 2ull << 40;

}  // namespace

TrainMlnnResult run_train_mlnn(const Config& cfg) {
  if (cfg.experiment() != Experiment::kTrainMlnn) throw ContractError("run_train_mlnn needs a train-mlnn config");
  const Common c = common(cfg);
  const auto spec = dataset_spec(cfg);
  std::vector<mlnn::Activation> acts;
  for (const auto& w : cfg.words("mlnn.activations")) {
    try {
      acts.push_back(mlnn::activation_from_string(w));
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("mlnn.activations: unknown activation '{}'", w));
    }
  }
  const auto shapes = parse_shapes(cfg);
  mlnn::SelectionOptions opts;
  opts.seed = c.seed;
  opts.workers = c.workers;
  opts.dataset_ratio = cfg.real("mlnn.dataset_ratio");
  if (!(opts.dataset_ratio >= 5.0 && opts.dataset_ratio <= 10.0))
    throw ConfigError("mlnn.dataset_ratio must lie in [5, 10]");
  opts.hyper.epochs = positive(cfg, "mlnn.epochs");
  opts.hyper.batch_size = positive(cfg, "mlnn.batch");
  opts.hyper.learning_rate = cfg.real("mlnn.learning_rate");
  opts.hyper.momentum = cfg.real("mlnn.momentum");
  opts.hyper.seed = c.seed;
  if (!(opts.hyper.learning_rate >= 0.0)) throw ConfigError("mlnn.learning_rate must not be negative");
  if (!(opts.hyper.momentum >= 0.0 && opts.hyper.momentum < 1.0)) throw ConfigError("mlnn.momentum must lie in [0, 1)");
  const auto& loss = cfg.text("mlnn.loss");
  if (loss == "mse") opts.hyper.loss = mlnn::Loss::kMeanSquared;
  else if (loss == "cross-entropy") opts.hyper.loss = mlnn::Loss::kCrossEntropy;
  else throw ConfigError(fmt::format("mlnn.loss = '{}' (mse or cross-entropy)", loss));
  const auto faps = cfg.reals("detect.fap");
  const int calib_trials = positive(cfg, "detect.calibration_trials", 100);
  for (double f : faps)
    if (!(f > 0.0 && f < 1.0) || calib_trials < std::ceil(10.0 / f - 1e-9))
      throw ConfigError(fmt::format("detect.fap {} cannot be calibrated from {} trials", f, calib_trials));

  const auto n_sel = static_cast<std::size_t>(positive(cfg, "mlnn.selection_examples", 2));
  const auto n_val = static_cast<std::size_t>(positive(cfg, "mlnn.validation_examples", 2));
  const auto dir = output_dir(cfg);

  TrainMlnnResult res;
  std::vector<std::string> header{"stage", "activation", "shape", "weight_count", "validation_loss", "validation_auc",
                                  "chosen", "dataset_size", "dataset_ratio", "trials", "seed", "digest"};
  try {
    const auto train_set = mlnn::generate_dataset(spec, n_sel, c.seed, 0, c.workers);
    const auto val_set = mlnn::generate_dataset(spec, n_val, c.seed, kValidationOffset, c.workers);
    auto factory = [&](std::size_t count) { return mlnn::generate_dataset(spec, count, c.seed, kFinalOffset, c.workers); };
    res.selection = mlnn::select_architecture(acts, shapes, train_set, val_set, factory, opts);
  } catch (const mlnn::TrainingFailure& fail) {
    CsvWriter csv(dir / "mlnn_report.csv", header);
    csv.row({"failed", "", "", "", num(fail.history().empty() ? kNaN : fail.history().back()), "", "0", "", "",
             std::to_string(calib_trials), std::to_string(c.seed), c.digest});
    CsvWriter hist(dir / "mlnn_loss.csv", {"epoch", "loss", "seed", "digest"});
    for (std::size_t e = 0; e < fail.history().size(); ++e)
      hist.row({std::to_string(e), num(fail.history()[e]), std::to_string(c.seed), c.digest});
    throw;
  }

  res.model = res.selection.model;
  // thresholds from noise-only data no training example has seen
  const ArrayConfig array = spec.array;
  const auto h0_scen = EmitterScenario::noise_only(spec.n_snapshots, spec.noise_power);
  std::vector<double> h0(static_cast<std::size_t>(calib_trials));
  parallel_for(h0.size(), c.workers, [&](std::size_t i) {
    auto rng = trial_stream(c.seed, i, StreamPurpose::kHoldout);
    const auto cov = sample_covariance(synthesize_snapshots(array, h0_scen, rng), EigenMode::kValuesOnly);
    h0[i] = mlnn::score_eigenvalues(res.model, {cov.eigenvalues.data(), static_cast<std::size_t>(cov.eigenvalues.size())});
  });
  res.model.metadata.seed = c.seed;
  res.model.metadata.dataset = spec.describe();
  res.model.metadata.loss_history = res.selection.final_loss_history;
  res.model.metadata.thresholds.clear();
  for (double f : faps) res.model.metadata.thresholds.emplace_back(f, mlnn::decision_threshold(h0, f));

  res.model_file = model_path(cfg);
  if (res.model_file.has_parent_path()) std::filesystem::create_directories(res.model_file.parent_path());
  mlnn::save_model(res.model, res.model_file);
  res.files.push_back(res.model_file);

  {
    CsvWriter csv(dir / "mlnn_report.csv", header);
    const auto& sel = res.selection;
    for (const auto& cand : sel.candidates) {
      const bool final_row = cand.stage == 3;
      const std::size_t used = final_row ? sel.final_dataset_size : n_sel;
      csv.row({std::to_string(cand.stage), std::string(mlnn::to_string(cand.activation)), shape_text(cand.shape),
               std::to_string(cand.weight_count), num(cand.validation_loss), num(cand.validation_auc),
               final_row ? "1" : "0", std::to_string(used), num(static_cast<double>(used) / cand.weight_count),
               std::to_string(calib_trials), std::to_string(c.seed), c.digest});
    }
    res.files.push_back(csv.path());
  }
  {
    CsvWriter csv(dir / "mlnn_loss.csv", {"epoch", "loss", "seed", "digest"});
    const auto& h = res.selection.final_loss_history;
    for (std::size_t e = 0; e < h.size(); ++e) csv.row({std::to_string(e), num(h[e]), std::to_string(c.seed), c.digest});
    res.files.push_back(csv.path());
  }
  return res;
}

std::vector<std::filesystem::path> run_experiment(const Config& cfg) {
  switch (cfg.experiment()) {
    case Experiment::kRoc: return run_roc(cfg).files;
    case Experiment::kRmseSnr: return run_rmse_snr(cfg).files;
    case Experiment::kRmseEta: return run_rmse_eta(cfg).files;
    case Experiment::kLossBits: return run_loss_bits(cfg).files;
    case Experiment::kTrainMlnn: return run_train_mlnn(cfg).files;
  }
  throw ContractError("unknown experiment");
}

}  // namespace doalab::harness
