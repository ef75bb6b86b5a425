#pragma once

// Random-walk price model: x_t = x_{t-1} + w_t with white-noise increments.
// The only parameters are the increment mean (drift) and standard deviation,
// both estimated from one-step differences of a training series. Supports
// single-point forecasting (each step conditions on the true previous value),
// multi-point forecasting (the forecast feeds back on itself), Monte-Carlo
// path simulation, and the ensemble autocorrelation of the process, which is
// 1/sqrt(1 + k/t) in closed form.

#include <cstdint>
#include <span>
#include <vector>

#include "cryptolab/core/rng.hpp"
#include "cryptolab/core/types.hpp"

namespace cryptolab {

// Whether forecasts use the fitted mean increment or hold it at zero. Zero is
// the default: the canonical model has mean-zero increments, and a fitted
// drift mostly encodes the sample period's trend.
enum class DriftMode { Zero, Fitted };

struct RandomWalkModel {
  double mu_hat = 0.0;     // mean one-step increment (price units per step)
  double sigma_hat = 0.0;  // std of one-step increments (price units per step)
  DriftMode drift_mode = DriftMode::Zero;

  // Increment mean actually used by forecasts under the current drift mode.
  double drift() const { return drift_mode == DriftMode::Fitted ? mu_hat : 0.0; }
};

// Estimates mu_hat and sigma_hat from the one-step differences of the series
// (population standard deviation). Throws ParameterError if the series has
// fewer than 3 values (fewer than 2 differences).
RandomWalkModel fit_random_walk(std::span<const double> train_series,
                                DriftMode drift_mode = DriftMode::Zero);

// One-step-ahead forecasts aligned to series[1..]: element i predicts
// series[i + 1] from the true value series[i]. Deterministic mode returns the
// conditional mean x_t + drift; the stochastic overload adds a fresh noise
// draw per step. Throws ParameterError if the series has fewer than 2 values.
std::vector<double> predict_single_point(const RandomWalkModel& model,
                                         std::span<const double> series);
std::vector<double> predict_single_point(const RandomWalkModel& model,
                                         std::span<const double> series,
                                         SeededRng& rng);

// Forecast path of length `horizon` that never re-conditions on true data:
// each step extends the previous forecast by drift (deterministic) or by
// drift plus a fresh noise draw (stochastic overload). Throws ParameterError
// if horizon < 1.
std::vector<double> predict_multi_point(const RandomWalkModel& model,
                                        double start_value, std::size_t horizon);
std::vector<double> predict_multi_point(const RandomWalkModel& model,
                                        double start_value, std::size_t horizon,
                                        SeededRng& rng);

// One simulated path. x holds t_steps + 1 values starting at x0, and draws
// holds the t_steps increments; every x[t+1] is exactly the sum x[t] +
// draws[t] (replaying that addition reproduces the path bit-for-bit).
struct WalkPath {
  std::vector<double> x;
  std::vector<double> draws;
  std::size_t t0 = 0;
  std::uint64_t seed = 0;
};

// Simulates t_steps increments of drift + sigma_hat * N(0,1) noise starting
// from x0. Throws ParameterError if t_steps < 1.
WalkPath simulate(const RandomWalkModel& model, double x0, std::size_t t_steps,
                  SeededRng& rng);

// Closed-form ensemble autocorrelation corr(x_t, x_{t+k}) = 1/sqrt(1 + k/t)
// for a drift-free walk started at a fixed point. Throws ParameterError if
// t == 0.
double autocorr_analytic(std::size_t t, std::size_t k);

// Monte-Carlo estimate of the same quantity: Pearson correlation of
// (x_t, x_{t+k}) across n_paths independent paths started at 0, each path
// driven by a child generator derived from rng's seed and the path index so
// the estimate does not depend on evaluation order. Requires drift_mode Zero
// (the closed form assumes centred increments) and n_paths >= 1000; throws
// ParameterError otherwise. Throws EstimationError if the ensemble variance
// degenerates (sigma_hat == 0). k == 0 returns exactly 1.
double autocorr_empirical(const RandomWalkModel& model, std::size_t t,
                          std::size_t k, std::size_t n_paths, SeededRng& rng);

}  // namespace cryptolab
