#include "cryptolab/random_walk.hpp"

#include <cmath>
#include <string>

#include "cryptolab/core/errors.hpp"
#include "cryptolab/core/stats.hpp"

namespace cryptolab {

RandomWalkModel fit_random_walk(std::span<const double> train_series,
                                DriftMode drift_mode) {
  if (train_series.size() < 3) {
    throw ParameterError("fit_random_walk: need at least 3 values, got " +
                         std::to_string(train_series.size()));
  }
  std::vector<double> diffs(train_series.size() - 1);
  for (std::size_t i = 0; i + 1 < train_series.size(); ++i) {
    diffs[i] = train_series[i + 1] - train_series[i];
  }
  RandomWalkModel model;
  model.mu_hat = mean(diffs);
  model.sigma_hat = population_stddev(diffs);
  model.drift_mode = drift_mode;
  return model;
}

namespace {

std::vector<double> single_point_impl(const RandomWalkModel& model,
                                      std::span<const double> series,
                                      SeededRng* rng) {
  if (series.size() < 2) {
    throw ParameterError("predict_single_point: need at least 2 values, got " +
                         std::to_string(series.size()));
  }
  std::vector<double> forecasts(series.size() - 1);
  for (std::size_t i = 0; i + 1 < series.size(); ++i) {
    double step = model.drift();
    if (rng != nullptr) step += rng->gaussian(0.0, model.sigma_hat);
    forecasts[i] = series[i] + step;
  }
  return forecasts;
}

std::vector<double> multi_point_impl(const RandomWalkModel& model,
                                     double start_value, std::size_t horizon,
                                     SeededRng* rng) {
  if (horizon < 1) throw ParameterError("predict_multi_point: horizon must be >= 1");
  std::vector<double> path(horizon);
  double x = start_value;
  for (std::size_t i = 0; i < horizon; ++i) {
    double step = model.drift();
    if (rng != nullptr) step += rng->gaussian(0.0, model.sigma_hat);
    x += step;
    path[i] = x;
  }
  return path;
}

}  // namespace

std::vector<double> predict_single_point(const RandomWalkModel& model,
                                         std::span<const double> series) {
  return single_point_impl(model, series, nullptr);
}

std::vector<double> predict_single_point(const RandomWalkModel& model,
                                         std::span<const double> series,
                                         SeededRng& rng) {
  return single_point_impl(model, series, &rng);
}

std::vector<double> predict_multi_point(const RandomWalkModel& model,
                                        double start_value, std::size_t horizon) {
  return multi_point_impl(model, start_value, horizon, nullptr);
}

std::vector<double> predict_multi_point(const RandomWalkModel& model,
                                        double start_value, std::size_t horizon,
                                        SeededRng& rng) {
  return multi_point_impl(model, start_value, horizon, &rng);
}

WalkPath simulate(const RandomWalkModel& model, double x0, std::size_t t_steps,
                  SeededRng& rng) {
  if (t_steps < 1) throw ParameterError("simulate: t_steps must be >= 1");
  WalkPath path;
  path.seed = rng.seed();
  path.x.resize(t_steps + 1);
  path.draws.resize(t_steps);
  path.x[0] = x0;
  for (std::size_t t = 0; t < t_steps; ++t) {
    path.draws[t] = model.drift() + rng.gaussian(0.0, model.sigma_hat);
    path.x[t + 1] = path.x[t] + path.draws[t];
  }
  return path;
}

double autocorr_analytic(std::size_t t, std::size_t k) {
  if (t == 0) throw ParameterError("autocorr_analytic: t must be >= 1");
  return 1.0 / std::sqrt(1.0 + static_cast<double>(k) / static_cast<double>(t));
}

double autocorr_empirical(const RandomWalkModel& model, std::size_t t,
                          std::size_t k, std::size_t n_paths, SeededRng& rng) {
  if (t == 0) throw ParameterError("autocorr_empirical: t must be >= 1");
  if (n_paths < 1000) {
    throw ParameterError("autocorr_empirical: need n_paths >= 1000, got " +
                         std::to_string(n_paths));
  }
  if (model.drift_mode != DriftMode::Zero) {
    throw ParameterError(
        "autocorr_empirical: closed form assumes drift_mode zero");
  }
  if (model.sigma_hat == 0.0) {
    throw EstimationError("autocorr_empirical: sigma_hat is 0, ensemble is degenerate");
  }
  if (k == 0) return 1.0;  // a variable correlates perfectly with itself

  std::vector<double> at_t(n_paths);
  std::vector<double> at_t_plus_k(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) {
    SeededRng child = rng.derive(p);
    double x = 0.0;
    for (std::size_t step = 0; step < t + k; ++step) {
      x += model.drift() + child.gaussian(0.0, model.sigma_hat);
      if (step + 1 == t) at_t[p] = x;
    }
    at_t_plus_k[p] = x;
  }
  return pearson(at_t, at_t_plus_k);
}

}  // namespace cryptolab
