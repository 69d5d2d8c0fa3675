/*
 * Copyright 2026 The phenolog Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Univariate Hawkes process with exponential kernel
//
//   lambda(t) = gamma + sum_{t_i < t} alpha * beta * exp(-beta (t - t_i))
//
// gamma is the background rate (events/hour), alpha the branching ratio
// (expected direct offspring per event) and beta the decay rate (1/hours).
// All times are hours from the start of the observation window.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <json.hpp>

#include "phenolog/error.hpp"

namespace phenolog::hawkes {

struct HawkesParams {
  double gamma = 1.0;
  double alpha = 0.0;
  double beta = 1.0;
};

struct HawkesFit {
  HawkesParams params;
  double log_likelihood = -std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
  double gradient_norm = std::numeric_limits<double>::infinity();
};

inline constexpr std::size_t kMinFitEvents = 10;

inline void check_sorted(std::span<const double> times) {
  if (!std::is_sorted(times.begin(), times.end()))
    throw InputError("event times must be sorted ascending");
}

// Direct evaluation of the conditional intensity at time t.
inline double intensity(const HawkesParams& p, std::span<const double> history,
                        double t) {
  check_sorted(history);
  double excitation = 0.0;
  for (const double ti : history) {
    if (ti >= t) break;
    excitation += std::exp(-p.beta * (t - ti));
  }
  return p.gamma + p.alpha * p.beta * excitation;
}

// Intensity just before each event, via the O(n) recursion
// A_1 = 0, A_i = exp(-beta (t_i - t_{i-1})) (1 + A_{i-1}).
inline std::vector<double> intensities_at_events(const HawkesParams& p,
                                                 std::span<const double> times) {
  check_sorted(times);
  std::vector<double> out(times.size());
  double a = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0) a = std::exp(-p.beta * (times[i] - times[i - 1])) * (1.0 + a);
    out[i] = p.gamma + p.alpha * p.beta * a;
  }
  return out;
}

namespace detail {

inline void check_params(const HawkesParams& p) {
  if (!(p.gamma > 0.0) || !(p.beta > 0.0))
    throw InputError("Hawkes gamma and beta must be positive");
}

// Log-likelihood and its gradient with respect to (gamma, alpha, beta).
// B_i = sum_{j<i} (t_i - t_j) exp(-beta (t_i - t_j)) follows the recursion
// B_i = e^{-beta d} (B_{i-1} + d (1 + A_{i-1})).
inline double log_likelihood_and_gradient(const HawkesParams& p,
                                          std::span<const double> times,
                                          double horizon,
                                          std::array<double, 3>* grad) {
  double ll = -p.gamma * horizon;
  double g_gamma = -horizon, g_alpha = 0.0, g_beta = 0.0;
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0) {
      const double d = times[i] - times[i - 1];
      const double decay = std::exp(-p.beta * d);
      b = decay * (b + d * (1.0 + a));
      a = decay * (1.0 + a);
    }
    const double lambda = p.gamma + p.alpha * p.beta * a;
    ll += std::log(lambda);
    const double tail = horizon - times[i];
    const double tail_decay = std::exp(-p.beta * tail);
    ll -= p.alpha * (1.0 - tail_decay);
    if (grad) {
      g_gamma += 1.0 / lambda;
      g_alpha += p.beta * a / lambda - (1.0 - tail_decay);
      g_beta += p.alpha * (a - p.beta * b) / lambda - p.alpha * tail * tail_decay;
    }
  }
  if (grad) *grad = {g_gamma, g_alpha, g_beta};
  return ll;
}

}  // namespace detail

// O(n) log-likelihood of event times on [0, horizon]:
//   sum_i ln lambda(t_i) - gamma T - alpha sum_i (1 - exp(-beta (T - t_i))).
inline double log_likelihood(const HawkesParams& p, std::span<const double> times,
                             double horizon) {
  detail::check_params(p);
  if (times.empty()) throw InputError("log-likelihood needs at least one event");
  check_sorted(times);
  if (times.front() < 0.0 || times.back() > horizon)
    throw InputError("event times must lie in [0, T]");
  return detail::log_likelihood_and_gradient(p, times, horizon, nullptr);
}

inline std::array<double, 3> log_likelihood_gradient(const HawkesParams& p,
                                                     std::span<const double> times,
                                                     double horizon) {
  detail::check_params(p);
  std::array<double, 3> g{};
  detail::log_likelihood_and_gradient(p, times, horizon, &g);
  return g;
}

// Compensator Lambda(t_i) = integral_0^{t_i} lambda(s) ds at every event. For a
// correctly specified model the increments are i.i.d. Exponential(1).
inline std::vector<double> compensator_at_events(const HawkesParams& p,
                                                 std::span<const double> times) {
  check_sorted(times);
  std::vector<double> out(times.size());
  // sum_{j<i} exp(-beta (t_i - t_j)), tracked as in the likelihood.
  double a = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0) a = std::exp(-p.beta * (times[i] - times[i - 1])) * (1.0 + a);
    const double earlier_events = static_cast<double>(i);
    out[i] = p.gamma * times[i] + p.alpha * (earlier_events - a);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Maximum-likelihood fit

namespace detail {

inline constexpr double kClamp = 30.0;

struct Unconstrained {
  std::array<double, 3> v;  // (ln gamma, logit alpha, ln beta)
};

inline HawkesParams to_params(const std::array<double, 3>& v) {
  auto c = [](double x) { return std::clamp(x, -kClamp, kClamp); };
  return {std::exp(c(v[0])), 1.0 / (1.0 + std::exp(-c(v[1]))), std::exp(c(v[2]))};
}

inline std::array<double, 3> to_unconstrained(const HawkesParams& p) {
  const double a = std::clamp(p.alpha, 1e-9, 1.0 - 1e-9);
  return {std::log(p.gamma), std::log(a / (1.0 - a)), std::log(p.beta)};
}

// Objective: mean negative log-likelihood per event, in unconstrained space.
struct Objective {
  std::span<const double> times;
  double horizon;
  double scale;

  double operator()(const std::array<double, 3>& v, std::array<double, 3>* g) const {
    const auto p = to_params(v);
    std::array<double, 3> dp{};
    const double ll = log_likelihood_and_gradient(p, times, horizon, g ? &dp : nullptr);
    if (g) {
      // Chain rule through the reparameterization.
      (*g)[0] = -dp[0] * p.gamma / scale;
      (*g)[1] = -dp[1] * p.alpha * (1.0 - p.alpha) / scale;
      (*g)[2] = -dp[2] * p.beta / scale;
    }
    return std::isfinite(ll) ? -ll / scale : std::numeric_limits<double>::infinity();
  }
};

inline double norm(const std::array<double, 3>& x) {
  return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
}

// BFGS with Armijo backtracking. Returns the final point; `iters` and
// `grad_norm` describe the run.
inline std::array<double, 3> bfgs(const Objective& f, std::array<double, 3> x,
                                  int max_iter, double tol, int& iters,
                                  double& grad_norm) {
  using Vec = std::array<double, 3>;
  double h[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};  // inverse Hessian
  Vec g{};
  double fx = f(x, &g);
  iters = 0;
  for (; iters < max_iter; ++iters) {
    grad_norm = norm(g);
    if (grad_norm < tol) break;
    Vec d{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) d[i] -= h[i][j] * g[j];
    double slope = d[0] * g[0] + d[1] * g[1] + d[2] * g[2];
    if (slope >= 0.0) {
      // Not a descent direction: reset to steepest descent.
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) h[i][j] = i == j ? 1.0 : 0.0;
        d[i] = -g[i];
      }
      slope = -grad_norm * grad_norm;
    }
    // Keep steps in log space bounded.
    const double dn = norm(d);
    if (dn > 5.0)
      for (auto& di : d) di *= 5.0 / dn;
    slope = d[0] * g[0] + d[1] * g[1] + d[2] * g[2];

    double step = 1.0;
    Vec xn{}, gn{};
    double fn = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (int i = 0; i < 3; ++i) xn[i] = x[i] + step * d[i];
      fn = f(xn, &gn);
      if (std::isfinite(fn) && fn <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    Vec s{}, y{};
    for (int i = 0; i < 3; ++i) {
      s[i] = xn[i] - x[i];
      y[i] = gn[i] - g[i];
    }
    const double sy = s[0] * y[0] + s[1] * y[1] + s[2] * y[2];
    if (sy > 1e-14) {
      const double rho = 1.0 / sy;
      Vec hy{};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) hy[i] += h[i][j] * y[j];
      const double yhy = y[0] * hy[0] + y[1] * hy[1] + y[2] * hy[2];
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          h[i][j] += (1.0 + yhy * rho) * rho * s[i] * s[j] -
                     rho * (hy[i] * s[j] + s[i] * hy[j]);
    }
    const double change = std::abs(fx - fn);
    x = xn;
    g = gn;
    fx = fn;
    if (change == 0.0) break;
  }
  grad_norm = norm(g);
  return x;
}

}  // namespace detail

struct FitOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-6;
};

// The fixed multi-start grid: gamma = n/T, alpha in {0.1, 0.5},
// beta in {1, 1/24} (one-hour and one-day decay scales).
inline std::vector<HawkesParams> default_starts(std::size_t n, double horizon) {
  const double rate = static_cast<double>(n) / horizon;
  std::vector<HawkesParams> starts;
  for (const double a : {0.1, 0.5})
    for (const double b : {1.0, 1.0 / 24.0}) starts.push_back({rate, a, b});
  return starts;
}

// Maximizes the likelihood over (ln gamma, logit alpha, ln beta) from the
// fixed starts plus the optional caller-supplied one; returns the best run.
// `converged` means the per-event gradient norm in unconstrained space fell
// below the tolerance.
inline HawkesFit fit(std::span<const double> times, double horizon,
                     std::optional<HawkesParams> init = {},
                     const FitOptions& options = {}) {
  if (times.size() < kMinFitEvents) throw InputError("insufficient events");
  if (!(horizon > 0.0)) throw InputError("observation horizon must be positive");
  check_sorted(times);
  if (times.front() < 0.0 || times.back() > horizon)
    throw InputError("event times must lie in [0, T]");

  auto starts = default_starts(times.size(), horizon);
  if (init) {
    detail::check_params(*init);
    starts.push_back(*init);
  }
  const detail::Objective objective{times, horizon,
                                    static_cast<double>(times.size())};
  HawkesFit best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (const auto& start : starts) {
    int iters = 0;
    double gnorm = 0.0;
    const auto x = detail::bfgs(objective, detail::to_unconstrained(start),
                                options.max_iterations,
                                options.gradient_tolerance, iters, gnorm);
    const double value = objective(x, nullptr);
    if (!std::isfinite(value)) continue;
    if (value < best_obj) {
      best_obj = value;
      best.params = detail::to_params(x);
      best.log_likelihood = -value * objective.scale;
      best.iterations = iters;
      best.gradient_norm = gnorm;
      best.converged = gnorm < options.gradient_tolerance;
    }
  }
  if (!std::isfinite(best_obj)) {
    best.params = starts.front();
    best.converged = false;
  }
  return best;
}

inline nlohmann::ordered_json fit_report(const HawkesFit& f, std::size_t n_events,
                                         double horizon) {
  nlohmann::ordered_json j;
  j["gamma"] = f.params.gamma;
  j["alpha"] = f.params.alpha;
  j["beta"] = f.params.beta;
  j["log_likelihood"] = f.log_likelihood;
  j["converged"] = f.converged;
  j["n_events"] = n_events;
  j["T_hours"] = horizon;
  return j;
}

// ---------------------------------------------------------------------------
// Simulation by Ogata thinning. Between events the intensity only decays, so
// its value right after the last accepted point bounds it until the next one.

inline std::vector<double> simulate(const HawkesParams& p, double horizon,
                                    std::uint64_t seed) {
  detail::check_params(p);
  if (p.alpha < 0.0) throw InputError("alpha must be nonnegative");
  if (p.alpha >= 1.0) throw InputError("nonstationary");
  if (!(horizon > 0.0)) throw InputError("horizon must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> out;
  double t = 0.0;
  double excitation = 0.0;  // alpha*beta*sum exp(-beta (t - t_i)) at time t
  while (true) {
    const double bound = p.gamma + excitation;
    const double wait = -std::log(1.0 - unif(rng)) / bound;
    t += wait;
    if (t > horizon) break;
    excitation *= std::exp(-p.beta * wait);
    if (unif(rng) * bound <= p.gamma + excitation) {
      out.push_back(t);
      excitation += p.alpha * p.beta;
    }
  }
  return out;
}

}  // namespace phenolog::hawkes
