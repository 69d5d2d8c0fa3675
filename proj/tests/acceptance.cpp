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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "phenolog/eval.hpp"
#include "phenolog/features.hpp"
#include "phenolog/hawkes.hpp"
#include "phenolog/io.hpp"
#include "phenolog/models/gp.hpp"
#include "phenolog/synth.hpp"
#include "phenolog/taxonomy.hpp"

using namespace phenolog;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

synth::Cohort sample_cohort(const std::string& name) {
  const auto path = std::string(PHENOLOG_SAMPLES) + "/" + name;
  return synth::generate_cohort(synth::spec_from_json(nlohmann::json::parse(read_file(path))));
}

// ---- 1 ----------------------------------------------------------------------

Outcome hawkes_recovery() {
  const hawkes::HawkesParams truth{0.5, 0.6, 1.2};
  std::vector<double> g, a, b;
  double slowest = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto t = hawkes::simulate(truth, 2000.0, seed);
    const auto t0 = Clock::now();
    const auto fit = hawkes::fit(t, 2000.0);
    slowest = std::max(slowest, seconds_since(t0));
    g.push_back(fit.params.gamma);
    a.push_back(fit.params.alpha);
    b.push_back(fit.params.beta);
  }
  const double eg = std::abs(median(g) / truth.gamma - 1);
  const double ea = std::abs(median(a) / truth.alpha - 1);
  const double eb = std::abs(median(b) / truth.beta - 1);
  return {eg <= 0.15 && ea <= 0.15 && eb <= 0.15 && slowest < 10.0,
          "median rel err gamma=" + fmt(eg) + " alpha=" + fmt(ea) + " beta=" + fmt(eb) +
              " (<= 0.15), slowest fit " + fmt(slowest, 3) + "s (< 10s)"};
}

// ---- 2 ----------------------------------------------------------------------

double direct_ll(const hawkes::HawkesParams& p, const std::vector<double>& t, double T) {
  double ll = -p.gamma * T;
  for (std::size_t i = 0; i < t.size(); ++i) {
    double s = p.gamma;
    for (std::size_t j = 0; j < i; ++j) s += p.alpha * p.beta * std::exp(-p.beta * (t[i] - t[j]));
    ll += std::log(s) - p.alpha * (1 - std::exp(-p.beta * (T - t[i])));
  }
  return ll;
}

Outcome likelihood_correctness() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const double T = 20 + 500 * u(rng);
    const std::size_t n = 1 + rng() % 500;
    std::vector<double> t(n);
    for (auto& x : t) x = T * u(rng);
    std::sort(t.begin(), t.end());
    const hawkes::HawkesParams p{0.05 + 2 * u(rng), 0.99 * u(rng), 0.05 + 4 * u(rng)};
    worst = std::max(worst, std::abs(hawkes::log_likelihood(p, t, T) - direct_ll(p, t, T)));
  }
  return {worst <= 1e-8, "max |recursive - direct| = " + fmt(worst, 3) + " (<= 1e-8) over 100 instances"};
}

// ---- 3 ----------------------------------------------------------------------

double histogram_entropy(const std::map<std::string, int>& hist) {
  double n = 0;
  for (const auto& [_, c] : hist) n += c;
  double h = 0;
  for (const auto& [_, c] : hist)
    if (c > 0) h -= (c / n) * std::log(c / n);
  return h;
}

Outcome entropy_oracle() {
  using namespace std::chrono;
  static const char* kCats[] = {"News", "Sports", "Arts", "Games", "Health", "Music", "Food"};
  std::mt19937_64 rng(3);
  const auto start = parse_rfc3339("2020-01-06T00:00:00Z");
  double worst = 0;
  int compared = 0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<ActivityEvent> events;
    const std::size_t n = 1 + rng() % 300;
    std::uniform_int_distribution<std::int64_t> when(0, 21 * kSecondsPerDay - 1);
    for (std::size_t k = 0; k < n; ++k) {
      ActivityEvent e;
      e.participant_id = "P";
      e.timestamp = start.plus_seconds(when(rng));
      e.timestamp.offset_minutes = 60 * static_cast<int>(rng() % 17) - 480;
      e.source = Source::kSearch;
      e.action = Action::kQuery;
      e.category = kCats[rng() % 7];
      events.push_back(e);
    }
    const auto t = build_timeline(events, "P");
    const auto labels = label_events(t.events, LabelerKind::kPassthrough);
    for (const auto filter : {DayFilter::kWeekday, DayFilter::kWeekend, DayFilter::kTotal}) {
      std::map<std::string, int> cats, hours;
      for (const auto& e : t.events) {
        const sys_seconds s{seconds{e.timestamp.utc_seconds + 60LL * e.timestamp.offset_minutes}};
        const auto day = floor<days>(s);
        const weekday wd{day};
        const bool weekend = wd == Saturday || wd == Sunday;
        if ((filter == DayFilter::kWeekday && weekend) || (filter == DayFilter::kWeekend && !weekend)) continue;
        ++cats[*e.category];
        ++hours[std::to_string(hh_mm_ss{s - day}.hours().count())];
      }
      if (cats.empty()) continue;
      worst = std::max(worst, std::abs(category_entropy(t, labels, filter) - histogram_entropy(cats)));
      worst = std::max(worst, std::abs(time_entropy(t, filter) - histogram_entropy(hours)));
      ++compared;
    }
  }
  // Closed forms: k equally used categories give ln k; one category gives 0.
  std::vector<ActivityEvent> uniform, single;
  for (int h = 0; h < 24; ++h) {
    ActivityEvent e;
    e.participant_id = "P";
    e.timestamp = start.plus_seconds(h * kSecondsPerHour + 30);
    e.source = Source::kSearch;
    e.action = Action::kQuery;
    e.category = kCats[h % 4];
    uniform.push_back(e);
    e.category = "News";
    e.timestamp = start.plus_seconds(9 * kSecondsPerHour + h);
    single.push_back(e);
  }
  const auto tu = build_timeline(uniform, "P"), ts = build_timeline(single, "P");
  const auto lu = label_events(tu.events, LabelerKind::kPassthrough);
  const auto ls = label_events(ts.events, LabelerKind::kPassthrough);
  const bool closed = category_entropy(tu, lu, DayFilter::kTotal) == std::log(4.0) &&
                      time_entropy(tu, DayFilter::kTotal) == std::log(24.0) &&
                      category_entropy(ts, ls, DayFilter::kTotal) == 0.0 &&
                      time_entropy(ts, DayFilter::kTotal) == 0.0;
  return {worst <= 1e-12 && closed,
          "max deviation " + fmt(worst, 3) + " (<= 1e-12) over " + std::to_string(compared) +
              " filtered timelines; closed forms ln4, ln24, 0 " + (closed ? "exact" : "NOT exact")};
}

// ---- 4 ----------------------------------------------------------------------

Outcome inactivity_oracle(const synth::Cohort& cohort) {
  int hits = 0, total = 0;
  for (const auto& [key, f] : cohort.features) {
    ++total;
    hits += f[feature_index::kInactivity8] == 3.0;
  }
  const double frac = static_cast<double>(hits) / total;
  return {frac >= 0.9, "I_8 = 3 for " + std::to_string(hits) + "/" + std::to_string(total) +
                           " participants (>= 90%), sleep 23:00 for 8h"};
}

// ---- 5 ----------------------------------------------------------------------

Outcome gp_identities() {
  using models::Matrix;
  using models::Vector;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0, 1);
  auto random = [&](Eigen::Index r, Eigen::Index c, double s) {
    Matrix m(r, c);
    for (auto& v : m.reshaped()) v = s * g(rng);
    return m;
  };
  std::vector<std::string> failures;

  const Matrix xt = random(5, 18, 1);
  const Vector y1t = (random(5, 1, 1).array() + 10).matrix();
  const auto prior = models::gp_posterior_predict(Matrix(0, 18), Vector(0), Vector(0), xt, y1t, {}, 1);
  if (prior.mean != y1t) failures.push_back("prior mean");

  const Matrix x = random(12, 18, 2);
  const Vector y1 = (random(12, 1, 3).array() + 10).matrix(), y2 = (random(12, 1, 3).array() + 10).matrix();
  models::GPConfig exact;
  exact.noise_std = 0;
  exact.length_scale = 4;
  const auto interp = models::gp_posterior_predict(x, y1, y2, x, y1, exact, 1);
  const double interp_err = (interp.mean - y2).cwiseAbs().maxCoeff();
  if (interp_err > 1e-6) failures.push_back("interpolation " + fmt(interp_err, 3));

  Matrix x2(2, 1), x2t(1, 1);
  x2 << 0, 1;
  x2t << 0.5;
  Vector a1(2), a2(2), at(1);
  a1 << 3, 4;
  a2 << 5, 3;
  at << 6;
  models::GPConfig two;
  two.length_scale = 1;
  two.noise_std = 0.5;
  const auto p2 = models::gp_posterior_predict(x2, a1, a2, x2t, at, two, 1);
  const double k = std::exp(-0.5), ks = std::exp(-0.125), d = 1.25, det = d * d - k * k;
  const double mean = 6 + ks * ((d * 2 - k * -1) + (-k * 2 + d * -1)) / det;
  const double var = 1 - ks * ks * (2 * d - 2 * k) / det;
  const double err2 = std::max(std::abs(p2.mean[0] - mean), std::abs(p2.std[0] - std::sqrt(var)));
  if (err2 > 1e-10) failures.push_back("n=2 " + fmt(err2, 3));

  int above = 0;
  for (int rep = 0; rep < 20; ++rep) {
    models::GPConfig c;
    c.noise_std = 0.1 * rep;
    c.n_traces = 1;
    const auto p = models::gp_posterior_predict(random(25, 18, 1), Vector::Zero(25), random(25, 1, 2),
                                                random(10, 18, 1), Vector::Zero(10), c, 1);
    above += (p.std.array() > 1.0 + 1e-12).count();
  }
  if (above) failures.push_back(std::to_string(above) + " points with posterior var > prior");

  std::string detail = "prior exact, interpolation err " + fmt(interp_err, 3) + " (<= 1e-6), n=2 err " +
                       fmt(err2, 3) + " (<= 1e-10), variance checks on 200 points";
  if (!failures.empty()) detail += "; failed:";
  for (const auto& f : failures) detail += " " + f;
  return {failures.empty(), detail};
}

// ---- 6 ----------------------------------------------------------------------

Outcome planted_classification(const synth::Cohort& cohort) {
  eval::ExperimentConfig cfg;
  cfg.seed = 0;
  const auto r = eval::run_experiment(cohort.records, cohort.features, cfg);
  const double f1 = r.summary.at("f1").mean, auc = r.summary.at("auc").mean;

  std::vector<double> null_auc;
  std::mt19937_64 rng(6);
  for (int rep = 0; rep < 20; ++rep) {
    auto permuted = cohort.records;
    std::vector<int> y;
    for (const auto& rec : permuted) y.push_back(rec.y1);
    std::shuffle(y.begin(), y.end(), rng);
    for (std::size_t i = 0; i < permuted.size(); ++i) permuted[i].y1 = y[i];
    cfg.seed = static_cast<std::uint64_t>(rep + 1);
    null_auc.push_back(eval::run_experiment(permuted, cohort.features, cfg).summary.at("auc").mean);
  }
  double null_mean = 0;
  for (const double v : null_auc) null_mean += v / 20;
  const auto [lo, hi] = std::minmax_element(null_auc.begin(), null_auc.end());
  const bool pass = f1 >= 0.95 && auc >= 0.98 && null_mean >= 0.4 && null_mean <= 0.6;
  return {pass, "RF grouped 5-fold F1=" + fmt(f1) + " (>= 0.95) AUC=" + fmt(auc) +
                    " (>= 0.98); permutation null mean AUC=" + fmt(null_mean) + " in [0.4, 0.6] (range " +
                    fmt(*lo, 3) + ".." + fmt(*hi, 3) + ", 20 repeats)"};
}

// ---- 7 ----------------------------------------------------------------------

Outcome planted_regression() {
  const auto cohort = sample_cohort("cohort_regress.json");
  std::map<models::ModelKind, std::vector<double>> mse;
  for (const auto kind : {models::ModelKind::kOls, models::ModelKind::kGradientBoosting,
                          models::ModelKind::kGaussianProcess}) {
    eval::ExperimentConfig cfg;
    cfg.task = eval::Task::kPredict;
    cfg.model = kind;
    cfg.seed = 0;
    mse[kind] = eval::run_experiment(cohort.records, cohort.features, cfg).summary.at("mse").per_fold;
  }
  const auto& ols = mse[models::ModelKind::kOls];
  const auto& gb = mse[models::ModelKind::kGradientBoosting];
  const auto& gp = mse[models::ModelKind::kGaussianProcess];
  int ordered = 0;
  double gp_mean = 0, gb_mean = 0, ols_mean = 0;
  for (std::size_t f = 0; f < gp.size(); ++f) {
    ordered += gp[f] <= gb[f] && gb[f] <= ols[f];
    gp_mean += gp[f] / gp.size();
    gb_mean += gb[f] / gp.size();
    ols_mean += ols[f] / gp.size();
  }
  return {ordered >= 4 && gp_mean <= 2.0,
          "GP <= GB <= OLS in " + std::to_string(ordered) + "/5 folds (>= 4); mean MSE GP=" + fmt(gp_mean) +
              " (<= 2.0) GB=" + fmt(gb_mean) + " OLS=" + fmt(ols_mean)};
}

// ---- 8 ----------------------------------------------------------------------

Outcome fold_audit() {
  auto spec = synth::spec_from_json(
      nlohmann::json::parse(read_file(std::string(PHENOLOG_SAMPLES) + "/cohort_regress.json")));
  spec.n_significant_change = 9;
  const auto cohort = synth::generate_cohort(spec);
  int split = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto plan = eval::make_folds(cohort.records, 5, seed, eval::FoldStrategy::kGroupedStratified);
    for (int fold = 0; fold < 5; ++fold)
      for (const auto& r : cohort.records) {
        std::set<bool> sides;
        for (int round = 1; round <= (r.y2 ? 2 : 1); ++round) sides.insert(plan.in_test(r.participant_id, round, fold));
        split += sides.size() > 1;
      }
  }
  std::set<std::string> planted;
  for (const auto& r : cohort.records)
    if (r.y2 && std::abs(*r.y2 - r.y1) >= 5) planted.insert(r.participant_id);
  int missing = 0;
  const auto plan = eval::make_folds(cohort.records, 5, 0, eval::FoldStrategy::kSignificantChangeHoldout,
                                     eval::Task::kPredict);
  for (int fold = 0; fold < 5; ++fold)
    for (const auto& pid : planted)
      missing += !plan.in_test(pid, 2, fold) || plan.in_train(pid, 2, fold);
  return {split == 0 && missing == 0 && planted.size() >= 9,
          std::to_string(split) + " split participants over 100 seeds; " + std::to_string(planted.size()) +
              " |delta|>=5 subjects, " + std::to_string(missing) + " missing from a holdout test set"};
}

// ---- 9 ----------------------------------------------------------------------

int shell(const std::string& cmd) {
  const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome cli_determinism() {
  const auto dir = std::filesystem::temp_directory_path() / ("phenolog_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const std::string cli = PHENOLOG_CLI, d = dir.string();
  const auto t0 = Clock::now();
  int rc = shell(cli + " simulate --input " + PHENOLOG_SAMPLES + "/cohort_classify.json --out " + d + "/cohort");
  if (!rc)
    rc = shell(cli + " featurize --input " + d + "/cohort/events.jsonl --records " + d +
               "/cohort/records.jsonl --out " + d + "/features.csv");
  const std::string eval = cli + " evaluate --input " + d + "/features.csv --records " + d +
                           "/cohort/records.jsonl --seed 7 --out ";
  if (!rc) rc = shell(eval + d + "/eval_a");
  const double elapsed = seconds_since(t0);
  if (!rc) rc = shell(eval + d + "/eval_b");
  bool identical = false;
  if (!rc) identical = read_file(d + "/eval_a/report.json") == read_file(d + "/eval_b/report.json");
  std::filesystem::remove_all(dir);
  return {rc == 0 && identical && elapsed < 300,
          "exit " + std::to_string(rc) + ", report.json " + (identical ? "byte-identical" : "DIFFERS") +
              ", simulate+featurize+evaluate (100 participants) " + fmt(elapsed, 3) + "s (< 300s)"};
}

}  // namespace

int main() {
  std::cout << "generating planted-sleep classification cohort..." << std::endl;
  const auto classify = sample_cohort("cohort_classify.json");
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 hawkes-recovery", hawkes_recovery},
      {"2 likelihood-correctness", likelihood_correctness},
      {"3 entropy-oracle", entropy_oracle},
      {"4 inactivity-oracle", [&] { return inactivity_oracle(classify); }},
      {"5 gp-identities", gp_identities},
      {"6 planted-classification", [&] { return planted_classification(classify); }},
      {"7 planted-regression", planted_regression},
      {"8 fold-audit", fold_audit},
      {"9 cli-determinism", cli_determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " [" << fmt(seconds_since(t0), 3)
              << "s]" << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed ? 1 : 0;
}
