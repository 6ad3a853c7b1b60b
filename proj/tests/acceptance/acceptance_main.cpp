// Copyright 2026 The CEC Authors. All Rights Reserved.
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

// Acceptance gate: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "cec/cifar.hpp"
#include "cec/error.hpp"
#include "cec/evaluate.hpp"
#include "cec/gradcheck.hpp"
#include "cec/optim.hpp"
#include "cec/param_io.hpp"
#include "cec/pipeline.hpp"
#include "grad_cases.hpp"
#include "test_util.hpp"

namespace cec {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------------------
// 1. Gradient suite

Outcome gradient_suite() {
  const auto t0 = Clock::now();
  constexpr std::size_t kPoints = 100;
  constexpr double kTol = 1e-4;
  std::vector<testing::GradCase> cases = testing::op_grad_cases();
  cases.push_back({"cosine-head-loss", testing::cosine_head_case});
  cases.push_back({"adapter-loss", [](std::uint64_t s) { return testing::adapter_loss_case(s); }});

  double worst = 0.0;
  std::string worst_case;
  for (const auto& c : cases) {
    std::size_t checked = 0;
    for (std::uint64_t s = 1; checked < kPoints && s <= 4 * kPoints; ++s) {
      auto [bg, root] = c.build(s);
      double err = 0.0;
      try {
        err = grad_check(bg.graph, bg.bindings, 1e-6, root);
      } catch (const KinkError&) {
        continue;
      }
      ++checked;
      if (err > worst) worst = err, worst_case = c.name;
    }
    if (checked < kPoints) return {false, fmt::format("{}: only {} kink-free points", c.name, checked)};
  }
  const double secs = seconds_since(t0);
  return {worst <= kTol && secs < 30.0,
          fmt::format("{} graphs x {} points, max rel err {:.2e} ({}) <= {:.0e}, {:.1f}s < 30s",
                      cases.size(), kPoints, worst, worst_case, kTol, secs)};
}

// ---------------------------------------------------------------------------
// 2. Adapter invariants

AdapterParams random_adapter(std::size_t c, std::uint64_t seed, double u_range) {
  AdapterConfig cfg;
  cfg.embedding_dim = c;
  cfg.heads = 1 + seed % 2;
  AdapterParams p = init_adapter(cfg, seed);
  Rng rng(derive_seed(seed, 99));
  for (auto& [name, t] : p.params) {
    if (name.find(".u.") != std::string::npos) t = uniform_tensor(t.shape(), -u_range, u_range, rng);
  }
  return p;
}

Outcome adapter_invariants() {
  constexpr std::size_t kDim = 16;
  double row_sum_err = 0.0, perm_err = 0.0;
  bool identity_exact = true;
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng(s);
    const std::size_t m = std::uniform_int_distribution<std::size_t>(2, 64)(rng);
    const ClassifierBank bank = testing::random_bank(m, kDim, derive_seed(s, 1));
    const AdapterParams p = random_adapter(kDim, s, 0.2);

    // (a)
    for (std::size_t h = 0; h < p.config.heads; ++h) {
      const Tensor a = attention_normalize(relation_coefficients(p, bank, h));
      for (std::size_t j = 0; j < m; ++j) {
        double sum = 0.0;
        for (double v : a.row_span(j)) sum += v;
        row_sum_err = std::max(row_sum_err, std::abs(sum - 1.0));
      }
    }
    // (b)
    AdapterParams zero = p;
    for (auto& [name, t] : zero.params) {
      if (name.find(".u.") != std::string::npos) t = Tensor(t.shape());
    }
    identity_exact = identity_exact && adapt(zero, bank).stacked() == bank.stacked();
    // (c)
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const Tensor lhs = adapt(p, bank.with_rows(select_rows(bank.stacked(), perm))).stacked();
    const Tensor rhs = select_rows(adapt(p, bank).stacked(), perm);
    perm_err = std::max(perm_err, max_abs_diff(lhs, rhs));
  }

  // (d): train on 30-node banks, deploy on 200 nodes.
  AdapterConfig cfg;
  cfg.embedding_dim = kDim;
  AdapterParams trained = init_adapter(cfg, 7);
  SgdState opt = make_sgd_state(trained.params, 0.05, 0.9);
  double first_loss = 0.0, last_loss = 0.0;
  for (std::uint64_t it = 0; it < 30; ++it) {
    const ClassifierBank bank = testing::random_bank(30, kDim, derive_seed(1000, it));
    const Tensor queries = testing::random_matrix(30, kDim, derive_seed(2000, it));
    Tensor noisy = queries;
    const Tensor w = bank.stacked();
    for (std::size_t i = 0; i < 30; ++i) {
      for (std::size_t j = 0; j < kDim; ++j) noisy(i, j) = w(i, j) + 0.5 * queries(i, j);
    }
    std::vector<int> labels(30);
    std::iota(labels.begin(), labels.end(), 0);
    AdaptLossGraph lg = adapt_loss_graph(trained, bank, noisy, labels, AdaptMode::train(it));
    const BackwardResult r = lg.bg.backward(lg.loss);
    (it == 0 ? first_loss : last_loss) = r.loss;
    SgdUpdate u = sgd_step(trained.params, lg.bg.named_grads(r), opt);
    trained.params = std::move(u.params);
    opt = std::move(u.state);
  }
  const ClassifierBank big = testing::random_bank(200, kDim, 31337);
  const ClassifierBank out = adapt(trained, big);
  const bool shape_ok = out.stacked().shape() == big.stacked().shape() && out.stacked().all_finite();

  const bool pass = row_sum_err <= 1e-9 && identity_exact && perm_err <= 1e-9 && shape_ok;
  return {pass, fmt::format("(a) max |row sum - 1| {:.1e} <= 1e-9; (b) U=0 identity {}; "
                            "(c) permutation err {:.1e} <= 1e-9 over 100 banks; "
                            "(d) 30-node trained (loss {:.3f} -> {:.3f}) on 200 nodes: shape {}",
                            row_sum_err, identity_exact ? "exact" : "BROKEN", perm_err, first_loss,
                            last_loss, shape_ok ? "ok" : "BROKEN")};
}

// ---------------------------------------------------------------------------
// 3. Metric arithmetic

Outcome metric_arithmetic() {
  const std::vector<double> row{75.85, 71.94, 68.50, 63.50, 62.43, 58.27,
                                57.73, 55.81, 54.83, 53.52, 52.28};
  const double pd = compute_pd(row);
  const double avg = average_accuracy(row);
  const std::string pd_text = fmt::format("{:.2f}", pd);
  const bool pass = std::abs(pd - 23.57) <= 1e-9 && pd_text == "23.57" && std::abs(avg - 61.33) <= 0.005;
  return {pass, fmt::format("PD {} (|PD - 23.57| = {:.1e}), mean {:.4f} vs 61.33 +- 0.005", pd_text,
                            std::abs(pd - 23.57), avg)};
}

// ---------------------------------------------------------------------------
// 4. Rotation exactness

Outcome rotation_exactness() {
  bool exact = true;
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Image img = testing::random_image(1 + s % 3, 9 + s % 8, 9 + s % 8, s);
    Image r = img;
    for (int i = 0; i < 4; ++i) r = rotate_right_angle(r, RightAngle::k90);
    exact = exact && r == img;
    exact = exact && rotate_right_angle(rotate_right_angle(img, RightAngle::k180), RightAngle::k180) == img;

    const Image smooth = testing::smooth_image(8 + s % 25, s);
    const Image a = rotate_arbitrary(smooth, 90.0);
    const Image b = rotate_right_angle(smooth, RightAngle::k90);
    for (std::size_t i = 0; i < a.pixels().size(); ++i) {
      worst = std::max(worst, std::abs(a.pixels()[i] - b.pixels()[i]));
    }
  }
  return {exact && worst <= 1e-9,
          fmt::format("4x90 and 2x180 bit-exact identity: {}; arbitrary(90) vs exact max err {:.1e} <= 1e-9",
                      exact ? "yes" : "NO", worst)};
}

// ---------------------------------------------------------------------------
// Shared desk-scale setup for criteria 5-7 and 9.

struct DeskSeed {
  ExperimentConfig config;
  Prepared prepared;
};

std::vector<DeskSeed>& desk_seeds() {
  static std::vector<DeskSeed> seeds = [] {
    std::vector<DeskSeed> out;
    for (std::uint64_t s = 1; s <= 5; ++s) {
      ExperimentConfig c = desk_config(s);
      Prepared p = prepare(c);
      out.push_back({std::move(c), std::move(p)});
    }
    return out;
  }();
  return seeds;
}

// 5. Freeze contract

Outcome freeze_contract() {
  std::size_t runs = 0;
  bool all_equal = true;
  for (const DeskSeed& d : desk_seeds()) {
    for (int variant = 0; variant < 3; ++variant) {
      ExperimentConfig c = d.config;
      c.run.switches.adapter = variant == 1;
      c.run.switches.pil = variant == 1;
      if (variant == 2) {
        c.run.head = HeadKind::kNegL2;
        c.run.switches.data_init = false;
      }
      const ExperimentResult r = run_experiment(c, d.prepared);
      // PIL may tune the last layer before deployment; the deployed encoder
      // is what must stay frozen through the sessions.
      const std::string expected = params_digest(
          r.adapter ? r.adapter->deployed_encoder : d.prepared.encoder.encoder);
      all_equal = all_equal && r.run.encoder_digest_before == expected &&
                  r.run.encoder_digest_after == expected;
      ++runs;
    }
  }
  return {all_equal, fmt::format("encoder digest unchanged across {} decoupled runs", runs)};
}

// 6. Forgetting of the non-decoupled linear run

Outcome forgetting() {
  const auto t0 = Clock::now();
  bool pass = true;
  std::string detail;
  double min_gap = INFINITY;
  for (const DeskSeed& d : desk_seeds()) {
    ExperimentConfig c = d.config;
    c.run.head = HeadKind::kLinear;
    const SessionMetrics dec = run_experiment(c, d.prepared).run.metrics;
    c.run.switches.decoupled = false;
    const SessionMetrics fin = run_experiment(c, d.prepared).run.metrics;
    for (std::size_t i = 1; i < dec.accuracies.size(); ++i) {
      const double gap = dec.accuracies[i] - fin.accuracies[i];
      min_gap = std::min(min_gap, gap);
      if (!(fin.accuracies[i] < dec.accuracies[i])) pass = false;
    }
    detail += fmt::format(" s{}: {:.1f}/{:.1f}", c.seed, 100 * dec.accuracies.back(),
                          100 * fin.accuracies.back());
  }
  const double secs = seconds_since(t0);
  return {pass && secs < 180.0,
          fmt::format("finetuned < decoupled at every session >= 1 over 5 seeds, min gap {:.2f} pts, "
                      "last-session decoupled/finetuned{}; {:.1f}s < 180s",
                      100 * min_gap, detail, secs)};
}

// 7. CEC benefit

Outcome cec_benefit() {
  const auto t0 = Clock::now();
  std::size_t better = 0;
  double worst = INFINITY;
  std::string detail;
  for (const DeskSeed& d : desk_seeds()) {
    ExperimentConfig c = d.config;
    const double base = run_experiment(c, d.prepared).run.metrics.avg;
    c.run.switches.adapter = c.run.switches.pil = true;
    const double cec = run_experiment(c, d.prepared).run.metrics.avg;
    const double diff = 100.0 * (cec - base);
    worst = std::min(worst, diff);
    if (diff > 0.0) ++better;
    detail += fmt::format(" {:+.2f}", diff);
  }
  const double secs = seconds_since(t0);
  return {worst >= -0.5 && better >= 3 && secs < 600.0,
          fmt::format("CEC - baseline avg (pts):{}; min {:+.2f} >= -0.50, better in {}/5 >= 3; "
                      "{:.1f}s < 600s",
                      detail, worst, better, secs)};
}

// ---------------------------------------------------------------------------
// 8. Oracle equivalences

Outcome oracle_equivalences() {
  std::size_t eval_mismatch = 0, init_mismatch = 0;
  double relation_err = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng(s);
    const std::size_t n = 1 + s % 50, m = 2 + s % 11, dim = 1 + s % 9;

    Tensor logits = testing::random_matrix(n, m, derive_seed(s, 1));
    if (s % 2 == 0) {
      for (double& v : logits.values()) v = std::round(v * 3.0);
    }
    std::vector<int> ids(m);
    std::iota(ids.begin(), ids.end(), 10);
    std::shuffle(ids.begin(), ids.end(), rng);
    std::vector<int> labels(n);
    for (int& l : labels) l = ids[std::uniform_int_distribution<std::size_t>(0, m - 1)(rng)];
    const EvalResult r = evaluate_logits(logits, ids, labels);
    if (r.correct != testing::correct_count_oracle(logits, ids, labels) ||
        r.accuracy != static_cast<double>(r.correct) / static_cast<double>(n)) {
      ++eval_mismatch;
    }

    const Tensor emb = testing::random_matrix(n + m, dim, derive_seed(s, 2), -5.0, 5.0);
    std::vector<int> emb_labels(n + m);
    for (std::size_t i = 0; i < n + m; ++i) emb_labels[i] = ids[i % m];
    std::shuffle(emb_labels.begin(), emb_labels.end(), rng);
    std::vector<int> sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    if (init_from_data(emb, emb_labels, HeadKind::kCosine).weights !=
        testing::class_mean_oracle(emb, emb_labels, sorted)) {
      ++init_mismatch;
    }

    const AdapterParams p = random_adapter(dim, s, 0.1);
    const ClassifierBank bank = testing::random_bank(m, dim, derive_seed(s, 3));
    for (std::size_t h = 0; h < p.config.heads; ++h) {
      relation_err = std::max(
          relation_err, max_abs_diff(relation_coefficients(p, bank, h),
                                     testing::relation_oracle(bank.stacked(), p.phi(h), p.theta(h))));
    }
  }
  return {eval_mismatch == 0 && init_mismatch == 0 && relation_err <= 1e-12,
          fmt::format("evaluate vs counting oracle: {} mismatches/100; init_from_data vs "
                      "accumulate/divide: {} mismatches/100; relation coefficients max err "
                      "{:.1e} <= 1e-12",
                      eval_mismatch, init_mismatch, relation_err)};
}

// ---------------------------------------------------------------------------
// 9. Determinism

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "cec_acceptance_determinism";
  fs::remove_all(root);
  ExperimentConfig c = desk_config(11);
  c.run.switches.adapter = c.run.switches.pil = true;
  std::vector<fs::path> dirs;
  for (std::size_t threads : {1u, 1u, 4u}) {
    ExperimentConfig ct = c;
    ct.threads = threads;
    ct.run.threads = threads;
    const Prepared p = prepare(ct);
    const ExperimentResult r = run_experiment(ct, p);
    dirs.push_back(root / fmt::format("run{}", dirs.size()));
    write_run_outputs(dirs.back(), ct, p, r);
  }
  bool same = true;
  for (const char* f : {"metrics.json", "sessions.csv"}) {
    const std::string ref = read_text_file(dirs[0] / f);
    for (std::size_t i = 1; i < dirs.size(); ++i) same = same && read_text_file(dirs[i] / f) == ref;
  }
  fs::remove_all(root);
  return {same, "metrics.json and sessions.csv byte-identical over 2 runs at 1 thread and 1 at 4 threads"};
}

// ---------------------------------------------------------------------------
// 10. Format conformance

std::string record(int coarse, int fine, unsigned salt) {
  std::string r(kCifarRecordSize, '\0');
  r[0] = static_cast<char>(coarse);
  r[1] = static_cast<char>(fine);
  for (std::size_t i = 2; i < r.size(); ++i) r[i] = static_cast<char>((i * 31 + salt) & 0xff);
  return r;
}

Outcome format_conformance() {
  const fs::path dir = fs::temp_directory_path() / "cec_acceptance_cifar";
  fs::create_directories(dir);
  const std::string a = record(3, 17, 1), b = record(11, 99, 2);
  std::ofstream(dir / "two.bin", std::ios::binary) << a + b;
  std::ofstream(dir / "short.bin", std::ios::binary) << a + b.substr(0, kCifarRecordSize - 1);

  bool exact = true;
  const auto recs = read_cifar100_file(dir / "two.bin");
  exact = recs.size() == 2 && recs[0].coarse_label == 3 && recs[0].fine_label == 17 &&
          recs[1].coarse_label == 11 && recs[1].fine_label == 99;
  for (std::size_t r = 0; exact && r < 2; ++r) {
    const std::string& bytes = r == 0 ? a : b;
    for (std::size_t k = 0; k < 3072; ++k) {
      const double want = static_cast<unsigned char>(bytes[2 + k]) / 255.0;
      if (recs[r].image.at(k / 1024, (k % 1024) / 32, k % 32) != want) exact = false;
    }
  }
  bool truncated_rejected = false;
  try {
    read_cifar100_file(dir / "short.bin");
  } catch (const FormatError&) {
    truncated_rejected = true;
  }
  fs::remove_all(dir);

  std::string official = "official files not present (set CEC_CIFAR100_DIR to check them)";
  bool official_ok = true;
  if (const char* env = std::getenv("CEC_CIFAR100_DIR"); env && fs::exists(fs::path(env) / "train.bin")) {
    const Dataset d = load_cifar100_binary(env);
    for (int k = 0; k < kCifar100Classes; ++k) {
      official_ok = official_ok && d.train(k).size() == 500 && d.test(k).size() == 100;
    }
    official = fmt::format("official files: 500 train / 100 test per class: {}", official_ok ? "yes" : "NO");
  }
  return {exact && truncated_rejected && official_ok,
          fmt::format("2-record fixture exact: {}; truncated file rejected: {}; {}", exact ? "yes" : "NO",
                      truncated_rejected ? "yes" : "NO", official)};
}

}  // namespace
}  // namespace cec

int main() {
  using cec::Outcome;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"1 gradient suite", cec::gradient_suite},
      {"2 adapter invariants", cec::adapter_invariants},
      {"3 metric arithmetic", cec::metric_arithmetic},
      {"4 rotation exactness", cec::rotation_exactness},
      {"5 freeze contract", cec::freeze_contract},
      {"6 desk-scale forgetting", cec::forgetting},
      {"7 desk-scale CEC benefit", cec::cec_benefit},
      {"8 oracle equivalences", cec::oracle_equivalences},
      {"9 determinism", cec::determinism},
      {"10 format conformance", cec::format_conformance},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failures;
    fmt::print("{} criterion {}: {}\n", o.pass ? "PASS" : "FAIL", name, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failures),
             criteria.size());
  return failures == 0 ? 0 : 1;
}
