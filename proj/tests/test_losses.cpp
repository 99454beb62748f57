#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "agreeloss/error.hpp"
#include "agreeloss/gradcheck.hpp"
#include "agreeloss/losses.hpp"
#include "agreeloss/rng.hpp"
#include "test_support.hpp"

using namespace agreeloss;
using testsupport::Sentence;

namespace {

constexpr double kTwoThirds = 2.0 / 3.0;

BatchTarget target_of(const std::vector<Sentence>& batch) {
  BatchTarget t;
  for (const auto& s : batch) {
    t.y_true.push_back(s.y);
    t.n.push_back(s.n);
    t.r.push_back(s.r);
  }
  return t;
}

std::vector<double> preds_of(const std::vector<Sentence>& batch) {
  std::vector<double> p;
  for (const auto& s : batch) p.push_back(s.p);
  return p;
}

std::vector<Sentence> random_sentences(Rng& rng, std::size_t max_m) {
  static constexpr double kR[] = {0.5, 0.6, kTwoThirds, 0.8, 1.0};
  static constexpr int kN[] = {1, 3, 5};
  std::vector<Sentence> b(1 + rng.below(max_m));
  for (auto& s : b) s = {static_cast<int>(rng.below(2)), kN[rng.below(3)], kR[rng.below(5)],
                         rng.uniform(0.01, 0.99)};
  return b;
}

}  // namespace

TEST_CASE("loss kind names") {
  for (const auto kind : kAllLossKinds) CHECK(parse_loss_kind(to_string(kind)) == kind);
  CHECK_THROWS_AS(parse_loss_kind("focal"), InvalidParameter);
}

TEST_CASE("vanilla cross-entropy") {
  const double half[] = {0.5};
  CHECK(vanilla_ce(half, {{1}, {3}, {1.0}}) == doctest::Approx(0.693147).epsilon(1e-6));

  const double perfect[] = {1.0 - kProbEps, kProbEps};
  CHECK(vanilla_ce(perfect, {{1, 0}, {1, 1}, {1.0, 1.0}}) == doctest::Approx(0.0).epsilon(1e-10));

  // tests/oracles/scalar_losses.py
  const double p3[] = {0.9, 0.2, 0.6};
  CHECK(std::abs(vanilla_ce(p3, {{1, 0, 1}, {1, 1, 1}, {1, 1, 1}}) - 0.27977656357934224673) <
        1e-15);

  // ignores n and r entirely
  CHECK(vanilla_ce(p3, {{1, 0, 1}, {5, 3, 1}, {0.6, kTwoThirds, 1}}) ==
        vanilla_ce(p3, {{1, 0, 1}, {1, 1, 1}, {1, 1, 1}}));
}

TEST_CASE("probabilities are clamped before logs") {
  const double zero[] = {0.0};
  const double loss = vanilla_ce(zero, {{1}, {1}, {1.0}});
  CHECK(std::isfinite(loss));
  CHECK(loss == doctest::Approx(-std::log(kProbEps)));
  const auto g = grad_wrt_pred(LossKind::Noisy, zero, {{1}, {3}, {kTwoThirds}});
  CHECK(std::isfinite(g[0]));
  CHECK(clamp_probability(2.0) == 1.0 - kProbEps);
}

TEST_CASE("noisy cross-entropy") {
  SUBCASE("unanimous sentence reduces to -log p") {
    for (int n : {1, 3, 5}) {
      const double p[] = {0.37};
      CHECK(noisy_ce(p, {{1}, {n}, {1.0}}) == doctest::Approx(-std::log(0.37)));
    }
  }
  SUBCASE("minimum at p = r equals the Bernoulli entropy") {
    const double p[] = {kTwoThirds};
    const BatchTarget t{{1}, {3}, {kTwoThirds}};
    CHECK(std::abs(noisy_ce(p, t) - 0.63651416829481281845) < 1e-15);
    // dense grid scan: nothing below the value at p = r
    const double at_r = noisy_ce(p, t);
    double best_p = 0.0;
    double best = INFINITY;
    for (int k = 1; k < 100000; ++k) {
      const double q[] = {k / 100000.0};
      const double v = noisy_ce(q, t);
      CHECK(v >= at_r - 1e-15);
      if (v < best) best = v, best_p = q[0];
    }
    CHECK(best_p == doctest::Approx(0.66667).epsilon(1e-9));
  }
  SUBCASE("label flip symmetry") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
      const double r = rng.uniform(0.5, 1.0);
      const double p = rng.uniform(0.01, 0.99);
      const double a[] = {p};
      const double b[] = {1.0 - p};
      CHECK(noisy_ce(a, {{1}, {3}, {r}}) == doctest::Approx(noisy_ce(b, {{0}, {3}, {r}})).epsilon(1e-12));
    }
  }
}

TEST_CASE("refined cross-entropy") {
  SUBCASE("single sentence equals vanilla for any (n, r)") {
    for (int n : {1, 3, 5}) {
      for (double r : {0.6, kTwoThirds, 0.8, 1.0}) {
        const double p[] = {0.42};
        CHECK(refined_ce(p, {{0}, {n}, {r}}) == doctest::Approx(vanilla_ce(p, {{0}, {n}, {r}})).epsilon(1e-14));
      }
    }
  }
  SUBCASE("uniform weights equal vanilla") {
    const double p[] = {0.3, 0.9, 0.55};
    const BatchTarget t{{0, 1, 1}, {3, 3, 3}, {1, 1, 1}};
    CHECK(refined_ce(p, t) == doctest::Approx(vanilla_ce(p, t)).epsilon(1e-14));
  }
  SUBCASE("weighted pair matches the scalar oracle") {
    const double p[] = {0.8, 0.3};
    const BatchTarget t{{1, 0}, {3, 3}, {1.0, kTwoThirds}};
    CHECK(std::abs(refined_ce(p, t) - 0.27655610836401880502) < 1e-15);
  }
  SUBCASE("no agreeing votes") {
    const double p[] = {0.5};
    CHECK_THROWS_AS(refined_ce(p, {{1}, {3}, {0.0}}), InvalidParameter);
  }
}

TEST_CASE("batch validation") {
  const double p2[] = {0.5, 0.5};
  const double p1[] = {0.5};
  CHECK_THROWS_AS(vanilla_ce(p2, {{1}, {1}, {1.0}}), LengthMismatch);
  CHECK_THROWS_AS(noisy_ce(p1, {{1}, {1, 3}, {1.0}}), LengthMismatch);
  CHECK_THROWS_AS(grad_wrt_pred(LossKind::Refined, p2, {{1}, {1}, {1.0}}), LengthMismatch);
  CHECK_THROWS_AS(noisy_ce({}, {{}, {}, {}}), InvalidParameter);
  CHECK_THROWS_AS(noisy_ce(p1, {{2}, {1}, {1.0}}), InvalidParameter);
  CHECK_THROWS_AS(noisy_ce(p1, {{1}, {0}, {1.0}}), InvalidParameter);
  CHECK_THROWS_AS(noisy_ce(p1, {{1}, {1}, {1.5}}), InvalidParameter);
}

TEST_CASE("all losses agree with independent per-annotator oracles") {
  Rng rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const auto batch = random_sentences(rng, 8);
    const auto t = target_of(batch);
    const auto p = preds_of(batch);
    CHECK(vanilla_ce(p, t) == doctest::Approx(static_cast<double>(testsupport::oracle_vanilla(batch))).epsilon(1e-13));
    CHECK(noisy_ce(p, t) == doctest::Approx(static_cast<double>(testsupport::oracle_noisy(batch))).epsilon(1e-13));
    CHECK(refined_ce(p, t) == doctest::Approx(static_cast<double>(testsupport::oracle_refined(batch))).epsilon(1e-13));
  }
}

TEST_CASE("gradient examples") {
  SUBCASE("noisy gradient vanishes at p = r") {
    for (double r : {0.6, kTwoThirds, 0.8}) {
      const double p[] = {r};
      CHECK(grad_wrt_pred(LossKind::Noisy, p, {{1}, {3}, {r}})[0] == 0.0);
    }
  }
  SUBCASE("vanilla at p = 0.5 is -2") {
    const double p[] = {0.5};
    CHECK(grad_wrt_pred(LossKind::Vanilla, p, {{1}, {1}, {1.0}})[0] == -2.0);
  }
}

TEST_CASE("gradients match central differences (test-local oracle)") {
  // Independent of the library's checker: differences of the long double
  // per-annotator oracles.
  Rng rng(77);
  const long double h = 1e-6L;
  using Oracle = long double (*)(const std::vector<Sentence>&);
  const std::pair<LossKind, Oracle> kinds[] = {{LossKind::Vanilla, testsupport::oracle_vanilla},
                                               {LossKind::Noisy, testsupport::oracle_noisy},
                                               {LossKind::Refined, testsupport::oracle_refined}};
  for (int trial = 0; trial < 300; ++trial) {
    const auto batch = random_sentences(rng, 8);
    for (const auto& [kind, oracle] : kinds) {
      const auto g = grad_wrt_pred(kind, preds_of(batch), target_of(batch));
      for (std::size_t i = 0; i < batch.size(); ++i) {
        auto up = batch;
        auto down = batch;
        up[i].p = static_cast<double>(batch[i].p + h);
        down[i].p = static_cast<double>(batch[i].p - h);
        const long double fd = (oracle(up) - oracle(down)) / (static_cast<long double>(up[i].p) - down[i].p);
        const double scale = std::max(std::abs(g[i]), static_cast<double>(std::abs(fd)));
        if (scale <= 1e-6) continue;
        CHECK(std::abs(g[i] - static_cast<double>(fd)) / scale <= 1e-5);
      }
    }
  }
}

TEST_CASE("library gradcheck passes and catches a sign flip") {
  GradcheckOptions opts;
  opts.trials = 200;
  const auto ok = run_gradcheck(opts);
  CHECK(ok.passed());
  for (const auto& k : ok.kinds) {
    CHECK(k.checked > 0);
    CHECK(k.max_rel_error <= 1e-5);
  }

  const GradientFn flipped = [](LossKind kind, std::span<const double> p, const BatchTarget& t) {
    auto g = grad_wrt_pred(kind, p, t);
    if (kind == LossKind::Noisy) for (auto& x : g) x = -x;
    return g;
  };
  const auto bad = run_gradcheck(opts, flipped);
  CHECK_FALSE(bad.passed());
  CHECK(bad.kinds[0].passed());
  CHECK_FALSE(bad.kinds[1].passed());
  CHECK(bad.kinds[2].passed());
}

TEST_CASE("loss properties") {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const auto batch = random_sentences(rng, 8);
    const auto t = target_of(batch);
    const auto p = preds_of(batch);

    for (const auto kind : kAllLossKinds) CHECK(loss_value(kind, p, t) >= 0.0);

    // permutation invariance
    std::vector<std::size_t> order(batch.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span(order));
    std::vector<Sentence> permuted;
    for (auto i : order) permuted.push_back(batch[i]);
    for (const auto kind : kAllLossKinds) {
      CHECK(loss_value(kind, preds_of(permuted), target_of(permuted)) ==
            doctest::Approx(loss_value(kind, p, t)).epsilon(1e-13));
    }

    // scaling every n by a constant leaves refined (and noisy) unchanged
    auto scaled = t;
    for (auto& n : scaled.n) n *= 7;
    CHECK(refined_ce(p, scaled) == doctest::Approx(refined_ce(p, t)).epsilon(1e-14));
    CHECK(noisy_ce(p, scaled) == doctest::Approx(noisy_ce(p, t)).epsilon(1e-14));

    // reduction identities
    auto unanimous = t;
    const int common_n = t.n[0];
    for (auto& n : unanimous.n) n = common_n;
    for (auto& r : unanimous.r) r = 1.0;
    CHECK(std::abs(noisy_ce(p, unanimous) - vanilla_ce(p, unanimous)) <= 1e-12);
    CHECK(std::abs(refined_ce(p, unanimous) - vanilla_ce(p, unanimous)) <= 1e-12);
  }
}

TEST_CASE("loss profile") {
  const double rs[] = {0.5, 0.6, kTwoThirds, 0.8, 1.0};
  const int grid = 1001;
  const double step = (1.0 - 2 * kProbEps) / (grid - 1);

  SUBCASE("noisy, label 1: argmin tracks r") {
    const auto rows = loss_profile(LossKind::Noisy, 1, 3, rs, grid);
    CHECK(rows.size() == 5 * grid);
    const auto arg = profile_argmins(rows, grid);
    for (std::size_t c = 0; c < 5; ++c) {
      CHECK(std::abs(rows[c * grid + arg[c]].y_pred - rs[c]) <= step);
    }
    CHECK(arg.back() == grid - 1);
  }
  SUBCASE("noisy, label 0 mirrors label 1") {
    const auto one = loss_profile(LossKind::Noisy, 1, 3, rs, grid);
    const auto zero = loss_profile(LossKind::Noisy, 0, 3, rs, grid);
    const auto arg1 = profile_argmins(one, grid);
    const auto arg0 = profile_argmins(zero, grid);
    CHECK(arg0.back() == 0);
    for (std::size_t c = 0; c < 5; ++c) {
      CHECK(std::abs(zero[c * grid + arg0[c]].y_pred - (1.0 - rs[c])) <= step);
      // Loose tolerance: 1 - 1e-12 is not exact in double, which moves the
      // clamped endpoint loss by ~1e-4 relative.
      for (int k = 0; k < grid; ++k) {
        CHECK(zero[c * grid + k].loss ==
              doctest::Approx(one[c * grid + (grid - 1 - k)].loss).epsilon(1e-5));
      }
    }
    (void)arg1;
  }
  SUBCASE("refined and vanilla: argmin at the boundary for every r") {
    for (const auto kind : {LossKind::Refined, LossKind::Vanilla}) {
      const auto arg = profile_argmins(loss_profile(kind, 1, 3, rs, grid), grid);
      for (auto a : arg) CHECK(a == static_cast<std::size_t>(grid - 1));
      const auto arg0 = profile_argmins(loss_profile(kind, 0, 3, rs, grid), grid);
      for (auto a : arg0) CHECK(a == 0);
    }
  }
  SUBCASE("grid of three") {
    const auto rows = loss_profile(LossKind::Noisy, 1, 3, rs, 3);
    CHECK(rows.size() == 15);
    CHECK(rows[0].y_pred == kProbEps);
    CHECK(rows[2].y_pred == 1.0 - kProbEps);
  }
  SUBCASE("bad grid") {
    CHECK_THROWS_AS(loss_profile(LossKind::Noisy, 1, 3, rs, 2), InvalidParameter);
  }
  SUBCASE("CSV layout") {
    std::ostringstream out;
    const double r1[] = {kTwoThirds};
    write_profile_csv(loss_profile(LossKind::Noisy, 1, 3, r1, 3), out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "r,y_pred,loss");
    std::getline(in, line);
    CHECK(line.rfind("0.666666667,1e-12,", 0) == 0);
  }
}
