#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "livediff/error.hpp"
#include "livediff/eval.hpp"
#include "oracles.hpp"

using namespace livediff;
using eval::ScoredSample;

namespace {

std::vector<ScoredSample> make(const std::vector<double>& live, const std::vector<double>& fake) {
  std::vector<ScoredSample> out;
  for (std::size_t k = 0; k < live.size(); ++k) out.push_back({"l" + std::to_string(k), live[k], Label::Live});
  for (std::size_t k = 0; k < fake.size(); ++k) out.push_back({"f" + std::to_string(k), fake[k], Label::Fake});
  return out;
}

}  // namespace

TEST_CASE("perfect scores") {
  const auto s = make({2.0, 3.0}, {-1.0, -2.0});
  const auto r = eval::evaluate(s, 0.0);
  CHECK(*r.far == 0.0);
  CHECK(*r.frr == 0.0);
  CHECK(*r.hter == 0.0);
  CHECK(r.accuracy == 1.0);
}

TEST_CASE("constructed FAR 0.1 and FRR 0.2") {
  // 10 fakes with one accepted, 5 lives with one rejected.
  const auto s = make({1, 1, 1, 1, -1}, {1, -1, -1, -1, -1, -1, -1, -1, -1, -1});
  const auto r = eval::evaluate(s, 0.0);
  CHECK(*r.far == 0.1);
  CHECK(*r.frr == 0.2);
  CHECK(*r.hter == doctest::Approx(0.15).epsilon(1e-15));
  CHECK(*r.hter == (*r.far + *r.frr) / 2.0);
}

TEST_CASE("hand-counted mixed case") {
  const auto s = make({1, 1, 1, -1}, {-1, -1, -1, -1, -1, 1});
  const auto r = eval::evaluate(s, 0.0);
  CHECK(r.accuracy == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(*r.frr == 0.25);
  CHECK(*r.far == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(*r.hter == (0.25 + 1.0 / 6.0) / 2.0);
  CHECK(r.counts == eval::Counts{3, 5, 1, 1});
}

TEST_CASE("score equal to the threshold is fake") {
  const auto r = eval::evaluate(make({0.5}, {0.5}), 0.5);
  CHECK(r.counts.live_rejected == 1);
  CHECK(r.counts.fake_rejected == 1);
}

TEST_CASE("absent classes give undefined rates") {
  const auto r = eval::evaluate(make({1.0, 2.0}, {}), 0.0);
  CHECK(r.frr.has_value());
  CHECK_FALSE(r.far.has_value());
  CHECK_FALSE(r.hter.has_value());
  CHECK(eval::to_json(r)["far"].is_null());
  CHECK(eval::to_text(r).find("far=undefined") != std::string::npos);
  try {
    eval::select_threshold(make({1.0}, {}));
    FAIL("expected MissingClass");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingClass);
  }
}

TEST_CASE("separated devel picks the gap midpoint") {
  CHECK(eval::select_threshold(make({3.0, 5.0, 4.0}, {-1.0, 1.0, 0.0})) == 2.0);
}

TEST_CASE("identical scores pick a deterministic extreme") {
  const auto s = make({1.0, 1.0}, {1.0, 1.0});
  const double t = eval::select_threshold(s);
  CHECK(t == oracle::scan_threshold(s));
  CHECK(std::isinf(t));
}

TEST_CASE("threshold matches the exhaustive scan") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ScoredSample> s;
    for (int k = 0; k < 50; ++k) {
      const bool live = k == 0 || (k != 1 && coin(rng));
      double v = n(rng) + (live ? 0.8 : -0.8);
      if (trial % 5 == 0) v = std::round(v * 2.0) / 2.0;  // force ties
      s.push_back({"s" + std::to_string(k), v, live ? Label::Live : Label::Fake});
    }
    CHECK(eval::select_threshold(s) == oracle::scan_threshold(s));
  }
}

TEST_CASE("rates are monotone in the threshold and order invariant") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<ScoredSample> s;
  for (int k = 0; k < 40; ++k) s.push_back({"s", n(rng), k % 3 == 0 ? Label::Live : Label::Fake});
  double last_far = 2.0, last_frr = -1.0;
  for (double t = -3.0; t <= 3.0; t += 0.05) {
    const auto r = eval::evaluate(s, t);
    CHECK(*r.far <= last_far);
    CHECK(*r.frr >= last_frr);
    CHECK(*r.hter == (*r.far + *r.frr) / 2.0);
    last_far = *r.far;
    last_frr = *r.frr;
  }
  auto shuffled = s;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  CHECK(eval::evaluate(shuffled, 0.1).counts == eval::evaluate(s, 0.1).counts);
  CHECK(eval::select_threshold(shuffled) == eval::select_threshold(s));
}

TEST_CASE("positive affine transforms leave test counts unchanged") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ScoredSample> devel, test;
    for (int k = 0; k < 30; ++k) {
      devel.push_back({"d", n(rng) + (k % 2 ? 1.0 : -1.0), k % 2 ? Label::Live : Label::Fake});
      test.push_back({"t", n(rng) + (k % 2 ? 1.0 : -1.0), k % 2 ? Label::Live : Label::Fake});
    }
    const auto base = eval::evaluate(test, eval::select_threshold(devel)).counts;
    const double a = 0.25 + trial, b = trial - 7.0;
    for (auto* v : {&devel, &test})
      for (auto& x : *v) x.score = a * x.score + b;
    CHECK(eval::evaluate(test, eval::select_threshold(devel)).counts == base);
  }
}
