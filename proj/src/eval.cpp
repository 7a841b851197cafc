#include "livediff/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "livediff/error.hpp"

namespace livediff::eval {

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

EvalReport from_counts(const Counts& c, double threshold) {
  EvalReport r;
  r.threshold = threshold;
  r.counts = c;
  const auto n = c.total();
  r.accuracy = n == 0 ? 0.0
                      : static_cast<double>(c.live_accepted + c.fake_rejected) / static_cast<double>(n);
  r.far = ratio(c.fake_accepted, c.fake_accepted + c.fake_rejected);
  r.frr = ratio(c.live_rejected, c.live_rejected + c.live_accepted);
  if (r.far && r.frr) r.hter = (*r.far + *r.frr) / 2.0;
  return r;
}

std::string number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string maybe(const std::optional<double>& v) { return v ? number(*v) : "undefined"; }

}  // namespace

EvalReport evaluate(std::span<const ScoredSample> samples, double threshold) {
  Counts c;
  for (const auto& s : samples) {
    const bool accepted = s.score > threshold;
    if (s.label == Label::Live) {
      ++(accepted ? c.live_accepted : c.live_rejected);
    } else {
      ++(accepted ? c.fake_accepted : c.fake_rejected);
    }
  }
  return from_counts(c, threshold);
}

double select_threshold(std::span<const ScoredSample> devel) {
  std::vector<std::pair<double, Label>> sorted;
  sorted.reserve(devel.size());
  std::size_t live = 0;
  for (const auto& s : devel) {
    if (!std::isfinite(s.score)) throw Error(ErrorKind::InvalidConfig, "non-finite score for " + s.source_id);
    sorted.emplace_back(s.score, s.label);
    if (s.label == Label::Live) ++live;
  }
  const std::size_t fake = sorted.size() - live;
  if (live == 0 || fake == 0) {
    throw Error(ErrorKind::MissingClass, "threshold selection needs live and fake devel samples");
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  // Sweep thresholds upward; at each candidate every score <= t is rejected.
  double best_t = -std::numeric_limits<double>::infinity();
  double best_gap = std::numeric_limits<double>::infinity();
  double best_hter = std::numeric_limits<double>::infinity();
  auto consider = [&](double t, std::size_t live_rejected, std::size_t fake_rejected) {
    const double frr = static_cast<double>(live_rejected) / static_cast<double>(live);
    const double far = static_cast<double>(fake - fake_rejected) / static_cast<double>(fake);
    const double gap = std::abs(far - frr);
    const double hter = (far + frr) / 2.0;
    if (gap < best_gap || (gap == best_gap && hter < best_hter)) {
      best_gap = gap;
      best_hter = hter;
      best_t = t;
    }
  };

  consider(-std::numeric_limits<double>::infinity(), 0, 0);
  std::size_t live_rejected = 0;
  std::size_t fake_rejected = 0;
  for (std::size_t k = 0; k < sorted.size();) {
    const double value = sorted[k].first;
    while (k < sorted.size() && sorted[k].first == value) {
      ++(sorted[k].second == Label::Live ? live_rejected : fake_rejected);
      ++k;
    }
    const double t = k < sorted.size() ? value + (sorted[k].first - value) / 2.0
                                       : std::numeric_limits<double>::infinity();
    consider(t, live_rejected, fake_rejected);
  }
  return best_t;
}

std::string to_text(const EvalReport& r, const std::string& prefix) {
  std::string out;
  auto line = [&](const std::string& key, const std::string& value) {
    out += prefix + key + "=" + value + "\n";
  };
  line("threshold", number(r.threshold));
  line("accuracy", number(r.accuracy));
  line("far", maybe(r.far));
  line("frr", maybe(r.frr));
  line("hter", maybe(r.hter));
  line("live_accepted", std::to_string(r.counts.live_accepted));
  line("fake_rejected", std::to_string(r.counts.fake_rejected));
  line("fake_accepted", std::to_string(r.counts.fake_accepted));
  line("live_rejected", std::to_string(r.counts.live_rejected));
  return out;
}

nlohmann::json to_json(const EvalReport& r) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json threshold =
      std::isinf(r.threshold) ? nlohmann::json(number(r.threshold)) : nlohmann::json(r.threshold);
  return {{"threshold", threshold},
          {"accuracy", r.accuracy},
          {"far", opt(r.far)},
          {"frr", opt(r.frr)},
          {"hter", opt(r.hter)},
          {"counts",
           {{"live_accepted", r.counts.live_accepted},
            {"fake_rejected", r.counts.fake_rejected},
            {"fake_accepted", r.counts.fake_accepted},
            {"live_rejected", r.counts.live_rejected}}}};
}

}  // namespace livediff::eval
