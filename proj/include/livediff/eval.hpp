#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "livediff/image.hpp"

namespace livediff::eval {

struct ScoredSample {
  std::string source_id;
  double score = 0.0;
  Label label = Label::Fake;
};

struct Counts {
  std::size_t live_accepted = 0;  // TP
  std::size_t fake_rejected = 0;  // TN
  std::size_t fake_accepted = 0;  // FP
  std::size_t live_rejected = 0;  // FN

  std::size_t total() const noexcept {
    return live_accepted + fake_rejected + fake_accepted + live_rejected;
  }
  friend bool operator==(const Counts&, const Counts&) = default;
};

/// Rates are empty when the class they are conditioned on is absent.
struct EvalReport {
  double threshold = 0.0;
  double accuracy = 0.0;
  std::optional<double> far;
  std::optional<double> frr;
  std::optional<double> hter;
  Counts counts;
};

/// A sample is accepted as live iff score > threshold.
EvalReport evaluate(std::span<const ScoredSample> samples, double threshold);

/// Equal-error operating point over midpoints of adjacent distinct scores plus
/// -inf/+inf. Ties go to lower HTER, then lower threshold.
double select_threshold(std::span<const ScoredSample> devel);

std::string to_text(const EvalReport& report, const std::string& prefix = "");
nlohmann::json to_json(const EvalReport& report);

}  // namespace livediff::eval
