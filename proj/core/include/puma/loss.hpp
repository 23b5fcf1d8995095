#pragma once

#include <cstdint>
#include <vector>

namespace puma {

/// Per-pixel class scores, row-major with the class axis fastest:
/// values[(y * width + x) * num_classes + k].
struct LogitField {
  int width = 0;
  int height = 0;
  int num_classes = 0;
  std::vector<double> values;

  LogitField() = default;
  LogitField(int w, int h, int k)
      : width(w), height(h), num_classes(k),
        values(static_cast<std::size_t>(w) * h * k, 0.0) {}

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  double at(int x, int y, int k) const {
    return values[(static_cast<std::size_t>(y) * width + x) * num_classes + k];
  }
  double& at(int x, int y, int k) {
    return values[(static_cast<std::size_t>(y) * width + x) * num_classes + k];
  }
};

/// Labels plus the annotated-pixel mask. Labels under masked-out pixels are
/// ignored but must still be in [0, num_classes).
struct MaskedTarget {
  int width = 0;
  int height = 0;
  std::vector<int> labels;
  std::vector<std::uint8_t> mask;  // nonzero = annotated
};

struct LossResult {
  double loss = 0.0;
  std::uint64_t annotated_count = 0;
};

/// Cross-entropy averaged over annotated pixels only:
///   loss = -(1/|M|) sum_{p in M} log softmax(logits[p])[labels[p]].
/// Softmax uses max-subtraction, so logits of any magnitude stay finite.
/// An all-false mask yields (0, 0) rather than an error: fully unannotated
/// crops are legitimate inputs and the caller can skip on annotated_count.
///
/// Throws shape_mismatch, non_finite_logit.
LossResult masked_cross_entropy(const LogitField& logits, const MaskedTarget& target);

/// d loss / d logits, same layout as the logit field:
/// (softmax - onehot)/|M| at annotated pixels, exactly 0 elsewhere.
std::vector<double> masked_ce_gradient(const LogitField& logits, const MaskedTarget& target);

/// Central-difference verification of the analytic gradient. Every logit is
/// perturbed by +-step; returns the maximum relative error, where entries
/// with |analytic| and |difference| both below zero_floor are compared on the
/// absolute scale |diff| / zero_floor instead.
double finite_difference_check(const LogitField& logits, const MaskedTarget& target, double step,
                               double zero_floor = 1e-3);

}  // namespace puma
