#include "puma/loss.hpp"

#include <algorithm>
#include <cmath>

#include "puma/error.hpp"

namespace puma {

namespace {

void check_shapes(const LogitField& logits, const MaskedTarget& target) {
  if (logits.width <= 0 || logits.height <= 0 || logits.num_classes < 2)
    fail(errc::shape_mismatch, "logit field needs positive dimensions and >= 2 classes");
  const std::size_t pixels = logits.pixel_count();
  if (logits.values.size() != pixels * static_cast<std::size_t>(logits.num_classes))
    fail(errc::shape_mismatch, "logit buffer size does not match dimensions");
  if (target.width != logits.width || target.height != logits.height)
    fail(errc::shape_mismatch, "target dimensions do not match the logit field");
  if (target.labels.size() != pixels || target.mask.size() != pixels)
    fail(errc::shape_mismatch, "label/mask buffers do not match the pixel count");

  for (const double v : logits.values)
    if (!std::isfinite(v)) fail(errc::non_finite_logit, "logit field contains a non-finite value");
  for (std::size_t p = 0; p < pixels; ++p)
    if (target.labels[p] < 0 || target.labels[p] >= logits.num_classes)
      fail(errc::shape_mismatch,
           "label " + std::to_string(target.labels[p]) + " at pixel " + std::to_string(p) +
               " outside [0, " + std::to_string(logits.num_classes) + ")");
}

// log(sum_k exp(v[k])) with max subtraction.
double log_sum_exp(const double* values, int count) {
  double max_value = values[0];
  for (int k = 1; k < count; ++k) max_value = std::max(max_value, values[k]);
  double sum = 0.0;
  for (int k = 0; k < count; ++k) sum += std::exp(values[k] - max_value);
  return max_value + std::log(sum);
}

}  // namespace

LossResult masked_cross_entropy(const LogitField& logits, const MaskedTarget& target) {
  check_shapes(logits, target);
  const std::size_t pixels = logits.pixel_count();
  const int num_classes = logits.num_classes;

  double total = 0.0;
  std::uint64_t annotated = 0;
  for (std::size_t p = 0; p < pixels; ++p) {
    if (!target.mask[p]) continue;
    const double* row = logits.values.data() + p * static_cast<std::size_t>(num_classes);
    total += log_sum_exp(row, num_classes) - row[target.labels[p]];
    ++annotated;
  }
  if (annotated == 0) return LossResult{0.0, 0};
  return LossResult{total / static_cast<double>(annotated), annotated};
}

std::vector<double> masked_ce_gradient(const LogitField& logits, const MaskedTarget& target) {
  check_shapes(logits, target);
  const std::size_t pixels = logits.pixel_count();
  const int num_classes = logits.num_classes;

  std::vector<double> gradient(logits.values.size(), 0.0);
  std::uint64_t annotated = 0;
  for (std::size_t p = 0; p < pixels; ++p)
    if (target.mask[p]) ++annotated;
  if (annotated == 0) return gradient;

  const double scale = 1.0 / static_cast<double>(annotated);
  for (std::size_t p = 0; p < pixels; ++p) {
    if (!target.mask[p]) continue;
    const double* row = logits.values.data() + p * static_cast<std::size_t>(num_classes);
    double* out = gradient.data() + p * static_cast<std::size_t>(num_classes);

    double max_value = row[0];
    for (int k = 1; k < num_classes; ++k) max_value = std::max(max_value, row[k]);
    double sum = 0.0;
    for (int k = 0; k < num_classes; ++k) sum += std::exp(row[k] - max_value);
    for (int k = 0; k < num_classes; ++k) {
      const double softmax = std::exp(row[k] - max_value) / sum;
      out[k] = (softmax - (k == target.labels[p] ? 1.0 : 0.0)) * scale;
    }
  }
  return gradient;
}

double finite_difference_check(const LogitField& logits, const MaskedTarget& target, double step,
                               double zero_floor) {
  if (!(step > 0.0)) fail(errc::invalid_config, "finite difference step must be > 0");
  const std::vector<double> analytic = masked_ce_gradient(logits, target);

  LogitField probe = logits;
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.values.size(); ++i) {
    const double original = probe.values[i];
    probe.values[i] = original + step;
    const double up = masked_cross_entropy(probe, target).loss;
    probe.values[i] = original - step;
    const double down = masked_cross_entropy(probe, target).loss;
    probe.values[i] = original;

    const double difference = (up - down) / (2.0 * step);
    const double denom = std::max(std::abs(analytic[i]), std::abs(difference));
    // below zero_floor the comparison switches to an absolute scale
    const double error = std::abs(difference - analytic[i]) / std::max(denom, zero_floor);
    worst = std::max(worst, error);
  }
  return worst;
}

}  // namespace puma
