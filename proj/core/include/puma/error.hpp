#pragma once

#include <stdexcept>
#include <string>

namespace puma {

enum class errc {
  malformed_json,
  unknown_class_name,
  degenerate_ring,
  missing_dimensions,
  class_not_in_mapping,
  dimension_mismatch,
  empty_input,
  non_positive_radius,
  shape_mismatch,
  non_finite_logit,
  unsupported_image_format,
  index_out_of_range,
  sizes_do_not_sum,
  stratum_too_small,
  duplicate_case_id,
  canvas_too_small,
  taxonomy_mismatch,
  invalid_config,
  io_error,
};

const char* errc_name(errc code);

/// Exception carrying a machine-checkable error code alongside the message.
class Error : public std::runtime_error {
public:
  Error(errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  errc code() const noexcept { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace puma
