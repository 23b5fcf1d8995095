#include "puma/error.hpp"

namespace puma {

const char* errc_name(errc code) {
  switch (code) {
    case errc::malformed_json: return "MalformedJson";
    case errc::unknown_class_name: return "UnknownClassName";
    case errc::degenerate_ring: return "DegenerateRing";
    case errc::missing_dimensions: return "MissingDimensions";
    case errc::class_not_in_mapping: return "ClassNotInMapping";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::empty_input: return "EmptyInput";
    case errc::non_positive_radius: return "NonPositiveRadius";
    case errc::shape_mismatch: return "ShapeMismatch";
    case errc::non_finite_logit: return "NonFiniteLogit";
    case errc::unsupported_image_format: return "UnsupportedImageFormat";
    case errc::index_out_of_range: return "IndexOutOfRange";
    case errc::sizes_do_not_sum: return "SizesDoNotSum";
    case errc::stratum_too_small: return "StratumTooSmall";
    case errc::duplicate_case_id: return "DuplicateCaseId";
    case errc::canvas_too_small: return "CanvasTooSmall";
    case errc::taxonomy_mismatch: return "TaxonomyMismatch";
    case errc::invalid_config: return "InvalidConfig";
    case errc::io_error: return "IoError";
  }
  return "UnknownError";
}

}  // namespace puma
