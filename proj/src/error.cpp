#include "xmodal/error.hpp"

namespace xmodal {

const char* errc_name(errc code) {
  switch (code) {
    case errc::malformed_header: return "MalformedHeader";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::non_finite_value: return "NonFiniteValue";
    case errc::duplicate_id: return "DuplicateId";
    case errc::dangling_id: return "DanglingId";
    case errc::empty_corpus: return "EmptyCorpus";
    case errc::io_failure: return "IoFailure";
    case errc::malformed_record: return "MalformedRecord";
    case errc::zero_vector: return "ZeroVector";
    case errc::dim_mismatch: return "DimMismatch";
    case errc::missing_mapping: return "MissingMapping";
    case errc::no_derangement: return "NoDerangementExists";
    case errc::subset_too_small: return "SubsetTooSmall";
    case errc::infeasible_constraint: return "InfeasibleConstraint";
    case errc::not_normalized: return "NotNormalized";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::sample_out_of_range: return "SampleOutOfRange";
    case errc::empty_samples: return "EmptySamples";
    case errc::negative_duration: return "NegativeDuration";
    case errc::invalid_bounds: return "InvalidBounds";
    case errc::k_too_large: return "KTooLarge";
    case errc::pool_too_small: return "PoolTooSmall";
    case errc::class_too_small: return "ClassTooSmall";
    case errc::empty_train: return "EmptyTrain";
    case errc::missing_field: return "MissingField";
    case errc::too_few_items: return "TooFewItems";
    case errc::missing_k: return "MissingK";
    case errc::negative_raw: return "NegativeRaw";
    case errc::missing_task: return "MissingTask";
    case errc::config_invalid: return "ConfigInvalid";
    case errc::schema_mismatch: return "SchemaMismatch";
    case errc::internal: return "InternalError";
  }
  return "UnknownError";
}

int exit_code_for(errc code) {
  switch (code) {
    case errc::config_invalid:
      return 2;
    case errc::internal:
      return 4;
    default:
      return 3;  // everything else is a data problem
  }
}

}  // namespace xmodal
