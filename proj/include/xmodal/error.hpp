#pragma once

#include <stdexcept>
#include <string>

namespace xmodal {

// Failure categories surfaced by the library. The CLI maps these onto
// process exit codes: config problems -> 2, data problems -> 3, anything
// unexpected -> 4.
enum class errc {
  // storage / ingest
  malformed_header,
  dimension_mismatch,
  non_finite_value,
  duplicate_id,
  dangling_id,
  empty_corpus,
  io_failure,
  malformed_record,
  // similarity
  zero_vector,
  dim_mismatch,
  missing_mapping,
  // permutations
  no_derangement,
  subset_too_small,
  infeasible_constraint,
  // alignment / histograms
  not_normalized,
  length_mismatch,
  sample_out_of_range,
  empty_samples,
  // pairing
  negative_duration,
  invalid_bounds,
  // enrichment
  k_too_large,
  pool_too_small,
  // evaluation
  class_too_small,
  empty_train,
  missing_field,
  too_few_items,
  // aggregation
  missing_k,
  negative_raw,
  missing_task,
  // cli / config
  config_invalid,
  schema_mismatch,
  internal,
};

const char* errc_name(errc code);

// Exit code the CLI uses for a given failure category.
int exit_code_for(errc code);

class Error : public std::runtime_error {
public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace xmodal
