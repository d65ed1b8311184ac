#pragma once

#include <stdexcept>
#include <string>

namespace flowsnap {

enum class errc {
  unknown_flag_bit,
  unknown_flag_name,
  malformed_row,
  non_monotone_index,
  format_mismatch,
  truncated_file,
  corrupt_state,
  invalid_profile,
  empty_class,
  empty_training_set,
  singular_covariance,
  degenerate_data,
  one_class_only,
  too_few_samples,
};

/// Library error carrying a machine-checkable code next to the message.
class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  errc code() const { return code_; }

 private:
  errc code_;
};

}  // namespace flowsnap
