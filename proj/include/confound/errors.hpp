#pragma once

#include <stdexcept>
#include <string>

namespace confound {

// Failure categories surfaced by the library. The CLI maps every Error to
// exit code 3 (data/contract problems); usage problems exit with 2.
enum class Errc {
  retry_exhausted,
  unknown_node,
  unknown_column,
  invalid_intervention_value,
  malformed_file,
  empty_context_set,
  unsupported_support,
  insufficient_contexts,
  support_not_covered,
  non_hard_context,
  support_mismatch,
  divergence_infinite,
  stratum_empty,
  invalid_set_size,
  direction_required,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace confound
