#pragma once

#include <optional>
#include <string>
#include <vector>

#include "confound/types.hpp"

namespace confound {

// Streams shorter than this are refused by the information estimators; a
// handful of contexts cannot support a k-NN estimate.
inline constexpr int kMinContextsForInfo = 8;

// Discrete supports larger than this are treated as continuous data.
inline constexpr int kMaxDiscreteSupport = 64;

struct InterventionRecord {
  enum class Kind { hard, soft };
  int target = -1;
  Kind kind = Kind::hard;
  std::optional<double> value;  // hard only
};

// Per-context bookkeeping. `shifted` lists observed variables whose causal
// mechanisms changed in this context; the simulator records a latent
// intervention as a shift of every observed child. Metadata is produced by
// the simulator, never inferred from the samples.
struct ContextMeta {
  int id = 0;
  std::vector<int> shifted;
  std::vector<InterventionRecord> interventions;
  bool observational = false;
};

// A collection of per-context sample tables with shared column layout.
// Columns 0..n_observed-1 are the observed variables (same order as the
// generating Dag); any further columns are latent variables revealed for
// diagnostics, conditioning tests, or downstream adjustment.
struct ContextSuite {
  std::vector<std::string> columns;
  int n_observed = 0;
  std::vector<ContextMeta> metas;
  std::vector<SampleTable> tables;  // aligned with metas

  const ContextMeta& meta(int id) const;
  const SampleTable& table(int id) const;
  std::vector<int> observational_ids() const;
};

enum class SelectMode { and_all, and_not };

// Context algebra over shift metadata:
//   and_all: every variable in S and R shifted;
//   and_not: every variable in S shifted and none in R.
std::vector<int> select_contexts(const std::vector<ContextMeta>& metas, const std::vector<int>& S,
                                 const std::vector<int>& R, SelectMode mode);

// Context-level expectation streams. `values` has one row per id, in the
// order given; scalar streams have one column, conditional streams one column
// per support level of the conditioning variable.
struct ContextExpectations {
  std::vector<int> ids;
  Eigen::MatrixXd values;
  std::vector<double> given_support;  // conditional streams only
};

ContextExpectations context_expectations(const ContextSuite& suite, const std::vector<int>& ids,
                                         int col);

// E(X_col | X_given = v) per context, one column per support level v. The
// conditioning variable must be discrete with full support in every selected
// context.
ContextExpectations conditional_context_expectations(const ContextSuite& suite,
                                                     const std::vector<int>& ids, int col,
                                                     int given);

// Sorted distinct values of a column across the whole suite. Throws
// UnsupportedSupport when the column is not a small integer-valued domain.
std::vector<double> column_support(const ContextSuite& suite, int col);

// On-disk layout: <dir>/suite.json (metadata) and <dir>/ctx_<id>.csv per
// context. Unknown JSON fields are ignored with a warning.
void save_suite(const ContextSuite& suite, const std::string& dir);
ContextSuite load_suite(const std::string& dir, std::vector<std::string>* warnings = nullptr);

}  // namespace confound
