#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "confound/errors.hpp"

namespace confound {

enum class NodeKind { observed, latent };

// Node handle. Indices live in one global space per Dag: observed nodes come
// first (0..n_observed-1), latent nodes are appended after them, so an index
// alone identifies a node and `kind` is derivable.
struct NodeId {
  int index = -1;
  NodeKind kind = NodeKind::observed;

  friend bool operator==(const NodeId&, const NodeId&) = default;
};

// One context's samples: rows are draws, columns are variables. Column order
// matches the owning suite's `columns` names.
struct SampleTable {
  std::vector<std::string> columns;
  Eigen::MatrixXd values;  // n_rows x columns.size()

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }

  int column_index(const std::string& name) const {
    for (int c = 0; c < static_cast<int>(columns.size()); ++c)
      if (columns[c] == name) return c;
    throw Error(Errc::unknown_column, "no column named " + name);
  }
};

}  // namespace confound
