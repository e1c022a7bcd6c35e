#pragma once

// Plain-text file formats.
//
//   observations  one `col row value` triplet per line, 0-based, whitespace
//                 separated; only observed entries appear
//   mask          one `col row` pair per line
//   dense matrix  comma-separated rows (a basis is n rows x d columns)
//   labels        one integer per line, -1 for outliers
//   trace         CSV with header iter,col,eta,mu,level,residual,angle,skipped
//
// Reals are written with 17 significant digits so files round-trip exactly.
// Lines starting with '#' and blank lines are ignored on input.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gasg/recovery.hpp"

namespace gasg::io {

inline constexpr const char* kTraceHeader = "iter,col,eta,mu,level,residual,angle,skipped";

std::string format_real(double value);

/// Reads observations either as triplets or, if the first data line contains a
/// comma, as a dense n x m CSV matrix. When a mask is given only the listed
/// entries are kept. `ambient_dim` overrides the row count inferred from
/// triplets (it must not be smaller).
Dataset read_dataset(const std::string& path, const std::optional<std::string>& mask_path = {},
                     Index ambient_dim = 0);

void write_observations(const std::string& path, const Dataset& data);
void write_mask(const std::string& path, const Dataset& data);

Eigen::MatrixXd read_matrix(const std::string& path);
void write_matrix(const std::string& path, const Eigen::MatrixXd& m);

Subspace read_basis(const std::string& path);
void write_basis(const std::string& path, const Subspace& s);

/// Splits an n x (K d) matrix into K consecutive rank-d bases.
std::vector<Subspace> read_bases(const std::string& path, Index rank);
void write_bases(const std::string& path, std::span<const Subspace> bases);

std::vector<int> read_labels(const std::string& path);
void write_labels(const std::string& path, std::span<const int> labels);

RunTrace read_trace(const std::string& path);
void write_trace(const std::string& path, const RunTrace& trace);

/// `out.csv` with index 2 becomes `out.2.csv`; a `{}` placeholder is replaced
/// instead when present.
std::string indexed_path(const std::string& path, std::size_t index);

}  // namespace gasg::io
