#pragma once

// Plain CSV matrices and Laplacian edge lists. Floats are written with 17
// significant digits.

#include "gllrss/graph.hpp"

#include <filesystem>
#include <string>

namespace gllrss {

/// Row i = vertex i, column t = time instant t, comma separated, no header.
/// A leading line starting with '#' is skipped. Throws DataError with the
/// line/column of the first malformed cell or ragged row.
Matrix parse_matrix_csv(const std::string& text);
Matrix load_matrix(const std::filesystem::path& path);

std::string format_matrix_csv(const Matrix& m);
void save_matrix(const Matrix& m, const std::filesystem::path& path);

/// Writes `<stem>.csv` (dense) and `<stem>_edges.csv` ("i,j,weight" with
/// weight = -L(i,j) for pairs above tau_edge).
void save_laplacian(const CglMatrix& l, const std::filesystem::path& dense_path,
                    double tau_edge);

std::filesystem::path edge_list_path(const std::filesystem::path& dense_path);

std::string format_double(double v);

}  // namespace gllrss
