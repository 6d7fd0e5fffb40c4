#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "pfscale/sparsekit/csc.hpp"

namespace pfscale::sparse {

// Matrix Market coordinate files, `general` symmetry, 1-based indices.

template <class T>
void write_matrix_market(std::ostream& os, const SparseMatrix<T>& m);

template <class T>
SparseMatrix<T> read_matrix_market(std::istream& is);

template <class T>
void save_matrix_market(const std::filesystem::path& path, const SparseMatrix<T>& m);

template <class T>
SparseMatrix<T> load_matrix_market(const std::filesystem::path& path);

struct SpyStyle {
    double size_px = 480.0;
    std::string title;
};

/// One filled square per stored entry, row 0 at the top.
template <class T>
std::string spy_svg(const SparseMatrix<T>& m, const SpyStyle& style = {});

}  // namespace pfscale::sparse
