#include "pfscale/sparsekit/matrix_io.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <type_traits>

#include <fmt/format.h>

namespace pfscale::sparse {

namespace {

template <class T>
constexpr bool kIsComplex = !std::is_same_v<T, double>;

std::string escape_xml(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '<':
                out += "&lt;";
                break;
            case '>':
                out += "&gt;";
                break;
            case '&':
                out += "&amp;";
                break;
            default:
                out += c;
        }
    }
    return out;
}

}  // namespace

template <class T>
void write_matrix_market(std::ostream& os, const SparseMatrix<T>& m) {
    os << "%%MatrixMarket matrix coordinate " << (kIsComplex<T> ? "complex" : "real")
       << " general\n";
    os << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
    const auto& cp = m.colptr();
    for (Index j = 0; j < m.cols(); ++j) {
        for (Offset p = cp[j]; p < cp[j + 1]; ++p) {
            const T v = m.values()[p];
            if constexpr (kIsComplex<T>) {
                os << fmt::format("{} {} {} {}\n", m.rowidx()[p] + 1, j + 1, v.real(), v.imag());
            } else {
                os << fmt::format("{} {} {}\n", m.rowidx()[p] + 1, j + 1, v);
            }
        }
    }
}

template <class T>
SparseMatrix<T> read_matrix_market(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) {
        throw SparseError("matrix market: empty input");
    }
    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    std::transform(field.begin(), field.end(), field.begin(), ::tolower);
    if (banner != "%%MatrixMarket" || object != "matrix" || format != "coordinate") {
        throw SparseError("matrix market: expected '%%MatrixMarket matrix coordinate' header");
    }
    if (symmetry != "general") {
        throw SparseError(fmt::format("matrix market: unsupported symmetry '{}'", symmetry));
    }
    const bool complex_field = field == "complex";
    if (!complex_field && field != "real" && field != "integer") {
        throw SparseError(fmt::format("matrix market: unsupported field '{}'", field));
    }
    if (complex_field && !kIsComplex<T>) {
        throw SparseError("matrix market: complex file read into a real matrix");
    }

    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line[0] != '%') {
            break;
        }
    }
    Index nrows = 0, ncols = 0;
    Offset count = 0;
    if (!(std::istringstream(line) >> nrows >> ncols >> count)) {
        throw SparseError(fmt::format("matrix market: bad size line {}", lineno));
    }
    std::vector<Triplet<T>> entries;
    entries.reserve(static_cast<std::size_t>(count));
    for (Offset k = 0; k < count; ++k) {
        if (!std::getline(is, line)) {
            throw SparseError(fmt::format("matrix market: expected {} entries, found {}", count, k));
        }
        ++lineno;
        std::istringstream row(line);
        Index i = 0, j = 0;
        double re = 0.0, im = 0.0;
        row >> i >> j >> re;
        if (complex_field) {
            row >> im;
        }
        if (!row) {
            throw SparseError(fmt::format("matrix market: malformed entry on line {}", lineno));
        }
        if constexpr (kIsComplex<T>) {
            entries.push_back({i - 1, j - 1, T{re, im}});
        } else {
            entries.push_back({i - 1, j - 1, re});
        }
    }
    return SparseMatrix<T>::from_triplets(nrows, ncols, entries);
}

template <class T>
void save_matrix_market(const std::filesystem::path& path, const SparseMatrix<T>& m) {
    std::ofstream os(path);
    if (!os) {
        throw SparseError(fmt::format("cannot open '{}' for writing", path.string()));
    }
    write_matrix_market(os, m);
}

template <class T>
SparseMatrix<T> load_matrix_market(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) {
        throw SparseError(fmt::format("cannot open '{}'", path.string()));
    }
    return read_matrix_market<T>(is);
}

template <class T>
std::string spy_svg(const SparseMatrix<T>& m, const SpyStyle& style) {
    const double margin = 24.0;
    const double side = style.size_px;
    const Index dim = std::max<Index>({m.rows(), m.cols(), 1});
    const double cell = side / dim;
    const double mark = std::max(cell, 0.75);
    const double title_h = style.title.empty() ? 0.0 : 20.0;
    const double width = side + 2 * margin;
    const double height = side + 2 * margin + title_h;

    std::string out;
    out += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0:.0f}\" height=\"{1:.0f}\" "
        "viewBox=\"0 0 {0:.0f} {1:.0f}\">\n",
        width, height);
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!style.title.empty()) {
        out += fmt::format(
            "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"13\" "
            "text-anchor=\"middle\">{}</text>\n",
            width / 2, margin + 6, escape_xml(style.title));
    }
    const double x0 = margin;
    const double y0 = margin + title_h;
    out += fmt::format(
        "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" "
        "stroke=\"black\" stroke-width=\"0.5\"/>\n",
        x0, y0, cell * m.cols(), cell * m.rows());
    out += "<g fill=\"#1f3b8f\" class=\"entries\">\n";
    const auto& cp = m.colptr();
    for (Index j = 0; j < m.cols(); ++j) {
        for (Offset p = cp[j]; p < cp[j + 1]; ++p) {
            out += fmt::format("<rect x=\"{:.3f}\" y=\"{:.3f}\" width=\"{:.3f}\" height=\"{:.3f}\"/>\n",
                               x0 + j * cell, y0 + m.rowidx()[p] * cell, mark, mark);
        }
    }
    out += "</g>\n";
    out += fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\" "
        "text-anchor=\"middle\">n = {}, nnz = {}</text>\n",
        width / 2, height - 6, m.rows(), m.nnz());
    out += "</svg>\n";
    return out;
}

#define PFSCALE_INSTANTIATE_IO(T)                                                          \
    template void write_matrix_market(std::ostream&, const SparseMatrix<T>&);             \
    template SparseMatrix<T> read_matrix_market(std::istream&);                           \
    template void save_matrix_market(const std::filesystem::path&, const SparseMatrix<T>&); \
    template SparseMatrix<T> load_matrix_market(const std::filesystem::path&);            \
    template std::string spy_svg(const SparseMatrix<T>&, const SpyStyle&);

PFSCALE_INSTANTIATE_IO(double)
PFSCALE_INSTANTIATE_IO(Complex)

#undef PFSCALE_INSTANTIATE_IO

}  // namespace pfscale::sparse
