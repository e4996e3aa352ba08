#include "tvvar/dataset.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

namespace tvvar {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_cell(std::string_view cell, std::size_t row, std::size_t col) {
    cell = trim(cell);
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    double value = 0.0;
    const auto* first = cell.data();
    const auto* last = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    const std::string where = " at row " + std::to_string(row) + ", column " + std::to_string(col);
    if (cell.empty()) throw ParseError("empty cell" + where, row, col);
    if (ec != std::errc() || ptr != last)
        throw ParseError("non-numeric cell '" + std::string(cell) + "'" + where, row, col);
    if (!std::isfinite(value)) throw ParseError("non-finite value" + where, row, col);
    return value;
}

void put_u64(std::ostream& out, std::uint64_t v) {
    std::array<unsigned char, 8> bytes{};
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(bytes.data()), 8);
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

constexpr char kMagic[4] = {'T', 'V', 'M', '1'};

} // namespace

MatrixXd parse_csv_matrix(const std::string& text_in, bool skip_header) {
    std::string_view text(text_in);
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    bool header_pending = skip_header;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (trim(line).empty()) continue;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        std::vector<double> values;
        std::size_t col = 0;
        while (true) {
            const auto comma = line.find(',');
            values.push_back(parse_cell(line.substr(0, comma), rows.size(), col++));
            if (comma == std::string_view::npos) break;
            line.remove_prefix(comma + 1);
        }
        if (!rows.empty() && values.size() != rows.front().size())
            throw FormatError("ragged CSV: row " + std::to_string(rows.size()) + " has " +
                              std::to_string(values.size()) + " columns, expected " +
                              std::to_string(rows.front().size()));
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw FormatError("empty CSV");

    MatrixXd M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return M;
}

MatrixXd read_csv_matrix(const std::filesystem::path& path, bool skip_header) {
    return parse_csv_matrix(read_file(path), skip_header);
}

std::string format_csv_matrix(const MatrixXd& M) {
    std::string out;
    out.reserve(static_cast<std::size_t>(M.size()) * 24);
    std::array<char, 64> buf{};
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j) out.push_back(',');
            const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), M(i, j),
                                                 std::chars_format::general, 17);
            out.append(buf.data(), ptr);
        }
        out.push_back('\n');
    }
    return out;
}

void write_csv_matrix(const std::filesystem::path& path, const MatrixXd& M) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << format_csv_matrix(M);
}

TimeSeriesMatrix load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    MatrixXd M = read_csv_matrix(path, options.skip_header);
    if (options.transpose) M.transposeInPlace();
    return TimeSeriesMatrix(std::move(M));
}

void save_csv(const std::filesystem::path& path, const TimeSeriesMatrix& series) {
    write_csv_matrix(path, series.values());
}

void write_binary_matrix(const std::filesystem::path& path, const MatrixXd& M) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(kMagic, 4);
    put_u64(out, static_cast<std::uint64_t>(M.rows()));
    put_u64(out, static_cast<std::uint64_t>(M.cols()));
    const double* data = M.data();
    for (Eigen::Index k = 0; k < M.size(); ++k) put_u64(out, std::bit_cast<std::uint64_t>(data[k]));
}

MatrixXd read_binary_matrix(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    if (bytes.size() < 20 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw FormatError(path.string() + ": missing TVM1 header");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::uint64_t n = get_u64(p + 4);
    const std::uint64_t t = get_u64(p + 12);
    if (n == 0 || t == 0 || n > (1ULL << 32) || t > (1ULL << 32) ||
        bytes.size() != 20 + 8 * n * t)
        throw FormatError(path.string() + ": payload size does not match header");
    MatrixXd M(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t));
    double* data = M.data();
    for (std::uint64_t k = 0; k < n * t; ++k) data[k] = std::bit_cast<double>(get_u64(p + 20 + 8 * k));
    return M;
}

TimeSeriesMatrix load_series(const std::filesystem::path& path, const CsvOptions& options) {
    char head[4] = {};
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw DataError("cannot open " + path.string());
        in.read(head, 4);
        if (in.gcount() == 0) throw FormatError(path.string() + ": empty file");
    }
    if (std::memcmp(head, kMagic, 4) == 0) {
        MatrixXd M = read_binary_matrix(path);
        if (options.transpose) M.transposeInPlace();
        return TimeSeriesMatrix(std::move(M));
    }
    return load_csv(path, options);
}

} // namespace tvvar
