#include "pcreg/csv.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pcreg/errors.hpp"

namespace pcreg {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool parse_double(const std::string& s, double& out) {
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    out = std::strtod(begin, &end);
    if (end == begin || errno == ERANGE) return false;
    while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
    return *end == '\0';
}

}  // namespace

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ingest_error("cannot open CSV file: " + path, 0, 0);

    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        rows.push_back(split_fields(line));
    }
    if (rows.empty()) throw ingest_error("empty CSV file: " + path, 0, 0);

    const size_t cols = rows[0].size();
    for (size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols)
            throw ingest_error("ragged CSV row: expected " + std::to_string(cols) +
                                   " fields, got " + std::to_string(rows[r].size()),
                               static_cast<long>(r + 1), 0);
    }

    CsvTable table;
    size_t first_data_row = 0;
    double probe;
    bool first_numeric = true;
    for (const auto& cell : rows[0])
        if (!parse_double(cell, probe)) first_numeric = false;
    if (!first_numeric) {
        table.header = std::vector<std::string>();
        for (auto& cell : rows[0]) table.header->push_back(cell);
        first_data_row = 1;
        if (rows.size() == 1)
            throw ingest_error("CSV has a header but no data rows", 1, 0);
    }

    const size_t nrows = rows.size() - first_data_row;
    table.data.resize(static_cast<long>(nrows), static_cast<long>(cols));
    for (size_t r = 0; r < nrows; ++r) {
        for (size_t c = 0; c < cols; ++c) {
            double v;
            if (!parse_double(rows[r + first_data_row][c], v))
                throw ingest_error("non-numeric CSV cell '" + rows[r + first_data_row][c] + "'",
                                   static_cast<long>(r + first_data_row + 1),
                                   static_cast<long>(c + 1));
            table.data(static_cast<long>(r), static_cast<long>(c)) = v;
        }
    }
    return table;
}

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& header) {
    std::ofstream out(path);
    if (!out) throw numeric_error("cannot open file for writing: " + path);
    if (!header.empty()) {
        for (size_t i = 0; i < header.size(); ++i)
            out << (i ? "," : "") << header[i];
        out << '\n';
    }
    for (long r = 0; r < m.rows(); ++r) {
        for (long c = 0; c < m.cols(); ++c)
            out << (c ? "," : "") << format_double(m(r, c));
        out << '\n';
    }
}

void write_vector_csv(const std::string& path, const Eigen::VectorXd& v,
                      const std::string& column_name) {
    write_matrix_csv(path, v, {column_name});
}

}  // namespace pcreg
