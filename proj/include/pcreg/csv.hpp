#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace pcreg {

// Parsed rectangular CSV: comma separated, '.' decimal, optional single
// header row (detected when the first row has any non-numeric cell).
struct CsvTable {
    std::optional<std::vector<std::string>> header;
    Eigen::MatrixXd data;
};

CsvTable read_csv(const std::string& path);

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& header = {});
void write_vector_csv(const std::string& path, const Eigen::VectorXd& v,
                      const std::string& column_name);

// Full-precision decimal form that parses back to the same double.
std::string format_double(double x);

}  // namespace pcreg
