#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pblasso/dataset.hpp"

namespace pblasso::cli {

/// Malformed input; the message carries the offending line number.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest text that reads back to the same double (17 significant digits).
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

CsvTable read_csv(const std::filesystem::path& path);

/// Header row, then column 1 = response, columns 2.. = covariates.
Dataset read_dataset(const std::filesystem::path& path,
                     std::vector<std::string>* covariate_names = nullptr);

double parse_double(const std::string& field, std::size_t line, const std::string& what);

void write_matrix_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const Eigen::MatrixXd& m);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace pblasso::cli
