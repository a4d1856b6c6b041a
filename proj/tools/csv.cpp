#include "csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace pblasso::cli {

std::string format_double(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) {
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw InputError(path.string() + ": cannot open file");
    CsvTable table;
    std::string line;
    std::size_t number = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        auto fields = split_line(line);
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size())
            throw InputError(path.string() + ":" + std::to_string(number) + ": expected " +
                             std::to_string(table.header.size()) + " fields, found " +
                             std::to_string(fields.size()));
        table.rows.push_back(std::move(fields));
        table.line_numbers.push_back(number);
    }
    if (!have_header) throw InputError(path.string() + ": empty file (no header row)");
    return table;
}

double parse_double(const std::string& field, std::size_t line, const std::string& what)
{
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (!field.empty() && *first == '+') ++first;
    auto res = std::from_chars(first, last, v);
    if (field.empty() || res.ec != std::errc() || res.ptr != last)
        throw InputError(what + ":" + std::to_string(line) + ": '" + field + "' is not a number");
    return v;
}

Dataset read_dataset(const std::filesystem::path& path, std::vector<std::string>* covariate_names)
{
    const CsvTable table = read_csv(path);
    if (table.header.size() < 2)
        throw InputError(path.string() + ":1: need a response column and at least one covariate");
    const auto n = static_cast<Index>(table.rows.size());
    const auto p = static_cast<Index>(table.header.size() - 1);
    Dataset data{Eigen::MatrixXd(n, p), Eigen::VectorXd(n)};
    for (Index i = 0; i < n; ++i) {
        const auto& row = table.rows[static_cast<std::size_t>(i)];
        const auto line = table.line_numbers[static_cast<std::size_t>(i)];
        data.y(i) = parse_double(row[0], line, path.string());
        for (Index j = 0; j < p; ++j)
            data.X(i, j) = parse_double(row[static_cast<std::size_t>(j + 1)], line, path.string());
    }
    try {
        validate(data);
    } catch (const std::invalid_argument& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    if (covariate_names) covariate_names->assign(table.header.begin() + 1, table.header.end());
    return data;
}

void write_matrix_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const Eigen::MatrixXd& m)
{
    std::string text;
    for (std::size_t k = 0; k < header.size(); ++k) text += (k ? "," : "") + header[k];
    text += '\n';
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (j) text += ',';
            text += format_double(m(i, j));
        }
        text += '\n';
    }
    write_text(path, text);
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot write");
    out << text;
}

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(path.string() + ": cannot open file");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace pblasso::cli
