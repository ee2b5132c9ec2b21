#include "censreg/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace censreg {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line, char delimiter) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream stream(line);
    while (std::getline(stream, cell, delimiter)) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == delimiter) cells.emplace_back();
    return cells;
}

double parse_number(const std::string& cell, const std::string& column,
                    std::size_t row) {
    if (cell.empty() || cell == "NA" || cell == "na" || cell == "NaN")
        throw DataError("missing value in column '" + column + "' at data row " +
                        std::to_string(row + 1));
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(cell, &used);
    } catch (const std::exception&) {
        throw DataError("non-numeric value '" + cell + "' in column '" + column +
                        "' at data row " + std::to_string(row + 1));
    }
    if (used != cell.size())
        throw DataError("non-numeric value '" + cell + "' in column '" + column +
                        "' at data row " + std::to_string(row + 1));
    if (!std::isfinite(value))
        throw DataError("non-finite value in column '" + column + "' at data row " +
                        std::to_string(row + 1));
    return value;
}

}  // namespace

std::size_t DataTable::column_index(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw DataError("no column named '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
}

DataTable load_delimited(const std::string& path, char delimiter) {
    std::ifstream file(path);
    if (!file) throw DataError("cannot open '" + path + "'");
    DataTable table;
    std::string line;
    bool header = true;
    while (std::getline(file, line)) {
        if (trim(line).empty()) continue;
        auto cells = split(line, delimiter);
        if (header) {
            table.columns = std::move(cells);
            header = false;
            continue;
        }
        if (cells.size() != table.columns.size())
            throw DataError("row " + std::to_string(table.rows.size() + 1) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(table.columns.size()));
        table.rows.push_back(std::move(cells));
    }
    if (table.columns.empty()) throw DataError("'" + path + "' has no header row");
    if (table.rows.empty()) throw DataError("'" + path + "' has no data rows");
    return table;
}

BuiltSample build_sample(const DataTable& table, const SampleSpec& spec) {
    if (spec.covariates.empty() && !spec.intercept)
        throw DataError("no covariates selected");
    const std::size_t response_col = table.column_index(spec.response);
    const std::size_t status_col = table.column_index(spec.status);
    std::vector<std::size_t> covariate_cols;
    covariate_cols.reserve(spec.covariates.size());
    for (const auto& name : spec.covariates)
        covariate_cols.push_back(table.column_index(name));

    const std::size_t n = table.rows.size();
    const std::size_t p = covariate_cols.size() + (spec.intercept ? 1 : 0);

    std::vector<double> y(n);
    std::vector<double> design(n * p);
    std::vector<std::uint8_t> events(n);
    for (std::size_t i = 0; i < n; ++i) {
        double response = parse_number(table.rows[i][response_col], spec.response, i);
        if (spec.log_response) {
            if (!(response > 0.0))
                throw DataError("log transform needs positive responses; got " +
                                std::to_string(response) + " at data row " +
                                std::to_string(i + 1));
            response = std::log(response);
        }
        y[i] = response;

        const double status = parse_number(table.rows[i][status_col], spec.status, i);
        if (status != 0.0 && status != 1.0)
            throw DataError("status values must be 0 or 1; got '" +
                            table.rows[i][status_col] + "' at data row " +
                            std::to_string(i + 1));
        events[i] = status == 1.0 ? 1 : 0;

        std::size_t j = 0;
        if (spec.intercept) design[i * p + j++] = 1.0;
        for (std::size_t c = 0; c < covariate_cols.size(); ++c)
            design[i * p + j++] =
                parse_number(table.rows[i][covariate_cols[c]], spec.covariates[c], i);
    }

    BuiltSample built{
        CensoredSample(std::move(y), std::move(design), std::move(events), p,
                       spec.intercept),
        {}};
    if (spec.intercept) built.coefficient_names.emplace_back("(intercept)");
    for (const auto& name : spec.covariates) built.coefficient_names.push_back(name);
    return built;
}

}  // namespace censreg
