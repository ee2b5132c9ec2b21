#pragma once

#include "censreg/types.hpp"

#include <string>
#include <vector>

namespace censreg {

// Delimited text with a header row, loaded whole. Cells stay strings until a
// column is requested; missing or non-numeric values are rejected then.
struct DataTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;  // row-major cells

    std::size_t column_index(const std::string& name) const;
};

DataTable load_delimited(const std::string& path, char delimiter = ',');

struct SampleSpec {
    std::string response;
    std::string status;
    std::vector<std::string> covariates;
    bool intercept = true;
    bool log_response = false;
};

struct BuiltSample {
    CensoredSample sample;
    std::vector<std::string> coefficient_names;  // "(intercept)" first when present
};

BuiltSample build_sample(const DataTable& table, const SampleSpec& spec);

}  // namespace censreg
