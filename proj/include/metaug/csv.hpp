#pragma once

#include <string>
#include <vector>

#include "metaug/dataset.hpp"

namespace metaug {

// Column typing for headered CSV ingestion. Columns not named in
// `categorical` are treated as continuous; the label column is required.
struct CsvSchemaSpec {
    std::string label_column;
    std::string positive_token;  // source token mapped to label 1
    std::vector<std::string> categorical_columns;
    std::string missing_token = "?";  // rows containing it are dropped
    bool drop_missing = true;
    std::vector<std::string> ignore_columns;
};

RawDataset load_csv(const std::string& path, const CsvSchemaSpec& spec);
RawDataset parse_csv(const std::string& text, const CsvSchemaSpec& spec, const std::string& name);

}  // namespace metaug
