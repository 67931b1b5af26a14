#pragma once

#include <filesystem>
#include <string>

#include "mdlab/common/json_util.hpp"
#include "mdlab/tabular/dataset.hpp"

namespace mdlab::tabular {

inline constexpr int kCsvFloatDigits = 10;

// Schema sidecar: column names, kinds and level order, plus whether the
// CSV starts with the id/wave panel key columns.
Json schema_to_json(const Dataset& ds);
Dataset empty_from_schema(const Json& schema, std::size_t n_rows);

// Missing cells are empty fields; categorical cells are written as labels.
std::string to_csv(const Dataset& ds);
Dataset from_csv(const std::string& csv_text, const Json& schema);

void write_dataset(const Dataset& ds, const std::filesystem::path& csv_path,
                   const std::filesystem::path& schema_path);
Dataset read_dataset(const std::filesystem::path& csv_path, const std::filesystem::path& schema_path);

// Default sidecar location: "<csv stem>.schema.json" next to the CSV.
std::filesystem::path default_schema_path(const std::filesystem::path& csv_path);

}  // namespace mdlab::tabular
