#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

namespace mdlab {

using Json = nlohmann::ordered_json;

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& value);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

// Fixed-width significant-digit formatting shared by every CSV writer.
std::string format_real(double v, int significant_digits = 10);

}  // namespace mdlab
