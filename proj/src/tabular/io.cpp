#include "mdlab/tabular/io.hpp"

#include <charconv>
#include <cmath>

#include "mdlab/common/errors.hpp"

namespace mdlab::tabular {

namespace {

constexpr const char* kFormat = "mdlab-dataset";
constexpr int kVersion = 1;

std::string quote_field(const std::string& s) {
  bool needs = s.find_first_of(",\"\r\n") != std::string::npos ||
               (!s.empty() && (s.front() == ' ' || s.back() == ' '));
  if (!needs) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

// RFC 4180 record splitter. Returns false at end of input.
class CsvReader {
 public:
  explicit CsvReader(const std::string& text) : text_(text) {}

  bool next(std::vector<std::string>& fields) {
    fields.clear();
    if (pos_ >= text_.size()) return false;
    ++line_;
    std::string field;
    bool quoted = false;
    while (pos_ < text_.size()) {
      char ch = text_[pos_++];
      if (quoted) {
        if (ch == '"') {
          if (pos_ < text_.size() && text_[pos_] == '"') {
            field += '"';
            ++pos_;
          } else {
            quoted = false;
          }
        } else {
          field += ch;
        }
      } else if (ch == '"') {
        quoted = true;
      } else if (ch == ',') {
        fields.push_back(std::move(field));
        field.clear();
      } else if (ch == '\n' || ch == '\r') {
        if (ch == '\r' && pos_ < text_.size() && text_[pos_] == '\n') ++pos_;
        break;
      } else {
        field += ch;
      }
    }
    if (quoted) throw ParseError("csv: unterminated quote starting on line " + std::to_string(line_));
    fields.push_back(std::move(field));
    return true;
  }

  std::size_t line() const { return line_; }

 private:
  const std::string& text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  if (s == "NaN") {
    out = std::nan("");
    return true;
  }
  if (s == "Inf" || s == "-Inf") {
    out = s[0] == '-' ? -INFINITY : INFINITY;
    return true;
  }
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

bool parse_int64(const std::string& s, std::int64_t& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

Json schema_to_json(const Dataset& ds) {
  Json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["panel_keys"] = ds.has_panel_keys() ? Json::array({"id", "wave"}) : Json::array();
  j["float_digits"] = kCsvFloatDigits;
  j["categorical_coding"] = "level_index";
  Json cols = Json::array();
  for (const auto& c : ds.columns()) {
    Json col;
    col["name"] = c.name;
    col["kind"] = std::string(to_string(c.type.kind()));
    if (c.type.is_categorical()) col["levels"] = c.type.levels();
    cols.push_back(col);
  }
  j["columns"] = cols;
  return j;
}

Dataset empty_from_schema(const Json& schema, std::size_t n_rows) {
  if (!schema.is_object() || !schema.contains("columns")) throw SchemaError("schema: missing 'columns'");
  if (schema.value("format", std::string(kFormat)) != kFormat) throw SchemaError("schema: unknown format");
  std::vector<ColumnInfo> cols;
  for (const auto& c : schema.at("columns")) {
    std::vector<std::string> levels;
    if (c.contains("levels")) levels = c.at("levels").get<std::vector<std::string>>();
    cols.push_back({c.at("name").get<std::string>(),
                    ColumnType::make(parse_column_kind(c.at("kind").get<std::string>()), std::move(levels))});
  }
  return Dataset(std::move(cols), n_rows);
}

std::string to_csv(const Dataset& ds) {
  std::string out;
  const bool keys = ds.has_panel_keys();
  if (keys) out += "id,wave";
  for (std::size_t c = 0; c < ds.n_cols(); ++c) {
    if (keys || c > 0) out += ',';
    out += quote_field(ds.column(c).name);
  }
  out += '\n';
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    if (keys) {
      out += std::to_string(ds.panel_keys()[r].id);
      out += ',';
      out += std::to_string(ds.panel_keys()[r].wave);
    }
    for (std::size_t c = 0; c < ds.n_cols(); ++c) {
      if (keys || c > 0) out += ',';
      if (ds.is_missing(r, c)) continue;
      const auto& type = ds.column(c).type;
      if (type.is_categorical()) {
        out += quote_field(type.levels()[ds.level(r, c)]);
      } else {
        out += format_real(ds.value(r, c), kCsvFloatDigits);
      }
    }
    out += '\n';
  }
  return out;
}

Dataset from_csv(const std::string& csv_text, const Json& schema) {
  Dataset proto = empty_from_schema(schema, 0);
  const bool keys = schema.contains("panel_keys") && !schema.at("panel_keys").empty();
  const std::size_t offset = keys ? 2 : 0;

  CsvReader reader(csv_text);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw ParseError("csv: empty input");
  if (keys && (fields.size() < 2 || fields[0] != "id" || fields[1] != "wave")) {
    throw SchemaError("csv: expected leading id,wave columns");
  }
  for (std::size_t i = offset; i < fields.size(); ++i) {
    if (!proto.find(fields[i])) throw SchemaError("csv: undeclared column '" + fields[i] + "'");
  }
  if (fields.size() - offset != proto.n_cols()) throw SchemaError("csv: header does not list every declared column");
  for (std::size_t c = 0; c < proto.n_cols(); ++c) {
    if (fields[c + offset] != proto.column(c).name) {
      throw SchemaError("csv: column '" + fields[c + offset] + "' out of declared order");
    }
  }

  std::vector<std::vector<std::string>> rows;
  while (reader.next(fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != proto.n_cols() + offset) {
      throw ParseError("csv: line " + std::to_string(reader.line()) + " has " + std::to_string(fields.size()) +
                       " fields, expected " + std::to_string(proto.n_cols() + offset));
    }
    rows.push_back(fields);
  }

  Dataset ds = empty_from_schema(schema, rows.size());
  std::vector<PanelKey> panel;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& f = rows[r];
    if (keys) {
      std::int64_t id = 0, wave = 0;
      if (!parse_int64(f[0], id) || !parse_int64(f[1], wave)) {
        throw ParseError("csv: row " + std::to_string(r) + ": bad panel key");
      }
      panel.push_back({id, static_cast<int>(wave)});
    }
    for (std::size_t c = 0; c < ds.n_cols(); ++c) {
      const std::string& cell = f[c + offset];
      if (cell.empty()) {
        ds.set_missing(r, c, true);
        continue;
      }
      const auto& type = ds.column(c).type;
      if (type.is_categorical()) {
        auto lvl = type.level_index(cell);
        if (!lvl) {
          throw ParseError("csv: row " + std::to_string(r) + ", column '" + ds.column(c).name + "': level '" + cell +
                           "' not declared");
        }
        ds.set_value(r, c, *lvl);
      } else {
        double v = 0;
        if (!parse_double(cell, v)) {
          throw ParseError("csv: row " + std::to_string(r) + ", column '" + ds.column(c).name + "': '" + cell +
                           "' is not a number");
        }
        ds.set_value(r, c, v);
      }
    }
  }
  if (keys) ds.set_panel_keys(std::move(panel));
  return ds;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& csv_path,
                   const std::filesystem::path& schema_path) {
  write_text_file(csv_path, to_csv(ds));
  write_json_file(schema_path, schema_to_json(ds));
}

Dataset read_dataset(const std::filesystem::path& csv_path, const std::filesystem::path& schema_path) {
  return from_csv(read_text_file(csv_path), read_json_file(schema_path));
}

std::filesystem::path default_schema_path(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".schema.json");
  return p;
}

}  // namespace mdlab::tabular
