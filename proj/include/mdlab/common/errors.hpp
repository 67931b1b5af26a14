#pragma once

#include <stdexcept>
#include <string>

namespace mdlab {

// Base for every error raised by the library. Subclasses only carry a
// category so callers (the harness, the CLI) can report a machine-readable
// reason without parsing messages.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* category() const noexcept { return "error"; }
};

#define MDLAB_DEFINE_ERROR(Name, tag)                                   \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& what) : Error(what) {}             \
    const char* category() const noexcept override { return tag; }      \
  };

MDLAB_DEFINE_ERROR(ConfigError, "config")
MDLAB_DEFINE_ERROR(DimensionError, "dimension")
MDLAB_DEFINE_ERROR(EncodingError, "encoding")
MDLAB_DEFINE_ERROR(ParseError, "parse")
MDLAB_DEFINE_ERROR(SchemaError, "schema")
MDLAB_DEFINE_ERROR(RankDeficientError, "rank_deficient")
MDLAB_DEFINE_ERROR(UnimputableError, "unimputable")
MDLAB_DEFINE_ERROR(AlignmentError, "alignment")
MDLAB_DEFINE_ERROR(FitError, "fit")
MDLAB_DEFINE_ERROR(IoError, "io")

#undef MDLAB_DEFINE_ERROR

}  // namespace mdlab
