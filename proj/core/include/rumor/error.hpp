#pragma once

#include <stdexcept>
#include <string>

namespace rumor {

// Base class for every error raised by the library. `kind()` is a stable,
// machine-readable class name that the CLI prints on failure.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define RUMOR_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

RUMOR_DEFINE_ERROR(IoError);
RUMOR_DEFINE_ERROR(SchemaError);
RUMOR_DEFINE_ERROR(ConfigError);
RUMOR_DEFINE_ERROR(EmbeddingError);
RUMOR_DEFINE_ERROR(ShapeMismatchError);
RUMOR_DEFINE_ERROR(CheckpointError);
RUMOR_DEFINE_ERROR(NumericError);
RUMOR_DEFINE_ERROR(StateError);
RUMOR_DEFINE_ERROR(DataError);

#undef RUMOR_DEFINE_ERROR

}  // namespace rumor
