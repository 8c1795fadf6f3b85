#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace naswot {

// Base for every failure the toolkit reports. `tag()` is a stable,
// machine-parseable identifier that the CLI prints on its error line.
class Error : public std::runtime_error {
 public:
  Error(std::string_view tag, const std::string& what)
      : std::runtime_error(what), tag_(tag) {}

  const std::string& tag() const noexcept { return tag_; }

 private:
  std::string tag_;
};

#define NASWOT_DEFINE_ERROR(Name)                                    \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(#Name, what) {}   \
  }

NASWOT_DEFINE_ERROR(MalformedArchString);
NASWOT_DEFINE_ERROR(ShapeMismatch);
NASWOT_DEFINE_ERROR(NonFiniteActivation);
NASWOT_DEFINE_ERROR(ZeroDiagonal);
NASWOT_DEFINE_ERROR(EvaluatorMiss);
NASWOT_DEFINE_ERROR(ParseError);
NASWOT_DEFINE_ERROR(DuplicateKey);
NASWOT_DEFINE_ERROR(MissingFile);
NASWOT_DEFINE_ERROR(TruncatedRecord);
NASWOT_DEFINE_ERROR(DegenerateInput);
NASWOT_DEFINE_ERROR(EmptyGroup);
NASWOT_DEFINE_ERROR(AllSingularGroup);
NASWOT_DEFINE_ERROR(ConfigError);

#undef NASWOT_DEFINE_ERROR

}  // namespace naswot
