#pragma once

#include <stdexcept>
#include <string>

namespace ct {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// storage
struct OverlapError : Error { using Error::Error; };
struct UnsortedError : Error { using Error::Error; };
struct ArityError : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };

// lang
struct SyntaxError : Error {
  int line, column;
  SyntaxError(const std::string& msg, int l, int c)
      : Error(std::to_string(l) + ":" + std::to_string(c) + ": " + msg), line(l), column(c) {}
};
struct ValidationError : Error { using Error::Error; };

// compiler / exec
struct LayoutError : Error { using Error::Error; };
struct UnloweredError : Error { using Error::Error; };
struct SummationOverInterval : Error { using Error::Error; };
struct BindingError : Error { using Error::Error; };

}  // namespace ct
