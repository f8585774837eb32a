#pragma once

#include <stdexcept>
#include <string>

namespace fzsl {

// Raised when training or optimisation produces non-finite values. The
// message carries round/client/layer context where the caller has it.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised by file loaders; message names the file and 1-based line.
struct ParseError : std::runtime_error {
  ParseError(const std::string& file, int line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what) {}
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fzsl
