#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace organic {

/// Domain error carrying a stable machine-readable kind ("EmptyStratum",
/// "Separation", ...) next to the human-readable message. The CLI maps kinds
/// to exit codes; tests match on them.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

}  // namespace organic
