#pragma once

#include <stdexcept>
#include <string>

namespace slinv {

enum class ErrorKind { input, numerical };

// Every failure carries the pipeline stage that raised it, so the CLI can
// map input problems and numerical breakdowns to distinct exit codes.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, std::string stage, const std::string& what)
      : std::runtime_error("[" + stage + "] " + what), kind_(kind), stage_(std::move(stage)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }

private:
  ErrorKind kind_;
  std::string stage_;
};

inline Error input_error(const std::string& stage, const std::string& what) {
  return Error(ErrorKind::input, stage, what);
}

inline Error numerical_error(const std::string& stage, const std::string& what) {
  return Error(ErrorKind::numerical, stage, what);
}

// Re-raise with an outer stage prefix while keeping the kind.
inline Error restage(const Error& e, const std::string& outer) {
  return Error(e.kind(), outer + "/" + e.stage(), std::string(e.what()).substr(e.stage().size() + 3));
}

}  // namespace slinv
