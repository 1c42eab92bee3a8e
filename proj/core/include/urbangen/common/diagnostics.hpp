#pragma once

#include <mutex>
#include <string>
#include <vector>

namespace urbangen {

enum class Severity { kInfo, kWarning, kError };

struct Diagnostic {
  Severity severity = Severity::kWarning;
  std::string code;     // short machine-readable tag, e.g. "dangling_node"
  std::string subject;  // entity the diagnostic is about (way id, building id, ...)
  std::string message;
};

// Thread-safe collector. Pipeline stages report recoverable problems here
// instead of throwing.
class Diagnostics {
 public:
  void report(Severity severity, std::string code, std::string subject, std::string message);
  void warn(std::string code, std::string subject, std::string message) {
    report(Severity::kWarning, std::move(code), std::move(subject), std::move(message));
  }
  void info(std::string code, std::string subject, std::string message) {
    report(Severity::kInfo, std::move(code), std::move(subject), std::move(message));
  }

  std::vector<Diagnostic> entries() const;
  std::size_t count(const std::string& code) const;
  bool empty() const;
  void merge(const Diagnostics& other);

 private:
  mutable std::mutex mutex_;
  std::vector<Diagnostic> entries_;
};

}  // namespace urbangen
