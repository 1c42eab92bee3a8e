#include "urbangen/common/diagnostics.hpp"

#include <algorithm>

namespace urbangen {

void Diagnostics::report(Severity severity, std::string code, std::string subject,
                         std::string message) {
  std::lock_guard lock(mutex_);
  entries_.push_back({severity, std::move(code), std::move(subject), std::move(message)});
}

std::vector<Diagnostic> Diagnostics::entries() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

std::size_t Diagnostics::count(const std::string& code) const {
  std::lock_guard lock(mutex_);
  return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(),
                                                [&](const Diagnostic& d) { return d.code == code; }));
}

bool Diagnostics::empty() const {
  std::lock_guard lock(mutex_);
  return entries_.empty();
}

void Diagnostics::merge(const Diagnostics& other) {
  if (&other == this) return;
  auto incoming = other.entries();
  std::lock_guard lock(mutex_);
  entries_.insert(entries_.end(), incoming.begin(), incoming.end());
}

}  // namespace urbangen
