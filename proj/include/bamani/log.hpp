#pragma once

#include <functional>
#include <iostream>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace bamani {

namespace detail {

struct WarningSink {
  std::mutex mutex;
  std::vector<std::vector<std::string>*> captures;
  bool quiet = false;
};

inline WarningSink& warning_sink() {
  static WarningSink sink;
  return sink;
}

}  // namespace detail

// Report a non-fatal condition. Goes to every active capture, and to stderr
// unless warnings are silenced.
inline void warn(const std::string& message) {
  auto& sink = detail::warning_sink();
  std::lock_guard lock(sink.mutex);
  for (auto* capture : sink.captures) capture->push_back(message);
  if (!sink.quiet) std::cerr << "bamani: warning: " << message << '\n';
}

inline void set_warnings_quiet(bool quiet) {
  auto& sink = detail::warning_sink();
  std::lock_guard lock(sink.mutex);
  sink.quiet = quiet;
}

// Collects warnings emitted while alive (from any thread).
class WarningCapture {
 public:
  WarningCapture() {
    auto& sink = detail::warning_sink();
    std::lock_guard lock(sink.mutex);
    sink.captures.push_back(&messages_);
  }
  ~WarningCapture() {
    auto& sink = detail::warning_sink();
    std::lock_guard lock(sink.mutex);
    std::erase(sink.captures, &messages_);
  }
  WarningCapture(const WarningCapture&) = delete;
  WarningCapture& operator=(const WarningCapture&) = delete;

  std::vector<std::string> messages() const {
    auto& sink = detail::warning_sink();
    std::lock_guard lock(sink.mutex);
    return messages_;
  }

 private:
  std::vector<std::string> messages_;
};

}  // namespace bamani
