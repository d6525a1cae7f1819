#pragma once

#include <new>
#include <stdexcept>
#include <string>

namespace rmc {

/// Caller broke an API contract (bad pointer, misalignment, out of bounds...).
class usage_error : public std::logic_error {
public:
  explicit usage_error(const std::string& what) : std::logic_error(what) {}
};

/// Unrecoverable runtime failure: backend bring-up, lost peer, watchdog.
class fatal_error : public std::runtime_error {
public:
  explicit fatal_error(const std::string& what) : std::runtime_error(what) {}
};

/// Shared segment exhausted. Recoverable: the caller may free and retry.
class bad_alloc : public std::bad_alloc {
public:
  explicit bad_alloc(std::string what) : what_(std::move(what)) {}
  const char* what() const noexcept override { return what_.c_str(); }

private:
  std::string what_;
};

/// Raised inside ranks of a thread world that was aborted by a peer's failure.
class world_aborted : public std::runtime_error {
public:
  world_aborted() : std::runtime_error("world aborted by another rank") {}
};

}  // namespace rmc
