#pragma once

#include <optional>
#include <string>
#include <utility>

namespace jitai {

// Success-or-message outcome for operations that can fail on input or I/O.
template <typename T>
struct Result {
  std::optional<T> value;
  std::string error;

  bool ok() const { return value.has_value(); }
  const T& operator*() const { return *value; }
  T& operator*() { return *value; }
  const T* operator->() const { return &*value; }
  T* operator->() { return &*value; }

  static Result success(T v) { return Result{std::move(v), {}}; }
  static Result failure(std::string message) { return Result{std::nullopt, std::move(message)}; }
};

}  // namespace jitai
