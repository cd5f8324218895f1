#pragma once

#include <Eigen/Dense>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace rv {

inline constexpr const char* kVersion = "0.1.0";

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Base class for all structured errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Input file could not be read or parsed.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Parsed data violates the documented schema or an object invariant.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Shape mismatch between operands (vector/layer dimensions).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An internal invariant was violated (indicates a bug in the caller).
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Axis-aligned input region, lower/upper per dimension.
struct Box {
  VectorXd lo;
  VectorXd hi;

  int dim() const { return static_cast<int>(lo.size()); }

  void validate() const {
    if (lo.size() != hi.size())
      throw DimensionError("box lower/upper dimension mismatch");
    for (int d = 0; d < lo.size(); ++d) {
      if (!(lo[d] <= hi[d]))
        throw SchemaError("box lower > upper at dimension " +
                          std::to_string(d));
    }
  }

  bool contains(const VectorXd& x, double tol = 0.0) const {
    if (x.size() != lo.size()) return false;
    for (int d = 0; d < lo.size(); ++d)
      if (x[d] < lo[d] - tol || x[d] > hi[d] + tol) return false;
    return true;
  }
};

/// Runs fn(i) for i in [0, n). Work is chunked across `threads` workers;
/// callers collect results indexed by i so serial and parallel runs merge
/// identically.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  if (n <= 0) return;
  if (threads <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  int workers = std::min(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr first_error;
  std::mutex err_mutex;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (int i = w; i < n; i += workers) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace rv
