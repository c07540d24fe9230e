#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace lipshare {

inline constexpr const char* kVersion = "0.1.0";

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
// Row-major so that one sample/frame occupies a contiguous row.
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class ErrorKind {
  InvalidValue,
  InvalidArgument,
  IncompatiblePeriod,
  DimensionMismatch,
  StreamTooShort,
  ZeroVariance,
  Underflow,
  DegenerateCovariance,
  EmptyInput,
  UnknownMode,
  Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Shortest decimal string that parses back to exactly the same double.
// "inf"/"-inf"/"nan" for non-finite values.
std::string format_double(double v);

// Strict double parser; rejects trailing garbage and empty fields.
double parse_double(const std::string& field, const std::string& context);

// Requested worker count for parallel sections; 0 means hardware concurrency.
int resolve_threads(int requested);

// Runs fn(begin, end) on contiguous index blocks, one block per worker.
// Results must not depend on which worker runs which block.
void parallel_blocks(std::size_t n, int threads,
                     const std::function<void(std::size_t, std::size_t)>& fn);

// splitmix64 stream derivation so that sub-tasks get decorrelated seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace lipshare
