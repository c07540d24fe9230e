#include "lipshare/common.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <thread>
#include <vector>

namespace lipshare {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidValue: return "InvalidValue";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::IncompatiblePeriod: return "IncompatiblePeriod";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::StreamTooShort: return "StreamTooShort";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::Underflow: return "Underflow";
    case ErrorKind::DegenerateCovariance: return "DegenerateCovariance";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::UnknownMode: return "UnknownMode";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& field, const std::string& context) {
  if (field.empty()) {
    throw Error(ErrorKind::InvalidValue, "empty numeric field in " + context);
  }
  if (field == "inf" || field == "+inf") return std::numeric_limits<double>::infinity();
  if (field == "-inf") return -std::numeric_limits<double>::infinity();
  const char* begin = field.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + field.size()) {
    throw Error(ErrorKind::InvalidValue, "malformed number '" + field + "' in " + context);
  }
  return v;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_blocks(std::size_t n, int threads,
                     const std::function<void(std::size_t, std::size_t)>& fn) {
  int workers = resolve_threads(threads);
  if (n == 0) return;
  if (workers <= 1 || n == 1) {
    fn(0, n);
    return;
  }
  std::size_t w = static_cast<std::size_t>(workers);
  if (w > n) w = n;
  std::vector<std::thread> pool;
  pool.reserve(w);
  std::vector<std::exception_ptr> errors(w);
  for (std::size_t b = 0; b < w; ++b) {
    std::size_t begin = n * b / w;
    std::size_t end = n * (b + 1) / w;
    pool.emplace_back([&, b, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        errors[b] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace lipshare
