#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace soar {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat34 = Eigen::Matrix<double, 3, 4>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Quat = Eigen::Quaterniond;

// Thrown for malformed inputs, contract violations and out-of-order pipeline
// use. Maps to exit code 2 at the CLI boundary.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when an optimization diverges or produces non-finite values.
// Maps to exit code 3 at the CLI boundary.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown for unreadable, unwritable or corrupt files.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {
inline void format_into(std::ostringstream&) {}
template <typename T, typename... Rest>
void format_into(std::ostringstream& os, const T& v, const Rest&... rest) {
  os << v;
  format_into(os, rest...);
}
}  // namespace detail

template <typename... Args>
std::string str_cat(const Args&... args) {
  std::ostringstream os;
  detail::format_into(os, args...);
  return os.str();
}

#define SOAR_REQUIRE(cond, ...)                                   \
  do {                                                            \
    if (!(cond)) throw ::soar::ValidationError(::soar::str_cat(__VA_ARGS__)); \
  } while (0)

#define SOAR_NUMERIC_CHECK(cond, ...)                          \
  do {                                                         \
    if (!(cond)) throw ::soar::NumericError(::soar::str_cat(__VA_ARGS__)); \
  } while (0)

// Thread count for internally data-parallel loops. Read once from
// SOAR_THREADS; defaults to 1 so runs are bitwise reproducible without setup.
int thread_count();

// Splits [0, n) into thread_count() contiguous chunks and runs fn(begin, end)
// on each. Chunks must write disjoint state; reductions are the caller's job.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn);

void log_info(const std::string& msg);
void log_warn(const std::string& msg);

}  // namespace soar
