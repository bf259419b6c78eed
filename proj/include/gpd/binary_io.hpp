#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include <Eigen/Dense>

#include "gpd/errors.hpp"

namespace gpd::detail {

template <typename T>
T to_little_endian(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    std::memcpy(&value, bytes, sizeof(T));
  }
  return value;
}

class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void magic(const char (&tag)[5]) { out_.write(tag, 4); }
  void u32(std::uint32_t v) { raw(to_little_endian(v)); }
  void u64(std::uint64_t v) { raw(to_little_endian(v)); }
  void f64(double v) { raw(to_little_endian(v)); }
  void matrix(const Eigen::MatrixXd& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) f64(m(i, j));
  }

 private:
  template <typename T>
  void raw(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  std::ostream& out_;
};

class BinaryReader {
 public:
  BinaryReader(std::istream& in, std::string what) : in_(in), what_(std::move(what)) {}

  void expect_magic(const char (&tag)[5]) {
    char buf[4] = {};
    in_.read(buf, 4);
    if (!in_ || std::memcmp(buf, tag, 4) != 0) {
      throw IoError(what_ + ": bad magic (expected \"" + std::string(tag) + "\")");
    }
  }
  std::uint32_t u32() { return to_little_endian(raw<std::uint32_t>()); }
  std::uint64_t u64() { return to_little_endian(raw<std::uint64_t>()); }
  double f64() { return to_little_endian(raw<double>()); }
  Eigen::MatrixXd matrix(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = f64();
    return m;
  }
  /// Throws unless the stream is exhausted.
  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof()) {
      throw IoError(what_ + ": trailing bytes after payload");
    }
  }

 private:
  template <typename T>
  T raw() {
    T v;
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (in_.gcount() != static_cast<std::streamsize>(sizeof(T))) {
      throw IoError(what_ + ": truncated file");
    }
    return v;
  }
  std::istream& in_;
  std::string what_;
};

}  // namespace gpd::detail
