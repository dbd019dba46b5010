#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "cem/learners.hpp"
#include "cem/matrix.hpp"

namespace cem {

// Little-endian binary primitives for the model artifacts. Doubles are
// written as raw IEEE-754 bits so loading reproduces predictions exactly.
struct BinaryWriter {
  std::ostream& out;
  void u8(std::uint8_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void str(const std::string& s);
  void vec(const std::vector<double>& v);
  void matrix(const Matrix& m);
};

struct BinaryReader {
  std::istream& in;
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::string str();
  std::vector<double> vec();
  Matrix matrix();
};

inline constexpr std::uint32_t kRegressorMagic = 0x434d5252;  // "CMRR"
inline constexpr std::uint32_t kRegressorVersion = 1;

void save_regressor(const Regressor& model, std::ostream& out);
std::unique_ptr<Regressor> load_regressor(std::istream& in);

}  // namespace cem
