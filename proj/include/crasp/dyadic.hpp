#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "crasp/errors.hpp"

namespace crasp {

// Exact text codec for binary64 values as dyadic rationals "M*2^E" with M an
// odd integer (or the literal "0"). Round-trips bit-exactly and is platform
// independent, unlike %a which may vary in digit count.
inline std::string dyadic_to_string(double x) {
  if (x == 0.0) return "0";
  if (!std::isfinite(x)) throw NonFinite();
  int exp = 0;
  double m = std::frexp(x, &exp);  // x = m * 2^exp, |m| in [0.5, 1)
  // Scale mantissa to an integer (binary64 has 53 mantissa bits).
  std::int64_t mant = static_cast<std::int64_t>(std::ldexp(m, 53));
  exp -= 53;
  while (mant % 2 == 0) {
    mant /= 2;
    ++exp;
  }
  return std::to_string(mant) + "*2^" + std::to_string(exp);
}

inline double dyadic_from_string(const std::string& s, const std::string& path = "") {
  if (s == "0") return 0.0;
  auto star = s.find("*2^");
  if (star == std::string::npos) throw SchemaError(path, "malformed dyadic '" + s + "'");
  try {
    std::int64_t mant = std::stoll(s.substr(0, star));
    int exp = std::stoi(s.substr(star + 3));
    return std::ldexp(static_cast<double>(mant), exp);
  } catch (const std::exception&) {
    throw SchemaError(path, "malformed dyadic '" + s + "'");
  }
}

}  // namespace crasp
