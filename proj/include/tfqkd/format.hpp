#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace tfqkd {

/// Fixed notation carrying exactly six significant digits, e.g. 1.4427e-10
/// prints as 0.000000000144270. Infinities print as "inf", NaN as "nan".
inline std::string format_fixed6(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0.00000";
  // round to six significant digits first so the exponent is taken after rounding
  char sci[32];
  std::snprintf(sci, sizeof sci, "%.5e", v);
  const double rounded = std::strtod(sci, nullptr);
  const int exponent = static_cast<int>(std::floor(std::log10(std::abs(rounded))));
  const int decimals = exponent >= 5 ? 0 : 5 - exponent;
  char buf[400];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, rounded);
  return buf;
}

}  // namespace tfqkd
