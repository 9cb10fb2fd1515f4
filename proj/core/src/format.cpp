#include "skyaug/format.hpp"

#include <cmath>
#include <cstdio>

namespace skyaug {

std::string fmt_real(double v) {
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  if (std::isnan(v))
    return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

} // namespace skyaug
