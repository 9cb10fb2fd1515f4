#pragma once

#include <string>

namespace skyaug {

/// Locale-independent "%.12g" rendering used by every CSV writer, so
/// reports are byte-identical across runs. Infinities print as inf/-inf.
std::string fmt_real(double v);

} // namespace skyaug
