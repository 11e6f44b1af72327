#pragma once

namespace lmprep {

inline constexpr const char* kVersion = "0.1.0";

} // namespace lmprep
