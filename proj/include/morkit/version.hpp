#pragma once

namespace morkit {

inline constexpr const char* kToolkitVersion = "0.1.0";

}  // namespace morkit
