#pragma once

namespace plbin {

inline constexpr const char* kVersion = "1.0.0";

} // namespace plbin
