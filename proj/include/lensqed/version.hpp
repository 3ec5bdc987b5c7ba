#pragma once

namespace lensqed {

inline constexpr const char* version = "0.1.0";

}  // namespace lensqed
