#pragma once

namespace l1kpca {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace l1kpca
