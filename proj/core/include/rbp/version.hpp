// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace rbp {

inline constexpr const char* kVersionString = "rbp 0.1.0";

}  // namespace rbp
