#pragma once

#include "pqubit/errors.hpp"
#include "pqubit/qmath.hpp"
#include "pqubit/channels.hpp"
#include "pqubit/noisy_gates.hpp"
#include "pqubit/qec3.hpp"
#include "pqubit/error_model.hpp"

namespace pqubit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pqubit
