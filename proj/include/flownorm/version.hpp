#pragma once

namespace flownorm {

// Artifact version stamped into table sidecars and --version output.
inline constexpr const char* kVersion = "0.1.0";

}  // namespace flownorm
