#pragma once

namespace taukit {

inline constexpr const char* version_string = "0.1.0";

// Counter-based generator identity, recorded in every result's metadata so
// published numbers can be tied to the stream that produced them.
inline constexpr const char* rng_name = "philox4x32-10/v1";

} // namespace taukit
