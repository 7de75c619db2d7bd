#pragma once

// Single include point for the vendored nlohmann library.  The plain (key-
// sorted) json type is used everywhere so that serialized output is byte-
// stable for a given input, which the dataset determinism tests rely on.
// Angle include on purpose: the vendored header shares this file's name.

#include <json.hpp>

namespace negkit {
using njson = nlohmann::json;
}  // namespace negkit
