#pragma once

#include <string>

#include "tm/model.hpp"

namespace tml {

/// Canonical textual form of a bundle. Parsing the output yields a bundle
/// structurally equal to the input; declaration order is normalized (sorted)
/// and comments are not preserved. Emits LF line endings.
std::string printModel(const ModelBundle& bundle);

}  // namespace tml
