#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tm/diagnostic.hpp"
#include "tm/model.hpp"

namespace tml {

/// Outcome of parsing one .tm source. When any error-severity diagnostic is
/// present the bundle is empty: callers never see partially resolved content.
struct ParseResult {
  ModelBundle bundle;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return !hasErrors(diagnostics); }
};

/// Parse the textual form of all three model levels. Grammar reference lives
/// in docs/dsl.md. Accepts LF and CRLF input; `#` starts a line comment.
/// Never throws: syntax and reference problems come back as diagnostics.
ParseResult parseModel(std::string_view text, const std::string& filename = "<input>");

}  // namespace tml
