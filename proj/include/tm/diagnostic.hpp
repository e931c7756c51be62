#pragma once

#include <optional>
#include <string>
#include <vector>

namespace tml {

/// Half-open text range, 1-based lines and columns.
struct SourceSpan {
  std::string file;
  int startLine = 0;
  int startCol = 0;
  int endLine = 0;
  int endCol = 0;
};

enum class Severity { Error, Warning };

/// One validation or parse finding. `rule` is a stable id from the rule table
/// (docs/rules.md). Location is either a source span (parser findings) or a
/// model path such as "flow[a.release->b.transfer.in]" (model findings).
struct Diagnostic {
  std::string rule;
  Severity severity = Severity::Error;
  std::string message;
  std::optional<SourceSpan> span;
  std::string modelPath;
};

bool hasErrors(const std::vector<Diagnostic>& diagnostics);

/// Stable JSON-lines form consumed by CI: one object per line with rule,
/// severity, message and location fields.
std::string toJsonLine(const Diagnostic& d);

/// Human-readable one-liner: "file:line:col: severity[RULE]: message".
std::string toHumanLine(const Diagnostic& d);

}  // namespace tml
