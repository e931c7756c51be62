#include "tm/diagnostic.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace tml {

bool hasErrors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

std::string toJsonLine(const Diagnostic& d) {
  nlohmann::ordered_json j;
  j["rule"] = d.rule;
  j["severity"] = d.severity == Severity::Error ? "error" : "warning";
  j["message"] = d.message;
  if (d.span) {
    j["file"] = d.span->file;
    j["line"] = d.span->startLine;
    j["col"] = d.span->startCol;
    j["endLine"] = d.span->endLine;
    j["endCol"] = d.span->endCol;
  }
  if (!d.modelPath.empty()) {
    j["path"] = d.modelPath;
  }
  return j.dump();
}

std::string toHumanLine(const Diagnostic& d) {
  std::ostringstream out;
  if (d.span) {
    out << d.span->file << ":" << d.span->startLine << ":" << d.span->startCol << ": ";
  } else if (!d.modelPath.empty()) {
    out << d.modelPath << ": ";
  }
  out << (d.severity == Severity::Error ? "error" : "warning");
  out << "[" << d.rule << "]: " << d.message;
  return out.str();
}

}  // namespace tml
