#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "tm/engine.hpp"
#include "tm/exporter.hpp"
#include "tm/parser.hpp"
#include "tm/printer.hpp"
#include "tm/simulator.hpp"
#include "tm/validator.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitChoiceMissing = 3;
constexpr int kExitStepLimit = 4;
constexpr int kExitToolError = 5;

struct Options {
  bool json = false;
  std::string scenarioPath;
  std::string start;
  int repeatBound = 1;
  std::string level = "static";
  std::string format = "dot";
  std::string outPath;
};

bool useColor() {
  const char* env = std::getenv("TM_COLOR");
  std::string mode = env ? env : "auto";
  if (mode == "always") return true;
  if (mode == "never") return false;
  return isatty(fileno(stderr)) != 0;
}

void printDiagnostics(const std::vector<tml::Diagnostic>& diagnostics, bool json) {
  bool color = !json && useColor();
  for (const auto& d : diagnostics) {
    if (json) {
      std::cerr << tml::toJsonLine(d) << "\n";
    } else if (color) {
      const char* tint = d.severity == tml::Severity::Error ? "\033[31m" : "\033[33m";
      std::cerr << tint << tml::toHumanLine(d) << "\033[0m\n";
    } else {
      std::cerr << tml::toHumanLine(d) << "\n";
    }
  }
}

int readFile(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read '" << path << "'\n";
    return kExitIo;
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  out = buffer.str();
  return kExitOk;
}

int writeOutput(const std::string& text, const std::string& outPath) {
  if (outPath.empty()) {
    std::cout << text;
    return kExitOk;
  }
  std::ofstream out(outPath, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write '" << outPath << "'\n";
    return kExitIo;
  }
  out << text;
  return kExitOk;
}

/// Parse + validate; returns an exit code, kExitOk when the bundle is usable.
int loadBundle(const std::string& path, const Options& options, tml::ModelBundle& bundle) {
  std::string text;
  if (int rc = readFile(path, text); rc != kExitOk) return rc;
  tml::ParseResult parsed = tml::parseModel(text, path);
  printDiagnostics(parsed.diagnostics, options.json);
  if (!parsed.ok()) return kExitValidation;
  auto findings = tml::validateBundle(parsed.bundle);
  printDiagnostics(findings, options.json);
  if (tml::hasErrors(findings)) return kExitValidation;
  bundle = std::move(parsed.bundle);
  return kExitOk;
}

const tml::Chronology* pickChronology(const tml::ModelBundle& bundle,
                                      const std::optional<std::string>& wanted) {
  if (wanted) {
    const tml::Chronology* c = bundle.findChronology(*wanted);
    if (!c) {
      std::cerr << "error: no chronology named '" << *wanted << "'\n";
    }
    return c;
  }
  if (bundle.chronologies.empty()) {
    std::cerr << "error: the model declares no chronology\n";
    return nullptr;
  }
  return &bundle.chronologies.front();
}

std::optional<std::string> uniqueSource(const tml::Chronology& c) {
  auto sources = c.sourceEvents();
  if (sources.size() == 1) return sources.front();
  std::cerr << "error: chronology '" << c.id << "' has " << sources.size()
            << " source events; pass --start\n";
  return std::nullopt;
}

int cmdValidate(const std::string& path, const Options& options) {
  tml::ModelBundle bundle;
  return loadBundle(path, options, bundle);
}

int cmdEvents(const std::string& path, const Options& options) {
  tml::ModelBundle bundle;
  if (int rc = loadBundle(path, options, bundle); rc != kExitOk) return rc;
  std::string out;
  if (options.json) {
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const auto& e : bundle.events) {
      nlohmann::ordered_json je;
      je["id"] = e.id;
      je["name"] = e.name;
      je["at"] = e.timeRef;
      je["duration"] = e.duration == tml::EventDuration::Instant ? "instant" : "extended";
      je["region"] = e.region.stages;
      je["subEvents"] = e.subEvents;
      list.push_back(std::move(je));
    }
    out = list.dump() + "\n";
  } else {
    std::ostringstream text;
    for (const auto& e : bundle.events) {
      text << e.id << ": " << e.name << " (at " << e.timeRef << ", "
           << e.region.stages.size() << (e.region.stages.size() == 1 ? " stage" : " stages");
      if (e.isComposite()) text << ", composite of " << e.subEvents.size();
      text << ")\n";
    }
    out = text.str();
  }
  return writeOutput(out, options.outPath);
}

int cmdPlans(const std::string& path, const Options& options) {
  tml::ModelBundle bundle;
  if (int rc = loadBundle(path, options, bundle); rc != kExitOk) return rc;
  const tml::Chronology* chronology = pickChronology(bundle, std::nullopt);
  if (!chronology) return kExitToolError;
  std::string start = options.start;
  if (start.empty()) {
    auto source = uniqueSource(*chronology);
    if (!source) return kExitToolError;
    start = *source;
  }
  try {
    tml::PlanSet plans = tml::enumeratePlans(*chronology, start, options.repeatBound);
    return writeOutput(tml::planSetToJson(plans) + "\n", options.outPath);
  } catch (const tml::TmError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitToolError;
  }
}

int cmdSimulate(const std::string& path, const Options& options) {
  tml::ModelBundle bundle;
  if (int rc = loadBundle(path, options, bundle); rc != kExitOk) return rc;
  if (options.scenarioPath.empty()) {
    std::cerr << "error: simulate requires --scenario <file>\n";
    return kExitToolError;
  }
  std::string scenarioText;
  if (int rc = readFile(options.scenarioPath, scenarioText); rc != kExitOk) return rc;

  try {
    tml::Scenario scenario = tml::parseScenario(scenarioText);
    tml::Trace trace;
    if (!scenario.chronologies.empty()) {
      trace = tml::simulateConcurrent(bundle, scenario.chronologies, scenario);
    } else {
      const tml::Chronology* chronology = pickChronology(bundle, scenario.chronology);
      if (!chronology) return kExitToolError;
      if (scenario.startEvent.empty()) {
        auto source = uniqueSource(*chronology);
        if (!source) return kExitToolError;
        scenario.startEvent = *source;
      }
      trace = tml::simulate(*chronology, bundle.events, scenario);
    }
    if (int rc = writeOutput(tml::traceToJsonLines(trace), options.outPath); rc != kExitOk) {
      return rc;
    }
    if (trace.partial) {
      std::cerr << "warning: step limit reached, trace is partial\n";
      return kExitStepLimit;
    }
    return kExitOk;
  } catch (const tml::TmError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == tml::ErrorKind::ChoiceMissing ? kExitChoiceMissing : kExitToolError;
  }
}

int cmdExport(const std::string& path, const Options& options) {
  tml::ModelBundle bundle;
  if (int rc = loadBundle(path, options, bundle); rc != kExitOk) return rc;
  try {
    std::string out;
    if (options.format == "dot") {
      out = tml::toDot(bundle, tml::parseLevel(options.level));
    } else if (options.format == "json") {
      out = tml::toJson(bundle);
    } else {
      std::cerr << "error: unknown format '" << options.format << "' (use dot|json)\n";
      return kExitToolError;
    }
    return writeOutput(out, options.outPath);
  } catch (const tml::TmError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitToolError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thinging Machine modeling toolkit"};
  app.require_subcommand(1);

  Options options;
  std::string path;

  auto addModelArg = [&](CLI::App* cmd) {
    cmd->add_option("model", path, "model file (.tm)")->required();
    cmd->add_flag("--json", options.json, "machine-readable diagnostics and listings");
    cmd->add_option("--out", options.outPath, "write stdout payload to a file");
  };

  CLI::App* validate = app.add_subcommand("validate", "parse and validate a model");
  addModelArg(validate);

  CLI::App* events = app.add_subcommand("events", "list the declared events");
  addModelArg(events);

  CLI::App* plans = app.add_subcommand("plans", "enumerate maximal chronology paths");
  addModelArg(plans);
  plans->add_option("--start", options.start, "start event (default: the unique source)");
  plans->add_option("--repeat-bound", options.repeatBound,
                    "repeat-edge unroll bound (default 1)");

  CLI::App* simulate = app.add_subcommand("simulate", "run a scenario into a trace");
  addModelArg(simulate);
  simulate->add_option("--scenario", options.scenarioPath, "scenario JSON file")
      ->required();

  CLI::App* export_ = app.add_subcommand("export", "render DOT or interchange JSON");
  addModelArg(export_);
  export_->add_option("--level", options.level, "static|events|behavior (dot only)");
  export_->add_option("--format", options.format, "dot|json");

  CLI11_PARSE(app, argc, argv);

  if (validate->parsed()) return cmdValidate(path, options);
  if (events->parsed()) return cmdEvents(path, options);
  if (plans->parsed()) return cmdPlans(path, options);
  if (simulate->parsed()) return cmdSimulate(path, options);
  if (export_->parsed()) return cmdExport(path, options);
  return kExitToolError;
}
