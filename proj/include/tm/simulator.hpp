#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tm/diagnostic.hpp"
#include "tm/model.hpp"

namespace tml {

/// Execute one chronology under a scenario.
///
/// Starts at scenario.startEvent at tick 0. Extended events occupy one tick
/// unless overridden per event; instant events occupy zero. Each arrival at
/// an event with a reflexive repeat edge fires it repeats[event] more times
/// before proceeding. At a branch group the next unconsumed choice decides;
/// running out of choices throws ChoiceMissing. Execution halts at a sink or
/// once maxSteps steps are emitted, in which case the trace comes back with
/// the partial flag set. Identical inputs produce identical traces.
Trace simulate(const Chronology& chronology, const std::vector<Event>& events,
               const Scenario& scenario);

/// Conformance findings for a trace against a chronology, empty when the
/// trace is a legal execution. The trace is first projected onto the
/// chronology's events, then checked for: succession edges between
/// consecutive steps (CONF-001), the shared-boundary tick invariant
/// (CONF-002), and branch-group exclusivity (CONF-003).
std::vector<Diagnostic> conforms(const Trace& trace, const Chronology& chronology);

/// Execute several region-disjoint chronologies against one scenario and
/// merge the results. Events of different chronologies may share identical
/// tick windows; a trigger arc from a stage in one chronology's event region
/// into a stage of another's forces the occurrences of the two events to
/// start on the same ticks. Each chronology starts at its unique source
/// event. Throws RegionOverlap when two chronologies share a stage.
Trace simulateConcurrent(const ModelBundle& bundle,
                         const std::vector<std::string>& chronologyIds,
                         const Scenario& scenario);

/// Scenario files are JSON per-run data (schema/tm-scenario.schema.json).
/// Throws MalformedJson / SchemaMismatch.
Scenario parseScenario(std::string_view text);

/// JSON-lines trace form: one {"event", "start", "end", "labels"} per step.
std::string traceToJsonLines(const Trace& trace);

}  // namespace tml
