#pragma once

#include <string>
#include <vector>

#include "tm/model.hpp"

namespace tml {

/// All maximal paths of a chronology from one start event, plus the longest
/// prefix they agree on.
struct PlanSet {
  std::vector<std::vector<std::string>> plans;
  std::vector<std::string> commonPrefix;
};

/// JSON form {"plans": [[ids...]...], "commonPrefix": [ids...]}.
std::string planSetToJson(const PlanSet& plans);

/// One occurrence of a recurrent event.
struct RecurrenceInstance {
  Event event;  // same region and time reference as the base event
  int occurrence = 0;
  Tick start = 0;
  Tick end = 0;
};

/// Expand a recurrence into `count` instances, instance i starting at
/// startTick + i * intervalTicks. Instances share the base event's region and
/// carry the unifiers as annotations. Throws UnknownEvent.
std::vector<RecurrenceInstance> expandRecurrence(const ModelBundle& bundle,
                                                 const Recurrence& recurrence,
                                                 Tick startTick);

/// Depth-first enumeration of all maximal succession paths from `start`.
///
/// At a node, outgoing alternatives are explored in lexicographic order of
/// the target event id. A plan never uses two different edges of one branch
/// group; every succession edge is traversed at most repeatBound+1 times per
/// plan, which keeps cyclic chronologies finite. Reflexive repeat edges
/// unroll exactly repeatBound times on each arrival. Throws Explosion when
/// more than `cap` plans would be produced.
PlanSet enumeratePlans(const Chronology& chronology, const std::string& start,
                       int repeatBound = 1, std::size_t cap = 10000);

/// Projection of a trace to its ordered event ids.
std::vector<std::string> eventSequenceOf(const Trace& trace);

}  // namespace tml
