#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tm/error.hpp"

namespace tml {

using Tick = std::int64_t;

/// The five generic actions every machine reduces to. The vocabulary is
/// closed: there is no extension point.
enum class Action { Create, Receive, Process, Release, Transfer };

constexpr int kActionCount = 5;

const char* actionName(Action a);
std::optional<Action> actionFromName(const std::string& name);

/// Logical ports of a Transfer stage. Only Transfer stages have ports, and
/// every Transfer stage has both.
enum class Port { In, Out };

const char* portName(Port p);

/// Arc endpoint: a stage id plus an optional transfer port.
struct PortRef {
  std::string stage;
  std::optional<Port> port;

  std::string str() const;
  bool operator==(const PortRef&) const = default;
};

/// A thing/machine unit. Nesting forms a tree; ids are dotted paths of the
/// names from the root ("robot.bay"). Annotations are inert key/value pairs
/// (e.g. memory, intensity) carried through parsing and export untouched.
struct Thimac {
  std::string id;
  std::string name;
  std::optional<std::string> parent;
  std::set<std::string> children;
  std::set<std::string> stages;
  std::map<std::string, std::string> annotations;
};

/// One generic action housed by a thimac. Id is "<thimac id>.<action>".
struct StageNode {
  std::string id;
  Action action = Action::Create;
  std::string owner;

  bool hasPorts() const { return action == Action::Transfer; }
};

/// Solid arrow: conceptual movement of a thing between stages.
struct FlowArc {
  PortRef from;
  PortRef to;
};

/// Dashed arrow: causation between stages. Decreate polarity dissolves the
/// target thing instead of creating it and is only legal into a Create stage.
struct TriggerArc {
  std::string from;
  std::string to;
  bool decreate = false;
};

/// Level-1 model: the timeless description. No time constructs live here.
struct StaticModel {
  std::map<std::string, Thimac> thimacs;
  std::map<std::string, StageNode> stages;
  std::vector<FlowArc> flows;
  std::vector<TriggerArc> triggers;
  std::vector<std::string> roots;  // declaration order

  const Thimac* findThimac(const std::string& id) const;
  const StageNode* findStage(const std::string& id) const;
};

/// A set of stages of the host model. The induced subgraph (stages plus the
/// flow/trigger arcs with both endpoints inside) must be weakly connected.
struct Region {
  std::set<std::string> stages;

  bool operator==(const Region&) const = default;
};

enum class EventDuration { Extended, Instant };

/// Level-2 unit: a region plus a symbolic time reference. Atomic events cover
/// one stage; composite events aggregate >= 2 disjoint sub-events and their
/// region is the union of the parts' regions.
struct Event {
  std::string id;
  std::string name;
  Region region;
  std::string timeRef;
  EventDuration duration = EventDuration::Extended;
  std::vector<std::string> subEvents;
  std::map<std::string, std::string> annotations;

  bool isComposite() const { return !subEvents.empty(); }
};

enum class EdgeKind { Succession, Repeat };

struct ChronEdge {
  std::string from;
  std::string to;
  EdgeKind kind = EdgeKind::Succession;

  bool operator==(const ChronEdge&) const = default;
};

/// Mutually exclusive succession alternatives leaving one event. Group ids
/// are "<source>#<k>" with k counting that source's groups in declaration
/// order.
struct BranchGroup {
  std::string id;
  std::string source;
  std::vector<std::string> targets;
};

/// Level-3 model: behavior as a directed graph over events. Repeat edges are
/// reflexive; every succession edge belongs to at most one branch group.
struct Chronology {
  std::string id;
  std::set<std::string> events;
  std::vector<ChronEdge> edges;
  std::vector<BranchGroup> branchGroups;

  bool hasSuccession(const std::string& from, const std::string& to) const;
  bool hasRepeat(const std::string& event) const;
  std::vector<const BranchGroup*> groupsAt(const std::string& source) const;
  const BranchGroup* findGroup(const std::string& id) const;
  /// Events with no incoming succession edge from a different event.
  std::vector<std::string> sourceEvents() const;
};

/// A same-region event occurring `count` times at regular intervals, unified
/// by shared properties.
struct Recurrence {
  std::string eventId;
  Tick intervalTicks = 1;
  int count = 2;
  std::map<std::string, std::string> unifiers;
};

/// Branch decision consumed by the simulator when it reaches the group.
struct Choice {
  std::string group;
  std::string target;
};

/// Simulation input. Symbolic time labels are bound to ticks by running the
/// scenario; `durations` overrides the unit-tick default per event.
struct Scenario {
  std::string startEvent;
  std::vector<Choice> choices;
  std::map<std::string, int> repeats;
  std::map<std::string, Tick> durations;
  int maxSteps = 1000;
  // Per-run selection data (not semantics): which chronology/chronologies of
  // the file this scenario drives.
  std::optional<std::string> chronology;
  std::vector<std::string> chronologies;
};

struct TraceStep {
  std::string event;
  Tick start = 0;
  Tick end = 0;
  std::vector<std::string> labels;

  bool operator==(const TraceStep&) const = default;
};

/// Timed execution of a chronology. Steps are ordered by start tick and
/// consecutive steps of one chronology share a boundary instant. `partial`
/// flags traces cut off by the step limit.
struct Trace {
  std::vector<TraceStep> steps;
  bool partial = false;
};

/// Everything a model file holds: the static model plus declared events,
/// chronologies and recurrences.
struct ModelBundle {
  StaticModel model;
  std::vector<Event> events;
  std::vector<Chronology> chronologies;
  std::vector<Recurrence> recurrences;

  const Event* findEvent(const std::string& id) const;
  const Chronology* findChronology(const std::string& id) const;
};

/// Incremental checked construction of a static model. Methods throw TmError
/// on invariant violations (duplicate stage action, unknown endpoint, ...).
/// The built model is immutable afterwards; share it freely across threads.
class ModelBuilder {
public:
  ModelBuilder& thimac(const std::string& path, const std::string& name = "",
                       std::map<std::string, std::string> annotations = {});
  ModelBuilder& stage(const std::string& thimacPath, Action action);
  ModelBuilder& flow(const PortRef& from, const PortRef& to);
  ModelBuilder& trigger(const std::string& fromStage, const std::string& toStage,
                        bool decreate = false);

  StaticModel build() &&;
  const StaticModel& peek() const { return model_; }

private:
  StaticModel model_;
};

StaticModel newStaticModel();

/// One atomic event per stage of e's region, each inheriting e's time
/// reference. The returned regions partition e.region. Throws UnknownEvent
/// if e is not declared in the bundle.
std::vector<Event> decomposeEvent(const ModelBundle& bundle, const Event& e);

/// Aggregate >= 2 disjoint events into a composite whose region is the union
/// of the parts. Throws TooFewParts / NotDisjoint.
Event composeEvents(const std::vector<Event>& parts, const std::string& id,
                    const std::string& name);

/// Order-insensitive structural comparison used by the round-trip and JSON
/// identity checks: declaration order of arcs, events and chronologies does
/// not matter; sub-event order does.
bool structurallyEqual(const ModelBundle& a, const ModelBundle& b);

/// Weak connectivity of the region's induced subgraph (flow and trigger arcs
/// with both endpoints inside the region).
bool regionConnected(const StaticModel& model, const Region& region);

}  // namespace tml
