#include "tm/validator.hpp"

#include <algorithm>
#include <queue>
#include <set>

namespace tml {

namespace {

void add(std::vector<Diagnostic>& out, const char* rule, Severity severity,
         std::string path, std::string message) {
  out.push_back(Diagnostic{rule, severity, std::move(message), std::nullopt,
                           std::move(path)});
}

void sortDiagnostics(std::vector<Diagnostic>& out) {
  std::sort(out.begin(), out.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return std::tie(a.rule, a.modelPath, a.message) <
           std::tie(b.rule, b.modelPath, b.message);
  });
}

std::string flowPath(const FlowArc& f) {
  return "flow[" + f.from.str() + "->" + f.to.str() + "]";
}

std::string triggerPath(const TriggerArc& t) {
  return "trigger[" + t.from + "~>" + t.to + "]";
}

}  // namespace

FlowRule intraFlowRule(Action from, Action to) {
  using A = Action;
  if (from == A::Create && (to == A::Process || to == A::Release)) return {true, nullptr};
  if (from == A::Receive && (to == A::Process || to == A::Release)) return {true, nullptr};
  if (from == A::Process && to == A::Release) return {true, nullptr};
  if (from == A::Release && to == A::Transfer) return {true, nullptr};
  if (from == A::Transfer && to == A::Receive) return {true, nullptr};
  if (from == A::Transfer && to == A::Process) return {false, "FLOW-007"};
  return {false, "FLOW-001"};
}

FlowRule interFlowRule(Action from, Action to) {
  if (from == Action::Transfer && to == Action::Transfer) return {true, nullptr};
  return {false, "FLOW-002"};
}

bool triggerTargetLegal(Action target) {
  return target == Action::Create || target == Action::Process;
}

std::vector<Diagnostic> validateStatic(const StaticModel& model) {
  std::vector<Diagnostic> out;

  for (const auto& f : model.flows) {
    const StageNode* from = model.findStage(f.from.stage);
    const StageNode* to = model.findStage(f.to.stage);
    if (!from || !to) {
      add(out, "FLOW-006", Severity::Error, flowPath(f),
          "flow endpoint does not resolve to a stage");
      continue;
    }
    bool portsOk = true;
    for (const auto& [ref, node] : {std::pair{&f.from, from}, std::pair{&f.to, to}}) {
      if (node->hasPorts() && !ref->port) {
        add(out, "FLOW-003", Severity::Error, flowPath(f),
            "transfer endpoint '" + node->id + "' requires an in/out port");
        portsOk = false;
      }
      if (!node->hasPorts() && ref->port) {
        add(out, "FLOW-004", Severity::Error, flowPath(f),
            "port qualifier on non-transfer stage '" + node->id + "'");
        portsOk = false;
      }
    }
    bool intra = from->owner == to->owner;
    FlowRule rule = intra ? intraFlowRule(from->action, to->action)
                          : interFlowRule(from->action, to->action);
    if (!rule.legal) {
      add(out, rule.rule, Severity::Error, flowPath(f),
          std::string(intra ? "illegal flow inside thimac '" + from->owner + "'"
                            : "illegal flow between thimacs") +
              ": " + actionName(from->action) + " -> " + actionName(to->action));
      continue;
    }
    if (!portsOk) continue;
    // Direction of the transfer ports along a legal pair.
    if (intra && from->action == Action::Release && f.to.port != Port::Out) {
      add(out, "FLOW-005", Severity::Error, flowPath(f),
          "release feeds the transfer output port, not the input port");
    }
    if (intra && from->action == Action::Transfer && f.from.port != Port::In) {
      add(out, "FLOW-005", Severity::Error, flowPath(f),
          "receive is fed from the transfer input port, not the output port");
    }
    if (!intra && (f.from.port != Port::Out || f.to.port != Port::In)) {
      add(out, "FLOW-005", Severity::Error, flowPath(f),
          "inter-thimac flow runs transfer(out) -> transfer(in)");
    }
  }

  for (const auto& t : model.triggers) {
    const StageNode* from = model.findStage(t.from);
    const StageNode* to = model.findStage(t.to);
    if (!from || !to) {
      add(out, "TRIG-003", Severity::Error, triggerPath(t),
          "trigger endpoint does not resolve to a stage");
      continue;
    }
    if (!triggerTargetLegal(to->action)) {
      add(out, "TRIG-001", Severity::Error, triggerPath(t),
          std::string("trigger must target a create or process stage, not ") +
              actionName(to->action));
    } else if (t.decreate && to->action != Action::Create) {
      add(out, "TRIG-002", Severity::Error, triggerPath(t),
          "decreate polarity is only legal into a create stage");
    }
  }

  // Reachability: every non-create stage needs an incoming flow or trigger.
  std::set<std::string> fed;
  for (const auto& f : model.flows) fed.insert(f.to.stage);
  for (const auto& t : model.triggers) fed.insert(t.to);
  for (const auto& [id, stage] : model.stages) {
    if (stage.action != Action::Create && !fed.count(id)) {
      add(out, "STAT-001", Severity::Warning, "stage[" + id + "]",
          "stage has no incoming flow or trigger and is not a create stage");
    }
  }

  sortDiagnostics(out);
  return out;
}

std::vector<Diagnostic> validateEvents(const std::vector<Event>& events,
                                       const StaticModel& model) {
  std::vector<Diagnostic> out;
  auto find = [&](const std::string& id) -> const Event* {
    for (const auto& e : events) {
      if (e.id == id) return &e;
    }
    return nullptr;
  };

  for (const auto& e : events) {
    std::string path = "event[" + e.id + "]";
    bool resolvable = !e.region.stages.empty();
    if (e.region.stages.empty()) {
      add(out, "EVT-001", Severity::Error, path, "event region is empty");
    }
    for (const auto& stage : e.region.stages) {
      if (!model.findStage(stage)) {
        add(out, "EVT-001", Severity::Error, path,
            "region references unknown stage '" + stage + "'");
        resolvable = false;
      }
    }
    if (resolvable && !regionConnected(model, e.region)) {
      add(out, "EVT-002", Severity::Error, path,
          "region is not weakly connected in the static model");
    }
    if (e.duration == EventDuration::Instant) {
      bool singleCreate = e.region.stages.size() == 1;
      if (singleCreate) {
        const StageNode* stage = model.findStage(*e.region.stages.begin());
        singleCreate = stage && stage->action == Action::Create;
      }
      if (!singleCreate) {
        add(out, "EVT-005", Severity::Error, path,
            "instant duration is only legal for a single create-stage region");
      }
    }
    if (!e.isComposite()) continue;

    if (e.subEvents.size() < 2) {
      add(out, "EVT-004", Severity::Error, path,
          "composite event needs at least 2 sub-events");
    }
    std::set<std::string> unionStages;
    std::set<std::string> overlap;
    bool partsKnown = true;
    for (const auto& partId : e.subEvents) {
      const Event* part = find(partId);
      if (!part) {
        add(out, "EVT-007", Severity::Error, path,
            "unknown sub-event '" + partId + "'");
        partsKnown = false;
        continue;
      }
      for (const auto& stage : part->region.stages) {
        if (!unionStages.insert(stage).second) overlap.insert(stage);
      }
    }
    if (!overlap.empty()) {
      std::string stages;
      for (const auto& s : overlap) stages += (stages.empty() ? "" : ", ") + s;
      add(out, "EVT-003", Severity::Error, path,
          "sub-event regions overlap at: " + stages);
    }
    if (partsKnown && overlap.empty() && unionStages != e.region.stages) {
      add(out, "EVT-006", Severity::Error, path,
          "composite region differs from the union of its sub-event regions");
    }
  }

  sortDiagnostics(out);
  return out;
}

std::vector<Diagnostic> validateChronology(const Chronology& chronology,
                                           const std::vector<Event>& events) {
  std::vector<Diagnostic> out;
  std::string base = "chronology[" + chronology.id + "]";
  std::set<std::string> declared;
  for (const auto& e : events) declared.insert(e.id);

  for (const auto& edge : chronology.edges) {
    std::string path = base + ".edge[" + edge.from + "->" + edge.to + "]";
    for (const auto& endpoint : {edge.from, edge.to}) {
      if (!declared.count(endpoint)) {
        add(out, "CHR-002", Severity::Error, path,
            "edge endpoint '" + endpoint + "' is not a declared event");
      }
    }
    if (edge.kind == EdgeKind::Repeat && edge.from != edge.to) {
      add(out, "CHR-001", Severity::Error, path,
          "repeat edges must be reflexive");
    }
  }

  std::map<std::pair<std::string, std::string>, int> groupMembership;
  for (const auto& group : chronology.branchGroups) {
    std::string path = base + ".group[" + group.id + "]";
    for (const auto& target : group.targets) {
      if (!chronology.hasSuccession(group.source, target)) {
        add(out, "CHR-006", Severity::Error, path,
            "group alternative " + group.source + " -> " + target +
                " has no matching succession edge");
        continue;
      }
      if (++groupMembership[{group.source, target}] == 2) {
        add(out, "CHR-004", Severity::Error, path,
            "edge " + group.source + " -> " + target +
                " belongs to more than one branch group");
      }
    }
  }

  // Reachability from the source events over succession edges.
  std::set<std::string> reachable;
  std::queue<std::string> work;
  for (const auto& src : chronology.sourceEvents()) {
    if (reachable.insert(src).second) work.push(src);
  }
  while (!work.empty()) {
    std::string cur = work.front();
    work.pop();
    for (const auto& edge : chronology.edges) {
      if (edge.kind == EdgeKind::Succession && edge.from == cur &&
          reachable.insert(edge.to).second) {
        work.push(edge.to);
      }
    }
  }
  for (const auto& event : chronology.events) {
    if (!reachable.count(event)) {
      add(out, "CHR-005", Severity::Warning, base + ".event[" + event + "]",
          "event is unreachable from every source event");
    }
  }

  sortDiagnostics(out);
  return out;
}

std::vector<Diagnostic> validateBundle(const ModelBundle& bundle) {
  std::vector<Diagnostic> out = validateStatic(bundle.model);

  auto events = validateEvents(bundle.events, bundle.model);
  out.insert(out.end(), events.begin(), events.end());

  for (const auto& chronology : bundle.chronologies) {
    auto findings = validateChronology(chronology, bundle.events);
    out.insert(out.end(), findings.begin(), findings.end());
  }

  for (const auto& r : bundle.recurrences) {
    std::string path = "recur[" + r.eventId + "]";
    if (!bundle.findEvent(r.eventId)) {
      add(out, "REC-003", Severity::Error, path,
          "recurrence references unknown event '" + r.eventId + "'");
    }
    if (r.count < 2) {
      add(out, "REC-001", Severity::Error, path,
          "a recurrent event is a collection: count must be >= 2");
    }
    if (r.intervalTicks < 1) {
      add(out, "REC-002", Severity::Error, path,
          "recurrence interval must be a positive number of ticks");
    }
  }

  sortDiagnostics(out);
  return out;
}

}  // namespace tml
