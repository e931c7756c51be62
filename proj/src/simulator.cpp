#include "tm/simulator.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>

#include "json.hpp"

namespace tml {

namespace {

const Event* findEvent(const std::vector<Event>& events, const std::string& id) {
  for (const auto& e : events) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

Tick durationOf(const Event& event, const Scenario& scenario) {
  if (event.duration == EventDuration::Instant) return 0;
  auto it = scenario.durations.find(event.id);
  return it == scenario.durations.end() ? 1 : it->second;
}

class Runner {
public:
  Runner(const Chronology& chronology, const std::vector<Event>& events,
         const Scenario& scenario)
      : chronology_(chronology), events_(events), scenario_(scenario) {}

  Trace run(const std::string& start) {
    const Event* current = lookup(start);
    Tick tick = 0;
    while (true) {
      if (!emit(*current, tick)) return trace_;
      for (int i = 0; i < repeatsOf(current->id); ++i) {
        if (!emit(*current, tick)) return trace_;
      }
      const std::string* next = pickSuccessor(current->id);
      if (!next) break;  // sink
      current = lookup(*next);
    }
    return trace_;
  }

private:
  const Event* lookup(const std::string& id) const {
    const Event* event = findEvent(events_, id);
    if (!event) {
      throw TmError(ErrorKind::UnknownEvent, "event '" + id + "' is not declared");
    }
    return event;
  }

  int repeatsOf(const std::string& id) const {
    if (!chronology_.hasRepeat(id)) return 0;
    auto it = scenario_.repeats.find(id);
    return it == scenario_.repeats.end() ? 0 : std::max(it->second, 0);
  }

  // Emits one step at the running clock; false once the step limit is hit.
  bool emit(const Event& event, Tick& tick) {
    if (static_cast<int>(trace_.steps.size()) >= scenario_.maxSteps) {
      trace_.partial = true;
      return false;
    }
    Tick duration = durationOf(event, scenario_);
    TraceStep step;
    step.event = event.id;
    step.start = tick;
    step.end = tick + duration;
    if (!event.timeRef.empty()) step.labels.push_back(event.timeRef);
    trace_.steps.push_back(std::move(step));
    tick += duration;
    return true;
  }

  const std::string* pickSuccessor(const std::string& from) {
    successors_.clear();
    for (const auto& edge : chronology_.edges) {
      if (edge.kind == EdgeKind::Succession && edge.from == from) {
        successors_.push_back(edge.to);
      }
    }
    if (successors_.empty()) return nullptr;
    if (successors_.size() == 1) return &successors_.front();

    if (nextChoice_ >= scenario_.choices.size()) {
      throw TmError(ErrorKind::ChoiceMissing,
                    "branch at '" + from + "' reached with no remaining choice");
    }
    const Choice& choice = scenario_.choices[nextChoice_++];
    const BranchGroup* group = chronology_.findGroup(choice.group);
    if (!group || group->source != from) {
      throw TmError(ErrorKind::ChoiceMissing,
                    "branch at '" + from + "' reached but the next choice names group '" +
                        choice.group + "'");
    }
    auto target = std::find(group->targets.begin(), group->targets.end(), choice.target);
    if (target == group->targets.end()) {
      throw TmError(ErrorKind::ChoiceMissing,
                    "choice target '" + choice.target + "' is not an alternative of group '" +
                        choice.group + "'");
    }
    chosen_ = *target;
    return &chosen_;
  }

  const Chronology& chronology_;
  const std::vector<Event>& events_;
  const Scenario& scenario_;
  Trace trace_;
  std::size_t nextChoice_ = 0;
  std::vector<std::string> successors_;
  std::string chosen_;
};

std::set<std::string> reachableFrom(const Chronology& c, const std::string& start) {
  std::set<std::string> seen{start};
  std::queue<std::string> work;
  work.push(start);
  while (!work.empty()) {
    std::string cur = work.front();
    work.pop();
    for (const auto& edge : c.edges) {
      if (edge.kind == EdgeKind::Succession && edge.from == cur &&
          seen.insert(edge.to).second) {
        work.push(edge.to);
      }
    }
  }
  return seen;
}

}  // namespace

Trace simulate(const Chronology& chronology, const std::vector<Event>& events,
               const Scenario& scenario) {
  if (scenario.startEvent.empty()) {
    throw TmError(ErrorKind::InvalidArgument, "scenario has no start event");
  }
  if (!chronology.events.count(scenario.startEvent)) {
    throw TmError(ErrorKind::UnknownEvent,
                  "start event '" + scenario.startEvent + "' is not part of chronology '" +
                      chronology.id + "'");
  }
  return Runner(chronology, events, scenario).run(scenario.startEvent);
}

std::vector<Diagnostic> conforms(const Trace& trace, const Chronology& chronology) {
  std::vector<Diagnostic> out;
  std::string base = "chronology[" + chronology.id + "]";

  std::vector<const TraceStep*> steps;
  for (const auto& step : trace.steps) {
    if (chronology.events.count(step.event)) steps.push_back(&step);
  }

  for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
    const TraceStep& a = *steps[i];
    const TraceStep& b = *steps[i + 1];
    bool connected = a.event == b.event
                         ? (chronology.hasRepeat(a.event) ||
                            chronology.hasSuccession(a.event, b.event))
                         : chronology.hasSuccession(a.event, b.event);
    if (!connected) {
      out.push_back(Diagnostic{"CONF-001", Severity::Error,
                               "consecutive events " + a.event + ", " + b.event +
                                   " are not connected by an edge",
                               std::nullopt, base});
    }
    if (b.start != a.end) {
      out.push_back(Diagnostic{"CONF-002", Severity::Error,
                               "step " + b.event + " starts at tick " +
                                   std::to_string(b.start) + " but " + a.event +
                                   " ends at tick " + std::to_string(a.end),
                               std::nullopt, base});
    }
  }

  // Branch exclusivity, both at edge level (two edges of one group used) and
  // at event level (the trace touches events reachable only through two
  // different alternatives of one group).
  std::set<std::pair<std::string, std::string>> usedEdges;
  for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
    if (chronology.hasSuccession(steps[i]->event, steps[i + 1]->event)) {
      usedEdges.emplace(steps[i]->event, steps[i + 1]->event);
    }
  }
  std::set<std::string> traceEvents;
  for (const auto* step : steps) traceEvents.insert(step->event);

  for (const auto& group : chronology.branchGroups) {
    int edgesUsed = 0;
    for (const auto& target : group.targets) {
      if (usedEdges.count({group.source, target})) ++edgesUsed;
    }
    if (edgesUsed > 1) {
      out.push_back(Diagnostic{"CONF-003", Severity::Error,
                               "trace uses " + std::to_string(edgesUsed) +
                                   " alternatives of branch group " + group.id,
                               std::nullopt, base + ".group[" + group.id + "]"});
      continue;
    }

    std::vector<std::set<std::string>> reach;
    for (const auto& target : group.targets) {
      reach.push_back(reachableFrom(chronology, target));
    }
    int touched = 0;
    std::string touchedTargets;
    for (std::size_t i = 0; i < group.targets.size(); ++i) {
      // Exclusive closure: events reachable via this alternative only.
      bool hit = false;
      for (const auto& event : reach[i]) {
        bool shared = false;
        for (std::size_t j = 0; j < reach.size(); ++j) {
          if (j != i && reach[j].count(event)) {
            shared = true;
            break;
          }
        }
        if (!shared && traceEvents.count(event)) {
          hit = true;
          break;
        }
      }
      if (hit) {
        ++touched;
        touchedTargets += (touchedTargets.empty() ? "" : ", ") + group.targets[i];
      }
    }
    if (touched > 1) {
      out.push_back(Diagnostic{"CONF-003", Severity::Error,
                               "trace mixes mutually exclusive alternatives of group " +
                                   group.id + " (" + touchedTargets + ")",
                               std::nullopt, base + ".group[" + group.id + "]"});
    }
  }
  return out;
}

namespace {

std::set<std::string> chronologyStages(const ModelBundle& bundle, const Chronology& c) {
  std::set<std::string> stages;
  for (const auto& id : c.events) {
    if (const Event* e = bundle.findEvent(id)) {
      stages.insert(e->region.stages.begin(), e->region.stages.end());
    }
  }
  return stages;
}

Scenario scopedScenario(const Scenario& scenario, const Chronology& c) {
  Scenario scoped = scenario;
  scoped.choices.clear();
  for (const auto& choice : scenario.choices) {
    if (c.findGroup(choice.group)) scoped.choices.push_back(choice);
  }
  auto sources = c.sourceEvents();
  if (sources.size() != 1) {
    throw TmError(ErrorKind::InvalidArgument,
                  "chronology '" + c.id + "' needs exactly one source event, found " +
                      std::to_string(sources.size()));
  }
  scoped.startEvent = sources.front();
  return scoped;
}

}  // namespace

Trace simulateConcurrent(const ModelBundle& bundle,
                         const std::vector<std::string>& chronologyIds,
                         const Scenario& scenario) {
  std::vector<const Chronology*> chronologies;
  for (const auto& id : chronologyIds) {
    const Chronology* c = bundle.findChronology(id);
    if (!c) {
      throw TmError(ErrorKind::UnknownReference, "unknown chronology '" + id + "'");
    }
    chronologies.push_back(c);
  }

  std::vector<std::set<std::string>> regions;
  for (const Chronology* c : chronologies) {
    regions.push_back(chronologyStages(bundle, *c));
  }
  for (std::size_t i = 0; i < regions.size(); ++i) {
    for (std::size_t j = i + 1; j < regions.size(); ++j) {
      for (const auto& stage : regions[i]) {
        if (regions[j].count(stage)) {
          throw TmError(ErrorKind::RegionOverlap,
                        "chronologies '" + chronologies[i]->id + "' and '" +
                            chronologies[j]->id + "' share stage '" + stage + "'");
        }
      }
    }
  }

  std::vector<Trace> traces;
  for (const Chronology* c : chronologies) {
    traces.push_back(simulate(*c, bundle.events, scopedScenario(scenario, *c)));
  }

  // Causal links: a trigger from a stage of event A (chronology i) into a
  // stage of event B (chronology j) pins B's k-th occurrence to start with
  // A's k-th occurrence.
  auto eventOfStage = [&](std::size_t chronologyIdx,
                          const std::string& stage) -> const Event* {
    for (const auto& id : chronologies[chronologyIdx]->events) {
      const Event* e = bundle.findEvent(id);
      if (e && e->region.stages.count(stage)) return e;
    }
    return nullptr;
  };

  for (const auto& trigger : bundle.model.triggers) {
    for (std::size_t i = 0; i < chronologies.size(); ++i) {
      const Event* source = eventOfStage(i, trigger.from);
      if (!source) continue;
      for (std::size_t j = 0; j < chronologies.size(); ++j) {
        if (j == i) continue;
        const Event* target = eventOfStage(j, trigger.to);
        if (!target) continue;
        std::vector<TraceStep*> sourceSteps;
        for (auto& step : traces[i].steps) {
          if (step.event == source->id) sourceSteps.push_back(&step);
        }
        std::size_t k = 0;
        Tick shift = 0;
        for (std::size_t s = 0; s < traces[j].steps.size(); ++s) {
          TraceStep& step = traces[j].steps[s];
          step.start += shift;
          step.end += shift;
          if (step.event == target->id && k < sourceSteps.size()) {
            Tick delta = sourceSteps[k]->start - step.start;
            step.start += delta;
            step.end += delta;
            shift += delta;
            ++k;
          }
        }
      }
    }
  }

  Trace merged;
  merged.partial = std::any_of(traces.begin(), traces.end(),
                               [](const Trace& t) { return t.partial; });
  struct Tagged {
    TraceStep step;
    std::size_t chronology;
    std::size_t index;
  };
  std::vector<Tagged> all;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    for (std::size_t s = 0; s < traces[i].steps.size(); ++s) {
      all.push_back(Tagged{traces[i].steps[s], i, s});
    }
  }
  std::stable_sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) {
    return std::tie(a.step.start, a.chronology, a.index) <
           std::tie(b.step.start, b.chronology, b.index);
  });
  for (auto& tagged : all) merged.steps.push_back(std::move(tagged.step));
  return merged;
}

Scenario parseScenario(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw TmError(ErrorKind::MalformedJson, e.what());
  }
  if (!j.is_object()) {
    throw TmError(ErrorKind::SchemaMismatch, "scenario must be a JSON object");
  }
  Scenario s;
  try {
    if (j.contains("start")) s.startEvent = j["start"].get<std::string>();
    if (j.contains("chronology")) s.chronology = j["chronology"].get<std::string>();
    if (j.contains("chronologies")) {
      s.chronologies = j["chronologies"].get<std::vector<std::string>>();
    }
    if (j.contains("choices")) {
      for (const auto& c : j["choices"]) {
        s.choices.push_back(
            Choice{c.at("group").get<std::string>(), c.at("target").get<std::string>()});
      }
    }
    if (j.contains("repeats")) {
      for (const auto& [key, value] : j["repeats"].items()) {
        s.repeats[key] = value.get<int>();
      }
    }
    if (j.contains("durations")) {
      for (const auto& [key, value] : j["durations"].items()) {
        s.durations[key] = value.get<Tick>();
      }
    }
    if (j.contains("maxSteps")) s.maxSteps = j["maxSteps"].get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw TmError(ErrorKind::SchemaMismatch, e.what());
  }
  if (s.maxSteps < 1) {
    throw TmError(ErrorKind::SchemaMismatch, "maxSteps must be a positive integer");
  }
  for (const auto& [event, count] : s.repeats) {
    if (count < 0) {
      throw TmError(ErrorKind::SchemaMismatch,
                    "repeat count for '" + event + "' must be >= 0");
    }
  }
  return s;
}

std::string traceToJsonLines(const Trace& trace) {
  std::string out;
  for (const auto& step : trace.steps) {
    nlohmann::ordered_json j;
    j["event"] = step.event;
    j["start"] = step.start;
    j["end"] = step.end;
    j["labels"] = step.labels;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace tml
