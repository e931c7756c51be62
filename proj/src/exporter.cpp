#include "tm/exporter.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace tml {

namespace {

constexpr int kSchemaVersion = 1;

std::string dotQuote(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

std::string endpoint(const PortRef& ref) {
  std::string out = dotQuote(ref.stage);
  if (ref.port) out += std::string(":") + portName(*ref.port);
  return out;
}

void emitStage(std::ostringstream& out, const std::string& indent,
               const StageNode& stage, const std::string& nodeId) {
  out << indent << dotQuote(nodeId);
  if (stage.hasPorts()) {
    out << " [shape=record, label=\"<in> in | transfer | <out> out\"]";
  } else {
    out << " [shape=box, label=" << dotQuote(actionName(stage.action)) << "]";
  }
  out << ";\n";
}

void emitThimacCluster(std::ostringstream& out, const StaticModel& model,
                       const std::string& id, int depth) {
  const Thimac& t = model.thimacs.at(id);
  std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
  std::string inner(static_cast<std::size_t>(depth + 1) * 2, ' ');
  out << indent << "subgraph " << dotQuote("cluster_" + id) << " {\n";
  out << inner << "label=" << dotQuote(t.name) << ";\n";
  for (const auto& stageId : t.stages) {
    emitStage(out, inner, model.stages.at(stageId), stageId);
  }
  for (const auto& child : t.children) emitThimacCluster(out, model, child, depth + 1);
  out << indent << "}\n";
}

std::vector<std::string> sortedArcLines(const StaticModel& model,
                                        const std::string& nodePrefix,
                                        const std::set<std::string>* within) {
  auto inScope = [&](const std::string& stage) {
    return within == nullptr || within->count(stage) != 0;
  };
  auto nodeId = [&](const std::string& stage) {
    return dotQuote(nodePrefix + stage);
  };
  std::vector<std::string> lines;
  for (const auto& f : model.flows) {
    if (!inScope(f.from.stage) || !inScope(f.to.stage)) continue;
    std::string from = nodeId(f.from.stage);
    if (f.from.port) from += std::string(":") + portName(*f.from.port);
    std::string to = nodeId(f.to.stage);
    if (f.to.port) to += std::string(":") + portName(*f.to.port);
    lines.push_back(from + " -> " + to + ";");
  }
  for (const auto& t : model.triggers) {
    if (!inScope(t.from) || !inScope(t.to)) continue;
    std::string attrs = t.decreate ? " [style=dashed, label=\"decreate\"];"
                                   : " [style=dashed];";
    lines.push_back(nodeId(t.from) + " -> " + nodeId(t.to) + attrs);
  }
  std::sort(lines.begin(), lines.end());
  return lines;
}

std::string staticDot(const ModelBundle& bundle) {
  std::ostringstream out;
  out << "digraph tm {\n";
  out << "  compound=true;\n";
  std::vector<std::string> roots(bundle.model.roots.begin(), bundle.model.roots.end());
  std::sort(roots.begin(), roots.end());
  for (const auto& root : roots) emitThimacCluster(out, bundle.model, root, 1);
  for (const auto& line : sortedArcLines(bundle.model, "", nullptr)) {
    out << "  " << line << "\n";
  }
  out << "}\n";
  return out.str();
}

std::string eventsDot(const ModelBundle& bundle) {
  std::ostringstream out;
  out << "digraph tm {\n";
  out << "  compound=true;\n";
  std::vector<const Event*> events;
  for (const auto& e : bundle.events) events.push_back(&e);
  std::sort(events.begin(), events.end(),
            [](const Event* a, const Event* b) { return a->id < b->id; });
  // Regions overlap freely, so every event cluster holds its own copy of the
  // region subgraph (node ids are prefixed with the event id).
  for (const Event* e : events) {
    out << "  subgraph " << dotQuote("cluster_" + e->id) << " {\n";
    out << "    style=dashed;\n";
    std::string label = e->id;
    if (e->name != e->id) label += ": " + e->name;
    label += " (at " + e->timeRef + ")";
    out << "    label=" << dotQuote(label) << ";\n";
    std::string prefix = e->id + "::";
    for (const auto& stageId : e->region.stages) {
      if (const StageNode* stage = bundle.model.findStage(stageId)) {
        emitStage(out, "    ", *stage, prefix + stageId);
      }
    }
    for (const auto& line : sortedArcLines(bundle.model, prefix, &e->region.stages)) {
      out << "    " << line << "\n";
    }
    out << "  }\n";
  }
  out << "}\n";
  return out.str();
}

struct BehaviorTree {
  // event id -> composite parent id, for events nested in composites
  std::map<std::string, std::string> parent;
  std::map<std::string, std::vector<std::string>> children;
  std::vector<std::string> topLevel;
};

BehaviorTree behaviorNesting(const ModelBundle& bundle, const Chronology& c) {
  BehaviorTree tree;
  std::set<std::string> present(c.events.begin(), c.events.end());

  // Pull in composite ancestors of the chronology's events.
  bool grew = true;
  while (grew) {
    grew = false;
    std::vector<const Event*> composites;
    for (const auto& e : bundle.events) {
      if (e.isComposite()) composites.push_back(&e);
    }
    std::sort(composites.begin(), composites.end(),
              [](const Event* a, const Event* b) { return a->id < b->id; });
    for (const Event* composite : composites) {
      for (const auto& part : composite->subEvents) {
        if (present.count(part) && !tree.parent.count(part)) {
          tree.parent[part] = composite->id;
          tree.children[composite->id].push_back(part);
          if (present.insert(composite->id).second) grew = true;
        }
      }
    }
  }
  for (const auto& id : present) {
    if (!tree.parent.count(id)) tree.topLevel.push_back(id);
  }
  std::sort(tree.topLevel.begin(), tree.topLevel.end());
  for (auto& [id, kids] : tree.children) std::sort(kids.begin(), kids.end());
  return tree;
}

void emitBehaviorNode(std::ostringstream& out, const ModelBundle& bundle,
                      const BehaviorTree& tree, const std::string& id, int depth) {
  std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
  const Event* event = bundle.findEvent(id);
  std::string label = id;
  if (event && event->name != id) label += ": " + event->name;
  auto kids = tree.children.find(id);
  if (kids != tree.children.end()) {
    out << indent << "subgraph " << dotQuote("cluster_" + id) << " {\n";
    out << indent << "  label=" << dotQuote(label) << ";\n";
    for (const auto& child : kids->second) {
      emitBehaviorNode(out, bundle, tree, child, depth + 1);
    }
    out << indent << "}\n";
  } else {
    out << indent << dotQuote(id) << " [shape=box, label=" << dotQuote(label) << "];\n";
  }
}

std::string behaviorDot(const ModelBundle& bundle) {
  std::ostringstream out;
  out << "digraph tm {\n";
  out << "  compound=true;\n";
  std::vector<const Chronology*> chronologies;
  for (const auto& c : bundle.chronologies) chronologies.push_back(&c);
  std::sort(chronologies.begin(), chronologies.end(),
            [](const Chronology* a, const Chronology* b) { return a->id < b->id; });
  bool wrap = chronologies.size() > 1;
  for (const Chronology* c : chronologies) {
    int depth = 1;
    if (wrap) {
      out << "  subgraph " << dotQuote("cluster_" + c->id) << " {\n";
      out << "    label=" << dotQuote(c->id) << ";\n";
      depth = 2;
    }
    BehaviorTree tree = behaviorNesting(bundle, *c);
    for (const auto& id : tree.topLevel) emitBehaviorNode(out, bundle, tree, id, depth);
    std::vector<std::string> lines;
    for (const auto& edge : c->edges) {
      std::string line = dotQuote(edge.from) + " -> " + dotQuote(edge.to);
      if (edge.kind == EdgeKind::Repeat) line += " [label=\"repeat\"]";
      line += ";";
      lines.push_back(line);
    }
    std::sort(lines.begin(), lines.end());
    std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
    for (const auto& line : lines) out << indent << line << "\n";
    if (wrap) out << "  }\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace

Level parseLevel(std::string_view name) {
  if (name == "static") return Level::Static;
  if (name == "events") return Level::Events;
  if (name == "behavior") return Level::Behavior;
  throw TmError(ErrorKind::UnknownLevel,
                "unknown level '" + std::string(name) + "' (use static|events|behavior)");
}

std::string toDot(const ModelBundle& bundle, Level level) {
  switch (level) {
    case Level::Static: return staticDot(bundle);
    case Level::Events: return eventsDot(bundle);
    case Level::Behavior: return behaviorDot(bundle);
  }
  throw TmError(ErrorKind::UnknownLevel, "unknown level");
}

std::string toJson(const ModelBundle& bundle) {
  nlohmann::ordered_json j;
  j["tmVersion"] = kSchemaVersion;

  auto& thimacs = j["thimacs"] = nlohmann::ordered_json::array();
  for (const auto& [id, t] : bundle.model.thimacs) {  // map: sorted by id
    nlohmann::ordered_json jt;
    jt["id"] = id;
    jt["name"] = t.name;
    if (t.parent) jt["parent"] = *t.parent;
    if (!t.annotations.empty()) jt["annotations"] = t.annotations;
    thimacs.push_back(std::move(jt));
  }

  auto& stages = j["stages"] = nlohmann::ordered_json::array();
  for (const auto& [id, stage] : bundle.model.stages) {
    stages.push_back({{"id", id},
                      {"action", actionName(stage.action)},
                      {"owner", stage.owner}});
  }

  std::vector<std::pair<std::string, std::string>> flowPairs;
  for (const auto& f : bundle.model.flows) {
    flowPairs.emplace_back(f.from.str(), f.to.str());
  }
  std::sort(flowPairs.begin(), flowPairs.end());
  auto& flows = j["flows"] = nlohmann::ordered_json::array();
  for (const auto& [from, to] : flowPairs) {
    flows.push_back({{"from", from}, {"to", to}});
  }

  std::vector<std::tuple<std::string, std::string, bool>> triggerRows;
  for (const auto& t : bundle.model.triggers) {
    triggerRows.emplace_back(t.from, t.to, t.decreate);
  }
  std::sort(triggerRows.begin(), triggerRows.end());
  auto& triggers = j["triggers"] = nlohmann::ordered_json::array();
  for (const auto& [from, to, decreate] : triggerRows) {
    nlohmann::ordered_json jt = {{"from", from}, {"to", to}};
    if (decreate) jt["decreate"] = true;
    triggers.push_back(std::move(jt));
  }

  std::vector<const Event*> events;
  for (const auto& e : bundle.events) events.push_back(&e);
  std::sort(events.begin(), events.end(),
            [](const Event* a, const Event* b) { return a->id < b->id; });
  auto& jevents = j["events"] = nlohmann::ordered_json::array();
  for (const Event* e : events) {
    nlohmann::ordered_json je;
    je["id"] = e->id;
    je["name"] = e->name;
    je["at"] = e->timeRef;
    je["duration"] = e->duration == EventDuration::Instant ? "instant" : "extended";
    je["region"] = e->region.stages;
    if (!e->subEvents.empty()) je["subEvents"] = e->subEvents;
    if (!e->annotations.empty()) je["annotations"] = e->annotations;
    jevents.push_back(std::move(je));
  }

  std::vector<const Chronology*> chronologies;
  for (const auto& c : bundle.chronologies) chronologies.push_back(&c);
  std::sort(chronologies.begin(), chronologies.end(),
            [](const Chronology* a, const Chronology* b) { return a->id < b->id; });
  auto& jchronologies = j["chronologies"] = nlohmann::ordered_json::array();
  for (const Chronology* c : chronologies) {
    nlohmann::ordered_json jc;
    jc["id"] = c->id;
    jc["events"] = c->events;
    std::vector<std::tuple<std::string, std::string, int>> edgeRows;
    for (const auto& e : c->edges) {
      edgeRows.emplace_back(e.from, e.to, static_cast<int>(e.kind));
    }
    std::sort(edgeRows.begin(), edgeRows.end());
    auto& jedges = jc["edges"] = nlohmann::ordered_json::array();
    for (const auto& [from, to, kind] : edgeRows) {
      jedges.push_back({{"from", from},
                        {"to", to},
                        {"kind", kind == static_cast<int>(EdgeKind::Repeat)
                                     ? "repeat"
                                     : "succession"}});
    }
    auto& jgroups = jc["branchGroups"] = nlohmann::ordered_json::array();
    std::vector<const BranchGroup*> groups;
    for (const auto& g : c->branchGroups) groups.push_back(&g);
    std::sort(groups.begin(), groups.end(),
              [](const BranchGroup* a, const BranchGroup* b) { return a->id < b->id; });
    for (const BranchGroup* g : groups) {
      std::vector<std::string> targets = g->targets;
      std::sort(targets.begin(), targets.end());
      jgroups.push_back({{"id", g->id}, {"source", g->source}, {"targets", targets}});
    }
    jchronologies.push_back(std::move(jc));
  }

  std::vector<const Recurrence*> recurrences;
  for (const auto& r : bundle.recurrences) recurrences.push_back(&r);
  std::sort(recurrences.begin(), recurrences.end(),
            [](const Recurrence* a, const Recurrence* b) { return a->eventId < b->eventId; });
  auto& jrecurrences = j["recurrences"] = nlohmann::ordered_json::array();
  for (const Recurrence* r : recurrences) {
    nlohmann::ordered_json jr;
    jr["event"] = r->eventId;
    jr["every"] = r->intervalTicks;
    jr["count"] = r->count;
    if (!r->unifiers.empty()) jr["unifiers"] = r->unifiers;
    jrecurrences.push_back(std::move(jr));
  }

  return j.dump(2) + "\n";
}

namespace {

PortRef parsePortRef(const std::string& text) {
  PortRef ref;
  if (text.size() > 3 && text.ends_with(".in")) {
    ref.stage = text.substr(0, text.size() - 3);
    ref.port = Port::In;
  } else if (text.size() > 4 && text.ends_with(".out")) {
    ref.stage = text.substr(0, text.size() - 4);
    ref.port = Port::Out;
  } else {
    ref.stage = text;
  }
  return ref;
}

}  // namespace

ModelBundle fromJson(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw TmError(ErrorKind::MalformedJson, e.what());
  }
  if (!j.is_object() || !j.contains("tmVersion")) {
    throw TmError(ErrorKind::SchemaMismatch, "missing required tmVersion field");
  }
  if (!j["tmVersion"].is_number_integer() ||
      j["tmVersion"].get<int>() != kSchemaVersion) {
    throw TmError(ErrorKind::SchemaMismatch,
                  "unsupported tmVersion (expected " + std::to_string(kSchemaVersion) + ")");
  }

  ModelBundle bundle;
  try {
    ModelBuilder builder;
    if (j.contains("thimacs")) {
      // Ids are dotted paths, so lexicographic order yields parents first.
      std::vector<nlohmann::json> rows(j["thimacs"].begin(), j["thimacs"].end());
      std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return a.at("id").template get<std::string>() <
               b.at("id").template get<std::string>();
      });
      for (const auto& row : rows) {
        std::map<std::string, std::string> annotations;
        if (row.contains("annotations")) {
          for (const auto& [key, value] : row["annotations"].items()) {
            annotations[key] = value.get<std::string>();
          }
        }
        builder.thimac(row.at("id").get<std::string>(),
                       row.value("name", std::string()), std::move(annotations));
      }
    }
    if (j.contains("stages")) {
      for (const auto& row : j["stages"]) {
        auto action = actionFromName(row.at("action").get<std::string>());
        if (!action) {
          throw TmError(ErrorKind::SchemaMismatch,
                        "unknown stage action '" + row.at("action").get<std::string>() + "'");
        }
        builder.stage(row.at("owner").get<std::string>(), *action);
      }
    }
    if (j.contains("flows")) {
      for (const auto& row : j["flows"]) {
        builder.flow(parsePortRef(row.at("from").get<std::string>()),
                     parsePortRef(row.at("to").get<std::string>()));
      }
    }
    if (j.contains("triggers")) {
      for (const auto& row : j["triggers"]) {
        builder.trigger(row.at("from").get<std::string>(),
                        row.at("to").get<std::string>(), row.value("decreate", false));
      }
    }
    bundle.model = std::move(builder).build();

    if (j.contains("events")) {
      for (const auto& row : j["events"]) {
        Event e;
        e.id = row.at("id").get<std::string>();
        e.name = row.value("name", e.id);
        e.timeRef = row.value("at", std::string());
        e.duration = row.value("duration", std::string("extended")) == "instant"
                         ? EventDuration::Instant
                         : EventDuration::Extended;
        for (const auto& stage : row.at("region")) {
          e.region.stages.insert(stage.get<std::string>());
        }
        if (row.contains("subEvents")) {
          e.subEvents = row["subEvents"].get<std::vector<std::string>>();
        }
        if (row.contains("annotations")) {
          for (const auto& [key, value] : row["annotations"].items()) {
            e.annotations[key] = value.get<std::string>();
          }
        }
        bundle.events.push_back(std::move(e));
      }
    }
    if (j.contains("chronologies")) {
      for (const auto& row : j["chronologies"]) {
        Chronology c;
        c.id = row.at("id").get<std::string>();
        if (row.contains("events")) {
          for (const auto& ev : row["events"]) c.events.insert(ev.get<std::string>());
        }
        for (const auto& edge : row.value("edges", nlohmann::json::array())) {
          ChronEdge e;
          e.from = edge.at("from").get<std::string>();
          e.to = edge.at("to").get<std::string>();
          e.kind = edge.value("kind", std::string("succession")) == "repeat"
                       ? EdgeKind::Repeat
                       : EdgeKind::Succession;
          c.events.insert(e.from);
          c.events.insert(e.to);
          c.edges.push_back(std::move(e));
        }
        std::map<std::string, int> counter;
        for (const auto& group : row.value("branchGroups", nlohmann::json::array())) {
          BranchGroup g;
          g.source = group.at("source").get<std::string>();
          g.id = group.value("id", g.source + "#" + std::to_string(counter[g.source]));
          ++counter[g.source];
          g.targets = group.at("targets").get<std::vector<std::string>>();
          c.branchGroups.push_back(std::move(g));
        }
        bundle.chronologies.push_back(std::move(c));
      }
    }
    if (j.contains("recurrences")) {
      for (const auto& row : j["recurrences"]) {
        Recurrence r;
        r.eventId = row.at("event").get<std::string>();
        r.intervalTicks = row.at("every").get<Tick>();
        r.count = row.at("count").get<int>();
        if (row.contains("unifiers")) {
          for (const auto& [key, value] : row["unifiers"].items()) {
            r.unifiers[key] = value.get<std::string>();
          }
        }
        bundle.recurrences.push_back(std::move(r));
      }
    }
  } catch (const TmError& e) {
    if (e.kind() == ErrorKind::SchemaMismatch || e.kind() == ErrorKind::MalformedJson) {
      throw;
    }
    throw TmError(ErrorKind::SchemaMismatch, e.what());
  } catch (const nlohmann::json::exception& e) {
    throw TmError(ErrorKind::SchemaMismatch, e.what());
  }
  return bundle;
}

}  // namespace tml
