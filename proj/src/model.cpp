#include "tm/model.hpp"

#include <algorithm>
#include <array>
#include <queue>
#include <tuple>

namespace tml {

namespace {

constexpr std::array<const char*, kActionCount> kActionNames = {
    "create", "receive", "process", "release", "transfer"};

std::string stageId(const std::string& thimacPath, Action action) {
  return thimacPath + "." + actionName(action);
}

}  // namespace

const char* actionName(Action a) { return kActionNames[static_cast<int>(a)]; }

std::optional<Action> actionFromName(const std::string& name) {
  for (int i = 0; i < kActionCount; ++i) {
    if (name == kActionNames[i]) return static_cast<Action>(i);
  }
  return std::nullopt;
}

const char* portName(Port p) { return p == Port::In ? "in" : "out"; }

std::string PortRef::str() const {
  return port ? stage + "." + portName(*port) : stage;
}

const Thimac* StaticModel::findThimac(const std::string& id) const {
  auto it = thimacs.find(id);
  return it == thimacs.end() ? nullptr : &it->second;
}

const StageNode* StaticModel::findStage(const std::string& id) const {
  auto it = stages.find(id);
  return it == stages.end() ? nullptr : &it->second;
}

bool Chronology::hasSuccession(const std::string& from, const std::string& to) const {
  return std::any_of(edges.begin(), edges.end(), [&](const ChronEdge& e) {
    return e.kind == EdgeKind::Succession && e.from == from && e.to == to;
  });
}

bool Chronology::hasRepeat(const std::string& event) const {
  return std::any_of(edges.begin(), edges.end(), [&](const ChronEdge& e) {
    return e.kind == EdgeKind::Repeat && e.from == event && e.to == event;
  });
}

std::vector<const BranchGroup*> Chronology::groupsAt(const std::string& source) const {
  std::vector<const BranchGroup*> out;
  for (const auto& g : branchGroups) {
    if (g.source == source) out.push_back(&g);
  }
  return out;
}

const BranchGroup* Chronology::findGroup(const std::string& id) const {
  for (const auto& g : branchGroups) {
    if (g.id == id) return &g;
  }
  return nullptr;
}

std::vector<std::string> Chronology::sourceEvents() const {
  std::set<std::string> incoming;
  for (const auto& e : edges) {
    if (e.kind == EdgeKind::Succession && e.from != e.to) incoming.insert(e.to);
  }
  std::vector<std::string> out;
  for (const auto& ev : events) {
    if (!incoming.count(ev)) out.push_back(ev);
  }
  return out;
}

const Event* ModelBundle::findEvent(const std::string& id) const {
  for (const auto& e : events) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

const Chronology* ModelBundle::findChronology(const std::string& id) const {
  for (const auto& c : chronologies) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

ModelBuilder& ModelBuilder::thimac(const std::string& path, const std::string& name,
                                   std::map<std::string, std::string> annotations) {
  if (path.empty()) {
    throw TmError(ErrorKind::InvalidArgument, "thimac path must not be empty");
  }
  if (model_.thimacs.count(path)) {
    throw TmError(ErrorKind::Duplicate, "thimac '" + path + "' already exists");
  }
  Thimac t;
  t.id = path;
  t.annotations = std::move(annotations);
  auto dot = path.rfind('.');
  std::string leaf = dot == std::string::npos ? path : path.substr(dot + 1);
  if (actionFromName(leaf) || leaf == "in" || leaf == "out") {
    throw TmError(ErrorKind::InvalidArgument,
                  "'" + leaf + "' is reserved and cannot name a thimac");
  }
  t.name = name.empty() ? leaf : name;
  if (dot != std::string::npos) {
    std::string parent = path.substr(0, dot);
    auto it = model_.thimacs.find(parent);
    if (it == model_.thimacs.end()) {
      throw TmError(ErrorKind::UnknownReference,
                    "parent thimac '" + parent + "' does not exist");
    }
    t.parent = parent;
    it->second.children.insert(path);
  } else {
    model_.roots.push_back(path);
  }
  model_.thimacs.emplace(path, std::move(t));
  return *this;
}

ModelBuilder& ModelBuilder::stage(const std::string& thimacPath, Action action) {
  auto it = model_.thimacs.find(thimacPath);
  if (it == model_.thimacs.end()) {
    throw TmError(ErrorKind::UnknownReference,
                  "thimac '" + thimacPath + "' does not exist");
  }
  std::string id = stageId(thimacPath, action);
  if (model_.stages.count(id)) {
    throw TmError(ErrorKind::Duplicate, "thimac '" + thimacPath +
                                            "' already owns a " + actionName(action) +
                                            " stage");
  }
  model_.stages.emplace(id, StageNode{id, action, thimacPath});
  it->second.stages.insert(id);
  return *this;
}

ModelBuilder& ModelBuilder::flow(const PortRef& from, const PortRef& to) {
  for (const PortRef* ref : {&from, &to}) {
    if (!model_.stages.count(ref->stage)) {
      throw TmError(ErrorKind::UnknownReference,
                    "flow endpoint '" + ref->str() + "' does not resolve to a stage");
    }
  }
  model_.flows.push_back(FlowArc{from, to});
  return *this;
}

ModelBuilder& ModelBuilder::trigger(const std::string& fromStage,
                                    const std::string& toStage, bool decreate) {
  for (const std::string* id : {&fromStage, &toStage}) {
    if (!model_.stages.count(*id)) {
      throw TmError(ErrorKind::UnknownReference,
                    "trigger endpoint '" + *id + "' does not resolve to a stage");
    }
  }
  model_.triggers.push_back(TriggerArc{fromStage, toStage, decreate});
  return *this;
}

StaticModel ModelBuilder::build() && { return std::move(model_); }

StaticModel newStaticModel() { return StaticModel{}; }

std::vector<Event> decomposeEvent(const ModelBundle& bundle, const Event& e) {
  if (!bundle.findEvent(e.id)) {
    throw TmError(ErrorKind::UnknownEvent, "event '" + e.id + "' is not declared");
  }
  std::vector<Event> atoms;
  atoms.reserve(e.region.stages.size());
  bool single = e.region.stages.size() == 1;
  for (const auto& stage : e.region.stages) {  // std::set: sorted, no repeats
    Event atom;
    atom.id = e.id + "/" + stage;
    atom.name = stage;
    atom.region.stages = {stage};
    atom.timeRef = e.timeRef;
    atom.duration = single ? e.duration : EventDuration::Extended;
    atoms.push_back(std::move(atom));
  }
  return atoms;
}

Event composeEvents(const std::vector<Event>& parts, const std::string& id,
                    const std::string& name) {
  if (parts.size() < 2) {
    throw TmError(ErrorKind::TooFewParts,
                  "composite '" + id + "' needs at least 2 parts, got " +
                      std::to_string(parts.size()));
  }
  Event composite;
  composite.id = id;
  composite.name = name.empty() ? id : name;
  composite.timeRef = parts.front().timeRef;
  for (const auto& part : parts) {
    for (const auto& stage : part.region.stages) {
      if (!composite.region.stages.insert(stage).second) {
        throw TmError(ErrorKind::NotDisjoint,
                      "parts of '" + id + "' overlap at stage '" + stage + "'");
      }
    }
    composite.subEvents.push_back(part.id);
  }
  return composite;
}

bool regionConnected(const StaticModel& model, const Region& region) {
  if (region.stages.empty()) return false;
  if (region.stages.size() == 1) return true;

  std::map<std::string, std::vector<std::string>> adj;
  auto link = [&](const std::string& a, const std::string& b) {
    if (region.stages.count(a) && region.stages.count(b)) {
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
  };
  for (const auto& f : model.flows) link(f.from.stage, f.to.stage);
  for (const auto& t : model.triggers) link(t.from, t.to);

  std::set<std::string> seen;
  std::queue<std::string> work;
  work.push(*region.stages.begin());
  seen.insert(*region.stages.begin());
  while (!work.empty()) {
    std::string cur = work.front();
    work.pop();
    for (const auto& next : adj[cur]) {
      if (seen.insert(next).second) work.push(next);
    }
  }
  return seen.size() == region.stages.size();
}

namespace {

using FlowKey = std::tuple<std::string, int, std::string, int>;

int portKey(const std::optional<Port>& p) {
  return p ? (*p == Port::In ? 1 : 2) : 0;
}

std::vector<FlowKey> flowKeys(const StaticModel& m) {
  std::vector<FlowKey> keys;
  keys.reserve(m.flows.size());
  for (const auto& f : m.flows) {
    keys.emplace_back(f.from.stage, portKey(f.from.port), f.to.stage, portKey(f.to.port));
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

std::vector<std::tuple<std::string, std::string, bool>> triggerKeys(const StaticModel& m) {
  std::vector<std::tuple<std::string, std::string, bool>> keys;
  keys.reserve(m.triggers.size());
  for (const auto& t : m.triggers) keys.emplace_back(t.from, t.to, t.decreate);
  std::sort(keys.begin(), keys.end());
  return keys;
}

bool thimacsEqual(const StaticModel& a, const StaticModel& b) {
  if (a.thimacs.size() != b.thimacs.size()) return false;
  for (const auto& [id, ta] : a.thimacs) {
    const Thimac* tb = b.findThimac(id);
    if (!tb) return false;
    if (ta.name != tb->name || ta.parent != tb->parent) return false;
    if (ta.children != tb->children || ta.stages != tb->stages) return false;
    if (ta.annotations != tb->annotations) return false;
  }
  return true;
}

bool stagesEqual(const StaticModel& a, const StaticModel& b) {
  if (a.stages.size() != b.stages.size()) return false;
  for (const auto& [id, sa] : a.stages) {
    const StageNode* sb = b.findStage(id);
    if (!sb || sa.action != sb->action || sa.owner != sb->owner) return false;
  }
  return true;
}

bool eventsEqual(const ModelBundle& a, const ModelBundle& b) {
  if (a.events.size() != b.events.size()) return false;
  for (const auto& ea : a.events) {
    const Event* eb = b.findEvent(ea.id);
    if (!eb) return false;
    if (ea.name != eb->name || ea.region != eb->region) return false;
    if (ea.timeRef != eb->timeRef || ea.duration != eb->duration) return false;
    if (ea.subEvents != eb->subEvents || ea.annotations != eb->annotations) return false;
  }
  return true;
}

bool chronologiesEqual(const ModelBundle& a, const ModelBundle& b) {
  if (a.chronologies.size() != b.chronologies.size()) return false;
  for (const auto& ca : a.chronologies) {
    const Chronology* cb = b.findChronology(ca.id);
    if (!cb) return false;
    if (ca.events != cb->events) return false;
    auto edgeKeys = [](const Chronology& c) {
      std::vector<std::tuple<std::string, std::string, int>> keys;
      for (const auto& e : c.edges) {
        keys.emplace_back(e.from, e.to, static_cast<int>(e.kind));
      }
      std::sort(keys.begin(), keys.end());
      return keys;
    };
    if (edgeKeys(ca) != edgeKeys(*cb)) return false;
    auto groupKeys = [](const Chronology& c) {
      std::vector<std::pair<std::string, std::set<std::string>>> keys;
      for (const auto& g : c.branchGroups) {
        keys.emplace_back(g.source,
                          std::set<std::string>(g.targets.begin(), g.targets.end()));
      }
      std::sort(keys.begin(), keys.end());
      return keys;
    };
    if (groupKeys(ca) != groupKeys(*cb)) return false;
  }
  return true;
}

bool recurrencesEqual(const ModelBundle& a, const ModelBundle& b) {
  if (a.recurrences.size() != b.recurrences.size()) return false;
  auto keys = [](const ModelBundle& m) {
    std::vector<std::tuple<std::string, Tick, int, std::map<std::string, std::string>>> ks;
    for (const auto& r : m.recurrences) {
      ks.emplace_back(r.eventId, r.intervalTicks, r.count, r.unifiers);
    }
    std::sort(ks.begin(), ks.end());
    return ks;
  };
  return keys(a) == keys(b);
}

}  // namespace

bool structurallyEqual(const ModelBundle& a, const ModelBundle& b) {
  if (!thimacsEqual(a.model, b.model) || !stagesEqual(a.model, b.model)) return false;
  std::set<std::string> rootsA(a.model.roots.begin(), a.model.roots.end());
  std::set<std::string> rootsB(b.model.roots.begin(), b.model.roots.end());
  if (rootsA != rootsB) return false;
  if (flowKeys(a.model) != flowKeys(b.model)) return false;
  if (triggerKeys(a.model) != triggerKeys(b.model)) return false;
  return eventsEqual(a, b) && chronologiesEqual(a, b) && recurrencesEqual(a, b);
}

const char* errorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnknownEvent: return "UnknownEvent";
    case ErrorKind::UnknownReference: return "UnknownReference";
    case ErrorKind::Duplicate: return "Duplicate";
    case ErrorKind::NotDisjoint: return "NotDisjoint";
    case ErrorKind::TooFewParts: return "TooFewParts";
    case ErrorKind::Explosion: return "Explosion";
    case ErrorKind::ChoiceMissing: return "ChoiceMissing";
    case ErrorKind::RegionOverlap: return "RegionOverlap";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::MalformedJson: return "MalformedJson";
    case ErrorKind::UnknownLevel: return "UnknownLevel";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace tml
