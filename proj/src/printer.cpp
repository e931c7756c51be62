#include "tm/printer.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace tml {

namespace {

bool bareToken(const std::string& text) {
  if (text.empty()) return false;
  if (std::isdigit(static_cast<unsigned char>(text[0]))) {
    return std::all_of(text.begin(), text.end(), [](unsigned char c) {
      return std::isdigit(c);
    });
  }
  if (!std::isalpha(static_cast<unsigned char>(text[0])) && text[0] != '_') return false;
  for (char c : text) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  }
  return true;
}

std::string quoted(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c; break;
    }
  }
  out += '"';
  return out;
}

std::string valueToken(const std::string& text) {
  return bareToken(text) ? text : quoted(text);
}

std::string leafOf(const std::string& path) {
  auto dot = path.rfind('.');
  return dot == std::string::npos ? path : path.substr(dot + 1);
}

void printAnnotations(std::ostringstream& out, const std::string& indent,
                      const std::map<std::string, std::string>& annotations) {
  for (const auto& [key, value] : annotations) {
    out << indent << "@" << key;
    if (!value.empty()) out << " = " << valueToken(value);
    out << "\n";
  }
}

void printThimac(std::ostringstream& out, const StaticModel& model,
                 const std::string& id, int depth) {
  const Thimac& t = model.thimacs.at(id);
  std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
  out << indent << "thimac " << leafOf(id);
  if (t.name != leafOf(id)) out << " " << quoted(t.name);
  out << " {\n";
  std::string inner(static_cast<std::size_t>(depth + 1) * 2, ' ');
  printAnnotations(out, inner, t.annotations);
  for (int i = 0; i < kActionCount; ++i) {
    Action a = static_cast<Action>(i);
    if (t.stages.count(id + "." + actionName(a))) out << inner << actionName(a) << "\n";
  }
  for (const auto& child : t.children) printThimac(out, model, child, depth + 1);
  out << indent << "}\n";
}

}  // namespace

std::string printModel(const ModelBundle& bundle) {
  std::ostringstream out;
  const StaticModel& model = bundle.model;

  std::vector<std::string> roots(model.roots.begin(), model.roots.end());
  std::sort(roots.begin(), roots.end());
  for (const auto& root : roots) printThimac(out, model, root, 0);

  std::vector<std::string> flowLines;
  flowLines.reserve(model.flows.size());
  for (const auto& f : model.flows) {
    flowLines.push_back("flow " + f.from.str() + " -> " + f.to.str());
  }
  std::sort(flowLines.begin(), flowLines.end());
  if (!flowLines.empty()) out << "\n";
  for (const auto& line : flowLines) out << line << "\n";

  std::vector<std::string> triggerLines;
  triggerLines.reserve(model.triggers.size());
  for (const auto& t : model.triggers) {
    std::string line = "trigger " + t.from + " ~> " + t.to;
    if (t.decreate) line += " decreate";
    triggerLines.push_back(line);
  }
  std::sort(triggerLines.begin(), triggerLines.end());
  if (!triggerLines.empty()) out << "\n";
  for (const auto& line : triggerLines) out << line << "\n";

  // Plain events sorted by id; composites afterwards in dependency order so
  // every part is declared before it is referenced.
  std::vector<const Event*> plain;
  std::vector<const Event*> composites;
  for (const auto& e : bundle.events) {
    (e.isComposite() ? composites : plain).push_back(&e);
  }
  auto byId = [](const Event* a, const Event* b) { return a->id < b->id; };
  std::sort(plain.begin(), plain.end(), byId);
  std::sort(composites.begin(), composites.end(), byId);

  for (const Event* e : plain) {
    out << "\n";
    out << "event " << e->id;
    if (e->name != e->id) out << " " << quoted(e->name);
    out << " at " << valueToken(e->timeRef);
    if (e->duration == EventDuration::Instant) out << " instant";
    out << " {\n  region: ";
    bool first = true;
    for (const auto& stage : e->region.stages) {
      if (!first) out << ", ";
      out << stage;
      first = false;
    }
    out << "\n";
    printAnnotations(out, "  ", e->annotations);
    out << "}\n";
  }

  std::set<std::string> declared;
  for (const Event* e : plain) declared.insert(e->id);
  while (!composites.empty()) {
    bool progress = false;
    for (auto it = composites.begin(); it != composites.end();) {
      const Event* e = *it;
      bool ready = std::all_of(e->subEvents.begin(), e->subEvents.end(),
                               [&](const std::string& part) { return declared.count(part); });
      if (!ready) {
        ++it;
        continue;
      }
      out << "compose " << e->id;
      if (e->name != e->id) out << " " << quoted(e->name);
      out << " =";
      for (std::size_t i = 0; i < e->subEvents.size(); ++i) {
        out << (i == 0 ? " " : " + ") << e->subEvents[i];
      }
      out << "\n";
      declared.insert(e->id);
      it = composites.erase(it);
      progress = true;
    }
    if (!progress) break;  // unknown parts; emit remaining as-is
  }
  for (const Event* e : composites) {
    out << "compose " << e->id << " =";
    for (std::size_t i = 0; i < e->subEvents.size(); ++i) {
      out << (i == 0 ? " " : " + ") << e->subEvents[i];
    }
    out << "\n";
  }

  std::vector<const Chronology*> chronologies;
  for (const auto& c : bundle.chronologies) chronologies.push_back(&c);
  std::sort(chronologies.begin(), chronologies.end(),
            [](const Chronology* a, const Chronology* b) { return a->id < b->id; });
  for (const Chronology* c : chronologies) {
    out << "\n";
    out << "chronology " << c->id << " {\n";

    std::set<std::pair<std::string, std::string>> grouped;
    std::vector<std::string> branchLines;
    for (const auto& g : c->branchGroups) {
      std::vector<std::string> targets = g.targets;
      std::sort(targets.begin(), targets.end());
      std::string line = "  branch " + g.source + " {";
      for (std::size_t i = 0; i < targets.size(); ++i) {
        line += (i == 0 ? " -> " : " | -> ") + targets[i];
        grouped.emplace(g.source, targets[i]);
      }
      line += " }";
      branchLines.push_back(line);
    }
    std::sort(branchLines.begin(), branchLines.end());
    for (const auto& line : branchLines) out << line << "\n";

    std::vector<std::string> edgeLines;
    std::vector<std::string> repeatLines;
    for (const auto& e : c->edges) {
      if (e.kind == EdgeKind::Repeat) {
        repeatLines.push_back("  repeat " + e.from + ";");
      } else if (!grouped.count({e.from, e.to})) {
        edgeLines.push_back("  " + e.from + " -> " + e.to + ";");
      }
    }
    std::sort(edgeLines.begin(), edgeLines.end());
    std::sort(repeatLines.begin(), repeatLines.end());
    for (const auto& line : edgeLines) out << line << "\n";
    for (const auto& line : repeatLines) out << line << "\n";
    out << "}\n";
  }

  std::vector<std::string> recurLines;
  for (const auto& r : bundle.recurrences) {
    std::string line = "recur " + r.eventId + " every " + std::to_string(r.intervalTicks) +
                       " count " + std::to_string(r.count);
    for (const auto& [key, value] : r.unifiers) {
      line += " " + key + "=" + valueToken(value);
    }
    recurLines.push_back(line);
  }
  std::sort(recurLines.begin(), recurLines.end());
  if (!recurLines.empty()) out << "\n";
  for (const auto& line : recurLines) out << line << "\n";

  return out.str();
}

}  // namespace tml
