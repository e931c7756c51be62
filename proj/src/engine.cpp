#include "tm/engine.hpp"

#include <algorithm>
#include <map>

#include "json.hpp"

namespace tml {

std::string planSetToJson(const PlanSet& plans) {
  nlohmann::ordered_json j;
  j["plans"] = plans.plans;
  j["commonPrefix"] = plans.commonPrefix;
  return j.dump();
}

std::vector<RecurrenceInstance> expandRecurrence(const ModelBundle& bundle,
                                                 const Recurrence& recurrence,
                                                 Tick startTick) {
  const Event* base = bundle.findEvent(recurrence.eventId);
  if (!base) {
    throw TmError(ErrorKind::UnknownEvent,
                  "recurrence base event '" + recurrence.eventId + "' is not declared");
  }
  Tick duration = base->duration == EventDuration::Instant ? 0 : 1;
  std::vector<RecurrenceInstance> out;
  out.reserve(static_cast<std::size_t>(std::max(recurrence.count, 0)));
  for (int i = 0; i < recurrence.count; ++i) {
    RecurrenceInstance instance;
    instance.event = *base;
    instance.event.id = base->id + "#" + std::to_string(i);
    for (const auto& [key, value] : recurrence.unifiers) {
      instance.event.annotations[key] = value;
    }
    instance.occurrence = i;
    instance.start = startTick + static_cast<Tick>(i) * recurrence.intervalTicks;
    instance.end = instance.start + duration;
    out.push_back(std::move(instance));
  }
  return out;
}

namespace {

struct EdgeRef {
  std::size_t index;       // into chronology.edges
  const ChronEdge* edge;
  const BranchGroup* group;  // nullptr for ungrouped edges
};

class PlanEnumerator {
public:
  PlanEnumerator(const Chronology& c, int repeatBound, std::size_t cap)
      : chronology_(c), repeatBound_(repeatBound), cap_(cap) {
    for (std::size_t i = 0; i < c.edges.size(); ++i) {
      const ChronEdge& edge = c.edges[i];
      if (edge.kind != EdgeKind::Succession) continue;
      const BranchGroup* group = nullptr;
      for (const auto& g : c.branchGroups) {
        if (g.source == edge.from &&
            std::find(g.targets.begin(), g.targets.end(), edge.to) != g.targets.end()) {
          group = &g;
          break;
        }
      }
      outgoing_[edge.from].push_back(EdgeRef{i, &edge, group});
    }
    for (auto& [from, refs] : outgoing_) {
      std::sort(refs.begin(), refs.end(), [](const EdgeRef& a, const EdgeRef& b) {
        return a.edge->to < b.edge->to;
      });
    }
    edgeUse_.assign(c.edges.size(), 0);
  }

  std::vector<std::vector<std::string>> run(const std::string& start) {
    visit(start);
    return std::move(plans_);
  }

private:
  void visit(const std::string& event) {
    path_.push_back(event);
    if (chronology_.hasRepeat(event)) {
      for (int i = 0; i < repeatBound_; ++i) path_.push_back(event);
    }

    bool extended = false;
    auto it = outgoing_.find(event);
    if (it != outgoing_.end()) {
      for (const EdgeRef& ref : it->second) {
        if (edgeUse_[ref.index] > repeatBound_) continue;
        if (ref.group) {
          auto used = groupChoice_.find(ref.group);
          if (used != groupChoice_.end() && used->second != ref.index) continue;
        }
        extended = true;
        ++edgeUse_[ref.index];
        bool groupClaimed = false;
        if (ref.group && !groupChoice_.count(ref.group)) {
          groupChoice_.emplace(ref.group, ref.index);
          groupClaimed = true;
        }
        std::size_t mark = path_.size();
        visit(ref.edge->to);
        path_.resize(mark);
        if (groupClaimed) groupChoice_.erase(ref.group);
        --edgeUse_[ref.index];
      }
    }

    if (!extended) {
      if (plans_.size() >= cap_) {
        throw TmError(ErrorKind::Explosion,
                      "plan enumeration exceeds the cap of " + std::to_string(cap_));
      }
      plans_.push_back(path_);
    }
    // caller trims path_ back to its mark
  }

  const Chronology& chronology_;
  int repeatBound_;
  std::size_t cap_;
  std::map<std::string, std::vector<EdgeRef>> outgoing_;
  std::vector<int> edgeUse_;
  std::map<const BranchGroup*, std::size_t> groupChoice_;
  std::vector<std::string> path_;
  std::vector<std::vector<std::string>> plans_;
};

}  // namespace

PlanSet enumeratePlans(const Chronology& chronology, const std::string& start,
                       int repeatBound, std::size_t cap) {
  if (!chronology.events.count(start)) {
    throw TmError(ErrorKind::UnknownEvent,
                  "start event '" + start + "' is not part of chronology '" +
                      chronology.id + "'");
  }
  if (repeatBound < 0) {
    throw TmError(ErrorKind::InvalidArgument, "repeat bound must be >= 0");
  }
  PlanSet out;
  out.plans = PlanEnumerator(chronology, repeatBound, cap).run(start);

  if (!out.plans.empty()) {
    out.commonPrefix = out.plans.front();
    for (const auto& plan : out.plans) {
      std::size_t agree = 0;
      while (agree < out.commonPrefix.size() && agree < plan.size() &&
             out.commonPrefix[agree] == plan[agree]) {
        ++agree;
      }
      out.commonPrefix.resize(agree);
    }
  }
  return out;
}

std::vector<std::string> eventSequenceOf(const Trace& trace) {
  std::vector<std::string> out;
  out.reserve(trace.steps.size());
  for (const auto& step : trace.steps) out.push_back(step.event);
  return out;
}

}  // namespace tml
