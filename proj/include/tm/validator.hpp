#pragma once

#include <vector>

#include "tm/diagnostic.hpp"
#include "tm/model.hpp"

namespace tml {

/// Classification of one ordered action pair in the legality matrix. When the
/// pair is illegal, `rule` names the diagnostic that such an arc raises.
struct FlowRule {
  bool legal = false;
  const char* rule = nullptr;
};

/// Flow inside one thimac. Legal pairs: create->process, create->release,
/// receive->process, receive->release, process->release,
/// release->transfer(out), transfer(in)->receive. transfer->process has its
/// own rule id (FLOW-007) so it can be relaxed in one place.
FlowRule intraFlowRule(Action from, Action to);

/// Flow between thimacs. Only transfer(out)->transfer(in) is legal.
FlowRule interFlowRule(Action from, Action to);

/// Triggers may originate anywhere and must target create or process.
bool triggerTargetLegal(Action target);

std::vector<Diagnostic> validateStatic(const StaticModel& model);
std::vector<Diagnostic> validateEvents(const std::vector<Event>& events,
                                       const StaticModel& model);
std::vector<Diagnostic> validateChronology(const Chronology& chronology,
                                           const std::vector<Event>& events);

/// Full pass over a bundle: static model, events, every chronology, and the
/// recurrence declarations. Diagnostics come back sorted, so the result does
/// not depend on declaration order.
std::vector<Diagnostic> validateBundle(const ModelBundle& bundle);

}  // namespace tml
