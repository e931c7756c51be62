#pragma once

#include <string>
#include <string_view>

#include "tm/model.hpp"

namespace tml {

/// Which of the three model levels to render.
enum class Level { Static, Events, Behavior };

/// Maps "static" / "events" / "behavior"; throws UnknownLevel otherwise.
Level parseLevel(std::string_view name);

/// Graphviz rendering with the diagram conventions of the method: thimac
/// nesting as clusters, flow arcs solid, trigger arcs dashed, transfer ports
/// as record fields. The events level draws one dashed cluster per event
/// containing a copy of its region subgraph; the behavior level renders
/// chronologies with repeat edges as self-loops and composite events as
/// nested clusters. Output is deterministic (sorted ids).
std::string toDot(const ModelBundle& bundle, Level level);

/// Versioned lossless JSON interchange: fromJson(toJson(b)) is structurally
/// equal to b. The schema ships as schema/tm-bundle.schema.json.
std::string toJson(const ModelBundle& bundle);

/// Throws MalformedJson on unparseable text and SchemaMismatch on a missing
/// or unsupported tmVersion or structurally invalid content.
ModelBundle fromJson(std::string_view text);

}  // namespace tml
