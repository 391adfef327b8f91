#pragma once

#include <functional>
#include <vector>

#include "ctensor/ir.hpp"
#include "ctensor/storage.hpp"

namespace ct {

/// Looplet for fiber `pos` of `level`, in loop coordinates where the
/// tensor coordinate is `loop index + offset`. `rest` are the index
/// expressions of the deeper levels, carried into payload accesses.
LoopletPtr unfurl(const ContTensor& t, int level, const NodePtr& pos, const NodePtr& offset,
                  const std::vector<NodePtr>& rest, ir::NameGen& names);

/// True when every fiber of the level holds exactly one entry; such levels
/// unfurl without a stepper.
bool is_singleton_level(const Level& lv);

struct WalkPiece {
  Iv range;
  NodePtr payload;
  bool pinpoint = false;
};

/// Expands a looplet over `range` into concrete pieces. `eval` evaluates a
/// closed expression (positions are substituted as literals).
std::vector<WalkPiece> walk_looplet(const LoopletPtr& lp, const Iv& range,
                                    const std::function<Lim(const NodePtr&)>& eval);

}  // namespace ct
