#include "ctensor/looplet.hpp"

#include <stdexcept>

namespace ct {

using namespace ir;

bool is_singleton_level(const Level& lv) {
  if (level_kind(lv) == LevelKind::dense) return false;
  const std::vector<Pos>* ptr = std::visit(
      [](const auto& l) -> const std::vector<Pos>* {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, DenseLevel>) {
          return nullptr;
        } else {
          return &l.ptr;
        }
      },
      lv);
  if (ptr->size() < 2) return false;
  for (std::size_t i = 0; i + 1 < ptr->size(); ++i) {
    if ((*ptr)[i + 1] - (*ptr)[i] != 1) return false;
  }
  return true;
}

namespace {

NodePtr shift(const NodePtr& e, const NodePtr& off) {
  if (is_lit(off, 0)) return e;
  return call(Op::sub, {e, off});
}

LoopletPtr run(NodePtr body) {
  auto l = std::make_shared<Looplet>();
  l->kind = LoopletKind::run;
  l->body = std::move(body);
  return l;
}

LoopletPtr phase(NodePtr start, NodePtr stop, LoopletPtr child, bool pin = false) {
  auto l = std::make_shared<Looplet>();
  l->kind = LoopletKind::phase;
  l->start = std::move(start);
  l->stop = std::move(stop);
  l->child = std::move(child);
  l->pinpoint = pin;
  return l;
}

LoopletPtr sequence(std::vector<LoopletPtr> phases) {
  auto l = std::make_shared<Looplet>();
  l->kind = LoopletKind::sequence;
  l->children = std::move(phases);
  return l;
}

}  // namespace

LoopletPtr unfurl(const ContTensor& t, int level, const NodePtr& pos, const NodePtr& offset,
                  const std::vector<NodePtr>& rest, NameGen& names) {
  if (level < 0 || level >= t.rank()) throw std::out_of_range("unfurl: bad level");
  const Level& lv = t.levels[level];
  const std::string& name = t.name;
  const bool last = level + 1 == t.rank();
  auto payload = [=](const NodePtr& p) -> NodePtr {
    return last ? read(name, p) : access(name, level + 1, p, rest);
  };
  NodePtr fill = lit(t.fill);

  if (level_kind(lv) == LevelKind::dense) {
    auto l = std::make_shared<Looplet>();
    l->kind = LoopletKind::lookup;
    l->body = payload(level_query(LevelQuery::dense_child, name, level, {pos, var("j")}));
    return l;
  }

  const bool pin = is_pinpoint_level(lv);
  auto left = [=](const NodePtr& p) { return level_query(LevelQuery::left, name, level, {p}); };
  auto right = [=](const NodePtr& p) { return level_query(LevelQuery::right, name, level, {p}); };

  if (is_singleton_level(lv)) {
    // fiber pos holds exactly the entry at position pos
    NodePtr l0 = shift(left(pos), offset), r0 = shift(right(pos), offset);
    NodePtr gap_stop = call(Op::sub_eps, {l0});
    auto body = phase(l0, r0, run(payload(pos)), pin);
    auto out = std::make_shared<Looplet>(*sequence(
        {phase(nullptr, gap_stop, run(fill)), body, phase(nullptr, lit(Lim::pos_inf()), run(fill))}));
    out->facts = {{lit(Lim::neg_inf()), gap_stop}, {l0, r0}};
    return out;
  }

  NodePtr last_right = shift(level_query(LevelQuery::last_right, name, level, {pos}), offset);
  auto st = std::make_shared<Looplet>();
  st->kind = LoopletKind::stepper;
  st->pvar = names.fresh(name + "_p" + std::to_string(level));
  st->seek = [=](const NodePtr& target) {
    if (is_lit(offset, 0)) return level_query(LevelQuery::seek, name, level, {pos, target});
    return level_query(LevelQuery::seek, name, level, {pos, target, offset});
  };
  st->step_stop = [=](const NodePtr& p) { return shift(right(p), offset); };
  st->step_body = [=](const NodePtr& p) {
    NodePtr lp = shift(left(p), offset), rp = shift(right(p), offset);
    auto b = std::make_shared<Looplet>(*sequence({phase(nullptr, call(Op::sub_eps, {lp}), run(fill)),
                                                  phase(lp, rp, run(payload(p)), pin)}));
    b->facts = {{lp, rp}, {rp, last_right}};
    return LoopletPtr(b);
  };
  return sequence({phase(nullptr, last_right, st), phase(nullptr, lit(Lim::pos_inf()), run(fill))});
}

namespace {

void walk(const LoopletPtr& lp, const Iv& range, bool pin,
          const std::function<Lim(const NodePtr&)>& eval, std::vector<WalkPiece>& out) {
  if (range.empty()) return;
  switch (lp->kind) {
    case LoopletKind::run:
      out.push_back({range, lp->body, pin});
      return;
    case LoopletKind::phase: {
      Lim s = lp->start ? std::max(range.start, eval(lp->start)) : range.start;
      Lim e = std::min(range.stop, eval(lp->stop));
      walk(lp->child, Iv{s, e}, pin || lp->pinpoint, eval, out);
      return;
    }
    case LoopletKind::sequence: {
      Lim cursor = range.start;
      for (const auto& ph : lp->children) {
        Lim stop = eval(ph->stop);
        Lim s = ph->start ? std::max(cursor, eval(ph->start)) : cursor;
        walk(ph->child, Iv{s, std::min(stop, range.stop)}, pin || ph->pinpoint, eval, out);
        cursor = std::max(cursor, add_eps(stop));
        if (range.stop < cursor) break;
      }
      return;
    }
    case LoopletKind::stepper: {
      auto p = static_cast<Pos>(eval(lp->seek(lit(range.start))).val);
      Lim cursor = range.start;
      while (cursor <= range.stop) {
        NodePtr pl = lit(static_cast<double>(p));
        Lim stop = eval(lp->step_stop(pl));
        walk(lp->step_body(pl), Iv{cursor, std::min(stop, range.stop)}, pin, eval, out);
        cursor = add_eps(stop);
        ++p;
      }
      return;
    }
    case LoopletKind::lookup:
      throw std::logic_error("walk_looplet: dense levels have no extent");
  }
}

}  // namespace

std::vector<WalkPiece> walk_looplet(const LoopletPtr& lp, const Iv& range,
                                    const std::function<Lim(const NodePtr&)>& eval) {
  std::vector<WalkPiece> out;
  walk(lp, range, false, eval, out);
  return out;
}

}  // namespace ct
