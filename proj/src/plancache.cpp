#include "optlab/plancache.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

namespace optlab {

const char* plan_level_name(PlanLevel level) {
  switch (level) {
    case PlanLevel::Base: return "base";
    case PlanLevel::Join: return "join";
    case PlanLevel::Block: return "block";
  }
  return "?";
}

uint64_t Signature::hash() const {
  uint64_t h = 0x706c616e63616368ULL;
  for (uint32_t oid : oids) h = hash_combine(h, oid);
  h = hash_combine(h, static_cast<uint64_t>(oids.size()));
  h = hash_combine(h, static_cast<uint32_t>(bloom_candidate_count));
  h = hash_combine(h, static_cast<uint32_t>(restriction_count));
  h = hash_combine(h, static_cast<uint32_t>(join_pred_count));
  h = hash_combine(h, static_cast<uint32_t>(lateral_rel_count));
  h = hash_combine(h, static_cast<uint32_t>(output_col_count));
  h = hash_combine(h, static_cast<uint32_t>(cec_count));
  h = hash_combine(h, static_cast<uint32_t>(subquery_count));
  return h;
}

Signature extract_signature(const RelContext& ctx) {
  Signature s;
  s.oids.reserve(ctx.rel_oids.size());
  for (const auto& [rti, oid] : ctx.rel_oids) s.oids.push_back(oid);
  std::sort(s.oids.begin(), s.oids.end());
  s.bloom_candidate_count = static_cast<int32_t>(ctx.blooms.size());
  s.restriction_count = static_cast<int32_t>(ctx.restrictions.size());
  s.join_pred_count = static_cast<int32_t>(ctx.join_preds.size());
  s.lateral_rel_count = ctx.lateral_rel_count;
  s.output_col_count = static_cast<int32_t>(ctx.output_cols.size());
  s.cec_count = static_cast<int32_t>(ctx.cecs.size());
  s.subquery_count = ctx.subquery_count;
  return s;
}

namespace {

std::vector<Predicate> clone_predicates(const std::vector<Predicate>& ps) {
  std::vector<Predicate> out;
  out.reserve(ps.size());
  for (const auto& p : ps) out.push_back(clone_predicate(p));
  return out;
}

RelContext snapshot_context(const RelContext& cur) {
  RelContext out;
  out.level = cur.level;
  out.relids = cur.relids;
  out.rel_oids = cur.rel_oids;
  out.restrictions = clone_predicates(cur.restrictions);
  out.join_preds = clone_predicates(cur.join_preds);
  out.output_cols = cur.output_cols;
  out.output_types = cur.output_types;
  out.blooms = cur.blooms;
  out.hints = cur.hints;
  for (const auto& j : cur.sjinfos) out.sjinfos.push_back(clone_sjinfo(j));
  out.cecs = cur.cecs;
  out.lateral_rel_count = cur.lateral_rel_count;
  out.subquery_count = cur.subquery_count;
  out.inlist_variant = cur.inlist_variant;
  return out;
}

// Rels outside the mapping are exterior to the set and keep their ids:
// they only ever participate in identity comparisons, never in reuse.
int mapped_rti(int rti, const IdMapping& m) {
  if (rti < 0 || static_cast<size_t>(rti) >= m.rel_map.size() || m.rel_map[rti] < 0) return rti;
  return m.rel_map[rti];
}

std::pair<int, int> translate_col(int rti, int col, const IdMapping& m) {
  if (rti < 0 || static_cast<size_t>(rti) >= m.rel_map.size() || m.rel_map[rti] < 0)
    return {rti, col};
  int ncol = col;
  if (static_cast<size_t>(rti) < m.col_maps.size() && !m.col_maps[rti].empty()) {
    const auto& cm = m.col_maps[rti];
    if (col < 0 || static_cast<size_t>(col) >= cm.size() || cm[col] < 0)
      throw PlanError("cache mapping gap for rel " + std::to_string(rti) + " column " +
                      std::to_string(col));
    ncol = cm[col];
  }
  return {m.rel_map[rti], ncol};
}

RelSet translate_set(RelSet s, const IdMapping& m) {
  RelSet out = 0;
  rel_set_foreach(s, [&](int rti) { out = rel_set_add(out, mapped_rti(rti, m)); });
  return out;
}

ExprPtr translated_clone(const Expr& e, const IdMapping& m) {
  auto c = clone_expr(e);
  translate_expr(*c, m.rel_map, m.col_maps);
  return c;
}

// Multiset bijection: rewrites reorder conjuncts, so order carries no meaning.
bool match_predicates(const std::vector<Predicate>& cached, const std::vector<Predicate>& cur,
                      const IdMapping& m) {
  if (cached.size() != cur.size()) return false;
  std::vector<bool> used(cur.size(), false);
  for (const auto& cp : cached) {
    auto translated = translated_clone(*cp.expr, m);
    bool found = false;
    for (size_t i = 0; i < cur.size(); ++i) {
      if (used[i]) continue;
      if (expr_equal(*translated, *cur[i].expr)) {
        used[i] = true;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

void translate_node(PathNode& n, const IdMapping& m) {
  bool subquery_boundary = n.op == PathOp::SubqueryScan && n.scan_rti >= 0;
  bool sublink_stage = n.op == PathOp::SubqueryScan && n.scan_rti < 0;

  n.relids = translate_set(n.relids, m);
  if (n.scan_rti >= 0) {
    n.scan_rti = mapped_rti(n.scan_rti, m);
    if (n.op == PathOp::SubqueryScan) n.label = "sub@" + std::to_string(n.scan_rti);
  }
  for (auto& k : n.ordering) {
    auto [nrti, ncol] = translate_col(k.rti, k.col, m);
    k.rti = nrti;
    k.col = ncol;
  }
  for (auto& id : n.blooms_applied) {
    if (id < 0 || static_cast<size_t>(id) >= m.bloom_map.size() || m.bloom_map[id] < 0)
      throw PlanError("cache mapping gap for bloom " + std::to_string(id));
    id = m.bloom_map[id];
  }
  std::sort(n.blooms_applied.begin(), n.blooms_applied.end());

  // Embedded child-block plans keep their own numbering; stop at them.
  if (subquery_boundary) return;
  if (sublink_stage) {
    if (!n.children.empty()) translate_node(*n.children[0], m);
    return;
  }
  for (auto& ch : n.children) translate_node(*ch, m);
}

void scale_costs(PathNode& n, double factor) {
  n.cost.startup *= factor;
  n.cost.total *= factor;
  for (auto& ch : n.children) scale_costs(*ch, factor);
}

bool has_duplicate_base_oid(const std::vector<std::pair<int, uint32_t>>& rel_oids) {
  std::vector<uint32_t> oids;
  for (const auto& [rti, oid] : rel_oids)
    if (oid != 0) oids.push_back(oid);
  std::sort(oids.begin(), oids.end());
  return std::adjacent_find(oids.begin(), oids.end()) != oids.end();
}

}  // namespace

std::optional<IdMapping> build_mapping(const CacheEntry& cached, const RelContext& cur,
                                       const QueryBlock* cur_block) {
  (void)cur_block;
  const RelContext& c = cached.ctx;
  if (c.rel_oids.size() != cur.rel_oids.size()) return std::nullopt;
  if (cached.subquery_snapshots.size() != cur.subquery_children.size()) return std::nullopt;

  // Self-join shapes make the oid bijection ambiguous; decline them.
  if (has_duplicate_base_oid(c.rel_oids) || has_duplicate_base_oid(cur.rel_oids))
    return std::nullopt;

  int max_rti = -1;
  for (const auto& [rti, oid] : c.rel_oids) max_rti = std::max(max_rti, rti);
  IdMapping m;
  m.rel_map.assign(static_cast<size_t>(max_rti + 1), -1);
  m.col_maps.assign(static_cast<size_t>(max_rti + 1), {});

  for (const auto& [crti, coid] : c.rel_oids) {
    if (coid == 0) continue;
    bool found = false;
    for (const auto& [rti, oid] : cur.rel_oids) {
      if (oid == coid) {
        m.rel_map[crti] = rti;
        found = true;
        break;
      }
    }
    if (!found) return std::nullopt;
  }

  // Subquery rels pair up by child-tree structure, targets permuted freely.
  std::vector<bool> used(cur.subquery_children.size(), false);
  for (size_t i = 0; i < cached.subquery_snapshots.size(); ++i) {
    int crti = cached.subquery_snapshot_rtis[i];
    bool found = false;
    for (size_t k = 0; k < cur.subquery_children.size(); ++k) {
      if (used[k]) continue;
      std::vector<int> out_map;
      if (block_equal_modulo_targets(*cached.subquery_snapshots[i], *cur.subquery_children[k].second,
                                     &out_map)) {
        used[k] = true;
        m.rel_map[crti] = cur.subquery_children[k].first;
        m.col_maps[crti] = std::move(out_map);
        found = true;
        break;
      }
    }
    if (!found) return std::nullopt;
  }

  RelSet mapped = 0;
  bool gap = false;
  rel_set_foreach(c.relids, [&](int rti) {
    if (static_cast<size_t>(rti) >= m.rel_map.size() || m.rel_map[rti] < 0) {
      gap = true;
      return;
    }
    mapped = rel_set_add(mapped, m.rel_map[rti]);
  });
  if (gap || mapped != cur.relids) return std::nullopt;
  return m;
}

bool full_match(const CacheEntry& cached, IdMapping& mapping, const RelContext& cur,
                const QueryBlock* cur_block) {
  const RelContext& c = cached.ctx;
  if (c.level != cur.level) return false;
  if (c.lateral_rel_count != cur.lateral_rel_count) return false;
  if (c.subquery_count != cur.subquery_count) return false;
  if (c.inlist_variant != cur.inlist_variant) return false;

  if (!match_predicates(c.restrictions, cur.restrictions, mapping)) return false;
  if (!match_predicates(c.join_preds, cur.join_preds, mapping)) return false;

  if (c.output_cols.size() != cur.output_cols.size()) return false;
  {
    using ColRow = std::tuple<int, int, DataType>;
    std::vector<ColRow> a, b;
    for (size_t i = 0; i < c.output_cols.size(); ++i) {
      auto [rti, col] = translate_col(c.output_cols[i].first, c.output_cols[i].second, mapping);
      a.emplace_back(rti, col, c.output_types[i]);
    }
    for (size_t i = 0; i < cur.output_cols.size(); ++i)
      b.emplace_back(cur.output_cols[i].first, cur.output_cols[i].second, cur.output_types[i]);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) return false;
  }

  if (c.blooms.size() != cur.blooms.size()) return false;
  {
    int max_id = -1;
    for (const auto& bc : c.blooms) max_id = std::max(max_id, bc.id);
    mapping.bloom_map.assign(static_cast<size_t>(max_id + 1), -1);
    std::vector<bool> used(cur.blooms.size(), false);
    for (const auto& bc : c.blooms) {
      auto [trti, tcol] = translate_col(bc.target_rti, bc.target_col, mapping);
      auto [srti, scol] = translate_col(bc.source_rti, bc.source_col, mapping);
      bool found = false;
      for (size_t i = 0; i < cur.blooms.size(); ++i) {
        if (used[i]) continue;
        const auto& ob = cur.blooms[i];
        if (ob.target_rti == trti && ob.target_col == tcol && ob.source_rti == srti &&
            ob.source_col == scol && ob.est_sel == bc.est_sel) {
          used[i] = true;
          mapping.bloom_map[bc.id] = ob.id;
          found = true;
          break;
        }
      }
      if (!found) return false;
    }
  }

  if (c.sjinfos.size() != cur.sjinfos.size()) return false;
  {
    std::vector<bool> used(cur.sjinfos.size(), false);
    for (const auto& cj : c.sjinfos) {
      bool interior = rel_set_subset(cj.min_left | cj.min_right, c.relids);
      RelSet tl = translate_set(cj.min_left & c.relids, mapping);
      RelSet tr = translate_set(cj.min_right & c.relids, mapping);
      bool found = false;
      for (size_t i = 0; i < cur.sjinfos.size(); ++i) {
        if (used[i]) continue;
        const auto& oj = cur.sjinfos[i];
        if (oj.type != cj.type) continue;
        bool o_interior = rel_set_subset(oj.min_left | oj.min_right, cur.relids);
        if (interior != o_interior) continue;
        if (interior) {
          if (translate_set(cj.min_left, mapping) != oj.min_left) continue;
          if (translate_set(cj.min_right, mapping) != oj.min_right) continue;
          if (!match_predicates(cj.quals, oj.quals, mapping)) continue;
        } else {
          // Exterior constraint: only its footprint inside the set matters;
          // legality above the set is re-checked by the planner.
          if (tl != (oj.min_left & cur.relids)) continue;
          if (tr != (oj.min_right & cur.relids)) continue;
        }
        used[i] = true;
        found = true;
        break;
      }
      if (!found) return false;
    }
  }

  if (c.hints.size() != cur.hints.size()) return false;
  {
    std::vector<bool> used(cur.hints.size(), false);
    for (const auto& ch : c.hints) {
      bool interior = rel_set_subset(ch.rels, c.relids);
      RelSet footprint = translate_set(ch.rels & c.relids, mapping);
      bool found = false;
      for (size_t i = 0; i < cur.hints.size(); ++i) {
        if (used[i]) continue;
        const auto& oh = cur.hints[i];
        if (oh.method != ch.method) continue;
        bool o_interior = rel_set_subset(oh.rels, cur.relids);
        if (interior != o_interior) continue;
        if (interior) {
          if (translate_set(ch.rels, mapping) != oh.rels) continue;
        } else {
          if (footprint != (oh.rels & cur.relids)) continue;
        }
        used[i] = true;
        found = true;
        break;
      }
      if (!found) return false;
    }
  }

  if (c.cecs.size() != cur.cecs.size()) return false;
  {
    std::vector<bool> used(cur.cecs.size(), false);
    for (const auto& cc : c.cecs) {
      std::vector<std::pair<int, int>> translated;
      translated.reserve(cc.size());
      for (const auto& [rti, col] : cc) translated.push_back(translate_col(rti, col, mapping));
      std::sort(translated.begin(), translated.end());
      bool found = false;
      for (size_t i = 0; i < cur.cecs.size(); ++i) {
        if (used[i]) continue;
        if (cur.cecs[i] == translated) {
          used[i] = true;
          found = true;
          break;
        }
      }
      if (!found) return false;
    }
  }

  if (c.level == PlanLevel::Block) {
    if (!cached.block_snapshot || !cur_block) return false;
    std::vector<int> out_map;
    if (!block_equal_modulo_targets(*cached.block_snapshot, *cur_block, &out_map)) return false;
    mapping.block_output_map = std::move(out_map);
  }
  return true;
}

std::vector<std::unique_ptr<PathNode>> translate_paths(const CacheEntry& cached,
                                                       const IdMapping& mapping) {
  std::vector<std::unique_ptr<PathNode>> out;
  out.reserve(cached.paths.size());
  for (const auto& p : cached.paths) {
    auto c = clone_path(*p);
    translate_node(*c, mapping);
    out.push_back(std::move(c));
  }
  return out;
}

LevelStats& CacheStats::at(PlanLevel level) {
  switch (level) {
    case PlanLevel::Base: return base;
    case PlanLevel::Join: return join;
    case PlanLevel::Block: return block;
  }
  return base;
}

const LevelStats& CacheStats::at(PlanLevel level) const {
  return const_cast<CacheStats*>(this)->at(level);
}

std::optional<PlanCache::Hit> PlanCache::lookup(const RelContext& cur, const QueryBlock* cur_block) {
  auto& ls = stats_.at(cur.level);
  ls.probes++;

  Signature sig = extract_signature(cur);
  std::vector<size_t> chain;
  auto it = buckets_.find(sig.hash());
  if (it != buckets_.end()) {
    for (size_t idx : it->second)
      if (entries_[idx]->sig == sig) chain.push_back(idx);
  }
  stats_.bucket_visits[static_cast<int>(chain.size())]++;
  if (chain.empty()) return std::nullopt;
  ls.signature_hits++;

  for (size_t idx : chain) {
    const CacheEntry& entry = *entries_[idx];
    auto mapping = build_mapping(entry, cur, cur_block);
    if (!mapping) continue;
    if (!full_match(entry, *mapping, cur, cur_block)) continue;
    ls.full_matches++;
    Hit hit;
    hit.paths = translate_paths(entry, *mapping);
    hit.est_rows = entry.est_rows;
    hit.width = entry.width;
    hit.block_output_map = mapping->block_output_map;
    return hit;
  }
  return std::nullopt;
}

void PlanCache::insert(const RelContext& cur, const QueryBlock* cur_block,
                       const std::vector<const PathNode*>& paths, double est_rows, int width) {
  Signature sig = extract_signature(cur);
  uint64_t h = sig.hash();
  auto it = buckets_.find(h);
  if (it != buckets_.end()) {
    for (size_t idx : it->second) {
      const CacheEntry& entry = *entries_[idx];
      if (!(entry.sig == sig)) continue;
      auto mapping = build_mapping(entry, cur, cur_block);
      if (mapping && full_match(entry, *mapping, cur, cur_block)) return;
    }
  }

  auto entry = std::make_unique<CacheEntry>();
  entry->sig = sig;
  entry->ctx = snapshot_context(cur);
  for (const auto& [rti, blk] : cur.subquery_children) {
    entry->subquery_snapshots.push_back(clone_block(*blk, nullptr));
    entry->subquery_snapshot_rtis.push_back(rti);
  }
  if (cur.level == PlanLevel::Block && cur_block)
    entry->block_snapshot = clone_block(*cur_block, nullptr);
  for (const PathNode* p : paths) {
    auto c = clone_path(*p);
    if (corrupt_) scale_costs(*c, 1.1);
    entry->paths.push_back(std::move(c));
  }
  entry->est_rows = est_rows;
  entry->width = width;
  entry->seq = next_seq_++;
  buckets_[h].push_back(entries_.size());
  entries_.push_back(std::move(entry));
  stats_.insertions++;
}

std::string PlanCache::report() const {
  std::ostringstream os;
  os << "plan cache: " << entries_.size() << " entries, " << stats_.insertions << " insertions\n";
  os << "level   probes  sig-hits  matches\n";
  const PlanLevel levels[] = {PlanLevel::Base, PlanLevel::Join, PlanLevel::Block};
  for (PlanLevel lvl : levels) {
    const LevelStats& ls = stats_.at(lvl);
    os << plan_level_name(lvl);
    for (size_t i = std::string(plan_level_name(lvl)).size(); i < 8; ++i) os << ' ';
    os << ls.probes << "  " << ls.signature_hits << "  " << ls.full_matches << "\n";
  }
  os << "chain-length visits:";
  for (const auto& [len, visits] : stats_.bucket_visits) os << " " << len << ":" << visits;
  os << "\n";
  return os.str();
}

}  // namespace optlab
