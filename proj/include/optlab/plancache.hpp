#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "optlab/plan.hpp"

namespace optlab {

enum class PlanLevel { Base, Join, Block };

const char* plan_level_name(PlanLevel level);

// One direction of an equi-join edge whose source side is small enough to
// prefilter the target scan.
struct BloomCandidate {
  int id = 0;
  int target_rti = -1;
  int source_rti = -1;
  int target_col = -1;
  int source_col = -1;
  double est_sel = 1.0;
};

// Everything that determines the plan of one rel set, captured before
// planning. Cache entries snapshot it; probes build it from live blocks.
struct RelContext {
  PlanLevel level = PlanLevel::Base;
  RelSet relids = 0;
  std::vector<std::pair<int, uint32_t>> rel_oids;  // (rti, oid); oid 0 = subquery rel

  std::vector<Predicate> restrictions;  // single-rel quals on rels in the set
  std::vector<Predicate> join_preds;    // multi-rel quals fully inside the set
  std::vector<std::pair<int, int>> output_cols;  // sorted (rti, col)
  std::vector<DataType> output_types;            // parallel to output_cols
  std::vector<BloomCandidate> blooms;            // candidates targeting the set
  std::vector<HintSpec> hints;                   // hints whose rels intersect the set
  std::vector<SpecialJoinInfo> sjinfos;          // sjinfos whose min sets intersect the set
  std::vector<std::vector<std::pair<int, int>>> cecs;  // restricted members, >=2 per class
  int lateral_rel_count = 0;
  int subquery_count = 0;
  bool inlist_variant = false;

  // Live child blocks for subquery rels in the set, (rti, block). Cache
  // entries own deep clones instead (subquery_snapshots).
  std::vector<std::pair<int, const QueryBlock*>> subquery_children;
};

// Hash-bucket key: cheap structural summary, invariant to range-table
// renumbering.
struct Signature {
  std::vector<uint32_t> oids;  // sorted; 0 stands for a subquery rel
  int32_t bloom_candidate_count = 0;
  int32_t restriction_count = 0;
  int32_t join_pred_count = 0;
  int32_t lateral_rel_count = 0;
  int32_t output_col_count = 0;
  int32_t cec_count = 0;
  int32_t subquery_count = 0;

  bool operator==(const Signature& o) const = default;
  uint64_t hash() const;
};

Signature extract_signature(const RelContext& ctx);

// Rel and column correspondence between a cached context and the current
// one. col_maps is indexed by cached rti; empty vector = identity.
struct IdMapping {
  std::vector<int> rel_map;
  std::vector<std::vector<int>> col_maps;
  std::vector<int> bloom_map;        // cached bloom id -> current bloom id
  std::vector<int> block_output_map; // block level: cached target -> current target
};

struct CacheEntry {
  Signature sig;
  RelContext ctx;  // owned snapshot; subquery_children left empty
  std::vector<std::unique_ptr<QueryBlock>> subquery_snapshots;  // parallel to ctx rel order
  std::vector<int> subquery_snapshot_rtis;
  std::unique_ptr<QueryBlock> block_snapshot;  // Block level only
  std::vector<std::unique_ptr<PathNode>> paths;
  double est_rows = 0.0;
  int width = 0;
  uint64_t seq = 0;
};

// Oid-driven rel bijection from the cached context onto the current one.
// Declines self-joins (duplicate oids) and unmatched subquery children.
std::optional<IdMapping> build_mapping(const CacheEntry& cached, const RelContext& cur,
                                       const QueryBlock* cur_block);

// Validates that the cached context, translated through the mapping, is
// identical to the current one; fills mapping.bloom_map on success.
bool full_match(const CacheEntry& cached, IdMapping& mapping, const RelContext& cur,
                const QueryBlock* cur_block);

std::vector<std::unique_ptr<PathNode>> translate_paths(const CacheEntry& cached,
                                                       const IdMapping& mapping);

struct LevelStats {
  int64_t probes = 0;
  int64_t signature_hits = 0;
  int64_t full_matches = 0;
};

struct CacheStats {
  LevelStats base, join, block;
  std::map<int, int64_t> bucket_visits;  // same-signature chain length -> probe visits
  int64_t insertions = 0;

  LevelStats& at(PlanLevel level);
  const LevelStats& at(PlanLevel level) const;
};

class PlanCache {
 public:
  struct Hit {
    std::vector<std::unique_ptr<PathNode>> paths;
    double est_rows = 0.0;
    int width = 0;
    std::vector<int> block_output_map;
  };

  // Probes, matches, translates. cur_block is required for Block level.
  std::optional<Hit> lookup(const RelContext& cur, const QueryBlock* cur_block);

  // Snapshots the context and plans. No-op when an equivalent entry exists.
  void insert(const RelContext& cur, const QueryBlock* cur_block,
              const std::vector<const PathNode*>& paths, double est_rows, int width);

  const CacheStats& stats() const { return stats_; }
  size_t entry_count() const { return entries_.size(); }

  // Cache hit report: per-level probe/hit/match counts plus the visit
  // histogram over same-signature chain lengths.
  std::string report() const;

  // Fault injection for verification tests: perturbs costs stored with
  // every subsequently inserted entry.
  void set_corrupt_inserted_costs(bool v) { corrupt_ = v; }

 private:
  std::vector<std::unique_ptr<CacheEntry>> entries_;
  std::unordered_map<uint64_t, std::vector<size_t>> buckets_;
  CacheStats stats_;
  uint64_t next_seq_ = 0;
  bool corrupt_ = false;
};

}  // namespace optlab
