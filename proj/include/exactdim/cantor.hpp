#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "exactdim/geometry.hpp"
#include "exactdim/rational.hpp"
#include "exactdim/schedule.hpp"

// Materializes the nested box family driven by a toy parameter schedule and
// re-checks, from the stored tree alone, the properties the construction is
// supposed to deliver: side-length laws, the distinguished rational per
// stage, the clearance of rational zones between stages, and the per-level
// counting and measure bounds.
//
// Faithful schedules have stage depths far beyond anything that can be
// stored, so build_tree accepts toy mode only. All boxes are half-open
// [lo, hi) and all bookkeeping is exact rational arithmetic; checks that
// need x^{1/u} style comparisons clear denominators instead of evaluating
// roots.

namespace exactdim::cantor {

enum class CaseTag { root, case1, case2, case3, case4 };

const char* case_name(CaseTag t);

// Distinguished rational p/q attached to a stage, together with the exact
// point y placed at per-axis distance c/q^{1+tau w_i} from it. Carried by
// the single-child chain from level n_k+1 to level n_k^{(d)}.
struct Approximation {
  std::vector<Int> p;
  Int q;
  Vec y;
  Rat c;
};

struct CantorNode {
  long level = 0;
  Box box;
  Rat mu;                       // exact mass, sums to 1 across each level
  CaseTag tag = CaseTag::root;
  int k = 0;                    // stage whose rule produced this node
  std::size_t parent = 0;       // index into the previous level
  std::vector<long> grid_idx;   // per-axis cell index in the parent grid; -1 = flush against the upper face
  std::optional<Approximation> approx;
};

// Fine-grid cells (side exponent xi*n_k^{(d)}) that meet the removal zones
// assembled midway through stage k. Recorded when level n_k^{(d)}+1 is
// built and consumed by the threshold removals up to level xi*n_k^{(d)}.
struct DangerRegion {
  int k = 1;
  std::vector<Box> boxes;
  std::vector<std::string> notes;
};

struct LevelSummary {
  std::size_t level = 0;
  CaseTag tag = CaseTag::root;
  std::size_t boxes = 0;
  std::size_t removed_plane = 0;   // cells cut by the thickened-zone sweep
  std::size_t removed_danger = 0;  // cells cut by the danger-count threshold
  std::size_t fallback_nodes = 0;  // parents whose zone sweep had no spanning plane
  Rat mu_min;
  Rat mu_max;
};

// Deliberate corruption hooks for negative controls. skip_danger_removal
// drops every danger-count removal of the build; skip_plane_removal_at_level
// keeps all cells at one level that the zone sweep would have cut.
enum class Sabotage { none, skip_danger_removal, skip_plane_removal_at_level };

struct BuildOptions {
  long depth = 0;
  bool uniform_branching = false;  // prune every parent to the level minimum so mass is uniform
  Sabotage sabotage = Sabotage::none;
  std::size_t sabotage_level = 0;
  Budget* budget = nullptr;        // optional shared work meter
};

struct CantorTree {
  schedule::ParameterSchedule sched;
  schedule::ScheduleReport schedule_report;  // gates: which verdicts are binding
  BuildOptions options;
  std::vector<std::vector<CantorNode>> levels;
  std::vector<DangerRegion> danger;
  std::vector<LevelSummary> summary;
  // children each parent kept before any uniform-branching prune, [level][parent]
  std::vector<std::vector<std::size_t>> raw_child_counts;
  std::vector<std::string> anomalies;

  long depth() const { return levels.empty() ? -1 : static_cast<long>(levels.size()) - 1; }
};

struct Regime {
  CaseTag tag;
  int k;  // stage index; 0 for the run of plain subdivisions before stage 1
};

// Which refinement rule governs level l >= 1 and under which stage. Levels
// beyond the steering horizon have no rule and raise ConfigError.
Regime level_regime(const schedule::ParameterSchedule& s, long l);

// Last level the schedule can steer: xi * n_{k_max}^{(d)}.
long schedule_horizon(const schedule::ParameterSchedule& s);

// Level-0 family: the unit cube subdivided from the origin corner into
// cells of the stage-0 side vector, remainder discarded, uniform mass.
std::vector<CantorNode> init_level0(const schedule::ParameterSchedule& s);

// count >= base^{expo} decided by clearing the rational exponent, expo >= 0.
bool count_meets_threshold(const Int& count, const Int& base, const Rat& expo);

struct RefineResult {
  std::vector<CantorNode> children;  // level/tag/k/box/grid_idx/approx set; parent and mu set by the caller
  std::size_t removed_plane = 0;
  std::size_t removed_danger = 0;
  bool fallback = false;  // zone sweep had no spanning plane, removal used per-point zones
  std::vector<std::string> notes;
};

// Full grid of tail-law cells minus those meeting the thickened zone sweep
// of the band [R^{l-1}, R^l).
RefineResult refine_case1(const schedule::ParameterSchedule& s, const CantorNode& E, long l,
                          int k, bool skip_plane, Budget& budget);

// Single child: at l = n_k+1 places the distinguished rational and the point
// y, afterwards shrinks the grid cell around the stored y.
RefineResult refine_case2(const schedule::ParameterSchedule& s, const CantorNode& E, long l,
                          int k, Budget& budget);

// Fine-grid cells of E meeting any thickened zone of the mid-stage sweep,
// assembled over the bands n in [n_k^{(1)}, n_k^{(d)}+1].
DangerRegion build_danger_region(const schedule::ParameterSchedule& s, const Box& E, int k,
                                 Budget& budget);

// First post-stage grid minus cells holding at least the threshold count of
// danger-marked fine cells.
RefineResult refine_case3(const schedule::ParameterSchedule& s, const CantorNode& E, int k,
                          const DangerRegion& danger, bool skip_danger, Budget& budget);

// Zone sweep removal plus the danger-count threshold removal; at the stage
// horizon asserts the survivors are clear of every danger-marked cell.
RefineResult refine_case4(const schedule::ParameterSchedule& s, const CantorNode& E, long l,
                          int k, const DangerRegion& danger, bool skip_plane, bool skip_danger,
                          Budget& budget);

CantorTree build_tree(const schedule::ParameterSchedule& s, const BuildOptions& opt);

struct VerifyRow {
  std::string name;
  bool pass = false;
  bool diagnostic = false;  // a gating premise failed; reported but not binding
  std::string witness;      // concrete (s, r) or node on failure, margin note otherwise
};

struct VerdictReport {
  std::vector<VerifyRow> rows;
  bool all_pass = true;  // over binding rows only

  const VerifyRow* find(const std::string& name) const;
  bool ok(const std::string& name) const;
};

// Structural invariants: nesting, pairwise disjointness, the per-level side
// laws, grid index consistency and exact mass bookkeeping.
VerdictReport verify_structure(const CantorTree& t);

// Pointwise properties on levels 0..level: the distinguished-rational
// bracket at each stage floor, zone clearance in the tail bands, the
// threshold clearance at the stage horizon, and the stage-transition
// clearance. Interval tests certify every point of every box; when a test
// fails, up to samples_per_box exact interior points are attached to the
// witness.
VerdictReport verify_pointwise(const CantorTree& t, long level, int samples_per_box);

// Per-case child-count lower bounds, aggregated level counts, and for each
// trial box the exact intersection count against the product bound plus the
// mass bound. Trial boxes must be hypercubes inside [0,1)^d.
VerdictReport verify_counts(const CantorTree& t, const std::vector<Box>& trial_boxes);

// Center of a deepest-level box drawn with probability mu. Deterministic in
// (tree, seed).
Vec sample_point(const CantorTree& t, std::uint64_t seed);

std::string level_summary_csv(const CantorTree& t);

}  // namespace exactdim::cantor
