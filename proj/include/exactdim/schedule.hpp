#pragma once

#include <optional>
#include <string>
#include <vector>

#include "exactdim/power_product.hpp"
#include "exactdim/rational.hpp"
#include "exactdim/weights.hpp"

namespace exactdim::schedule {

enum class Mode { faithful, toy };

// Stage parameters. eps is kept symbolic: the faithful value
// 2^{-1/(w_1 wtilde_1)} R^{-(alpha(n^{(d)}+1)-n)} is irrational whenever its
// exponents are.
struct LevelParams {
  Int n;
  std::vector<Int> n_i;  // non-decreasing with the axis index
  PowerProduct eps;
  Rat c;
};

// Toy-mode replacements. n is mandatory (one entry per stage); the other
// per-stage vectors are all-or-nothing and fall back to the faithful
// formulas evaluated on the overridden base quantities.
struct ToyOverrides {
  std::optional<Rat> R;
  std::optional<Int> xi;
  std::optional<Vec> rho0;
  std::optional<Rat> eps0;
  std::vector<Int> n;
  std::vector<std::vector<Int>> n_ki;
  Vec eps_k;
  Vec c_k;
  std::optional<Rat> eps_L7;
  std::optional<Rat> eta;
};

struct ParameterSchedule {
  std::size_t d = 0;
  weights::WeightVector w;
  Rat tau;
  Rat delta;
  weights::AuxiliaryWeights aux;
  Rat R;
  Int xi;
  Rat xi0;
  Rat alpha;        // max_i tau*w_i/wtilde_i
  Rat alpha_prime;  // min{w_k - w_1 : w_k != w_1}, or 1
  PowerProduct eps0;
  std::vector<PowerProduct> rho0;   // per-axis base scale R^{-(1+wtilde_i)}/(d+1)!
  std::vector<PowerProduct> rho_i;  // per-axis subdivision ratio R^{1+wtilde_i}
  Int rho;                          // prod_i floor(R^{1+wtilde_i})
  Rat eps_L7;                       // smoothing constant for the counting displays
  std::optional<Rat> eta;
  std::vector<LevelParams> levels;  // levels[k-1] holds the stage-k record
  Mode mode = Mode::faithful;

  // eps_{k-1}, with eps0 standing in for k = 1. k is 1-based.
  const PowerProduct& eps_before(std::size_t k) const;
};

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string margin;
};

// One row per verified inequality. Verdicts are exact; margins are printable
// summaries (exact ratio when short, log2 enclosure otherwise).
struct ScheduleReport {
  std::vector<CheckResult> checks;
  bool all_pass = true;

  const CheckResult* find(const std::string& name) const;
  // Missing rows count as failed so downstream gating stays conservative.
  bool ok(const std::string& name) const;
};

// Largest integer m with m <= c0 + c1*log_base(X). Exact: the candidate from
// a log2 enclosure is corrected by power-cleared comparisons. Requires
// base > 1, c1 > 0, X > 0.
Int floor_affine_log(const Rat& c0, const Rat& c1, const Rat& base, const PowerProduct& X);

// Constants that depend only on (w, tau, delta): auxiliary weights, alpha,
// alpha', xi, the minimal power-of-two scale base R, eps0, and the per-axis
// scale family. Throws ConfigError when delta is inadmissible.
ParameterSchedule base_constants(const weights::WeightVector& w, const Rat& tau, const Rat& delta);

// Extends base with k_max stage records. Faithful mode derives every value
// from the recurrences (doubling R when no smoothing constant fits); toy
// mode installs the overrides and leaves their validity to verify_schedule.
ParameterSchedule build_schedule(const ParameterSchedule& base, int k_max, Mode mode,
                                 const ToyOverrides& toy = {});

// Re-checks every recorded constraint: base-constant formulas, the stage
// ordering chain, the defining recurrences, and the wave/volume/counting
// inequalities. Never throws on a bad schedule; failures become rows.
ScheduleReport verify_schedule(const ParameterSchedule& s);

}  // namespace exactdim::schedule
