// Batch front end: compute dimensions, build schedules and toy trees, run
// the verification suites, and emit JSON/CSV for tables and plots.
//
// Exit codes: 0 all checks pass, 1 a check failed (report still emitted),
// 2 usage or configuration error. Identical flags, config, and seed give
// byte-identical output.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "exactdim/analysis.hpp"
#include "exactdim/cantor.hpp"
#include "exactdim/json_io.hpp"
#include "exactdim/rational.hpp"
#include "exactdim/schedule.hpp"
#include "exactdim/weights.hpp"

using namespace exactdim;
using io::ojson;

namespace {

Int parse_int(const std::string& s) {
  try {
    return Int(s);
  } catch (const std::invalid_argument&) {
    throw ConfigError("malformed integer '" + s + "'");
  }
}

std::vector<Int> parse_int_list(const std::string& s) {
  std::vector<Int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_int(item));
  if (out.empty()) throw ConfigError("empty integer list");
  return out;
}

// rows separated by ';', entries by ','
std::vector<std::vector<Int>> parse_int_rows(const std::string& s) {
  std::vector<std::vector<Int>> rows;
  std::stringstream ss(s);
  std::string row;
  while (std::getline(ss, row, ';')) rows.push_back(parse_int_list(row));
  return rows;
}

Vec parse_rat_semilist(const std::string& s) {
  Vec out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';')) out.push_back(parse_rat(item));
  return out;
}

void emit(const ojson& doc, const std::string& out_path) {
  std::string text = io::dump(doc);
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path);
  if (!f) throw ConfigError("cannot write '" + out_path + "'");
  f << text;
}

void write_text(const std::string& text, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << text;
}

ojson rows_json(const std::vector<cantor::VerifyRow>& rows) {
  ojson a = ojson::array();
  for (const auto& r : rows) {
    ojson j;
    j["name"] = r.name;
    j["pass"] = r.pass;
    j["diagnostic"] = r.diagnostic;
    j["witness"] = r.witness;
    a.push_back(j);
  }
  return a;
}

ojson checks_json(const schedule::ScheduleReport& rep) {
  ojson a = ojson::array();
  for (const auto& c : rep.checks) {
    ojson j;
    j["name"] = c.name;
    j["pass"] = c.pass;
    j["margin"] = c.margin;
    a.push_back(j);
  }
  return a;
}

ojson vec_json(const Vec& v) {
  ojson a = ojson::array();
  for (const Rat& x : v) a.push_back(rat_str(x));
  return a;
}

cantor::CantorTree load_tree(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read '" + path + "'");
  ojson doc;
  try {
    doc = ojson::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
  return io::tree_from_json(doc);
}

// Shared flag bundle for commands that assemble a schedule.
struct ScheduleFlags {
  std::string w;
  std::string tau;
  std::string delta;
  long k_max = 0;  // 0 = infer (toy: one per stage row, faithful: 1)
  bool faithful = false;
  bool toy = false;
  std::string R, xi, rho0, eps0, n, n_ki, eps_k, c_k, eps_L7, eta;

  void add_base(CLI::App* cmd) {
    cmd->add_option("-w,--weights", w, "weights, ascending positive rationals summing to 1, e.g. 1/3,2/3")
        ->required();
    cmd->add_option("--tau", tau, "approximation exponent, rational > 1")->required();
    cmd->add_option("--delta", delta, "auxiliary-weight perturbation, rational")->required();
  }
  void add_mode(CLI::App* cmd, bool allow_faithful) {
    if (allow_faithful) {
      cmd->add_flag("--faithful", faithful, "derive every stage from the recurrences");
      cmd->add_flag("--toy", toy, "install explicit stage overrides");
    } else {
      toy = true;
    }
    cmd->add_option("-k,--k-max", k_max, "number of stages (toy default: one per --n entry)");
    cmd->add_option("--base-scale,--R", R, "scale base R, rational > 1");
    cmd->add_option("--xi", xi, "horizon multiplier, integer");
    cmd->add_option("--rho0", rho0, "per-axis level-0 sides, rationals");
    cmd->add_option("--eps0", eps0, "base zone width, rational");
    cmd->add_option("--n", n, "stage start levels, integers, e.g. 1,8");
    cmd->add_option("--n-ki", n_ki, "per-stage axis levels, rows ';'-separated, e.g. 3,3;9,12");
    cmd->add_option("--eps-k", eps_k, "per-stage zone widths, rationals ';'-separated");
    cmd->add_option("--c-k", c_k, "per-stage offset constants, rationals, e.g. 7/8,7/8");
    cmd->add_option("--eps-smoothing", eps_L7, "smoothing constant for the counting displays");
    cmd->add_option("--eta", eta, "counting exponent, rational in (0,1)");
  }

  schedule::ParameterSchedule build() const {
    if (faithful && toy) throw ConfigError("choose one of --faithful / --toy");
    weights::WeightVector wv = weights::validate_weights(parse_rat_list(w));
    schedule::ParameterSchedule base =
        schedule::base_constants(wv, parse_rat(tau), parse_rat(delta));
    if (faithful) {
      for (const std::string* s : {&R, &xi, &rho0, &eps0, &n, &n_ki, &eps_k, &c_k, &eps_L7, &eta})
        if (!s->empty()) throw ConfigError("stage overrides require --toy");
      return schedule::build_schedule(base, k_max > 0 ? k_max : 1, schedule::Mode::faithful);
    }
    schedule::ToyOverrides ov;
    if (!R.empty()) ov.R = parse_rat(R);
    if (!xi.empty()) ov.xi = parse_int(xi);
    if (!rho0.empty()) ov.rho0 = parse_rat_list(rho0);
    if (!eps0.empty()) ov.eps0 = parse_rat(eps0);
    if (n.empty()) throw ConfigError("--toy needs the stage start levels --n");
    ov.n = parse_int_list(n);
    if (!n_ki.empty()) ov.n_ki = parse_int_rows(n_ki);
    if (!eps_k.empty()) ov.eps_k = parse_rat_semilist(eps_k);
    if (!c_k.empty()) ov.c_k = parse_rat_list(c_k);
    if (!eps_L7.empty()) ov.eps_L7 = parse_rat(eps_L7);
    if (!eta.empty()) ov.eta = parse_rat(eta);
    long k = k_max > 0 ? k_max : static_cast<long>(ov.n.size());
    if (k != static_cast<long>(ov.n.size()))
      throw ConfigError("--k-max disagrees with the --n stage count");
    return schedule::build_schedule(base, k, schedule::Mode::toy, ov);
  }
};

// Hypercubes inside the unit cube, centered on sampled tree points, with
// dyadic sides. Deterministic in (tree, seed).
std::vector<Box> unit_trial_boxes(const cantor::CantorTree& t, std::size_t count,
                                  std::uint64_t seed) {
  std::vector<Box> out;
  for (std::size_t i = 0; i < count; ++i) {
    Vec c = cantor::sample_point(t, seed + i);
    Rat side = rat_pow(frac(1, 2), 2 + static_cast<long>(i % 6));
    Box b;
    for (std::size_t ax = 0; ax < c.size(); ++ax) {
      Rat lo = c[ax] - side / 2;
      if (lo < 0) lo = Rat(0);
      if (lo + side > 1) lo = Rat(1 - side);
      b.lo.push_back(lo);
      b.hi.push_back(Rat(lo + side));
    }
    out.push_back(std::move(b));
  }
  return out;
}

// Trial boxes whose sides resolve inside the tree's steered scales: sides
// are probed from per-level box sides, centers are sampled tree points.
std::vector<Box> resolved_trial_boxes(const cantor::CantorTree& t, std::size_t count,
                                      std::uint64_t seed) {
  Vec sides;
  for (long m = 1; m <= t.depth(); ++m) {
    const Box& probe_src = t.levels[static_cast<std::size_t>(m)][0].box;
    Rat side = probe_src.side(0);
    for (std::size_t ax = 1; ax < t.sched.d; ++ax)
      if (probe_src.side(ax) > side) side = probe_src.side(ax);
    Box probe;
    for (std::size_t ax = 0; ax < t.sched.d; ++ax) {
      probe.lo.push_back(Rat(0));
      probe.hi.push_back(side);
    }
    try {
      analysis::local_dimension(t, {probe});
    } catch (const ConfigError&) {
      continue;
    }
    sides.push_back(side);
  }
  if (sides.empty())
    throw ConfigError("tree too shallow: no level side resolves to a steered stage");
  std::vector<Box> out;
  for (std::size_t i = 0; i < count; ++i) {
    const Rat& side = sides[i % sides.size()];
    Vec c = cantor::sample_point(t, seed + i);
    Box b;
    for (std::size_t ax = 0; ax < c.size(); ++ax) {
      b.lo.push_back(Rat(c[ax] - side / 2));
      b.hi.push_back(Rat(c[ax] + side / 2));
    }
    out.push_back(std::move(b));
  }
  return out;
}

int cmd_dim(const std::string& w, const std::string& tau, const std::string& delta, long d_flag,
            const std::string& out) {
  weights::WeightVector wv = weights::validate_weights(parse_rat_list(w));
  if (d_flag > 0 && static_cast<std::size_t>(d_flag) != wv.dim())
    throw ConfigError("-d disagrees with the number of weights");
  Rat t = parse_rat(tau);
  weights::DimensionReport rep = weights::rynne_dimension(wv, t);

  ojson doc;
  doc["schema"] = io::kSchema;
  doc["command"] = "dim";
  doc["value"] = rat_str(rep.value);
  doc["value_approx"] = rep.value.get_d();
  doc["argmin_k"] = rep.argmin_k;
  doc["per_k"] = vec_json(rep.per_k);

  bool ok = true;
  if (!delta.empty()) {
    Rat dl = parse_rat(delta);
    weights::LowerBoundReport lb = weights::final_lower_bound(wv, t, dl);
    weights::AuxiliaryWeights aux = weights::auxiliary_weights(wv, t, dl);
    analysis::ProfileMinimum pm = analysis::prop_min(analysis::make_profile(wv.w, aux.wtilde, t));
    ojson l;
    l["value"] = rat_str(lb.value);
    l["value_approx"] = lb.value.get_d();
    l["argmin_h"] = lb.argmin_h;
    l["argmin_k"] = lb.argmin_k;
    l["k_exceeds_K"] = lb.k_exceeds_K;
    l["slack"] = rat_str(lb.slack);
    doc["delta"] = rat_str(dl);
    doc["lower_bound"] = l;
    ojson p;
    p["value"] = rat_str(pm.value);
    p["argmin_k"] = pm.argmin_k;
    p["x_star"] = rat_str(pm.x_star);
    doc["profile_min"] = p;
    ok = pm.value == lb.value && rat_abs(rep.value - lb.value) <= lb.slack;
    doc["consistent"] = ok;
  }
  emit(doc, out);
  return ok ? 0 : 1;
}

int cmd_aux(const std::string& w, const std::string& tau, const std::string& delta,
            const std::string& out) {
  weights::WeightVector wv = weights::validate_weights(parse_rat_list(w));
  weights::AuxiliaryWeights aux = weights::auxiliary_weights(wv, parse_rat(tau), parse_rat(delta));
  ojson doc;
  doc["schema"] = io::kSchema;
  doc["command"] = "aux";
  doc["K"] = aux.K;
  doc["wtilde"] = vec_json(aux.wtilde);
  doc["delta"] = rat_str(aux.delta);
  doc["delta0"] = rat_str(aux.delta0);
  emit(doc, out);
  return 0;
}

int cmd_schedule(const ScheduleFlags& sf, const std::string& out) {
  schedule::ParameterSchedule s = sf.build();
  schedule::ScheduleReport rep = schedule::verify_schedule(s);
  ojson doc;
  doc["schema"] = io::kSchema;
  doc["command"] = "schedule";
  doc["mode"] = s.mode == schedule::Mode::toy ? "toy" : "faithful";
  doc["all_pass"] = rep.all_pass;
  doc["checks"] = checks_json(rep);
  doc["schedule"] = io::schedule_json(s);
  emit(doc, out);
  return rep.all_pass ? 0 : 1;
}

int cmd_build(const ScheduleFlags& sf, long depth, bool nonuniform, const std::string& sabotage,
              std::size_t sabotage_level, long max_work, const std::string& out,
              const std::string& csv) {
  schedule::ParameterSchedule s = sf.build();
  cantor::BuildOptions opt;
  opt.depth = depth;
  opt.uniform_branching = !nonuniform;
  if (sabotage == "none")
    opt.sabotage = cantor::Sabotage::none;
  else if (sabotage == "skip_danger_removal")
    opt.sabotage = cantor::Sabotage::skip_danger_removal;
  else if (sabotage == "skip_plane_removal_at_level")
    opt.sabotage = cantor::Sabotage::skip_plane_removal_at_level;
  else
    throw ConfigError("unknown removal override '" + sabotage + "'");
  opt.sabotage_level = sabotage_level;
  if (max_work <= 0) throw ConfigError("--max-work must be positive");
  Budget budget;
  budget.limit = static_cast<std::size_t>(max_work);
  opt.budget = &budget;

  cantor::CantorTree t = cantor::build_tree(s, opt);
  if (!csv.empty()) write_text(cantor::level_summary_csv(t), csv);
  emit(io::tree_json(t), out);
  return 0;
}

int cmd_verify(const std::string& in, int samples, std::size_t trial_boxes, std::uint64_t seed,
               const std::string& out) {
  cantor::CantorTree t = load_tree(in);
  cantor::VerdictReport structure = cantor::verify_structure(t);
  cantor::VerdictReport pointwise = cantor::verify_pointwise(t, t.depth(), samples);
  cantor::VerdictReport counts = cantor::verify_counts(t, unit_trial_boxes(t, trial_boxes, seed));
  bool all_pass = structure.all_pass && pointwise.all_pass && counts.all_pass;

  ojson doc;
  doc["schema"] = io::kSchema;
  doc["command"] = "verify";
  doc["all_pass"] = all_pass;
  doc["schedule_all_pass"] = t.schedule_report.all_pass;  // informational gate state
  doc["anomalies"] = t.anomalies;
  doc["structure"] = rows_json(structure.rows);
  doc["pointwise"] = rows_json(pointwise.rows);
  doc["counts"] = rows_json(counts.rows);
  emit(doc, out);
  return all_pass ? 0 : 1;
}

int cmd_analyze(const std::string& in, std::size_t trial_boxes, std::uint64_t seed,
                std::size_t points, const std::string& scales, const std::string& csv,
                const std::string& out) {
  cantor::CantorTree t = load_tree(in);
  analysis::LocalDimReport rep =
      analysis::local_dimension(t, resolved_trial_boxes(t, trial_boxes, seed));
  if (!csv.empty()) write_text(analysis::local_dimension_csv(rep), csv);

  std::vector<Vec> pts;
  pts.reserve(points);
  for (std::size_t i = 0; i < points; ++i)
    pts.push_back(cantor::sample_point(t, seed + 1000003 * (i + 1)));
  Vec sc = parse_rat_list(scales);
  double slope = analysis::box_counting(pts, sc);

  ojson doc;
  doc["schema"] = io::kSchema;
  doc["command"] = "analyze";
  ojson local;
  local["aggregate_min_approx"] = rep.aggregate_min;
  ojson records = ojson::array();
  for (const auto& r : rep.records) {
    ojson j;
    j["box_id"] = r.box_id;
    j["side"] = rat_str(r.side);
    j["n"] = r.n.get_str();
    j["n_B"] = r.n_B.get_str();
    j["mu_bound"] = rat_str(r.mu_bound);
    j["log_ell_mu_approx"] = r.log_ell_mu;
    j["f_main_approx"] = r.f_main_term;
    j["residual_approx"] = r.residual;
    records.push_back(j);
  }
  local["records"] = records;
  doc["local"] = local;
  ojson bc;
  bc["points"] = points;
  bc["scales"] = vec_json(sc);
  bc["slope_approx"] = slope;
  doc["box_counting"] = bc;
  emit(doc, out);
  return 0;
}

int cmd_approx(const std::string& xs, const std::string& ws, const std::string& tau,
               const std::string& c, long q_max, const std::string& out) {
  Vec x = parse_rat_list(xs);
  weights::WeightVector wv = weights::validate_weights(parse_rat_list(ws));
  if (x.size() != wv.dim()) throw ConfigError("point and weights disagree in dimension");
  for (const Rat& xi : x)
    if (xi < 0 || xi >= 1) throw ConfigError("point coordinates must lie in [0,1)");
  Rat tr = parse_rat(tau);
  if (tr <= 1) throw ConfigError("--tau must exceed 1");
  Rat cr = parse_rat(c);
  if (cr <= 0) throw ConfigError("-c must be positive");
  if (q_max < 1) throw ConfigError("--q-max must be at least 1");

  // |q x_i - p_i|^{1/w_i} < c q^{-tau} on every axis, exponents cleared to
  // integers: |r|^{td wd_i} q^{tn wn_i} < c^{wn_i td} with tau = tn/td,
  // w_i = wn_i/wd_i. The nearest integer p_i is the optimal witness.
  auto small_part = [](const Int& v) {
    if (v > 1000) throw ConfigError("approx scan needs tau and weight parts at most 1000");
    return static_cast<unsigned long>(v.get_ui());
  };
  const unsigned long tn = small_part(Int(tr.get_num()));
  const unsigned long td = small_part(Int(tr.get_den()));
  ojson hits = ojson::array();
  long hit_count = 0;
  for (long q = 1; q <= q_max; ++q) {
    std::vector<Int> p(x.size());
    bool hit = true;
    Rat worst_margin;  // max over axes of lhs/rhs, exact
    bool first = true;
    for (std::size_t i = 0; i < x.size() && hit; ++i) {
      Rat r = Rat(q) * x[i];
      p[i] = nearest_int(r);
      r = rat_abs(Rat(r - Rat(p[i])));
      const unsigned long wn = small_part(Int(wv.w[i].get_num()));
      const unsigned long wd = small_part(Int(wv.w[i].get_den()));
      Rat lhs = rat_pow(r, static_cast<long>(td * wd)) *
                rat_pow(Rat(q), static_cast<long>(tn * wn));
      Rat rhs = rat_pow(cr, static_cast<long>(wn * td));
      hit = lhs < rhs;
      Rat margin = lhs / rhs;
      if (first || margin > worst_margin) worst_margin = margin;
      first = false;
    }
    if (!hit) continue;
    ++hit_count;
    if (hits.size() < 64) {  // keep documents bounded on dense points
      ojson h;
      h["q"] = std::to_string(q);
      ojson pj = ojson::array();
      for (const Int& pi : p) pj.push_back(pi.get_str());
      h["p"] = pj;
      h["cleared_margin"] = rat_str(worst_margin);
      h["cleared_margin_approx"] = worst_margin.get_d();
      hits.push_back(h);
    }
  }

  ojson doc;
  doc["schema"] = io::kSchema;
  doc["command"] = "approx";
  doc["x"] = vec_json(x);
  doc["w"] = vec_json(wv.w);
  doc["tau"] = rat_str(tr);
  doc["c"] = rat_str(cr);
  doc["q_max"] = q_max;
  doc["hit_count"] = hit_count;
  doc["hits"] = hits;
  emit(doc, out);
  return 0;
}

// --config FILE splices the file's key=value lines into the token stream as
// --key=value right where the flag sat, so flags given after it still win.
// Unknown keys turn into unknown flags and fail the parse.
std::vector<std::string> expand_config(const std::vector<std::string>& in) {
  std::vector<std::string> out;
  out.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    const std::string& tok = in[i];
    std::string path;
    if (tok == "--config") {
      if (i + 1 == in.size()) throw ConfigError("--config needs a file path");
      path = in[++i];
    } else if (tok.rfind("--config=", 0) == 0) {
      path = tok.substr(9);
    } else {
      out.push_back(tok);
      continue;
    }
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file '" + path + "'");
    auto trim = [](const std::string& s) {
      auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
      ++lineno;
      std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      auto eq = t.find('=');
      std::string key = eq == std::string::npos ? std::string() : trim(t.substr(0, eq));
      if (key.empty())
        throw ConfigError(path + " line " + std::to_string(lineno) + ": expected key=value");
      if (key == "config")
        throw ConfigError(path + " line " + std::to_string(lineno) + ": config files cannot nest");
      out.push_back("--" + key + "=" + trim(t.substr(eq + 1)));
    }
  }
  return out;
}

int run(int argc, char** argv) {
  if (const char* tc = std::getenv("EXACTDIM_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(tc, &end, 10);
    if (end == tc || *end != '\0' || v < 1) {
      std::cerr << "EXACTDIM_THREADS must be a positive integer\n";
      return 2;
    }
    // reserved: current modules run sequentially
  }

  CLI::App app{"exact verification toolkit for weighted approximation sets"};
  app.require_subcommand(1);

  std::string out;

  auto* dim = app.add_subcommand("dim", "closed dimension formula with optional lower-bound cross-check");
  std::string dim_w, dim_tau, dim_delta;
  long dim_d = 0;
  dim->add_option("-d,--dim", dim_d, "ambient dimension (cross-checked against -w)");
  dim->add_option("-w,--weights", dim_w, "weights, e.g. 1/3,2/3")->required();
  dim->add_option("--tau", dim_tau, "approximation exponent")->required();
  dim->add_option("--delta", dim_delta, "also run the perturbed lower bound and profile minimum");
  dim->add_option("-o,--out", out, "write JSON here instead of stdout");

  auto* aux = app.add_subcommand("aux", "auxiliary weights for a perturbation delta");
  std::string aux_w, aux_tau, aux_delta;
  aux->add_option("-w,--weights", aux_w, "weights")->required();
  aux->add_option("--tau", aux_tau, "approximation exponent")->required();
  aux->add_option("--delta", aux_delta, "perturbation")->required();
  aux->add_option("-o,--out", out, "write JSON here instead of stdout");

  auto* sched = app.add_subcommand("schedule", "assemble a parameter schedule and re-check it");
  ScheduleFlags sched_flags;
  sched_flags.add_base(sched);
  sched_flags.add_mode(sched, true);
  sched->add_option("-o,--out", out, "write JSON here instead of stdout");

  auto* build = app.add_subcommand("build", "materialize a toy tree and serialize it");
  ScheduleFlags build_flags;
  build_flags.add_base(build);
  build_flags.add_mode(build, false);
  long build_depth = 0;
  bool build_nonuniform = false;
  std::string build_sab = "none";
  std::size_t build_sab_level = 0;
  long build_work = 100000000;
  std::string build_csv;
  build->add_option("--depth", build_depth, "levels to build")->required();
  build->add_flag("--nonuniform", build_nonuniform, "keep raw child counts, non-uniform mass");
  build->add_option("--sabotage", build_sab,
                    "deliberate corruption: none, skip_danger_removal, skip_plane_removal_at_level");
  build->add_option("--sabotage-level", build_sab_level, "level for skip_plane_removal_at_level");
  build->add_option("--max-work", build_work, "work-meter budget (default 100000000)")
      ->capture_default_str();
  build->add_option("--csv", build_csv, "also write the per-level summary CSV here");
  build->add_option("-o,--out", out, "write the tree JSON here instead of stdout");

  auto* verify = app.add_subcommand("verify", "re-check a serialized tree");
  std::string verify_in;
  int verify_samples = 2;
  std::size_t verify_trials = 20;
  std::uint64_t verify_seed = 0;
  verify->add_option("--in", verify_in, "tree JSON path")->required();
  verify->add_option("--samples", verify_samples, "witness samples per failing box")
      ->capture_default_str();
  verify->add_option("--trial-boxes", verify_trials, "random counting trial boxes")
      ->capture_default_str();
  verify->add_option("--seed", verify_seed, "trial-box seed")->capture_default_str();
  verify->add_option("-o,--out", out, "write JSON here instead of stdout");

  auto* analyze = app.add_subcommand("analyze", "local dimension records and a box-counting slope");
  std::string an_in, an_scales = "1/4,1/8,1/16,1/32", an_csv;
  std::size_t an_trials = 20, an_points = 200;
  std::uint64_t an_seed = 0;
  analyze->add_option("--in", an_in, "tree JSON path")->required();
  analyze->add_option("--trial-boxes", an_trials, "local-dimension trial boxes")
      ->capture_default_str();
  analyze->add_option("--seed", an_seed, "sampling seed")->capture_default_str();
  analyze->add_option("--points", an_points, "sampled points for box counting")
      ->capture_default_str();
  analyze->add_option("--scales", an_scales, "box-counting scales")->capture_default_str();
  analyze->add_option("--csv", an_csv, "write the per-box CSV here");
  analyze->add_option("-o,--out", out, "write JSON here instead of stdout");

  auto* approx = app.add_subcommand("approx", "scan q <= Q for weighted rational approximations");
  std::string ap_x, ap_w, ap_tau, ap_c = "1";
  long ap_q = 0;
  approx->add_option("-x,--point", ap_x, "rational point in [0,1)^d, e.g. 3/5,7/9")->required();
  approx->add_option("-w,--weights", ap_w, "weights")->required();
  approx->add_option("--tau", ap_tau, "approximation exponent")->required();
  approx->add_option("-c,--constant", ap_c, "norm threshold constant")->capture_default_str();
  approx->add_option("-Q,--q-max", ap_q, "largest denominator to scan")->required();
  approx->add_option("-o,--out", out, "write JSON here instead of stdout");

  for (CLI::App* cmd : {dim, aux, sched, build, verify, analyze, approx}) {
    cmd->add_option("--config",
                    "flat key=value file; keys mirror the long flags, later flags override");
    for (CLI::Option* opt : cmd->get_options())
      opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }

  std::vector<std::string> tokens;
  for (int i = 1; i < argc; ++i) tokens.emplace_back(argv[i]);
  try {
    tokens = expand_config(tokens);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  std::reverse(tokens.begin(), tokens.end());

  try {
    app.parse(tokens);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*dim) return cmd_dim(dim_w, dim_tau, dim_delta, dim_d, out);
    if (*aux) return cmd_aux(aux_w, aux_tau, aux_delta, out);
    if (*sched) return cmd_schedule(sched_flags, out);
    if (*build)
      return cmd_build(build_flags, build_depth, build_nonuniform, build_sab, build_sab_level,
                       build_work, out, build_csv);
    if (*verify) return cmd_verify(verify_in, verify_samples, verify_trials, verify_seed, out);
    if (*analyze)
      return cmd_analyze(an_in, an_trials, an_seed, an_points, an_scales, an_csv, out);
    if (*approx) return cmd_approx(ap_x, ap_w, ap_tau, ap_c, ap_q, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return 2;
  } catch (const PreconditionViolation& e) {
    std::cerr << "precondition violated: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
