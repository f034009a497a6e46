#include "exactdim/json_io.hpp"

#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace exactdim::io {

namespace {

[[noreturn]] void bad(const std::string& what, const std::string& detail) {
  throw ConfigError(what + ": " + detail);
}

// Objects parse strictly: every listed key must be present and no other
// key may appear, so truncated or hand-edited documents fail loudly.
void expect_keys(const ojson& j, std::initializer_list<const char*> keys, const char* what) {
  if (!j.is_object()) bad(what, "expected an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || item.key() == key;
    if (!known) bad(what, "unknown key '" + item.key() + "'");
  }
  for (const char* key : keys)
    if (!j.contains(key)) bad(what, std::string("missing key '") + key + "'");
}

Int int_from_json(const ojson& j) {
  if (!j.is_string()) throw ConfigError("expected an exact integer string");
  try {
    return Int(j.get<std::string>());
  } catch (const std::invalid_argument&) {
    throw ConfigError("malformed integer '" + j.get<std::string>() + "'");
  }
}

ojson int_json(const Int& v) { return v.get_str(); }

ojson vec_json(const Vec& v) {
  ojson a = ojson::array();
  for (const Rat& x : v) a.push_back(rat_json(x));
  return a;
}

Vec vec_from_json(const ojson& j) {
  if (!j.is_array()) throw ConfigError("expected an array of rationals");
  Vec v;
  for (const auto& e : j) v.push_back(rat_from_json(e));
  return v;
}

ojson ints_json(const std::vector<Int>& v) {
  ojson a = ojson::array();
  for (const Int& x : v) a.push_back(int_json(x));
  return a;
}

std::vector<Int> ints_from_json(const ojson& j) {
  if (!j.is_array()) throw ConfigError("expected an array of integers");
  std::vector<Int> v;
  for (const auto& e : j) v.push_back(int_from_json(e));
  return v;
}

ojson box_json(const Box& b) {
  ojson j;
  j["lo"] = vec_json(b.lo);
  j["hi"] = vec_json(b.hi);
  return j;
}

Box box_from_json(const ojson& j) {
  expect_keys(j, {"lo", "hi"}, "box");
  Box b;
  b.lo = vec_from_json(j["lo"]);
  b.hi = vec_from_json(j["hi"]);
  if (b.lo.size() != b.hi.size()) throw ConfigError("box endpoints disagree in dimension");
  return b;
}

cantor::CaseTag tag_from_name(const std::string& s) {
  using cantor::CaseTag;
  for (CaseTag t : {CaseTag::root, CaseTag::case1, CaseTag::case2, CaseTag::case3, CaseTag::case4})
    if (s == cantor::case_name(t)) return t;
  throw ConfigError("unknown level rule '" + s + "'");
}

const char* sabotage_name(cantor::Sabotage s) {
  switch (s) {
    case cantor::Sabotage::none: return "none";
    case cantor::Sabotage::skip_danger_removal: return "skip_danger_removal";
    case cantor::Sabotage::skip_plane_removal_at_level: return "skip_plane_removal_at_level";
  }
  return "?";
}

cantor::Sabotage sabotage_from_name(const std::string& s) {
  using cantor::Sabotage;
  for (Sabotage v :
       {Sabotage::none, Sabotage::skip_danger_removal, Sabotage::skip_plane_removal_at_level})
    if (s == sabotage_name(v)) return v;
  throw ConfigError("unknown removal override '" + s + "'");
}

ojson level_params_json(const schedule::LevelParams& lp) {
  ojson j;
  j["n"] = int_json(lp.n);
  j["n_i"] = ints_json(lp.n_i);
  j["eps"] = power_json(lp.eps);
  j["c"] = rat_json(lp.c);
  return j;
}

schedule::LevelParams level_params_from_json(const ojson& j) {
  expect_keys(j, {"n", "n_i", "eps", "c"}, "stage record");
  schedule::LevelParams lp;
  lp.n = int_from_json(j["n"]);
  lp.n_i = ints_from_json(j["n_i"]);
  lp.eps = power_from_json(j["eps"]);
  lp.c = rat_from_json(j["c"]);
  return lp;
}

ojson node_json(const cantor::CantorNode& n) {
  ojson j;
  j["level"] = n.level;
  j["box"] = box_json(n.box);
  j["mu"] = rat_json(n.mu);
  j["tag"] = cantor::case_name(n.tag);
  j["k"] = n.k;
  j["parent"] = n.parent;
  j["grid_idx"] = n.grid_idx;
  if (n.approx) {
    ojson a;
    a["p"] = ints_json(n.approx->p);
    a["q"] = int_json(n.approx->q);
    a["y"] = vec_json(n.approx->y);
    a["c"] = rat_json(n.approx->c);
    j["approx"] = a;
  } else {
    j["approx"] = nullptr;
  }
  return j;
}

cantor::CantorNode node_from_json(const ojson& j) {
  expect_keys(j, {"level", "box", "mu", "tag", "k", "parent", "grid_idx", "approx"}, "node");
  cantor::CantorNode n;
  n.level = j["level"].get<long>();
  n.box = box_from_json(j["box"]);
  n.mu = rat_from_json(j["mu"]);
  n.tag = tag_from_name(j["tag"].get<std::string>());
  n.k = j["k"].get<int>();
  n.parent = j["parent"].get<std::size_t>();
  n.grid_idx = j["grid_idx"].get<std::vector<long>>();
  if (!j["approx"].is_null()) {
    const ojson& a = j["approx"];
    expect_keys(a, {"p", "q", "y", "c"}, "distinguished rational");
    cantor::Approximation ap;
    ap.p = ints_from_json(a["p"]);
    ap.q = int_from_json(a["q"]);
    ap.y = vec_from_json(a["y"]);
    ap.c = rat_from_json(a["c"]);
    n.approx = std::move(ap);
  }
  return n;
}

}  // namespace

ojson rat_json(const Rat& x) { return rat_str(x); }

Rat rat_from_json(const ojson& j) {
  if (!j.is_string()) throw ConfigError("expected an exact rational string");
  return parse_rat(j.get<std::string>());
}

ojson power_json(const PowerProduct& p) {
  ojson factors = ojson::array();
  for (const auto& [base, exp] : p.factors()) {
    ojson f;
    f["base"] = int_json(base);
    f["exp_num"] = int_json(Int(exp.get_num()));
    f["exp_den"] = int_json(Int(exp.get_den()));
    factors.push_back(f);
  }
  ojson j;
  j["factors"] = factors;
  j["value_approx"] = p.approx();
  return j;
}

PowerProduct power_from_json(const ojson& j) {
  expect_keys(j, {"factors", "value_approx"}, "power");
  if (!j["factors"].is_array()) throw ConfigError("power: expected a factor array");
  PowerProduct p;
  for (const auto& f : j["factors"]) {
    expect_keys(f, {"base", "exp_num", "exp_den"}, "power factor");
    Rat exp = Rat(int_from_json(f["exp_num"])) / Rat(int_from_json(f["exp_den"]));
    p = p * PowerProduct::pow_of(Rat(int_from_json(f["base"])), exp);
  }
  return p;
}

ojson schedule_json(const schedule::ParameterSchedule& s) {
  ojson j;
  j["schema"] = kSchema;
  j["kind"] = "schedule";
  j["d"] = s.d;
  j["w"] = vec_json(s.w.w);
  j["tau"] = rat_json(s.tau);
  j["delta"] = rat_json(s.delta);
  ojson aux;
  aux["wtilde"] = vec_json(s.aux.wtilde);
  aux["K"] = s.aux.K;
  aux["delta"] = rat_json(s.aux.delta);
  aux["delta0"] = rat_json(s.aux.delta0);
  j["aux"] = aux;
  j["R"] = rat_json(s.R);
  j["xi"] = int_json(s.xi);
  j["xi0"] = rat_json(s.xi0);
  j["alpha"] = rat_json(s.alpha);
  j["alpha_prime"] = rat_json(s.alpha_prime);
  j["eps0"] = power_json(s.eps0);
  ojson rho0 = ojson::array();
  for (const auto& p : s.rho0) rho0.push_back(power_json(p));
  j["rho0"] = rho0;
  ojson rho_i = ojson::array();
  for (const auto& p : s.rho_i) rho_i.push_back(power_json(p));
  j["rho_i"] = rho_i;
  j["rho"] = int_json(s.rho);
  j["eps_L7"] = rat_json(s.eps_L7);
  j["eta"] = s.eta ? rat_json(*s.eta) : ojson(nullptr);
  ojson levels = ojson::array();
  for (const auto& lp : s.levels) levels.push_back(level_params_json(lp));
  j["levels"] = levels;
  j["mode"] = s.mode == schedule::Mode::toy ? "toy" : "faithful";
  return j;
}

schedule::ParameterSchedule schedule_from_json(const ojson& j) {
  expect_keys(j,
              {"schema", "kind", "d", "w", "tau", "delta", "aux", "R", "xi", "xi0", "alpha",
               "alpha_prime", "eps0", "rho0", "rho_i", "rho", "eps_L7", "eta", "levels", "mode"},
              "schedule document");
  if (j["schema"] != kSchema) bad("schedule document", "unsupported schema");
  if (j["kind"] != "schedule") bad("schedule document", "kind is not 'schedule'");

  schedule::ParameterSchedule s;
  s.d = j["d"].get<std::size_t>();
  s.w = weights::validate_weights(vec_from_json(j["w"]));
  if (s.w.dim() != s.d) bad("schedule document", "dimension disagrees with the weights");
  s.tau = rat_from_json(j["tau"]);
  s.delta = rat_from_json(j["delta"]);
  const ojson& aux = j["aux"];
  expect_keys(aux, {"wtilde", "K", "delta", "delta0"}, "auxiliary block");
  s.aux.wtilde = vec_from_json(aux["wtilde"]);
  s.aux.K = aux["K"].get<int>();
  s.aux.delta = rat_from_json(aux["delta"]);
  s.aux.delta0 = rat_from_json(aux["delta0"]);
  s.R = rat_from_json(j["R"]);
  s.xi = int_from_json(j["xi"]);
  s.xi0 = rat_from_json(j["xi0"]);
  s.alpha = rat_from_json(j["alpha"]);
  s.alpha_prime = rat_from_json(j["alpha_prime"]);
  s.eps0 = power_from_json(j["eps0"]);
  for (const auto& p : j["rho0"]) s.rho0.push_back(power_from_json(p));
  for (const auto& p : j["rho_i"]) s.rho_i.push_back(power_from_json(p));
  s.rho = int_from_json(j["rho"]);
  s.eps_L7 = rat_from_json(j["eps_L7"]);
  if (!j["eta"].is_null()) s.eta = rat_from_json(j["eta"]);
  for (const auto& lp : j["levels"]) s.levels.push_back(level_params_from_json(lp));
  const std::string mode = j["mode"].get<std::string>();
  if (mode == "toy")
    s.mode = schedule::Mode::toy;
  else if (mode == "faithful")
    s.mode = schedule::Mode::faithful;
  else
    bad("schedule document", "unknown mode '" + mode + "'");
  return s;
}

ojson tree_json(const cantor::CantorTree& t) {
  ojson j;
  j["schema"] = kSchema;
  j["kind"] = "tree";
  j["schedule"] = schedule_json(t.sched);
  ojson opt;
  opt["depth"] = t.options.depth;
  opt["uniform_branching"] = t.options.uniform_branching;
  opt["sabotage"] = sabotage_name(t.options.sabotage);
  opt["sabotage_level"] = t.options.sabotage_level;
  j["options"] = opt;
  ojson levels = ojson::array();
  for (const auto& lvl : t.levels) {
    ojson a = ojson::array();
    for (const auto& n : lvl) a.push_back(node_json(n));
    levels.push_back(a);
  }
  j["levels"] = levels;
  ojson danger = ojson::array();
  for (const auto& dr : t.danger) {
    ojson d;
    d["k"] = dr.k;
    ojson boxes = ojson::array();
    for (const auto& b : dr.boxes) boxes.push_back(box_json(b));
    d["boxes"] = boxes;
    d["notes"] = dr.notes;
    danger.push_back(d);
  }
  j["danger"] = danger;
  ojson summary = ojson::array();
  for (const auto& ls : t.summary) {
    ojson r;
    r["level"] = ls.level;
    r["tag"] = cantor::case_name(ls.tag);
    r["boxes"] = ls.boxes;
    r["removed_plane"] = ls.removed_plane;
    r["removed_danger"] = ls.removed_danger;
    r["fallback_nodes"] = ls.fallback_nodes;
    r["mu_min"] = rat_json(ls.mu_min);
    r["mu_max"] = rat_json(ls.mu_max);
    summary.push_back(r);
  }
  j["summary"] = summary;
  j["raw_child_counts"] = t.raw_child_counts;
  j["anomalies"] = t.anomalies;
  return j;
}

cantor::CantorTree tree_from_json(const ojson& j) {
  expect_keys(j,
              {"schema", "kind", "schedule", "options", "levels", "danger", "summary",
               "raw_child_counts", "anomalies"},
              "tree document");
  if (j["schema"] != kSchema) bad("tree document", "unsupported schema");
  if (j["kind"] != "tree") bad("tree document", "kind is not 'tree'");

  cantor::CantorTree t;
  t.sched = schedule_from_json(j["schedule"]);
  t.schedule_report = schedule::verify_schedule(t.sched);
  const ojson& opt = j["options"];
  expect_keys(opt, {"depth", "uniform_branching", "sabotage", "sabotage_level"}, "build options");
  t.options.depth = opt["depth"].get<long>();
  t.options.uniform_branching = opt["uniform_branching"].get<bool>();
  t.options.sabotage = sabotage_from_name(opt["sabotage"].get<std::string>());
  t.options.sabotage_level = opt["sabotage_level"].get<std::size_t>();
  for (const auto& lvl : j["levels"]) {
    std::vector<cantor::CantorNode> nodes;
    for (const auto& n : lvl) nodes.push_back(node_from_json(n));
    t.levels.push_back(std::move(nodes));
  }
  for (const auto& d : j["danger"]) {
    expect_keys(d, {"k", "boxes", "notes"}, "danger record");
    cantor::DangerRegion dr;
    dr.k = d["k"].get<int>();
    for (const auto& b : d["boxes"]) dr.boxes.push_back(box_from_json(b));
    dr.notes = d["notes"].get<std::vector<std::string>>();
    t.danger.push_back(std::move(dr));
  }
  for (const auto& r : j["summary"]) {
    expect_keys(r,
                {"level", "tag", "boxes", "removed_plane", "removed_danger", "fallback_nodes",
                 "mu_min", "mu_max"},
                "summary row");
    cantor::LevelSummary ls;
    ls.level = r["level"].get<std::size_t>();
    ls.tag = tag_from_name(r["tag"].get<std::string>());
    ls.boxes = r["boxes"].get<std::size_t>();
    ls.removed_plane = r["removed_plane"].get<std::size_t>();
    ls.removed_danger = r["removed_danger"].get<std::size_t>();
    ls.fallback_nodes = r["fallback_nodes"].get<std::size_t>();
    ls.mu_min = rat_from_json(r["mu_min"]);
    ls.mu_max = rat_from_json(r["mu_max"]);
    t.summary.push_back(std::move(ls));
  }
  t.raw_child_counts = j["raw_child_counts"].get<std::vector<std::vector<std::size_t>>>();
  t.anomalies = j["anomalies"].get<std::vector<std::string>>();
  return t;
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

}  // namespace exactdim::io
