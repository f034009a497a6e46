#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <utility>

#include "exactdim/analysis.hpp"
#include "exactdim/cantor.hpp"
#include "exactdim/json_io.hpp"
#include "exactdim/rational.hpp"
#include "exactdim/schedule.hpp"
#include "exactdim/weighted_norm.hpp"
#include "exactdim/weights.hpp"

namespace py = pybind11;
using namespace exactdim;

namespace {

Vec to_vec(const std::vector<std::string>& xs) {
  Vec v;
  for (auto& s : xs) v.push_back(parse_rat(s));
  return v;
}

std::vector<std::string> from_vec(const Vec& v) {
  std::vector<std::string> out;
  for (auto& x : v) out.push_back(rat_str(x));
  return out;
}

// documents cross the boundary as canonical JSON strings; rationals as strings
schedule::ParameterSchedule sched_in(const std::string& doc) {
  return io::schedule_from_json(io::ojson::parse(doc, nullptr, true));
}

cantor::CantorTree tree_in(const std::string& doc) {
  return io::tree_from_json(io::ojson::parse(doc, nullptr, true));
}

using BoxPair = std::pair<std::vector<std::string>, std::vector<std::string>>;

std::vector<Box> to_boxes(const std::vector<BoxPair>& raw) {
  std::vector<Box> out;
  for (const auto& [lo, hi] : raw) out.push_back(Box{to_vec(lo), to_vec(hi)});
  return out;
}

py::list rows_out(const cantor::VerdictReport& r) {
  py::list rows;
  for (const auto& x : r.rows)
    rows.append(py::make_tuple(x.name, x.pass, x.diagnostic, x.witness));
  return rows;
}

}  // namespace

PYBIND11_MODULE(_exactdim, m) {
  m.doc() =
      "exact weighted-approximation toolkit; rationals are strings like '4/3', "
      "schedules and trees travel as canonical JSON strings";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<BudgetExceeded>(m, "BudgetExceeded", PyExc_RuntimeError);
  py::register_exception<PreconditionViolation>(m, "PreconditionViolation", PyExc_RuntimeError);

  m.def(
      "dimension",
      [](const std::vector<std::string>& w, const std::string& tau) {
        auto rep = weights::rynne_dimension(weights::validate_weights(to_vec(w)), parse_rat(tau));
        return py::make_tuple(rat_str(rep.value), rep.argmin_k, from_vec(rep.per_k));
      },
      py::arg("w"), py::arg("tau"), "(value, argmin_k, per_k) of the dimension formula");

  m.def(
      "auxiliary_weights",
      [](const std::vector<std::string>& w, const std::string& tau, const std::string& delta) {
        auto aux = weights::auxiliary_weights(weights::validate_weights(to_vec(w)), parse_rat(tau),
                                              parse_rat(delta));
        return py::make_tuple(from_vec(aux.wtilde), aux.K);
      },
      py::arg("w"), py::arg("tau"), py::arg("delta"), "(wtilde, K)");

  m.def(
      "lower_bound",
      [](const std::vector<std::string>& w, const std::string& tau, const std::string& delta) {
        auto rep = weights::final_lower_bound(weights::validate_weights(to_vec(w)), parse_rat(tau),
                                              parse_rat(delta));
        return py::make_tuple(rat_str(rep.value), rep.argmin_h, rep.argmin_k);
      },
      py::arg("w"), py::arg("tau"), py::arg("delta"), "(value, argmin_h, argmin_k)");

  m.def(
      "delta0_bound",
      [](const std::vector<std::string>& w, const std::string& tau) {
        return rat_str(weights::delta0_bound(weights::validate_weights(to_vec(w)), parse_rat(tau)));
      },
      py::arg("w"), py::arg("tau"));

  m.def(
      "profile_minimum",
      [](const std::vector<std::string>& w, const std::string& tau, const std::string& delta) {
        auto wv = weights::validate_weights(to_vec(w));
        auto aux = weights::auxiliary_weights(wv, parse_rat(tau), parse_rat(delta));
        auto min = analysis::prop_min(analysis::make_profile(wv.w, aux.wtilde, parse_rat(tau)));
        return py::make_tuple(rat_str(min.value), rat_str(min.x_star), min.argmin_k);
      },
      py::arg("w"), py::arg("tau"), py::arg("delta"),
      "(value, x_star, argmin_k) of the piecewise-linear exponent profile");

  m.def(
      "norm_cmp",
      [](const std::vector<std::string>& x, const std::vector<std::string>& u,
         const std::string& c) { return weighted_norm_cmp(to_vec(x), to_vec(u), parse_rat(c)); },
      py::arg("x"), py::arg("u"), py::arg("c"), "sign of ||x||_u - c, computed exactly");

  m.def(
      "norm_approx",
      [](const std::vector<std::string>& x, const std::vector<std::string>& u, unsigned digits) {
        return rat_str(weighted_norm_approx(to_vec(x), to_vec(u), digits));
      },
      py::arg("x"), py::arg("u"), py::arg("digits") = 12);

  m.def(
      "faithful_schedule",
      [](const std::vector<std::string>& w, const std::string& tau, const std::string& delta,
         long k_max) {
        auto base = schedule::base_constants(weights::validate_weights(to_vec(w)), parse_rat(tau),
                                             parse_rat(delta));
        auto s = schedule::build_schedule(base, k_max, schedule::Mode::faithful);
        return io::dump(io::schedule_json(s));
      },
      py::arg("w"), py::arg("tau"), py::arg("delta"), py::arg("k_max"),
      "assemble a faithful parameter schedule, returned as canonical JSON");

  m.def(
      "toy_schedule",
      [](const std::vector<std::string>& w, const std::string& tau, const std::string& delta,
         const std::string& R, long xi, const std::vector<std::string>& rho0,
         const std::string& eps0, const std::vector<long>& n,
         const std::vector<std::vector<long>>& n_ki, const std::vector<std::string>& eps_k,
         const std::vector<std::string>& c_k, const std::string& eps_smoothing) {
        auto base = schedule::base_constants(weights::validate_weights(to_vec(w)), parse_rat(tau),
                                             parse_rat(delta));
        schedule::ToyOverrides toy;
        toy.R = parse_rat(R);
        toy.xi = xi;
        toy.rho0 = to_vec(rho0);
        toy.eps0 = parse_rat(eps0);
        toy.n = n;
        toy.n_ki = n_ki;
        for (const auto& e : eps_k) toy.eps_k.push_back(parse_rat(e));
        for (const auto& c : c_k) toy.c_k.push_back(parse_rat(c));
        toy.eps_L7 = parse_rat(eps_smoothing);
        auto s = schedule::build_schedule(base, long(n.size()), schedule::Mode::toy, toy);
        return io::dump(io::schedule_json(s));
      },
      py::arg("w"), py::arg("tau"), py::arg("delta"), py::arg("R"), py::arg("xi"),
      py::arg("rho0"), py::arg("eps0"), py::arg("n"), py::arg("n_ki"), py::arg("eps_k"),
      py::arg("c_k"), py::arg("eps_smoothing"),
      "assemble a desk-scale schedule with explicit overrides, returned as canonical JSON");

  m.def(
      "check_schedule",
      [](const std::string& schedule_doc) {
        auto rep = schedule::verify_schedule(sched_in(schedule_doc));
        py::list checks;
        for (const auto& c : rep.checks) checks.append(py::make_tuple(c.name, c.pass, c.margin));
        return py::make_tuple(rep.all_pass, checks);
      },
      py::arg("schedule_doc"), "(all_pass, [(name, pass, margin)])");

  m.def(
      "build_tree",
      [](const std::string& schedule_doc, long depth, bool uniform, const std::string& sabotage,
         std::size_t sabotage_level, std::uint64_t max_work) {
        cantor::BuildOptions opt;
        opt.depth = depth;
        opt.uniform_branching = uniform;
        if (sabotage == "none")
          opt.sabotage = cantor::Sabotage::none;
        else if (sabotage == "skip_danger_removal")
          opt.sabotage = cantor::Sabotage::skip_danger_removal;
        else if (sabotage == "skip_plane_removal_at_level")
          opt.sabotage = cantor::Sabotage::skip_plane_removal_at_level;
        else
          throw ConfigError("unknown sabotage '" + sabotage + "'");
        opt.sabotage_level = sabotage_level;
        opt.budget.limit = max_work;
        auto t = cantor::build_tree(sched_in(schedule_doc), opt);
        return io::dump(io::tree_json(t));
      },
      py::arg("schedule_doc"), py::arg("depth"), py::arg("uniform") = true,
      py::arg("sabotage") = "none", py::arg("sabotage_level") = 0,
      py::arg("max_work") = std::uint64_t(100000000),
      "materialize the nested box tree, returned as canonical JSON");

  m.def(
      "verify_tree",
      [](const std::string& tree_doc, int samples, const std::vector<BoxPair>& trial_boxes) {
        auto t = tree_in(tree_doc);
        long depth = long(t.levels.size()) - 1;
        auto st = cantor::verify_structure(t);
        auto pw = cantor::verify_pointwise(t, depth, samples);
        auto ct = cantor::verify_counts(t, to_boxes(trial_boxes));
        bool all = st.all_pass && pw.all_pass && ct.all_pass;
        return py::make_tuple(all, rows_out(st), rows_out(pw), rows_out(ct));
      },
      py::arg("tree_doc"), py::arg("samples") = 2,
      py::arg("trial_boxes") = std::vector<BoxPair>{},
      "(all_pass, structure_rows, pointwise_rows, counting_rows); rows are "
      "(name, pass, diagnostic, witness)");

  m.def(
      "sample_point",
      [](const std::string& tree_doc, std::uint64_t seed) {
        return from_vec(cantor::sample_point(tree_in(tree_doc), seed));
      },
      py::arg("tree_doc"), py::arg("seed") = 0,
      "deterministic point of the deepest level, following the level mass");

  m.def(
      "level_summary_csv",
      [](const std::string& tree_doc) { return cantor::level_summary_csv(tree_in(tree_doc)); },
      py::arg("tree_doc"));

  m.def(
      "local_dimension",
      [](const std::string& tree_doc, const std::vector<BoxPair>& boxes) {
        auto rep = analysis::local_dimension(tree_in(tree_doc), to_boxes(boxes));
        py::list records;
        for (const auto& r : rep.records)
          records.append(py::make_tuple(r.box_id, rat_str(r.side), long(r.n.get_si()),
                                        long(r.n_B.get_si()), rat_str(r.mu_bound), r.log_ell_mu,
                                        r.f_main_term, r.residual));
        return py::make_tuple(rep.aggregate_min, records);
      },
      py::arg("tree_doc"), py::arg("boxes"),
      "(aggregate_min, [(box_id, side, n, n_B, mu_bound, log_ell_mu, f_main, residual)])");

  m.def(
      "box_counting",
      [](const std::vector<std::vector<std::string>>& points,
         const std::vector<std::string>& scales) {
        std::vector<Vec> pts;
        for (const auto& p : points) pts.push_back(to_vec(p));
        return analysis::box_counting(pts, to_vec(scales));
      },
      py::arg("points"), py::arg("scales"),
      "least-squares slope of log N(scale) against log 1/scale");
}
