#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "reluverify/bab.hpp"
#include "reluverify/cli.hpp"
#include "reluverify/oracle.hpp"

namespace py = pybind11;
using namespace rv;

namespace {

bab::VerifierConfig config_from_kwargs(int batch_size, int eta, double timeout,
                                       int threads, int alpha_iters_init,
                                       int alpha_iters_node, double lr,
                                       bool no_alpha_opt, bool no_batch,
                                       bool no_lp, uint64_t seed) {
  bab::VerifierConfig cfg;
  cfg.batch_size = batch_size;
  cfg.lp_threshold = eta;
  cfg.timeout_seconds = timeout;
  cfg.thread_count = threads;
  cfg.init_opt.iterations = alpha_iters_init;
  cfg.node_opt.iterations = alpha_iters_node;
  cfg.init_opt.step_size = lr;
  cfg.node_opt.step_size = lr;
  cfg.disable_alpha_opt = no_alpha_opt;
  cfg.force_batch_size_1 = no_batch;
  cfg.disable_lp_fallback = no_lp;
  cfg.seed = seed;
  return cfg;
}

std::pair<SplitAssignment, AlphaParams> root_setup(const Network& merged,
                                                   const Box& box) {
  SplitAssignment fr = SplitAssignment::all_free(merged);
  BoundOptions boot;
  boot.heuristic_lower_slopes = true;
  auto ir = compute_intermediate_bounds(merged, fr,
                                        AlphaParams::dense_default(merged), box,
                                        boot);
  return {fr, AlphaParams::heuristic(merged, fr, ir.ibounds)};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Complete verifier for feedforward ReLU networks";
  m.attr("__version__") = kVersion;

  py::register_exception<Error>(m, "VerifierError");

  py::class_<Network>(m, "Network")
      .def_property_readonly("input_dim", &Network::input_dim)
      .def_property_readonly("output_dim", &Network::output_dim)
      .def_property_readonly("num_layers", &Network::num_layers)
      .def_property_readonly("total_hidden_neurons",
                             &Network::total_hidden_neurons)
      .def("forward", [](const Network& n, const VectorXd& x) {
        return n.forward(x);
      })
      .def("to_json", &network_to_json_text)
      .def("__repr__", [](const Network& n) {
        return "<Network " + std::to_string(n.input_dim()) + " -> " +
               std::to_string(n.output_dim()) + ", " +
               std::to_string(n.num_layers()) + " layers>";
      });

  py::class_<PropertySpec>(m, "PropertySpec")
      .def_property_readonly("spec_offset",
                             [](const PropertySpec& p) { return p.spec_offset; })
      .def_property_readonly("epsilon",
                             [](const PropertySpec& p) {
                               return p.epsilon ? *p.epsilon : 0.0;
                             })
      .def("to_json", &property_to_json_text);

  m.def("load_network", &load_network, py::arg("path"));
  m.def("load_property", &load_property, py::arg("path"));
  m.def("merge_property", &merge_property, py::arg("net"), py::arg("prop"));

  m.def(
      "root_bounds",
      [](const Network& net, const PropertySpec& prop) {
        Network merged = merge_property(net, prop);
        Box box = prop.input_box();
        auto [fr, alpha] = root_setup(merged, box);
        BoundResult r = compute_output_bounds(merged, fr, alpha, box);
        return py::make_tuple(r.f_lb, r.f_ub);
      },
      py::arg("net"), py::arg("prop"),
      "Heuristic-slope output bounds of the merged property network");

  m.def(
      "optimize_root_bounds",
      [](const Network& net, const PropertySpec& prop, int iterations,
         double lr) {
        Network merged = merge_property(net, prop);
        Box box = prop.input_box();
        auto [fr, alpha] = root_setup(merged, box);
        OptimizerConfig cfg;
        cfg.iterations = iterations;
        cfg.step_size = lr;
        OptimizeResult res = optimize_alpha(merged, fr, alpha, box, cfg);
        return py::make_tuple(res.f_lb, res.trace);
      },
      py::arg("net"), py::arg("prop"), py::arg("iterations") = 100,
      py::arg("lr") = 0.1,
      "Gradient-ascent-tightened lower bound and its per-iteration trace");

  m.def(
      "lp_lower_bound",
      [](const Network& net, const PropertySpec& prop) -> py::object {
        Network merged = merge_property(net, prop);
        Box box = prop.input_box();
        auto [fr, alpha] = root_setup(merged, box);
        auto ir = compute_intermediate_bounds(merged, fr, alpha, box);
        auto lo = lp_bound(merged, fr, ir.ibounds, box);
        if (lo.outcome.status != LPStatus::kOptimal) return py::none();
        return py::float_(lo.outcome.value);
      },
      py::arg("net"), py::arg("prop"),
      "Triangle-relaxation LP lower bound with heuristic-slope bounds");

  m.def(
      "verify",
      [](const Network& net, const PropertySpec& prop, int batch_size, int eta,
         double timeout, int threads, int alpha_iters_init,
         int alpha_iters_node, double lr, bool no_alpha_opt, bool no_batch,
         bool no_lp, uint64_t seed) {
        bab::VerifierConfig cfg = config_from_kwargs(
            batch_size, eta, timeout, threads, alpha_iters_init,
            alpha_iters_node, lr, no_alpha_opt, no_batch, no_lp, seed);
        bab::Verdict v = bab::verify(net, prop, cfg);
        py::dict out;
        out["verdict"] = bab::to_string(v.status);
        out["f_lb"] = v.f_lb;
        out["f_ub"] = v.f_ub;
        out["branches"] = v.branches;
        out["lp_calls"] = v.lp_calls;
        out["wall_seconds"] = v.wall_seconds;
        if (v.witness) {
          out["witness"] = *v.witness;
          out["witness_value"] = v.witness_value;
        } else {
          out["witness"] = py::none();
        }
        return out;
      },
      py::arg("net"), py::arg("prop"), py::arg("batch_size") = 16,
      py::arg("eta") = 512, py::arg("timeout") = 60.0, py::arg("threads") = 1,
      py::arg("alpha_iters_init") = 100, py::arg("alpha_iters_node") = 10,
      py::arg("lr") = 0.1, py::arg("no_alpha_opt") = false,
      py::arg("no_batch") = false, py::arg("no_lp") = false,
      py::arg("seed") = 0,
      "Complete branch-and-bound verification; returns a result dict");

  m.def(
      "exact_verify",
      [](const Network& net, const PropertySpec& prop) {
        auto o = oracle::exact_verify(net, prop);
        py::dict out;
        out["verdict"] =
            o.verdict == oracle::OracleVerdict::kSafe ? "SAFE" : "UNSAFE";
        if (o.verdict == oracle::OracleVerdict::kUnsafe) {
          out["witness"] = o.witness;
          out["witness_value"] = o.witness_value;
        }
        return out;
      },
      py::arg("net"), py::arg("prop"),
      "Ground-truth verdict by activation-pattern enumeration (small nets)");
}
