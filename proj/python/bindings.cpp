// pybind11 surface: the main operations, exchanged as JSON documents for
// forms/connections and plain scalars/arrays elsewhere.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "specflow/chern.hpp"
#include "specflow/experiments.hpp"
#include "specflow/flow.hpp"
#include "specflow/heat.hpp"
#include "specflow/io.hpp"

namespace py = pybind11;
using namespace specflow;

namespace {

forms::TrigPolyForm parse_form(const std::string& doc) {
  return io::form_from_json(io::json::parse(doc));
}

Connection parse_connection(const std::string& doc) {
  return io::connection_from_json(io::json::parse(doc));
}

flow::PathSpec make_path(const std::string& conn_json, const std::vector<double>& hol_inc,
                         const std::string& osc_inc_json, int K, int samples) {
  Connection a0 = parse_connection(conn_json);
  forms::TrigPolyForm inc = osc_inc_json.empty()
                                ? forms::TrigPolyForm::zero(a0.n, 1, a0.fiber)
                                : parse_form(osc_inc_json);
  flow::PathSpec path(std::move(a0), hol_inc, std::move(inc));
  path.K = K;
  path.samples = samples;
  return path;
}

py::dict params_to_dict(const flow::EstimatorParams& p) {
  py::dict d;
  d["t"] = p.t;
  d["R"] = p.R;
  d["q"] = p.q;
  d["rmax"] = p.rmax;
  d["lambda_cut"] = p.lambda_cut;
  d["T"] = p.T;
  d["clamped"] = p.clamped;
  d["fallback"] = p.fallback;
  return d;
}

}  // namespace

PYBIND11_MODULE(_specflow, m) {
  m.doc() = "spectral flow of twisted Dirac operators on flat tori";

  py::register_exception<ContractViolation>(m, "ContractViolation");
  py::register_exception<CertificateError>(m, "CertificateError");

  // forms
  m.def("wedge_json", [](const std::string& a, const std::string& b) {
    return io::form_to_json(forms::wedge(parse_form(a), parse_form(b))).dump();
  });
  m.def("ext_d_json",
        [](const std::string& a) { return io::form_to_json(forms::ext_d(parse_form(a))).dump(); });
  m.def("integrate_top_json", [](const std::string& a) {
    const forms::Complex v = forms::integrate_top_scalar(parse_form(a));
    return std::make_pair(v.real(), v.imag());
  });
  m.def("contact_one_form_json",
        [](double amplitude) { return io::form_to_json(contact_one_form(amplitude)).dump(); });
  m.def("leading_order_json", [](const std::string& a, double r) {
    return forms::leading_order(parse_form(a), r);
  });
  m.def("prediction_json", [](const std::string& c0, const std::string& c1) {
    return forms::prediction_value(parse_connection(c0), parse_connection(c1));
  });

  // dirac
  m.def(
      "eigenvalues_json",
      [](const std::string& conn, int K) {
        const dirac::EigenSystem sys =
            dirac::eig(dirac::assemble(parse_connection(conn), K), dirac::VectorPolicy::None);
        py::array_t<double> out(static_cast<py::ssize_t>(sys.values.size()));
        auto buf = out.mutable_unchecked<1>();
        for (py::ssize_t i = 0; i < buf.shape(0); ++i) buf(i) = sys.values[i];
        return out;
      },
      py::arg("connection_json"), py::arg("K"),
      "merged spectrum inside the trusted window |lambda| <= pi K / 2");
  m.def("r_of_A_json", [](const std::string& conn, int grid) {
    return dirac::r_of_A(parse_connection(conn), grid);
  });
  m.def("weitzenbock_json", [](const std::string& conn, int K, int trials) {
    return dirac::weitzenbock_residual(parse_connection(conn), K, trials);
  });
  m.def("cutoff_stability_json", [](const std::string& conn, int K) {
    return dirac::cutoff_stability(parse_connection(conn), K);
  });

  // flow
  m.def("mollifier_phi", &flow::mollifier_phi, py::arg("lam"), py::arg("t"));
  m.def(
      "choose_params",
      [](double rmax, int n, double window, double q) {
        return params_to_dict(flow::choose_params(rmax, n, window, q));
      },
      py::arg("rmax"), py::arg("n"), py::arg("trusted_window"), py::arg("q") = -1.0);
  m.def(
      "exact_flow_json",
      [](const std::string& conn, const std::vector<double>& hol_inc,
         const std::string& osc_inc, int K, int samples) {
        const flow::SpectralFlowResult res =
            flow::exact_flow(make_path(conn, hol_inc, osc_inc, K, samples));
        py::dict d;
        d["f"] = res.f;
        py::list crossings;
        for (const auto& c : res.crossings) {
          py::dict cd;
          cd["s"] = c.s_star;
          cd["sign"] = c.sign;
          cd["multiplicity"] = c.multiplicity;
          cd["slope"] = c.slope;
          crossings.append(cd);
        }
        d["crossings"] = crossings;
        d["endpoint_gap"] = std::make_pair(res.endpoint_gap0, res.endpoint_gap1);
        d["max_residual"] = res.max_residual;
        return d;
      },
      py::arg("connection_json"), py::arg("hol_increment"), py::arg("osc_increment_json") = "",
      py::arg("K") = 8, py::arg("samples") = 64);
  m.def(
      "estimator_flow_json",
      [](const std::string& conn, const std::vector<double>& hol_inc, const std::string& osc_inc,
         int K, int samples, double rmax) {
        const flow::PathSpec path = make_path(conn, hol_inc, osc_inc, K, samples);
        const double window = path.blocks_at(0.0).trusted_window();
        const double r = rmax > 0 ? rmax : flow::path_rmax(path, 12);
        const flow::EstimatorParams params = flow::choose_params(r, path.a0.n, window);
        const flow::EstimatorResult res = flow::estimator_flow(path, params);
        py::dict d;
        d["value"] = res.value;
        d["n"] = res.n_max;
        d["params"] = params_to_dict(res.params);
        return d;
      },
      py::arg("connection_json"), py::arg("hol_increment"), py::arg("osc_increment_json") = "",
      py::arg("K") = 8, py::arg("samples") = 48, py::arg("rmax") = -1.0);

  // heat
  m.def("heat_trace_json", [](const std::string& conn, int K, double t) {
    return heat::heat_trace(
        dirac::eig(dirac::assemble(parse_connection(conn), K), dirac::VectorPolicy::None), t);
  });
  m.def("count_eigs_json", [](const std::string& conn, int K, double lambda) {
    return heat::count_eigs(
        dirac::eig(dirac::assemble(parse_connection(conn), K), dirac::VectorPolicy::None), lambda);
  });

  // experiments
  m.def(
      "run_experiment",
      [](const std::string& name, const std::string& config_json) {
        cli::ExperimentConfig cfg =
            cli::ExperimentConfig::from_json(io::json::parse(config_json));
        cfg.experiment = name;
        cli::RunReport rep;
        if (name == "winding")
          rep = cli::run_winding(cfg);
        else if (name == "contact-sweep")
          rep = cli::run_contact_sweep(cfg);
        else if (name == "estimator-check")
          rep = cli::run_estimator_check(cfg);
        else if (name == "heat-check")
          rep = cli::run_heat_checks(cfg);
        else if (name == "chs-check")
          rep = cli::run_chs_checks(cfg);
        else if (name == "all")
          rep = cli::run_all(cfg);
        else
          throw ContractViolation("unknown experiment: " + name);
        py::dict d;
        d["ok"] = rep.ok;
        d["lines"] = rep.lines;
        d["summary"] = rep.summary.dump();
        return d;
      },
      py::arg("name"), py::arg("config_json") = "{}");
}
