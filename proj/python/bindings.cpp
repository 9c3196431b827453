#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "crossbound/cli.hpp"
#include "crossbound/dataset.hpp"

namespace py = pybind11;
using namespace crossbound;

namespace {

py::tuple cli_run(const std::vector<std::string>& args) {
  std::vector<std::string> all{"crossbound"};
  all.insert(all.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : all) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release nogil;
    code = cli::run(int(argv.size()), argv.data(), out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "numerical bootstrap bounds on scalar dimensions";
  m.attr("__version__") = cli::kVersion;

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SolverFailure>(m, "SolverFailure", PyExc_RuntimeError);

  py::enum_<Mode>(m, "Mode").value("single", Mode::Single).value("multi", Mode::Multi);
  py::enum_<Status>(m, "Status")
      .value("excluded", Status::Excluded)
      .value("not_excluded", Status::NotExcluded)
      .value("solver_failure", Status::SolverFailure);
  py::enum_<Parity>(m, "Parity").value("even", Parity::Even).value("odd", Parity::Odd);

  py::class_<CrossingPoint>(m, "CrossingPoint")
      .def(py::init<>())
      .def(py::init([](Real u, Real v) { return CrossingPoint{u, v}; }), py::arg("u"), py::arg("v"))
      .def_readwrite("u", &CrossingPoint::u0)
      .def_readwrite("v", &CrossingPoint::v0);

  m.def(
      "eval_block",
      [](Real delta, int spin, Real u, Real v, Real d, Real d12, Real d34, int series_order) {
        return eval_block({d, delta, spin, d12, d34}, {u, v}, series_order);
      },
      py::arg("delta"), py::arg("spin"), py::arg("u"), py::arg("v"), py::arg("d") = 3, py::arg("d12") = 0,
      py::arg("d34") = 0, py::arg("series_order") = kDefaultSeriesOrder);
  m.def(
      "casimir_residual",
      [](Real delta, int spin, Real u, Real v, Real d) { return casimir_residual({d, delta, spin}, {u, v}); },
      py::arg("delta"), py::arg("spin"), py::arg("u") = 0.25L, py::arg("v") = 0.25L, py::arg("d") = 3);
  m.def("unitarity_min", &unitarity_min, py::arg("d"), py::arg("spin"));

  py::class_<DiscretizationGrid>(m, "DiscretizationGrid")
      .def(py::init<>())
      .def_readwrite("delta_step", &DiscretizationGrid::delta_step)
      .def_readwrite("delta_max", &DiscretizationGrid::delta_max)
      .def_readwrite("spin_max", &DiscretizationGrid::spin_max)
      .def_readwrite("asymptotic", &DiscretizationGrid::asymptotic);

  py::class_<SolverOptions>(m, "SolverOptions")
      .def(py::init<>())
      .def_readwrite("d", &SolverOptions::d)
      .def_readwrite("point", &SolverOptions::point)
      .def_readwrite("series_order", &SolverOptions::series_order)
      .def_readwrite("max_rounds", &SolverOptions::max_rounds)
      .def_readwrite("precision_bits", &SolverOptions::precision_bits)
      .def_readwrite("check_epsilon", &SolverOptions::check_epsilon)
      .def_readwrite("time_limit", &SolverOptions::time_limit);

  py::class_<GapAssumptions>(m, "GapAssumptions")
      .def_static("standard", &GapAssumptions::standard, py::arg("mode"), py::arg("delta1"), py::arg("delta2"),
                  py::arg("d") = 3, py::arg("spin_max") = 20, py::arg("irrelevant") = -1)
      .def("continuum_start", &GapAssumptions::continuum_start);

  py::class_<Functional>(m, "Functional")
      .def_readonly("mode", &Functional::mode)
      .def_readonly("lambda_order", &Functional::lambda_order)
      .def_readonly("delta1", &Functional::delta1)
      .def_readonly("delta2", &Functional::delta2)
      .def_readonly("coeffs", &Functional::coeffs)
      .def("save", py::overload_cast<const Functional&, const std::string&>(&save_certificate))
      .def_static("load", &load_certificate_file);

  py::class_<Diagnostics>(m, "Diagnostics")
      .def_readonly("min_action", &Diagnostics::min_action)
      .def_readonly("alpha_h", &Diagnostics::alpha_h)
      .def_readonly("generators", &Diagnostics::generators)
      .def_readonly("rounds", &Diagnostics::rounds)
      .def_readonly("note", &Diagnostics::note);

  py::class_<Verdict>(m, "Verdict")
      .def_readonly("status", &Verdict::status)
      .def_readonly("certificate", &Verdict::certificate)
      .def_readonly("diagnostics", &Verdict::diagnostics);

  m.def(
      "exclude",
      [](Mode mode, Real delta1, Real delta2, int lambda, const DiscretizationGrid& grid, const SolverOptions& opt,
         Real irrelevant) {
        const auto gaps = GapAssumptions::standard(mode, delta1, delta2, opt.d, grid.spin_max, irrelevant);
        py::gil_scoped_release nogil;
        return exclude(mode, delta1, delta2, gaps, lambda, grid, opt);
      },
      py::arg("mode"), py::arg("delta1"), py::arg("delta2"), py::arg("lambda_order") = 11,
      py::arg("grid") = DiscretizationGrid{}, py::arg("options") = SolverOptions{}, py::arg("irrelevant") = -1);

  py::class_<CheckReport>(m, "CheckReport")
      .def_readonly("passed", &CheckReport::passed)
      .def_readonly("min_action", &CheckReport::min_action)
      .def_readonly("alpha_h", &CheckReport::alpha_h)
      .def_readonly("reason", &CheckReport::reason);
  m.def(
      "certificate_check",
      [](const Functional& f, int bits, Real epsilon) { return certificate_check(f, CheckOptions{bits, epsilon}); },
      py::arg("certificate"), py::arg("precision_bits") = 113, py::arg("epsilon") = 1e-10L);

  py::class_<Exponents>(m, "Exponents")
      .def_readonly("eta", &Exponents::eta)
      .def_readonly("nu", &Exponents::nu)
      .def_readonly("omega", &Exponents::omega);
  m.def("to_exponents", &to_exponents, py::arg("delta_sigma"), py::arg("delta_epsilon"),
        py::arg("delta3") = std::nullopt, py::arg("d") = 3);

  py::class_<BisectResult>(m, "BisectResult")
      .def_readonly("bound", &BisectResult::bound)
      .def_readonly("excluded", &BisectResult::excluded)
      .def_readonly("no_exclusion", &BisectResult::no_exclusion)
      .def_readonly("all_excluded", &BisectResult::all_excluded)
      .def_readonly("monotone", &BisectResult::monotone);
  m.def(
      "bound_bisect",
      [](Real delta1, int lambda, Mode mode, Real tol) {
        BisectSettings bs;
        bs.scan.lambda = lambda;
        bs.scan.mode = mode;
        bs.tol = tol;
        py::gil_scoped_release nogil;
        return bound_bisect(delta1, bs);
      },
      py::arg("delta1"), py::arg("lambda_order") = 11, py::arg("mode") = Mode::Single, py::arg("tol") = 1e-4L);

  py::class_<Field>(m, "Field")
      .def_readonly("index", &Field::index)
      .def_readonly("delta", &Field::delta)
      .def_readonly("spin", &Field::spin)
      .def_readonly("parity", &Field::parity);

  py::class_<CFTDataset>(m, "CFTDataset")
      .def(py::init<Real>(), py::arg("d") = 3)
      .def(
          "add_field",
          [](CFTDataset& ds, int index, Real delta, int spin, Parity parity) { ds.add_field({index, delta, spin, parity}); },
          py::arg("index"), py::arg("delta"), py::arg("spin"), py::arg("parity"))
      .def("set_ope", &CFTDataset::set_ope)
      .def("ope", &CFTDataset::ope)
      .def("field", &CFTDataset::field)
      .def("indices", &CFTDataset::indices)
      .def_static("load", &load_dataset_file, py::arg("path"), py::arg("d") = 3);

  m.def(
      "crossing_residual",
      [](const CFTDataset& ds, int i, int j, int k, int l, const std::vector<std::pair<Real, Real>>& pts,
         Real truncation) {
        std::vector<CrossingPoint> p;
        for (auto [u, v] : pts) p.push_back({u, v});
        return crossing_residual(ds, i, j, k, l, p, truncation);
      },
      py::arg("dataset"), py::arg("i"), py::arg("j"), py::arg("k"), py::arg("l"), py::arg("points"),
      py::arg("truncation") = 14);
  m.def(
      "match_s1", [](Real di, Real dj, Real dk, Real d) { return match_s1(di, dj, dk, d).s1; }, py::arg("delta_i"),
      py::arg("delta_j"), py::arg("delta_k"), py::arg("d") = 3);

  m.def("cli", &cli_run, py::arg("args"), "run a command line; returns (exit code, stdout, stderr)");
}
