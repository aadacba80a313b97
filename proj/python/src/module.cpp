#include <pybind11/pybind11.h>
#include <pybind11/eigen.h>
#include <pybind11/stl.h>

#include "raresim/experiment.hpp"
#include "raresim/limit_state.hpp"

namespace py = pybind11;
using namespace raresim;

namespace {

py::dict result_dict(const RunResult& r) {
    py::dict d;
    d["p_f"] = r.p_f;
    d["p_final"] = r.p_final;
    d["levels_count"] = r.levels_count;
    d["n_total"] = r.n_total;
    d["n0_evals"] = r.n0_evals;
    d["cov_independent"] = r.cov_independent;
    d["cov_correlated"] = r.cov_correlated;
    py::list levels;
    for (const auto& lv : r.levels) {
        py::dict l;
        l["j"] = lv.j;
        l["c_j"] = lv.c_j;
        l["p_j"] = lv.p_j;
        l["accept_rate"] = lv.accept_rate;
        l["true_evals"] = lv.true_evals;
        l["surrogate_evals"] = lv.surrogate_evals;
        levels.append(l);
    }
    d["levels"] = levels;
    return d;
}

}  // namespace

PYBIND11_MODULE(_raresim, m) {
    m.doc() = "rare-event reliability toolkit (subset simulation with local "
              "Gaussian-process surrogates and PLS dimension reduction)";
    m.attr("__version__") = kVersion;

    m.def("benchmark_ids", &benchmark_ids,
          "ids accepted by evaluate() and run configs");

    m.def(
        "evaluate",
        [](const std::string& id, const Vector& theta, std::size_t d,
           double kappa, double tau, double nu, double threshold_shift) {
            BenchmarkOptions opts;
            opts.d = d ? d : static_cast<std::size_t>(theta.size());
            opts.kappa = kappa;
            opts.tau = tau;
            opts.nu = nu;
            opts.threshold_shift = threshold_shift;
            auto g = make_benchmark(id, opts);
            if (theta.size() != static_cast<long>(g->dimension()))
                throw std::invalid_argument(
                    "theta has dimension " + std::to_string(theta.size()) +
                    ", benchmark expects " + std::to_string(g->dimension()));
            return g->evaluate_untracked(theta);
        },
        py::arg("benchmark"), py::arg("theta"), py::arg("d") = 0,
        py::arg("kappa") = 0.2, py::arg("tau") = 5.26, py::arg("nu") = 2.0,
        py::arg("threshold_shift") = 0.0,
        "evaluate a registered limit state at theta (failure is g <= 0)");

    m.def(
        "run",
        [](const std::string& config_text) {
            ExperimentSpec spec = parse_config_text(config_text);
            return result_dict(run(spec.base));
        },
        py::arg("config_text"),
        "single run of the base configuration in a JSON config string");

    m.def(
        "run_experiment",
        [](const std::string& config_text) {
            ExperimentSpec spec = parse_config_text(config_text);
            ExperimentReport rep = run_experiment(spec);
            py::dict out;
            out["total_runs"] = rep.total_runs;
            out["failed_runs"] = rep.failed_runs;
            out["out_dir"] = spec.out_dir;
            py::list cells;
            for (const auto& c : rep.cells) {
                py::dict cd;
                cd["cell"] = c.cell;
                cd["n_runs"] = c.n_runs;
                cd["n_failed"] = c.n_failed;
                cd["mean_pf"] = c.mean_pf;
                cd["std_pf"] = c.std_pf;
                cd["mean_nhat_total"] = c.mean_nhat_total;
                cd["mean_n_total"] = c.mean_n_total;
                if (c.eps) cd["eps"] = *c.eps;
                if (c.eps0) cd["eps0"] = *c.eps0;
                cells.append(cd);
            }
            out["cells"] = cells;
            return out;
        },
        py::arg("config_text"),
        "full multi-seed experiment; writes result files and returns the "
        "per-cell aggregates");
}
