#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rfio/experiments.hpp"
#include "rfio/fio.hpp"
#include "rfio/grid.hpp"
#include "rfio/kernel.hpp"
#include "rfio/parametrix.hpp"
#include "rfio/phase.hpp"

namespace py = pybind11;
using namespace rfio;

namespace {

Vec3 to_vec3(py::sequence s) {
    return Vec3{s[0].cast<double>(), s[1].cast<double>(), s[2].cast<double>()};
}

HalfDensity density_from_array(const PolarFrequencyGrid& g,
                               py::array_t<std::complex<double>> arr) {
    auto buf = arr.unchecked<2>();
    if (buf.shape(0) != static_cast<py::ssize_t>(g.n_radial()) ||
        buf.shape(1) != static_cast<py::ssize_t>(g.n_angular()))
        throw std::invalid_argument("density shape must be (n_radial, n_angular)");
    HalfDensity f(g);
    for (py::ssize_t r = 0; r < buf.shape(0); ++r)
        for (py::ssize_t a = 0; a < buf.shape(1); ++a) f.at(r, a) = buf(r, a);
    return f;
}

py::array_t<std::complex<double>> density_to_array(const HalfDensity& f) {
    py::array_t<std::complex<double>> arr({f.nr, f.na});
    auto buf = arr.mutable_unchecked<2>();
    for (std::size_t r = 0; r < f.nr; ++r)
        for (std::size_t a = 0; a < f.na; ++a) buf(r, a) = f.at(r, a);
    return arr;
}

py::array_t<std::complex<double>> field_to_array(const SpatialField& F) {
    py::array_t<std::complex<double>> arr(F.size());
    auto buf = arr.mutable_unchecked<1>();
    for (std::size_t i = 0; i < F.size(); ++i) buf(i) = F.values[i];
    return arr;
}

SpatialField field_from_array(const SpatialGrid& g, py::array_t<std::complex<double>> arr) {
    auto buf = arr.unchecked<1>();
    if (buf.shape(0) != static_cast<py::ssize_t>(g.size()))
        throw std::invalid_argument("field length must match the grid");
    SpatialField F(g.size());
    for (py::ssize_t i = 0; i < buf.shape(0); ++i) F.values[i] = buf(i);
    return F;
}

} // namespace

PYBIND11_MODULE(_rfio, m) {
    m.doc() = "rough-phase Fourier integral operator toolkit";

    py::class_<PolarFrequencyGrid>(m, "PolarFrequencyGrid")
        .def_readonly("j_min", &PolarFrequencyGrid::j_min)
        .def_readonly("j_max", &PolarFrequencyGrid::j_max)
        .def_property_readonly("n_radial", &PolarFrequencyGrid::n_radial)
        .def_property_readonly("n_angular", &PolarFrequencyGrid::n_angular)
        .def_property_readonly("radial_nodes",
                               [](const PolarFrequencyGrid& g) { return g.radial_nodes; })
        .def_property_readonly("angular_weight_sum", [](const PolarFrequencyGrid& g) {
            double s = 0.0;
            for (double w : g.angular_weights) s += w;
            return s;
        });
    m.def("build_polar_grid", &build_polar_grid, py::arg("j_min"), py::arg("j_max"),
          py::arg("radial_per_octave"), py::arg("angular_count"));

    py::class_<SpatialGrid>(m, "SpatialGrid")
        .def_static("lattice", &SpatialGrid::lattice, py::arg("L"), py::arg("n"))
        .def_static("ball", &SpatialGrid::ball, py::arg("radius"), py::arg("n_radial"),
                    py::arg("n_angular"))
        .def_property_readonly("size", &SpatialGrid::size)
        .def_property_readonly("points", [](const SpatialGrid& g) {
            py::array_t<double> arr({g.size(), std::size_t(3)});
            auto buf = arr.mutable_unchecked<2>();
            for (std::size_t i = 0; i < g.size(); ++i) {
                buf(i, 0) = g.points[i].x;
                buf(i, 1) = g.points[i].y;
                buf(i, 2) = g.points[i].z;
            }
            return arr;
        });

    py::class_<TrigPerturbation>(m, "TrigPerturbation")
        .def(py::init<>())
        .def_static("preset", &TrigPerturbation::preset);

    py::class_<PhaseField>(m, "PhaseField")
        .def_static("flat", &PhaseField::flat)
        .def_static("perturbed", &PhaseField::perturbed, py::arg("epsilon"),
                    py::arg("perturbation") = TrigPerturbation{})
        .def_property_readonly("is_flat", &PhaseField::is_flat)
        .def_property_readonly("epsilon", &PhaseField::epsilon)
        .def("u", [](const PhaseField& p, py::sequence x, py::sequence w) {
            return p.u(to_vec3(x), to_vec3(w));
        });

    m.def("jet", [](const PhaseField& p, py::sequence x, py::sequence w) {
        GeometricJet j = jet(p, to_vec3(x), to_vec3(w));
        py::dict d;
        d["u"] = j.u;
        d["a"] = j.a;
        d["N"] = py::make_tuple(j.N.x, j.N.y, j.N.z);
        d["tr_theta"] = j.tr_theta;
        return d;
    });
    m.def("change_of_variable", [](const PhaseField& p, py::sequence w, py::sequence x) {
        ChangeOfVariable cv = change_of_variable(p, to_vec3(w), to_vec3(x));
        py::dict d;
        d["point"] = py::make_tuple(cv.point.x, cv.point.y, cv.point.z);
        d["jacobian_det"] = cv.jacobian_det;
        d["degenerate"] = cv.degenerate;
        return d;
    });
    m.def(
        "check_assumptions",
        [](const PhaseField& p, const PolarFrequencyGrid& fg, const SpatialGrid& sg, double eps,
           double slack) {
            AssumptionReport rep = check_assumptions(p, fg, sg, eps, slack);
            py::list entries;
            for (const auto& e : rep.entries) {
                py::dict d;
                d["assumption"] = e.assumption;
                d["label"] = e.label;
                d["measured"] = e.measured;
                d["threshold"] = e.threshold;
                d["pass"] = e.pass;
                entries.append(d);
            }
            py::dict out;
            out["all_pass"] = rep.all_pass;
            out["entries"] = entries;
            return out;
        },
        py::arg("phase"), py::arg("fgrid"), py::arg("sgrid"), py::arg("epsilon"),
        py::arg("slack") = 8.0);

    py::class_<SymbolField>(m, "SymbolField")
        .def_static("unit", &SymbolField::unit)
        .def_static("lapse_inverse", &SymbolField::lapse_inverse)
        .def_static("lapse_inverse_minus_one", &SymbolField::lapse_inverse_minus_one)
        .def_static("zero", &SymbolField::zero);

    py::class_<FioOperator>(m, "FioOperator")
        .def(py::init<PhaseField, SymbolField, PolarFrequencyGrid, SpatialGrid, double,
                      double>(),
             py::arg("phase"), py::arg("symbol"), py::arg("fgrid"), py::arg("sgrid"),
             py::arg("delta") = 1.0, py::arg("alpha") = 0.125);

    m.def("apply", [](const FioOperator& op, py::array_t<std::complex<double>> f) {
        return field_to_array(apply(op, density_from_array(op.fgrid(), f)));
    });
    m.def(
        "apply_piece",
        [](const FioOperator& op, py::array_t<std::complex<double>> f, int j, py::object nu) {
            std::optional<std::size_t> patch;
            if (!nu.is_none()) patch = nu.cast<std::size_t>();
            return field_to_array(apply_piece(op, density_from_array(op.fgrid(), f), j, patch));
        },
        py::arg("op"), py::arg("f"), py::arg("j"), py::arg("nu") = py::none());
    m.def("spectrum_gamma_j", [](const FioOperator& op, py::array_t<std::complex<double>> f) {
        PieceSpectrum sp = spectrum(op, density_from_array(op.fgrid(), f));
        py::dict d;
        d["total_norm"] = sp.total_norm;
        d["j"] = sp.j_values;
        d["gamma_j"] = sp.gamma_j;
        return d;
    });
    m.def("operator_norm", [](const FioOperator& op, int ensemble, int iters,
                              std::uint64_t seed) {
        OperatorNormResult r = operator_norm(op, ensemble, iters, seed);
        return py::make_tuple(r.sigma, r.converged);
    });
    m.def("polar_l2_norm", [](const PolarFrequencyGrid& g,
                              py::array_t<std::complex<double>> f) {
        return polar_l2_norm(density_from_array(g, f), g);
    });
    m.def("spatial_l2_norm", [](const SpatialGrid& g, py::array_t<std::complex<double>> F) {
        return spatial_l2_norm(field_from_array(g, F), g);
    });
    m.def("random_band_limited_density",
          [](const PolarFrequencyGrid& g, std::uint64_t seed, std::uint64_t stream) {
              return density_to_array(random_band_limited_density(g, seed, stream));
          },
          py::arg("grid"), py::arg("seed"), py::arg("stream") = 0);

    // parametrix surface: solve + flat evolution
    m.def(
        "solve_wave_data",
        [](const PhaseField& phase, const PolarFrequencyGrid& fg, const SpatialGrid& sg,
           py::array_t<std::complex<double>> phi0, py::array_t<std::complex<double>> phi1,
           double tol, int max_iter, double mu) {
            InitialData data = make_initial_data(field_from_array(sg, phi0),
                                                 field_from_array(sg, phi1), sg);
            OperatorSystem sys = assemble_system(phase, fg, sg, mu);
            SolveResult res = solve_data(sys, data, tol, max_iter);
            py::dict d;
            d["f_plus"] = density_to_array(res.pair.f_plus);
            d["f_minus"] = density_to_array(res.pair.f_minus);
            d["residual"] = res.residual;
            d["iterations"] = res.iterations;
            d["converged"] = res.converged;
            d["estimate_ratio"] = estimate_ratio(res, data, sys);
            return d;
        },
        py::arg("phase"), py::arg("fgrid"), py::arg("sgrid"), py::arg("phi0"), py::arg("phi1"),
        py::arg("tol") = 1e-6, py::arg("max_iter") = 200, py::arg("mu") = 2.4805021344239847e-06);
    m.def("evolve_flat", [](py::array_t<std::complex<double>> f_plus,
                            py::array_t<std::complex<double>> f_minus, double t,
                            const PolarFrequencyGrid& fg, const SpatialGrid& sg) {
        HalfDensityPair pair{density_from_array(fg, f_plus), density_from_array(fg, f_minus)};
        return field_to_array(evolve_flat(pair, t, PhaseField::flat(), fg, sg));
    });

    m.def("run_acceptance_criterion", [](int k, const std::string& out_dir,
                                         std::uint64_t seed) {
        CriterionResult res = run_acceptance_criterion(k, out_dir, seed);
        py::dict d;
        d["index"] = res.index;
        d["name"] = res.name;
        d["pass"] = res.pass;
        d["details"] = res.details;
        return d;
    });
}
