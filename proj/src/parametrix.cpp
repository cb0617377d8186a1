#include "rfio/parametrix.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "rfio/fft.hpp"
#include "rfio/parallel.hpp"

namespace rfio {

InitialData make_initial_data(SpatialField phi0, SpatialField phi1, const SpatialGrid& sgrid) {
    if (!sgrid.is_lattice())
        throw std::invalid_argument("make_initial_data: lattice grid required");
    if (phi0.size() != sgrid.size() || phi1.size() != sgrid.size())
        throw std::invalid_argument("make_initial_data: shape mismatch");
    InitialData d;
    d.grad_phi0 = spectral_gradient(phi0, sgrid.lattice_n, sgrid.lattice_extent);
    d.phi0 = std::move(phi0);
    d.phi1 = std::move(phi1);
    return d;
}

namespace {

// Per-(x, omega-node) data of the half-wave phases/symbols at both signs.
struct NodeEntry {
    double u_plus, u_minus;       // u(x, w), u(x, -w)
    double ainv_plus, ainv_minus; // |grad u|(x, +-w)
    Vec3 an_plus, an_minus;       // a^-1 N = grad u at (x, +-w)
};

NodeEntry make_entry(const PhaseField& phase, const Vec3& x, const Vec3& w) {
    NodeEntry e;
    Vec3 gp, gm;
    phase.u_and_grad(x, w, e.u_plus, gp);
    phase.u_and_grad(x, -w, e.u_minus, gm);
    e.ainv_plus = norm(gp);
    e.ainv_minus = norm(gm);
    e.an_plus = gp;
    e.an_minus = gm;
    return e;
}

} // namespace

struct OperatorSystem::NodeTable {
    std::vector<NodeEntry> entries; // [x * n_angular + a]
    std::size_t na = 0;
};

SpatialField apply_halfwave(HalfWaveKind kind, int sign, const PhaseField& phase,
                            const PolarFrequencyGrid& fg, const SpatialGrid& sg,
                            const HalfDensity& f) {
    if (kind != HalfWaveKind::M && kind != HalfWaveKind::Q)
        throw std::invalid_argument("apply_halfwave: scalar kinds are M and Q");
    if (!f.matches(fg)) throw std::invalid_argument("apply_halfwave: shape mismatch");
    std::vector<complexd> c(f.values.size());
    for (std::size_t r = 0; r < fg.n_radial(); ++r) {
        double lr = fg.radial_nodes[r];
        double wr = lr * lr * fg.radial_weights[r];
        for (std::size_t a = 0; a < fg.n_angular(); ++a)
            c[r * fg.n_angular() + a] = f.at(r, a) * (wr * fg.angular_weights[a]);
    }
    SpatialField out(sg.size());
    parallel_for(sg.size(), [&](std::size_t i) {
        const Vec3& x = sg.points[i];
        complexd acc{};
        for (std::size_t a = 0; a < fg.n_angular(); ++a) {
            Vec3 ws = sign > 0 ? fg.angular_nodes[a] : -fg.angular_nodes[a];
            double u;
            Vec3 grad;
            phase.u_and_grad(x, ws, u, grad);
            complexd inner{};
            for (std::size_t r = 0; r < fg.n_radial(); ++r) {
                complexd cv = c[r * fg.n_angular() + a];
                if (cv == complexd{}) continue;
                double ph = sign > 0 ? fg.radial_nodes[r] * u : -fg.radial_nodes[r] * u;
                inner += complexd(std::cos(ph), std::sin(ph)) * cv;
            }
            if (kind == HalfWaveKind::Q) inner *= norm(grad);
            acc += inner;
        }
        out.values[i] = acc;
    });
    return out;
}

VectorSpatialField apply_halfwave_vector(HalfWaveKind kind, int sign, const PhaseField& phase,
                                         const PolarFrequencyGrid& fg, const SpatialGrid& sg,
                                         const HalfDensity& f) {
    if (kind != HalfWaveKind::P && kind != HalfWaveKind::GradM && kind != HalfWaveKind::MTilde)
        throw std::invalid_argument("apply_halfwave_vector: vector kinds are P, GradM, MTilde");
    if (!f.matches(fg)) throw std::invalid_argument("apply_halfwave: shape mismatch");
    const bool lambda_factor = kind == HalfWaveKind::GradM;
    std::vector<complexd> c(f.values.size());
    for (std::size_t r = 0; r < fg.n_radial(); ++r) {
        double lr = fg.radial_nodes[r];
        double wr = lr * lr * fg.radial_weights[r] * (lambda_factor ? lr : 1.0);
        for (std::size_t a = 0; a < fg.n_angular(); ++a)
            c[r * fg.n_angular() + a] = f.at(r, a) * (wr * fg.angular_weights[a]);
    }
    VectorSpatialField out(sg.size());
    const complexd grad_factor = kind == HalfWaveKind::GradM
                                     ? complexd(0.0, sign > 0 ? 1.0 : -1.0)
                                     : complexd(1.0, 0.0);
    parallel_for(sg.size(), [&](std::size_t i) {
        const Vec3& x = sg.points[i];
        complexd ax{}, ay{}, az{};
        for (std::size_t a = 0; a < fg.n_angular(); ++a) {
            Vec3 ws = sign > 0 ? fg.angular_nodes[a] : -fg.angular_nodes[a];
            double u;
            Vec3 grad;
            phase.u_and_grad(x, ws, u, grad);
            complexd inner{};
            for (std::size_t r = 0; r < fg.n_radial(); ++r) {
                complexd cv = c[r * fg.n_angular() + a];
                if (cv == complexd{}) continue;
                double ph = sign > 0 ? fg.radial_nodes[r] * u : -fg.radial_nodes[r] * u;
                inner += complexd(std::cos(ph), std::sin(ph)) * cv;
            }
            if (inner == complexd{}) continue;
            // symbol vector: P uses the unit normal N, GradM and MTilde use
            // a^-1 N = grad u
            Vec3 sv = grad;
            if (kind == HalfWaveKind::P) sv = grad / norm(grad);
            complexd val = inner * grad_factor;
            ax += val * sv.x;
            ay += val * sv.y;
            az += val * sv.z;
        }
        out.x[i] = ax;
        out.y[i] = ay;
        out.z[i] = az;
    });
    return out;
}

OperatorSystem::OperatorSystem(PhaseField phase, PolarFrequencyGrid fgrid, SpatialGrid sgrid,
                               double mu)
    : phase_(std::move(phase)), fgrid_(std::move(fgrid)), sgrid_(std::move(sgrid)), mu_(mu) {
    if (mu_ < 0.0) throw std::invalid_argument("OperatorSystem: mu must be >= 0");
    std::size_t pairs = sgrid_.size() * fgrid_.n_angular();
    if (pairs <= 1'500'000) {
        auto table = std::make_shared<NodeTable>();
        table->na = fgrid_.n_angular();
        table->entries.resize(pairs);
        parallel_for(sgrid_.size(), [&](std::size_t i) {
            for (std::size_t a = 0; a < fgrid_.n_angular(); ++a)
                table->entries[i * table->na + a] =
                    make_entry(phase_, sgrid_.points[i], fgrid_.angular_nodes[a]);
        });
        table_ = std::move(table);
    }
}

SystemField OperatorSystem::apply(const HalfDensityPair& g) const {
    if (!g.f_plus.matches(fgrid_) || !g.f_minus.matches(fgrid_))
        throw std::invalid_argument("OperatorSystem::apply: shape mismatch");
    SystemField out(sgrid_.size());
    std::vector<complexd> cp(g.f_plus.values.size()), cm(g.f_minus.values.size());
    for (std::size_t r = 0; r < fgrid_.n_radial(); ++r) {
        double lr = fgrid_.radial_nodes[r];
        double wr = lr * lr * fgrid_.radial_weights[r];
        for (std::size_t a = 0; a < fgrid_.n_angular(); ++a) {
            cp[r * fgrid_.n_angular() + a] = g.f_plus.at(r, a) * (wr * fgrid_.angular_weights[a]);
            cm[r * fgrid_.n_angular() + a] = g.f_minus.at(r, a) * (wr * fgrid_.angular_weights[a]);
        }
    }
    const NodeTable* table = table_.get();
    parallel_for(sgrid_.size(), [&](std::size_t i) {
        const Vec3& x = sgrid_.points[i];
        complexd vx{}, vy{}, vz{}, sc{};
        for (std::size_t a = 0; a < fgrid_.n_angular(); ++a) {
            NodeEntry e = table ? table->entries[i * table->na + a]
                                : make_entry(phase_, x, fgrid_.angular_nodes[a]);
            complexd ip{}, im{};
            for (std::size_t r = 0; r < fgrid_.n_radial(); ++r) {
                double lr = fgrid_.radial_nodes[r];
                complexd cvp = cp[r * fgrid_.n_angular() + a];
                complexd cvm = cm[r * fgrid_.n_angular() + a];
                if (cvp != complexd{}) {
                    double ph = lr * e.u_plus;
                    ip += complexd(std::cos(ph), std::sin(ph)) * cvp;
                }
                if (cvm != complexd{}) {
                    double ph = -lr * e.u_minus;
                    im += complexd(std::cos(ph), std::sin(ph)) * cvm;
                }
            }
            // M~+ g+ - M~- g-  (symbols a^-1 N at the respective signs)
            vx += ip * e.an_plus.x - im * e.an_minus.x;
            vy += ip * e.an_plus.y - im * e.an_minus.y;
            vz += ip * e.an_plus.z - im * e.an_minus.z;
            // Q+ g+ - Q- g-
            sc += ip * e.ainv_plus - im * e.ainv_minus;
        }
        out.vec.x[i] = vx;
        out.vec.y[i] = vy;
        out.vec.z[i] = vz;
        out.scalar.values[i] = sc;
    });
    return out;
}

HalfDensityPair OperatorSystem::apply_adjoint(const SystemField& y) const {
    if (y.vec.size() != sgrid_.size() || y.scalar.size() != sgrid_.size())
        throw std::invalid_argument("OperatorSystem::apply_adjoint: shape mismatch");
    HalfDensityPair out{HalfDensity(fgrid_), HalfDensity(fgrid_)};
    const NodeTable* table = table_.get();
    parallel_for(fgrid_.n_angular(), [&](std::size_t a) {
        std::vector<complexd> colp(fgrid_.n_radial()), colm(fgrid_.n_radial());
        for (std::size_t i = 0; i < sgrid_.size(); ++i) {
            NodeEntry e = table ? table->entries[i * table->na + a]
                                : make_entry(phase_, sgrid_.points[i], fgrid_.angular_nodes[a]);
            double w = sgrid_.weights[i];
            complexd nv_p = (y.vec.x[i] * e.an_plus.x + y.vec.y[i] * e.an_plus.y +
                             y.vec.z[i] * e.an_plus.z + y.scalar.values[i] * e.ainv_plus) *
                            w;
            complexd nv_m = (y.vec.x[i] * e.an_minus.x + y.vec.y[i] * e.an_minus.y +
                             y.vec.z[i] * e.an_minus.z + y.scalar.values[i] * e.ainv_minus) *
                            (-w);
            for (std::size_t r = 0; r < fgrid_.n_radial(); ++r) {
                double lr = fgrid_.radial_nodes[r];
                double php = lr * e.u_plus;
                double phm = -lr * e.u_minus;
                colp[r] += complexd(std::cos(php), -std::sin(php)) * nv_p;
                colm[r] += complexd(std::cos(phm), -std::sin(phm)) * nv_m;
            }
        }
        for (std::size_t r = 0; r < fgrid_.n_radial(); ++r) {
            out.f_plus.at(r, a) = colp[r];
            out.f_minus.at(r, a) = colm[r];
        }
    });
    return out;
}

SystemField OperatorSystem::target_from_data(const InitialData& data) const {
    SystemField y(sgrid_.size());
    const complexd minus_i(0.0, -1.0), plus_i(0.0, 1.0);
    for (std::size_t i = 0; i < sgrid_.size(); ++i) {
        y.vec.x[i] = minus_i * data.grad_phi0.x[i];
        y.vec.y[i] = minus_i * data.grad_phi0.y[i];
        y.vec.z[i] = minus_i * data.grad_phi0.z[i];
        y.scalar.values[i] = plus_i * data.phi1.values[i];
    }
    return y;
}

complexd OperatorSystem::inner_pair(const HalfDensityPair& a, const HalfDensityPair& b) const {
    return polar_inner(a.f_plus, b.f_plus, fgrid_) + polar_inner(a.f_minus, b.f_minus, fgrid_);
}

complexd OperatorSystem::inner_target(const SystemField& a, const SystemField& b) const {
    std::vector<complexd> terms(sgrid_.size());
    for (std::size_t i = 0; i < sgrid_.size(); ++i) {
        complexd s = a.vec.x[i] * std::conj(b.vec.x[i]) + a.vec.y[i] * std::conj(b.vec.y[i]) +
                     a.vec.z[i] * std::conj(b.vec.z[i]) +
                     a.scalar.values[i] * std::conj(b.scalar.values[i]);
        terms[i] = s * sgrid_.weights[i];
    }
    return pairwise_sum(terms);
}

double OperatorSystem::norm_target(const SystemField& a) const {
    return std::sqrt(std::abs(std::real(inner_target(a, a))));
}

OperatorSystem assemble_system(const PhaseField& phase, const PolarFrequencyGrid& fgrid,
                               const SpatialGrid& sgrid, double mu) {
    return OperatorSystem(phase, fgrid, sgrid, mu);
}

namespace {

SystemField axpy(const SystemField& a, double alpha, const SystemField& b) {
    SystemField r(a.scalar.size());
    for (std::size_t i = 0; i < a.scalar.size(); ++i) {
        r.vec.x[i] = a.vec.x[i] + alpha * b.vec.x[i];
        r.vec.y[i] = a.vec.y[i] + alpha * b.vec.y[i];
        r.vec.z[i] = a.vec.z[i] + alpha * b.vec.z[i];
        r.scalar.values[i] = a.scalar.values[i] + alpha * b.scalar.values[i];
    }
    return r;
}

} // namespace

SolveResult solve_data(const OperatorSystem& system, const InitialData& data, double tol,
                       int max_iter, std::optional<HalfDensityPair> start) {
    if (tol <= 0.0) throw std::invalid_argument("solve_data: tol must be > 0");
    SystemField y = system.target_from_data(data);
    double yn = system.norm_target(y);
    SolveResult res;
    res.pair = HalfDensityPair{HalfDensity(system.fgrid()), HalfDensity(system.fgrid())};
    res.weighted = res.pair;
    if (yn == 0.0) {
        res.converged = true;
        return res;
    }

    // CG on (Lambda Lambda* + mu) z = y in the target space.
    auto normal_apply = [&](const SystemField& z) {
        SystemField az = system.apply(system.apply_adjoint(z));
        if (system.mu() > 0.0) az = axpy(az, system.mu(), z);
        return az;
    };

    SystemField z(system.sgrid().size());
    SystemField r = y;
    if (start) {
        // alternative CG starting point z0 = Lambda(start), used by the
        // uniqueness checks
        z = system.apply(*start);
        r = axpy(y, -1.0, normal_apply(z));
    }
    SystemField p = r;
    double rr = std::real(system.inner_target(r, r));
    int it = 0;
    for (; it < max_iter; ++it) {
        if (std::sqrt(rr) <= tol * yn * 0.1) break;
        SystemField ap = normal_apply(p);
        double pap = std::real(system.inner_target(p, ap));
        if (pap <= 0.0) break;
        double alpha = rr / pap;
        z = axpy(z, alpha, p);
        r = axpy(r, -alpha, ap);
        double rr_new = std::real(system.inner_target(r, r));
        p = axpy(r, rr_new / rr, p);
        rr = rr_new;
    }
    res.iterations = it;

    HalfDensityPair g = system.apply_adjoint(z);
    SystemField lg = system.apply(g);
    SystemField resid = axpy(lg, -1.0, y);
    res.residual = system.norm_target(resid) / yn;
    res.converged = res.residual <= tol;
    res.weighted = g;
    res.pair = g;
    const PolarFrequencyGrid& fg = system.fgrid();
    for (std::size_t r2 = 0; r2 < fg.n_radial(); ++r2) {
        double inv = 1.0 / fg.radial_nodes[r2];
        for (std::size_t a = 0; a < fg.n_angular(); ++a) {
            res.pair.f_plus.at(r2, a) *= inv;
            res.pair.f_minus.at(r2, a) *= inv;
        }
    }
    return res;
}

double estimate_ratio(const SolveResult& solved, const InitialData& data,
                      const OperatorSystem& system) {
    double num = polar_l2_norm(solved.weighted.f_plus, system.fgrid()) +
                 polar_l2_norm(solved.weighted.f_minus, system.fgrid());
    double den = spatial_l2_norm(data.grad_phi0, system.sgrid()) +
                 spatial_l2_norm(data.phi1, system.sgrid());
    if (den == 0.0) throw std::invalid_argument("estimate_ratio: zero data");
    return num / den;
}

SpatialField evolve_flat(const HalfDensityPair& pair, double t, const PhaseField& phase,
                         const PolarFrequencyGrid& fg, const SpatialGrid& sg) {
    if (!phase.is_flat())
        throw std::invalid_argument("evolve_flat: rejected for non-flat phases");
    // S+- have phases (-+ t + x.w) lambda: multiply the densities by
    // e^{-+ i lambda t} and synthesize both with the flat M operators.
    HalfDensity fp = pair.f_plus, fm = pair.f_minus;
    for (std::size_t r = 0; r < fg.n_radial(); ++r) {
        double lt = fg.radial_nodes[r] * t;
        complexd ep(std::cos(lt), -std::sin(lt)); // e^{-i lambda t}
        complexd em(std::cos(lt), std::sin(lt));  // e^{+i lambda t}
        for (std::size_t a = 0; a < fg.n_angular(); ++a) {
            fp.at(r, a) *= ep;
            fm.at(r, a) *= em;
        }
    }
    SpatialField up = apply_halfwave(HalfWaveKind::M, +1, phase, fg, sg, fp);
    SpatialField um = apply_halfwave(HalfWaveKind::M, -1, phase, fg, sg, fm);
    SpatialField out(sg.size());
    for (std::size_t i = 0; i < sg.size(); ++i) out.values[i] = up.values[i] + um.values[i];
    return out;
}

SpatialField evolve_spectral(const InitialData& data, double t, const SpatialGrid& sg) {
    if (!sg.is_lattice()) throw std::invalid_argument("evolve_spectral: lattice grid required");
    int n = sg.lattice_n;
    double L = sg.lattice_extent;
    std::vector<complexd> h0 = data.phi0.values, h1 = data.phi1.values;
    fft3(h0, n, -1);
    fft3(h1, n, -1);
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i) {
        double xi = lattice_frequency(i, n, L);
        for (int j = 0; j < n; ++j) {
            double xj = lattice_frequency(j, n, L);
            for (int k = 0; k < n; ++k, ++idx) {
                double xk = lattice_frequency(k, n, L);
                double m = std::sqrt(xi * xi + xj * xj + xk * xk);
                double c = std::cos(t * m);
                double s = m == 0.0 ? t : std::sin(t * m) / m;
                h0[idx] = c * h0[idx] + s * h1[idx];
            }
        }
    }
    fft3(h0, n, +1);
    SpatialField out;
    out.values = std::move(h0);
    return out;
}

} // namespace rfio
