#include "rfio/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rfio/parallel.hpp"
#include "rfio/rng.hpp"
#include "rfio/smooth.hpp"

namespace rfio {

KernelQuadrature make_kernel_quadrature(const PolarFrequencyGrid& grid,
                                        const AngularPatchFamily& family, std::size_t nu,
                                        int radial_upsample) {
    if (nu >= family.size()) throw std::invalid_argument("make_kernel_quadrature: bad patch");
    KernelQuadrature q;
    q.j = family.j;
    q.nu = nu;
    q.center = family.centers[nu];

    // one octave [2^{j-1}, 2^{j+1}], log-spaced, grid resolution x upsample
    int per_octave = static_cast<int>(grid.n_radial()) /
                     std::max(1, grid.j_max - grid.j_min + 1);
    int n = std::max(8, per_octave * radial_upsample) * 2; // two dyadic halves
    double t0 = q.j - 1.0, t1 = q.j + 1.0;
    std::vector<double> nodes(n);
    for (int i = 0; i < n; ++i) nodes[i] = std::exp2(t0 + (t1 - t0) * i / (n - 1));
    for (int i = 0; i < n; ++i) {
        double lo = i == 0 ? nodes[0] : nodes[i - 1];
        double hi = i == n - 1 ? nodes[n - 1] : nodes[i + 1];
        double w = 0.5 * (hi - lo) * lp_psi(std::exp2(-q.j) * nodes[i]);
        if (w == 0.0 && i != 0 && i != n - 1) continue;
        q.lambda.push_back(nodes[i]);
        q.lambda_w.push_back(w);
    }

    // patch nodes with normalized eta values
    for (std::size_t a = 0; a < grid.n_angular(); ++a) {
        const Vec3& w = grid.angular_nodes[a];
        double c = family.cap(nu, w);
        if (c == 0.0) continue;
        q.omega.push_back(w);
        q.omega_w.push_back(grid.angular_weights[a] * c / family.cap_sum(w));
    }
    return q;
}

complexd evaluate_kernel(const PhaseField& phase, const KernelQuadrature& quad, const Vec3& x,
                         const Vec3& y) {
    complexd acc{};
    for (std::size_t a = 0; a < quad.omega.size(); ++a) {
        double du = phase.u(x, quad.omega[a]) - phase.u(y, quad.omega[a]);
        complexd inner{};
        for (std::size_t r = 0; r < quad.lambda.size(); ++r) {
            double ph = quad.lambda[r] * du;
            double lw = quad.lambda[r] * quad.lambda[r] * quad.lambda_w[r];
            inner += complexd(std::cos(ph), std::sin(ph)) * lw;
        }
        acc += inner * quad.omega_w[a];
    }
    return acc;
}

double decay_envelope(const PhaseField& phase, int j, const Vec3& nu, const Vec3& x,
                      const Vec3& y) {
    PhaseDerivs dx = phase.derivs(x, nu, 0, 1);
    PhaseDerivs dy = phase.derivs(y, nu, 0, 1);
    Mat3 proj = Mat3::identity() - Mat3::outer(nu, nu);
    double du = dx.u - dy.u;
    Vec3 ddw = proj * (dx.dw - dy.dw);
    double two_j = std::exp2(j);
    double two_jh = std::exp2(0.5 * j);
    double arg_u = two_j * std::abs(du);
    double arg_w = two_jh * norm(ddw);
    double p1 = 1.0 + std::abs(arg_u - arg_w);
    double p2 = 1.0 + arg_w;
    return two_j / (p1 * p1) * two_j / (p2 * p2 * p2);
}

DecayScanReport decay_ratio_scan(const KernelProbe& probe, const PhaseField& phase,
                                 const PolarFrequencyGrid& grid,
                                 const AngularPatchFamily& family) {
    KernelQuadrature quad = make_kernel_quadrature(grid, family, probe.nu);
    const Vec3& nu = quad.center;
    Mat3 proj = Mat3::identity() - Mat3::outer(nu, nu);
    auto frame = tangent_frame(nu);

    DecayScanReport rep;
    rep.j = probe.j;
    rep.shells_u = probe.shells_u;
    rep.shells_dw = probe.shells_dw;
    rep.stratum_max.assign(static_cast<std::size_t>(probe.shells_u) * probe.shells_dw, 0.0);

    double two_j = std::exp2(probe.j);
    double two_jh = std::exp2(0.5 * probe.j);

    Rng rng = Rng::sub(probe.seed, 23, (static_cast<std::uint64_t>(probe.j) << 16) + probe.nu);
    std::vector<KernelPair> pairs;
    for (int su = 0; su < probe.shells_u; ++su)
        for (int sw = 0; sw < probe.shells_dw; ++sw)
            for (int p = 0; p < probe.pairs_per_shell; ++p) {
                // target arguments: log shells spanning ~3 decades
                double tu = su == 0 ? 0.0 : std::pow(10.0, -1.0 + (su - 1) * 3.0 / (probe.shells_u - 1));
                double tw = sw == 0 ? 0.0 : std::pow(10.0, -1.0 + (sw - 1) * 3.0 / (probe.shells_dw - 1));
                tu *= rng.uniform(0.7, 1.3);
                tw *= rng.uniform(0.7, 1.3);
                Vec3 x{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
                x *= probe.base_radius;
                double phi = rng.uniform(0.0, 6.283185307179586);
                Vec3 tdir = frame[0] * std::cos(phi) + frame[1] * std::sin(phi);
                Vec3 y = x + nu * (tu / two_j) + tdir * (tw / two_jh);
                KernelPair kp;
                kp.x = x;
                kp.y = y;
                PhaseDerivs dx = phase.derivs(x, nu, 0, 1);
                PhaseDerivs dy = phase.derivs(y, nu, 0, 1);
                kp.arg_u = two_j * std::abs(dx.u - dy.u);
                kp.arg_dw = two_jh * norm(proj * (dx.dw - dy.dw));
                kp.kernel_abs = std::abs(evaluate_kernel(phase, quad, x, y));
                kp.envelope = decay_envelope(phase, probe.j, nu, x, y);
                kp.ratio = kp.kernel_abs / kp.envelope;
                kp.stratum_u = su;
                kp.stratum_dw = sw;
                pairs.push_back(kp);
            }
    rep.pairs = std::move(pairs);
    for (const auto& kp : rep.pairs) {
        rep.sup_ratio = std::max(rep.sup_ratio, kp.ratio);
        double& slot = rep.stratum_max[kp.stratum_u * probe.shells_dw + kp.stratum_dw];
        slot = std::max(slot, kp.ratio);
    }
    return rep;
}

double schur_row_sum(const PhaseField& phase, const KernelQuadrature& quad, const Vec3& x,
                     const SpatialGrid& sgrid) {
    std::vector<double> terms(sgrid.size());
    parallel_for(sgrid.size(), [&](std::size_t i) {
        terms[i] = std::abs(evaluate_kernel(phase, quad, x, sgrid.points[i])) * sgrid.weights[i];
    });
    return pairwise_sum(terms);
}

ComparisonGapResult flat_comparison_gap(const FioOperator& op, const HalfDensity& f, int j,
                                        std::size_t nu) {
    if (!op.symbol().is_unit())
        throw std::invalid_argument("flat_comparison_gap: op must carry the unit symbol");
    ComparisonGapResult res;
    PieceSpectrum sp = spectrum(op, f);
    res.gamma = sp.gamma_j_nu.at(j).at(nu);
    if (res.gamma < 1e-12) {
        res.skipped = true;
        return res;
    }
    SpatialField s_piece = apply_piece(op, f, j, nu);

    // S~ = flat synthesis of (psi eta f) evaluated at phi_nu(x): reuse the
    // piece application with the flat phase on the mapped points.
    const Vec3& center = op.angular_family(j).centers[nu];
    std::vector<Vec3> mapped(op.sgrid().size());
    for (std::size_t i = 0; i < op.sgrid().size(); ++i)
        mapped[i] = change_of_variable(op.phase(), center, op.sgrid().points[i]).point;
    SpatialGrid mapped_grid = SpatialGrid::scattered(std::move(mapped), op.sgrid().weights);
    FioOperator flat_op(PhaseField::flat(), SymbolField::unit(), op.fgrid(), mapped_grid,
                        op.delta(), op.alpha());
    SpatialField s_tilde = apply_piece(flat_op, f, j, nu);

    std::vector<double> terms(op.sgrid().size());
    for (std::size_t i = 0; i < op.sgrid().size(); ++i)
        terms[i] = std::norm(s_piece.values[i] - s_tilde.values[i]) * op.sgrid().weights[i];
    res.gap = std::sqrt(pairwise_sum(terms)) / res.gamma;
    return res;
}

} // namespace rfio
