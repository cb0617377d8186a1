#include "rfio/phase.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rfio/fft.hpp"
#include "rfio/smooth.hpp"

namespace rfio {

namespace {

// Radial bump X(rho), rho = |x|^2: exactly 1 for rho <= 1 (|x| <= 1),
// exactly 0 for rho >= 4 (|x| >= 2). Working in rho keeps every derivative
// smooth through x = 0.
struct BumpVals {
    double X, X1, X2; // value, d/drho, d2/drho2
};

BumpVals bump(double rho) {
    double t = (4.0 - rho) / 3.0;
    BumpVals b;
    b.X = smooth_step(t);
    b.X1 = -smooth_step_d1(t) / 3.0;
    b.X2 = smooth_step_d2(t) / 9.0;
    return b;
}

// g(s, omega) and all the partials the jet formulas consume.
struct GVals {
    double G = 0, Gs = 0, Gss = 0, Gsss = 0;
    Vec3 Gw, Gsw, Gssw;
    Mat3 Gww, Gsww;
};

GVals eval_g(const TrigPerturbation& p, double s, const Vec3& w, int w_order) {
    GVals g;
    double c0 = std::cos(p.k0 * s), s0 = std::sin(p.k0 * s);
    double cb = std::cos(p.k0b * s), sb = std::sin(p.k0b * s);
    // g0 and s-derivatives
    double g0 = p.a0c * c0 + p.a0s * sb;
    double g0_1 = -p.a0c * p.k0 * s0 + p.a0s * p.k0b * cb;
    double g0_2 = -p.a0c * p.k0 * p.k0 * c0 - p.a0s * p.k0b * p.k0b * sb;
    double g0_3 = p.a0c * p.k0 * p.k0 * p.k0 * s0 - p.a0s * p.k0b * p.k0b * p.k0b * cb;

    // gi(s): cos, sin, cos pattern
    double gi[3], gi1[3], gi2[3], gi3[3];
    for (int i = 0; i < 3; ++i) {
        double ki = p.k[i];
        double cv = std::cos(ki * s), sv = std::sin(ki * s);
        double f, f1, f2, f3;
        if (i == 1) {
            f = sv; f1 = ki * cv; f2 = -ki * ki * sv; f3 = -ki * ki * ki * cv;
        } else {
            f = cv; f1 = -ki * sv; f2 = -ki * ki * cv; f3 = ki * ki * ki * sv;
        }
        gi[i] = p.b[i] * f;
        gi1[i] = p.b[i] * f1;
        gi2[i] = p.b[i] * f2;
        gi3[i] = p.b[i] * f3;
    }

    double cq = std::cos(p.kq * s), sq = std::sin(p.kq * s);
    double q = p.qa * cq;
    double q1 = -p.qa * p.kq * sq;
    double q2 = -p.qa * p.kq * p.kq * cq;
    double q3 = p.qa * p.kq * p.kq * p.kq * sq;

    double T = dot(w, p.c);
    double T2 = T * T;

    g.G = g0 + gi[0] * w.x + gi[1] * w.y + gi[2] * w.z + q * T2;
    g.Gs = g0_1 + gi1[0] * w.x + gi1[1] * w.y + gi1[2] * w.z + q1 * T2;
    g.Gss = g0_2 + gi2[0] * w.x + gi2[1] * w.y + gi2[2] * w.z + q2 * T2;
    g.Gsss = g0_3 + gi3[0] * w.x + gi3[1] * w.y + gi3[2] * w.z + q3 * T2;

    if (w_order >= 1) {
        for (int k = 0; k < 3; ++k) {
            g.Gw[k] = gi[k] + 2.0 * q * T * p.c[k];
            g.Gsw[k] = gi1[k] + 2.0 * q1 * T * p.c[k];
            g.Gssw[k] = gi2[k] + 2.0 * q2 * T * p.c[k];
        }
    }
    if (w_order >= 2) {
        for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l) {
                g.Gww(k, l) = 2.0 * q * p.c[k] * p.c[l];
                g.Gsww(k, l) = 2.0 * q1 * p.c[k] * p.c[l];
            }
    }
    return g;
}

double kd(int i, int j) { return i == j ? 1.0 : 0.0; }

} // namespace

TrigPerturbation TrigPerturbation::preset(const std::string& name) {
    if (name == "default" || name.empty()) return TrigPerturbation{};
    if (name == "gentle") {
        TrigPerturbation p;
        p.a0c = 0.12;
        p.a0s = 0.05;
        p.b = {0.06, -0.04, 0.03};
        p.qa = 0.03;
        return p;
    }
    if (name == "steep") {
        TrigPerturbation p;
        p.a0c = 1.4;
        p.k0 = 3.0;
        p.a0s = 0.8;
        p.k0b = 4.0;
        p.b = {0.8, -0.6, 0.5};
        p.k = {1.0, 2.0, 3.0};
        p.qa = 0.5;
        return p;
    }
    throw std::invalid_argument("unknown perturbation preset: " + name);
}

PhaseField PhaseField::flat() { return PhaseField(Kind::Flat, 0.0, TrigPerturbation{}); }

PhaseField PhaseField::perturbed(double epsilon, const TrigPerturbation& p) {
    if (epsilon < 0.0) throw std::invalid_argument("PhaseField: epsilon must be >= 0");
    return PhaseField(Kind::Perturbed, epsilon, p);
}

double PhaseField::u(const Vec3& x, const Vec3& omega) const {
    double s = dot(x, omega);
    if (kind_ == Kind::Flat || epsilon_ == 0.0) return s;
    double rho = norm2(x);
    if (rho >= 4.0) return s;
    BumpVals b = bump(rho);
    GVals g = eval_g(pert_, s, omega, 0);
    return s + epsilon_ * b.X * g.G;
}

void PhaseField::u_and_grad(const Vec3& x, const Vec3& omega, double& u_out,
                            Vec3& grad_out) const {
    double s = dot(x, omega);
    if (kind_ == Kind::Flat || epsilon_ == 0.0) {
        u_out = s;
        grad_out = omega;
        return;
    }
    double rho = norm2(x);
    if (rho >= 4.0) {
        u_out = s;
        grad_out = omega;
        return;
    }
    BumpVals b = bump(rho);
    GVals g = eval_g(pert_, s, omega, 0);
    u_out = s + epsilon_ * b.X * g.G;
    grad_out = omega + epsilon_ * (2.0 * b.X1 * g.G * x + b.X * g.Gs * omega);
}

PhaseDerivs PhaseField::derivs(const Vec3& x, const Vec3& w, int x_order, int w_order) const {
    PhaseDerivs d;
    double s = dot(x, w);
    d.u = s;
    d.du = w;
    d.dw = x;
    d.dx_dw = Mat3::identity();
    if (kind_ == Kind::Flat || epsilon_ == 0.0) return d;
    double rho = norm2(x);
    if (rho >= 4.0) return d;

    BumpVals b = bump(rho);
    GVals g = eval_g(pert_, s, w, w_order);
    double e = epsilon_;

    d.u += e * b.X * g.G;
    d.du += e * (2.0 * b.X1 * g.G * x + b.X * g.Gs * w);

    if (x_order >= 2) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                d.d2u(i, j) = e * ((4.0 * b.X2 * x[i] * x[j] + 2.0 * b.X1 * kd(i, j)) * g.G +
                                   2.0 * b.X1 * g.Gs * (x[i] * w[j] + x[j] * w[i]) +
                                   b.X * g.Gss * w[i] * w[j]);
    }
    if (w_order >= 1) {
        for (int k = 0; k < 3; ++k) d.dw[k] += e * b.X * (g.Gs * x[k] + g.Gw[k]);
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k)
                d.dx_dw(i, k) += e * (2.0 * b.X1 * x[i] * (g.Gs * x[k] + g.Gw[k]) +
                                      b.X * (g.Gss * x[k] + g.Gsw[k]) * w[i] +
                                      b.X * g.Gs * kd(i, k));
    }
    if (w_order >= 2) {
        for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l)
                d.dw2(k, l) = e * b.X * (g.Gss * x[k] * x[l] + g.Gsw[l] * x[k] +
                                         g.Gsw[k] * x[l] + g.Gww(k, l));
    }
    if (x_order >= 2 && w_order >= 1) {
        for (int k = 0; k < 3; ++k) {
            double hk = g.Gs * x[k] + g.Gw[k];        // d/dw_k of G through s and omega
            double hk_s = g.Gss * x[k] + g.Gsw[k];    // d/ds of hk
            double hk_ss = g.Gsss * x[k] + g.Gssw[k]; // d2/ds2 of hk
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    d.d2x_dw[k](i, j) =
                        e * ((4.0 * b.X2 * x[i] * x[j] + 2.0 * b.X1 * kd(i, j)) * hk +
                             2.0 * b.X1 * (hk_s * (x[i] * w[j] + x[j] * w[i]) +
                                           g.Gs * (x[i] * kd(j, k) + x[j] * kd(i, k))) +
                             b.X * hk_ss * w[i] * w[j] +
                             b.X * g.Gss * (kd(i, k) * w[j] + kd(j, k) * w[i]));
        }
    }
    if (w_order >= 2 && x_order >= 1) {
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) {
                    double inner = g.Gss * x[k] * x[l] + g.Gsw[l] * x[k] + g.Gsw[k] * x[l] +
                                   g.Gww(k, l);
                    double inner_s = g.Gsss * x[k] * x[l] + g.Gssw[l] * x[k] +
                                     g.Gssw[k] * x[l] + g.Gsww(k, l);
                    d.dx_dw2[i](k, l) =
                        e * (2.0 * b.X1 * x[i] * inner +
                             b.X * (inner_s * w[i] + g.Gss * (kd(i, k) * x[l] + kd(i, l) * x[k]) +
                                    g.Gsw[l] * kd(i, k) + g.Gsw[k] * kd(i, l)));
                }
    }
    return d;
}

GeometricJet jet(const PhaseField& phase, const Vec3& x, const Vec3& omega) {
    PhaseDerivs d = phase.derivs(x, omega, 2, 2);
    GeometricJet j;
    j.u = d.u;
    j.grad_u = d.du;
    double gn = norm(d.du);
    if (gn < 1e-6) throw std::runtime_error("jet: degenerate gradient |grad u| < 1e-6");
    j.a = 1.0 / gn;
    j.N = d.du * j.a;
    j.frame = tangent_frame(j.N);
    // theta_AB = a * e_A^T Hess(u) e_B: the dgrad(a) x grad(u) part of
    // grad(N) vanishes against tangent vectors.
    for (int A = 0; A < 2; ++A)
        for (int B = 0; B < 2; ++B)
            j.theta[A][B] = j.a * dot(j.frame[A], d.d2u * j.frame[B]);
    j.tr_theta = j.theta[0][0] + j.theta[1][1];

    Mat3 proj = Mat3::identity() - Mat3::outer(omega, omega);
    j.domega_u = proj * d.dw;
    // covariant spherical Hessian of the restriction via the extension:
    // P d2 P - (omega . d1) P
    Mat3 pdp;
    Mat3 dw2p;
    for (int i = 0; i < 3; ++i)
        for (int jj = 0; jj < 3; ++jj) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) s += proj(i, k) * d.dw2(k, l) * proj(l, jj);
            dw2p(i, jj) = s;
        }
    double radial = dot(omega, d.dw);
    pdp = dw2p - proj * radial;
    j.domega2_u = pdp;
    return j;
}

ChangeOfVariable change_of_variable(const PhaseField& phase, const Vec3& omega, const Vec3& x) {
    PhaseDerivs d = phase.derivs(x, omega, 1, 1);
    Mat3 proj = Mat3::identity() - Mat3::outer(omega, omega);
    ChangeOfVariable cv;
    cv.point = omega * d.u + proj * d.dw;
    // Jac(k,i) = omega_k du_i + sum_m P(k,m) * d2u/dx_i dw_m
    Mat3 jac;
    for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 3; ++i) {
            double s = omega[k] * d.du[i];
            for (int m = 0; m < 3; ++m) s += proj(k, m) * d.dx_dw(i, m);
            jac(k, i) = s;
        }
    cv.jacobian_det = std::abs(det(jac));
    cv.degenerate = cv.jacobian_det < 0.1;
    return cv;
}

// ---------------------------------------------------------------------------
// Assumption checker
// ---------------------------------------------------------------------------

namespace {

// Lapse and its omega-derivatives from the derivative bundle.
struct LapseJet {
    double a;
    Vec3 grad_a;     // analytic x-gradient
    Vec3 N;
};

LapseJet lapse_jet(const PhaseDerivs& d) {
    LapseJet l;
    double gn = norm(d.du);
    l.a = 1.0 / gn;
    double a3 = l.a * l.a * l.a;
    l.grad_a = (d.d2u * d.du) * (-a3);
    l.N = d.du * l.a;
    return l;
}

// d/dt a(x, w(t)) along tangent v: -a^3 (grad u . d_v grad u)
double dv_a(const PhaseDerivs& d, double a, const Vec3& v) {
    Vec3 dv_grad{0, 0, 0};
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) dv_grad[i] += d.dx_dw(i, k) * v[k];
    return -a * a * a * dot(d.du, dv_grad);
}

Vec3 dv_gradu(const PhaseDerivs& d, const Vec3& v) {
    Vec3 r{0, 0, 0};
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) r[i] += d.dx_dw(i, k) * v[k];
    return r;
}

Vec3 dvw_gradu(const PhaseDerivs& d, const Vec3& v, const Vec3& w) {
    Vec3 r{0, 0, 0};
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l) r[i] += d.dx_dw2[i](k, l) * v[k] * w[l];
    return r;
}

Vec3 dv_N(const PhaseDerivs& d, const Vec3& v) {
    double a = 1.0 / norm(d.du);
    Vec3 dg = dv_gradu(d, v);
    double da = -a * a * a * dot(d.du, dg);
    return d.du * da + dg * a;
}

// Second geodesic derivative of N(x, .) at omega along tangent v:
// d2/dt2 N(x, cos(t) w + sin(t) v) = N_ww(v,v) - N_w(w)   (euclid partials)
Vec3 geo2_N(const PhaseDerivs& d, const Vec3& w, const Vec3& v) {
    double gn2 = norm2(d.du);
    double a = 1.0 / std::sqrt(gn2);
    double a3 = a * a * a;
    Vec3 g1 = dv_gradu(d, v);                 // d_v grad u
    Vec3 g2 = dvw_gradu(d, v, v);             // d_v d_v grad u
    double da = -a3 * dot(d.du, g1);
    // d_v d_v a = -a^3 (g1.g1 + du.g2) + 3 a^5 (du.g1)^2
    double d2a = -a3 * (dot(g1, g1) + dot(d.du, g2)) +
                 3.0 * a3 * a * a * dot(d.du, g1) * dot(d.du, g1);
    Vec3 nvv = d.du * d2a + g1 * (2.0 * da) + g2 * a;
    // radial correction: - d_w N where w is the base point direction
    Vec3 gw = dv_gradu(d, w);
    double daw = -a3 * dot(d.du, gw);
    Vec3 nw = d.du * daw + gw * a;
    return nvv - nw;
}

// Second geodesic derivative of u(x, .) along v (scalar version).
double geo2_u(const PhaseDerivs& d, const Vec3& w, const Vec3& v) {
    double uvv = 0.0;
    for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) uvv += d.dw2(k, l) * v[k] * v[l];
    return uvv - dot(d.dw, w);
}

void add_entry(AssumptionReport& rep, int idx, const std::string& label, double measured,
               bool eps_bounded) {
    AssumptionEntry e;
    e.assumption = idx;
    e.label = label;
    e.measured = measured;
    e.eps_bounded = eps_bounded;
    double base = eps_bounded ? rep.epsilon : 1.0;
    e.threshold = rep.slack * base + 1e-9; // absolute floor for fp noise
    e.pass = measured <= e.threshold;
    rep.entries.push_back(e);
}

} // namespace

AssumptionReport check_assumptions(const PhaseField& phase, const PolarFrequencyGrid& fgrid,
                                   const SpatialGrid& sgrid, double epsilon, double slack) {
    if (sgrid.size() == 0 || fgrid.n_angular() == 0)
        throw std::invalid_argument("check_assumptions: empty grid");
    AssumptionReport rep;
    rep.epsilon = epsilon;
    rep.slack = slack;

    // omega samples: a small spread of grid directions
    std::vector<Vec3> omegas;
    {
        std::size_t count = std::min<std::size_t>(6, fgrid.n_angular());
        std::size_t stride = fgrid.n_angular() / count;
        for (std::size_t i = 0; i < count; ++i) omegas.push_back(fgrid.angular_nodes[i * stride]);
    }
    double h = sgrid.is_lattice() ? sgrid.lattice_spacing() : 0.1;
    double slab = 2.0 * h;

    // ---- Assumption 1: regularity in x --------------------------------
    {
        double m_grad_a = 0.0, m_a1 = 0.0, m_theta = 0.0;
        for (const Vec3& w : omegas) {
            std::vector<double> ga(sgrid.size()), th(sgrid.size());
            double a1 = 0.0;
            for (std::size_t i = 0; i < sgrid.size(); ++i) {
                PhaseDerivs d = phase.derivs(sgrid.points[i], w, 2, 0);
                LapseJet l = lapse_jet(d);
                ga[i] = norm(l.grad_a);
                a1 = std::max(a1, std::abs(l.a - 1.0));
                auto frame = tangent_frame(l.N);
                double t2 = 0.0;
                for (int A = 0; A < 2; ++A)
                    for (int B = 0; B < 2; ++B) {
                        double tAB = l.a * dot(frame[A], d.d2u * frame[B]);
                        t2 += tAB * tAB;
                    }
                th[i] = std::sqrt(t2);
            }
            m_grad_a = std::max(m_grad_a, mixed_norm(ga, sgrid, phase, w, NormExponent::Infinity,
                                                     NormExponent::Two, slab));
            m_theta = std::max(m_theta, mixed_norm(th, sgrid, phase, w, NormExponent::Infinity,
                                                   NormExponent::Two, slab));
            m_a1 = std::max(m_a1, a1);
        }
        add_entry(rep, 1, "||grad a||_LinfuL2", m_grad_a, true);
        add_entry(rep, 1, "||a-1||_Linf", m_a1, true);
        add_entry(rep, 1, "||theta||_LinfuL2", m_theta, true);
    }

    // ---- Assumption 2: regularity in omega -----------------------------
    {
        double m_dwa = 0.0, m_grad_dwa = 0.0, m_dwN = 0.0, m_grad_dw2N = 0.0, m_dw3u = 0.0;
        const double fd = 1e-3;
        for (const Vec3& w : omegas) {
            auto wframe = tangent_frame(w);
            std::vector<double> f_dwa(sgrid.size()), f_gdwa(sgrid.size()), f_g2N(sgrid.size());
            for (std::size_t i = 0; i < sgrid.size(); ++i) {
                const Vec3& x = sgrid.points[i];
                PhaseDerivs d = phase.derivs(x, w, 2, 2);
                double a = 1.0 / norm(d.du);
                double s2 = 0.0;
                for (int A = 0; A < 2; ++A) {
                    double v = dv_a(d, a, wframe[A]);
                    s2 += v * v;
                }
                f_dwa[i] = std::sqrt(s2);
                m_dwN = std::max(m_dwN, norm(dv_N(d, wframe[0])));
                m_dwN = std::max(m_dwN, norm(dv_N(d, wframe[1])));

                // x-gradient of d_omega a: analytic via the (2,1) block
                double g2 = 0.0;
                for (int A = 0; A < 2; ++A) {
                    const Vec3& v = wframe[A];
                    Vec3 dvg = dv_gradu(d, v);
                    double a3 = a * a * a;
                    Vec3 grad_a = (d.d2u * d.du) * (-a3);
                    for (int ii = 0; ii < 3; ++ii) {
                        // d_i d_v a = -3a^2 (d_i a)(du . dvg)/a ... expanded:
                        double t1 = -3.0 * a * a * grad_a[ii] * dot(d.du, dvg);
                        double t2 = 0.0;
                        for (int jj = 0; jj < 3; ++jj) {
                            double dv_d2 = 0.0;
                            for (int kk = 0; kk < 3; ++kk)
                                dv_d2 += d.d2x_dw[kk](ii, jj) * v[kk];
                            t2 += d.d2u(ii, jj) * dvg[jj] + d.du[jj] * dv_d2;
                        }
                        double val = t1 - a3 * t2;
                        g2 += val * val;
                    }
                }
                f_gdwa[i] = std::sqrt(g2);

                // grad of the geodesic second derivative of N: FD in x of the
                // analytic second omega-derivative
                if (!phase.is_flat() && norm2(x) < 6.25) {
                    double acc = 0.0;
                    for (int A = 0; A < 2; ++A) {
                        const Vec3& v = wframe[A];
                        for (int c = 0; c < 3; ++c) {
                            Vec3 dx{0, 0, 0};
                            dx[c] = fd;
                            PhaseDerivs dp = phase.derivs(x + dx, w, 1, 2);
                            PhaseDerivs dm = phase.derivs(x - dx, w, 1, 2);
                            Vec3 diff = (geo2_N(dp, w, v) - geo2_N(dm, w, v)) / (2.0 * fd);
                            acc += norm2(diff);
                        }
                    }
                    f_g2N[i] = std::sqrt(acc);
                } else {
                    f_g2N[i] = 0.0;
                }

                // third omega-derivative of u, restricted to |x| <= 2
                if (norm2(x) <= 4.0) {
                    for (int A = 0; A < 2; ++A) {
                        const Vec3& v = wframe[A];
                        Vec3 wp = normalized(w * std::cos(fd) + v * std::sin(fd));
                        Vec3 wm = normalized(w * std::cos(fd) - v * std::sin(fd));
                        PhaseDerivs dp = phase.derivs(x, wp, 0, 2);
                        PhaseDerivs dm = phase.derivs(x, wm, 0, 2);
                        // transport v along the geodesic
                        Vec3 vp = v * std::cos(fd) - w * std::sin(fd);
                        Vec3 vm = v * std::cos(fd) + w * std::sin(fd);
                        double g3 = (geo2_u(dp, wp, vp) - geo2_u(dm, wm, vm)) / (2.0 * fd);
                        m_dw3u = std::max(m_dw3u, std::abs(g3));
                    }
                }
            }
            std::vector<double> w2(sgrid.size());
            for (std::size_t i = 0; i < sgrid.size(); ++i)
                w2[i] = f_dwa[i] * f_dwa[i] * sgrid.weights[i];
            double l2 = 0.0, l2g = 0.0, l2n = 0.0;
            for (std::size_t i = 0; i < sgrid.size(); ++i) {
                l2 += f_dwa[i] * f_dwa[i] * sgrid.weights[i];
                l2g += f_gdwa[i] * f_gdwa[i] * sgrid.weights[i];
                l2n += f_g2N[i] * f_g2N[i] * sgrid.weights[i];
            }
            m_dwa = std::max(m_dwa, std::sqrt(l2));
            m_grad_dwa = std::max(m_grad_dwa, std::sqrt(l2g));
            m_grad_dw2N = std::max(m_grad_dw2N, std::sqrt(l2n));
        }
        add_entry(rep, 2, "||dw a||_L2", m_dwa, true);
        add_entry(rep, 2, "||grad dw a||_L2", m_grad_dwa, true);
        add_entry(rep, 2, "||dw N||_Linf", m_dwN, false);
        add_entry(rep, 2, "||grad dw2 N||_L2", m_grad_dw2N, true);
        add_entry(rep, 2, "||dw3 u||_Linf_loc", m_dw3u, false);

        // bi-Lipschitz comparison of N(x, .) with the identity on S^2
        double m_bilip = 0.0;
        double eps_floor = std::max(epsilon, 1e-12);
        auto normal_at = [&phase](const Vec3& x, const Vec3& w) {
            double uv;
            Vec3 grad;
            phase.u_and_grad(x, w, uv, grad);
            return grad / norm(grad);
        };
        std::size_t stride = std::max<std::size_t>(1, sgrid.size() / 512);
        for (std::size_t i = 0; i < sgrid.size(); i += stride) {
            const Vec3& x = sgrid.points[i];
            for (std::size_t p = 0; p + 1 < omegas.size(); ++p)
                for (std::size_t q = p + 1; q < omegas.size(); ++q) {
                    Vec3 n1 = normal_at(x, omegas[p]);
                    Vec3 n2 = normal_at(x, omegas[q]);
                    double dn = norm(n1 - n2);
                    double dw = norm(omegas[p] - omegas[q]);
                    if (dw < 1e-9) continue;
                    double r = std::abs(dn - dw) / ((eps_floor + dw) * dw);
                    m_bilip = std::max(m_bilip, r);
                }
        }
        add_entry(rep, 2, "bi-Lipschitz residual", m_bilip, false);
    }

    // ---- Assumption 3: frequency split of grad_N a ----------------------
    if (sgrid.is_lattice()) {
        int n = sgrid.lattice_n;
        double L = sgrid.lattice_extent;
        double m_high = 0.0, m_mid = 0.0, m_low = 0.0;
        std::vector<Vec3> om3(omegas.begin(), omegas.begin() + std::min<std::size_t>(3, omegas.size()));
        for (const Vec3& w : om3) {
            SpatialField v(sgrid.size());
            for (std::size_t i = 0; i < sgrid.size(); ++i) {
                PhaseDerivs d = phase.derivs(sgrid.points[i], w, 2, 0);
                LapseJet l = lapse_jet(d);
                v.values[i] = dot(l.N, l.grad_a);
            }
            int j_top = std::min(4, static_cast<int>(std::log2(3.141592653589793 * n / (2.0 * L))) - 1);
            for (int j = 0; j <= j_top; ++j) {
                SpatialField a2 = lowpass(v, n, L, j);
                SpatialField a1(sgrid.size());
                for (std::size_t i = 0; i < sgrid.size(); ++i)
                    a1.values[i] = v.values[i] - a2.values[i];
                double n_a1 = spatial_l2_norm(a1, sgrid);
                std::vector<double> a2r(sgrid.size());
                for (std::size_t i = 0; i < sgrid.size(); ++i)
                    a2r[i] = std::abs(a2.values[i]);
                double n_a2_mid = mixed_norm(a2r, sgrid, phase, w, NormExponent::Infinity,
                                             NormExponent::Two, slab);
                VectorSpatialField ga2 = spectral_gradient(a2, n, L);
                std::vector<double> gna(sgrid.size());
                for (std::size_t i = 0; i < sgrid.size(); ++i) {
                    double uv;
                    Vec3 grad;
                    phase.u_and_grad(sgrid.points[i], w, uv, grad);
                    Vec3 nn = grad / norm(grad);
                    complexd gn = ga2.x[i] * nn.x + ga2.y[i] * nn.y + ga2.z[i] * nn.z;
                    gna[i] = std::abs(gn);
                }
                double n_grad_a2 = 0.0;
                for (std::size_t i = 0; i < sgrid.size(); ++i)
                    n_grad_a2 += gna[i] * gna[i] * sgrid.weights[i];
                n_grad_a2 = std::sqrt(n_grad_a2);
                double n_a2_inf = mixed_norm(a2r, sgrid, phase, w, NormExponent::Two,
                                             NormExponent::Infinity, slab);
                m_high = std::max(m_high, std::exp2(0.5 * j) * n_a1);
                m_mid = std::max(m_mid, n_a2_mid);
                m_low = std::max(m_low, std::exp2(-0.5 * j) * (n_grad_a2 + n_a2_inf));
            }
        }
        add_entry(rep, 3, "2^{j/2}||a1_j||_L2", m_high, true);
        add_entry(rep, 3, "||a2_j||_LinfuL2", m_mid, true);
        add_entry(rep, 3, "2^{-j/2}(||grad_N a2_j||+||a2_j||_L2uLinf)", m_low, true);
    } else {
        double m = 0.0;
        for (const Vec3& w : omegas) {
            double l2 = 0.0;
            for (std::size_t i = 0; i < sgrid.size(); ++i) {
                PhaseDerivs d = phase.derivs(sgrid.points[i], w, 2, 0);
                LapseJet l = lapse_jet(d);
                double v = dot(l.N, l.grad_a);
                l2 += v * v * sgrid.weights[i];
            }
            m = std::max(m, std::sqrt(l2));
        }
        add_entry(rep, 3, "||grad_N a||_L2 (coarse split, non-lattice)", m, true);
    }

    // ---- Assumption 4: global change of variable ------------------------
    {
        double m_det = 0.0;
        bool any_degenerate = false;
        std::size_t stride = std::max<std::size_t>(1, sgrid.size() / 4096);
        for (const Vec3& w : omegas)
            for (std::size_t i = 0; i < sgrid.size(); i += stride) {
                ChangeOfVariable cv = change_of_variable(phase, w, sgrid.points[i]);
                m_det = std::max(m_det, std::abs(cv.jacobian_det - 1.0));
                any_degenerate = any_degenerate || cv.degenerate;
            }
        add_entry(rep, 4, "max ||det Jac phi_omega| - 1|", m_det, true);
        if (any_degenerate) rep.entries.back().pass = false;
    }

    // ---- Assumption 5: comparison with a phase linear in omega ----------
    {
        double m0 = 0.0, m1 = 0.0, m2 = 0.0;
        std::size_t stride = std::max<std::size_t>(1, sgrid.size() / 1024);
        for (std::size_t pi = 0; pi < omegas.size(); ++pi)
            for (std::size_t qi = 0; qi < omegas.size(); ++qi) {
                if (pi == qi) continue;
                const Vec3& w = omegas[pi];
                const Vec3& nu = omegas[qi];
                double sep = norm(w - nu);
                if (sep > 0.8 || sep < 1e-9) continue;
                for (std::size_t i = 0; i < sgrid.size(); i += stride) {
                    const Vec3& x = sgrid.points[i];
                    ChangeOfVariable cv = change_of_variable(phase, nu, x);
                    PhaseDerivs d = phase.derivs(x, w, 0, 2);
                    Mat3 proj = Mat3::identity() - Mat3::outer(w, w);
                    double r0 = std::abs(d.u - dot(cv.point, w)) / (sep * sep);
                    Vec3 du_s = proj * d.dw;
                    Vec3 dlin = proj * cv.point;
                    double r1 = norm(du_s - dlin) / sep;
                    // spherical Hessians of both phases at omega
                    Mat3 h_u;
                    for (int a = 0; a < 3; ++a)
                        for (int bq = 0; bq < 3; ++bq) {
                            double s = 0.0;
                            for (int k = 0; k < 3; ++k)
                                for (int l = 0; l < 3; ++l)
                                    s += proj(a, k) * d.dw2(k, l) * proj(l, bq);
                            h_u(a, bq) = s;
                        }
                    h_u = h_u - proj * dot(w, d.dw);
                    Mat3 h_lin = proj * (-dot(w, cv.point));
                    double r2 = frobenius(h_u - h_lin);
                    m0 = std::max(m0, r0);
                    m1 = std::max(m1, r1);
                    m2 = std::max(m2, r2);
                }
            }
        add_entry(rep, 5, "|u - phi_nu.omega| / |omega-nu|^2", m0, true);
        add_entry(rep, 5, "|dw u - dw(phi_nu.omega)| / |omega-nu|", m1, true);
        add_entry(rep, 5, "|dw2 u - dw2(phi_nu.omega)|", m2, true);
    }

    // ---- Assumption 6: N(x, -omega) vs -N(x, omega) ---------------------
    {
        double m = 0.0;
        auto normal_at = [&phase](const Vec3& x, const Vec3& w) {
            double uv;
            Vec3 grad;
            phase.u_and_grad(x, w, uv, grad);
            return grad / norm(grad);
        };
        std::size_t stride = std::max<std::size_t>(1, sgrid.size() / 4096);
        for (const Vec3& w : omegas)
            for (std::size_t i = 0; i < sgrid.size(); i += stride) {
                Vec3 n1 = normal_at(sgrid.points[i], w);
                Vec3 n2 = normal_at(sgrid.points[i], -w);
                m = std::max(m, norm(n1 + n2));
            }
        add_entry(rep, 6, "max |N(x,omega) + N(x,-omega)|", m, true);
    }

    rep.all_pass = true;
    for (const auto& e : rep.entries) rep.all_pass = rep.all_pass && e.pass;
    return rep;
}

} // namespace rfio
