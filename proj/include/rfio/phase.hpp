#pragma once

#include <array>
#include <string>
#include <vector>

#include "rfio/geometry.hpp"
#include "rfio/grid.hpp"

namespace rfio {

/// Coefficients of the shipped perturbation family
///   u(x,omega) = x.omega + eps * chi(|x|) * g(x.omega, omega),
///   g(s,omega) = g0(s) + sum_i gi(s) omega_i + q(s) (omega.c)^2,
/// with chi a smooth bump equal to 1 on |x| <= 1 and 0 on |x| >= 2, and each
/// of g0, gi, q a short trigonometric polynomial in s.
struct TrigPerturbation {
    // g0(s) = a0c*cos(k0*s) + a0s*sin(k0b*s)
    double a0c = 0.30, k0 = 1.0;
    double a0s = 0.15, k0b = 1.6;
    // gi(s) = bi * trig(ki*s), one term per component
    std::array<double, 3> b{0.15, -0.10, 0.08};
    std::array<double, 3> k{0.7, 1.1, 1.4};
    // q(s) (omega.c)^2 with q(s) = qa*cos(kq*s)
    double qa = 0.08, kq = 0.9;
    Vec3 c{0.0, 0.0, 1.0};

    static TrigPerturbation preset(const std::string& name);
};

/// Full derivative bundle of u(x, omega) at one point, orders up to 2 in x,
/// 2 in omega, and the mixed (2,1) and (1,2) blocks. omega-derivatives are
/// plain euclidean partials of the natural extension off the sphere;
/// spherical (tangential) reductions are applied by the consumers.
struct PhaseDerivs {
    double u = 0.0;
    Vec3 du;                     // du/dx_i
    Mat3 d2u;                    // d2u/dx_i dx_j
    Vec3 dw;                     // du/dw_k
    Mat3 dx_dw;                  // (i,k) = d2u / dx_i dw_k
    Mat3 dw2;                    // (k,l) = d2u / dw_k dw_l
    std::array<Mat3, 3> d2x_dw;  // [k](i,j) = d3u / dx_i dx_j dw_k
    std::array<Mat3, 3> dx_dw2;  // [i](k,l) = d3u / dx_i dw_k dw_l
};

/// Geometric data of the u-foliation at (x, omega): lapse, normal, second
/// fundamental form in a deterministic tangent frame, and the spherical
/// omega-derivatives of u.
struct GeometricJet {
    double u = 0.0;
    Vec3 grad_u;
    double a = 1.0;         // lapse |grad u|^-1
    Vec3 N;                 // unit normal a * grad u
    std::array<std::array<double, 2>, 2> theta{}; // in the frame (e1, e2)
    double tr_theta = 0.0;
    std::array<Vec3, 2> frame; // tangent frame of P_u used for theta
    Vec3 domega_u;          // spherical gradient of u(x,.) as ambient vector
    Mat3 domega2_u;         // covariant spherical Hessian, ambient 3x3
};

class PhaseField {
public:
    enum class Kind { Flat, Perturbed };

    static PhaseField flat();
    static PhaseField perturbed(double epsilon,
                                const TrigPerturbation& p = TrigPerturbation{});

    Kind kind() const { return kind_; }
    bool is_flat() const { return kind_ == Kind::Flat; }
    double epsilon() const { return epsilon_; }
    const TrigPerturbation& perturbation() const { return pert_; }

    // Hot-path evaluations.
    double u(const Vec3& x, const Vec3& omega) const;
    void u_and_grad(const Vec3& x, const Vec3& omega, double& u_out, Vec3& grad_out) const;

    // Full analytic bundle; x_order / w_order in {0,1,2} select how much of
    // the mixed jet is filled (higher blocks are left zero when not asked).
    PhaseDerivs derivs(const Vec3& x, const Vec3& omega, int x_order, int w_order) const;

private:
    PhaseField(Kind k, double eps, TrigPerturbation p)
        : kind_(k), epsilon_(eps), pert_(p) {}

    Kind kind_ = Kind::Flat;
    double epsilon_ = 0.0;
    TrigPerturbation pert_;
};

/// All first/second-order geometry of the foliation; throws on a degenerate
/// gradient (|grad u| < 1e-6).
GeometricJet jet(const PhaseField& phase, const Vec3& x, const Vec3& omega);

struct ChangeOfVariable {
    Vec3 point;         // phi_omega(x) = u(x,omega) omega + d_omega u(x,omega)
    double jacobian_det = 1.0;
    bool degenerate = false; // |det| < 0.1
};

ChangeOfVariable change_of_variable(const PhaseField& phase, const Vec3& omega, const Vec3& x);

struct AssumptionEntry {
    int assumption = 0;       // 1..6
    std::string label;        // what is measured
    double measured = 0.0;
    bool eps_bounded = true;  // target is <= slack*eps (else <= slack*1)
    double threshold = 0.0;
    bool pass = false;
};

struct AssumptionReport {
    double epsilon = 0.0;
    double slack = 0.0;
    std::vector<AssumptionEntry> entries;
    bool all_pass = false;
};

/// Numerical checker for the six phase assumptions. Samples the grids,
/// measures each quantity with the norm it approximates, and compares
/// against slack * eps (or slack for the order-one bounds).
AssumptionReport check_assumptions(const PhaseField& phase, const PolarFrequencyGrid& fgrid,
                                   const SpatialGrid& sgrid, double epsilon,
                                   double slack = 8.0);

} // namespace rfio
