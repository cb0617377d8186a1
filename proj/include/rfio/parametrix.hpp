#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "rfio/geometry.hpp"
#include "rfio/grid.hpp"
#include "rfio/phase.hpp"

namespace rfio {

/// Wave data on Sigma: traces phi|_Sigma = phi0, T(phi)|_Sigma = phi1, with
/// the gradient of phi0 computed spectrally on the lattice (data are
/// band-limited by construction).
struct InitialData {
    SpatialField phi0;
    SpatialField phi1;
    VectorSpatialField grad_phi0;
};

InitialData make_initial_data(SpatialField phi0, SpatialField phi1, const SpatialGrid& sgrid);

struct HalfDensityPair {
    HalfDensity f_plus;
    HalfDensity f_minus;
};

enum class HalfWaveKind { M, Q, P, GradM, MTilde };

/// Scalar half-wave operators M+-, Q+- : phase e^{+-i l u(x, +-w)}, symbol
/// 1 or a(x, +-w)^-1.
SpatialField apply_halfwave(HalfWaveKind kind, int sign, const PhaseField& phase,
                            const PolarFrequencyGrid& fgrid, const SpatialGrid& sgrid,
                            const HalfDensity& f);

/// Vector half-wave operators: P+- (symbol N(x,+-w)), grad M+- (symbol
/// +-i a^-1 N l, the analytic gradient of M+-), and the system block
/// MTilde+- (symbol a^-1 N, no sign prefix).
VectorSpatialField apply_halfwave_vector(HalfWaveKind kind, int sign, const PhaseField& phase,
                                         const PolarFrequencyGrid& fgrid,
                                         const SpatialGrid& sgrid, const HalfDensity& f);

/// Target-space element of the block system: the vector equation paired with
/// the scalar equation.
struct SystemField {
    VectorSpatialField vec;
    SpatialField scalar;

    SystemField() = default;
    SystemField(std::size_t n) : vec(n), scalar(n) {}
};

/// The discретized block operator
///   Lambda(g+, g-) = (M~+ g+ - M~- g-,  Q+ g+ - Q- g-)
/// acting on the lambda-weighted unknowns g+- = lambda f+-, together with its
/// adjoint against the discrete measures and a Tikhonov parameter mu.
class OperatorSystem {
public:
    OperatorSystem(PhaseField phase, PolarFrequencyGrid fgrid, SpatialGrid sgrid, double mu);

    const PhaseField& phase() const { return phase_; }
    const PolarFrequencyGrid& fgrid() const { return fgrid_; }
    const SpatialGrid& sgrid() const { return sgrid_; }
    double mu() const { return mu_; }

    SystemField apply(const HalfDensityPair& g) const;
    HalfDensityPair apply_adjoint(const SystemField& y) const;

    SystemField target_from_data(const InitialData& data) const;

    // inner products / norms of the two spaces
    complexd inner_pair(const HalfDensityPair& a, const HalfDensityPair& b) const;
    complexd inner_target(const SystemField& a, const SystemField& b) const;
    double norm_target(const SystemField& a) const;

private:
    struct NodeTable; // per (x, omega) phase/symbol cache
    PhaseField phase_;
    PolarFrequencyGrid fgrid_;
    SpatialGrid sgrid_;
    double mu_;
    std::shared_ptr<const NodeTable> table_;

    friend struct SystemApplyAccess;
};

OperatorSystem assemble_system(const PhaseField& phase, const PolarFrequencyGrid& fgrid,
                               const SpatialGrid& sgrid, double mu);

struct SolveResult {
    HalfDensityPair pair;      // f+- (unweighted)
    HalfDensityPair weighted;  // g+- = lambda f+-
    double residual = 0.0;     // ||Lambda g - y|| / ||y||
    int iterations = 0;
    bool converged = false;
};

/// CG on the regularized normal equations (Lambda Lambda* + mu) z = y,
/// g = Lambda* z. Non-convergence at max_iter is reported, not thrown.
SolveResult solve_data(const OperatorSystem& system, const InitialData& data, double tol,
                       int max_iter, std::optional<HalfDensityPair> = std::nullopt);

/// (||lambda f+|| + ||lambda f-||) / (||grad phi0|| + ||phi1||)
double estimate_ratio(const SolveResult& solved, const InitialData& data,
                      const OperatorSystem& system);

/// Flat-case time evolution S+ f+(t,.) + S- f-(t,.) with phases -+t + x.w.
SpatialField evolve_flat(const HalfDensityPair& pair, double t, const PhaseField& phase,
                         const PolarFrequencyGrid& fgrid, const SpatialGrid& sgrid);

/// FFT-based exact flat evolution of lattice data (the oracle):
/// phi_hat(t) = cos(t|xi|) phi0_hat + sin(t|xi|)/|xi| phi1_hat.
SpatialField evolve_spectral(const InitialData& data, double t, const SpatialGrid& sgrid);

} // namespace rfio
