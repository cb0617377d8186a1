#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "rfio/dyadic.hpp"
#include "rfio/geometry.hpp"
#include "rfio/grid.hpp"
#include "rfio/phase.hpp"

namespace rfio {

/// Scalar symbol b(x, omega) of the Fourier integral operator.
struct SymbolField {
    enum class Kind { Unit, LapseInverse, LapseInverseMinusOne, Zero, Custom };

    Kind kind = Kind::Unit;
    std::function<complexd(const Vec3&, const Vec3&)> custom;

    static SymbolField unit() { return {Kind::Unit, nullptr}; }
    static SymbolField lapse_inverse() { return {Kind::LapseInverse, nullptr}; }
    static SymbolField lapse_inverse_minus_one() { return {Kind::LapseInverseMinusOne, nullptr}; }
    static SymbolField zero() { return {Kind::Zero, nullptr}; }
    static SymbolField make_custom(std::function<complexd(const Vec3&, const Vec3&)> f) {
        return {Kind::Custom, std::move(f)};
    }

    complexd eval(const PhaseField& phase, const Vec3& x, const Vec3& omega) const;
    bool is_unit() const { return kind == Kind::Unit; }
};

/// Identifies one dyadic piece U_j / U_j^nu / U_j^{nu,k}. j = -1 is the low
/// piece (no angular refinement there).
struct PieceIndex {
    int j = 0;
    std::optional<std::size_t> nu;
    std::optional<int> k;
};

/// Partition-weighted piece norms: gamma^2 integrates |f|^2 against the
/// partition member itself (psi, psi*eta, psi*eta*phi_k), so the Pythagorean
/// identities sum(gamma_j^2) = ||f||^2 hold exactly.
struct PieceSpectrum {
    double total_norm = 0.0;
    std::vector<int> j_values;                       // -1, 0, ..., family j_max
    std::vector<double> gamma_j;                     // aligned with j_values
    std::map<int, std::vector<double>> gamma_j_nu;   // per octave, per patch
    std::map<int, std::vector<double>> gamma_j_nu_k; // optional refined level
};

/// One scan row: the pair, its separation measure, the measured normalized
/// correlation, the predicted envelope, and their ratio.
struct DecayRow {
    std::string a, b;
    double separation = 0.0;
    double measured = 0.0;
    double envelope = 0.0;
    double ratio = 0.0;
};

struct DecayTable {
    std::string mode; // "frequency" or "angle"
    int j = 0;        // octave for angle mode
    double alpha = 0.0;
    double fitted_c = 0.0;
    std::vector<DecayRow> rows;

    // Median of the measured values per separation bin, sorted by separation.
    std::vector<std::pair<double, double>> binned_medians(int bins = 6) const;
};

/// The discretized operator U together with its dyadic decomposition
/// machinery. Immutable after construction; all applications are pure.
class FioOperator {
public:
    FioOperator(PhaseField phase, SymbolField symbol, PolarFrequencyGrid fgrid,
                SpatialGrid sgrid, double delta = 1.0, double alpha = 0.125);

    const PhaseField& phase() const { return phase_; }
    const SymbolField& symbol() const { return symbol_; }
    const PolarFrequencyGrid& fgrid() const { return fgrid_; }
    const SpatialGrid& sgrid() const { return sgrid_; }
    const LittlewoodPaleyFamily& lp() const { return lp_; }
    double delta() const { return delta_; }
    double alpha() const { return alpha_; }
    int family_j_max() const { return lp_.j_max; }

    const AngularPatchFamily& angular_family(int j) const;

    // Sparse per-grid-node values of eta_j^nu, per patch.
    struct PatchNodes {
        std::vector<std::size_t> node;
        std::vector<double> eta;
    };
    const std::vector<PatchNodes>& patch_nodes(int j) const;

private:
    PhaseField phase_;
    SymbolField symbol_;
    PolarFrequencyGrid fgrid_;
    SpatialGrid sgrid_;
    LittlewoodPaleyFamily lp_;
    double delta_;
    double alpha_;
    mutable std::map<int, AngularPatchFamily> families_;
    mutable std::map<int, std::vector<PatchNodes>> patch_nodes_;
    mutable std::mutex cache_mutex_;
};

SpatialField apply(const FioOperator& op, const HalfDensity& f);

SpatialField apply_piece(const FioOperator& op, const HalfDensity& f, int j,
                         std::optional<std::size_t> nu = std::nullopt,
                         std::optional<int> k = std::nullopt,
                         const SecondFrequencyFamily* fam2 = nullptr);

// Adjoint against the discrete measures (lambda^2 w_l w_a in frequency,
// volume weights in space).
HalfDensity apply_adjoint(const FioOperator& op, const SpatialField& F);

PieceSpectrum spectrum(const FioOperator& op, const HalfDensity& f,
                       bool with_refined = false,
                       const SecondFrequencyFamily* fam2 = nullptr);

complexd correlation(const FioOperator& op, const HalfDensity& f, const PieceIndex& a,
                     const PieceIndex& b, const SecondFrequencyFamily* fam2 = nullptr);

enum class ScanMode { Frequency, Angle };

DecayTable orthogonality_scan(const FioOperator& op, const HalfDensity& f, ScanMode mode,
                              std::optional<int> angle_j = std::nullopt);

struct DiagonalResult {
    double norm = 0.0;
    double gamma = 0.0;
    double ratio = 0.0;
    bool skipped = false; // gamma below 1e-12
};

DiagonalResult diagonal_norm(const FioOperator& op, const HalfDensity& f, int j, std::size_t nu);

struct OperatorNormResult {
    double sigma = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Largest singular value of the discretized operator via power iteration on
/// the normal operator, seeded deterministic ensemble of starts.
OperatorNormResult operator_norm(const FioOperator& op, int ensemble_size, int power_iters,
                                 std::uint64_t seed);

struct LowerBoundResult {
    double min_ratio = 0.0;
    bool hypothesis_ok = true; // symbol within the near-unit hypothesis
};

LowerBoundResult lower_bound_ratio(const FioOperator& op, int ensemble_size, std::uint64_t seed,
                                   double baseline);

/// Band-limited complex Gaussian density: independent per node, multiplied by
/// a fixed smooth radial envelope supported inside the grid's octave range.
HalfDensity random_band_limited_density(const PolarFrequencyGrid& g, std::uint64_t seed,
                                        std::uint64_t stream = 0);

/// Smooth deterministic density (C-infinity in xi), used where superfast
/// spatial decay of the synthesized field matters.
HalfDensity smooth_test_density(const PolarFrequencyGrid& g);

} // namespace rfio
