#include "rfio/fio.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rfio/parallel.hpp"
#include "rfio/rng.hpp"
#include "rfio/smooth.hpp"

namespace rfio {

complexd SymbolField::eval(const PhaseField& phase, const Vec3& x, const Vec3& omega) const {
    switch (kind) {
        case Kind::Unit:
            return {1.0, 0.0};
        case Kind::Zero:
            return {0.0, 0.0};
        case Kind::LapseInverse:
        case Kind::LapseInverseMinusOne: {
            double u, g2;
            Vec3 grad;
            phase.u_and_grad(x, omega, u, grad);
            g2 = norm(grad); // a^-1 = |grad u|
            return {kind == Kind::LapseInverse ? g2 : g2 - 1.0, 0.0};
        }
        case Kind::Custom:
            return custom(x, omega);
    }
    return {0.0, 0.0};
}

FioOperator::FioOperator(PhaseField phase, SymbolField symbol, PolarFrequencyGrid fgrid,
                         SpatialGrid sgrid, double delta, double alpha)
    : phase_(std::move(phase)),
      symbol_(std::move(symbol)),
      fgrid_(std::move(fgrid)),
      sgrid_(std::move(sgrid)),
      delta_(delta),
      alpha_(alpha) {
    if (delta_ <= 0.0 || delta_ > 1.0) throw std::invalid_argument("FioOperator: delta in (0,1]");
    // the family covers the full grid range; the top octave j_max+1 catches
    // the nodes in [2^j_max, 2^(j_max+1)]
    lp_ = build_lp_family(std::max(0, fgrid_.j_max + 1));
}

const AngularPatchFamily& FioOperator::angular_family(int j) const {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = families_.find(j);
    if (it == families_.end())
        it = families_.emplace(j, build_angular_family(j, delta_)).first;
    return it->second;
}

const std::vector<FioOperator::PatchNodes>& FioOperator::patch_nodes(int j) const {
    angular_family(j); // make sure the family exists
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = patch_nodes_.find(j);
    if (it != patch_nodes_.end()) return it->second;
    const AngularPatchFamily& fam = families_.at(j);
    std::vector<PatchNodes> lists(fam.size());
    for (std::size_t a = 0; a < fgrid_.n_angular(); ++a) {
        const Vec3& w = fgrid_.angular_nodes[a];
        auto touching = fam.touching(w);
        if (touching.empty()) continue;
        double denom = 0.0;
        std::vector<double> caps(touching.size());
        for (std::size_t t = 0; t < touching.size(); ++t) {
            caps[t] = fam.cap(touching[t], w);
            denom += caps[t];
        }
        for (std::size_t t = 0; t < touching.size(); ++t) {
            if (caps[t] == 0.0) continue;
            lists[touching[t]].node.push_back(a);
            lists[touching[t]].eta.push_back(caps[t] / denom);
        }
    }
    return patch_nodes_.emplace(j, std::move(lists)).first->second;
}

namespace {

// Weighted density table c[r][a] = f * lambda^2 w_r w_a, with optional radial
// and angular multipliers folded in, plus the active index lists.
struct WeightedDensity {
    std::size_t nr, na;
    std::vector<complexd> c;
    std::size_t r_lo, r_hi;                 // active radial range [r_lo, r_hi)
    std::vector<std::size_t> active_nodes;  // angular nodes with any mass

    complexd at(std::size_t r, std::size_t a) const { return c[r * na + a]; }
};

WeightedDensity weight_density(const PolarFrequencyGrid& g, const HalfDensity& f,
                               const std::vector<double>* radial_mult,
                               const std::vector<double>* angular_mult) {
    WeightedDensity wd;
    wd.nr = g.n_radial();
    wd.na = g.n_angular();
    wd.c.assign(wd.nr * wd.na, complexd{});
    wd.r_lo = wd.nr;
    wd.r_hi = 0;
    std::vector<char> node_used(wd.na, 0);
    for (std::size_t r = 0; r < wd.nr; ++r) {
        double lr = g.radial_nodes[r];
        double wr = lr * lr * g.radial_weights[r];
        if (radial_mult) wr *= (*radial_mult)[r];
        if (wr == 0.0) continue;
        bool row_used = false;
        for (std::size_t a = 0; a < wd.na; ++a) {
            double wa = g.angular_weights[a];
            if (angular_mult) {
                wa *= (*angular_mult)[a];
                if (wa == 0.0) continue;
            }
            complexd v = f.at(r, a) * (wr * wa);
            if (v != complexd{}) {
                wd.c[r * wd.na + a] = v;
                node_used[a] = 1;
                row_used = true;
            }
        }
        if (row_used) {
            wd.r_lo = std::min(wd.r_lo, r);
            wd.r_hi = std::max(wd.r_hi, r + 1);
        }
    }
    if (wd.r_lo >= wd.r_hi) {
        wd.r_lo = 0;
        wd.r_hi = 0;
    }
    for (std::size_t a = 0; a < wd.na; ++a)
        if (node_used[a]) wd.active_nodes.push_back(a);
    return wd;
}

SpatialField apply_core(const FioOperator& op, const WeightedDensity& wd) {
    const SpatialGrid& sg = op.sgrid();
    const PolarFrequencyGrid& fg = op.fgrid();
    SpatialField out(sg.size());
    if (wd.r_lo >= wd.r_hi || wd.active_nodes.empty()) return out;
    const bool unit = op.symbol().is_unit();
    parallel_for(sg.size(), [&](std::size_t i) {
        const Vec3& x = sg.points[i];
        complexd acc{};
        for (std::size_t a : wd.active_nodes) {
            const Vec3& w = fg.angular_nodes[a];
            double u = op.phase().u(x, w);
            complexd inner{};
            for (std::size_t r = wd.r_lo; r < wd.r_hi; ++r) {
                complexd cv = wd.at(r, a);
                if (cv == complexd{}) continue;
                double ph = fg.radial_nodes[r] * u;
                inner += complexd(std::cos(ph), std::sin(ph)) * cv;
            }
            if (!unit) inner *= op.symbol().eval(op.phase(), x, w);
            acc += inner;
        }
        out.values[i] = acc;
    });
    return out;
}

} // namespace

SpatialField apply(const FioOperator& op, const HalfDensity& f) {
    if (!f.matches(op.fgrid())) throw std::invalid_argument("apply: shape mismatch");
    WeightedDensity wd = weight_density(op.fgrid(), f, nullptr, nullptr);
    return apply_core(op, wd);
}

SpatialField apply_piece(const FioOperator& op, const HalfDensity& f, int j,
                         std::optional<std::size_t> nu, std::optional<int> k,
                         const SecondFrequencyFamily* fam2) {
    if (!f.matches(op.fgrid())) throw std::invalid_argument("apply_piece: shape mismatch");
    if (j < -1 || j > op.family_j_max()) throw std::invalid_argument("apply_piece: bad octave j");
    const PolarFrequencyGrid& fg = op.fgrid();

    std::vector<double> rmul(fg.n_radial());
    for (std::size_t r = 0; r < fg.n_radial(); ++r)
        rmul[r] = op.lp().band_j(j, fg.radial_nodes[r]);
    if (k) {
        if (!fam2) throw std::invalid_argument("apply_piece: k given without a refined family");
        if (fam2->j != j) throw std::invalid_argument("apply_piece: refined family octave mismatch");
        if (*k < 0 || *k >= fam2->count)
            throw std::invalid_argument("apply_piece: bad refined index k");
        for (std::size_t r = 0; r < fg.n_radial(); ++r)
            rmul[r] *= fam2->bump(*k, fg.radial_nodes[r]);
    }

    std::vector<double> amul;
    if (nu) {
        if (j < 0) throw std::invalid_argument("apply_piece: the low piece has no patches");
        const auto& lists = op.patch_nodes(j);
        if (*nu >= lists.size()) throw std::invalid_argument("apply_piece: bad patch index");
        amul.assign(fg.n_angular(), 0.0);
        const auto& pl = lists[*nu];
        for (std::size_t t = 0; t < pl.node.size(); ++t) amul[pl.node[t]] = pl.eta[t];
    }
    WeightedDensity wd = weight_density(fg, f, &rmul, nu ? &amul : nullptr);
    return apply_core(op, wd);
}

HalfDensity apply_adjoint(const FioOperator& op, const SpatialField& F) {
    const SpatialGrid& sg = op.sgrid();
    const PolarFrequencyGrid& fg = op.fgrid();
    if (F.size() != sg.size()) throw std::invalid_argument("apply_adjoint: shape mismatch");
    HalfDensity out(fg);
    const bool unit = op.symbol().is_unit();
    parallel_for(fg.n_angular(), [&](std::size_t a) {
        const Vec3& w = fg.angular_nodes[a];
        std::vector<complexd> col(fg.n_radial(), complexd{});
        for (std::size_t i = 0; i < sg.size(); ++i) {
            const Vec3& x = sg.points[i];
            complexd fw = F.values[i] * sg.weights[i];
            if (!unit) fw *= std::conj(op.symbol().eval(op.phase(), x, w));
            double u = op.phase().u(x, w);
            for (std::size_t r = 0; r < fg.n_radial(); ++r) {
                double ph = fg.radial_nodes[r] * u;
                col[r] += complexd(std::cos(ph), -std::sin(ph)) * fw;
            }
        }
        for (std::size_t r = 0; r < fg.n_radial(); ++r) out.at(r, a) = col[r];
    });
    return out;
}

namespace {

double weighted_mass(const PolarFrequencyGrid& g, const HalfDensity& f,
                     const std::vector<double>& rmul, const std::vector<double>* amul) {
    std::vector<double> terms(g.n_radial(), 0.0);
    for (std::size_t r = 0; r < g.n_radial(); ++r) {
        if (rmul[r] == 0.0) continue;
        double lr = g.radial_nodes[r];
        double s = 0.0;
        for (std::size_t a = 0; a < g.n_angular(); ++a) {
            double wa = g.angular_weights[a];
            if (amul) {
                wa *= (*amul)[a];
                if (wa == 0.0) continue;
            }
            s += std::norm(f.at(r, a)) * wa;
        }
        terms[r] = s * lr * lr * g.radial_weights[r] * rmul[r];
    }
    return pairwise_sum(terms);
}

} // namespace

PieceSpectrum spectrum(const FioOperator& op, const HalfDensity& f, bool with_refined,
                       const SecondFrequencyFamily* fam2) {
    if (!f.matches(op.fgrid())) throw std::invalid_argument("spectrum: shape mismatch");
    const PolarFrequencyGrid& fg = op.fgrid();
    PieceSpectrum sp;
    sp.total_norm = polar_l2_norm(f, fg);
    for (int j = -1; j <= op.family_j_max(); ++j) {
        std::vector<double> rmul(fg.n_radial());
        for (std::size_t r = 0; r < fg.n_radial(); ++r)
            rmul[r] = op.lp().band_j(j, fg.radial_nodes[r]);
        sp.j_values.push_back(j);
        sp.gamma_j.push_back(std::sqrt(std::max(0.0, weighted_mass(fg, f, rmul, nullptr))));
        if (j >= 0) {
            const auto& lists = op.patch_nodes(j);
            std::vector<double> gnu(lists.size(), 0.0);
            for (std::size_t nu = 0; nu < lists.size(); ++nu) {
                std::vector<double> amul(fg.n_angular(), 0.0);
                for (std::size_t t = 0; t < lists[nu].node.size(); ++t)
                    amul[lists[nu].node[t]] = lists[nu].eta[t];
                gnu[nu] = std::sqrt(std::max(0.0, weighted_mass(fg, f, rmul, &amul)));
            }
            sp.gamma_j_nu[j] = std::move(gnu);
            if (with_refined && fam2 && fam2->j == j) {
                std::vector<double> gk;
                const auto& lists2 = op.patch_nodes(j);
                for (std::size_t nu = 0; nu < lists2.size(); ++nu) {
                    std::vector<double> amul(fg.n_angular(), 0.0);
                    for (std::size_t t = 0; t < lists2[nu].node.size(); ++t)
                        amul[lists2[nu].node[t]] = lists2[nu].eta[t];
                    for (int k = 0; k < fam2->count; ++k) {
                        std::vector<double> rk(rmul);
                        for (std::size_t r = 0; r < fg.n_radial(); ++r)
                            rk[r] *= fam2->bump(k, fg.radial_nodes[r]);
                        gk.push_back(std::sqrt(std::max(0.0, weighted_mass(fg, f, rk, &amul))));
                    }
                }
                sp.gamma_j_nu_k[j] = std::move(gk);
            }
        }
    }
    return sp;
}

complexd correlation(const FioOperator& op, const HalfDensity& f, const PieceIndex& a,
                     const PieceIndex& b, const SecondFrequencyFamily* fam2) {
    SpatialField A = apply_piece(op, f, a.j, a.nu, a.k, fam2);
    SpatialField B = apply_piece(op, f, b.j, b.nu, b.k, fam2);
    return spatial_inner(A, B, op.sgrid());
}

std::vector<std::pair<double, double>> DecayTable::binned_medians(int bins) const {
    std::vector<std::pair<double, double>> out;
    if (rows.empty() || bins <= 0) return out;
    double lo = rows.front().separation, hi = rows.front().separation;
    for (const auto& r : rows) {
        lo = std::min(lo, r.separation);
        hi = std::max(hi, r.separation);
    }
    if (hi <= lo) bins = 1;
    double lw = std::log(std::max(lo, 1e-12));
    double hw = std::log(std::max(hi, lo * (1.0 + 1e-9)) * (1.0 + 1e-9));
    std::vector<std::vector<double>> buckets(bins);
    std::vector<std::vector<double>> seps(bins);
    for (const auto& r : rows) {
        int bi = bins == 1 ? 0
                           : std::min(bins - 1, static_cast<int>((std::log(r.separation) - lw) /
                                                                 (hw - lw) * bins));
        bi = std::max(0, bi);
        buckets[bi].push_back(r.measured);
        seps[bi].push_back(r.separation);
    }
    for (int bi = 0; bi < bins; ++bi) {
        if (buckets[bi].empty()) continue;
        std::sort(buckets[bi].begin(), buckets[bi].end());
        double med = buckets[bi][buckets[bi].size() / 2];
        double s = 0.0;
        for (double v : seps[bi]) s += v;
        out.emplace_back(s / seps[bi].size(), med);
    }
    return out;
}

DecayTable orthogonality_scan(const FioOperator& op, const HalfDensity& f, ScanMode mode,
                              std::optional<int> angle_j) {
    DecayTable table;
    table.alpha = op.alpha();
    const double gamma_floor = 1e-12;
    if (mode == ScanMode::Frequency) {
        table.mode = "frequency";
        int j_lo = -1, j_hi = op.family_j_max();
        if (j_hi - j_lo + 1 < 4)
            throw std::invalid_argument("orthogonality_scan: needs at least 4 octaves");
        std::vector<SpatialField> pieces;
        std::vector<double> gammas;
        PieceSpectrum sp = spectrum(op, f);
        for (int j = j_lo; j <= j_hi; ++j) {
            pieces.push_back(apply_piece(op, f, j));
            gammas.push_back(sp.gamma_j[j - j_lo]);
        }
        for (int j = j_lo; j <= j_hi; ++j)
            for (int k = j + 1; k <= j_hi; ++k) {
                double gj = gammas[j - j_lo], gk = gammas[k - j_lo];
                if (gj < gamma_floor || gk < gamma_floor) continue;
                double meas =
                    std::abs(spatial_inner(pieces[j - j_lo], pieces[k - j_lo], op.sgrid())) /
                    (gj * gk);
                double env = std::exp2(-0.5 * std::abs(j - k));
                DecayRow row;
                row.a = "j=" + std::to_string(j);
                row.b = "k=" + std::to_string(k);
                row.separation = std::abs(j - k);
                row.measured = meas;
                row.envelope = env;
                row.ratio = meas / env;
                table.rows.push_back(row);
                if (std::abs(j - k) > 2) table.fitted_c = std::max(table.fitted_c, row.ratio);
            }
        return table;
    }

    table.mode = "angle";
    int j = angle_j.value_or(std::max(0, op.fgrid().j_max - 1));
    table.j = j;
    const AngularPatchFamily& fam = op.angular_family(j);
    fam.require_resolution(op.fgrid());
    if (fam.size() < 8) throw std::invalid_argument("orthogonality_scan: needs at least 8 patches");
    PieceSpectrum sp = spectrum(op, f);
    const std::vector<double>& gnu = sp.gamma_j_nu.at(j);
    std::vector<SpatialField> pieces(fam.size());
    for (std::size_t nu = 0; nu < fam.size(); ++nu)
        pieces[nu] = apply_piece(op, f, j, nu);
    double scale = std::exp2(0.5 * j) / op.delta(); // delta-scaled separation
    for (std::size_t nu = 0; nu < fam.size(); ++nu)
        for (std::size_t mu = nu + 1; mu < fam.size(); ++mu) {
            if (gnu[nu] < gamma_floor || gnu[mu] < gamma_floor) continue;
            double sep = norm(fam.centers[nu] - fam.centers[mu]) * scale;
            if (sep < 1.0) continue; // overlapping patches are diagonal terms
            double meas = std::abs(spatial_inner(pieces[nu], pieces[mu], op.sgrid())) /
                          (gnu[nu] * gnu[mu]);
            double env = std::exp2(-0.5 * j * op.alpha()) / std::pow(sep, 2.0 - op.alpha()) +
                         1.0 / (sep * sep * sep);
            DecayRow row;
            row.a = "nu=" + std::to_string(nu);
            row.b = "nu'=" + std::to_string(mu);
            row.separation = sep;
            row.measured = meas;
            row.envelope = env;
            row.ratio = meas / env;
            table.rows.push_back(row);
            table.fitted_c = std::max(table.fitted_c, row.ratio);
        }
    return table;
}

DiagonalResult diagonal_norm(const FioOperator& op, const HalfDensity& f, int j, std::size_t nu) {
    DiagonalResult res;
    PieceSpectrum sp = spectrum(op, f);
    res.gamma = sp.gamma_j_nu.at(j).at(nu);
    if (res.gamma < 1e-12) {
        res.skipped = true;
        return res;
    }
    res.norm = spatial_l2_norm(apply_piece(op, f, j, nu), op.sgrid());
    res.ratio = res.norm / res.gamma;
    return res;
}

HalfDensity random_band_limited_density(const PolarFrequencyGrid& g, std::uint64_t seed,
                                        std::uint64_t stream) {
    Rng rng = Rng::sub(seed, 17, stream);
    HalfDensity f(g);
    int a_hi = g.j_max - 1, b_lo = g.j_min;
    for (std::size_t r = 0; r < g.n_radial(); ++r) {
        double l = g.radial_nodes[r];
        double env = lp_chi(std::exp2(-a_hi) * l) - lp_chi(std::exp2(-b_lo) * l);
        for (std::size_t a = 0; a < g.n_angular(); ++a)
            f.at(r, a) = env == 0.0
                              ? complexd{}
                              : complexd(rng.next_gaussian(), rng.next_gaussian()) * env;
    }
    return f;
}

HalfDensity smooth_test_density(const PolarFrequencyGrid& g) {
    HalfDensity f(g);
    int a_hi = g.j_max - 1, b_lo = g.j_min;
    for (std::size_t r = 0; r < g.n_radial(); ++r) {
        double l = g.radial_nodes[r];
        double env = lp_chi(std::exp2(-a_hi) * l) - lp_chi(std::exp2(-b_lo) * l);
        if (env == 0.0) continue;
        for (std::size_t a = 0; a < g.n_angular(); ++a) {
            const Vec3& w = g.angular_nodes[a];
            double ang = 1.0 + 0.5 * w.z + 0.3 * w.x * w.y + 0.2 * std::cos(l * 0.37);
            f.at(r, a) = complexd(env * ang, 0.25 * env * (w.x - 0.4 * w.z * w.z));
        }
    }
    return f;
}

OperatorNormResult operator_norm(const FioOperator& op, int ensemble_size, int power_iters,
                                 std::uint64_t seed) {
    if (ensemble_size < 1) throw std::invalid_argument("operator_norm: ensemble_size >= 1");
    if (power_iters < 5) throw std::invalid_argument("operator_norm: power_iters >= 5");
    OperatorNormResult best;
    for (int e = 0; e < ensemble_size; ++e) {
        HalfDensity v = random_band_limited_density(op.fgrid(), seed, e);
        double vn = polar_l2_norm(v, op.fgrid());
        if (vn == 0.0) continue;
        for (auto& c : v.values) c /= vn;
        double q_prev = 0.0, q = 0.0;
        bool conv = false;
        int it = 0;
        for (; it < power_iters; ++it) {
            HalfDensity w = apply_adjoint(op, apply(op, v));
            q = std::real(polar_inner(w, v, op.fgrid()));
            double wn = polar_l2_norm(w, op.fgrid());
            if (wn == 0.0) {
                q = 0.0;
                conv = true;
                break;
            }
            for (auto& c : w.values) c /= wn;
            v = std::move(w);
            if (it > 0 && std::abs(q - q_prev) <= 1e-4 * std::max(q, 1e-300)) {
                conv = true;
                ++it;
                break;
            }
            q_prev = q;
        }
        double sigma = std::sqrt(std::max(0.0, q));
        if (sigma > best.sigma) {
            best.sigma = sigma;
            best.converged = conv;
            best.iterations = it;
        } else if (e == 0) {
            best.converged = conv;
            best.iterations = it;
        }
    }
    return best;
}

LowerBoundResult lower_bound_ratio(const FioOperator& op, int ensemble_size, std::uint64_t seed,
                                   double baseline) {
    if (ensemble_size < 1 || baseline <= 0.0)
        throw std::invalid_argument("lower_bound_ratio: bad parameters");
    LowerBoundResult res;
    res.min_ratio = std::numeric_limits<double>::infinity();
    // hypothesis: the symbol stays near 1 (b - 1 small) on a sample
    double dev = 0.0;
    std::size_t stride = std::max<std::size_t>(1, op.sgrid().size() / 256);
    for (std::size_t i = 0; i < op.sgrid().size(); i += stride)
        for (std::size_t a = 0; a < op.fgrid().n_angular();
             a += std::max<std::size_t>(1, op.fgrid().n_angular() / 16)) {
            complexd b = op.symbol().eval(op.phase(), op.sgrid().points[i],
                                          op.fgrid().angular_nodes[a]);
            dev = std::max(dev, std::abs(b - complexd{1.0, 0.0}));
        }
    res.hypothesis_ok = dev <= 0.5;
    for (int e = 0; e < ensemble_size; ++e) {
        HalfDensity f = random_band_limited_density(op.fgrid(), seed, 1000 + e);
        double fn = polar_l2_norm(f, op.fgrid());
        if (fn == 0.0) continue;
        double un = spatial_l2_norm(apply(op, f), op.sgrid());
        res.min_ratio = std::min(res.min_ratio, un / (baseline * fn));
    }
    if (!std::isfinite(res.min_ratio)) res.min_ratio = 0.0;
    return res;
}

} // namespace rfio
