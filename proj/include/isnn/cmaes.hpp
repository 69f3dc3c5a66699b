#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "isnn/errors.hpp"
#include "isnn/nnpotential.hpp"
#include "isnn/rng.hpp"
#include "isnn/tensor.hpp"

namespace isnn {

struct CmaConfig {
    int lambda = 0;      // population size; 0 -> 4 + floor(3 ln n)
    int mu = 0;          // parents; 0 -> lambda / 2
    double sigma0 = 0.3; // initial step size (relative to box width when boxed)
    std::size_t max_evals = 10000;
    std::uint64_t seed = 0;
    Vec lo, hi;          // box bounds; empty -> unconstrained
    double ftarget = -std::numeric_limits<double>::infinity();

    void validate(std::size_t n) const {
        if (!lo.empty() && (lo.size() != n || hi.size() != n))
            throw InvalidBounds("cma: bounds dim mismatch");
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (!(lo[i] < hi[i])) throw InvalidBounds("cma: lo < hi required");
        if (!(sigma0 > 0.0)) throw InvalidConfig("cma: sigma0 must be > 0");
    }
};

struct CmaResult {
    Vec best_x;
    double best_f = std::numeric_limits<double>::infinity();
    std::vector<std::pair<std::size_t, double>> history; // (evals, best f) per generation
    std::vector<Vec> mean_trajectory;                    // distribution mean per generation
    std::size_t evals = 0;
    bool budget_exhausted = false;
};

// (mu/mu_w, lambda)-CMA-ES with rank-one and rank-mu covariance updates and
// cumulative step-size adaptation, following the standard tutorial
// formulation. Box constraints: out-of-box samples are redrawn a few times,
// then clipped for evaluation with a quadratic distance penalty added to
// the ranking objective. Best-so-far always refers to the true objective at
// a feasible (clipped) point.
inline CmaResult cma_minimize(const std::function<double(const Vec&)>& objective, const Vec& x0,
                              const CmaConfig& cfg) {
    const std::size_t n = x0.size();
    if (n == 0) throw InvalidConfig("cma: empty x0");
    cfg.validate(n);
    const bool boxed = !cfg.lo.empty();

    const int lambda = cfg.lambda > 0
        ? cfg.lambda
        : 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(n))));
    if (lambda < 4) throw InvalidConfig("cma: lambda must be >= 4");
    const int mu = cfg.mu > 0 ? cfg.mu : lambda / 2;
    if (mu < 1 || mu > lambda / 2) throw InvalidConfig("cma: need 1 <= mu <= lambda/2");

    Vec weights(static_cast<std::size_t>(mu));
    double wsum = 0.0;
    for (int i = 0; i < mu; ++i) {
        weights[static_cast<std::size_t>(i)] =
            std::log(static_cast<double>(mu) + 0.5) - std::log(static_cast<double>(i) + 1.0);
        wsum += weights[static_cast<std::size_t>(i)];
    }
    double w2 = 0.0;
    for (double& w : weights) {
        w /= wsum;
        w2 += w * w;
    }
    const double mueff = 1.0 / w2;
    const double nd = static_cast<double>(n);
    const double c_sigma = (mueff + 2.0) / (nd + mueff + 5.0);
    const double d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((mueff - 1.0) / (nd + 1.0)) - 1.0) + c_sigma;
    const double c_c = (4.0 + mueff / nd) / (nd + 4.0 + 2.0 * mueff / nd);
    const double c_1 = 2.0 / ((nd + 1.3) * (nd + 1.3) + mueff);
    const double c_mu = std::min(1.0 - c_1, 2.0 * (mueff - 2.0 + 1.0 / mueff) / ((nd + 2.0) * (nd + 2.0) + mueff));
    const double chi_n = std::sqrt(nd) * (1.0 - 1.0 / (4.0 * nd) + 1.0 / (21.0 * nd * nd));

    Rng rng(cfg.seed);
    Vec mean = x0;
    double sigma = cfg.sigma0;
    Mat C = Mat::identity(n);
    Vec p_sigma(n, 0.0), p_c(n, 0.0);

    CmaResult res;
    auto clip = [&](const Vec& x) {
        Vec y = x;
        if (boxed)
            for (std::size_t i = 0; i < n; ++i) y[i] = std::min(cfg.hi[i], std::max(cfg.lo[i], y[i]));
        return y;
    };
    auto in_box = [&](const Vec& x) {
        if (!boxed) return true;
        for (std::size_t i = 0; i < n; ++i)
            if (x[i] < cfg.lo[i] || x[i] > cfg.hi[i]) return false;
        return true;
    };

    struct Cand {
        Vec x;        // sampled point (used for the distribution update)
        Vec y;        // (x - mean) / sigma
        double f = 0; // ranking objective (penalized if clipped)
    };
    std::vector<Cand> cands(static_cast<std::size_t>(lambda));

    Vec evals_buf, D;
    Mat B;
    while (res.evals < cfg.max_evals && res.best_f > cfg.ftarget) {
        jacobi_eigen(C, evals_buf, B);
        D.resize(n);
        bool repaired = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (evals_buf[i] < 1e-14) {
                evals_buf[i] = 1e-14;
                repaired = true;
            }
            D[i] = std::sqrt(evals_buf[i]);
        }
        if (repaired) {
            // rebuild C = B diag(e) B^T so the stored covariance stays PD
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    double v = 0.0;
                    for (std::size_t k = 0; k < n; ++k) v += B(i, k) * evals_buf[k] * B(j, k);
                    C(i, j) = v;
                }
        }

        for (int k = 0; k < lambda; ++k) {
            Cand& cand = cands[static_cast<std::size_t>(k)];
            for (int attempt = 0;; ++attempt) {
                Vec z(n);
                for (std::size_t i = 0; i < n; ++i) z[i] = rng.normal();
                Vec y(n, 0.0);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j) y[i] += B(i, j) * D[j] * z[j];
                Vec x(n);
                for (std::size_t i = 0; i < n; ++i) x[i] = mean[i] + sigma * y[i];
                cand.x = x;
                cand.y = y;
                if (in_box(x) || attempt >= 9) break;
            }
            const Vec xe = clip(cand.x);
            const double f_true = objective(xe);
            double penalty = 0.0;
            if (boxed)
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = cand.x[i] - xe[i];
                    penalty += d * d;
                }
            cand.f = f_true + 1e6 * penalty;
            res.evals += 1;
            if (f_true < res.best_f) {
                res.best_f = f_true;
                res.best_x = xe;
            }
            if (res.evals >= cfg.max_evals) break;
        }

        std::vector<int> order(static_cast<std::size_t>(lambda));
        for (int i = 0; i < lambda; ++i) order[static_cast<std::size_t>(i)] = i;
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return cands[static_cast<std::size_t>(a)].f < cands[static_cast<std::size_t>(b)].f;
        });

        Vec y_w(n, 0.0);
        Vec new_mean(n, 0.0);
        for (int r = 0; r < mu; ++r) {
            const Cand& cand = cands[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])];
            const double w = weights[static_cast<std::size_t>(r)];
            for (std::size_t i = 0; i < n; ++i) {
                y_w[i] += w * cand.y[i];
                new_mean[i] += w * cand.x[i];
            }
        }
        mean = new_mean;

        // C^{-1/2} y_w = B D^{-1} B^T y_w
        Vec bty(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) bty[i] += B(j, i) * y_w[j];
        Vec cinv_y(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) cinv_y[i] += B(i, j) * bty[j] / D[j];

        double ps_norm2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            p_sigma[i] = (1.0 - c_sigma) * p_sigma[i]
                       + std::sqrt(c_sigma * (2.0 - c_sigma) * mueff) * cinv_y[i];
            ps_norm2 += p_sigma[i] * p_sigma[i];
        }
        const double gen_count = static_cast<double>(res.mean_trajectory.size() + 1);
        const bool hsig = ps_norm2 / (1.0 - std::pow(1.0 - c_sigma, 2.0 * gen_count)) / nd
                        < (1.4 + 2.0 / (nd + 1.0)) * (1.4 + 2.0 / (nd + 1.0)) * chi_n * chi_n / nd;
        for (std::size_t i = 0; i < n; ++i)
            p_c[i] = (1.0 - c_c) * p_c[i]
                   + (hsig ? std::sqrt(c_c * (2.0 - c_c) * mueff) * y_w[i] : 0.0);

        Mat newC(n, n);
        const double old_scale = 1.0 - c_1 - c_mu;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double v = old_scale * C(i, j) + c_1 * p_c[i] * p_c[j];
                if (!hsig) v += c_1 * c_c * (2.0 - c_c) * C(i, j);
                for (int r = 0; r < mu; ++r) {
                    const Cand& cand = cands[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])];
                    v += c_mu * weights[static_cast<std::size_t>(r)] * cand.y[i] * cand.y[j];
                }
                newC(i, j) = v;
            }
        C = newC;

        sigma *= std::exp((c_sigma / d_sigma) * (std::sqrt(ps_norm2) / chi_n - 1.0));

        res.mean_trajectory.push_back(clip(mean));
        res.history.push_back({res.evals, res.best_f});
    }
    res.budget_exhausted = res.best_f > cfg.ftarget;
    return res;
}

// Inverse design: find the design parameters whose model-predicted stresses
// match the target rows. The objective is the mean squared stress error as
// a function of the design vector only.
struct InvertResult {
    Vec best_design;
    double best_f = 0.0;
    CmaResult cma;
};

inline InvertResult invert_design(const NnPotential& model, const MaterialDataset& targets,
                                  const Vec& lo, const Vec& hi, CmaConfig cfg) {
    if (targets.size() == 0) throw InvalidConfig("invert_design: no targets");
    if (lo.size() != static_cast<std::size_t>(model.n_design()) || lo.size() != hi.size())
        throw InvalidBounds("invert_design: bounds must match design dim");
    const std::vector<double> eff = effective_weights(model.net);

    // precompute invariants and stress bases once
    struct Target {
        TransIsoInvariants inv;
        StressBasis basis;
        std::array<double, 6> stress;
    };
    std::vector<Target> prep;
    prep.reserve(targets.size());
    const std::array<double, 3>* dir = targets.has_direction ? &targets.direction : nullptr;
    for (const MaterialRow& row : targets.rows) {
        Target tg;
        const Tensor3 C = right_cauchy_green(row.F);
        if (dir != nullptr) {
            tg.inv = invariants_transiso_from_C(C, *dir);
        } else {
            const IsoInvariants iso = invariants_iso_from_C(C);
            tg.inv.I1 = iso.I1; tg.inv.I2 = iso.I2; tg.inv.J = iso.J;
        }
        tg.basis = stress_basis_from_C(C, dir);
        tg.stress = row.stress;
        prep.push_back(tg);
    }

    auto objective = [&](const Vec& design) {
        double acc = 0.0;
        for (const Target& tg : prep) {
            const Tensor3 s = assemble_stress(nn_invariant_grads(model, eff, tg.inv, design), tg.basis);
            const std::array<double, 6> pred = to_voigt6(s);
            for (int k = 0; k < 6; ++k) {
                const double d = pred[static_cast<std::size_t>(k)] - tg.stress[static_cast<std::size_t>(k)];
                acc += d * d;
            }
        }
        return acc / (6.0 * static_cast<double>(prep.size()));
    };

    cfg.lo = lo;
    cfg.hi = hi;
    Rng rng(cfg.seed ^ 0xabcdef1234567890ull);
    Vec x0(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i) x0[i] = rng.uniform(lo[i], hi[i]);

    InvertResult out;
    out.cma = cma_minimize(objective, x0, cfg);
    out.best_design = out.cma.best_x;
    out.best_f = out.cma.best_f;
    return out;
}

} // namespace isnn
