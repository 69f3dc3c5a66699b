#pragma once

#include <atomic>
#include <cstdint>
#include <vector>

#include "isnn/deriv.hpp"
#include "isnn/graph.hpp"
#include "isnn/jobs.hpp"

namespace isnn {

struct VerifyConfig {
    long trials = 10000;
    std::uint64_t seed = 7;
    bool inject_violation = false; // test hook: sign-flip one mapped weight
    int jobs = 1;
};

struct VerifyCounts {
    long trials = 0;
    long eff_nonneg_fail = 0;
    long convexity_x_fail = 0;
    long convexity_y_fail = 0;
    long mono_y_fail = 0;
    long mono_t_fail = 0;
    long grad_y_fail = 0;
    long grad_t_fail = 0;
    long psd_x_fail = 0;
    long psd_y_fail = 0;

    long total_failures() const {
        return eff_nonneg_fail + convexity_x_fail + convexity_y_fail + mono_y_fail + mono_t_fail
             + grad_y_fail + grad_t_fail + psd_x_fail + psd_y_fail;
    }
    bool pass() const { return total_failures() == 0; }
};

namespace detail {

inline ArchSpec random_verify_spec(ArchKind kind, Rng& rng) {
    const int nx = 1 + static_cast<int>(rng.below(3));
    const int ny = 1 + static_cast<int>(rng.below(3));
    const int nt = 1 + static_cast<int>(rng.below(3));
    const int nz = 1 + static_cast<int>(rng.below(3));
    const int width = 1 + static_cast<int>(rng.below(5));
    const int depth = 1 + static_cast<int>(rng.below(3));
    if (kind == ArchKind::Isnn1) {
        const int bdepth = 1 + static_cast<int>(rng.below(3));
        return ArchSpec::isnn1(nx, ny, nt, nz, width, bdepth, width, depth);
    }
    return ArchSpec::isnn2(nx, ny, nt, nz, width, depth);
}

inline BranchInput random_verify_input(const ArchSpec& s, Rng& rng) {
    BranchInput in;
    auto fill = [&](int n) {
        Vec v(static_cast<std::size_t>(n));
        for (double& x : v) x = rng.uniform(-3.0, 3.0);
        return v;
    };
    in.x0 = fill(s.n_x);
    in.y0 = fill(s.n_y);
    in.t0 = fill(s.n_t);
    in.z0 = fill(s.n_z);
    return in;
}

} // namespace detail

// The constraint suite: random initializations checked for the structural
// guarantees (convexity in x0/y0 along random segments, non-negative
// gradients on the monotone branches, PSD convex-branch Hessian blocks,
// non-negative effective weights).
inline VerifyCounts run_constraint_suite(ArchKind kind, const VerifyConfig& cfg) {
    const int n_chunks = 64;
    std::vector<VerifyCounts> chunk_counts(n_chunks);
    run_parallel(cfg.jobs, n_chunks, [&](int chunk) {
        VerifyCounts& ct = chunk_counts[static_cast<std::size_t>(chunk)];
        const long lo = cfg.trials * chunk / n_chunks;
        const long hi = cfg.trials * (chunk + 1) / n_chunks;
        for (long trial = lo; trial < hi; ++trial) {
            Rng rng(cfg.seed + static_cast<std::uint64_t>(trial) * 0x9e3779b97f4a7c15ull);
            const ArchSpec spec = detail::random_verify_spec(kind, rng);
            const IsnnParams params = new_params(spec, rng.raw());
            std::vector<double> eff = effective_weights(params);

            if (cfg.inject_violation) {
                for (const ParamBlock& b : params.blocks)
                    if (b.tag == ParamTag::NonNegative) {
                        eff[b.offset] = -(eff[b.offset] + 0.5);
                        break;
                    }
            }

            ct.trials += 1;
            for (const ParamBlock& b : params.blocks) {
                if (b.tag != ParamTag::NonNegative) continue;
                for (std::size_t k = 0; k < b.size(); ++k)
                    if (!(eff[b.offset + k] >= 0.0)) {
                        ct.eff_nonneg_fail += 1;
                        k = b.size();
                    }
            }

            const BranchInput in = detail::random_verify_input(spec, rng);
            const EvalBundle eb = eval_full(params, eff, in);

            for (double g : eb.grad_y())
                if (g < -1e-10) { ct.grad_y_fail += 1; break; }
            for (double g : eb.grad_t())
                if (g < -1e-10) { ct.grad_t_fail += 1; break; }
            if (min_eigenvalue(eb.hess_xx()) < -1e-8) ct.psd_x_fail += 1;
            if (min_eigenvalue(eb.hess_yy()) < -1e-8) ct.psd_y_fail += 1;

            // convexity along a random segment, both convex branches
            auto convex_check = [&](bool in_x, long& fail) {
                BranchInput a = in, b = in;
                Vec& va = in_x ? a.x0 : a.y0;
                Vec& vb = in_x ? b.x0 : b.y0;
                for (double& v : va) v = rng.uniform(-3.0, 3.0);
                for (double& v : vb) v = rng.uniform(-3.0, 3.0);
                const double lam = rng.uniform();
                BranchInput mid = in;
                Vec& vm = in_x ? mid.x0 : mid.y0;
                for (std::size_t i = 0; i < vm.size(); ++i) vm[i] = lam * va[i] + (1.0 - lam) * vb[i];
                const double pa = forward(params, eff, a);
                const double pb = forward(params, eff, b);
                const double pm = forward(params, eff, mid);
                if (pm > lam * pa + (1.0 - lam) * pb + 1e-9) fail += 1;
            };
            convex_check(true, ct.convexity_x_fail);
            convex_check(false, ct.convexity_y_fail);

            // monotonicity: coordinatewise increases cannot lower the output
            auto mono_check = [&](bool in_y, long& fail) {
                BranchInput hi_in = in;
                Vec& vh = in_y ? hi_in.y0 : hi_in.t0;
                for (double& v : vh) v += rng.uniform(0.0, 2.0);
                if (forward(params, eff, in) > forward(params, eff, hi_in) + 1e-9) fail += 1;
            };
            mono_check(true, ct.mono_y_fail);
            mono_check(false, ct.mono_t_fail);
        }
    });
    VerifyCounts total;
    for (const VerifyCounts& ct : chunk_counts) {
        total.trials += ct.trials;
        total.eff_nonneg_fail += ct.eff_nonneg_fail;
        total.convexity_x_fail += ct.convexity_x_fail;
        total.convexity_y_fail += ct.convexity_y_fail;
        total.mono_y_fail += ct.mono_y_fail;
        total.mono_t_fail += ct.mono_t_fail;
        total.grad_y_fail += ct.grad_y_fail;
        total.grad_t_fail += ct.grad_t_fail;
        total.psd_x_fail += ct.psd_x_fail;
        total.psd_y_fail += ct.psd_y_fail;
    }
    return total;
}

struct DerivCheckCounts {
    long configs = 0;
    long md_fd_grad_fail = 0;
    long md_fd_hess_fail = 0;
    long md_ad_grad_fail = 0;
    long md_ad_hess_fail = 0;
    long value_fail = 0;

    long total_failures() const {
        return md_fd_grad_fail + md_fd_hess_fail + md_ad_grad_fail + md_ad_hess_fail + value_fail;
    }
    bool pass() const { return total_failures() == 0; }
};

// Derivative correctness: manual pass vs central finite differences and vs
// the tape, at the documented tolerances.
inline DerivCheckCounts run_derivative_suite(ArchKind kind, long configs, std::uint64_t seed,
                                             int jobs = 1) {
    const int n_chunks = 16;
    std::vector<DerivCheckCounts> chunk_counts(n_chunks);
    run_parallel(jobs, n_chunks, [&](int chunk) {
        DerivCheckCounts& ct = chunk_counts[static_cast<std::size_t>(chunk)];
        const long lo = configs * chunk / n_chunks;
        const long hi = configs * (chunk + 1) / n_chunks;
        for (long trial = lo; trial < hi; ++trial) {
            Rng rng(seed + static_cast<std::uint64_t>(trial) * 0x2545f4914f6cdd1dull);
            const ArchSpec spec = kind == ArchKind::Ffnn
                ? ArchSpec::ffnn(1 + static_cast<int>(rng.below(4)),
                                 {1 + static_cast<int>(rng.below(5)), 1 + static_cast<int>(rng.below(5))})
                : detail::random_verify_spec(kind, rng);
            const IsnnParams params = new_params(spec, rng.raw());
            const std::vector<double> eff = effective_weights(params);
            BranchInput in = kind == ArchKind::Ffnn ? BranchInput{} : detail::random_verify_input(spec, rng);
            if (kind == ArchKind::Ffnn) {
                in.x0.resize(static_cast<std::size_t>(spec.n_x));
                for (double& v : in.x0) v = rng.uniform(-2.0, 2.0);
            }
            ct.configs += 1;

            const EvalBundle md = eval_full(params, eff, in);
            const Vec x = in.flat();
            auto f = [&](const Vec& v) { return forward(params, eff, BranchInput::concat_view(spec, v)); };

            if (std::abs(md.value - f(x)) > 1e-12 * std::max(1.0, std::abs(md.value)))
                ct.value_fail += 1;

            const Vec gfd = fd_grad(f, x, 1e-5);
            for (std::size_t i = 0; i < x.size(); ++i)
                if (std::abs(md.grad[i] - gfd[i]) > std::max(1e-6, 1e-4 * std::abs(gfd[i]))) {
                    ct.md_fd_grad_fail += 1;
                    break;
                }
            const Mat hfd = fd_hess(f, x, 1e-3);
            bool hfail = false;
            for (std::size_t i = 0; i < x.size() && !hfail; ++i)
                for (std::size_t j = 0; j < x.size() && !hfail; ++j)
                    hfail = std::abs(md.hess(i, j) - hfd(i, j)) > std::max(1e-4, 1e-3 * std::abs(hfd(i, j)));
            if (hfail) ct.md_fd_hess_fail += 1;

            RecordedModel rm = record_model(params, in);
            const Vec gad = gradient(rm.tape, rm.output, rm.inputs);
            for (std::size_t i = 0; i < x.size(); ++i)
                if (std::abs(gad[i] - md.grad[i]) > std::max(1e-14, 1e-10 * std::abs(md.grad[i]))) {
                    ct.md_ad_grad_fail += 1;
                    break;
                }
            const Mat had = tape_hessian(rm.tape, rm.output, rm.inputs);
            bool adh = false;
            for (std::size_t i = 0; i < x.size() && !adh; ++i)
                for (std::size_t j = 0; j < x.size() && !adh; ++j)
                    adh = std::abs(had(i, j) - md.hess(i, j)) > std::max(1e-8, 1e-8 * std::abs(md.hess(i, j)));
            if (adh) ct.md_ad_hess_fail += 1;
        }
    });
    DerivCheckCounts total;
    for (const DerivCheckCounts& ct : chunk_counts) {
        total.configs += ct.configs;
        total.md_fd_grad_fail += ct.md_fd_grad_fail;
        total.md_fd_hess_fail += ct.md_fd_hess_fail;
        total.md_ad_grad_fail += ct.md_ad_grad_fail;
        total.md_ad_hess_fail += ct.md_ad_hess_fail;
        total.value_fail += ct.value_fail;
    }
    return total;
}

} // namespace isnn
