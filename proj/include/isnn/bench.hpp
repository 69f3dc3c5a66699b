#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

#include "isnn/deriv.hpp"
#include "isnn/graph.hpp"
#include "isnn/io.hpp"

namespace isnn {

struct BenchConfig {
    std::vector<int> widths{4, 8, 12, 16, 24};
    int depth = 3;
    int repeats = 200;
    int seeds = 10;
    std::uint64_t seed0 = 1;
};

// Times value+gradient+Hessian through the manual layerwise recursions
// against the tape: forward replay, gradient sweep, then the re-recorded
// gradient graph swept once per input for the Hessian (the eager-mode AD
// pattern). Derivative agreement is asserted while the clock runs on the
// first repeat of every seed.
inline std::vector<BenchRow> bench_derivatives(const BenchConfig& cfg) {
    using clock = std::chrono::steady_clock;
    std::vector<BenchRow> rows;
    for (int width : cfg.widths) {
        const ArchSpec spec = ArchSpec::isnn2(1, 2, 1, 1, width, cfg.depth);
        std::vector<double> md_ns, ad_ns;
        std::size_t n_params = 0;
        for (int s = 0; s < cfg.seeds; ++s) {
            const IsnnParams params = new_params(spec, cfg.seed0 + static_cast<std::uint64_t>(s));
            n_params = params.count();
            Rng rng(1000 + static_cast<std::uint64_t>(s));
            BranchInput in;
            in.x0 = {rng.uniform(0.8, 1.2)};
            in.y0 = {rng.uniform(2.5, 3.5), rng.uniform(2.5, 3.5)};
            in.t0 = {rng.uniform(0, 1)};
            in.z0 = {rng.uniform(0, 1)};

            EvalBundle md;
            const auto t0 = clock::now();
            for (int r = 0; r < cfg.repeats; ++r) {
                md = eval_full_isnn2(params, effective_weights(params), in);
            }
            const auto t1 = clock::now();

            RecordedModel rm = record_model(params, in);
            const std::size_t base = rm.tape.size();
            std::vector<double> adj;
            Vec grad(rm.inputs.size());
            Mat hess(rm.inputs.size(), rm.inputs.size());
            const auto t2 = clock::now();
            for (int r = 0; r < cfg.repeats; ++r) {
                rm.tape.truncate(base);
                rm.tape.forward();
                rm.tape.backward(rm.output, adj);
                for (std::size_t i = 0; i < rm.inputs.size(); ++i)
                    grad[i] = adj[static_cast<std::size_t>(rm.inputs[i].id)];
                const std::vector<Var> gvars = rm.tape.backward_graph(rm.output, rm.inputs);
                rm.tape.forward_range(base, rm.tape.size());
                for (std::size_t i = 0; i < rm.inputs.size(); ++i) {
                    rm.tape.backward(gvars[i], adj);
                    for (std::size_t j = 0; j < rm.inputs.size(); ++j)
                        hess(i, j) = adj[static_cast<std::size_t>(rm.inputs[j].id)];
                }
                if (r == 0) {
                    // agreement asserted in the timed region
                    if (std::abs(rm.tape.value(rm.output) - md.value) > 1e-10)
                        throw std::runtime_error("bench: value mismatch between MD and AD");
                    for (std::size_t i = 0; i < grad.size(); ++i) {
                        const double tol = std::max(1e-8, 1e-8 * std::abs(md.grad[i]));
                        if (std::abs(grad[i] - md.grad[i]) > tol)
                            throw std::runtime_error("bench: gradient mismatch between MD and AD");
                        for (std::size_t j = 0; j < grad.size(); ++j) {
                            const double htol = std::max(1e-6, 1e-6 * std::abs(md.hess(i, j)));
                            if (std::abs(hess(i, j) - md.hess(i, j)) > htol)
                                throw std::runtime_error("bench: hessian mismatch between MD and AD");
                        }
                    }
                }
            }
            const auto t3 = clock::now();

            md_ns.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count() / cfg.repeats);
            ad_ns.push_back(std::chrono::duration<double, std::nano>(t3 - t2).count() / cfg.repeats);
        }
        auto median = [](std::vector<double> v) {
            std::sort(v.begin(), v.end());
            const std::size_t n = v.size();
            return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
        };
        BenchRow row;
        row.n_params = n_params;
        row.md_ns = median(md_ns);
        row.ad_ns = median(ad_ns);
        rows.push_back(row);
    }
    return rows;
}

} // namespace isnn
