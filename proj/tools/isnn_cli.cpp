// isnn command line: dataset generation, training, constraint verification,
// derivative benchmarking, polyconvexity discovery and CMA-ES inverse design.
//
// Exit codes: 0 ok, 1 property/verification failure, 2 configuration error,
// 3 I/O error.

#include <cstdio>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "isnn/bench.hpp"
#include "isnn/cmaes.hpp"
#include "isnn/gate.hpp"
#include "isnn/io.hpp"
#include "isnn/jobs.hpp"
#include "isnn/stressfit.hpp"
#include "isnn/train.hpp"
#include "isnn/verify.hpp"

namespace fs = std::filesystem;
using namespace isnn;

namespace {

// JSON config files: values fill in any option the user did not pass on
// the command line (flags win). Keys are the long option names without the
// leading dashes; unknown keys are configuration errors.
void apply_config(CLI::App* cmd, const std::string& config_path) {
    if (config_path.empty()) return;
    const json cfg = load_json(config_path);
    for (const auto& [key, value] : cfg.items()) {
        CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (opt == nullptr) throw InvalidConfig("config: unknown key '" + key + "'");
        if (opt->count() > 0) continue; // flag overrides file
        if (value.is_array()) {
            for (const auto& e : value)
                opt->add_result(e.is_string() ? e.get<std::string>() : e.dump());
        } else if (value.is_string()) {
            opt->add_result(value.get<std::string>());
        } else {
            opt->add_result(value.dump());
        }
        opt->run_callback();
    }
}

ArchKind parse_arch(const std::string& name) {
    if (name == "isnn1") return ArchKind::Isnn1;
    if (name == "isnn2") return ArchKind::Isnn2;
    if (name == "ffnn") return ArchKind::Ffnn;
    throw InvalidConfig("unknown arch: " + name);
}

bool is_material_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string header;
    std::getline(in, header);
    return header.rfind("F11,", 0) == 0;
}

double mean_of(const Vec& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const Vec& v) {
    const double m = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return v.size() > 1 ? std::sqrt(acc / static_cast<double>(v.size() - 1)) : 0.0;
}

// §-style toy architectures at their documented parameter budgets
ArchSpec toy_arch(ArchKind kind) {
    switch (kind) {
        case ArchKind::Ffnn: return ArchSpec::ffnn(4, {30, 30, 30});
        case ArchKind::Isnn1: return ArchSpec::isnn1(1, 1, 1, 1, 10, 4, 10, 4);
        case ArchKind::Isnn2: return ArchSpec::isnn2(1, 1, 1, 1, 15, 3);
    }
    throw InvalidConfig("unknown arch");
}

struct GenOpts {
    std::string out;
    std::uint64_t seed = 7;
    // toy
    std::size_t n = 500;
    double lo = 0.0, hi = 4.0;
    // material
    std::size_t nf = 500;
    double delta = 0.2;
    double mu_min = 1.0, mu_max = 7.0;
    double beta_min = 0.125, beta_max = 2.0;
    std::size_t mu_grid = 7, beta_grid = 7;
    std::vector<double> direction{1.0, 0.0, 0.0};
};

int cmd_gen(const std::string& kind, const GenOpts& o) {
    if (kind == "toy-f" || kind == "toy-g") {
        const ToyDataset d = gen_toy(kind == "toy-f" ? 'f' : 'g', o.n, o.lo, o.hi, o.seed);
        write_toy_csv(o.out, d);
        json meta;
        meta["format_version"] = kFormatVersion;
        meta["func"] = kind;
        meta["n"] = o.n;
        meta["lo"] = o.lo;
        meta["hi"] = o.hi;
        meta["seed"] = o.seed;
        save_json(o.out + ".meta.json", meta);
        std::printf("wrote %zu rows to %s\n", d.size(), o.out.c_str());
        return 0;
    }
    MaterialDataset d;
    if (kind == "blatzko") {
        d = gen_blatzko_dataset(o.nf, linspace(o.mu_min, o.mu_max, o.mu_grid),
                                linspace(o.beta_min, o.beta_max, o.beta_grid), o.delta, o.seed);
    } else {
        if (o.direction.size() != 3) throw InvalidConfig("--dir needs 3 components");
        double norm = std::sqrt(o.direction[0] * o.direction[0] + o.direction[1] * o.direction[1]
                                + o.direction[2] * o.direction[2]);
        if (norm <= 0.0) throw InvalidConfig("--dir must be nonzero");
        const std::array<double, 3> n{o.direction[0] / norm, o.direction[1] / norm, o.direction[2] / norm};
        d = gen_ti_dataset(kind == "poly-ti" ? TiPotential::Poly : TiPotential::NonPoly, o.nf,
                           o.delta, o.seed, n);
    }
    write_material_csv(o.out, d);
    std::printf("wrote %zu rows to %s\n", d.size(), o.out.c_str());
    return 0;
}

struct TrainOpts {
    std::string arch = "isnn2";
    std::string dataset, test, out;
    int epochs = 20000;
    double lr = 1e-3;
    int seeds = 1;
    std::uint64_t seed0 = 0;
    int jobs = 0;
    int width = 0, depth = 0;
    int loss_every = 100;
    std::vector<std::string> monotone{"mu"};
};

int cmd_train(const TrainOpts& o) {
    if (o.epochs < 1) throw InvalidConfig("--epochs must be >= 1");
    if (o.seeds < 1) throw InvalidConfig("--seeds must be >= 1");
    fs::create_directories(o.out);
    const int jobs = o.jobs > 0 ? o.jobs : default_jobs();
    const ArchKind kind = parse_arch(o.arch);

    json summary;
    summary["format_version"] = kFormatVersion;
    summary["dataset"] = o.dataset;
    summary["arch"] = o.arch;
    summary["epochs"] = o.epochs;
    summary["lr"] = o.lr;
    summary["seeds"] = o.seeds;
    summary["seed0"] = o.seed0;

    if (!is_material_csv(o.dataset)) {
        const ToyDataset data = read_toy_csv(o.dataset);
        ToyDataset test;
        const bool with_test = !o.test.empty();
        if (with_test) test = read_toy_csv(o.test);

        const ArchSpec spec = o.width > 0
            ? (kind == ArchKind::Ffnn
                   ? ArchSpec::ffnn(4, std::vector<int>(static_cast<std::size_t>(std::max(1, o.depth)), o.width))
                   : kind == ArchKind::Isnn1
                         ? ArchSpec::isnn1(1, 1, 1, 1, o.width, std::max(1, o.depth), o.width, std::max(1, o.depth))
                         : ArchSpec::isnn2(1, 1, 1, 1, o.width, std::max(2, o.depth)))
            : toy_arch(kind);

        Vec final_train(static_cast<std::size_t>(o.seeds)), final_test(static_cast<std::size_t>(o.seeds));
        run_parallel(jobs, o.seeds, [&](int s) {
            TrainConfig cfg;
            cfg.epochs = o.epochs;
            cfg.lr = o.lr;
            cfg.seed = o.seed0 + static_cast<std::uint64_t>(s);
            cfg.loss_every = o.loss_every;
            const TrainResult r = train_regression(spec, data, cfg, with_test ? &test : nullptr);
            const std::string tag = "seed" + std::to_string(cfg.seed);
            save_json(o.out + "/model_" + tag + ".json", params_to_json(r.params));
            write_loss_history_csv(o.out + "/loss_" + tag + ".csv", r.history);
            final_train[static_cast<std::size_t>(s)] = r.final_train_mse;
            final_test[static_cast<std::size_t>(s)] = with_test ? eval_mse(r.params, test) : 0.0;
        });
        summary["param_count"] = make_param_layout(spec).count();
        summary["final_train_mse"] = final_train;
        summary["mean_train_mse"] = mean_of(final_train);
        summary["std_train_mse"] = std_of(final_train);
        if (with_test) {
            summary["final_test_mse"] = final_test;
            summary["mean_test_mse"] = mean_of(final_test);
            summary["std_test_mse"] = std_of(final_test);
        }
        save_json(o.out + "/summary.json", summary);
        std::printf("trained %d seed(s); mean final train mse %.6g\n", o.seeds, mean_of(final_train));
        return 0;
    }

    // material dataset: fit an NN potential to stresses
    const MaterialDataset data = read_material_csv(o.dataset);
    MaterialDataset test;
    const bool with_test = !o.test.empty();
    if (with_test) test = read_material_csv(o.test);
    std::vector<std::string> mono, free_names;
    for (const std::string& name : data.design_names) {
        bool is_mono = false;
        for (const std::string& m : o.monotone) is_mono |= m == name;
        (is_mono ? mono : free_names).push_back(name);
    }
    const int width = o.width > 0 ? o.width : 12;
    const int depth = o.depth > 0 ? o.depth : 3;
    const bool transiso = data.has_direction;

    Vec final_train(static_cast<std::size_t>(o.seeds)), final_rel(static_cast<std::size_t>(o.seeds));
    const int outer = std::min(jobs, o.seeds);
    const int inner = std::max(1, jobs / outer);
    run_parallel(outer, o.seeds, [&](int s) {
        NnPotential p = make_nn_potential(transiso, mono, free_names, width, depth,
                                          o.seed0 + static_cast<std::uint64_t>(s), kind);
        fit_normalization(p, data);
        const StressFitResult r =
            train_stress_fit(p, data, o.epochs, o.lr, o.loss_every, inner);
        const std::string tag = "seed" + std::to_string(o.seed0 + static_cast<std::uint64_t>(s));
        save_json(o.out + "/potential_" + tag + ".json", potential_to_json(r.model));
        write_stress_history_csv(o.out + "/loss_" + tag + ".csv", r.history);
        final_train[static_cast<std::size_t>(s)] = r.final_loss;
        final_rel[static_cast<std::size_t>(s)] =
            stress_relative_rmse(r.model, with_test ? test : data);
    });
    summary["width"] = width;
    summary["depth"] = depth;
    summary["monotone_design"] = mono;
    summary["free_design"] = free_names;
    summary["final_train_mse"] = final_train;
    summary["mean_train_mse"] = mean_of(final_train);
    summary[with_test ? "rel_rmse_test" : "rel_rmse_train"] = final_rel;
    save_json(o.out + "/summary.json", summary);
    std::printf("trained %d potential(s); mean final stress mse %.6g, rel rmse %.4f\n", o.seeds,
                mean_of(final_train), mean_of(final_rel));
    return 0;
}

struct VerifyOpts {
    std::string arch = "isnn2";
    long trials = 10000;
    long deriv_configs = 100;
    std::uint64_t seed = 7;
    int jobs = 0;
    bool inject = false;
    bool full = false; // the 1e5-trial variant
};

int cmd_verify(const VerifyOpts& o) {
    VerifyConfig cfg;
    cfg.trials = o.full ? 100000 : o.trials;
    cfg.seed = o.seed;
    cfg.jobs = o.jobs > 0 ? o.jobs : default_jobs();
    cfg.inject_violation = o.inject;
    const ArchKind kind = parse_arch(o.arch);

    const VerifyCounts ct = run_constraint_suite(kind, cfg);
    const DerivCheckCounts dc = run_derivative_suite(kind, o.deriv_configs, o.seed + 1, cfg.jobs);

    auto line = [](const char* name, long fails, long total) {
        std::printf("  %-28s %s (%ld/%ld failed)\n", name, fails == 0 ? "pass" : "FAIL", fails, total);
    };
    std::printf("constraint suite: %s, %ld trials\n", o.arch.c_str(), ct.trials);
    line("effective weights >= 0", ct.eff_nonneg_fail, ct.trials);
    line("convexity in x0", ct.convexity_x_fail, ct.trials);
    line("convexity in y0", ct.convexity_y_fail, ct.trials);
    line("monotonicity in y0", ct.mono_y_fail, ct.trials);
    line("monotonicity in t0", ct.mono_t_fail, ct.trials);
    line("grad_y >= 0", ct.grad_y_fail, ct.trials);
    line("grad_t >= 0", ct.grad_t_fail, ct.trials);
    line("hess_xx PSD", ct.psd_x_fail, ct.trials);
    line("hess_yy PSD", ct.psd_y_fail, ct.trials);
    std::printf("derivative suite: %ld configs\n", dc.configs);
    line("value vs forward", dc.value_fail, dc.configs);
    line("manual vs FD gradient", dc.md_fd_grad_fail, dc.configs);
    line("manual vs FD hessian", dc.md_fd_hess_fail, dc.configs);
    line("manual vs tape gradient", dc.md_ad_grad_fail, dc.configs);
    line("manual vs tape hessian", dc.md_ad_hess_fail, dc.configs);

    if (!ct.pass() || !dc.pass()) {
        std::fprintf(stderr, "verification FAILED\n");
        return 1;
    }
    std::printf("all checks passed\n");
    return 0;
}

struct BenchOpts {
    std::vector<int> sizes{4, 8, 12, 16, 24};
    int repeats = 200;
    int seeds = 10;
    std::string out;
};

int cmd_bench(const BenchOpts& o) {
    BenchConfig cfg;
    cfg.widths = o.sizes;
    cfg.repeats = o.repeats;
    cfg.seeds = o.seeds;
    const std::vector<BenchRow> rows = bench_derivatives(cfg);
    if (!o.out.empty()) write_bench_csv(o.out, rows);
    std::printf("%12s %14s %14s %8s\n", "n_params", "md_ns", "ad_ns", "ratio");
    for (const BenchRow& r : rows)
        std::printf("%12zu %14.0f %14.0f %8.2f\n", r.n_params, r.md_ns, r.ad_ns, r.ratio());
    return 0;
}

struct GateOpts {
    std::string dataset, out;
    int epochs = 20000;
    int seeds = 1;
    std::uint64_t seed0 = 0;
    double lr = 1e-3, lr_gate = 1e-5;
    double eps = 1e-4, p = 4.0;
    double warmup = 0.01;
    int width = 8, depth = 3;
    std::vector<int> arb_hidden{16, 16};
    int jobs = 0;
};

int cmd_gate(const GateOpts& o) {
    fs::create_directories(o.out);
    const MaterialDataset data = read_material_csv(o.dataset);
    const int jobs = o.jobs > 0 ? o.jobs : default_jobs();

    Vec final_gate(static_cast<std::size_t>(o.seeds));
    run_parallel(jobs, o.seeds, [&](int s) {
        GateTrainConfig cfg;
        cfg.epochs = o.epochs;
        cfg.warmup_frac = o.warmup;
        cfg.lr_weights = o.lr;
        cfg.lr_gate = o.lr_gate;
        cfg.eps = o.eps;
        cfg.p = o.p;
        cfg.poly_width = o.width;
        cfg.poly_depth = o.depth;
        cfg.arb_hidden = o.arb_hidden;
        cfg.seed = o.seed0 + static_cast<std::uint64_t>(s);
        const GateTrainResult r = train_gated(data, cfg);
        const PrunedModel pruned = prune(r.model);
        const std::string tag = "seed" + std::to_string(cfg.seed);
        write_gate_history_csv(o.out + "/gate_" + tag + ".csv", r.history);
        json pj = potential_to_json(pruned.kept);
        pj["pruned_from_gate"] = pruned.gate_value;
        save_json(o.out + "/pruned_" + tag + ".json", pj);
        final_gate[static_cast<std::size_t>(s)] = pruned.gate_value;
    });
    json summary;
    summary["format_version"] = kFormatVersion;
    summary["dataset"] = o.dataset;
    summary["epochs"] = o.epochs;
    summary["final_gates"] = final_gate;
    save_json(o.out + "/summary.json", summary);
    for (int s = 0; s < o.seeds; ++s)
        std::printf("seed %llu: final gate %.0f\n",
                    static_cast<unsigned long long>(o.seed0 + static_cast<std::uint64_t>(s)),
                    final_gate[static_cast<std::size_t>(s)]);
    return 0;
}

struct InvertOpts {
    std::string model, targets, out;
    std::vector<double> lo{1.0, 0.125}, hi{7.0, 2.0};
    int seeds = 10;
    std::uint64_t seed0 = 0;
    std::size_t evals = 4000;
    double sigma0 = 0.3;
    int jobs = 0;
};

int cmd_invert(const InvertOpts& o) {
    fs::create_directories(o.out);
    const NnPotential model = potential_from_json(load_json(o.model));
    const MaterialDataset targets = read_material_csv(o.targets);
    const int jobs = o.jobs > 0 ? o.jobs : default_jobs();

    std::vector<Vec> best(static_cast<std::size_t>(o.seeds));
    Vec best_f(static_cast<std::size_t>(o.seeds));
    run_parallel(jobs, o.seeds, [&](int s) {
        CmaConfig cfg;
        cfg.seed = o.seed0 + static_cast<std::uint64_t>(s);
        cfg.max_evals = o.evals;
        cfg.sigma0 = o.sigma0;
        const InvertResult r = invert_design(model, targets, o.lo, o.hi, cfg);
        const std::string tag = "seed" + std::to_string(cfg.seed);
        std::vector<std::string> names = model.monotone_design;
        names.insert(names.end(), model.free_design.begin(), model.free_design.end());
        write_trajectory_csv(o.out + "/trajectory_" + tag + ".csv", r.cma, names);
        best[static_cast<std::size_t>(s)] = r.best_design;
        best_f[static_cast<std::size_t>(s)] = r.best_f;
    });
    json summary;
    summary["format_version"] = kFormatVersion;
    summary["model"] = o.model;
    summary["targets"] = o.targets;
    summary["best_designs"] = best;
    summary["best_objectives"] = best_f;
    save_json(o.out + "/summary.json", summary);
    for (int s = 0; s < o.seeds; ++s) {
        std::printf("seed %llu: design (", static_cast<unsigned long long>(o.seed0 + static_cast<std::uint64_t>(s)));
        for (std::size_t k = 0; k < best[static_cast<std::size_t>(s)].size(); ++k)
            std::printf("%s%.6g", k ? ", " : "", best[static_cast<std::size_t>(s)][k]);
        std::printf(") objective %.6g\n", best_f[static_cast<std::size_t>(s)]);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"input-specific neural networks: constrained potentials, manual derivatives, "
                 "inverse design and polyconvexity discovery"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate datasets");
    gen->require_subcommand(1);
    GenOpts go;
    std::vector<std::string> gen_kinds{"toy-f", "toy-g", "blatzko", "poly-ti", "nonpoly-ti"};
    std::vector<CLI::App*> gen_subs;
    std::string gen_config;
    for (const std::string& kind : gen_kinds) {
        auto* sub = gen->add_subcommand(kind);
        sub->add_option("--out", go.out)->required();
        sub->add_option("--seed", go.seed);
        sub->add_option("--config", gen_config, "JSON config file; flags override its values");
        if (kind.rfind("toy", 0) == 0) {
            sub->add_option("--n", go.n);
            sub->add_option("--lo", go.lo);
            sub->add_option("--hi", go.hi);
        } else {
            sub->add_option("--nf", go.nf);
            sub->add_option("--n", go.nf);
            sub->add_option("--delta", go.delta);
            if (kind == "blatzko") {
                sub->add_option("--mu-min", go.mu_min);
                sub->add_option("--mu-max", go.mu_max);
                sub->add_option("--mu-grid", go.mu_grid);
                sub->add_option("--beta-min", go.beta_min);
                sub->add_option("--beta-max", go.beta_max);
                sub->add_option("--beta-grid", go.beta_grid);
            } else {
                sub->add_option("--dir", go.direction)->expected(3);
            }
        }
        gen_subs.push_back(sub);
    }

    // train
    auto* train = app.add_subcommand("train", "train a model on a toy or material dataset");
    TrainOpts to;
    train->add_option("--arch", to.arch);
    train->add_option("--dataset", to.dataset)->required();
    train->add_option("--test", to.test);
    train->add_option("--epochs", to.epochs);
    train->add_option("--lr", to.lr);
    train->add_option("--seeds", to.seeds);
    train->add_option("--seed0", to.seed0);
    train->add_option("--jobs", to.jobs);
    train->add_option("--width", to.width);
    train->add_option("--depth", to.depth);
    train->add_option("--loss-every", to.loss_every);
    train->add_option("--monotone", to.monotone);
    train->add_option("--out", to.out)->required();
    std::string train_config;
    train->add_option("--config", train_config, "JSON config file; flags override its values");

    // verify
    auto* verify = app.add_subcommand("verify", "run the constraint and derivative suites");
    VerifyOpts vo;
    verify->add_option("--arch", vo.arch);
    verify->add_option("--trials", vo.trials);
    verify->add_option("--deriv-configs", vo.deriv_configs);
    verify->add_option("--seed", vo.seed);
    verify->add_option("--jobs", vo.jobs);
    verify->add_flag("--full", vo.full, "run the 1e5-trial variant");
    verify->add_flag("--inject-violation", vo.inject, "test hook: sign-flip a mapped weight");
    std::string verify_config;
    verify->add_option("--config", verify_config, "JSON config file; flags override its values");

    // bench
    auto* bench = app.add_subcommand("bench", "time manual vs tape differentiation");
    BenchOpts bo;
    bench->add_option("--sizes", bo.sizes);
    bench->add_option("--repeats", bo.repeats);
    bench->add_option("--seeds", bo.seeds);
    bench->add_option("--out", bo.out);
    std::string bench_config;
    bench->add_option("--config", bench_config, "JSON config file; flags override its values");

    // gate
    auto* gate = app.add_subcommand("gate", "polyconvexity discovery with a binary gate");
    GateOpts ggo;
    gate->add_option("--dataset", ggo.dataset)->required();
    gate->add_option("--out", ggo.out)->required();
    gate->add_option("--epochs", ggo.epochs);
    gate->add_option("--seeds", ggo.seeds);
    gate->add_option("--seed0", ggo.seed0);
    gate->add_option("--lr", ggo.lr);
    gate->add_option("--lr-gate", ggo.lr_gate);
    gate->add_option("--eps", ggo.eps);
    gate->add_option("--p", ggo.p);
    gate->add_option("--warmup", ggo.warmup);
    gate->add_option("--width", ggo.width);
    gate->add_option("--depth", ggo.depth);
    gate->add_option("--arb-hidden", ggo.arb_hidden);
    gate->add_option("--jobs", ggo.jobs);
    std::string gate_config;
    gate->add_option("--config", gate_config, "JSON config file; flags override its values");

    // invert
    auto* invert = app.add_subcommand("invert", "CMA-ES inverse design against target stresses");
    InvertOpts io;
    invert->add_option("--model", io.model)->required();
    invert->add_option("--targets", io.targets)->required();
    invert->add_option("--lo", io.lo);
    invert->add_option("--hi", io.hi);
    invert->add_option("--seeds", io.seeds);
    invert->add_option("--seed0", io.seed0);
    invert->add_option("--evals", io.evals);
    invert->add_option("--sigma0", io.sigma0);
    invert->add_option("--jobs", io.jobs);
    invert->add_option("--out", io.out)->required();
    std::string invert_config;
    invert->add_option("--config", invert_config, "JSON config file; flags override its values");

    try {
        app.parse(argc, argv);
        if (train->parsed()) apply_config(train, train_config);
        if (verify->parsed()) apply_config(verify, verify_config);
        if (bench->parsed()) apply_config(bench, bench_config);
        if (gate->parsed()) apply_config(gate, gate_config);
        if (invert->parsed()) apply_config(invert, invert_config);
        for (std::size_t i = 0; i < gen_subs.size(); ++i)
            if (gen_subs[i]->parsed()) apply_config(gen_subs[i], gen_config);

        if (gen->parsed())
            for (std::size_t i = 0; i < gen_subs.size(); ++i)
                if (gen_subs[i]->parsed()) return cmd_gen(gen_kinds[i], go);
        if (train->parsed()) return cmd_train(to);
        if (verify->parsed()) return cmd_verify(vo);
        if (bench->parsed()) return cmd_bench(bo);
        if (gate->parsed()) return cmd_gate(ggo);
        if (invert->parsed()) return cmd_invert(io);
        return 2;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    } catch (const InvalidConfig& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const InvalidBounds& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const InvalidSpec& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const IoError& e) {
        std::fprintf(stderr, "I/O error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
