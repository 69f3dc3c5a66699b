#pragma once

#include <cmath>
#include <map>
#include <cstdint>
#include <string>
#include <vector>

#include "isnn/stressfit.hpp"

namespace isnn {

// Scalar gate parameter with sigmoid steepness gamma. The gate value is
// binary; training sees the sigmoid's derivative (straight-through).
struct GateState {
    double g = -0.1;
    double gamma = 1.0;

    double sigmoid_value() const { return sigmoid(gamma * g); }
    double binary() const { return sigmoid_value() > 0.5 ? 1.0 : 0.0; }
};

struct GateForwardResult {
    double S = 0.0;      // sigmoid(gamma g)
    double G = 0.0;      // binary gate value
    double dG_dg = 0.0;  // straight-through derivative gamma S (1 - S)
};

inline GateForwardResult gate_forward(const GateState& gs) {
    if (!(gs.gamma > 0.0)) throw InvalidConfig("gate_forward: gamma must be > 0");
    GateForwardResult r;
    r.S = gs.sigmoid_value();
    r.G = r.S > 0.5 ? 1.0 : 0.0;
    r.dG_dg = gs.gamma * r.S * (1.0 - r.S);
    return r;
}

// L = stress_mse + eps * S(g)^(1/p)
inline double penalized_loss(double stress_mse, const GateState& gs, double eps, double p) {
    if (eps < 0.0 || p < 1.0) throw InvalidConfig("penalized_loss: need eps >= 0, p >= 1");
    return stress_mse + eps * std::pow(gs.sigmoid_value(), 1.0 / p);
}

// Two-branch potential: a constrained (polyconvex) ISNN-2 branch and an
// unconstrained FFNN branch, mixed by the binary gate.
struct GatedModel {
    NnPotential poly;
    NnPotential arb;
    GateState gate;
    std::array<double, 3> direction{1.0, 0.0, 0.0};
};

inline double gated_potential(const GatedModel& m, const std::vector<double>& eff_poly,
                              const std::vector<double>& eff_arb, const TransIsoInvariants& inv,
                              const Vec& design) {
    const double G = m.gate.binary();
    return (1.0 - G) * nn_psi(m.poly, eff_poly, inv, design)
         + G * nn_psi(m.arb, eff_arb, inv, design);
}

inline Tensor3 gated_stress(const GatedModel& m, const std::vector<double>& eff_poly,
                            const std::vector<double>& eff_arb, const Tensor3& F,
                            const Vec& design) {
    const double G = m.gate.binary();
    const Tensor3 sp = nn_second_pk(m.poly, eff_poly, F, design, &m.direction);
    const Tensor3 sa = nn_second_pk(m.arb, eff_arb, F, design, &m.direction);
    return sp * (1.0 - G) + sa * G;
}

// Keeps only the branch selected by the gate. Outputs are identical to the
// gated model because the dropped branch enters with an exact 0 factor.
struct PrunedModel {
    NnPotential kept;
    double gate_value = 0.0; // metadata: the gate that selected this branch
};

inline PrunedModel prune(const GatedModel& m) {
    PrunedModel out;
    out.gate_value = m.gate.binary();
    out.kept = out.gate_value > 0.5 ? m.arb : m.poly;
    return out;
}

struct GateTrainConfig {
    int epochs = 20000;
    double warmup_frac = 0.01;   // both-branch pretraining share of epochs
    double lr_weights = 1e-3;
    double lr_gate = 1e-5;
    double eps = 1e-4;           // penalty weight
    double p = 4.0;              // penalty norm exponent
    double gamma = 1.0;
    double g0 = -0.1;            // gate parameter at the start of phase 2
    std::uint64_t seed = 0;
    int poly_width = 8, poly_depth = 3;
    std::vector<int> arb_hidden{16, 16};
    int history_every = 100;

    void validate() const {
        if (epochs < 2) throw InvalidConfig("gate training needs epochs >= 2");
        if (warmup_frac <= 0.0 || warmup_frac >= 1.0) throw InvalidConfig("warmup_frac in (0,1)");
        if (!(gamma > 0.0)) throw InvalidConfig("gamma must be > 0");
    }
};

struct GateHistoryPoint {
    int epoch = 0;
    double loss = 0.0;
    double sigmoid_g = 0.0;
    double gate = 0.0;
};

struct GateTrainResult {
    GatedModel model;
    std::vector<GateHistoryPoint> history;
    double final_loss = 0.0;
};

// Polyconvexity-discovery schedule: a warmup phase trains both branches on
// the stress loss independently (the gate is inactive), then the gate
// parameter is reset to g0 and the penalized gated loss takes over with a
// small learning rate on g.
inline GateTrainResult train_gated(const MaterialDataset& data, const GateTrainConfig& cfg) {
    cfg.validate();
    if (data.size() == 0) throw InvalidConfig("train_gated: empty dataset");
    if (!data.has_direction) throw InvalidConfig("train_gated: dataset needs a fiber direction");

    GateTrainResult out;
    GatedModel& model = out.model;
    const auto n_design = static_cast<int>(data.design_names.size());
    std::vector<std::string> mono, free_names;
    for (const std::string& name : data.design_names) free_names.push_back(name);
    (void)n_design;
    model.poly = make_nn_potential(true, mono, free_names, cfg.poly_width, cfg.poly_depth, cfg.seed);
    model.arb = make_arb_potential(true, mono, free_names, cfg.arb_hidden, cfg.seed + 1);
    model.gate.g = cfg.g0;
    model.gate.gamma = cfg.gamma;
    model.direction = data.direction;
    fit_normalization(model.poly, data);
    fit_normalization(model.arb, data);

    // rows grouped by design vector so both reference subgraphs replay once
    // per group instead of once per row
    struct Group {
        Vec design;
        std::vector<PreparedRow> rows;
    };
    std::vector<Group> groups;
    {
        std::map<Vec, std::size_t> group_of;
        for (const MaterialRow& r : data.rows) {
            auto [it, fresh] = group_of.try_emplace(r.design, groups.size());
            if (fresh) {
                groups.push_back({});
                groups.back().design = r.design;
            }
            groups[it->second].rows.push_back(prepare_row(r, true, data.direction));
        }
    }

    // tape regions: [params, gate, penalty | design leaves, references | row graph]
    Tape tape;
    ModelVars mv_poly = make_model_vars(tape, model.poly.net);
    ModelVars mv_arb = make_model_vars(tape, model.arb.net);
    Var g_leaf = tape.leaf(model.gate.g);
    Var gate_val = tape.gate(g_leaf, cfg.gamma);
    Var one_minus_g = tape.sub(tape.constant(1.0), gate_val);
    Var sig = tape.sigmoid_(tape.mul(tape.constant(cfg.gamma), g_leaf));
    Var penalty = tape.mul(tape.constant(cfg.eps),
                           tape.exp_(tape.mul(tape.log_(sig), tape.constant(1.0 / cfg.p))));

    const std::size_t ref_start = tape.size();
    std::vector<Var> design_leaves;
    for (std::size_t i = 0; i < data.design_names.size(); ++i) design_leaves.push_back(tape.leaf(0.0));
    const PotentialRefExpr ref_poly = record_potential_reference(tape, model.poly, mv_poly, design_leaves);
    const PotentialRefExpr ref_arb = record_potential_reference(tape, model.arb, mv_arb, design_leaves);

    const std::size_t replay_start = tape.size();
    RowLeaves leaves = make_row_leaves(tape, true, 0);
    leaves.design = design_leaves;
    const StressExpr sp = record_potential_stress_sample(tape, model.poly, mv_poly, leaves, ref_poly, data.direction);
    const StressExpr sa = record_potential_stress_sample(tape, model.arb, mv_arb, leaves, ref_arb, data.direction);

    auto residual_sum = [&](const StressExpr& se) {
        Var acc = tape.constant(0.0);
        for (int k = 0; k < 6; ++k) {
            const auto ks = static_cast<std::size_t>(k);
            Var r = tape.sub(se.S[ks], leaves.target[ks]);
            acc = tape.add(acc, tape.mul(r, r));
        }
        return acc;
    };
    const Var loss_poly_row = residual_sum(sp);
    const Var loss_arb_row = residual_sum(sa);
    const Var loss_warm_row = tape.add(loss_poly_row, loss_arb_row);
    StressExpr gated;
    for (int k = 0; k < 6; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        gated.S[ks] = tape.add(tape.mul(one_minus_g, sp.S[ks]), tape.mul(gate_val, sa.S[ks]));
    }
    const Var loss_gated_row = residual_sum(gated);

    const int warmup = std::max(1, static_cast<int>(std::lround(cfg.warmup_frac * cfg.epochs)));
    const double inv6n = 1.0 / (6.0 * static_cast<double>(data.size()));
    const std::size_t n_poly = model.poly.net.raw.size();
    const std::size_t n_arb = model.arb.net.raw.size();

    AdamState adam_w; // both branches share one optimizer state
    AdamState adam_g;
    Vec weights(n_poly + n_arb);
    Vec wgrad(n_poly + n_arb);
    Vec gparam(1), ggrad(1);
    std::vector<double> adj;

    auto pull_weights = [&]() {
        for (std::size_t i = 0; i < n_poly; ++i) weights[i] = model.poly.net.raw[i];
        for (std::size_t i = 0; i < n_arb; ++i) weights[n_poly + i] = model.arb.net.raw[i];
    };
    auto push_weights = [&]() {
        for (std::size_t i = 0; i < n_poly; ++i) model.poly.net.raw[i] = weights[i];
        for (std::size_t i = 0; i < n_arb; ++i) model.arb.net.raw[i] = weights[n_poly + i];
    };

    double last_loss = 0.0;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const bool warm = epoch <= warmup;
        if (epoch == warmup + 1) model.gate.g = cfg.g0; // reset entering phase 2

        sync_model_vars(tape, mv_poly, model.poly.net);
        sync_model_vars(tape, mv_arb, model.arb.net);
        tape.set_value(g_leaf, model.gate.g);
        tape.forward_range(0, ref_start);

        adj.assign(tape.size(), 0.0);
        double total = 0.0;
        const Var row_loss = warm ? loss_warm_row : loss_gated_row;
        for (const Group& group : groups) {
            for (std::size_t i = 0; i < group.design.size(); ++i)
                tape.set_value(design_leaves[i], group.design[i]);
            tape.forward_range(ref_start, replay_start);
            for (const PreparedRow& row : group.rows) {
                set_row_leaves(tape, leaves, row);
                tape.forward_range(replay_start, tape.size());
                total += tape.value(row_loss);
                tape.backward_partial(row_loss, replay_start, adj, inv6n);
            }
            tape.backward_span(ref_start, replay_start, adj);
            for (std::size_t i = ref_start; i < replay_start; ++i) adj[i] = 0.0;
        }
        if (!warm) adj[static_cast<std::size_t>(penalty.id)] += 1.0;
        tape.backward_span(0, ref_start, adj);

        pull_weights();
        for (std::size_t i = 0; i < n_poly; ++i)
            wgrad[i] = adj[static_cast<std::size_t>(mv_poly.raw[i].id)];
        for (std::size_t i = 0; i < n_arb; ++i)
            wgrad[n_poly + i] = adj[static_cast<std::size_t>(mv_arb.raw[i].id)];
        adam_step(adam_w, weights, wgrad, cfg.lr_weights);
        push_weights();

        last_loss = total * inv6n + (warm ? 0.0 : tape.value(penalty));
        if (!warm) {
            gparam[0] = model.gate.g;
            ggrad[0] = adj[static_cast<std::size_t>(g_leaf.id)];
            adam_step(adam_g, gparam, ggrad, cfg.lr_gate);
            model.gate.g = gparam[0];
        }

        if (epoch == 1 || epoch % cfg.history_every == 0 || epoch == cfg.epochs ||
            epoch == warmup || epoch == warmup + 1) {
            GateHistoryPoint pt;
            pt.epoch = epoch;
            pt.loss = last_loss;
            pt.sigmoid_g = model.gate.sigmoid_value();
            pt.gate = model.gate.binary();
            out.history.push_back(pt);
        }
    }
    out.final_loss = last_loss;
    return out;
}

} // namespace isnn
