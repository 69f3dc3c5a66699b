#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "isnn/jobs.hpp"
#include "isnn/nnpotential.hpp"

namespace isnn {

// Rows that share design values can share the reference evaluation (the
// stress-free corrections depend on the design only), so the dataset is
// grouped by design vector and the tape is laid out in three regions:
//   [params + effective weights | design leaves + reference | row + sample]
// An epoch replays the reference once per group and the sample graph once
// per row; adjoints accumulate across the regions and are swept down
// region by region.
class StressFit {
  public:
    StressFit(NnPotential model, const MaterialDataset& data) : model_(std::move(model)) {
        std::map<Vec, std::size_t> group_of;
        for (const MaterialRow& r : data.rows) {
            auto [it, fresh] = group_of.try_emplace(r.design, groups_.size());
            if (fresh) {
                groups_.push_back({});
                groups_.back().design = r.design;
            }
            groups_[it->second].rows.push_back(prepare_row(r, model_.transiso, data.direction));
            ++n_rows_;
        }

        mv_ = make_model_vars(tape_, model_.net);
        ref_start_ = tape_.size();
        for (int i = 0; i < model_.n_design(); ++i) design_leaves_.push_back(tape_.leaf(0.0));
        ref_ = record_potential_reference(tape_, model_, mv_, design_leaves_);
        sample_start_ = tape_.size();
        leaves_ = make_row_leaves(tape_, model_.transiso, 0);
        leaves_.design = design_leaves_;
        expr_ = record_potential_stress_sample(tape_, model_, mv_, leaves_, ref_, data.direction);
        Var acc = tape_.constant(0.0);
        for (int k = 0; k < 6; ++k) {
            Var r = tape_.sub(expr_.S[static_cast<std::size_t>(k)],
                              leaves_.target[static_cast<std::size_t>(k)]);
            acc = tape_.add(acc, tape_.mul(r, r));
        }
        row_loss_ = acc;
    }

    const NnPotential& model() const { return model_; }
    NnPotential& model() { return model_; }
    std::size_t rows() const { return n_rows_; }

    void set_raw_params(const Vec& raw) { model_.net.raw = raw; }

    // Sum of squared stress residuals over all rows (6 components each) and
    // its gradient w.r.t. raw parameters; both unnormalized so that shards
    // can be combined exactly.
    double sum_loss_and_grad(Vec& grad) {
        sync_model_vars(tape_, mv_, model_.net);
        tape_.forward_range(0, ref_start_);
        adj_.assign(tape_.size(), 0.0);
        double total = 0.0;
        for (const Group& group : groups_) {
            for (std::size_t i = 0; i < group.design.size(); ++i)
                tape_.set_value(design_leaves_[i], group.design[i]);
            tape_.forward_range(ref_start_, sample_start_);
            for (const PreparedRow& row : group.rows) {
                set_row_leaves(tape_, leaves_, row);
                tape_.forward_range(sample_start_, tape_.size());
                total += tape_.value(row_loss_);
                tape_.backward_partial(row_loss_, sample_start_, adj_);
            }
            tape_.backward_span(ref_start_, sample_start_, adj_);
            for (std::size_t i = ref_start_; i < sample_start_; ++i) adj_[i] = 0.0;
        }
        tape_.backward_span(0, ref_start_, adj_);
        grad.resize(model_.net.raw.size());
        for (std::size_t k = 0; k < grad.size(); ++k)
            grad[k] = adj_[static_cast<std::size_t>(mv_.raw[k].id)];
        return total;
    }

    // Mean squared stress residual (per row and component) and gradient.
    double loss_and_grad(Vec& grad) {
        const double total = sum_loss_and_grad(grad);
        const double inv = 1.0 / (6.0 * static_cast<double>(n_rows_));
        for (double& g : grad) g *= inv;
        return total * inv;
    }

  private:
    struct Group {
        Vec design;
        std::vector<PreparedRow> rows;
    };

    NnPotential model_;
    std::vector<Group> groups_;
    std::size_t n_rows_ = 0;
    Tape tape_;
    ModelVars mv_;
    std::vector<Var> design_leaves_;
    PotentialRefExpr ref_;
    RowLeaves leaves_;
    StressExpr expr_;
    Var row_loss_;
    std::size_t ref_start_ = 0, sample_start_ = 0;
    std::vector<double> adj_;
};

// Runs a fixed number of StressFit shards (row partitions) concurrently.
// The shard count is independent of the worker count, so results are
// identical for any --jobs setting.
class ParallelStressFit {
  public:
    ParallelStressFit(const NnPotential& model, const MaterialDataset& data, int n_shards) {
        n_shards = std::max(1, std::min<int>(n_shards, static_cast<int>(data.size())));
        std::vector<MaterialDataset> parts(static_cast<std::size_t>(n_shards));
        for (auto& part : parts) {
            part.design_names = data.design_names;
            part.direction = data.direction;
            part.has_direction = data.has_direction;
        }
        for (std::size_t i = 0; i < data.size(); ++i)
            parts[i % static_cast<std::size_t>(n_shards)].rows.push_back(data.rows[i]);
        for (auto& part : parts) {
            shards_.emplace_back(model, part);
            n_rows_ += part.size();
        }
        grads_.resize(shards_.size());
        sums_.resize(shards_.size());
    }

    NnPotential& model() { return shards_.front().model(); }
    const NnPotential& model() const { return shards_.front().model(); }

    double loss_and_grad(Vec& grad, int jobs) {
        const Vec raw = shards_.front().model().net.raw;
        for (std::size_t s = 1; s < shards_.size(); ++s) shards_[s].set_raw_params(raw);
        run_parallel(jobs, static_cast<int>(shards_.size()), [&](int s) {
            const auto ss = static_cast<std::size_t>(s);
            sums_[ss] = shards_[ss].sum_loss_and_grad(grads_[ss]);
        });
        const double inv = 1.0 / (6.0 * static_cast<double>(n_rows_));
        grad.assign(raw.size(), 0.0);
        double total = 0.0;
        for (std::size_t s = 0; s < shards_.size(); ++s) {
            total += sums_[s];
            for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += grads_[s][k];
        }
        for (double& g : grad) g *= inv;
        return total * inv;
    }

  private:
    std::vector<StressFit> shards_;
    std::vector<Vec> grads_;
    std::vector<double> sums_;
    std::size_t n_rows_ = 0;
};

struct StressFitResult {
    NnPotential model;
    std::vector<std::pair<int, double>> history; // (epoch, stress mse)
    double final_loss = 0.0;
};

// n_shards partitions the rows for concurrent sweeps. It is part of the
// numerical recipe (it fixes the floating-point summation grouping), so it
// defaults to a constant rather than the worker count: results are
// identical for any `jobs`.
inline StressFitResult train_stress_fit(NnPotential model, const MaterialDataset& data,
                                        int epochs, double lr, int loss_every = 200,
                                        int jobs = 1, int n_shards = 4) {
    if (epochs < 1) throw InvalidConfig("epochs must be >= 1");
    if (data.size() == 0) throw InvalidConfig("empty dataset");
    if (n_shards < 1) n_shards = 4;
    ParallelStressFit fit(model, data, n_shards);
    AdamState adam;
    Vec grad;
    StressFitResult out;
    double loss = 0.0;
    for (int epoch = 1; epoch <= epochs; ++epoch) {
        loss = fit.loss_and_grad(grad, jobs);
        if (epoch == 1 || epoch % loss_every == 0 || epoch == epochs)
            out.history.push_back({epoch, loss});
        adam_step(adam, fit.model().net.raw, grad, lr);
    }
    out.final_loss = fit.loss_and_grad(grad, jobs);
    out.model = fit.model();
    return out;
}

// Relative stress RMSE of a trained potential on held-out rows.
inline double stress_relative_rmse(const NnPotential& p, const MaterialDataset& data) {
    const std::vector<double> eff = effective_weights(p.net);
    double num = 0.0, den = 0.0;
    for (const MaterialRow& row : data.rows) {
        const Tensor3 s = nn_second_pk(p, eff, row.F, row.design,
                                       data.has_direction ? &data.direction : nullptr);
        const std::array<double, 6> pred = to_voigt6(s);
        for (int k = 0; k < 6; ++k) {
            const double d = pred[static_cast<std::size_t>(k)] - row.stress[static_cast<std::size_t>(k)];
            num += d * d;
            den += row.stress[static_cast<std::size_t>(k)] * row.stress[static_cast<std::size_t>(k)];
        }
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

} // namespace isnn
