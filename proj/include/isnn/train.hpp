#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "isnn/deriv.hpp"
#include "isnn/graph.hpp"
#include "isnn/optim.hpp"
#include "isnn/toyfunc.hpp"

namespace isnn {

struct TrainConfig {
    int epochs = 20000;
    double lr = 1e-3;
    std::uint64_t seed = 0;
    int loss_every = 100; // history cadence in epochs

    void validate() const {
        if (epochs < 1) throw InvalidConfig("epochs must be >= 1");
        if (!(lr > 0.0)) throw InvalidConfig("lr must be > 0");
        if (loss_every < 1) throw InvalidConfig("loss_every must be >= 1");
    }
};

struct LossPoint {
    int epoch = 0;
    double train_mse = 0.0;
    double test_mse = 0.0;
    bool has_test = false;
};

struct TrainResult {
    IsnnParams params;
    std::vector<LossPoint> history;
    double final_train_mse = 0.0;
};

inline Vec predict(const IsnnParams& p, const Mat& inputs) {
    const std::vector<double> eff = effective_weights(p);
    Vec out(inputs.rows());
    Vec row(inputs.cols());
    for (std::size_t i = 0; i < inputs.rows(); ++i) {
        for (std::size_t j = 0; j < inputs.cols(); ++j) row[j] = inputs(i, j);
        out[i] = forward(p, eff, BranchInput::concat_view(p.spec, row));
    }
    return out;
}

inline double eval_mse(const IsnnParams& p, const ToyDataset& d) {
    return mse(predict(p, d.inputs), d.targets);
}

// Full-batch Adam on the mean squared error. The whole batch loss is
// recorded once with the sample inputs baked in as constants; each epoch
// replays the tape forward, sweeps it backward for the raw-parameter
// gradient and applies one Adam update.
inline TrainResult train_regression(const ArchSpec& spec, const ToyDataset& data,
                                    const TrainConfig& cfg, const ToyDataset* test = nullptr) {
    cfg.validate();
    if (data.size() == 0) throw InvalidConfig("empty dataset");
    if (data.inputs.cols() != static_cast<std::size_t>(spec.input_dim()))
        throw DimMismatch("train_regression: dataset width != spec input dim");

    IsnnParams params = new_params(spec, cfg.seed);

    Tape tape;
    ModelVars mv = make_model_vars(tape, params);
    const std::size_t n = data.size();
    std::vector<Var> squares;
    squares.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        VarBranchInput vin;
        auto take = [&](int count, std::size_t col0) {
            std::vector<Var> v;
            v.reserve(static_cast<std::size_t>(count));
            for (int k = 0; k < count; ++k)
                v.push_back(tape.constant(data.inputs(i, col0 + static_cast<std::size_t>(k))));
            return v;
        };
        std::size_t col = 0;
        vin.x0 = take(spec.n_x, col); col += static_cast<std::size_t>(spec.n_x);
        vin.y0 = take(spec.n_y, col); col += static_cast<std::size_t>(spec.n_y);
        vin.t0 = take(spec.n_t, col); col += static_cast<std::size_t>(spec.n_t);
        vin.z0 = take(spec.n_z, col);
        Var pred = record_forward(tape, params, mv, vin);
        Var res = pred - tape.constant(data.targets[i]);
        squares.push_back(res * res);
    }
    const Var inv_n = tape.constant(1.0 / static_cast<double>(n));
    const Var loss = tape.affine(squares, std::vector<Var>(n, inv_n), tape.constant(0.0));

    AdamState adam;
    std::vector<double> adj;
    TrainResult result;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        sync_model_vars(tape, mv, params);
        tape.forward();
        tape.backward(loss, adj);
        Vec grads(params.raw.size());
        for (std::size_t k = 0; k < grads.size(); ++k)
            grads[k] = adj[static_cast<std::size_t>(mv.raw[k].id)];
        if (epoch == 1 || epoch % cfg.loss_every == 0 || epoch == cfg.epochs) {
            LossPoint pt;
            pt.epoch = epoch;
            pt.train_mse = tape.value(loss);
            if (test != nullptr) {
                pt.test_mse = eval_mse(params, *test);
                pt.has_test = true;
            }
            result.history.push_back(pt);
        }
        adam_step(adam, params.raw, grads, cfg.lr);
    }
    sync_model_vars(tape, mv, params);
    tape.forward();
    result.final_train_mse = tape.value(loss);
    result.params = std::move(params);
    return result;
}

} // namespace isnn
