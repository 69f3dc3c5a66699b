#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "isnn/activation.hpp"
#include "isnn/errors.hpp"
#include "isnn/tensor.hpp"

namespace isnn {

// Reverse-mode tape over scalar operations. Nodes are appended in
// evaluation order, so a forward sweep is a single pass over the node
// array and a backward sweep is the reverse pass.
//
// backward() accumulates numeric adjoints. backward_graph() instead
// re-records the adjoint computation as new tape nodes, which is what
// makes second derivatives (reverse over reverse) and derivative-valued
// losses expressible on the same tape.
class Tape;

struct Var {
    Tape* tape = nullptr;
    std::int32_t id = -1;

    bool valid() const { return tape != nullptr && id >= 0; }
};

enum class TapeOp : std::uint8_t {
    Leaf, Add, Sub, Mul, Div, Neg, Exp, Log, Tanh, Sin, Cos, Softplus, Sigmoid,
    Affine,  // out = sum_i x_i w_i + b
    Gate,    // binary gate with straight-through sigmoid derivative
};

class Tape {
  public:
    struct Node {
        TapeOp op = TapeOp::Leaf;
        std::int32_t a = -1, b = -1;
        std::int32_t arg_off = 0, arg_n = 0;
        double aux = 0.0;
    };

    std::size_t size() const { return nodes_.size(); }

    double value(Var v) const { return val_[static_cast<std::size_t>(v.id)]; }
    void set_value(Var v, double x) { val_[static_cast<std::size_t>(v.id)] = x; }

    Var leaf(double v) {
        nodes_.push_back(Node{});
        val_.push_back(v);
        return Var{this, static_cast<std::int32_t>(nodes_.size() - 1)};
    }
    Var constant(double v) { return leaf(v); }

    Var add(Var a, Var b) { return binary(TapeOp::Add, a, b); }
    Var sub(Var a, Var b) { return binary(TapeOp::Sub, a, b); }
    Var mul(Var a, Var b) { return binary(TapeOp::Mul, a, b); }
    Var div(Var a, Var b) { return binary(TapeOp::Div, a, b); }
    Var neg(Var a) { return unary(TapeOp::Neg, a); }
    Var exp_(Var a) { return unary(TapeOp::Exp, a); }
    Var log_(Var a) { return unary(TapeOp::Log, a); }
    Var tanh_(Var a) { return unary(TapeOp::Tanh, a); }
    Var sin_(Var a) { return unary(TapeOp::Sin, a); }
    Var cos_(Var a) { return unary(TapeOp::Cos, a); }
    Var softplus_(Var a) { return unary(TapeOp::Softplus, a); }
    Var sigmoid_(Var a) { return unary(TapeOp::Sigmoid, a); }

    // out = sum_i xs[i] * ws[i] + b
    Var affine(const std::vector<Var>& xs, const std::vector<Var>& ws, Var b) {
        if (xs.size() != ws.size()) throw ShapeMismatch("Tape::affine: xs/ws size");
        Node n;
        n.op = TapeOp::Affine;
        n.b = b.id;
        n.arg_off = static_cast<std::int32_t>(args_.size());
        n.arg_n = static_cast<std::int32_t>(xs.size());
        for (const Var& v : xs) args_.push_back(v.id);
        for (const Var& v : ws) args_.push_back(v.id);
        nodes_.push_back(n);
        val_.push_back(eval_node(nodes_.back()));
        return Var{this, static_cast<std::int32_t>(nodes_.size() - 1)};
    }

    // Binary gate on g: S = sigmoid(gamma g); value is 1 if S > 0.5 else 0.
    // The backward pass sees dS/dg = gamma S (1 - S) on either branch, so
    // the gate stays trainable while its value stays binary.
    Var gate(Var g, double gamma) {
        Node n;
        n.op = TapeOp::Gate;
        n.a = g.id;
        n.aux = gamma;
        nodes_.push_back(n);
        val_.push_back(eval_node(nodes_.back()));
        return Var{this, static_cast<std::int32_t>(nodes_.size() - 1)};
    }

    // Recompute every non-leaf value in order.
    void forward() { forward_range(0, nodes_.size()); }

    void forward_range(std::size_t first, std::size_t last) {
        for (std::size_t i = first; i < last; ++i)
            if (nodes_[i].op != TapeOp::Leaf) val_[i] = eval_node(nodes_[i]);
    }

    // Numeric reverse sweep from `out`; adj must have size() entries and is
    // overwritten. adj[i] = d out / d node_i for every node reached.
    void backward(Var out, std::vector<double>& adj) const {
        adj.assign(nodes_.size(), 0.0);
        backward_accumulate(out, adj);
    }

    // Reverse sweep that only clears/propagates node ids >= first; adjoints
    // landing on ids < first are accumulated without being propagated.
    // Used by per-sample replays that share a parameter prefix.
    void backward_partial(Var out, std::size_t first, std::vector<double>& adj,
                          double seed = 1.0) const {
        for (std::size_t i = first; i < nodes_.size(); ++i) adj[i] = 0.0;
        adj[static_cast<std::size_t>(out.id)] += seed;
        for (std::size_t ii = nodes_.size(); ii-- > first;) {
            const double a = adj[ii];
            if (a == 0.0) continue;
            push_adjoint(ii, a, adj);
        }
    }

    // Propagates already-accumulated adjoints for ids in [lo, hi) downward.
    // Used to finish a sequence of backward_partial sweeps region by region.
    void backward_span(std::size_t lo, std::size_t hi, std::vector<double>& adj) const {
        for (std::size_t ii = std::min(hi, nodes_.size()); ii-- > lo;) {
            const double a = adj[ii];
            if (a == 0.0) continue;
            push_adjoint(ii, a, adj);
        }
    }

    void backward_finish(std::size_t first, std::vector<double>& adj) const {
        backward_span(0, first, adj);
    }

    // Re-record the adjoint computation as tape expressions and return
    // d out / d wrt[k] as new Vars. New nodes reference the values already
    // on the tape, so a later forward() keeps them in sync.
    std::vector<Var> backward_graph(Var out, const std::vector<Var>& wrt) {
        const std::size_t n0 = static_cast<std::size_t>(out.id) + 1;
        std::vector<std::vector<std::pair<Var, Var>>> contrib(n0);
        Var one = constant(1.0);
        Var zero = constant(0.0);
        contrib[static_cast<std::size_t>(out.id)].push_back({one, one}); // seeds adj = 1*1
        std::vector<Var> adj_var(n0, Var{});
        for (std::size_t ii = n0; ii-- > 0;) {
            auto& c = contrib[ii];
            if (c.empty()) continue;
            Var adj;
            if (c.size() == 1 && c[0].first.id == one.id && c[0].second.id == one.id) {
                adj = one;
            } else if (c.size() == 1) {
                adj = mul(c[0].first, c[0].second);
            } else {
                std::vector<Var> xs, ws;
                xs.reserve(c.size());
                ws.reserve(c.size());
                for (auto& pr : c) { xs.push_back(pr.first); ws.push_back(pr.second); }
                adj = affine(xs, ws, zero);
            }
            adj_var[ii] = adj;
            const Node nd = nodes_[ii]; // copy: emitting nodes may reallocate
            emit_contributions(ii, nd, adj, one, contrib);
            c.clear();
            c.shrink_to_fit();
        }
        std::vector<Var> out_grads;
        out_grads.reserve(wrt.size());
        for (const Var& w : wrt) {
            const std::size_t wi = static_cast<std::size_t>(w.id);
            out_grads.push_back(wi < n0 && adj_var[wi].valid() ? adj_var[wi] : zero);
        }
        return out_grads;
    }

    // forget nodes beyond `n`; used to rebuild derivative graphs in place
    void truncate(std::size_t n) {
        nodes_.resize(n);
        val_.resize(n);
        if (!nodes_.empty()) {
            // args_ entries beyond the high-water mark of remaining nodes are dead;
            // find the max arg_off+2*arg_n still referenced
            std::size_t hw = 0;
            for (const Node& nd : nodes_)
                if (nd.op == TapeOp::Affine)
                    hw = std::max(hw, static_cast<std::size_t>(nd.arg_off) + 2u * static_cast<std::size_t>(nd.arg_n));
            args_.resize(hw);
        } else {
            args_.clear();
        }
    }

    const Node& node(std::size_t i) const { return nodes_[i]; }

  private:
    std::vector<Node> nodes_;
    std::vector<double> val_;
    std::vector<std::int32_t> args_;

    Var unary(TapeOp op, Var a) {
        Node n;
        n.op = op;
        n.a = a.id;
        nodes_.push_back(n);
        val_.push_back(eval_node(nodes_.back()));
        return Var{this, static_cast<std::int32_t>(nodes_.size() - 1)};
    }

    Var binary(TapeOp op, Var a, Var b) {
        Node n;
        n.op = op;
        n.a = a.id;
        n.b = b.id;
        nodes_.push_back(n);
        val_.push_back(eval_node(nodes_.back()));
        return Var{this, static_cast<std::int32_t>(nodes_.size() - 1)};
    }

    double eval_node(const Node& n) const {
        const auto v = [&](std::int32_t id) { return val_[static_cast<std::size_t>(id)]; };
        switch (n.op) {
            case TapeOp::Leaf: return 0.0;
            case TapeOp::Add: return v(n.a) + v(n.b);
            case TapeOp::Sub: return v(n.a) - v(n.b);
            case TapeOp::Mul: return v(n.a) * v(n.b);
            case TapeOp::Div: return v(n.a) / v(n.b);
            case TapeOp::Neg: return -v(n.a);
            case TapeOp::Exp: return std::exp(v(n.a));
            case TapeOp::Log: return std::log(v(n.a));
            case TapeOp::Tanh: return std::tanh(v(n.a));
            case TapeOp::Sin: return std::sin(v(n.a));
            case TapeOp::Cos: return std::cos(v(n.a));
            case TapeOp::Softplus: return softplus(v(n.a));
            case TapeOp::Sigmoid: return sigmoid(v(n.a));
            case TapeOp::Affine: {
                double s = v(n.b);
                const std::int32_t* xs = args_.data() + n.arg_off;
                const std::int32_t* ws = xs + n.arg_n;
                for (std::int32_t i = 0; i < n.arg_n; ++i)
                    s += v(xs[i]) * v(ws[i]);
                return s;
            }
            case TapeOp::Gate: return sigmoid(n.aux * v(n.a)) > 0.5 ? 1.0 : 0.0;
        }
        return 0.0;
    }

    void backward_accumulate(Var out, std::vector<double>& adj) const {
        adj[static_cast<std::size_t>(out.id)] = 1.0;
        for (std::size_t ii = static_cast<std::size_t>(out.id) + 1; ii-- > 0;) {
            const double a = adj[ii];
            if (a == 0.0) continue;
            push_adjoint(ii, a, adj);
        }
    }

    void push_adjoint(std::size_t i, double a, std::vector<double>& adj) const {
        const Node& n = nodes_[i];
        const auto v = [&](std::int32_t id) { return val_[static_cast<std::size_t>(id)]; };
        auto acc = [&](std::int32_t id, double x) { adj[static_cast<std::size_t>(id)] += x; };
        switch (n.op) {
            case TapeOp::Leaf: break;
            case TapeOp::Add: acc(n.a, a); acc(n.b, a); break;
            case TapeOp::Sub: acc(n.a, a); acc(n.b, -a); break;
            case TapeOp::Mul: acc(n.a, a * v(n.b)); acc(n.b, a * v(n.a)); break;
            case TapeOp::Div: acc(n.a, a / v(n.b)); acc(n.b, -a * val_[i] / v(n.b)); break;
            case TapeOp::Neg: acc(n.a, -a); break;
            case TapeOp::Exp: acc(n.a, a * val_[i]); break;
            case TapeOp::Log: acc(n.a, a / v(n.a)); break;
            case TapeOp::Tanh: acc(n.a, a * (1.0 - val_[i] * val_[i])); break;
            case TapeOp::Sin: acc(n.a, a * std::cos(v(n.a))); break;
            case TapeOp::Cos: acc(n.a, -a * std::sin(v(n.a))); break;
            case TapeOp::Softplus: acc(n.a, a * sigmoid(v(n.a))); break;
            case TapeOp::Sigmoid: {
                const double s = val_[i];
                acc(n.a, a * s * (1.0 - s));
                break;
            }
            case TapeOp::Affine: {
                const std::int32_t* xs = args_.data() + n.arg_off;
                const std::int32_t* ws = xs + n.arg_n;
                for (std::int32_t k = 0; k < n.arg_n; ++k) {
                    acc(xs[k], a * v(ws[k]));
                    acc(ws[k], a * v(xs[k]));
                }
                acc(n.b, a);
                break;
            }
            case TapeOp::Gate: {
                const double s = sigmoid(n.aux * v(n.a));
                acc(n.a, a * n.aux * s * (1.0 - s));
                break;
            }
        }
    }

    void emit_contributions(std::size_t i, const Node& n, Var adj, Var one,
                            std::vector<std::vector<std::pair<Var, Var>>>& contrib) {
        auto self = Var{this, static_cast<std::int32_t>(i)};
        auto in_a = [&]() { return Var{this, n.a}; };
        auto in_b = [&]() { return Var{this, n.b}; };
        auto put = [&](std::int32_t id, Var partial) {
            contrib[static_cast<std::size_t>(id)].push_back({partial, adj});
        };
        switch (n.op) {
            case TapeOp::Leaf: break;
            case TapeOp::Add: put(n.a, one); put(n.b, one); break;
            case TapeOp::Sub: put(n.a, one); put(n.b, neg(one)); break;
            case TapeOp::Mul: put(n.a, in_b()); put(n.b, in_a()); break;
            case TapeOp::Div: {
                const Var inv_b = div(one, in_b());
                put(n.a, inv_b);
                put(n.b, neg(mul(self, inv_b)));
                break;
            }
            case TapeOp::Neg: put(n.a, neg(one)); break;
            case TapeOp::Exp: put(n.a, self); break;
            case TapeOp::Log: put(n.a, div(one, in_a())); break;
            case TapeOp::Tanh: put(n.a, sub(one, mul(self, self))); break;
            case TapeOp::Sin: put(n.a, cos_(in_a())); break;
            case TapeOp::Cos: put(n.a, neg(sin_(in_a()))); break;
            case TapeOp::Softplus: put(n.a, sigmoid_(in_a())); break;
            case TapeOp::Sigmoid: put(n.a, mul(self, sub(one, self))); break;
            case TapeOp::Affine: {
                // args may reallocate while emitting; copy ids out first
                std::vector<std::int32_t> xs(static_cast<std::size_t>(n.arg_n));
                std::vector<std::int32_t> ws(static_cast<std::size_t>(n.arg_n));
                for (std::int32_t k = 0; k < n.arg_n; ++k) {
                    xs[static_cast<std::size_t>(k)] = args_[static_cast<std::size_t>(n.arg_off + k)];
                    ws[static_cast<std::size_t>(k)] = args_[static_cast<std::size_t>(n.arg_off + n.arg_n + k)];
                }
                for (std::int32_t k = 0; k < n.arg_n; ++k) {
                    put(xs[static_cast<std::size_t>(k)], Var{this, ws[static_cast<std::size_t>(k)]});
                    put(ws[static_cast<std::size_t>(k)], Var{this, xs[static_cast<std::size_t>(k)]});
                }
                put(n.b, one);
                break;
            }
            case TapeOp::Gate: {
                const Var g = in_a();
                const Var gam = constant(n.aux);
                const Var s = sigmoid_(mul(gam, g));
                put(n.a, mul(gam, mul(s, sub(one, s))));
                break;
            }
        }
    }
};

inline Var operator+(Var a, Var b) { return a.tape->add(a, b); }
inline Var operator-(Var a, Var b) { return a.tape->sub(a, b); }
inline Var operator*(Var a, Var b) { return a.tape->mul(a, b); }
inline Var operator/(Var a, Var b) { return a.tape->div(a, b); }
inline Var operator-(Var a) { return a.tape->neg(a); }

// Gradient of a recorded scalar w.r.t. chosen leaves, as plain numbers.
inline Vec gradient(Tape& t, Var out, const std::vector<Var>& wrt) {
    std::vector<double> adj;
    t.backward(out, adj);
    Vec g(wrt.size());
    for (std::size_t i = 0; i < wrt.size(); ++i) g[i] = adj[static_cast<std::size_t>(wrt[i].id)];
    return g;
}

// Hessian by a second reverse pass over the re-recorded gradient graph.
inline Mat tape_hessian(Tape& t, Var out, const std::vector<Var>& wrt) {
    const std::vector<Var> grads = t.backward_graph(out, wrt);
    const std::size_t n = wrt.size();
    Mat h(n, n);
    std::vector<double> adj;
    for (std::size_t i = 0; i < n; ++i) {
        t.backward(grads[i], adj);
        for (std::size_t j = 0; j < n; ++j)
            h(i, j) = adj[static_cast<std::size_t>(wrt[j].id)];
    }
    return h;
}

} // namespace isnn
