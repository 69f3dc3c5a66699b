#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "isnn/deriv.hpp"
#include "isnn/graph.hpp"
#include "isnn/mech.hpp"
#include "isnn/optim.hpp"
#include "isnn/tape.hpp"

namespace isnn {

// Neural strain-energy potential. For constrained architectures the inputs
// are routed by their structural role: J to the convex branch, I1/I2 (and
// I4/I5 when anisotropic) to the convex non-decreasing branch, monotone
// design parameters to the t branch and free ones to the z branch. An FFNN
// net instead takes the flat vector [I1, I2, J, (I4, I5), design...].
//
// The evaluated potential is
//   Psi = s (P(inputs) - P(ref)) - oJ (J - 1) - o4 (I4 - 1)
// with oJ, o4 chosen so the second Piola-Kirchhoff stress vanishes at
// C = I for every design value. The corrections are linear in J and I4,
// so they do not disturb the convexity structure of the branches.
struct NnPotential {
    IsnnParams net;
    bool transiso = false;
    std::vector<std::string> monotone_design; // -> t branch
    std::vector<std::string> free_design;     // -> z branch

    // positive affine input maps: scaled = (v - shift) * scale
    Vec in_shift, in_scale;      // over the invariant+design layout below
    double out_scale = 1.0;
    bool corrections = true;     // subtract reference value and stress terms

    int n_inv() const { return transiso ? 5 : 3; }
    int n_design() const { return static_cast<int>(monotone_design.size() + free_design.size()); }
    int n_inputs() const { return n_inv() + n_design(); }

    // input layout: [I1, I2, J, (I4, I5), monotone design..., free design...]
    static constexpr int kI1 = 0, kI2 = 1, kJ = 2, kI4 = 3, kI5 = 4;

    Vec reference_inputs(const Vec& design) const {
        Vec v(static_cast<std::size_t>(n_inputs()));
        v[kI1] = 3.0; v[kI2] = 3.0; v[kJ] = 1.0;
        if (transiso) { v[kI4] = 1.0; v[kI5] = 1.0; }
        for (std::size_t i = 0; i < design.size(); ++i)
            v[static_cast<std::size_t>(n_inv()) + i] = design[i];
        return v;
    }

    Vec pack_inputs(const TransIsoInvariants& inv, const Vec& design) const {
        if (static_cast<int>(design.size()) != n_design())
            throw DimMismatch("NnPotential: design size");
        Vec v(static_cast<std::size_t>(n_inputs()));
        v[kI1] = inv.I1; v[kI2] = inv.I2; v[kJ] = inv.J;
        if (transiso) { v[kI4] = inv.I4; v[kI5] = inv.I5; }
        for (std::size_t i = 0; i < design.size(); ++i)
            v[static_cast<std::size_t>(n_inv()) + i] = design[i];
        return v;
    }
};

// Constrained potential net: ISNN-2 by default (ISNN-1 also valid).
inline NnPotential make_nn_potential(bool transiso, const std::vector<std::string>& monotone,
                                     const std::vector<std::string>& free_names, int width,
                                     int depth, std::uint64_t seed,
                                     ArchKind kind = ArchKind::Isnn2) {
    NnPotential p;
    p.transiso = transiso;
    p.monotone_design = monotone;
    p.free_design = free_names;
    const int ny = transiso ? 4 : 2;
    const int nt = static_cast<int>(monotone.size());
    const int nz = static_cast<int>(free_names.size());
    const ArchSpec spec = kind == ArchKind::Isnn2
        ? ArchSpec::isnn2(1, ny, nt, nz, width, depth)
        : ArchSpec::isnn1(1, ny, nt, nz, width, depth, width, depth);
    p.net = new_params(spec, seed);
    p.in_shift.assign(static_cast<std::size_t>(p.n_inputs()), 0.0);
    p.in_scale.assign(static_cast<std::size_t>(p.n_inputs()), 1.0);
    return p;
}

// Unconstrained potential net over the flat input vector; no corrections,
// so it can represent data with a stressed reference state.
inline NnPotential make_arb_potential(bool transiso, const std::vector<std::string>& monotone,
                                      const std::vector<std::string>& free_names,
                                      const std::vector<int>& hidden, std::uint64_t seed) {
    NnPotential p;
    p.transiso = transiso;
    p.monotone_design = monotone;
    p.free_design = free_names;
    p.net = new_params(ArchSpec::ffnn(p.n_inputs(), hidden), seed);
    p.in_shift.assign(static_cast<std::size_t>(p.n_inputs()), 0.0);
    p.in_scale.assign(static_cast<std::size_t>(p.n_inputs()), 1.0);
    p.corrections = false;
    return p;
}

namespace detail {

// scaled inputs routed to the branches of the constrained layout
inline BranchInput route_inputs(const NnPotential& p, const Vec& scaled) {
    BranchInput in;
    in.x0 = {scaled[NnPotential::kJ]};
    in.y0 = {scaled[NnPotential::kI1], scaled[NnPotential::kI2]};
    if (p.transiso) {
        in.y0.push_back(scaled[NnPotential::kI4]);
        in.y0.push_back(scaled[NnPotential::kI5]);
    }
    const std::size_t d0 = static_cast<std::size_t>(p.n_inv());
    for (std::size_t i = 0; i < p.monotone_design.size(); ++i)
        in.t0.push_back(scaled[d0 + i]);
    for (std::size_t i = 0; i < p.free_design.size(); ++i)
        in.z0.push_back(scaled[d0 + p.monotone_design.size() + i]);
    return in;
}

inline Vec scale_inputs(const NnPotential& p, const Vec& raw) {
    Vec s(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) s[i] = (raw[i] - p.in_shift[i]) * p.in_scale[i];
    return s;
}

// gradient of the net output with respect to the *unscaled* input layout
inline Vec net_input_grads(const NnPotential& p, const std::vector<double>& eff, const Vec& raw_inputs) {
    const Vec scaled = scale_inputs(p, raw_inputs);
    EvalBundle eb;
    if (p.net.spec.kind == ArchKind::Ffnn) {
        eb = eval_full_ffnn(p.net, eff, scaled);
        Vec g(eb.grad);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] *= p.in_scale[i];
        return g;
    }
    eb = eval_full(p.net, eff, route_inputs(p, scaled));
    // un-route: branch order is [x | y | t | z] = [J | I1 I2 (I4 I5) | mono | free]
    Vec g(raw_inputs.size(), 0.0);
    const Vec gx = eb.grad_x(), gy = eb.grad_y(), gt = eb.grad_t(), gz = eb.grad_z();
    g[NnPotential::kJ] = gx[0];
    g[NnPotential::kI1] = gy[0];
    g[NnPotential::kI2] = gy[1];
    if (p.transiso) {
        g[NnPotential::kI4] = gy[2];
        g[NnPotential::kI5] = gy[3];
    }
    const std::size_t d0 = static_cast<std::size_t>(p.n_inv());
    for (std::size_t i = 0; i < gt.size(); ++i) g[d0 + i] = gt[i];
    for (std::size_t i = 0; i < gz.size(); ++i) g[d0 + p.monotone_design.size() + i] = gz[i];
    for (std::size_t i = 0; i < g.size(); ++i) g[i] *= p.in_scale[i];
    return g;
}

inline double net_value(const NnPotential& p, const std::vector<double>& eff, const Vec& raw_inputs) {
    const Vec scaled = scale_inputs(p, raw_inputs);
    if (p.net.spec.kind == ArchKind::Ffnn) return forward_ffnn(p.net, eff, scaled);
    return forward(p.net, eff, route_inputs(p, scaled));
}

struct Corrections {
    double oJ = 0.0, o4 = 0.0, ref_value = 0.0;
};

// stress-free terms at C = I for the given design values
inline Corrections corrections_at(const NnPotential& p, const std::vector<double>& eff,
                                  const Vec& design) {
    Corrections c;
    if (!p.corrections) return c;
    const Vec ref = p.reference_inputs(design);
    c.ref_value = p.out_scale * net_value(p, eff, ref);
    const Vec g = net_input_grads(p, eff, ref);
    const double d1 = p.out_scale * g[NnPotential::kI1];
    const double d2 = p.out_scale * g[NnPotential::kI2];
    const double dJ = p.out_scale * g[NnPotential::kJ];
    const double d5 = p.transiso ? p.out_scale * g[NnPotential::kI5] : 0.0;
    const double d4 = p.transiso ? p.out_scale * g[NnPotential::kI4] : 0.0;
    c.oJ = 2.0 * d1 + 4.0 * d2 + dJ + 2.0 * d5;
    c.o4 = p.transiso ? d4 - d5 : 0.0;
    return c;
}

} // namespace detail

// Potential value at an invariant/design state.
inline double nn_psi(const NnPotential& p, const std::vector<double>& eff,
                     const TransIsoInvariants& inv, const Vec& design) {
    const Vec raw = p.pack_inputs(inv, design);
    const double val = p.out_scale * detail::net_value(p, eff, raw);
    if (!p.corrections) return val;
    const detail::Corrections c = detail::corrections_at(p, eff, design);
    return val - c.ref_value - c.oJ * (inv.J - 1.0) - c.o4 * (inv.I4 - 1.0);
}

// Invariant-space gradients of the corrected potential (manual pass).
inline InvariantGrads nn_invariant_grads(const NnPotential& p, const std::vector<double>& eff,
                                         const TransIsoInvariants& inv, const Vec& design) {
    const Vec raw = p.pack_inputs(inv, design);
    const Vec g = detail::net_input_grads(p, eff, raw);
    InvariantGrads out;
    out.dI1 = p.out_scale * g[NnPotential::kI1];
    out.dI2 = p.out_scale * g[NnPotential::kI2];
    out.dJ = p.out_scale * g[NnPotential::kJ];
    if (p.transiso) {
        out.dI4 = p.out_scale * g[NnPotential::kI4];
        out.dI5 = p.out_scale * g[NnPotential::kI5];
    }
    if (p.corrections) {
        const detail::Corrections c = detail::corrections_at(p, eff, design);
        out.dJ -= c.oJ;
        out.dI4 -= c.o4;
    }
    return out;
}

// Second Piola-Kirchhoff stress of the NN potential at deformation F.
inline Tensor3 nn_second_pk(const NnPotential& p, const std::vector<double>& eff, const Tensor3& F,
                            const Vec& design, const std::array<double, 3>* n = nullptr) {
    const Tensor3 C = right_cauchy_green(F);
    const StressBasis basis = stress_basis_from_C(C, n);
    TransIsoInvariants inv;
    if (n != nullptr) {
        inv = invariants_transiso_from_C(C, *n);
    } else {
        const IsoInvariants iso = invariants_iso_from_C(C);
        inv.I1 = iso.I1; inv.I2 = iso.I2; inv.J = iso.J;
    }
    return assemble_stress(nn_invariant_grads(p, eff, inv, design), basis);
}

// Sets the positive affine input maps so every input spans [0, 1] over the
// dataset (invariants recomputed from F, design read off the rows).
inline void fit_normalization(NnPotential& p, const MaterialDataset& data) {
    const int ni = p.n_inputs();
    Vec lo(static_cast<std::size_t>(ni), 1e300), hi(static_cast<std::size_t>(ni), -1e300);
    for (const MaterialRow& row : data.rows) {
        TransIsoInvariants inv;
        if (p.transiso) {
            inv = invariants_transiso(row.F, data.direction);
        } else {
            const IsoInvariants iso = invariants_iso(row.F);
            inv.I1 = iso.I1; inv.I2 = iso.I2; inv.J = iso.J;
        }
        const Vec raw = p.pack_inputs(inv, row.design);
        for (int i = 0; i < ni; ++i) {
            lo[static_cast<std::size_t>(i)] = std::min(lo[static_cast<std::size_t>(i)], raw[static_cast<std::size_t>(i)]);
            hi[static_cast<std::size_t>(i)] = std::max(hi[static_cast<std::size_t>(i)], raw[static_cast<std::size_t>(i)]);
        }
    }
    for (int i = 0; i < ni; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        p.in_shift[k] = lo[k];
        p.in_scale[k] = hi[k] - lo[k] > 1e-12 ? 1.0 / (hi[k] - lo[k]) : 1.0;
    }
}

// ---------------------------------------------------------------------------
// Tape recording of the stress residual for derivative-valued training.

// Per-row constants consumed by the stress graph.
struct PreparedRow {
    Vec inv;                        // I1 I2 J (I4 I5)
    Vec design;
    std::array<double, 6> b2{}, bJ{}, b5{};  // basis 6-vectors that vary per row
    std::array<double, 6> target{};
};

inline PreparedRow prepare_row(const MaterialRow& row, bool transiso,
                               const std::array<double, 3>& n) {
    PreparedRow out;
    const Tensor3 C = right_cauchy_green(row.F);
    const StressBasis basis = stress_basis_from_C(C, transiso ? &n : nullptr);
    if (transiso) {
        const TransIsoInvariants inv = invariants_transiso_from_C(C, n);
        out.inv = {inv.I1, inv.I2, inv.J, inv.I4, inv.I5};
        out.b5 = to_voigt6(basis.dI5);
    } else {
        const IsoInvariants inv = invariants_iso_from_C(C);
        out.inv = {inv.I1, inv.I2, inv.J};
    }
    out.b2 = to_voigt6(basis.dI2);
    out.bJ = to_voigt6(basis.dJ);
    out.design = row.design;
    out.target = row.stress;
    return out;
}

// Leaves that are swapped per row during replay.
struct RowLeaves {
    std::vector<Var> inv;     // raw invariant inputs
    std::vector<Var> design;  // raw design inputs
    std::vector<Var> b2, bJ, b5;
    std::vector<Var> target;
};

inline RowLeaves make_row_leaves(Tape& t, bool transiso, int n_design) {
    RowLeaves rl;
    const int ni = transiso ? 5 : 3;
    for (int i = 0; i < ni; ++i) rl.inv.push_back(t.leaf(i == 2 ? 1.0 : i < 2 ? 3.0 : 1.0));
    for (int i = 0; i < n_design; ++i) rl.design.push_back(t.leaf(0.0));
    for (int k = 0; k < 6; ++k) {
        rl.b2.push_back(t.leaf(0.0));
        rl.bJ.push_back(t.leaf(0.0));
        if (transiso) rl.b5.push_back(t.leaf(0.0));
        rl.target.push_back(t.leaf(0.0));
    }
    return rl;
}

inline void set_row_leaves(Tape& t, const RowLeaves& rl, const PreparedRow& row) {
    for (std::size_t i = 0; i < rl.inv.size(); ++i) t.set_value(rl.inv[i], row.inv[i]);
    for (std::size_t i = 0; i < rl.design.size(); ++i) t.set_value(rl.design[i], row.design[i]);
    for (std::size_t k = 0; k < 6; ++k) {
        t.set_value(rl.b2[k], row.b2[k]);
        t.set_value(rl.bJ[k], row.bJ[k]);
        if (!rl.b5.empty()) t.set_value(rl.b5[k], row.b5[k]);
        t.set_value(rl.target[k], row.target[k]);
    }
}

struct StressExpr {
    std::array<Var, 6> S{};  // predicted second PK components
    Var psi;                 // corrected potential value (diagnostic)
};

namespace detail {

inline std::vector<Var> record_scaled_inputs(Tape& t, const NnPotential& p,
                                             const std::vector<Var>& raw) {
    std::vector<Var> scaled(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        Var shifted = t.sub(raw[i], t.constant(p.in_shift[i]));
        scaled[i] = t.mul(shifted, t.constant(p.in_scale[i]));
    }
    return scaled;
}

inline Var record_net_value(Tape& t, const NnPotential& p, const ModelVars& mv,
                            const std::vector<Var>& scaled) {
    if (p.net.spec.kind == ArchKind::Ffnn) {
        VarBranchInput vin;
        vin.x0 = scaled;
        return record_forward(t, p.net, mv, vin);
    }
    VarBranchInput vin;
    vin.x0 = {scaled[NnPotential::kJ]};
    vin.y0 = {scaled[NnPotential::kI1], scaled[NnPotential::kI2]};
    if (p.transiso) {
        vin.y0.push_back(scaled[NnPotential::kI4]);
        vin.y0.push_back(scaled[NnPotential::kI5]);
    }
    const std::size_t d0 = static_cast<std::size_t>(p.n_inv());
    for (std::size_t i = 0; i < p.monotone_design.size(); ++i) vin.t0.push_back(scaled[d0 + i]);
    for (std::size_t i = 0; i < p.free_design.size(); ++i)
        vin.z0.push_back(scaled[d0 + p.monotone_design.size() + i]);
    return record_forward(t, p.net, mv, vin);
}

} // namespace detail

// Reference expressions shared by every row with the same design values:
// the potential at C = I and the stress-free correction coefficients.
struct PotentialRefExpr {
    Var value;   // out_scale * P at the reference invariants
    Var oJ, o4;  // correction coefficients
    bool active = false;
};

inline PotentialRefExpr record_potential_reference(Tape& t, const NnPotential& p,
                                                   const ModelVars& mv,
                                                   const std::vector<Var>& design_leaves) {
    PotentialRefExpr ref;
    ref.oJ = t.constant(0.0);
    ref.o4 = t.constant(0.0);
    if (!p.corrections) {
        ref.value = t.constant(0.0);
        return ref;
    }
    ref.active = true;
    std::vector<Var> ref_raw;
    ref_raw.push_back(t.constant(3.0));
    ref_raw.push_back(t.constant(3.0));
    ref_raw.push_back(t.constant(1.0));
    if (p.transiso) {
        ref_raw.push_back(t.constant(1.0));
        ref_raw.push_back(t.constant(1.0));
    }
    ref_raw.insert(ref_raw.end(), design_leaves.begin(), design_leaves.end());
    const std::vector<Var> ref_scaled = detail::record_scaled_inputs(t, p, ref_raw);
    ref.value = t.mul(t.constant(p.out_scale), detail::record_net_value(t, p, mv, ref_scaled));
    const std::vector<Var> ref_grads = t.backward_graph(ref.value, ref_raw);
    const Var two = t.constant(2.0);
    const Var four = t.constant(4.0);
    Var oj = t.add(t.mul(two, ref_grads[NnPotential::kI1]),
                   t.mul(four, ref_grads[NnPotential::kI2]));
    oj = t.add(oj, ref_grads[NnPotential::kJ]);
    if (p.transiso) {
        oj = t.add(oj, t.mul(two, ref_grads[NnPotential::kI5]));
        ref.o4 = t.sub(ref_grads[NnPotential::kI4], ref_grads[NnPotential::kI5]);
    }
    ref.oJ = oj;
    return ref;
}

// Records the stress prediction of a potential at the row leaves, given the
// shared reference expressions. The derivative-of-network values are
// re-recorded tape expressions, so a backward sweep from any function of
// the stress reaches the parameters. `direction` is the fiber direction for
// anisotropic potentials (its structural tensor is constant per dataset and
// folded in as constants).
inline StressExpr record_potential_stress_sample(Tape& t, const NnPotential& p,
                                                 const ModelVars& mv, const RowLeaves& rl,
                                                 const PotentialRefExpr& ref,
                                                 const std::array<double, 3>& direction) {
    std::vector<Var> raw = rl.inv;
    raw.insert(raw.end(), rl.design.begin(), rl.design.end());
    const std::vector<Var> scaled = detail::record_scaled_inputs(t, p, raw);
    Var value = t.mul(t.constant(p.out_scale), detail::record_net_value(t, p, mv, scaled));
    std::vector<Var> grads = t.backward_graph(value, raw);

    const Var oJ = ref.oJ;
    const Var o4 = ref.o4;
    if (ref.active) {
        Var norm = t.sub(value, ref.value);
        norm = t.sub(norm, t.mul(oJ, t.sub(rl.inv[NnPotential::kJ], t.constant(1.0))));
        if (p.transiso)
            norm = t.sub(norm, t.mul(o4, t.sub(rl.inv[NnPotential::kI4], t.constant(1.0))));
        value = norm;
    }

    // effective invariant-space partials after the linear corrections
    Var dI1 = grads[NnPotential::kI1];
    Var dI2 = grads[NnPotential::kI2];
    Var dJ = ref.active ? t.sub(grads[NnPotential::kJ], oJ) : grads[NnPotential::kJ];
    Var dI4, dI5;
    if (p.transiso) {
        dI4 = ref.active ? t.sub(grads[NnPotential::kI4], o4) : grads[NnPotential::kI4];
        dI5 = grads[NnPotential::kI5];
    }

    StressExpr out;
    out.psi = value;
    const Var two = t.constant(2.0);
    const Var zero = t.constant(0.0);
    const std::array<double, 6> n6 = to_voigt6(outer(direction));
    // dI1 basis is the identity; dI4 basis is the structural tensor N
    for (int k = 0; k < 6; ++k) {
        const std::size_t ks = static_cast<std::size_t>(k);
        std::vector<Var> xs{dI2, dJ};
        std::vector<Var> ws{rl.b2[ks], rl.bJ[ks]};
        if (p.transiso) {
            xs.push_back(dI5);
            ws.push_back(rl.b5[ks]);
            xs.push_back(dI4);
            ws.push_back(t.constant(n6[ks]));
        }
        Var s = t.affine(xs, ws, zero);
        if (k < 3) s = t.add(s, dI1); // identity basis on the diagonal
        out.S[ks] = t.mul(two, s);
    }
    return out;
}

// Convenience wrapper: reference and sample recorded back to back.
inline StressExpr record_potential_stress(Tape& t, const NnPotential& p, const ModelVars& mv,
                                          const RowLeaves& rl,
                                          const std::array<double, 3>& direction = {1.0, 0.0, 0.0}) {
    const PotentialRefExpr ref = record_potential_reference(t, p, mv, rl.design);
    return record_potential_stress_sample(t, p, mv, rl, ref, direction);
}

} // namespace isnn
