#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "isnn/errors.hpp"
#include "isnn/sampling.hpp"
#include "isnn/tensor.hpp"

namespace isnn {

// Isotropic invariant set: I1 = tr C, I2 = tr Cof C, J = det F.
struct IsoInvariants {
    double I1 = 3.0, I2 = 3.0, J = 1.0;
};

// Transversely isotropic extension with structural tensor N = n (x) n:
// I4 = tr(C N), I5 = tr(Cof C N), Ib5 = tr(C^2 N).
struct TransIsoInvariants {
    double I1 = 3.0, I2 = 3.0, J = 1.0;
    double I4 = 1.0, I5 = 1.0, Ib5 = 1.0;
    std::array<double, 3> n{1.0, 0.0, 0.0};

    IsoInvariants iso() const { return IsoInvariants{I1, I2, J}; }
};

inline Tensor3 right_cauchy_green(const Tensor3& F) {
    return symmetrize(matmul(F.transpose(), F));
}

// Invariants written on a general matrix argument so that C-space finite
// differences of downstream potentials are well defined entrywise.
inline IsoInvariants invariants_iso_from_C(const Tensor3& C) {
    IsoInvariants inv;
    inv.I1 = C.trace();
    inv.I2 = cof3(C).trace();
    const double detC = det3(C);
    if (detC <= 0.0) throw InvertedElement("invariants: det C <= 0");
    inv.J = std::sqrt(detC);
    return inv;
}

inline IsoInvariants invariants_iso(const Tensor3& F) {
    if (det3(F) <= 0.0) throw InvertedElement("invariants_iso: det F <= 0");
    IsoInvariants inv = invariants_iso_from_C(right_cauchy_green(F));
    inv.J = det3(F); // exact, avoids the sqrt round-trip
    return inv;
}

inline TransIsoInvariants invariants_transiso_from_C(const Tensor3& C,
                                                     const std::array<double, 3>& n) {
    const double norm = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
    if (std::abs(norm - 1.0) > 1e-8) throw NonUnitDirection("invariants: |n| != 1");
    TransIsoInvariants inv;
    const IsoInvariants iso = invariants_iso_from_C(C);
    inv.I1 = iso.I1;
    inv.I2 = iso.I2;
    inv.J = iso.J;
    inv.n = n;
    const Tensor3 N = outer(n);
    inv.I4 = matmul(C, N).trace();
    inv.I5 = matmul(cof3(C), N).trace();
    inv.Ib5 = matmul(matmul(C, C), N).trace();
    return inv;
}

inline TransIsoInvariants invariants_transiso(const Tensor3& F, const std::array<double, 3>& n) {
    if (det3(F) <= 0.0) throw InvertedElement("invariants_transiso: det F <= 0");
    TransIsoInvariants inv = invariants_transiso_from_C(right_cauchy_green(F), n);
    inv.J = det3(F);
    return inv;
}

// Partial derivatives of a potential with respect to the invariants.
struct InvariantGrads {
    double dI1 = 0.0, dI2 = 0.0, dJ = 0.0;
    double dI4 = 0.0, dI5 = 0.0, dIb5 = 0.0;
};

// ---------------------------------------------------------------------------
// Analytic potentials used for data generation, with hand-coded gradients.

// Blatz-Ko, coupled isochoric/volumetric representation. mu: shear modulus,
// beta = nu / (1 - 2 nu).
inline double psi_blatzko(const IsoInvariants& v, double mu, double beta) {
    return 0.25 * mu * ((v.I1 - 3.0) + (std::pow(v.J, -2.0 * beta) - 1.0) / beta)
         + 0.25 * mu * ((v.I2 / (v.J * v.J) - 3.0) + (std::pow(v.J, 2.0 * beta) - 1.0) / beta);
}

inline InvariantGrads psi_blatzko_grads(const IsoInvariants& v, double mu, double beta) {
    InvariantGrads g;
    g.dI1 = 0.25 * mu;
    g.dI2 = 0.25 * mu / (v.J * v.J);
    g.dJ = 0.25 * mu * (-2.0 * std::pow(v.J, -2.0 * beta - 1.0)
                        - 2.0 * v.I2 / (v.J * v.J * v.J)
                        + 2.0 * std::pow(v.J, 2.0 * beta - 1.0));
    return g;
}

// Compressible Neo-Hookean.
inline double psi_neohookean(const IsoInvariants& v, double c1, double c2) {
    return 0.5 * c1 * (v.I1 - 3.0) - c1 * std::log(v.J) + 0.5 * c2 * (v.J - 1.0) * (v.J - 1.0);
}

inline InvariantGrads psi_neohookean_grads(const IsoInvariants& v, double c1, double c2) {
    InvariantGrads g;
    g.dI1 = 0.5 * c1;
    g.dJ = -c1 / v.J + c2 * (v.J - 1.0);
    return g;
}

// Polyconvex transversely isotropic potential (exponential fiber term).
inline double psi_poly_ti(const TransIsoInvariants& v, double c1, double c2, double c3, double c4) {
    const double w = v.I4 - 1.0;
    return c1 * (v.I1 - 3.0) + (c1 / c2) * (std::pow(v.J, -2.0 * c2) - 1.0)
         + c3 * (std::exp(c4 * w * w * w * w) - 1.0);
}

inline InvariantGrads psi_poly_ti_grads(const TransIsoInvariants& v, double c1, double c2,
                                        double c3, double c4) {
    InvariantGrads g;
    const double w = v.I4 - 1.0;
    g.dI1 = c1;
    g.dJ = -2.0 * c1 * std::pow(v.J, -2.0 * c2 - 1.0);
    g.dI4 = 4.0 * c3 * c4 * w * w * w * std::exp(c4 * w * w * w * w);
    return g;
}

// Non-polyconvex transversely isotropic potential; couples the fiber
// stretch to log J and carries a -Ib5 term.
inline double psi_nonpoly_ti(const TransIsoInvariants& v, double c0, double c1, double c2) {
    const double w = v.I4 - 1.0;
    const double lj = std::log(v.J);
    return -0.5 * c1 * (v.I1 - 3.0) - c1 * lj - 0.5 * c2 * (v.J - 1.0) * (v.J - 1.0)
         - w * (c0 + c1 * lj + c2 * w) - 0.5 * c0 * (v.Ib5 - 1.0);
}

inline InvariantGrads psi_nonpoly_ti_grads(const TransIsoInvariants& v, double c0, double c1,
                                           double c2) {
    InvariantGrads g;
    const double w = v.I4 - 1.0;
    const double lj = std::log(v.J);
    g.dI1 = -0.5 * c1;
    g.dJ = -c1 / v.J - c2 * (v.J - 1.0) - w * c1 / v.J;
    g.dI4 = -(c0 + c1 * lj + c2 * w) - w * c2;
    g.dIb5 = -0.5 * c0;
    return g;
}

// ---------------------------------------------------------------------------
// Second Piola-Kirchhoff stress S = 2 dPsi/dC by the invariant chain rule.

// dC-derivatives of the invariants as symmetric tensors, given the state.
struct StressBasis {
    Tensor3 dI1, dI2, dJ;          // always present
    Tensor3 dI4, dI5, dIb5;        // zero tensors unless a direction is given
    bool has_direction = false;
};

inline StressBasis stress_basis_from_C(const Tensor3& C, const std::array<double, 3>* n) {
    StressBasis b;
    const double detC = det3(C);
    if (detC <= 0.0) throw InvertedElement("stress_basis: det C <= 0");
    const Tensor3 Cinv = inv3(C);
    const double J = std::sqrt(detC);
    b.dI1 = Tensor3::identity();
    b.dI2 = Tensor3::identity() * C.trace() - C;
    b.dJ = Cinv * (0.5 * J);
    if (n != nullptr) {
        b.has_direction = true;
        const Tensor3 N = outer(*n);
        b.dI4 = N;
        const Tensor3 CinvN = matmul(Cinv, N);
        b.dI5 = (Cinv * CinvN.trace() - matmul(CinvN, Cinv)) * (J * J);
        b.dIb5 = matmul(C, N) + matmul(N, C);
    }
    return b;
}

inline StressBasis stress_basis(const Tensor3& F, const std::array<double, 3>* n) {
    return stress_basis_from_C(right_cauchy_green(F), n);
}

inline Tensor3 assemble_stress(const InvariantGrads& g, const StressBasis& b) {
    Tensor3 s = b.dI1 * g.dI1 + b.dI2 * g.dI2 + b.dJ * g.dJ;
    if (b.has_direction) s = s + b.dI4 * g.dI4 + b.dI5 * g.dI5 + b.dIb5 * g.dIb5;
    return symmetrize(s * 2.0);
}

// Generic entry point: the potential supplies invariant-space partials.
template <typename GradFn>
Tensor3 second_pk_stress(GradFn&& grads_at, const Tensor3& F,
                         const std::array<double, 3>* n = nullptr) {
    const StressBasis basis = stress_basis(F, n);
    const Tensor3 C = right_cauchy_green(F);
    const InvariantGrads g = n != nullptr
        ? grads_at(invariants_transiso_from_C(C, *n))
        : [&] {
              const IsoInvariants iso = invariants_iso_from_C(C);
              TransIsoInvariants t;
              t.I1 = iso.I1; t.I2 = iso.I2; t.J = iso.J;
              return grads_at(t);
          }();
    return assemble_stress(g, basis);
}

// symmetric 6-vector order used across datasets: S11 S22 S33 S12 S13 S23
inline std::array<double, 6> to_voigt6(const Tensor3& s) {
    return {s(0, 0), s(1, 1), s(2, 2), s(0, 1), s(0, 2), s(1, 2)};
}

inline Tensor3 from_voigt6(const std::array<double, 6>& v) {
    return Tensor3(v[0], v[3], v[4], v[3], v[1], v[5], v[4], v[5], v[2]);
}

// ---------------------------------------------------------------------------
// Deformation gradient sampling and dataset generation.

// LHS samples of F in delta-box around identity; det F <= 0.05 is rejected
// and redrawn so that larger boxes stay safe.
inline std::vector<Tensor3> sample_defgrads(std::size_t n, double delta, std::uint64_t seed) {
    if (delta < 0.0 || delta >= 0.5) throw InvalidBounds("sample_defgrads: need 0 <= delta < 0.5");
    std::vector<Tensor3> out(n, Tensor3::identity());
    if (delta == 0.0 || n == 0) return out;

    Vec lo(9), hi(9);
    for (int k = 0; k < 9; ++k) {
        const double base = k % 4 == 0 ? 1.0 : 0.0; // diagonal entries of identity
        lo[static_cast<std::size_t>(k)] = base - delta;
        hi[static_cast<std::size_t>(k)] = base + delta;
    }
    const Mat samples = lhs_sample(n, 9, lo, hi, seed);
    Rng redraw(seed ^ 0x9e3779b97f4a7c15ull);
    for (std::size_t i = 0; i < n; ++i) {
        Tensor3 f;
        for (int k = 0; k < 9; ++k) f.m[static_cast<std::size_t>(k)] = samples(i, static_cast<std::size_t>(k));
        int guard = 0;
        while (det3(f) <= 0.05 && guard++ < 1000) {
            for (int k = 0; k < 9; ++k)
                f.m[static_cast<std::size_t>(k)] = redraw.uniform(lo[static_cast<std::size_t>(k)], hi[static_cast<std::size_t>(k)]);
        }
        if (det3(f) <= 0.05) throw InvalidBounds("sample_defgrads: could not draw det F > 0.05");
        out[i] = f;
    }
    return out;
}

struct MaterialRow {
    Tensor3 F;
    Vec design;                    // same order as MaterialDataset::design_names
    std::array<double, 6> stress;  // S11 S22 S33 S12 S13 S23
};

struct MaterialDataset {
    std::vector<MaterialRow> rows;
    std::vector<std::string> design_names;
    std::string potential;
    double delta = 0.0;
    std::uint64_t seed = 0;
    bool has_direction = false;
    std::array<double, 3> direction{1.0, 0.0, 0.0};

    std::size_t size() const { return rows.size(); }
};

inline Vec linspace(double lo, double hi, std::size_t count) {
    Vec v(count);
    if (count == 1) {
        v[0] = lo;
        return v;
    }
    for (std::size_t i = 0; i < count; ++i)
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    return v;
}

// Cartesian product of the (mu, beta) grid with the sampled deformation
// states; stresses from the Blatz-Ko model.
inline MaterialDataset gen_blatzko_dataset(std::size_t n_f, const Vec& mu_grid,
                                           const Vec& beta_grid, double delta,
                                           std::uint64_t seed) {
    if (mu_grid.empty() || beta_grid.empty()) throw InvalidBounds("gen_blatzko_dataset: empty grid");
    MaterialDataset d;
    d.design_names = {"mu", "beta"};
    d.potential = "blatzko";
    d.delta = delta;
    d.seed = seed;
    const std::vector<Tensor3> fs = sample_defgrads(n_f, delta, seed);
    d.rows.reserve(mu_grid.size() * beta_grid.size() * n_f);
    for (double mu : mu_grid)
        for (double beta : beta_grid)
            for (const Tensor3& F : fs) {
                MaterialRow row;
                row.F = F;
                row.design = {mu, beta};
                const Tensor3 s = second_pk_stress(
                    [&](const TransIsoInvariants& v) { return psi_blatzko_grads(v.iso(), mu, beta); }, F);
                row.stress = to_voigt6(s);
                d.rows.push_back(row);
            }
    return d;
}

enum class TiPotential { Poly, NonPoly };

// Analytic transversely isotropic datasets for the gating study. Material
// constants are fixed (poly: c1..c4 = 1, nonpoly: c0..c2 = 2).
inline MaterialDataset gen_ti_dataset(TiPotential which, std::size_t n_f, double delta,
                                      std::uint64_t seed,
                                      const std::array<double, 3>& n = {1.0, 0.0, 0.0}) {
    MaterialDataset d;
    d.potential = which == TiPotential::Poly ? "poly-ti" : "nonpoly-ti";
    d.delta = delta;
    d.seed = seed;
    d.has_direction = true;
    d.direction = n;
    const std::vector<Tensor3> fs = sample_defgrads(n_f, delta, seed);
    d.rows.reserve(n_f);
    for (const Tensor3& F : fs) {
        MaterialRow row;
        row.F = F;
        const Tensor3 s = which == TiPotential::Poly
            ? second_pk_stress([](const TransIsoInvariants& v) { return psi_poly_ti_grads(v, 1.0, 1.0, 1.0, 1.0); }, F, &n)
            : second_pk_stress([](const TransIsoInvariants& v) { return psi_nonpoly_ti_grads(v, 2.0, 2.0, 2.0); }, F, &n);
        row.stress = to_voigt6(s);
        d.rows.push_back(row);
    }
    return d;
}

} // namespace isnn
