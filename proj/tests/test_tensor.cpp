#include <catch2/catch.hpp>

#include "isnn/rng.hpp"
#include "isnn/tensor.hpp"

using namespace isnn;

namespace {

// Brute-force determinant as the permutation sum over all 3! permutations.
double det3_oracle(const Tensor3& a) {
    const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    const double signs[6] = {1, -1, -1, 1, 1, -1};
    double d = 0.0;
    for (int p = 0; p < 6; ++p)
        d += signs[p] * a(0, perms[p][0]) * a(1, perms[p][1]) * a(2, perms[p][2]);
    return d;
}

Tensor3 random_tensor(Rng& rng, double lo = -2.0, double hi = 2.0) {
    Tensor3 t;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) t(i, j) = rng.uniform(lo, hi);
    return t;
}

} // namespace

TEST_CASE("det3 on identity and diagonal") {
    CHECK(det3(Tensor3::identity()) == 1.0);
    CHECK(det3(Tensor3::diag(2, 3, 4)) == 24.0);
}

TEST_CASE("det3 matches permutation-sum oracle") {
    Rng rng(42);
    for (int k = 0; k < 200; ++k) {
        const Tensor3 m = random_tensor(rng);
        CHECK(det3(m) == Approx(det3_oracle(m)).margin(1e-12));
    }
}

TEST_CASE("cof3 identities") {
    CHECK(cof3(Tensor3::identity()).max_abs() == 1.0);
    const Tensor3 c = cof3(Tensor3::diag(2, 3, 4));
    CHECK(c(0, 0) == 12.0);
    CHECK(c(1, 1) == 8.0);
    CHECK(c(2, 2) == 6.0);

    // m . Cof(m)^T = det(m) I
    Rng rng(7);
    for (int k = 0; k < 200; ++k) {
        const Tensor3 m = random_tensor(rng);
        const Tensor3 lhs = matmul(m, cof3(m).transpose());
        const double d = det3(m);
        Tensor3 want = Tensor3::diag(d, d, d);
        CHECK((lhs - want).max_abs() <= 1e-10);
    }
}

TEST_CASE("inv3 basics and singularity guard") {
    CHECK((inv3(Tensor3::identity()) - Tensor3::identity()).max_abs() == 0.0);
    const Tensor3 inv = inv3(Tensor3::diag(2, 4, 5));
    CHECK(inv(0, 0) == Approx(0.5));
    CHECK(inv(1, 1) == Approx(0.25));
    CHECK(inv(2, 2) == Approx(0.2));

    Rng rng(11);
    for (int k = 0; k < 100; ++k) {
        Tensor3 m = random_tensor(rng);
        if (std::abs(det3(m)) < 1e-3) continue;
        CHECK((matmul(m, inv3(m)) - Tensor3::identity()).max_abs() <= 1e-10);
    }

    Tensor3 sing = Tensor3::diag(1e-16, 1, 1); // det = 1e-16
    CHECK_THROWS_AS(inv3(sing), SingularMatrix);
}

TEST_CASE("det3(cof3(m)) equals det3(m)^2") {
    Rng rng(3);
    for (int k = 0; k < 200; ++k) {
        const Tensor3 m = random_tensor(rng);
        const double d = det3(m);
        if (std::abs(d) < 1e-2) continue;
        CHECK(det3(cof3(m)) == Approx(d * d).epsilon(1e-8));
    }
}

TEST_CASE("cof3(C) = det3(C) inv3(C) for SPD C") {
    Rng rng(5);
    for (int k = 0; k < 100; ++k) {
        const Tensor3 f = random_tensor(rng, -0.3, 0.3) + Tensor3::identity();
        const Tensor3 c = symmetrize(matmul(f.transpose(), f));
        const Tensor3 lhs = cof3(c);
        const Tensor3 rhs = inv3(c) * det3(c);
        CHECK((lhs - rhs).max_abs() <= 1e-9);
    }
}

TEST_CASE("jacobi eigenvalues of symmetric matrices") {
    Mat m(2, 2);
    m(0, 0) = 2; m(0, 1) = 1; m(1, 0) = 1; m(1, 1) = 2;
    const Vec ev = jacobi_eigenvalues(m);
    CHECK(std::min(ev[0], ev[1]) == Approx(1.0).margin(1e-12));
    CHECK(std::max(ev[0], ev[1]) == Approx(3.0).margin(1e-12));

    // random symmetric: eigenvalue sum equals trace, min_eigenvalue of
    // A^T A style Gram matrices is non-negative
    Rng rng(9);
    for (int k = 0; k < 50; ++k) {
        const std::size_t n = 2 + rng.below(4);
        Mat a(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) a(i, j) = rng.uniform(-1, 1);
        Mat g(n, n);
        double tr = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0.0;
                for (std::size_t c = 0; c < n; ++c) s += a(c, i) * a(c, j);
                g(i, j) = s;
                if (i == j) tr += s;
            }
        const Vec ev2 = jacobi_eigenvalues(g);
        double sum = 0.0, mn = ev2[0];
        for (double v : ev2) { sum += v; mn = std::min(mn, v); }
        CHECK(sum == Approx(tr).margin(1e-9));
        CHECK(mn >= -1e-10);
    }
}
