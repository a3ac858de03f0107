#include <doctest.h>

#include <cmath>

#include "calib/rng.hpp"
#include "calib/stats.hpp"

using namespace calib;

TEST_CASE("uniform four-class labels") {
    LabelVector y(8);
    y << 0, 1, 2, 3, 0, 1, 2, 3;
    const DispersionStats s = dispersion(y, 4);
    CHECK(s.imbalance_ratio == doctest::Approx(1.0));
    CHECK(s.entropy == doctest::Approx(std::log(4.0)).epsilon(1e-12));
    CHECK(s.simpson == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(s.effective_classes == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(s.simpson_vs_balanced == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("single class") {
    LabelVector y(5);
    y.setZero();
    const DispersionStats s = dispersion(y, 3);
    CHECK(s.present_classes == 1);
    CHECK(s.imbalance_ratio == 1.0);
    CHECK(s.entropy == doctest::Approx(0.0));
    CHECK(s.simpson == doctest::Approx(1.0));
    CHECK(s.effective_classes == doctest::Approx(1.0));
}

TEST_CASE("effective classes is the inverse Simpson index on random inputs") {
    Rng rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        const int C = 2 + static_cast<int>(rng.index(10));
        const int n = 1 + static_cast<int>(rng.index(200));
        LabelVector y(n);
        for (int i = 0; i < n; ++i)
            y[i] = static_cast<int>(rng.index(C));
        const DispersionStats s = dispersion(y, C);
        CHECK(std::abs(s.effective_classes * s.simpson - 1.0) < 1e-12);
        CHECK(s.simpson >= 1.0 / s.present_classes - 1e-12);
        CHECK(s.simpson <= 1.0 + 1e-12);
        CHECK(s.entropy <= std::log(static_cast<double>(s.present_classes)) + 1e-12);
        CHECK(s.imbalance_ratio >= 1.0);
    }
}

TEST_CASE("dispersion is invariant under class relabeling") {
    LabelVector y(10);
    y << 0, 0, 0, 0, 0, 0, 1, 1, 1, 2;
    LabelVector relabeled(10);
    relabeled << 2, 2, 2, 2, 2, 2, 0, 0, 0, 1;
    const DispersionStats a = dispersion(y, 3);
    const DispersionStats b = dispersion(relabeled, 3);
    CHECK(a.imbalance_ratio == b.imbalance_ratio);
    CHECK(a.entropy == doctest::Approx(b.entropy).epsilon(1e-15));
    CHECK(a.simpson == doctest::Approx(b.simpson).epsilon(1e-15));
}

TEST_CASE("skew maximizes simpson, balance minimizes it") {
    LabelVector balanced(6);
    balanced << 0, 0, 1, 1, 2, 2;
    LabelVector skewed(6);
    skewed << 0, 0, 0, 0, 1, 2;
    const DispersionStats b = dispersion(balanced, 3);
    const DispersionStats s = dispersion(skewed, 3);
    CHECK(b.simpson == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(s.simpson > b.simpson);
    CHECK(s.entropy < b.entropy);
    CHECK(s.imbalance_ratio == doctest::Approx(4.0));
}
