#include "dropflow/anisotropy.hpp"

#include <catch2/catch.hpp>
#include <random>

using namespace dropflow;

namespace {

Vec<2> dir2(double th) { return Vec<2>(std::cos(th), std::sin(th)); }

std::vector<Anisotropy<2>> closed_form_kinds() {
    Mat<2> a;
    a << 2, 0, 0, 1;
    Mat<2> b;
    b << 1.5, 0.4, 0.4, 0.9;
    return {Anisotropy<2>::euclidean(), Anisotropy<2>::linear_map(a),
            Anisotropy<2>::linear_map(b), Anisotropy<2>::smoothed_l1(0.1),
            Anisotropy<2>::smoothed_l1(0.35)};
}

}  // namespace

TEST_CASE("anisotropy values") {
    auto euc = Anisotropy<2>::euclidean();
    CHECK(euc.value(Vec<2>(3, 4)) == Approx(5.0));
    CHECK(euc.value(Vec<2>::Zero()) == 0.0);

    Mat<2> a;
    a << 2, 0, 0, 1;
    auto lm = Anisotropy<2>::linear_map(a);
    CHECK(lm.value(Vec<2>(1, 0)) == Approx(2.0));

    // SmoothedL1 value against an independent reimplementation of the formula,
    // plus homogeneity/evenness sampling.
    const double eps = 0.1;
    auto sl1 = Anisotropy<2>::smoothed_l1(eps);
    auto reference = [eps](const Vec<2>& x) {
        const double r2 = x[0] * x[0] + x[1] * x[1];
        return std::sqrt(x[0] * x[0] + eps * eps * r2) + std::sqrt(x[1] * x[1] + eps * eps * r2);
    };
    CHECK(sl1.value(Vec<2>(1, 0)) == Approx(reference(Vec<2>(1, 0))).epsilon(1e-14));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        const Vec<2> x(u(rng), u(rng));
        const double lam = 0.1 + std::abs(u(rng));
        CHECK(sl1.value(x) == Approx(reference(x)).margin(1e-12));
        CHECK(sl1.value(lam * x) == Approx(lam * sl1.value(x)).margin(1e-11));
        CHECK(sl1.value(-x) == Approx(sl1.value(x)).margin(1e-12));
    }
}

TEST_CASE("gradients and Hessians") {
    auto euc = Anisotropy<2>::euclidean();
    CHECK((euc.gradient(Vec<2>(0, 1)) - Vec<2>(0, 1)).norm() < 1e-14);
    CHECK_THROWS_AS(euc.gradient(Vec<2>::Zero()), SingularPointError);
    CHECK_THROWS_AS(euc.hessian(Vec<2>::Zero()), SingularPointError);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (const auto& phi : closed_form_kinds()) {
        for (int i = 0; i < 60; ++i) {
            Vec<2> x(u(rng), u(rng));
            if (x.norm() < 0.3) x += Vec<2>(1, 1);
            // 0-homogeneity of the gradient
            CHECK((phi.gradient(2.0 * x) - phi.gradient(x)).cwiseAbs().maxCoeff() < 1e-10);
            // Euler relations
            CHECK(phi.gradient(x).dot(x) == Approx(phi.value(x)).epsilon(1e-9));
            CHECK((phi.hessian(x) * x).norm() < 1e-9 * std::max(1.0, phi.value(x)));
            // gradient against central differences
            const double d = 1e-6;
            for (int c = 0; c < 2; ++c) {
                Vec<2> xp = x, xm = x;
                xp[c] += d;
                xm[c] -= d;
                const double fd = (phi.value(xp) - phi.value(xm)) / (2 * d);
                CHECK(phi.gradient(x)[c] == Approx(fd).margin(1e-6));
            }
            // Hessian against central differences of the gradient
            const double dh = 1e-5;
            for (int c = 0; c < 2; ++c) {
                Vec<2> xp = x, xm = x;
                xp[c] += dh;
                xm[c] -= dh;
                const Vec<2> fd = (phi.gradient(xp) - phi.gradient(xm)) / (2 * dh);
                const Vec<2> hc = phi.hessian(x).col(c);
                CHECK((fd - hc).norm() < 1e-4 * std::max(1.0, hc.norm()));
            }
        }
    }
}

TEST_CASE("LinearMap gradient matches finite differences at (1,1)") {
    Mat<2> a;
    a << 2, 0, 0, 1;
    auto lm = Anisotropy<2>::linear_map(a);
    const Vec<2> x(1, 1);
    const double d = 1e-6;
    for (int c = 0; c < 2; ++c) {
        Vec<2> xp = x, xm = x;
        xp[c] += d;
        xm[c] -= d;
        CHECK(lm.gradient(x)[c] ==
              Approx((lm.value(xp) - lm.value(xm)) / (2 * d)).margin(1e-6));
    }
}

TEST_CASE("dual anisotropies") {
    auto euc = Anisotropy<2>::euclidean();
    DualAnisotropy<2> deuc(euc);
    CHECK(deuc.rep().kind() == AnisotropyKind::Euclidean);
    CHECK(deuc.value(Vec<2>(3, 4)) == Approx(5.0));

    Mat<2> a;
    a << 2, 0, 0, 1;
    auto lm = Anisotropy<2>::linear_map(a);
    DualAnisotropy<2> dlm(lm);
    CHECK(dlm.value(Vec<2>(1, 0)) == Approx(0.5).epsilon(1e-12));
    // closed form |A^{-1} x| cross-validated against the maximizer
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 25; ++i) {
        Vec<2> x(u(rng), u(rng));
        if (x.norm() < 0.2) continue;
        const auto m = dlm.value_by_maximization(x);
        CHECK(m.value == Approx(dlm.value(x)).epsilon(1e-7));
        // the maximizer is the dual gradient (envelope relation)
        CHECK((m.argmax - dlm.gradient(x)).norm() < 1e-4);
    }

    // bidual recovers phi for the fitted dual
    auto sl1 = Anisotropy<2>::smoothed_l1(0.1);
    DualAnisotropy<2> dsl(sl1);
    DualAnisotropy<2> ddsl(dsl.rep());
    const Vec<2> probe(0.6, 0.8);
    CHECK(ddsl.value(probe) == Approx(sl1.value(probe)).epsilon(1e-4));

    // Young inequality x . y <= phi^o(x) phi(y) on random pairs
    for (const auto& phi : closed_form_kinds()) {
        DualAnisotropy<2> dual(phi);
        std::mt19937_64 r2(17);
        for (int i = 0; i < 10000; ++i) {
            Vec<2> x(u(r2), u(r2)), y(u(r2), u(r2));
            CHECK(x.dot(y) <= dual.value(x) * phi.value(y) * (1.0 + 1e-5) + 1e-12);
        }
    }
}

TEST_CASE("norm bounds") {
    auto euc = Anisotropy<2>::euclidean();
    CHECK(euc.norm_bounds().first == Approx(1.0));
    CHECK(euc.norm_bounds().second == Approx(1.0));

    Mat<2> a;
    a << 2, 0, 0, 1;
    auto lm = Anisotropy<2>::linear_map(a);
    const auto [lo, hi] = norm_bounds(lm);
    CHECK(lo == Approx(1.0).epsilon(1e-9));   // singular values of A
    CHECK(hi == Approx(2.0).epsilon(1e-9));
    // cross-check by sphere sampling
    double slo = 1e300, shi = 0;
    for (int i = 0; i < 4096; ++i) {
        const double v = lm.value(dir2(kPi * i / 4096));
        slo = std::min(slo, v);
        shi = std::max(shi, v);
    }
    CHECK(slo == Approx(lo).epsilon(1e-5));
    CHECK(shi == Approx(hi).epsilon(1e-5));

    // sampled bounds stable under resolution doubling
    auto sample_bounds = [](const Anisotropy<2>& phi, int m) {
        double l = 1e300, h = 0;
        for (int i = 0; i < m; ++i) {
            const double v = phi.value(dir2(kPi * i / m));
            l = std::min(l, v);
            h = std::max(h, v);
        }
        return std::pair{l, h};
    };
    auto sl1 = Anisotropy<2>::smoothed_l1(0.1);
    const auto b1 = sample_bounds(sl1, 4096);
    const auto b2 = sample_bounds(sl1, 8192);
    CHECK(std::abs(b1.first - b2.first) < 1e-3);
    CHECK(std::abs(b1.second - b2.second) < 1e-3);
}

TEST_CASE("ellipticity certification") {
    auto euc = Anisotropy<2>::euclidean();
    auto rep = certify_ellipticity(euc, 512);
    CHECK(rep.elliptic);
    CHECK(rep.gamma == Approx(1.0).epsilon(1e-10));
    CHECK(rep.ball_condition_ok);
    CHECK(rep.agreement);

    CHECK_THROWS_AS(certify_ellipticity(euc, 8), ResolutionError);
    CHECK_THROWS_AS(Anisotropy<2>::smoothed_l1(0.0), ConfigError);

    // gamma monotone in the smoothing parameter on a fixed sample grid
    double prev = 0.0;
    for (double eps : {0.05, 0.1, 0.2, 0.4}) {
        auto r = certify_ellipticity(Anisotropy<2>::smoothed_l1(eps), 1024);
        CHECK(r.elliptic);
        CHECK(r.gamma >= prev - 1e-12);
        prev = r.gamma;
    }

    Mat<2> b;
    b << 1.5, 0.4, 0.4, 0.9;
    auto r = certify_ellipticity(Anisotropy<2>::linear_map(b), 1024);
    CHECK(r.elliptic);
    CHECK(r.agreement);

    // brute-force dense-sampling oracle for the SmoothedL1 gamma
    auto sl1 = Anisotropy<2>::smoothed_l1(0.1);
    auto cert = certify_ellipticity(sl1, 2048);
    double brute = 1e300;
    for (int i = 0; i < 4096; ++i) {
        const Vec<2> x = dir2(kPi * i / 4096);
        const Vec<2> y(-x[1], x[0]);
        brute = std::min(brute, (sl1.hessian(x) * y).dot(y));
    }
    CHECK(cert.gamma == Approx(brute).epsilon(0.01));
}

TEST_CASE("tabulated 2-D anisotropy") {
    // Build a table from a known smooth norm and compare all evaluators.
    auto ref = Anisotropy<2>::smoothed_l1(0.25);
    std::vector<double> angles, values;
    for (int i = 0; i < 720; ++i) {
        const double th = 2.0 * kPi * i / 720;
        angles.push_back(th);
        values.push_back(ref.value(dir2(th)));
    }
    auto tab = Anisotropy<2>::tabulated(angles, values);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        Vec<2> x(u(rng), u(rng));
        if (x.norm() < 0.3) continue;
        CHECK(tab.value(x) == Approx(ref.value(x)).epsilon(2e-4));
        CHECK(tab.value(-x) == Approx(tab.value(x)).margin(1e-12));
        CHECK(tab.value(2.0 * x) == Approx(2.0 * tab.value(x)).margin(1e-10));
        CHECK((tab.gradient(x) - ref.gradient(x)).norm() < 2e-2);
        // Euler relations hold exactly for the spline representation
        CHECK(tab.gradient(x).dot(x) == Approx(tab.value(x)).epsilon(1e-9));
        CHECK((tab.hessian(x) * x).norm() < 1e-9);
    }
    CHECK_THROWS_AS(Anisotropy<2>::tabulated({0.0, 1.0}, {1.0, 1.0}), ConfigError);
}

TEST_CASE("3-D anisotropies") {
    auto euc = Anisotropy<3>::euclidean();
    CHECK(euc.value(Vec<3>(1, 2, 2)) == Approx(3.0));
    Mat<3> a = Mat<3>::Identity();
    a(0, 0) = 2;
    auto lm = Anisotropy<3>::linear_map(a);
    CHECK(lm.value(Vec<3>(1, 0, 0)) == Approx(2.0));
    DualAnisotropy<3> dlm(lm);
    CHECK(dlm.value(Vec<3>(1, 0, 0)) == Approx(0.5).epsilon(1e-10));

    auto sl1 = Anisotropy<3>::smoothed_l1(0.1);
    auto rep = certify_ellipticity(sl1, 512);
    CHECK(rep.elliptic);
    CHECK(rep.gamma > 0.0);

    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    DualAnisotropy<3> dsl(sl1);
    for (int i = 0; i < 500; ++i) {
        Vec<3> x(u(rng), u(rng), u(rng)), y(u(rng), u(rng), u(rng));
        CHECK(x.dot(y) <= dsl.value(x) * sl1.value(y) * (1.0 + 2e-3) + 1e-12);
    }
}
