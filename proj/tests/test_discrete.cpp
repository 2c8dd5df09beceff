#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "ut/discrete.hpp"
#include "ut/lti.hpp"

using namespace ut;
using Catch::Approx;

TEST_CASE("discretize maps the integrator to the trapezoid rule") {
    const double dt = 0.01;
    DiscreteFilter f = discretize(TransferFunction{{1.0}, {1.0, 0.0}}, dt);

    // y[n] = y[n-1] + dt/2 (u[n] + u[n-1]) replayed independently
    std::vector<double> u{0.0, 1.0, 1.0, 0.5, -2.0, 3.0, 3.0, 0.0, 1.0};
    double y_ref = 0.0, u_prev = 0.0;
    for (double v : u) {
        y_ref += 0.5 * dt * (v + u_prev);
        u_prev = v;
        REQUIRE(f.step(v) == Approx(y_ref).margin(1e-15));
    }
}

TEST_CASE("discretize keeps constants as pass-through") {
    DiscreteFilter f = discretize(TransferFunction{{2.5}, {1.0}}, 1e-3);
    for (double v : {0.0, 1.0, -3.0, 7.5})
        REQUIRE(f.step(v) == Approx(2.5 * v).margin(1e-15));
}

TEST_CASE("tustin preserves dc gain exactly") {
    for (const TransferFunction& tf :
         {TransferFunction{{1.0}, {1.0, 1.0}},
          TransferFunction{{3.0}, {0.05, 1.0}},
          butterworth_lowpass(2, 50.0),
          TransferFunction{{2.0, 5.0}, {0.1, 0.7, 5.0}}}) {
        DiscreteFilter f = discretize(tf, 0.1);
        // z = 1: dc gain is sum(b)/sum(a)
        const double num = std::accumulate(f.b().begin(), f.b().end(), 0.0);
        const double den = std::accumulate(f.a().begin(), f.a().end(), 0.0);
        REQUIRE(num / den == Approx(tf.num.back() / tf.den.back()).epsilon(1e-12));
    }
}

TEST_CASE("step response of a discretized lag converges to the plant gain") {
    DiscreteFilter f = discretize(TransferFunction{{4.0}, {0.05, 1.0}}, 1e-3);
    double y = 0.0;
    for (int i = 0; i < 2000; ++i) y = f.step(1.0);
    REQUIRE(y == Approx(4.0).epsilon(1e-9));
}

TEST_CASE("improper transfer functions cannot be discretized") {
    REQUIRE_THROWS_AS(discretize(TransferFunction{{1.0, 0.0}, {1.0}}, 1e-3), ImproperTf);
    REQUIRE_THROWS_AS(discretize(TransferFunction{{1.0}, {1.0, 0.0}}, 0.0), OutOfRange);
}

TEST_CASE("dead time becomes a whole-sample delay line") {
    const double dt = 1e-4;
    DiscreteFilter plain = discretize(TransferFunction{{1.0}, {0.01, 1.0}}, dt);
    DiscreteFilter delayed = discretize(TransferFunction{{1.0}, {0.01, 1.0}, 5e-4}, dt);

    std::vector<double> yp, yd;
    for (int i = 0; i < 100; ++i) {
        const double u = i == 0 ? 1.0 : 0.0; // unit impulse
        yp.push_back(plain.step(u));
        yd.push_back(delayed.step(u));
    }
    for (int i = 0; i < 95; ++i)
        REQUIRE(yd[static_cast<std::size_t>(i) + 5] ==
                Approx(yp[static_cast<std::size_t>(i)]).margin(1e-15));
    for (int i = 0; i < 5; ++i) REQUIRE(yd[static_cast<std::size_t>(i)] == 0.0);
}

TEST_CASE("reset returns the filter to a cold start") {
    DiscreteFilter f = discretize(TransferFunction{{1.0}, {0.02, 1.0}, 3e-4}, 1e-4);
    std::vector<double> first;
    for (int i = 0; i < 50; ++i) first.push_back(f.step(std::sin(0.3 * i)));
    f.reset();
    for (int i = 0; i < 50; ++i)
        REQUIRE(f.step(std::sin(0.3 * i)) == first[static_cast<std::size_t>(i)]);
}

TEST_CASE("discrete frequency response matches the continuous prototype") {
    // well below Nyquist the bilinear map is faithful
    const TransferFunction tf{{1.0}, {0.05, 1.0}};
    const double dt = 1e-4;
    DiscreteFilter f = discretize(tf, dt);

    const double w = 20.0; // rad/s, wT = 0.002
    // drive with a sine, compare steady-state amplitude with |H(jw)|
    double peak = 0.0;
    const int n = static_cast<int>(2.0 * std::numbers::pi / w / dt) * 8;
    for (int i = 0; i < n; ++i) {
        const double y = f.step(std::sin(w * i * dt));
        if (i > n / 2) peak = std::max(peak, std::abs(y));
    }
    REQUIRE(peak == Approx(std::abs(freq_response(tf, w))).epsilon(1e-3));
}
