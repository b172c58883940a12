#include <doctest.h>

#include <cmath>

#include "piid/quadrature.hpp"
#include "piid/special_functions.hpp"

using namespace piid;

TEST_CASE("finite intervals") {
    auto quad = [](double x) { return x * x; };
    CHECK(integrate(quad, 0, 1, 1e-12).value == doctest::Approx(1.0 / 3).epsilon(1e-13));
    CHECK(integrate(quad, 1, 0, 1e-12).value == doctest::Approx(-1.0 / 3).epsilon(1e-13));
    CHECK(integrate(quad, 2, 2, 1e-12).value == 0.0);
}

TEST_CASE("infinite intervals") {
    CHECK(integrate([](double x) { return norm_pdf(x); },
                    -std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity(), 1e-11)
              .value == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(integrate([](double x) { return x * x * norm_pdf(x); },
                    -std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity(), 1e-11)
              .value == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(integrate([](double x) { return std::exp(-x); }, 0.0,
                    std::numeric_limits<double>::infinity(), 1e-11)
              .value == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(integrate([](double x) { return std::exp(x); },
                    -std::numeric_limits<double>::infinity(), 0.0, 1e-11)
              .value == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("integrable endpoint singularity") {
    const IntegrationResult res =
        integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-9);
    CHECK(res.value == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("oscillatory integrand") {
    // int_0^pi sin = 2
    const IntegrationResult res = integrate([](double x) { return std::sin(x); }, 0.0, M_PI, 1e-12);
    CHECK(res.value == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(res.abs_error < 1e-10);
}
