#include <doctest.h>

#include <cmath>
#include <functional>

#include "spdetaylor/expint.hpp"

using namespace spdetaylor::expint;

namespace
{
//! Composite Simpson in long double on pieces graded geometrically toward both
//! endpoints, so stiff exponentials are resolved; the oracle for every closed form below.
double simpson(std::function<long double(long double)> const& f, double a, double b, int n = 1000)
{
    auto piece = [&](long double lo, long double hi) {
        long double hh = (hi - lo) / n;
        long double s = f(lo) + f(hi);
        for (int i = 1; i < n; ++i)
            s += (i % 2 ? 4 : 2) * f(lo + i * hh);
        return s * hh / 3;
    };
    long double len = static_cast<long double>(b) - a;
    long double total = piece(a + len / 4, a + 3 * len / 4);
    for (int k = 2; k < 60; ++k)
    {
        long double outer = len / std::pow(2.0L, k), inner = outer / 2;
        total += piece(a + inner, a + outer) + piece(b - outer, b - inner);
    }
    long double tiny = len / std::pow(2.0L, 60);
    total += piece(a, a + tiny) + piece(b - tiny, b);
    return static_cast<double>(total);
}

bool close(double a, double b, double rel, double abs = 0)
{
    return std::fabs(a - b) <= rel * std::fabs(b) + abs;
}
}  // namespace

TEST_CASE("moment against quadrature")
{
    for (int p : {0, 1, 2, 5, 9})
    {
        for (double c : {-30.0, -2.0, -1e-9, 0.0, 1e-9, 0.3, 7.0, 80.0, 900.0})
        {
            for (double h : {1e-3, 0.05, 0.5})
            {
                double exact = simpson([&](long double t) { return std::pow(t, p) * std::exp(-c * t); }, 0, h);
                CAPTURE(p);
                CAPTURE(c);
                CAPTURE(h);
                CHECK(close(moment(p, c, h), exact, 1e-10, 1e-300));
            }
        }
    }
}

TEST_CASE("rmoment against quadrature")
{
    for (int p : {0, 1, 3, 6})
    {
        for (double c : {-20.0, -0.5, 0.0, 0.4, 12.0, 300.0})
        {
            for (double h : {1e-3, 0.1, 1.0})
            {
                double exact = simpson([&](long double w) { return std::pow(h - w, p) * std::exp(-c * w); }, 0, h);
                CAPTURE(p);
                CAPTURE(c);
                CAPTURE(h);
                CHECK(close(rmoment(p, c, h), exact, 1e-10, 1e-300));
            }
        }
    }
}

TEST_CASE("phi1, decay and their limits")
{
    CHECK(phi1(0.0, 0.37) == 0.37);
    CHECK(decay(0.0, 0.37) == 1.0);
    for (double l : {1e-14, 1e-6, 0.1, 9.87, 1e4})
    {
        for (double h : {1e-4, 0.1, 1.0})
        {
            double exact = simpson([&](long double s) { return std::exp(-l * s); }, 0, h);
            CHECK(close(phi1(l, h), exact, 1e-11));
            CHECK(decay(l, h) == std::exp(-l * h));
        }
    }
}

TEST_CASE("two_rate is symmetric and matches quadrature")
{
    double rates[] = {0.0, 1e-8, 0.5, 0.51, 9.8696, 39.48, 39.4801, 2000.0};
    for (double a : rates)
    {
        for (double b : rates)
        {
            for (double h : {1e-3, 0.0625, 1.0})
            {
                double exact = simpson([&](long double u) { return std::exp(-a * u - b * (h - u)); }, 0, h);
                CAPTURE(a);
                CAPTURE(b);
                CAPTURE(h);
                CHECK(close(two_rate(a, b, h), exact, 1e-10, 1e-300));
                CHECK(two_rate(a, b, h) == doctest::Approx(two_rate(b, a, h)).epsilon(1e-13));
            }
        }
    }
    CHECK(two_rate(3.0, 3.0, 0.5) == doctest::Approx(0.5 * std::exp(-1.5)).epsilon(1e-15));
}

TEST_CASE("d_weight against quadrature")
{
    double rates[] = {0.0, 1e-7, 0.3, 9.8696, 88.8, 3000.0};
    for (double lk : rates)
    {
        for (double lj : rates)
        {
            for (double h : {1e-3, 0.03, 0.5})
            {
                double exact = simpson(
                    [&](long double s) { return std::exp(-lk * (h - s)) * (std::exp(-lj * s) - 1); }, 0, h);
                CAPTURE(lk);
                CAPTURE(lj);
                CAPTURE(h);
                CHECK(close(d_weight(lk, lj, h), exact, 1e-9, 1e-300));
            }
        }
    }
    CHECK(d_weight(5.0, 0.0, 0.1) == 0.0);
}

TEST_CASE("conv_variance is the OU variance")
{
    CHECK(conv_variance(0.0, 1.0, 0.25) == 0.25);
    CHECK(conv_variance(0.0, 0.5, 0.25) == 0.0625);
    for (double l : {1e-3, 0.7, 9.8696, 1e3})
    {
        for (double h : {1e-3, 0.05, 1.0})
        {
            double formula = 4.0 * (1 - std::exp(-2 * l * h)) / (2 * l);
            CHECK(close(conv_variance(l, 2.0, h), formula, 1e-10));
        }
    }
}

TEST_CASE("kernel inner products")
{
    double h = 0.07;
    Kernel k1 = exp_kernel(3.0);
    Kernel k2 = two_rate_kernel(40.0, 3.0, h);
    Kernel k3 = two_rate_kernel(3.01, 3.0, h);  // near-equal rates use the series
    for (auto const* a : {&k1, &k2, &k3})
    {
        for (auto const* b : {&k1, &k2, &k3})
        {
            double exact = simpson([&](long double t) { return evaluate(*a, t) * evaluate(*b, t); }, 0, h);
            CHECK(close(inner(*a, *b, h), exact, 1e-10, 1e-300));
        }
    }
    for (double t : {0.0, 0.01, 0.05, 0.07})
    {
        double direct = (std::exp(-3.0 * t) - std::exp(-3.01 * t)) / 0.01;
        CHECK(evaluate(k3, t) == doctest::Approx(direct).epsilon(1e-8));
    }
}

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1 exactly")
{
    for (int n : {1, 4, 16})
    {
        auto rule = gauss_legendre(n);
        REQUIRE(rule.size() == std::size_t(n));
        for (int d = 0; d < 2 * n; ++d)
        {
            double s = 0;
            for (auto const& node : rule)
                s += node.w * std::pow(node.x, d);
            CHECK(s == doctest::Approx(1.0 / (d + 1)).epsilon(1e-14));
        }
    }
}
