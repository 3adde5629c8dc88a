#include "spdetaylor/expint.hpp"

#include <cmath>

namespace spdetaylor::expint
{
namespace
{
constexpr double series_eps = 1e-18;
constexpr double near_rate = 0.05;

double factorial(int n)
{
    double f = 1;
    for (int k = 2; k <= n; ++k)
        f *= k;
    return f;
}

// sum_j z^j / ((p+1)(p+2)...(p+1+j)) * (p+1), all terms positive for z >= 0
double scaled_series(int p, double z)
{
    double term = 1.0 / (p + 1);
    double sum = term;
    for (int j = 1; j < 4000; ++j)
    {
        term *= z / (p + 1 + j);
        sum += term;
        if (term < series_eps * sum)
            break;
    }
    return sum;
}
}  // namespace

double moment(int p, double c, double h)
{
    double z = c * h;
    double scale = std::pow(h, p + 1);
    if (z < 0)
    {
        // sum_j (-z)^j / (j! (p+1+j))
        double term = 1, sum = 1.0 / (p + 1);
        for (int j = 1; j < 4000; ++j)
        {
            term *= -z / j;
            double add = term / (p + 1 + j);
            sum += add;
            if (add < series_eps * sum)
                break;
        }
        return scale * sum;
    }
    if (z <= 40 + 2.0 * p)
        return scale * std::exp(-z) * scaled_series(p, z);
    double partial = 0, term = 1;
    for (int m = 0; m <= p; ++m)
    {
        if (m)
            term *= z / m;
        partial += term;
    }
    return factorial(p) / std::pow(c, p + 1) * (1 - std::exp(-z) * partial);
}

double rmoment(int p, double c, double h)
{
    double z = c * h;
    double scale = std::pow(h, p + 1);
    if (z < 0)
    {
        // sum_j (-z)^j p! / (p+1+j)!
        double term = 1.0 / (p + 1), sum = term;
        for (int j = 1; j < 4000; ++j)
        {
            term *= -z / (p + 1 + j);
            sum += term;
            if (term < series_eps * sum)
                break;
        }
        return scale * sum;
    }
    if (z <= 40 + 2.0 * p)
    {
        // e^{-z} sum_j z^j / (j! (p+1+j))
        double term = 1, sum = 1.0 / (p + 1);
        for (int j = 1; j < 4000; ++j)
        {
            term *= z / j;
            double add = term / (p + 1 + j);
            sum += add;
            if (add < series_eps * sum)
                break;
        }
        return scale * std::exp(-z) * sum;
    }
    double r = -std::expm1(-z) / c;
    for (int m = 1; m <= p; ++m)
        r = std::pow(h, m) / c - m / c * r;
    return r;
}

double decay(double lambda, double h)
{
    return lambda == 0 ? 1.0 : std::exp(-lambda * h);
}

double phi1(double lambda, double h)
{
    return lambda == 0 ? h : -std::expm1(-lambda * h) / lambda;
}

double two_rate(double a, double b, double h)
{
    double d = a - b;
    if (std::fabs(d) * h < near_rate)
    {
        // e^{-b h} h sum_m (-d h)^m / (m+1)!
        double x = -d * h, term = 1, sum = 1;
        for (int m = 1; m < 30; ++m)
        {
            term *= x / (m + 1);
            sum += term;
            if (std::fabs(term) < series_eps * std::fabs(sum))
                break;
        }
        return decay(b, h) * h * sum;
    }
    return (decay(b, h) - decay(a, h)) / d;
}

double d_weight(double lk, double lj, double h)
{
    if (std::fabs(lj) * h >= near_rate)
        return two_rate(lj, lk, h) - phi1(lk, h);
    double sum = 0, coef = 1;
    for (int m = 1; m < 30; ++m)
    {
        coef *= -lj / m;
        double add = coef * rmoment(m, lk, h);
        sum += add;
        if (std::fabs(add) <= series_eps * std::fabs(sum))
            break;
    }
    return sum;
}

double conv_variance(double lambda, double b, double h)
{
    if (std::fabs(lambda) * h < 1e-12)
        return b * b * h;
    return b * b * (-std::expm1(-2 * lambda * h)) / (2 * lambda);
}

double evaluate(Kernel const& k, double tau)
{
    double sum = 0;
    for (auto const& t : k)
        sum += t.coef * std::pow(tau, t.power) * std::exp(-t.rate * tau);
    return sum;
}

double inner(Kernel const& a, Kernel const& b, double h)
{
    double sum = 0;
    for (auto const& x : a)
        for (auto const& y : b)
            sum += x.coef * y.coef * moment(x.power + y.power, x.rate + y.rate, h);
    return sum;
}

Kernel exp_kernel(double rate)
{
    return {{1.0, 0, rate}};
}

Kernel two_rate_kernel(double outer, double inner, double h)
{
    double d = outer - inner;
    if (std::fabs(d) * h < near_rate)
    {
        Kernel k;
        double coef = 1;
        for (int m = 0; m < 12; ++m)
        {
            if (m)
                coef *= -d / (m + 1);
            k.push_back({coef, m + 1, inner});
            if (std::fabs(coef) * std::pow(h, m) < series_eps)
                break;
        }
        return k;
    }
    return {{1 / d, 0, inner}, {-1 / d, 0, outer}};
}
}  // namespace spdetaylor::expint

namespace spdetaylor::expint
{
std::vector<Node> gauss_legendre(int n)
{
    std::vector<Node> rule(std::size_t(n), Node{0, 0});
    for (int i = 0; i < n; ++i)
    {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it)
        {
            double p0 = 1, p1 = x;
            for (int k = 2; k <= n; ++k)
            {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1);
            double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-16)
                break;
        }
        double p0 = 1, p1 = x;
        for (int k = 2; k <= n; ++k)
        {
            double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1);
        rule[std::size_t(i)] = {0.5 * (1 - x), 1.0 / ((1 - x * x) * dp * dp)};
    }
    return rule;
}
}  // namespace spdetaylor::expint
