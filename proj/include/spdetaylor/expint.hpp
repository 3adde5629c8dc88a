#pragma once

#include <vector>

namespace spdetaylor::expint
{
//! \int_0^h tau^p e^{-c tau} d tau, stable for any sign of c.
double moment(int p, double c, double h);
//! \int_0^h (h - w)^p e^{-c w} dw.
double rmoment(int p, double c, double h);

//! e^{-lambda h}; exactly 1 when lambda == 0.
double decay(double lambda, double h);
//! (1 - e^{-lambda h}) / lambda; exactly h when lambda == 0.
double phi1(double lambda, double h);
//! \int_0^h e^{-a u} e^{-b (h - u)} du (symmetric in a, b).
double two_rate(double a, double b, double h);
//! \int_0^h e^{-lk (h - s)} (e^{-lj s} - 1) ds.
double d_weight(double lk, double lj, double h);
//! Variance of the one-mode stochastic convolution over a step.
double conv_variance(double lambda, double b, double h);

//! Term coef * tau^power * e^{-rate tau}.
struct Term
{
    double coef;
    int power;
    double rate;
};
using Kernel = std::vector<Term>;

double evaluate(Kernel const& k, double tau);
//! L2(0,h) inner product of two kernels.
double inner(Kernel const& a, Kernel const& b, double h);

//! e^{-rate tau}.
Kernel exp_kernel(double rate);
//! (e^{-inner tau} - e^{-outer tau}) / (outer - inner), with the equal-rate limit.
Kernel two_rate_kernel(double outer, double inner, double h);
}  // namespace spdetaylor::expint

namespace spdetaylor::expint
{
struct Node
{
    double x;
    double w;
};
//! n-point Gauss-Legendre rule on [0, 1].
std::vector<Node> gauss_legendre(int n);
}  // namespace spdetaylor::expint
