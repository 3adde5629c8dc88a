#include "spdetaylor/schemes.hpp"

#include <cmath>
#include <memory>

#include "spdetaylor/error.hpp"
#include "spdetaylor/expint.hpp"

namespace spdetaylor
{
char const* to_string(SchemeId id)
{
    switch (id)
    {
        case SchemeId::ExpEuler: return "exp_euler";
        case SchemeId::TaylorW2: return "taylor_w2";
        case SchemeId::TaylorW3: return "taylor_w3";
        case SchemeId::RungeKutta: return "rk";
        case SchemeId::ImplicitEuler: return "implicit_euler";
    }
    return "?";
}

SchemeId parse_scheme(std::string_view name)
{
    for (auto id : {SchemeId::ExpEuler, SchemeId::TaylorW2, SchemeId::TaylorW3,
                    SchemeId::RungeKutta, SchemeId::ImplicitEuler})
    {
        if (name == to_string(id))
            return id;
    }
    fail(ErrorCode::Config, "unknown scheme '" + std::string(name) + "'");
}

NoiseRequest noise_needs(SchemeId id, SpectralModel const& m)
{
    NoiseRequest r;
    if (id == SchemeId::TaylorW3)
        r.time_integrals = m.scalar_jacobian() ? TimeIntegralMode::Diagonal : TimeIntegralMode::Full;
    if (id == SchemeId::RungeKutta)
        r.plain_integrals = true;
    return r;
}

std::optional<DerivationPath> scheme_wood(SchemeId id)
{
    switch (id)
    {
        case SchemeId::ExpEuler: return DerivationPath{{2, 1}};
        case SchemeId::TaylorW2: return DerivationPath{{2, 1}, {4, 1}};
        case SchemeId::TaylorW3:
        case SchemeId::RungeKutta: return DerivationPath{{2, 1}, {4, 1}, {6, 1}};
        case SchemeId::ImplicitEuler: return std::nullopt;
    }
    return std::nullopt;
}

//---------------------------------------------------------------------------//

StepWorkspace::StepWorkspace(SpectralModel const& m, double h) : h_(h), lambdas_(m.lambdas())
{
    if (!(h > 0))
        fail(ErrorCode::NonPositiveStep, "step size must be positive");
    auto n = Eigen::Index(m.dim());
    decay_.resize(n);
    phi1_.resize(n);
    for (Eigen::Index k = 0; k < n; ++k)
    {
        decay_[k] = expint::decay(m.lambda(std::size_t(k)), h);
        phi1_[k] = expint::phi1(m.lambda(std::size_t(k)), h);
    }
    if (m.scalar_jacobian())
    {
        d_.resize(n, 1);
        for (Eigen::Index k = 0; k < n; ++k)
            d_(k, 0) = expint::d_weight(m.lambda(std::size_t(k)), m.lambda(std::size_t(k)), h);
    }
    else
    {
        d_.resize(n, n);
        for (Eigen::Index k = 0; k < n; ++k)
            for (Eigen::Index j = 0; j < n; ++j)
                d_(k, j) = expint::d_weight(m.lambda(std::size_t(k)), m.lambda(std::size_t(j)), h);
    }
}

double StepWorkspace::self_test(std::size_t nodes) const
{
    auto rule = expint::gauss_legendre(16);
    std::size_t panels = std::max<std::size_t>(1, nodes / rule.size());
    double width = h_ / double(panels);
    double worst = 0;
    for (Eigen::Index k = 0; k < d_.rows(); ++k)
    {
        for (Eigen::Index c = 0; c < d_.cols(); ++c)
        {
            Eigen::Index j = full_d() ? c : k;
            double lk = lambdas_[std::size_t(k)], lj = lambdas_[std::size_t(j)];
            double q = 0;
            for (std::size_t p = 0; p < panels; ++p)
            {
                for (auto const& node : rule)
                {
                    double s = (double(p) + node.x) * width;
                    q += node.w * width * std::exp(-lk * (h_ - s)) * std::expm1(-lj * s);
                }
            }
            double err = std::fabs(d_(k, c) - q);
            if (err > 0)
                worst = std::max(worst, err / std::fabs(q));
        }
    }
    return worst;
}

//---------------------------------------------------------------------------//

namespace
{
void require_integrals(NoiseBundle const& nb, std::size_t n, bool full)
{
    bool ok = nb.mode == TimeIntegralMode::Full
              || (!full && nb.mode == TimeIntegralMode::Diagonal);
    if (!ok || std::size_t(nb.integrals.rows()) != n)
        fail(ErrorCode::MissingTimeIntegrals, "scheme needs sampled time integrals");
}

GalerkinState w2_correction(SpectralModel const& m, StepWorkspace const& ws, GalerkinState const& y)
{
    if (m.scalar_jacobian())
    {
        double a = m.jacobian(y)(0, 0);
        return a * ws.d().col(0).cwiseProduct(y);
    }
    Eigen::MatrixXd j = m.jacobian(y);
    return j.cwiseProduct(ws.d()) * y;
}
}  // namespace

GalerkinState exp_euler_step(SpectralModel const& m, StepWorkspace const& ws,
                             GalerkinState const& y, NoiseBundle const& nb)
{
    GalerkinState f = m.F(y);
    GalerkinState out(y.size());
    for (Eigen::Index k = 0; k < y.size(); ++k)
        out[k] = ws.decay()[k] * y[k] + ws.phi1()[k] * f[k] + nb.conv[k];
    return out;
}

GalerkinState taylor_w2_step(SpectralModel const& m, StepWorkspace const& ws,
                             GalerkinState const& y, NoiseBundle const& nb)
{
    return exp_euler_step(m, ws, y, nb) + w2_correction(m, ws, y);
}

GalerkinState taylor_w3_step(SpectralModel const& m, StepWorkspace const& ws,
                             GalerkinState const& y, NoiseBundle const& nb)
{
    auto n = y.size();
    bool scalar = m.scalar_jacobian();
    require_integrals(nb, std::size_t(n), !scalar);
    GalerkinState out = taylor_w2_step(m, ws, y, nb);
    if (scalar)
    {
        double a = m.jacobian(y)(0, 0);
        for (Eigen::Index k = 0; k < n; ++k)
            out[k] += a * nb.time_integral(k, k);
        return out;
    }
    Eigen::MatrixXd j = m.jacobian(y);
    out += j.cwiseProduct(nb.integrals).rowwise().sum();
    return out;
}

GalerkinState rk_step(SpectralModel const& m, StepWorkspace const& ws, GalerkinState const& y,
                      NoiseBundle const& nb)
{
    auto n = y.size();
    if (nb.plain.size() != n)
        fail(ErrorCode::MissingTimeIntegrals, "rk needs the plain time integrals of the convolution");
    double h = ws.h();
    GalerkinState z = nb.plain / h;
    if (nb.carried.size() == n)
        z += (ws.phi1().array() - h).matrix().cwiseProduct(nb.carried) / h;
    GalerkinState f = m.F(y + z);
    GalerkinState out(n);
    for (Eigen::Index k = 0; k < n; ++k)
        out[k] = ws.decay()[k] * y[k] + h * ws.decay()[k] * f[k] + nb.conv[k];
    return out;
}

GalerkinState implicit_euler_step(SpectralModel const& m, StepWorkspace const& ws,
                                  GalerkinState const& y, NoiseBundle const& nb)
{
    GalerkinState f = m.F(y);
    double h = ws.h();
    GalerkinState out(y.size());
    for (Eigen::Index k = 0; k < y.size(); ++k)
        out[k] = (y[k] + h * f[k] + nb.conv[k]) / (1 + m.lambda(std::size_t(k)) * h);
    return out;
}

GalerkinState step(SchemeId id, SpectralModel const& m, StepWorkspace const& ws,
                   GalerkinState const& y, NoiseBundle const& nb)
{
    switch (id)
    {
        case SchemeId::ExpEuler: return exp_euler_step(m, ws, y, nb);
        case SchemeId::TaylorW2: return taylor_w2_step(m, ws, y, nb);
        case SchemeId::TaylorW3: return taylor_w3_step(m, ws, y, nb);
        case SchemeId::RungeKutta: return rk_step(m, ws, y, nb);
        case SchemeId::ImplicitEuler: return implicit_euler_step(m, ws, y, nb);
    }
    return y;
}

NoiseSource exact_noise(SpectralModel const& m, double h, NoiseRequest request, NormalStream stream)
{
    auto cov = std::make_shared<StepCovariance const>(m, h, std::move(request));
    return [cov, stream](std::size_t k, Eigen::VectorXd const& carried) {
        return sample_step(*cov, stream, std::uint32_t(k), carried);
    };
}

NoiseSource coupled_noise(std::vector<NoiseBundle> coarse)
{
    auto shared = std::make_shared<std::vector<NoiseBundle> const>(std::move(coarse));
    return [shared](std::size_t k, Eigen::VectorXd const& carried) {
        NoiseBundle nb = shared->at(k);
        nb.carried = carried;
        return nb;
    };
}

Trajectory integrate(SchemeId id, SpectralModel const& m, GalerkinState const& y0, double horizon,
                     std::size_t steps, NoiseSource const& noise)
{
    if (steps == 0)
        fail(ErrorCode::InvalidArgument, "integrate needs at least one step");
    double h = horizon / double(steps);
    StepWorkspace ws(m, h);
    Trajectory tr;
    tr.times.push_back(0);
    tr.states.push_back(y0);
    Eigen::VectorXd carried = Eigen::VectorXd::Zero(y0.size());
    for (std::size_t k = 0; k < steps; ++k)
    {
        NoiseBundle nb = noise(k, carried);
        tr.states.push_back(step(id, m, ws, tr.states.back(), nb));
        tr.times.push_back(double(k + 1) * h);
        carried = ws.decay().cwiseProduct(carried) + nb.conv;
    }
    return tr;
}
}  // namespace spdetaylor
