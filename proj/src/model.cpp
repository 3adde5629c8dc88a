#include "spdetaylor/model.hpp"

#include <charconv>
#include <cmath>
#include <iostream>
#include <numbers>
#include <sstream>

#include "spdetaylor/error.hpp"

namespace spdetaylor
{
namespace
{
constexpr int tanh_max_order = 8;

// Coefficients of P_k with g^(k)(u) = P_k(tanh u).
std::vector<std::vector<double>> const& tanh_polys()
{
    static std::vector<std::vector<double>> const polys = [] {
        std::vector<std::vector<double>> p{{0.0, 1.0}};
        for (int k = 1; k <= tanh_max_order; ++k)
        {
            auto const& prev = p.back();
            std::vector<double> deriv(prev.size() > 1 ? prev.size() - 1 : 1, 0.0);
            for (std::size_t i = 1; i < prev.size(); ++i)
                deriv[i - 1] = double(i) * prev[i];
            std::vector<double> next(deriv.size() + 2, 0.0);
            for (std::size_t i = 0; i < deriv.size(); ++i)
            {
                next[i] += deriv[i];
                next[i + 2] -= deriv[i];
            }
            p.push_back(std::move(next));
        }
        return p;
    }();
    return polys;
}

double parse_number(std::string_view text, std::string_view context)
{
    double value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        fail(ErrorCode::Config, "bad number '" + std::string(text) + "' in " + std::string(context));
    return value;
}
}  // namespace

NonlinearitySpec NonlinearitySpec::zero()
{
    return {};
}

NonlinearitySpec NonlinearitySpec::linear(double alpha)
{
    NonlinearitySpec s;
    s.kind_ = Kind::LinearMultiplication;
    s.alpha_ = alpha;
    return s;
}

NonlinearitySpec NonlinearitySpec::linear_profile(Profile alpha)
{
    NonlinearitySpec s;
    s.kind_ = Kind::LinearMultiplication;
    s.profile_ = std::move(alpha);
    return s;
}

NonlinearitySpec NonlinearitySpec::pointwise(Pointwise g)
{
    NonlinearitySpec s;
    s.kind_ = Kind::PointwiseSmooth;
    s.g_ = g;
    s.max_derivative_ = g == Pointwise::Tanh ? tanh_max_order : 64;
    return s;
}

NonlinearitySpec NonlinearitySpec::parse(std::string_view text)
{
    if (text == "zero")
        return zero();
    constexpr std::string_view lin = "linear_mult:alpha=";
    if (text.starts_with(lin))
        return linear(parse_number(text.substr(lin.size()), text));
    if (text == "pointwise:g=tanh")
        return pointwise(Pointwise::Tanh);
    if (text == "pointwise:g=cubic")
    {
        std::cerr << "warning: cubic nonlinearity has unbounded derivatives\n";
        return pointwise(Pointwise::Cubic);
    }
    fail(ErrorCode::Config, "unknown nonlinearity '" + std::string(text) + "'");
}

std::string NonlinearitySpec::describe() const
{
    switch (kind_)
    {
        case Kind::Zero: return "zero";
        case Kind::LinearMultiplication:
        {
            if (profile_)
                return "linear_mult:alpha=<profile>";
            std::ostringstream os;
            os << "linear_mult:alpha=" << alpha_;
            return os.str();
        }
        case Kind::PointwiseSmooth:
            return g_ == Pointwise::Tanh ? "pointwise:g=tanh" : "pointwise:g=cubic";
    }
    return "?";
}

double NonlinearitySpec::g(int order, double u) const
{
    if (g_ == Pointwise::Cubic)
    {
        switch (order)
        {
            case 0: return u - u * u * u;
            case 1: return 1 - 3 * u * u;
            case 2: return -6 * u;
            case 3: return -6;
            default: return 0;
        }
    }
    auto const& c = tanh_polys().at(std::size_t(order));
    double t = std::tanh(u), r = 0;
    for (auto it = c.rbegin(); it != c.rend(); ++it)
        r = r * t + *it;
    return r;
}

//---------------------------------------------------------------------------//

SpectralModel::SpectralModel(std::string name, ModelFamily family, std::vector<double> lambdas,
                             std::vector<double> bs, double kappa, NonlinearitySpec nonlinearity,
                             std::optional<SmoothnessParams> smoothness,
                             std::shared_ptr<SineCollocation const> collocation)
    : name_(std::move(name)),
      family_(family),
      lambdas_(std::move(lambdas)),
      bs_(std::move(bs)),
      kappa_(kappa),
      nonlinearity_(std::move(nonlinearity)),
      smoothness_(smoothness),
      collocation_(std::move(collocation))
{
    if (lambdas_.empty() || lambdas_.size() != bs_.size())
        fail(ErrorCode::InvalidArgument, "model needs matching nonempty eigenvalue and weight lists");
    if (kappa_ < 0)
        fail(ErrorCode::InvalidArgument, "kappa must be nonnegative");
    for (double l : lambdas_)
    {
        if (!(kappa_ + l > 0))
            fail(ErrorCode::InvalidArgument, "kappa + lambda_i must be positive");
    }
    if (collocation_ && collocation_->coefficient_count() != lambdas_.size())
        fail(ErrorCode::InvalidArgument, "collocation size does not match the mode count");
}

std::array<double, 3> SpectralModel::point(std::size_t k) const
{
    if (!collocation_)
        return {double(k), 0, 0};
    auto g = collocation_->grid_per_axis();
    if (collocation_->dims() == 1)
        return {collocation_->node(k), 0, 0};
    return {collocation_->node(k / (g * g)), collocation_->node((k / g) % g),
            collocation_->node(k % g)};
}

std::vector<double> SpectralModel::grid_values(GalerkinState const& v) const
{
    if (collocation_)
        return collocation_->to_grid(v);
    return {v.data(), v.data() + v.size()};
}

GalerkinState SpectralModel::from_grid(std::vector<double> const& values) const
{
    if (collocation_)
        return collocation_->to_coeffs(values);
    return Eigen::Map<Eigen::VectorXd const>(values.data(), Eigen::Index(values.size()));
}

GalerkinState SpectralModel::apply_F(int order, GalerkinState const& v,
                                     std::span<GalerkinState const> dirs) const
{
    auto n = Eigen::Index(dim());
    if (order < 0 || std::size_t(order) != dirs.size())
        fail(ErrorCode::InvalidArgument, "apply_F needs exactly `order` directions");
    if (v.size() != n)
        fail(ErrorCode::InvalidArgument, "state length does not match the model");
    if (order > nonlinearity_.max_derivative())
    {
        fail(ErrorCode::DerivativeOrderExceeded,
             "derivative order " + std::to_string(order) + " exceeds "
                 + std::to_string(nonlinearity_.max_derivative()));
    }
    switch (nonlinearity_.kind())
    {
        case NonlinearitySpec::Kind::Zero: return GalerkinState::Zero(n);
        case NonlinearitySpec::Kind::LinearMultiplication:
        {
            if (order >= 2)
                return GalerkinState::Zero(n);
            GalerkinState const& arg = order == 0 ? v : dirs[0];
            if (nonlinearity_.is_constant_linear())
                return nonlinearity_.alpha() * arg;
            auto values = grid_values(arg);
            for (std::size_t k = 0; k < values.size(); ++k)
                values[k] *= nonlinearity_.profile()(point(k));
            return from_grid(values);
        }
        case NonlinearitySpec::Kind::PointwiseSmooth:
        {
            auto values = grid_values(v);
            for (auto& u : values)
                u = nonlinearity_.g(order, u);
            for (auto const& d : dirs)
            {
                auto dv = grid_values(d);
                for (std::size_t k = 0; k < values.size(); ++k)
                    values[k] *= dv[k];
            }
            return from_grid(values);
        }
    }
    return GalerkinState::Zero(n);
}

GalerkinState SpectralModel::F(GalerkinState const& v) const
{
    return apply_F(0, v, {});
}

bool SpectralModel::scalar_jacobian() const
{
    return nonlinearity_.kind() == NonlinearitySpec::Kind::Zero || nonlinearity_.is_constant_linear();
}

Eigen::MatrixXd SpectralModel::jacobian(GalerkinState const& v) const
{
    auto n = Eigen::Index(dim());
    if (scalar_jacobian())
    {
        double a = nonlinearity_.kind() == NonlinearitySpec::Kind::Zero ? 0.0 : nonlinearity_.alpha();
        return a * Eigen::MatrixXd::Identity(n, n);
    }
    Eigen::MatrixXd j(n, n);
    GalerkinState e = GalerkinState::Zero(n);
    for (Eigen::Index c = 0; c < n; ++c)
    {
        e[c] = 1;
        j.col(c) = apply_F(1, v, std::span<GalerkinState const>(&e, 1));
        e[c] = 0;
    }
    return j;
}

SpectralModel SpectralModel::with_noise_scale(double scale) const
{
    SpectralModel copy = *this;
    for (auto& b : copy.bs_)
        b *= scale;
    return copy;
}

SpectralModel SpectralModel::with_nonlinearity(NonlinearitySpec nonlinearity) const
{
    SpectralModel copy = *this;
    copy.nonlinearity_ = std::move(nonlinearity);
    return copy;
}

//---------------------------------------------------------------------------//

SpectralModel heat_1d_model(std::size_t modes, NonlinearitySpec f)
{
    if (modes == 0)
        fail(ErrorCode::InvalidArgument, "heat1d needs at least one mode");
    std::vector<double> lambdas(modes), bs(modes, 1.0);
    for (std::size_t n = 1; n <= modes; ++n)
        lambdas[n - 1] = std::numbers::pi * std::numbers::pi * double(n * n);
    return SpectralModel("heat1d", ModelFamily::Heat1D, std::move(lambdas), std::move(bs), 0.0,
                         std::move(f), SmoothnessParams{0.25, true, 0.25},
                         std::make_shared<SineCollocation>(1, modes));
}

SpectralModel trace_class_3d_model(std::size_t n, NonlinearitySpec f)
{
    if (n == 0)
        fail(ErrorCode::InvalidArgument, "trace3d needs at least one mode per axis");
    std::vector<double> lambdas, bs;
    for (std::size_t a = 1; a <= n; ++a)
        for (std::size_t b = 1; b <= n; ++b)
            for (std::size_t c = 1; c <= n; ++c)
            {
                lambdas.push_back(std::numbers::pi * std::numbers::pi * double(a * a + b * b + c * c));
                bs.push_back(1.0 / double(a * b * c));
            }
    return SpectralModel("trace3d", ModelFamily::Trace3D, std::move(lambdas), std::move(bs), 0.0,
                         std::move(f), SmoothnessParams{0.5, true, 0.5},
                         std::make_shared<SineCollocation>(3, n));
}

SpectralModel sode_model(std::size_t d, std::vector<double> weights, NonlinearitySpec f)
{
    if (d == 0 || weights.size() != d)
        fail(ErrorCode::InvalidArgument, "sode needs d >= 1 weights");
    return SpectralModel("sode", ModelFamily::Sode, std::vector<double>(d, 0.0), std::move(weights),
                         1.0, std::move(f), SmoothnessParams{1.0, true, 0.5}, nullptr);
}

SpectralModel custom_model(std::vector<double> lambdas, std::vector<double> bs, double kappa,
                           NonlinearitySpec f)
{
    return SpectralModel("custom", ModelFamily::Custom, std::move(lambdas), std::move(bs), kappa,
                         std::move(f), std::nullopt, nullptr);
}

GalerkinState initial_state(SpectralModel const& m, std::string_view name)
{
    auto n = Eigen::Index(m.dim());
    GalerkinState u = GalerkinState::Zero(n);
    if (name == "zero")
        return u;
    if (name == "first_mode")
    {
        u[0] = 1;
        return u;
    }
    if (name != "bump")
        fail(ErrorCode::Config, "unknown initial state '" + std::string(name) + "'");
    auto c = m.collocation();
    if (!c)
        return GalerkinState::Ones(n);
    // sine coefficients of x(1-x)
    auto coef = [](std::size_t k) {
        if (k % 2 == 0)
            return 0.0;
        double x = double(k) * std::numbers::pi;
        return std::numbers::sqrt2 * 4 / (x * x * x);
    };
    std::size_t p = c->modes_per_axis();
    if (c->dims() == 1)
    {
        for (std::size_t k = 1; k <= p; ++k)
            u[Eigen::Index(k - 1)] = coef(k);
        return u;
    }
    Eigen::Index idx = 0;
    for (std::size_t a = 1; a <= p; ++a)
        for (std::size_t b = 1; b <= p; ++b)
            for (std::size_t d = 1; d <= p; ++d)
                u[idx++] = coef(a) * coef(b) * coef(d);
    return u;
}

char const* to_string(SeriesVerdict v)
{
    switch (v)
    {
        case SeriesVerdict::Converges: return "Converges";
        case SeriesVerdict::Diverges: return "Diverges";
        case SeriesVerdict::Unknown: return "Unknown";
    }
    return "?";
}

Assumption3Report assumption3_report(SpectralModel const& m, double gamma, std::size_t terms)
{
    if (terms == 0)
        fail(ErrorCode::InvalidArgument, "assumption3_report needs terms >= 1");
    Assumption3Report report;
    double p = 2 * gamma - 1;
    double pi2 = std::numbers::pi * std::numbers::pi;
    bool silent = true;
    for (double b : m.bs())
        silent = silent && b == 0;
    switch (m.family())
    {
        case ModelFamily::Heat1D:
        {
            double scale = m.b(0) * m.b(0);
            double s = 0;
            for (std::size_t n = 1; n <= terms; ++n)
            {
                s += scale * std::pow(m.kappa() + pi2 * double(n * n), p);
                report.partial_sums.push_back(s);
            }
            // summand ~ n^(2p): p-series
            report.verdict = silent || 2 * p < -1 ? SeriesVerdict::Converges : SeriesVerdict::Diverges;
            return report;
        }
        case ModelFamily::Trace3D:
        {
            double scale = m.b(0) * m.b(0);
            std::vector<double> shell(terms + 1, 0.0);
            for (std::size_t a = 1; a <= terms; ++a)
                for (std::size_t b = 1; b <= terms; ++b)
                    for (std::size_t c = 1; c <= terms; ++c)
                    {
                        double w = 1.0 / double(a * b * c);
                        double lam = pi2 * double(a * a + b * b + c * c);
                        shell[std::max({a, b, c})] += scale * w * w * std::pow(m.kappa() + lam, p);
                    }
            double s = 0;
            for (std::size_t k = 1; k <= terms; ++k)
            {
                s += shell[k];
                report.partial_sums.push_back(s);
            }
            // worst direction i = (k,1,1): k^(-2) k^(2p)
            report.verdict = silent || 2 * p - 2 < -1 ? SeriesVerdict::Converges
                                                      : SeriesVerdict::Diverges;
            return report;
        }
        case ModelFamily::Sode:
        case ModelFamily::Custom:
        {
            double s = 0;
            for (std::size_t k = 0; k < std::min(terms, m.dim()); ++k)
            {
                s += m.b(k) * m.b(k) * std::pow(m.kappa() + m.lambda(k), p);
                report.partial_sums.push_back(s);
            }
            bool finite = m.family() == ModelFamily::Sode || silent;
            report.verdict = finite ? SeriesVerdict::Converges : SeriesVerdict::Unknown;
            return report;
        }
    }
    return report;
}
}  // namespace spdetaylor
