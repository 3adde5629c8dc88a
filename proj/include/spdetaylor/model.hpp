#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "spdetaylor/collocation.hpp"

namespace spdetaylor
{
//! Coefficients in the truncated eigenbasis.
using GalerkinState = Eigen::VectorXd;

struct SmoothnessParams
{
    double gamma;       //!< supremum of admissible gamma
    bool gamma_strict;  //!< gamma itself is excluded
    double delta;
};

enum class ModelFamily
{
    Heat1D,
    Trace3D,
    Sode,
    Custom
};

class NonlinearitySpec
{
  public:
    enum class Kind
    {
        Zero,
        LinearMultiplication,
        PointwiseSmooth
    };
    enum class Pointwise
    {
        Tanh,
        Cubic  //!< g(u) = u - u^3
    };
    using Profile = std::function<double(std::array<double, 3> const&)>;

    static NonlinearitySpec zero();
    static NonlinearitySpec linear(double alpha);
    static NonlinearitySpec linear_profile(Profile alpha);
    static NonlinearitySpec pointwise(Pointwise g);
    //! "zero", "linear_mult:alpha=0.5", "pointwise:g=tanh".
    static NonlinearitySpec parse(std::string_view text);

    Kind kind() const { return kind_; }
    double alpha() const { return alpha_; }
    Profile const& profile() const { return profile_; }
    Pointwise pointwise_kind() const { return g_; }
    int max_derivative() const { return max_derivative_; }
    bool is_constant_linear() const { return kind_ == Kind::LinearMultiplication && !profile_; }
    //! Derivatives of order >= 2 vanish, so F^(n) does not depend on the base point.
    bool is_affine() const { return kind_ != Kind::PointwiseSmooth; }
    std::string describe() const;

    //! g^(order)(u) for pointwise kinds.
    double g(int order, double u) const;

  private:
    Kind kind_ = Kind::Zero;
    double alpha_ = 0;
    Profile profile_;
    Pointwise g_ = Pointwise::Tanh;
    int max_derivative_ = 64;
};

class SpectralModel
{
  public:
    SpectralModel(std::string name, ModelFamily family, std::vector<double> lambdas,
                  std::vector<double> bs, double kappa, NonlinearitySpec nonlinearity,
                  std::optional<SmoothnessParams> smoothness,
                  std::shared_ptr<SineCollocation const> collocation);

    std::string const& name() const { return name_; }
    ModelFamily family() const { return family_; }
    std::size_t dim() const { return lambdas_.size(); }
    std::vector<double> const& lambdas() const { return lambdas_; }
    std::vector<double> const& bs() const { return bs_; }
    double lambda(std::size_t k) const { return lambdas_[k]; }
    double b(std::size_t k) const { return bs_[k]; }
    double kappa() const { return kappa_; }
    NonlinearitySpec const& nonlinearity() const { return nonlinearity_; }
    std::optional<SmoothnessParams> const& smoothness() const { return smoothness_; }
    //! Null for coordinate models.
    SineCollocation const* collocation() const { return collocation_.get(); }

    //! F^(order)(v)(dirs...).
    GalerkinState apply_F(int order, GalerkinState const& v,
                          std::span<GalerkinState const> dirs) const;
    GalerkinState F(GalerkinState const& v) const;
    //! Matrix of F'(v) in the eigenbasis.
    Eigen::MatrixXd jacobian(GalerkinState const& v) const;
    //! F'(v) is a multiple of the identity for every v.
    bool scalar_jacobian() const;

    SpectralModel with_noise_scale(double scale) const;
    SpectralModel with_nonlinearity(NonlinearitySpec nonlinearity) const;

  private:
    std::vector<double> grid_values(GalerkinState const& v) const;
    GalerkinState from_grid(std::vector<double> const& values) const;
    std::array<double, 3> point(std::size_t k) const;

    std::string name_;
    ModelFamily family_;
    std::vector<double> lambdas_;
    std::vector<double> bs_;
    double kappa_;
    NonlinearitySpec nonlinearity_;
    std::optional<SmoothnessParams> smoothness_;
    std::shared_ptr<SineCollocation const> collocation_;
};

SpectralModel heat_1d_model(std::size_t modes, NonlinearitySpec f);
SpectralModel trace_class_3d_model(std::size_t modes_per_axis, NonlinearitySpec f);
SpectralModel sode_model(std::size_t d, std::vector<double> weights, NonlinearitySpec f);
SpectralModel custom_model(std::vector<double> lambdas, std::vector<double> bs, double kappa,
                           NonlinearitySpec f);

//! "zero", "bump" (x(1-x) per axis, ones for coordinate models), "first_mode".
GalerkinState initial_state(SpectralModel const& m, std::string_view name);

enum class SeriesVerdict
{
    Converges,
    Diverges,
    Unknown
};

char const* to_string(SeriesVerdict v);

struct Assumption3Report
{
    std::vector<double> partial_sums;
    SeriesVerdict verdict;
};

/*!
 * Partial sums of b_i^2 (kappa + lambda_i)^(2 gamma - 1).
 *
 * Preset families are summed from their closed-form eigenvalue law (1-D: the
 * first k modes, 3-D: the cube {1..k}^3) so k may exceed the model's mode count.
 */
Assumption3Report assumption3_report(SpectralModel const& m, double gamma, std::size_t terms);
}  // namespace spdetaylor
