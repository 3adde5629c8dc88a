#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "spdetaylor/model.hpp"
#include "spdetaylor/sampler.hpp"
#include "spdetaylor/trees.hpp"

namespace spdetaylor
{
enum class SchemeId
{
    ExpEuler,
    TaylorW2,
    TaylorW3,
    RungeKutta,
    ImplicitEuler
};

char const* to_string(SchemeId id);
SchemeId parse_scheme(std::string_view name);
//! Noise functionals the scheme consumes on this model.
NoiseRequest noise_needs(SchemeId id, SpectralModel const& m);
//! Derivation path of the wood the scheme truncates, if any.
std::optional<DerivationPath> scheme_wood(SchemeId id);

//! Per-(model, h) deterministic weights.
class StepWorkspace
{
  public:
    StepWorkspace(SpectralModel const& m, double h);

    double h() const { return h_; }
    Eigen::VectorXd const& decay() const { return decay_; }
    Eigen::VectorXd const& phi1() const { return phi1_; }
    //! D_kj; only the diagonal is stored when F' is scalar.
    Eigen::MatrixXd const& d() const { return d_; }
    bool full_d() const { return d_.cols() > 1; }

    //! Largest relative deviation of D from composite Gauss-Legendre quadrature.
    double self_test(std::size_t nodes = 10000) const;

  private:
    double h_;
    std::vector<double> lambdas_;
    Eigen::VectorXd decay_, phi1_;
    Eigen::MatrixXd d_;
};

GalerkinState exp_euler_step(SpectralModel const& m, StepWorkspace const& ws,
                             GalerkinState const& y, NoiseBundle const& nb);
GalerkinState taylor_w2_step(SpectralModel const& m, StepWorkspace const& ws,
                             GalerkinState const& y, NoiseBundle const& nb);
GalerkinState taylor_w3_step(SpectralModel const& m, StepWorkspace const& ws,
                             GalerkinState const& y, NoiseBundle const& nb);
GalerkinState rk_step(SpectralModel const& m, StepWorkspace const& ws, GalerkinState const& y,
                      NoiseBundle const& nb);
GalerkinState implicit_euler_step(SpectralModel const& m, StepWorkspace const& ws,
                                  GalerkinState const& y, NoiseBundle const& nb);

GalerkinState step(SchemeId id, SpectralModel const& m, StepWorkspace const& ws,
                   GalerkinState const& y, NoiseBundle const& nb);

//! Supplies the bundle for step k (carried state already filled in).
using NoiseSource = std::function<NoiseBundle(std::size_t k, Eigen::VectorXd const& carried)>;

//! Exact sampling from one path's stream.
NoiseSource exact_noise(SpectralModel const& m, double h, NoiseRequest request,
                        NormalStream stream);
//! Coarse bundles from a shared fine record.
NoiseSource coupled_noise(std::vector<NoiseBundle> coarse);

struct Trajectory
{
    std::vector<double> times;
    std::vector<GalerkinState> states;
};

Trajectory integrate(SchemeId id, SpectralModel const& m, GalerkinState const& y0, double horizon,
                     std::size_t steps, NoiseSource const& noise);
}  // namespace spdetaylor
