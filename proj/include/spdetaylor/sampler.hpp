#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "spdetaylor/expint.hpp"
#include "spdetaylor/model.hpp"
#include "spdetaylor/rng.hpp"

namespace spdetaylor
{
enum class TimeIntegralMode
{
    None,
    Diagonal,  //!< only I_jj
    Full
};

//! Which functionals of each driving mode are sampled jointly.
struct NoiseRequest
{
    TimeIntegralMode time_integrals = TimeIntegralMode::None;
    //! \int X_j ds over the step (unweighted).
    bool plain_integrals = false;
    //! Convolution with rate lambda_j - shift, for the exact linear reference.
    std::optional<double> shift;

    friend bool operator==(NoiseRequest const&, NoiseRequest const&) = default;
};

//! Smallest request covering both.
NoiseRequest merge(NoiseRequest a, NoiseRequest const& b);

struct NoiseBundle
{
    double h = 0;
    TimeIntegralMode mode = TimeIntegralMode::None;
    Eigen::VectorXd increments;  //!< b_j times the Brownian increment
    Eigen::VectorXd conv;
    Eigen::VectorXd shifted;
    Eigen::VectorXd plain;
    //! N x N for Full, N x 1 (entry (j,0) = I_jj) for Diagonal.
    Eigen::MatrixXd integrals;
    Eigen::VectorXd carried;

    //! I_kj; throws MissingTimeIntegrals if not sampled.
    double time_integral(Eigen::Index k, Eigen::Index j) const;
};

/*!
 * Joint Gaussian law of one step's functionals, per driving mode.
 *
 * For driving mode j the functional list is: increment, conv, [shifted],
 * [plain], [I_kj for the requested k]. Each is b_j \int kernel(h - r) d beta_j.
 */
class StepCovariance
{
  public:
    StepCovariance(SpectralModel const& m, double h, NoiseRequest request);

    double h() const { return h_; }
    NoiseRequest const& request() const { return request_; }
    std::size_t dim() const { return lambdas_.size(); }
    std::size_t functional_count() const { return count_; }

    Eigen::Index conv_index() const { return 1; }
    Eigen::Index shifted_index() const { return shifted_; }
    Eigen::Index plain_index() const { return plain_; }
    //! Row of I_kj within driving mode j's functionals.
    Eigen::Index integral_index(Eigen::Index k) const
    {
        return request_.time_integrals == TimeIntegralMode::Full ? integrals_ + k : integrals_;
    }

    //! Factor L with L L^T the covariance of mode j's functionals.
    Eigen::MatrixXd const& factor(std::size_t j) const { return factors_[j]; }
    Eigen::MatrixXd covariance(std::size_t j) const;
    //! Same covariance from direct kernel inner products (independent route).
    Eigen::MatrixXd closed_form(std::size_t j) const;
    std::vector<expint::Kernel> kernels(std::size_t j) const;

    double decay(std::size_t j) const { return decay_[j]; }

  private:
    double h_;
    NoiseRequest request_;
    std::vector<double> lambdas_;
    std::vector<double> bs_;
    std::vector<double> decay_;
    std::size_t count_ = 0;
    Eigen::Index shifted_ = -1, plain_ = -1, integrals_ = -1;
    std::vector<Eigen::MatrixXd> factors_;
};

NoiseBundle sample_step(StepCovariance const& cov, NormalStream const& stream, std::uint32_t step,
                        Eigen::VectorXd const& carried);

//! O_{k+1} = e^{-lambda h} carried + conv.
Eigen::VectorXd advance_carried(StepCovariance const& cov, Eigen::VectorXd const& carried,
                                NoiseBundle const& nb);

//! Per-fine-step constants shared by every aggregation level.
class AggregationWeights
{
  public:
    AggregationWeights(SpectralModel const& m, double fine_h, NoiseRequest request);

    double fine_h() const { return h_; }
    NoiseRequest const& request() const { return request_; }

  private:
    friend class Aggregator;
    double h_;
    NoiseRequest request_;
    Eigen::VectorXd decay_, shifted_decay_, phi_;
    Eigen::MatrixXd two_rate_;  // (k,j) for Full, diagonal as N x 1 otherwise
};

//! Exact streaming combination of consecutive fine bundles into one coarse bundle.
class Aggregator
{
  public:
    explicit Aggregator(AggregationWeights const& w) : w_(&w) {}

    void absorb(NoiseBundle const& fine);
    std::size_t count() const { return count_; }
    //! Aggregate so far; resets the aggregator.
    NoiseBundle take(Eigen::VectorXd carried);

  private:
    AggregationWeights const* w_;
    NoiseBundle acc_;
    std::size_t count_ = 0;
};

struct FineRecord
{
    double fine_h = 0;
    std::vector<NoiseBundle> steps;
};

//! Coarse bundles built from groups of `factor` consecutive fine steps.
std::vector<NoiseBundle> coarsen(FineRecord const& record, AggregationWeights const& w,
                                 std::size_t factor);

//! Exact fine bundles for `substeps` steps of size h / substeps.
FineRecord sample_record(SpectralModel const& m, double h, std::size_t substeps,
                         NoiseRequest request, NormalStream const& stream,
                         std::uint32_t first_step = 0);

/*!
 * Fine-grid oracle: Brownian and exact OU increments per substep, time
 * integrals by left-endpoint quadrature against the exact semigroup factor.
 */
std::pair<NoiseBundle, FineRecord> aggregate_step(SpectralModel const& m, double h,
                                                  std::size_t substeps,
                                                  TimeIntegralMode mode,
                                                  NormalStream const& stream,
                                                  std::uint32_t step = 0);
}  // namespace spdetaylor
