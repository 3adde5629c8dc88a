#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spdetaylor/model.hpp"
#include "spdetaylor/sampler.hpp"
#include "spdetaylor/schemes.hpp"
#include "spdetaylor/trees.hpp"

namespace spdetaylor
{
enum class ExperimentMode
{
    Local,  //!< one step from t0 = 0, error at t* = h
    Global  //!< error at t* = T
};

char const* to_string(ExperimentMode mode);

using Stepper = std::function<GalerkinState(StepWorkspace const&, GalerkinState const&,
                                            NoiseBundle const&)>;

//! Anything that advances a state with one coarse bundle.
struct Consumer
{
    std::string name;
    Stepper step;
    NoiseRequest needs;
    std::optional<DerivationPath> wood;
};

Consumer scheme_consumer(SchemeId id, SpectralModel const& m);

struct ExperimentSpec
{
    SpectralModel model;
    GalerkinState u0;
    std::vector<Consumer> consumers;
    std::vector<std::size_t> ladder;  //!< step counts M, strictly increasing
    std::size_t paths = 1000;
    std::uint64_t seed = 0;
    ExperimentMode mode = ExperimentMode::Local;
    double horizon = 1;
    //! Fine substeps per finest level step for the nonlinear reference.
    std::size_t reference_substeps = 64;
    std::size_t threads = 1;
    bool hash_increments = false;
    //! Throw InsufficientPaths when the slope CI is wider than 0.2.
    bool enforce_ci = true;
    std::string config_hash;
};

//! Throws on ladder, path or horizon problems.
void validate(ExperimentSpec const& spec);

struct LevelStat
{
    std::size_t steps;
    double h;
    double error;   //!< sqrt(mean ||.||^2)
    double std_error;  //!< delta-method standard error of `error`
    std::size_t paths;
};

struct Regression
{
    double slope;
    double ci_low;
    double ci_high;
};

//! Unweighted least squares of log error on log h, CI from per-level standard errors.
Regression fit_slope(std::vector<LevelStat> const& levels);

struct ErrorReport
{
    std::string consumer;
    std::string model;
    ExperimentMode mode = ExperimentMode::Local;
    std::vector<LevelStat> levels;
    Regression fit{};
    double first_half_slope = 0;
    double second_half_slope = 0;
    bool monotone = true;
    std::optional<double> theoretical_order;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::string reference;
};

struct ExperimentResult
{
    std::vector<ErrorReport> reports;
    std::string reference;
    //! Per consumer of the fine stream (levels then reference); empty unless requested.
    std::vector<std::pair<std::string, std::string>> increment_hashes;
    bool coupled() const;
};

/*!
 * Coupled strong-error study.
 *
 * Every level and the reference are driven by the same fine bundles, which
 * are sampled exactly and aggregated exactly to each coarse step. With a
 * constant linear nonlinearity the reference is the exact shifted-rate
 * solution; otherwise it is exponential Euler on a grid
 * `reference_substeps` times finer than the finest level.
 */
ExperimentResult run_experiment(ExperimentSpec const& spec);

//! Squared-error samples per [consumer][level][path]; the raw material of run_experiment.
std::vector<std::vector<std::vector<double>>> squared_errors(ExperimentSpec const& spec,
                                                             std::string* reference = nullptr,
                                                             ExperimentResult* hashes = nullptr);

//! Order-independent pairwise sum.
double pairwise_sum(double const* x, std::size_t n);

LevelStat level_stat(std::size_t steps, double h, std::vector<double> const& sq);

//! Acceptance windows keyed by preset, mode and scheme.
struct SlopeCheck
{
    std::string name;
    bool pass;
    std::string detail;
};

std::vector<SlopeCheck> acceptance_checks(SpectralModel const& m,
                                          std::vector<ErrorReport> const& reports);

std::string summary_text(ExperimentResult const& result, std::vector<SlopeCheck> const& checks);
std::string csv_text(ErrorReport const& report);
std::string svg_plot(ErrorReport const& report);

//! Writes <mode>_<consumer>.csv/.svg per report and summary.txt.
void emit(ExperimentResult const& result, std::vector<SlopeCheck> const& checks,
          std::filesystem::path const& dir);
}  // namespace spdetaylor
