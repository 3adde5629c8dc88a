#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spdetaylor/harness.hpp"
#include "spdetaylor/model.hpp"
#include "spdetaylor/sampler.hpp"
#include "spdetaylor/schemes.hpp"

namespace spdetaylor
{
struct ModelConfig
{
    std::string preset = "heat1d";  //!< heat1d | trace3d | sode | custom
    std::size_t modes = 64;          //!< heat1d
    std::size_t modes_per_axis = 4;  //!< trace3d
    std::size_t dimension = 1;       //!< sode
    std::vector<double> weights;     //!< sode noise weights, default all ones
    std::vector<double> lambdas;     //!< custom
    std::vector<double> bs;          //!< custom
    double kappa = 0;                //!< custom
    std::string nonlinearity = "zero";
    std::string initial = "bump";
    double noise_scale = 1;
};

struct ExperimentConfig
{
    std::string mode = "local";  //!< local | global
    std::vector<std::size_t> ladder{16, 32, 64, 128, 256, 512};
    std::size_t paths = 1000;
    std::uint64_t seed = 0;
    double horizon = 1;
    std::size_t steps = 64;
    std::size_t reference_substeps = 64;
    std::size_t identity_substeps = 2048;
    std::size_t threads = 1;
    bool hash_increments = false;
    bool enforce_ci = true;
    std::string time_integrals = "auto";  //!< auto | none | diagonal | full
};

struct OutputConfig
{
    std::string dir = "out";
    std::vector<std::string> formats{"csv", "svg", "summary"};
};

struct Config
{
    ModelConfig model;
    std::vector<std::string> schemes{"exp_euler"};
    ExperimentConfig experiment;
    OutputConfig output;
};

//! JSON text to config; unknown keys and bad values throw Error(Config).
Config parse_config(std::string_view text);
Config load_config(std::filesystem::path const& path);
//! Sorted-key JSON with every default filled in.
std::string canonical_text(Config const& c);
//! SHA-256 of the canonical text without threads and output.dir.
std::string config_hash(Config const& c);

SpectralModel build_model(ModelConfig const& mc);
std::vector<SchemeId> build_schemes(Config const& c);
ExperimentMode build_mode(ExperimentConfig const& e);
//! Union of scheme needs, checked against the configured time-integral sampling.
NoiseRequest build_request(Config const& c, SpectralModel const& m);
}  // namespace spdetaylor
