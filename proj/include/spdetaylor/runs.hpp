#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>

#include "spdetaylor/config.hpp"

namespace spdetaylor
{
struct RunOptions
{
    std::filesystem::path config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    std::optional<std::filesystem::path> out;
    bool assert_checks = false;
    bool identity_check = false;
};

//! Config with command-line overrides applied.
Config effective_config(RunOptions const& opt);

//! trajectory_<scheme>.csv per scheme plus effective_config.json.
void run_simulate(RunOptions const& opt, std::ostream& log);

/*!
 * Error reports for every scheme plus effective_config.json.
 *
 * With assert_checks, throws Error(AssertionFailed) after writing the
 * reports when an acceptance window fails.
 */
void run_converge(RunOptions const& opt, std::ostream& log);
}  // namespace spdetaylor
