#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "spdetaylor/spdetaylor.h"

namespace
{
std::string take(char* s)
{
    std::string out = s ? s : "";
    spt_string_free(s);
    return out;
}

std::filesystem::path write_config(char const* name, std::string const& text)
{
    auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream(p) << text;
    return p;
}
}  // namespace

TEST_CASE("version and empty error state")
{
    CHECK(std::string(spt_version()).size() > 0);
    CHECK(spt_last_error() != nullptr);
    CHECK(spt_last_error_kind() != nullptr);
}

TEST_CASE("wood derivation and queries")
{
    spt_wood* w = nullptr;
    REQUIRE(spt_wood_derive("(2,1)", &w) == SPT_OK);
    CHECK(spt_wood_tree_count(w) == 6);
    char* text = nullptr;
    REQUIRE(spt_wood_active_nodes(w, &text) == SPT_OK);
    auto nodes = take(text);
    CHECK(nodes.front() == '{');
    CHECK(nodes.back() == '}');
    CHECK(nodes.find("(4,1)") != std::string::npos);
    spt_wood_free(w);

    REQUIRE(spt_wood_derive("(2,1),(4,1)", &w) == SPT_OK);
    double value = 0;
    size_t witness = 0;
    REQUIRE(spt_wood_order(w, 0.25, 0.25, &value, &witness) == SPT_OK);
    CHECK(value == 1.25);
    CHECK(witness >= 1);
    CHECK(witness <= spt_wood_tree_count(w));
    REQUIRE(spt_wood_tree_order(w, witness, &text) == SPT_OK);
    CHECK(take(text) == "1 + d");
    CHECK(spt_wood_tree_order(w, 0, &text) != SPT_OK);
    CHECK(spt_wood_tree_order(w, spt_wood_tree_count(w) + 1, &text) != SPT_OK);
    CHECK(spt_wood_order(w, 1.5, 0.25, &value, &witness) != SPT_OK);

    REQUIRE(spt_wood_render(w, "dot", &text) == SPT_OK);
    CHECK(take(text).rfind("digraph", 0) == 0);
    REQUIRE(spt_wood_render(w, "ascii", &text) == SPT_OK);
    CHECK(!take(text).empty());
    CHECK(spt_wood_render(w, "png", &text) != SPT_OK);
    spt_wood_free(w);
    spt_wood_free(nullptr);
}

TEST_CASE("derivation failures report the step")
{
    spt_wood* w = nullptr;
    CHECK(spt_wood_derive("(1,1)", &w) == SPT_TREE_ERROR);
    CHECK(w == nullptr);
    CHECK(std::string(spt_last_error_kind()) == "NotActive");
    CHECK(spt_last_error_step() == 1);
    CHECK(std::string(spt_last_error()).find("step 1") != std::string::npos);

    CHECK(spt_wood_derive("(2,1) (2,1)", &w) == SPT_TREE_ERROR);
    CHECK(spt_last_error_step() == 2);

    CHECK(spt_wood_derive("(2,1", &w) == SPT_TREE_ERROR);
    CHECK(spt_wood_derive(nullptr, &w) != SPT_OK);
    CHECK(spt_wood_derive("", nullptr) != SPT_OK);

    REQUIRE(spt_wood_derive("", &w) == SPT_OK);
    CHECK(spt_last_error_step() == 0);
    CHECK(std::string(spt_last_error_kind()) == "none");
    spt_wood_free(w);
}

TEST_CASE("error state is per thread")
{
    spt_wood* w = nullptr;
    CHECK(spt_wood_derive("(1,1)", &w) == SPT_TREE_ERROR);
    std::string other;
    std::thread t([&] { other = spt_last_error_kind(); });
    t.join();
    CHECK(other == "none");
    CHECK(std::string(spt_last_error_kind()) == "NotActive");
}

TEST_CASE("models")
{
    spt_model* m = nullptr;
    REQUIRE(spt_model_create("heat1d", 8, "zero", &m) == SPT_OK);
    CHECK(spt_model_dim(m) == 8);
    std::vector<double> ev(10, -1);
    REQUIRE(spt_model_eigenvalues(m, ev.data(), ev.size()) == SPT_OK);
    for (std::size_t k = 0; k < 8; ++k)
        CHECK(ev[k] == doctest::Approx(std::numbers::pi * std::numbers::pi * double((k + 1) * (k + 1))));
    CHECK(ev[8] == -1);
    std::vector<double> sums(200);
    spt_verdict v{};
    REQUIRE(spt_model_assumption3(m, 0.25, sums.size(), sums.data(), &v) == SPT_OK);
    CHECK(v == SPT_DIVERGES);
    REQUIRE(spt_model_assumption3(m, 0.2, sums.size(), sums.data(), &v) == SPT_OK);
    CHECK(v == SPT_CONVERGES);
    for (std::size_t i = 1; i < sums.size(); ++i)
        CHECK(sums[i] >= sums[i - 1]);
    spt_model_free(m);

    REQUIRE(spt_model_create("trace3d", 3, "linear_mult:alpha=0.5", &m) == SPT_OK);
    CHECK(spt_model_dim(m) == 27);
    REQUIRE(spt_model_assumption3(m, 0.5, sums.size(), sums.data(), &v) == SPT_OK);
    CHECK(v == SPT_CONVERGES);
    spt_model_free(m);

    REQUIRE(spt_model_create("sode", 3, "pointwise:g=tanh", &m) == SPT_OK);
    CHECK(spt_model_dim(m) == 3);
    spt_model_free(m);

    CHECK(spt_model_create("heat2d", 8, "zero", &m) == SPT_ERROR);
    CHECK(spt_model_create("heat1d", 8, "sine", &m) == SPT_ERROR);
    CHECK(spt_model_create("heat1d", 0, "zero", &m) == SPT_ERROR);
}

TEST_CASE("runs map failures to status codes")
{
    auto dir = std::filesystem::temp_directory_path() / "spt_capi_runs";
    std::filesystem::remove_all(dir);
    spt_run_options opt{};
    opt.config = "/nonexistent/spt.json";
    opt.out = dir.c_str();
    CHECK(spt_run_simulate(&opt) == SPT_ERROR);
    CHECK(std::string(spt_last_error_kind()) == "Config");
    CHECK(!std::filesystem::exists(dir));
    CHECK(spt_run_simulate(nullptr) == SPT_ERROR);

    auto bad = write_config("spt_capi_bad.json", R"({"experiment": {"ladder": [16]}})");
    opt.config = bad.c_str();
    CHECK(spt_run_converge(&opt) == SPT_ERROR);
    CHECK(std::string(spt_last_error()).find("at least 3") != std::string::npos);
    CHECK(!std::filesystem::exists(dir));

    auto good = write_config("spt_capi_good.json", R"({
      "model": {"preset": "heat1d", "modes": 4},
      "schemes": ["exp_euler"],
      "experiment": {"steps": 8, "seed": 5}
    })");
    opt.config = good.c_str();
    CHECK(spt_run_simulate(&opt) == SPT_OK);
    CHECK(std::filesystem::exists(dir / "trajectory_exp_euler.csv"));
    CHECK(std::filesystem::exists(dir / "effective_config.json"));

    // trace-class exp_euler sits below its window on this ladder
    auto failing = write_config("spt_capi_assert.json", R"({
      "model": {"preset": "trace3d", "modes_per_axis": 2, "nonlinearity": "linear_mult:alpha=0.5"},
      "schemes": ["exp_euler"],
      "experiment": {"paths": 200, "enforce_ci": false, "seed": 1},
      "output": {"formats": ["csv"]}
    })");
    opt.config = failing.c_str();
    CHECK(spt_run_converge(&opt) == SPT_OK);
    opt.assert_checks = 1;
    CHECK(spt_run_converge(&opt) == SPT_ASSERTION_FAILED);
    CHECK(std::string(spt_last_error_kind()) == "AssertionFailed");
    CHECK(std::filesystem::exists(dir / "local_exp_euler.csv"));

    std::filesystem::remove_all(dir);
    for (auto const& p : {bad, good, failing})
        std::filesystem::remove(p);
}
