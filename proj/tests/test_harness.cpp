#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "spdetaylor/error.hpp"
#include "spdetaylor/harness.hpp"

using namespace spdetaylor;

namespace
{
NonlinearitySpec nl(char const* text)
{
    return NonlinearitySpec::parse(text);
}

ExperimentSpec make_spec(SpectralModel m, std::vector<SchemeId> schemes, std::size_t paths,
                         std::vector<std::size_t> ladder = {16, 32, 64, 128})
{
    ExperimentSpec s{.model = m, .u0 = initial_state(m, "bump"), .consumers = {}, .ladder = ladder, .config_hash = {}};
    for (auto id : schemes)
        s.consumers.push_back(scheme_consumer(id, m));
    s.paths = paths;
    s.seed = 11;
    s.enforce_ci = false;
    return s;
}

ErrorCode code_of(ExperimentSpec const& s)
{
    try
    {
        validate(s);
    }
    catch (Error const& e)
    {
        return e.code();
    }
    return ErrorCode::InvalidArgument;
}

std::filesystem::path scratch(char const* name)
{
    auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    return dir;
}

std::string slurp(std::filesystem::path const& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}
}  // namespace

TEST_CASE("experiment validation")
{
    auto m = heat_1d_model(4, nl("zero"));
    auto good = make_spec(m, {SchemeId::ExpEuler}, 100);
    CHECK_NOTHROW(validate(good));

    auto s = good;
    s.ladder = {16};
    CHECK(code_of(s) == ErrorCode::Config);
    try
    {
        validate(s);
    }
    catch (Error const& e)
    {
        CHECK(std::string(e.what()).find("at least 3") != std::string::npos);
    }
    s.ladder = {16, 16, 32};
    CHECK(code_of(s) == ErrorCode::Config);
    s.ladder = {32, 16, 64};
    CHECK(code_of(s) == ErrorCode::Config);
    s.ladder = {16, 24, 64};
    CHECK(code_of(s) == ErrorCode::Config);
    s.ladder = {0, 16, 32};
    CHECK(code_of(s) == ErrorCode::Config);

    s = good;
    s.paths = 99;
    CHECK(code_of(s) == ErrorCode::Config);
    s = good;
    s.horizon = 0;
    CHECK(code_of(s) == ErrorCode::Config);
    s = good;
    s.consumers.clear();
    CHECK(code_of(s) == ErrorCode::Config);
    s = good;
    s.u0 = GalerkinState::Zero(3);
    CHECK(code_of(s) == ErrorCode::LengthMismatch);
    s = good;
    s.threads = 0;
    CHECK(code_of(s) == ErrorCode::Config);
}

TEST_CASE("fit_slope on an exact power law")
{
    std::vector<LevelStat> levels;
    for (std::size_t M : {16, 32, 64, 128, 256})
    {
        double h = 1.0 / double(M);
        double e = 3 * std::pow(h, 1.5);
        levels.push_back({M, h, e, 0.01 * e, 1000});
    }
    auto r = fit_slope(levels);
    CHECK(std::fabs(r.slope - 1.5) < 1e-12);
    // relative SE 0.01 on every level: var(slope) = 0.01^2 / sxx
    double xbar = 0, sxx = 0;
    for (auto const& l : levels)
        xbar += std::log(l.h) / double(levels.size());
    for (auto const& l : levels)
        sxx += (std::log(l.h) - xbar) * (std::log(l.h) - xbar);
    double half = 1.959963984540054 * 0.01 / std::sqrt(sxx);
    CHECK(std::fabs((r.ci_high - r.ci_low) / 2 - half) < 1e-14);
    CHECK(r.ci_low < r.slope);

    levels[2].error = 0;
    CHECK(std::isnan(fit_slope(levels).slope));
    CHECK(std::isnan(fit_slope({levels.front()}).slope));
}

TEST_CASE("level statistics")
{
    auto flat = level_stat(8, 0.125, std::vector<double>(50, 4.0));
    CHECK(flat.error == 2.0);
    CHECK(flat.std_error == 0.0);
    CHECK(flat.paths == 50);

    std::mt19937_64 gen(5);
    std::exponential_distribution<double> d(3.0);
    std::vector<double> sq(1001);
    for (auto& x : sq)
        x = d(gen);
    long double mean = 0, var = 0;
    for (auto x : sq)
        mean += x;
    mean /= sq.size();
    for (auto x : sq)
        var += (x - mean) * (x - mean);
    var /= sq.size() - 1;
    double err = std::sqrt(double(mean));
    double se = std::sqrt(double(var) / double(sq.size())) / (2 * err);
    auto s = level_stat(4, 0.25, sq);
    CHECK(std::fabs(s.error - err) < 1e-14 * err);
    CHECK(std::fabs(s.std_error - se) < 1e-12 * se);

    double ps = pairwise_sum(sq.data(), sq.size());
    CHECK(std::fabs(ps - double(mean) * double(sq.size())) < 1e-12 * ps);
}

TEST_CASE("zero nonlinearity: exponential schemes reproduce the exact reference")
{
    auto m = heat_1d_model(8, nl("zero"));
    for (auto mode : {ExperimentMode::Local, ExperimentMode::Global})
    {
        auto s = make_spec(m,
                           {SchemeId::ExpEuler, SchemeId::TaylorW2, SchemeId::TaylorW3,
                            SchemeId::RungeKutta, SchemeId::ImplicitEuler},
                           100, {4, 8, 16});
        s.mode = mode;
        auto result = run_experiment(s);
        REQUIRE(result.reports.size() == 5);
        CAPTURE(std::string(to_string(mode)));
        for (std::size_t c = 0; c < 4; ++c)
        {
            CAPTURE(result.reports[c].consumer);
            for (auto const& l : result.reports[c].levels)
                CHECK(l.error < 1e-14);
        }
        for (auto const& l : result.reports[4].levels)
            CHECK(l.error > 1e-4);
    }
}

TEST_CASE("exact linear reference has the shifted Ornstein-Uhlenbeck variance")
{
    double alpha = 0.5;
    auto m = heat_1d_model(2, nl("linear_mult:alpha=0.5"));
    double h = 1.0 / 16;
    std::size_t steps = 4, n = 100000;
    NoiseRequest req;
    req.shift = alpha;
    StepCovariance cov(m, h, req);
    std::vector<double> decay;
    for (std::size_t k = 0; k < 2; ++k)
        decay.push_back(std::exp(-(m.lambda(k) - alpha) * h));
    Eigen::VectorXd none;
    std::vector<double> sum(2, 0), sum2(2, 0);
    for (std::size_t p = 0; p < n; ++p)
    {
        NormalStream stream(3, std::uint32_t(p));
        Eigen::Vector2d u = Eigen::Vector2d::Zero();
        for (std::size_t i = 0; i < steps; ++i)
        {
            auto nb = sample_step(cov, stream, std::uint32_t(i), none);
            for (Eigen::Index k = 0; k < 2; ++k)
                u[k] = decay[std::size_t(k)] * u[k] + nb.shifted[k];
        }
        for (std::size_t k = 0; k < 2; ++k)
            sum[k] += u[Eigen::Index(k)], sum2[k] += u[Eigen::Index(k)] * u[Eigen::Index(k)];
    }
    double t = h * double(steps);
    for (std::size_t k = 0; k < 2; ++k)
    {
        double r = m.lambda(k) - alpha;
        double exact = m.b(k) * m.b(k) * -std::expm1(-2 * r * t) / (2 * r);
        double mean = sum[k] / double(n);
        double var = (sum2[k] - double(n) * mean * mean) / double(n - 1);
        double se = exact * std::sqrt(2.0 / double(n - 1));
        CAPTURE(k);
        CHECK(std::fabs(var - exact) < 3 * se);
    }
}

TEST_CASE("increment streams are shared by every consumer")
{
    auto m = heat_1d_model(8, nl("linear_mult:alpha=0.5"));
    for (auto mode : {ExperimentMode::Local, ExperimentMode::Global})
    {
        auto s = make_spec(m, {SchemeId::ExpEuler, SchemeId::ImplicitEuler}, 100, {4, 8, 16});
        s.mode = mode;
        s.hash_increments = true;
        auto r = run_experiment(s);
        REQUIRE(r.increment_hashes.size() == 6);
        CHECK(r.coupled());
        for (std::size_t l = 0; l < 3; ++l)
        {
            CHECK(r.increment_hashes[2 * l].first.rfind("schemes", 0) == 0);
            CHECK(r.increment_hashes[2 * l + 1].first.rfind("reference", 0) == 0);
        }
        if (mode == ExperimentMode::Global)
        {
            CHECK(r.increment_hashes[0].second == r.increment_hashes[2].second);
        }
        else
        {
            // local windows grow with h
            CHECK(r.increment_hashes[0].second != r.increment_hashes[2].second);
        }
        auto summary = summary_text(r, {});
        CHECK(summary.find("identical increments") != std::string::npos);

        s.seed += 1;
        auto other = run_experiment(s);
        CHECK(other.increment_hashes[0].second != r.increment_hashes[0].second);
    }
}

TEST_CASE("results do not depend on the thread count")
{
    auto m = heat_1d_model(8, nl("pointwise:g=tanh"));
    auto s = make_spec(m, {SchemeId::ExpEuler, SchemeId::TaylorW3}, 150, {4, 8, 16});
    s.reference_substeps = 8;
    s.threads = 1;
    auto base = squared_errors(s);
    for (std::size_t t : {2, 4, 8})
    {
        s.threads = t;
        CHECK(squared_errors(s) == base);
    }
    s.mode = ExperimentMode::Global;
    s.threads = 1;
    auto a = run_experiment(s);
    s.threads = 8;
    auto b = run_experiment(s);
    for (std::size_t c = 0; c < 2; ++c)
        CHECK(csv_text(a.reports[c]) == csv_text(b.reports[c]));
}

TEST_CASE("reports carry metadata and emit deterministic artifacts")
{
    auto m = heat_1d_model(8, nl("linear_mult:alpha=0.5"));
    auto s = make_spec(m, {SchemeId::ExpEuler}, 200);
    s.config_hash = "abc123";
    auto r = run_experiment(s);
    auto const& rep = r.reports.front();
    CHECK(rep.seed == 11);
    CHECK(rep.config_hash == "abc123");
    CHECK(rep.levels.size() == s.ladder.size());
    for (auto const& l : rep.levels)
    {
        CHECK(l.error > 0);
        CHECK(l.std_error > 0);
        CHECK(l.paths == 200);
    }
    REQUIRE(rep.theoretical_order);
    CHECK(*rep.theoretical_order > 1.0);
    CHECK(*rep.theoretical_order <= 1.25);
    CHECK(r.reference.find("exact") != std::string::npos);

    auto csv = csv_text(rep);
    CHECK(csv.rfind("level,M,h,error,stderr,paths,seed\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == long(s.ladder.size()) + 1);
    CHECK(csv_text(run_experiment(s).reports.front()) == csv);

    boost::property_tree::ptree tree;
    std::istringstream svg(svg_plot(rep));
    REQUIRE_NOTHROW(boost::property_tree::read_xml(svg, tree));
    auto const& root = tree.get_child("svg");
    std::size_t circles = 0;
    for (auto const& [name, node] : root)
    {
        if (name == "g")
        {
            for (auto const& [inner, leaf] : node)
                circles += inner == "circle";
        }
    }
    CHECK(circles == s.ladder.size());
    CHECK(root.get<std::string>("desc") == "seed 11");

    auto summary = summary_text(r, acceptance_checks(m, r.reports));
    CHECK(summary.find("seed: 11") != std::string::npos);
    CHECK(summary.find("theoretical order") != std::string::npos);
    CHECK(summary.find("slope:") != std::string::npos);

    auto dir = scratch("spt_emit_test");
    emit(r, {}, dir);
    CHECK(slurp(dir / "local_exp_euler.csv") == csv);
    CHECK(std::filesystem::exists(dir / "local_exp_euler.svg"));
    CHECK(std::filesystem::exists(dir / "summary.txt"));
    std::filesystem::remove_all(dir);

    auto blocker = scratch("spt_emit_blocker");
    std::ofstream(blocker) << "file";
    try
    {
        emit(r, {}, blocker / "sub");
        FAIL("no error");
    }
    catch (Error const& e)
    {
        CHECK(e.code() == ErrorCode::Io);
        CHECK(std::string(e.what()).find("spt_emit_blocker") != std::string::npos);
    }
    std::filesystem::remove(blocker);
}

TEST_CASE("slope CI shrinks like one over root paths")
{
    auto m = heat_1d_model(8, nl("linear_mult:alpha=0.5"));
    auto s = make_spec(m, {SchemeId::ExpEuler}, 1000);
    auto a = run_experiment(s).reports.front().fit;
    s.paths = 4000;
    auto b = run_experiment(s).reports.front().fit;
    double ratio = (a.ci_high - a.ci_low) / (b.ci_high - b.ci_low);
    CAPTURE(ratio);
    CHECK(ratio > 1.6);
    CHECK(ratio < 2.5);
}

TEST_CASE("wide slope CI raises InsufficientPaths")
{
    auto m = heat_1d_model(8, nl("linear_mult:alpha=0.5"));
    auto s = make_spec(m, {SchemeId::ExpEuler}, 100, {16, 32, 64});
    s.enforce_ci = true;
    try
    {
        run_experiment(s);
        FAIL("no error");
    }
    catch (Error const& e)
    {
        CHECK(e.code() == ErrorCode::InsufficientPaths);
    }
    s.enforce_ci = false;
    CHECK_NOTHROW(run_experiment(s));
}

TEST_CASE("monotone refinement")
{
    struct Case
    {
        SpectralModel m;
        std::vector<SchemeId> schemes;
    };
    std::vector<SchemeId> all{SchemeId::ExpEuler, SchemeId::TaylorW2, SchemeId::TaylorW3,
                              SchemeId::RungeKutta, SchemeId::ImplicitEuler};
    std::vector<Case> cases{{heat_1d_model(16, nl("linear_mult:alpha=0.5")), all},
                            {heat_1d_model(16, nl("pointwise:g=tanh")), all},
                            {trace_class_3d_model(2, nl("linear_mult:alpha=0.5")), all},
                            {sode_model(2, {1.0, 0.5}, nl("pointwise:g=tanh")), all}};
    for (auto const& c : cases)
    {
        for (auto mode : {ExperimentMode::Local, ExperimentMode::Global})
        {
            auto s = make_spec(c.m, c.schemes, 400, {8, 16, 32, 64});
            s.mode = mode;
            s.reference_substeps = 16;
            s.threads = 4;
            for (auto const& r : run_experiment(s).reports)
            {
                CAPTURE(c.m.name());
                CAPTURE(r.consumer);
                CAPTURE(std::string(to_string(mode)));
                CHECK(r.monotone);
            }
        }
    }
}

TEST_CASE("fine reference at 64x and 128x substeps agree")
{
    auto m = heat_1d_model(8, nl("pointwise:g=tanh"));
    auto u0 = initial_state(m, "bump");
    double h = 1.0 / 16;
    std::size_t finest = 4, per = 64, paths = 200;
    std::size_t fine = finest * per * 2;
    NoiseRequest req;
    AggregationWeights w(m, h / double(fine), req);
    StepWorkspace ws128(m, h / double(fine)), ws64(m, 2 * h / double(fine)), coarse(m, h);
    double ref_gap = 0, scheme_err = 0;
    for (std::size_t p = 0; p < paths; ++p)
    {
        auto rec = sample_record(m, h, fine, req, NormalStream(9, std::uint32_t(p)));
        auto half = coarsen(rec, w, 2);
        GalerkinState a = u0, b = u0;
        for (auto const& nb : rec.steps)
            a = step(SchemeId::ExpEuler, m, ws128, a, nb);
        for (auto const& nb : half)
            b = step(SchemeId::ExpEuler, m, ws64, b, nb);
        GalerkinState y = step(SchemeId::ExpEuler, m, coarse, u0, coarsen(rec, w, fine).front());
        ref_gap += (a - b).squaredNorm();
        scheme_err += (y - a).squaredNorm();
    }
    ref_gap = std::sqrt(ref_gap / double(paths));
    scheme_err = std::sqrt(scheme_err / double(paths));
    CAPTURE(ref_gap);
    CAPTURE(scheme_err);
    CHECK(ref_gap < 0.1 * scheme_err);
}
