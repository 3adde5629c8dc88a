#include "spdetaylor/harness.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "spdetaylor/digest.hpp"
#include "spdetaylor/error.hpp"

namespace spdetaylor
{
char const* to_string(ExperimentMode mode)
{
    return mode == ExperimentMode::Local ? "local" : "global";
}

Consumer scheme_consumer(SchemeId id, SpectralModel const& m)
{
    Consumer c;
    c.name = to_string(id);
    c.needs = noise_needs(id, m);
    c.wood = scheme_wood(id);
    c.step = [id, m](StepWorkspace const& ws, GalerkinState const& y, NoiseBundle const& nb) {
        return step(id, m, ws, y, nb);
    };
    return c;
}

void validate(ExperimentSpec const& spec)
{
    auto const& ladder = spec.ladder;
    if (ladder.size() < 3)
        fail(ErrorCode::Config, "regression needs at least 3 ladder levels");
    for (std::size_t l = 0; l < ladder.size(); ++l)
    {
        if (ladder[l] == 0)
            fail(ErrorCode::Config, "ladder step counts must be positive");
        if (l > 0 && ladder[l] <= ladder[l - 1])
            fail(ErrorCode::Config, "ladder must be strictly increasing in M");
        if (ladder.back() % ladder[l] != 0)
            fail(ErrorCode::Config, "every ladder M must divide the largest M");
    }
    if (spec.paths < 100)
        fail(ErrorCode::Config, "regression runs need at least 100 paths");
    if (!(spec.horizon > 0))
        fail(ErrorCode::Config, "horizon must be positive");
    if (spec.consumers.empty())
        fail(ErrorCode::Config, "no schemes selected");
    if (std::size_t(spec.u0.size()) != spec.model.dim())
        fail(ErrorCode::LengthMismatch, "initial state does not match the model dimension");
    if (spec.reference_substeps == 0 || spec.threads == 0)
        fail(ErrorCode::Config, "reference_substeps and threads must be positive");
}

bool ExperimentResult::coupled() const
{
    for (std::size_t i = 0; i + 1 < increment_hashes.size(); i += 2)
    {
        if (increment_hashes[i].second != increment_hashes[i + 1].second)
            return false;
    }
    return true;
}

namespace
{
bool exact_reference(SpectralModel const& m)
{
    auto const& nl = m.nonlinearity();
    return nl.kind() == NonlinearitySpec::Kind::Zero || nl.is_constant_linear();
}

//! Orders are continuous in (gamma, delta), so the supremum is the value at the open endpoint.
double order_supremum(SWood const& w, SmoothnessParams const& s)
{
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i <= w.size(); ++i)
    {
        if (w.tree(i).is_active())
            best = std::min(best, tree_order(w.tree(i)).evaluate(s.gamma, s.delta));
    }
    return best;
}

//! Run `work(p)` for every path, `threads` workers pulling chunks.
template<class Work>
void for_each_path(std::size_t paths, std::size_t threads, Work&& work)
{
    constexpr std::size_t chunk = 8;
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_lock;
    auto worker = [&] {
        for (;;)
        {
            std::size_t begin = next.fetch_add(chunk);
            if (begin >= paths)
                return;
            try
            {
                for (std::size_t p = begin; p < std::min(paths, begin + chunk); ++p)
                    work(p);
            }
            catch (...)
            {
                std::lock_guard lock(error_lock);
                if (!error)
                    error = std::current_exception();
                next = paths;
                return;
            }
        }
    };
    std::size_t n = std::min(threads, (paths + chunk - 1) / chunk);
    if (n <= 1)
    {
        worker();
    }
    else
    {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n; ++t)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    if (error)
        std::rethrow_exception(error);
}
}  // namespace

std::vector<std::vector<std::vector<double>>> squared_errors(ExperimentSpec const& spec,
                                                             std::string* reference,
                                                             ExperimentResult* hashes)
{
    validate(spec);
    auto const& m = spec.model;
    auto n = Eigen::Index(m.dim());
    std::size_t levels = spec.ladder.size();
    std::size_t consumers = spec.consumers.size();
    bool exact = exact_reference(m);
    double alpha = m.nonlinearity().kind() == NonlinearitySpec::Kind::Zero ? 0.0
                                                                          : m.nonlinearity().alpha();

    NoiseRequest request;
    for (auto const& c : spec.consumers)
        request = merge(request, c.needs);
    if (exact)
        request.shift = alpha;

    std::size_t per_finest = exact ? 1 : spec.reference_substeps;
    std::size_t finest = spec.ladder.back();
    double fine_h = spec.horizon / double(finest * per_finest);
    std::vector<std::size_t> factor(levels);
    std::vector<StepWorkspace> ws;
    for (std::size_t l = 0; l < levels; ++l)
    {
        factor[l] = finest / spec.ladder[l] * per_finest;
        ws.emplace_back(m, spec.horizon / double(spec.ladder[l]));
    }
    std::size_t fine_steps = spec.mode == ExperimentMode::Local ? factor.front() : finest * per_finest;

    StepCovariance cov(m, fine_h, request);
    AggregationWeights weights(m, fine_h, request);
    Eigen::VectorXd ref_decay(n), ref_phi(n);
    for (Eigen::Index k = 0; k < n; ++k)
    {
        double l = m.lambda(std::size_t(k));
        ref_decay[k] = exact ? expint::decay(l - alpha, fine_h) : expint::decay(l, fine_h);
        ref_phi[k] = expint::phi1(l, fine_h);
    }
    if (reference)
    {
        *reference = exact ? "exact shifted-rate solution (alpha = " + std::to_string(alpha) + ")"
                           : "exponential Euler with " + std::to_string(per_finest)
                                 + " substeps per finest step";
    }

    std::vector<std::vector<std::vector<double>>> sq(
        consumers, std::vector<std::vector<double>>(levels, std::vector<double>(spec.paths)));
    bool hashing = spec.hash_increments && hashes;
    // [path][stream]: each level, then the reference over that level's window
    std::vector<std::vector<std::string>> path_hashes(hashing ? spec.paths : 0);

    for_each_path(spec.paths, spec.threads, [&](std::size_t p) {
        NormalStream stream(spec.seed, std::uint32_t(p), StreamTag::Exact);
        std::vector<Aggregator> agg(levels, Aggregator(weights));
        std::vector<Eigen::VectorXd> carried(levels, Eigen::VectorXd::Zero(n));
        std::vector<std::vector<GalerkinState>> y(levels, std::vector<GalerkinState>(consumers, spec.u0));
        std::vector<Sha256> digests(hashing ? 2 * levels : 0);
        GalerkinState ref = spec.u0;
        Eigen::VectorXd none;
        for (std::size_t i = 0; i < fine_steps; ++i)
        {
            NoiseBundle fine = sample_step(cov, stream, std::uint32_t(i), none);
            if (exact)
                ref = ref_decay.cwiseProduct(ref) + fine.shifted;
            else
                ref = ref_decay.cwiseProduct(ref) + ref_phi.cwiseProduct(m.F(ref)) + fine.conv;
            for (std::size_t l = 0; hashing && l < levels; ++l)
            {
                if (spec.mode == ExperimentMode::Global || i < factor[l])
                    digests[levels + l].update(fine.increments.data(), sizeof(double) * std::size_t(n));
            }
            for (std::size_t l = 0; l < levels; ++l)
            {
                if (spec.mode == ExperimentMode::Local && i >= factor[l])
                    continue;
                if (hashing)
                    digests[l].update(fine.increments.data(), sizeof(double) * std::size_t(n));
                agg[l].absorb(fine);
                if (agg[l].count() < factor[l])
                    continue;
                NoiseBundle coarse = agg[l].take(carried[l]);
                for (std::size_t c = 0; c < consumers; ++c)
                    y[l][c] = spec.consumers[c].step(ws[l], y[l][c], coarse);
                carried[l] = ws[l].decay().cwiseProduct(carried[l]) + coarse.conv;
                if (spec.mode == ExperimentMode::Local)
                {
                    for (std::size_t c = 0; c < consumers; ++c)
                        sq[c][l][p] = (y[l][c] - ref).squaredNorm();
                }
            }
        }
        if (spec.mode == ExperimentMode::Global)
        {
            for (std::size_t l = 0; l < levels; ++l)
                for (std::size_t c = 0; c < consumers; ++c)
                    sq[c][l][p] = (y[l][c] - ref).squaredNorm();
        }
        if (hashing)
        {
            for (auto& d : digests)
                path_hashes[p].push_back(d.hex_digest());
        }
    });

    if (hashing)
    {
        hashes->increment_hashes.clear();
        for (std::size_t l = 0; l < levels; ++l)
        {
            for (std::size_t s : {l, levels + l})
            {
                Sha256 combined;
                for (std::size_t p = 0; p < spec.paths; ++p)
                    combined.update(path_hashes[p][s]);
                std::string who = s < levels ? "schemes" : "reference";
                hashes->increment_hashes.emplace_back(
                    who + " M=" + std::to_string(spec.ladder[l]), combined.hex_digest());
            }
        }
    }
    return sq;
}

double pairwise_sum(double const* x, std::size_t n)
{
    if (n <= 8)
    {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i)
            s += x[i];
        return s;
    }
    std::size_t half = n / 2;
    return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

LevelStat level_stat(std::size_t steps, double h, std::vector<double> const& sq)
{
    auto count = sq.size();
    double mean = pairwise_sum(sq.data(), count) / double(count);
    std::vector<double> dev(count);
    for (std::size_t i = 0; i < count; ++i)
        dev[i] = (sq[i] - mean) * (sq[i] - mean);
    double var = count > 1 ? pairwise_sum(dev.data(), count) / double(count - 1) : 0.0;
    double error = std::sqrt(mean);
    double se_mean = std::sqrt(var / double(count));
    return {steps, h, error, error > 0 ? se_mean / (2 * error) : 0.0, count};
}

Regression fit_slope(std::vector<LevelStat> const& levels)
{
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    auto count = levels.size();
    if (count < 2)
        return {nan, nan, nan};
    double xbar = 0, ybar = 0;
    for (auto const& l : levels)
    {
        if (!(l.error > 0))
            return {nan, nan, nan};
        xbar += std::log(l.h);
        ybar += std::log(l.error);
    }
    xbar /= double(count);
    ybar /= double(count);
    double sxx = 0, sxy = 0;
    for (auto const& l : levels)
    {
        double dx = std::log(l.h) - xbar;
        sxx += dx * dx;
        sxy += dx * (std::log(l.error) - ybar);
    }
    double slope = sxy / sxx;
    double var = 0;
    for (auto const& l : levels)
    {
        double w = (std::log(l.h) - xbar) / sxx;
        double rel = l.std_error / l.error;
        var += w * w * rel * rel;
    }
    double half = 1.959963984540054 * std::sqrt(var);
    return {slope, slope - half, slope + half};
}

ExperimentResult run_experiment(ExperimentSpec const& spec)
{
    ExperimentResult result;
    auto sq = squared_errors(spec, &result.reference, &result);
    auto const& smooth = spec.model.smoothness();
    std::size_t levels = spec.ladder.size();
    for (std::size_t c = 0; c < spec.consumers.size(); ++c)
    {
        auto const& consumer = spec.consumers[c];
        ErrorReport r;
        r.consumer = consumer.name;
        r.model = spec.model.name();
        r.mode = spec.mode;
        r.seed = spec.seed;
        r.config_hash = spec.config_hash;
        r.reference = result.reference;
        for (std::size_t l = 0; l < levels; ++l)
        {
            double h = spec.horizon / double(spec.ladder[l]);
            r.levels.push_back(level_stat(spec.ladder[l], h, sq[c][l]));
        }
        r.fit = fit_slope(r.levels);
        std::size_t half = (levels + 1) / 2;
        r.first_half_slope = fit_slope({r.levels.begin(), r.levels.begin() + long(half)}).slope;
        r.second_half_slope = fit_slope({r.levels.begin() + long(levels / 2), r.levels.end()}).slope;
        for (std::size_t l = 0; l + 1 < levels; ++l)
        {
            auto const& a = r.levels[l];
            auto const& b = r.levels[l + 1];
            if (b.error > a.error + 2 * std::hypot(a.std_error, b.std_error))
                r.monotone = false;
        }
        if (consumer.wood && smooth && spec.mode == ExperimentMode::Local)
            r.theoretical_order = order_supremum(derive_wood(*consumer.wood), *smooth);
        if (spec.enforce_ci && std::isfinite(r.fit.slope) && r.fit.ci_high - r.fit.ci_low > 0.2)
        {
            fail(ErrorCode::InsufficientPaths,
                 consumer.name + ": slope CI width " + std::to_string(r.fit.ci_high - r.fit.ci_low)
                     + " exceeds 0.2; increase the path count");
        }
        result.reports.push_back(std::move(r));
    }
    return result;
}
}  // namespace spdetaylor
