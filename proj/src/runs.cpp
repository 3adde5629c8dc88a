#include "spdetaylor/runs.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "spdetaylor/error.hpp"
#include "spdetaylor/evaluator.hpp"

namespace spdetaylor
{
namespace
{
void write_file(std::filesystem::path const& path, std::string const& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text))
        fail(ErrorCode::Io, "cannot write " + path.string());
}

std::filesystem::path prepare_dir(Config const& cfg)
{
    std::filesystem::path dir = cfg.output.dir;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        fail(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
    write_file(dir / "effective_config.json", canonical_text(cfg));
    return dir;
}

bool wants(Config const& cfg, std::string_view format)
{
    for (auto const& f : cfg.output.formats)
    {
        if (f == format)
            return true;
    }
    return false;
}

std::string g17(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string identity_report(Config const& cfg, SpectralModel const& m, GalerkinState const& u0)
{
    auto const& e = cfg.experiment;
    double h = e.horizon / double(e.ladder.front());
    std::ostringstream os;
    os << "identity check on " << m.name() << ", h = " << g17(h) << ", seed = " << e.seed << '\n';
    os << "wood,node,substeps,residual,quadrature_bound,delta_u_norm\n";
    struct Case
    {
        char const* path;
        NodeAddress node;
    };
    // one path; the coarser grid reuses its increments
    auto fine = make_record(m, u0, 0.0, h, e.identity_substeps, NormalStream(e.seed, 0, StreamTag::Test));
    auto half = coarsen_record(m, fine, 2);
    for (Case c : {Case{"", {2, 1}}, Case{"(2,1)", {4, 1}}})
    {
        SWood w = derive_wood(parse_path(c.path));
        for (auto const* rec : {&half, &fine})
        {
            std::size_t s = rec == &fine ? e.identity_substeps : e.identity_substeps / 2;
            auto r = identity_check(w, c.node, m, *rec, 0.0, h);
            os << '"' << (*c.path ? c.path : "w0") << "\",\"" << format_path({c.node}) << "\"," << s << ','
               << g17(r.residual) << ',' << g17(r.quadrature_bound) << ',' << g17(r.delta_u_norm)
               << '\n';
        }
    }
    return os.str();
}
}  // namespace

Config effective_config(RunOptions const& opt)
{
    Config cfg = load_config(opt.config);
    if (opt.seed)
        cfg.experiment.seed = *opt.seed;
    if (opt.threads)
        cfg.experiment.threads = *opt.threads;
    if (opt.out)
        cfg.output.dir = opt.out->string();
    if (cfg.experiment.threads == 0)
        fail(ErrorCode::Config, "threads must be at least 1");
    return cfg;
}

void run_simulate(RunOptions const& opt, std::ostream& log)
{
    Config cfg = effective_config(opt);
    auto model = build_model(cfg.model);
    auto schemes = build_schemes(cfg);
    auto request = build_request(cfg, model);
    auto u0 = initial_state(model, cfg.model.initial);
    auto const& e = cfg.experiment;
    if (e.steps == 0 || !(e.horizon > 0))
        fail(ErrorCode::Config, "simulate needs steps >= 1 and a positive horizon");
    double h = e.horizon / double(e.steps);
    StepCovariance probe(model, h, request);

    auto dir = prepare_dir(cfg);
    for (auto id : schemes)
    {
        auto noise = exact_noise(model, h, request, NormalStream(e.seed, 0, StreamTag::Exact));
        auto tr = integrate(id, model, u0, e.horizon, e.steps, noise);
        std::ostringstream os;
        os << "step,t,norm";
        for (std::size_t k = 1; k <= model.dim(); ++k)
            os << ",c" << k;
        os << '\n';
        for (std::size_t s = 0; s < tr.states.size(); ++s)
        {
            os << s << ',' << g17(tr.times[s]) << ',' << g17(tr.states[s].norm());
            for (auto v : tr.states[s])
                os << ',' << g17(v);
            os << '\n';
        }
        auto file = dir / ("trajectory_" + std::string(to_string(id)) + ".csv");
        write_file(file, os.str());
        log << to_string(id) << ": " << e.steps << " steps, final norm " << g17(tr.states.back().norm())
            << " -> " << file.string() << '\n';
    }
    log << "seed " << e.seed << '\n';
}

void run_converge(RunOptions const& opt, std::ostream& log)
{
    Config cfg = effective_config(opt);
    auto model = build_model(cfg.model);
    auto u0 = initial_state(model, cfg.model.initial);
    auto const& e = cfg.experiment;

    ExperimentSpec spec{.model = model, .u0 = u0, .consumers = {}, .ladder = e.ladder, .config_hash = {}};
    for (auto id : build_schemes(cfg))
        spec.consumers.push_back(scheme_consumer(id, model));
    build_request(cfg, model);
    spec.paths = e.paths;
    spec.seed = e.seed;
    spec.mode = build_mode(e);
    spec.horizon = e.horizon;
    spec.reference_substeps = e.reference_substeps;
    spec.threads = e.threads;
    spec.hash_increments = e.hash_increments;
    spec.enforce_ci = e.enforce_ci;
    spec.config_hash = config_hash(cfg);
    validate(spec);
    if (opt.identity_check && (e.identity_substeps < 2 || e.identity_substeps % 2))
        fail(ErrorCode::Config, "identity_substeps must be even and at least 2");

    auto result = run_experiment(spec);
    auto checks = acceptance_checks(model, result.reports);
    auto dir = prepare_dir(cfg);
    for (auto const& r : result.reports)
    {
        std::string stem = std::string(to_string(r.mode)) + "_" + r.consumer;
        if (wants(cfg, "csv"))
            write_file(dir / (stem + ".csv"), csv_text(r));
        if (wants(cfg, "svg"))
            write_file(dir / (stem + ".svg"), svg_plot(r));
    }
    std::string summary = summary_text(result, checks);
    if (opt.identity_check)
    {
        std::string id = identity_report(cfg, model, u0);
        write_file(dir / "identity_check.txt", id);
        summary += "\n" + id;
    }
    if (wants(cfg, "summary"))
        write_file(dir / "summary.txt", summary);
    log << summary;

    if (opt.assert_checks)
    {
        std::string failed;
        for (auto const& c : checks)
        {
            if (!c.pass)
                failed += "\n  " + c.name + ": " + c.detail;
        }
        if (!result.coupled())
            failed += "\n  increment streams differ between consumers";
        if (!failed.empty())
            fail(ErrorCode::AssertionFailed, "acceptance checks failed:" + failed);
    }
}
}  // namespace spdetaylor
