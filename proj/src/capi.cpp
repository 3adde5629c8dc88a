#include "spdetaylor/spdetaylor.h"

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <string>

#include "spdetaylor/error.hpp"
#include "spdetaylor/model.hpp"
#include "spdetaylor/runs.hpp"
#include "spdetaylor/trees.hpp"

struct spt_wood
{
    spdetaylor::SWood wood;
};

struct spt_model
{
    spdetaylor::SpectralModel model;
};

namespace
{
thread_local std::string last_error;
thread_local std::string last_kind = "none";
thread_local std::size_t last_step = 0;

void clear()
{
    last_error.clear();
    last_kind = "none";
    last_step = 0;
}

//! Run `body`, recording any failure; `failure` is the status for non-assertion errors.
template<class Body>
spt_status guarded(spt_status failure, Body&& body)
{
    clear();
    try
    {
        body();
        return SPT_OK;
    }
    catch (spdetaylor::DerivationError const& e)
    {
        last_error = e.what();
        last_kind = spdetaylor::to_string(e.code());
        last_step = e.step();
    }
    catch (spdetaylor::Error const& e)
    {
        last_error = e.what();
        last_kind = spdetaylor::to_string(e.code());
        if (e.code() == spdetaylor::ErrorCode::AssertionFailed)
            return SPT_ASSERTION_FAILED;
    }
    catch (std::exception const& e)
    {
        last_error = e.what();
        last_kind = "Internal";
        return SPT_ERROR;
    }
    return failure;
}

char* duplicate(std::string const& s)
{
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out)
        std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

spt_status null_argument(spt_status failure)
{
    last_error = "null argument";
    last_kind = "InvalidArgument";
    return failure;
}

spdetaylor::RunOptions run_options(spt_run_options const& o)
{
    spdetaylor::RunOptions r;
    if (!o.config)
        spdetaylor::fail(spdetaylor::ErrorCode::Config, "no config file given");
    r.config = o.config;
    if (o.has_seed)
        r.seed = o.seed;
    if (o.threads)
        r.threads = o.threads;
    if (o.out)
        r.out = std::filesystem::path(o.out);
    r.assert_checks = o.assert_checks != 0;
    r.identity_check = o.identity_check != 0;
    return r;
}
}  // namespace

extern "C" {

const char* spt_last_error(void)
{
    return last_error.c_str();
}

const char* spt_last_error_kind(void)
{
    return last_kind.c_str();
}

size_t spt_last_error_step(void)
{
    return last_step;
}

const char* spt_version(void)
{
    return "0.1.0";
}

void spt_string_free(char* s)
{
    std::free(s);
}

spt_status spt_wood_derive(const char* path, spt_wood** out)
{
    if (!path || !out)
        return null_argument(SPT_TREE_ERROR);
    return guarded(SPT_TREE_ERROR, [&] {
        auto wood = spdetaylor::derive_wood(spdetaylor::parse_path(path));
        *out = new spt_wood{std::move(wood)};
    });
}

void spt_wood_free(spt_wood* w)
{
    delete w;
}

size_t spt_wood_tree_count(const spt_wood* w)
{
    return w ? w->wood.size() : 0;
}

spt_status spt_wood_active_nodes(const spt_wood* w, char** out)
{
    if (!w || !out)
        return null_argument(SPT_TREE_ERROR);
    return guarded(SPT_TREE_ERROR, [&] {
        *out = duplicate(spdetaylor::format_nodes(spdetaylor::active_nodes(w->wood)));
    });
}

spt_status spt_wood_order(const spt_wood* w, double gamma, double delta, double* value,
                          size_t* witness)
{
    if (!w || !value)
        return null_argument(SPT_TREE_ERROR);
    return guarded(SPT_TREE_ERROR, [&] {
        auto o = spdetaylor::wood_order(w->wood, gamma, delta);
        *value = o.value;
        if (witness)
            *witness = o.witness;
    });
}

spt_status spt_wood_tree_order(const spt_wood* w, size_t index, char** out)
{
    if (!w || !out)
        return null_argument(SPT_TREE_ERROR);
    return guarded(SPT_TREE_ERROR, [&] {
        if (index < 1 || index > w->wood.size())
            spdetaylor::fail(spdetaylor::ErrorCode::InvalidArgument, "tree index out of range");
        *out = duplicate(spdetaylor::tree_order(w->wood.trees()[index - 1]).to_string());
    });
}

spt_status spt_wood_render(const spt_wood* w, const char* format, char** out)
{
    if (!w || !format || !out)
        return null_argument(SPT_TREE_ERROR);
    return guarded(SPT_TREE_ERROR, [&] {
        std::string f = format;
        spdetaylor::RenderFormat rf;
        if (f == "ascii")
            rf = spdetaylor::RenderFormat::Ascii;
        else if (f == "dot")
            rf = spdetaylor::RenderFormat::Dot;
        else
            spdetaylor::fail(spdetaylor::ErrorCode::InvalidArgument, "unknown render format '" + f + "'");
        *out = duplicate(spdetaylor::render(w->wood, rf));
    });
}

spt_status spt_model_create(const char* preset, size_t size, const char* nonlinearity,
                            spt_model** out)
{
    if (!preset || !out)
        return null_argument(SPT_ERROR);
    return guarded(SPT_ERROR, [&] {
        auto f = spdetaylor::NonlinearitySpec::parse(nonlinearity ? nonlinearity : "zero");
        std::string p = preset;
        if (p == "heat1d")
            *out = new spt_model{spdetaylor::heat_1d_model(size, f)};
        else if (p == "trace3d")
            *out = new spt_model{spdetaylor::trace_class_3d_model(size, f)};
        else if (p == "sode")
            *out = new spt_model{spdetaylor::sode_model(size, std::vector<double>(size, 1.0), f)};
        else
            spdetaylor::fail(spdetaylor::ErrorCode::Config, "unknown model preset '" + p + "'");
    });
}

void spt_model_free(spt_model* m)
{
    delete m;
}

size_t spt_model_dim(const spt_model* m)
{
    return m ? m->model.dim() : 0;
}

spt_status spt_model_eigenvalues(const spt_model* m, double* out, size_t n)
{
    if (!m || (!out && n > 0))
        return null_argument(SPT_ERROR);
    return guarded(SPT_ERROR, [&] {
        for (size_t k = 0; k < n && k < m->model.dim(); ++k)
            out[k] = m->model.lambda(k);
    });
}

spt_status spt_model_assumption3(const spt_model* m, double gamma, size_t terms,
                                 double* partial_sums, spt_verdict* verdict)
{
    if (!m || !partial_sums || !verdict)
        return null_argument(SPT_ERROR);
    return guarded(SPT_ERROR, [&] {
        auto r = spdetaylor::assumption3_report(m->model, gamma, terms);
        for (size_t k = 0; k < r.partial_sums.size() && k < terms; ++k)
            partial_sums[k] = r.partial_sums[k];
        switch (r.verdict)
        {
            case spdetaylor::SeriesVerdict::Converges: *verdict = SPT_CONVERGES; break;
            case spdetaylor::SeriesVerdict::Diverges: *verdict = SPT_DIVERGES; break;
            case spdetaylor::SeriesVerdict::Unknown: *verdict = SPT_UNKNOWN; break;
        }
    });
}

spt_status spt_run_simulate(const spt_run_options* opt)
{
    if (!opt)
        return null_argument(SPT_ERROR);
    return guarded(SPT_ERROR, [&] { spdetaylor::run_simulate(run_options(*opt), std::cout); });
}

spt_status spt_run_converge(const spt_run_options* opt)
{
    if (!opt)
        return null_argument(SPT_ERROR);
    return guarded(SPT_ERROR, [&] { spdetaylor::run_converge(run_options(*opt), std::cout); });
}
}
