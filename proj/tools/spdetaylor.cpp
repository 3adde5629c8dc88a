#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "spdetaylor/spdetaylor.h"

namespace
{
int report(spt_status status)
{
    if (status != SPT_OK)
        std::cerr << "error: " << spt_last_error() << '\n';
    return static_cast<int>(status);
}

std::string take(char* s)
{
    std::string out = s ? s : "";
    spt_string_free(s);
    return out;
}

struct TreeArgs
{
    std::string path;
    double gamma = 0.25;
    double delta = 0.25;
    std::string format = "ascii";
};

int trees_command(std::string const& sub, TreeArgs const& a)
{
    spt_wood* w = nullptr;
    if (spt_wood_derive(a.path.c_str(), &w) != SPT_OK)
        return report(SPT_TREE_ERROR);
    int code = 0;
    char* text = nullptr;
    if (sub == "derive")
    {
        if (spt_wood_render(w, "ascii", &text) != SPT_OK)
            code = report(SPT_TREE_ERROR);
        else
            std::cout << take(text);
        if (code == 0 && spt_wood_active_nodes(w, &text) == SPT_OK)
            std::cout << spt_wood_tree_count(w) << " trees\nactive nodes: " << take(text) << '\n';
    }
    else if (sub == "acn")
    {
        if (spt_wood_active_nodes(w, &text) != SPT_OK)
            code = report(SPT_TREE_ERROR);
        else
            std::cout << take(text) << '\n';
    }
    else if (sub == "order")
    {
        double value = 0;
        size_t witness = 0;
        if (spt_wood_order(w, a.gamma, a.delta, &value, &witness) != SPT_OK
            || spt_wood_tree_order(w, witness, &text) != SPT_OK)
        {
            code = report(SPT_TREE_ERROR);
        }
        else
        {
            std::printf("%.17g\n", value);
            std::cout << "witness: tree " << witness << ", ord = " << take(text) << '\n';
        }
    }
    else
    {
        if (spt_wood_render(w, a.format.c_str(), &text) != SPT_OK)
            code = report(SPT_TREE_ERROR);
        else
            std::cout << take(text);
    }
    spt_wood_free(w);
    return code;
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Stochastic Taylor trees, exponential schemes and strong-order experiments"};
    app.require_subcommand(1);

    TreeArgs tree_args;
    auto* trees = app.add_subcommand("trees", "S-tree and S-wood operations");
    trees->require_subcommand(1);
    for (auto name : {"derive", "order", "acn", "render"})
    {
        auto* sub = trees->add_subcommand(name);
        sub->add_option("--path", tree_args.path, "derivation path, e.g. \"(2,1) (4,1)\"");
        if (std::string(name) == "order")
        {
            sub->add_option("--gamma", tree_args.gamma, "smoothness gamma in (0,1)");
            sub->add_option("--delta", tree_args.delta, "smoothness delta in (0,1/2]");
        }
        if (std::string(name) == "render")
            sub->add_option("--format", tree_args.format, "ascii or dot")
                ->check(CLI::IsMember({"ascii", "dot"}));
    }

    std::string config, out;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 0;
    bool assert_checks = false, identity = false;
    auto add_run_flags = [&](CLI::App* sub) {
        sub->add_option("--config", config, "JSON config file")->required();
        sub->add_option("--seed", seed, "experiment seed (overrides the config)");
        sub->add_option("--threads", threads, "worker thread cap")->check(CLI::PositiveNumber);
        sub->add_option("--out", out, "output directory (overrides the config)");
    };
    auto* simulate = app.add_subcommand("simulate", "integrate single trajectories");
    add_run_flags(simulate);
    auto* converge = app.add_subcommand("converge", "strong-order experiment");
    add_run_flags(converge);
    converge->add_flag("--assert", assert_checks, "exit 3 when an acceptance window fails");
    converge->add_flag("--identity-check", identity, "also run the expansion identity check");

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::CallForHelp const& e)
    {
        return app.exit(e);
    }
    catch (CLI::CallForAllHelp const& e)
    {
        return app.exit(e);
    }
    catch (CLI::ParseError const& e)
    {
        app.exit(e);
        return 1;
    }

    if (trees->parsed())
    {
        for (auto* sub : trees->get_subcommands())
        {
            if (sub->parsed())
                return trees_command(sub->get_name(), tree_args);
        }
    }

    spt_run_options opt{};
    opt.config = config.c_str();
    opt.has_seed = seed.has_value();
    opt.seed = seed.value_or(0);
    opt.threads = threads;
    opt.out = out.empty() ? nullptr : out.c_str();
    opt.assert_checks = assert_checks;
    opt.identity_check = identity;
    if (simulate->parsed())
        return report(spt_run_simulate(&opt));
    return report(spt_run_converge(&opt));
}
