#include "spdetaylor/trees.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "spdetaylor/error.hpp"

namespace spdetaylor
{
const char* to_string(ErrorCode code) noexcept
{
    switch (code)
    {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ParentNotSmaller: return "ParentNotSmaller";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::NotActive: return "NotActive";
        case ErrorCode::NoActiveTree: return "NoActiveTree";
        case ErrorCode::DerivativeOrderExceeded: return "DerivativeOrderExceeded";
        case ErrorCode::NonPositiveStep: return "NonPositiveStep";
        case ErrorCode::FactorizationFailed: return "FactorizationFailed";
        case ErrorCode::MissingTimeIntegrals: return "MissingTimeIntegrals";
        case ErrorCode::UnsupportedDepth: return "UnsupportedDepth";
        case ErrorCode::NotLinearConstant: return "NotLinearConstant";
        case ErrorCode::InsufficientPaths: return "InsufficientPaths";
        case ErrorCode::Config: return "Config";
        case ErrorCode::Io: return "Io";
        case ErrorCode::AssertionFailed: return "AssertionFailed";
    }
    return "Unknown";
}

const char* to_string(NodeLabel label) noexcept
{
    switch (label)
    {
        case NodeLabel::Zero: return "0";
        case NodeLabel::One: return "1";
        case NodeLabel::Two: return "2";
        case NodeLabel::OneStar: return "1*";
    }
    return "?";
}

std::string SymbolicOrder::to_string() const
{
    std::ostringstream os;
    os << const_part;
    auto term = [&os](int c, char const* sym) {
        if (c == 0)
            return;
        os << " + ";
        if (c != 1)
            os << c;
        os << sym;
    };
    term(gamma_coeff, "g");
    term(delta_coeff, "d");
    return os.str();
}

//---------------------------------------------------------------------------//

STree::STree(std::vector<std::size_t> parents, std::vector<NodeLabel> labels)
    : parents_(std::move(parents)), labels_(std::move(labels))
{
    if (labels_.empty())
        fail(ErrorCode::LengthMismatch, "tree needs at least one node");
    if (parents_.size() + 1 != labels_.size())
    {
        fail(ErrorCode::LengthMismatch,
             "parents has " + std::to_string(parents_.size())
                 + " entries, expected " + std::to_string(labels_.size() - 1));
    }
    for (std::size_t k = 0; k < parents_.size(); ++k)
    {
        std::size_t j = k + 2;
        if (parents_[k] < 1 || parents_[k] >= j)
        {
            fail(ErrorCode::ParentNotSmaller,
                 "parent of node " + std::to_string(j) + " is "
                     + std::to_string(parents_[k]));
        }
    }
}

bool STree::is_active() const
{
    return count(NodeLabel::OneStar) > 0;
}

std::size_t STree::count(NodeLabel label) const
{
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

std::vector<std::size_t> STree::children(std::size_t j) const
{
    std::vector<std::size_t> result;
    for (std::size_t k = 0; k < parents_.size(); ++k)
    {
        if (parents_[k] == j)
            result.push_back(k + 2);
    }
    return result;
}

STree STree::relabeled(std::size_t j, NodeLabel label) const
{
    auto labels = labels_;
    labels.at(j - 1) = label;
    return STree(parents_, std::move(labels));
}

STree STree::with_leaf(std::size_t j, NodeLabel label) const
{
    auto parents = parents_;
    auto labels = labels_;
    parents.push_back(j);
    labels.push_back(label);
    return STree(std::move(parents), std::move(labels));
}

STree make_tree(std::vector<std::size_t> parents, std::vector<NodeLabel> labels)
{
    return STree(std::move(parents), std::move(labels));
}

//---------------------------------------------------------------------------//

SWood::SWood(std::vector<STree> trees) : trees_(std::move(trees))
{
    if (trees_.empty())
        fail(ErrorCode::InvalidArgument, "wood needs at least one tree");
}

SWood initial_wood()
{
    return SWood({STree({}, {NodeLabel::Zero}),
                  STree({}, {NodeLabel::OneStar}),
                  STree({}, {NodeLabel::Two})});
}

std::vector<NodeAddress> active_nodes(SWood const& w)
{
    std::vector<NodeAddress> result;
    for (std::size_t i = 1; i <= w.size(); ++i)
    {
        auto const& t = w.tree(i);
        for (std::size_t j = 1; j <= t.size(); ++j)
        {
            if (t.label(j) == NodeLabel::OneStar)
                result.emplace_back(i, j);
        }
    }
    return result;
}

SWood expand(SWood const& w, NodeAddress at)
{
    auto [i, j] = at;
    if (i < 1 || i > w.size() || j < 1 || j > w.tree(i).size()
        || w.tree(i).label(j) != NodeLabel::OneStar)
    {
        fail(ErrorCode::NotActive,
             "(" + std::to_string(i) + "," + std::to_string(j) + ") is not active");
    }
    auto trees = w.trees();
    STree const original = trees[i - 1];
    trees[i - 1] = original.relabeled(j, NodeLabel::One);
    for (auto label : {NodeLabel::Zero, NodeLabel::OneStar, NodeLabel::Two})
        trees.push_back(original.with_leaf(j, label));
    return SWood(std::move(trees));
}

std::vector<STree> subtrees(STree const& t)
{
    std::vector<STree> result;
    for (std::size_t child : t.children(1))
    {
        // Descendants always carry larger indices, so one forward sweep suffices.
        std::vector<std::size_t> members{child};
        for (std::size_t k = child + 1; k <= t.size(); ++k)
        {
            if (std::binary_search(members.begin(), members.end(), t.parent(k)))
                members.push_back(k);
        }
        std::vector<std::size_t> parents;
        std::vector<NodeLabel> labels;
        for (std::size_t pos = 0; pos < members.size(); ++pos)
        {
            labels.push_back(t.label(members[pos]));
            if (pos == 0)
                continue;
            auto it = std::lower_bound(members.begin(), members.end(),
                                       t.parent(members[pos]));
            parents.push_back(static_cast<std::size_t>(it - members.begin()) + 1);
        }
        result.emplace_back(std::move(parents), std::move(labels));
    }
    return result;
}

SymbolicOrder tree_order(STree const& t)
{
    SymbolicOrder o;
    o.gamma_coeff = static_cast<int>(t.count(NodeLabel::Zero));
    o.delta_coeff = static_cast<int>(t.count(NodeLabel::Two));
    o.const_part = static_cast<int>(t.size()) - o.gamma_coeff - o.delta_coeff;
    return o;
}

WoodOrder wood_order(SWood const& w, double gamma, double delta)
{
    if (!(gamma > 0 && gamma < 1) || !(delta > 0 && delta <= 0.5))
    {
        fail(ErrorCode::InvalidArgument,
             "order parameters must satisfy 0 < gamma < 1, 0 < delta <= 1/2");
    }
    WoodOrder best{0, 0};
    for (std::size_t i = 1; i <= w.size(); ++i)
    {
        if (!w.tree(i).is_active())
            continue;
        double value = tree_order(w.tree(i)).evaluate(gamma, delta);
        if (best.witness == 0 || value < best.value)
            best = {value, i};
    }
    if (best.witness == 0)
        fail(ErrorCode::NoActiveTree, "wood has no active tree");
    return best;
}

SWood derive_wood(DerivationPath const& path)
{
    SWood w = initial_wood();
    for (std::size_t s = 0; s < path.size(); ++s)
    {
        try
        {
            w = expand(w, path[s]);
        }
        catch (Error const& e)
        {
            if (e.code() != ErrorCode::NotActive)
                throw;
            throw DerivationError(s + 1, "step " + std::to_string(s + 1)
                                             + ": not active " + format_path({path[s]}));
        }
    }
    return w;
}

DerivationPath parse_path(std::string_view text)
{
    DerivationPath path;
    std::size_t pos = 0;
    auto skip = [&] {
        while (pos < text.size()
               && (std::isspace(static_cast<unsigned char>(text[pos])) || text[pos] == ','))
            ++pos;
    };
    auto number = [&]() -> std::size_t {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
            ++pos;
        std::size_t value = 0;
        auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), value);
        if (ec != std::errc{})
            fail(ErrorCode::InvalidArgument, "expected a node index in path '" + std::string(text) + "'");
        pos = static_cast<std::size_t>(ptr - text.data());
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
            ++pos;
        return value;
    };
    auto expect = [&](char c) {
        if (pos >= text.size() || text[pos] != c)
            fail(ErrorCode::InvalidArgument,
                 std::string("expected '") + c + "' in path '" + std::string(text) + "'");
        ++pos;
    };
    skip();
    while (pos < text.size())
    {
        expect('(');
        std::size_t i = number();
        expect(',');
        std::size_t j = number();
        expect(')');
        path.emplace_back(i, j);
        skip();
    }
    return path;
}

std::string format_path(DerivationPath const& path)
{
    std::string out;
    for (auto const& [i, j] : path)
    {
        if (!out.empty())
            out += ' ';
        out += "(" + std::to_string(i) + "," + std::to_string(j) + ")";
    }
    return out;
}

std::string format_nodes(std::vector<NodeAddress> const& nodes)
{
    std::string out = "{";
    for (std::size_t k = 0; k < nodes.size(); ++k)
    {
        if (k)
            out += ",";
        out += "(" + std::to_string(nodes[k].first) + "," + std::to_string(nodes[k].second) + ")";
    }
    return out + "}";
}

std::size_t integral_depth(STree const& t)
{
    auto root = t.label(1);
    if (root == NodeLabel::Zero || root == NodeLabel::Two)
        return 0;
    std::size_t deepest = 0;
    for (auto const& sub : subtrees(t))
        deepest = std::max(deepest, integral_depth(sub));
    return deepest + 1;
}
}  // namespace spdetaylor
