#include <sstream>

#include "spdetaylor/trees.hpp"

namespace spdetaylor
{
namespace
{
char const* ascii_glyph(NodeLabel label)
{
    switch (label)
    {
        case NodeLabel::Zero: return "<0>";
        case NodeLabel::One: return "(1)";
        case NodeLabel::Two: return "((2))";
        case NodeLabel::OneStar: return "[1*]";
    }
    return "?";
}

char const* dot_shape(NodeLabel label)
{
    switch (label)
    {
        case NodeLabel::Zero: return "diamond";
        case NodeLabel::One: return "circle";
        case NodeLabel::Two: return "doublecircle";
        case NodeLabel::OneStar: return "box";
    }
    return "point";
}

void ascii_subtree(std::ostream& os, STree const& t, std::size_t j, std::string const& prefix,
                   bool last)
{
    os << prefix << (last ? "`-- " : "|-- ") << j << ' ' << ascii_glyph(t.label(j)) << '\n';
    auto kids = t.children(j);
    for (std::size_t k = 0; k < kids.size(); ++k)
        ascii_subtree(os, t, kids[k], prefix + (last ? "    " : "|   "), k + 1 == kids.size());
}

std::string render_ascii(SWood const& w)
{
    std::ostringstream os;
    for (std::size_t i = 1; i <= w.size(); ++i)
    {
        auto const& t = w.tree(i);
        os << "t" << i << ": 1 " << ascii_glyph(t.label(1)) << '\n';
        auto kids = t.children(1);
        for (std::size_t k = 0; k < kids.size(); ++k)
            ascii_subtree(os, t, kids[k], "    ", k + 1 == kids.size());
    }
    return os.str();
}

std::string render_dot(SWood const& w)
{
    std::ostringstream os;
    os << "digraph wood {\n  rankdir=BT;\n  node [fontsize=10];\n";
    for (std::size_t i = 1; i <= w.size(); ++i)
    {
        auto const& t = w.tree(i);
        os << "  subgraph cluster_t" << i << " {\n    label=\"t" << i << "\";\n";
        for (std::size_t j = 1; j <= t.size(); ++j)
        {
            os << "    t" << i << "_n" << j << " [shape=" << dot_shape(t.label(j))
               << ", label=\"" << j << "\"];\n";
        }
        // Edges run from a node to its parent.
        for (std::size_t j = 2; j <= t.size(); ++j)
            os << "    t" << i << "_n" << j << " -> t" << i << "_n" << t.parent(j) << ";\n";
        os << "  }\n";
    }
    os << "}\n";
    return os.str();
}
}  // namespace

std::string render(SWood const& w, RenderFormat format)
{
    return format == RenderFormat::Dot ? render_dot(w) : render_ascii(w);
}
}  // namespace spdetaylor
