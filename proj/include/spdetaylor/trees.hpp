#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace spdetaylor
{
enum class NodeLabel
{
    Zero,
    One,
    Two,
    OneStar
};

const char* to_string(NodeLabel label) noexcept;

//! Order expression c + g*gamma + d*delta.
struct SymbolicOrder
{
    int const_part = 0;
    int gamma_coeff = 0;
    int delta_coeff = 0;

    double evaluate(double gamma, double delta) const
    {
        return const_part + gamma_coeff * gamma + delta_coeff * delta;
    }

    std::string to_string() const;

    friend bool operator==(SymbolicOrder const&, SymbolicOrder const&) = default;
};

/*!
 * Labeled rooted tree on nodes 1..l.
 *
 * All indices are 1-based. Node 1 is the root; every other node j has a
 * parent strictly smaller than j.
 */
class STree
{
  public:
    //! parents[k] is the parent of node k+2.
    STree(std::vector<std::size_t> parents, std::vector<NodeLabel> labels);

    std::size_t size() const { return labels_.size(); }
    NodeLabel label(std::size_t j) const { return labels_.at(j - 1); }
    std::size_t parent(std::size_t j) const { return parents_.at(j - 2); }
    std::vector<std::size_t> const& parents() const { return parents_; }
    std::vector<NodeLabel> const& labels() const { return labels_; }

    bool is_active() const;
    std::size_t count(NodeLabel label) const;
    std::vector<std::size_t> children(std::size_t j) const;

    //! Copy with node j relabeled.
    STree relabeled(std::size_t j, NodeLabel label) const;
    //! Copy with one new leaf under node j.
    STree with_leaf(std::size_t j, NodeLabel label) const;

    friend bool operator==(STree const&, STree const&) = default;

  private:
    std::vector<std::size_t> parents_;
    std::vector<NodeLabel> labels_;
};

STree make_tree(std::vector<std::size_t> parents, std::vector<NodeLabel> labels);

using NodeAddress = std::pair<std::size_t, std::size_t>;
using DerivationPath = std::vector<NodeAddress>;

class SWood
{
  public:
    explicit SWood(std::vector<STree> trees);

    std::size_t size() const { return trees_.size(); }
    STree const& tree(std::size_t i) const { return trees_.at(i - 1); }
    std::vector<STree> const& trees() const { return trees_; }

    friend bool operator==(SWood const&, SWood const&) = default;

  private:
    std::vector<STree> trees_;
};

//! The starting wood: one-node trees labeled 0, 1*, 2.
SWood initial_wood();

std::vector<NodeAddress> active_nodes(SWood const& w);
SWood expand(SWood const& w, NodeAddress at);
std::vector<STree> subtrees(STree const& t);

SymbolicOrder tree_order(STree const& t);

struct WoodOrder
{
    double value;
    std::size_t witness;  //!< 1-based tree index
};

WoodOrder wood_order(SWood const& w, double gamma, double delta);

//! Replay expansions from the initial wood; throws DerivationError.
SWood derive_wood(DerivationPath const& path);

//! Parse "(2,1) (4,1)" or "(2,1),(4,1)".
DerivationPath parse_path(std::string_view text);
std::string format_path(DerivationPath const& path);
std::string format_nodes(std::vector<NodeAddress> const& nodes);

//! Nesting depth in time integrals (labels 1 and 1* count).
std::size_t integral_depth(STree const& t);

enum class RenderFormat
{
    Ascii,
    Dot
};

std::string render(SWood const& w, RenderFormat format);
}  // namespace spdetaylor
