#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace spdetaylor
{
/*!
 * Dirichlet sine basis <-> interior grid values.
 *
 * Basis functions are products of sqrt(2) sin(n pi x) over 1 or 3 axes with
 * modes 1..n per axis; the grid has 2n+1 interior points per axis. Coefficient
 * order is lexicographic with the last axis fastest.
 */
class SineCollocation
{
  public:
    SineCollocation(int dims, std::size_t modes_per_axis);
    ~SineCollocation();
    SineCollocation(SineCollocation const&) = delete;
    SineCollocation& operator=(SineCollocation const&) = delete;

    int dims() const { return dims_; }
    std::size_t modes_per_axis() const { return modes_; }
    std::size_t grid_per_axis() const { return grid_; }
    std::size_t coefficient_count() const;
    std::size_t point_count() const;

    //! Physical coordinate of grid point k along an axis (k = 0..grid-1).
    double node(std::size_t k) const { return double(k + 1) / double(grid_ + 1); }

    std::vector<double> to_grid(Eigen::VectorXd const& coeffs) const;
    Eigen::VectorXd to_coeffs(std::vector<double> const& values) const;

  private:
    int dims_;
    std::size_t modes_;
    std::size_t grid_;
    void* plan_;
};
}  // namespace spdetaylor
