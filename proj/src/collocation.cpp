#include "spdetaylor/collocation.hpp"

#include <cmath>
#include <mutex>

#include <fftw3.h>

#include "spdetaylor/error.hpp"

namespace spdetaylor
{
namespace
{
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}
}  // namespace

SineCollocation::SineCollocation(int dims, std::size_t modes_per_axis)
    : dims_(dims), modes_(modes_per_axis), grid_(2 * modes_per_axis + 1), plan_(nullptr)
{
    if ((dims != 1 && dims != 3) || modes_per_axis == 0)
        fail(ErrorCode::InvalidArgument, "collocation needs 1 or 3 axes and at least one mode");
    std::vector<double> scratch(point_count());
    int n[3] = {int(grid_), int(grid_), int(grid_)};
    fftw_r2r_kind kinds[3] = {FFTW_RODFT00, FFTW_RODFT00, FFTW_RODFT00};
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_r2r(dims, n, scratch.data(), scratch.data(), kinds,
                          FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan_)
        fail(ErrorCode::InvalidArgument, "could not plan sine transform");
}

SineCollocation::~SineCollocation()
{
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
}

std::size_t SineCollocation::coefficient_count() const
{
    return dims_ == 1 ? modes_ : modes_ * modes_ * modes_;
}

std::size_t SineCollocation::point_count() const
{
    return dims_ == 1 ? grid_ : grid_ * grid_ * grid_;
}

std::vector<double> SineCollocation::to_grid(Eigen::VectorXd const& coeffs) const
{
    std::vector<double> buf(point_count(), 0.0);
    if (dims_ == 1)
    {
        for (std::size_t i = 0; i < modes_; ++i)
            buf[i] = coeffs[Eigen::Index(i)];
    }
    else
    {
        Eigen::Index c = 0;
        for (std::size_t a = 0; a < modes_; ++a)
            for (std::size_t b = 0; b < modes_; ++b)
                for (std::size_t d = 0; d < modes_; ++d)
                    buf[(a * grid_ + b) * grid_ + d] = coeffs[c++];
    }
    fftw_execute_r2r(static_cast<fftw_plan>(plan_), buf.data(), buf.data());
    double scale = std::pow(std::sqrt(0.5), dims_);
    for (auto& v : buf)
        v *= scale;
    return buf;
}

Eigen::VectorXd SineCollocation::to_coeffs(std::vector<double> const& values) const
{
    std::vector<double> buf = values;
    fftw_execute_r2r(static_cast<fftw_plan>(plan_), buf.data(), buf.data());
    double scale = std::pow(std::sqrt(0.5) / double(grid_ + 1), dims_);
    Eigen::VectorXd out(static_cast<Eigen::Index>(coefficient_count()));
    if (dims_ == 1)
    {
        for (std::size_t i = 0; i < modes_; ++i)
            out[Eigen::Index(i)] = scale * buf[i];
    }
    else
    {
        Eigen::Index c = 0;
        for (std::size_t a = 0; a < modes_; ++a)
            for (std::size_t b = 0; b < modes_; ++b)
                for (std::size_t d = 0; d < modes_; ++d)
                    out[c++] = scale * buf[(a * grid_ + b) * grid_ + d];
    }
    return out;
}
}  // namespace spdetaylor
