#pragma once

#include <map>
#include <string>
#include <vector>

#include "spdetaylor/model.hpp"
#include "spdetaylor/sampler.hpp"
#include "spdetaylor/trees.hpp"

namespace spdetaylor
{
//! Maximum nesting of time integrals accepted by the evaluator.
inline constexpr std::size_t max_integral_depth = 4;

/*!
 * One noise path on a uniform fine grid over [t0, t0 + S*dt].
 *
 * Grid values of the convolution restarted at t0 and of the reference
 * solution (exponential Euler on the same grid) are stored at all S+1 points.
 */
struct PathRecord
{
    double t0 = 0;
    double fine_h = 0;
    FineRecord fine;
    std::vector<Eigen::VectorXd> increments;
    std::vector<GalerkinState> conv;
    std::vector<GalerkinState> solution;

    std::size_t substeps() const { return fine.steps.size(); }
    double t1() const { return t0 + fine_h * double(substeps()); }
    double time(std::size_t m) const { return t0 + fine_h * double(m); }
};

PathRecord make_record(SpectralModel const& m, GalerkinState const& u0, double t0, FineRecord fine);
PathRecord make_record(SpectralModel const& m, GalerkinState const& u0, double t0, double h,
                       std::size_t substeps, NormalStream const& stream);
//! Same randomness on a grid `factor` times coarser.
PathRecord coarsen_record(SpectralModel const& m, PathRecord const& rec, std::size_t factor);

using Process = std::vector<GalerkinState>;

//! Evaluates Phi/Psi on the grid points of [t0, t1] within a record.
class TreeEvaluator
{
  public:
    TreeEvaluator(SpectralModel const& m, PathRecord const& rec, double t0, double t1);
    TreeEvaluator(SpectralModel const& m, PathRecord const& rec)
        : TreeEvaluator(m, rec, rec.t0, rec.t1())
    {
    }

    //! Phi(t) at every grid point of [t0, t1] (index 0 is t0).
    Process const& phi_process(STree const& t);
    GalerkinState phi(STree const& t) { return phi_process(t).back(); }
    GalerkinState phi(SWood const& w);
    GalerkinState psi(SWood const& w);

    //! Time integral for a node with the given label over evaluated subtree processes.
    Process node_process(NodeLabel label, std::vector<Process const*> const& children) const;

    GalerkinState delta_u() const;
    std::size_t points() const { return i1_ - i0_ + 1; }

  private:
    Process exp_quadrature(Process const& f) const;

    SpectralModel const& m_;
    PathRecord const& rec_;
    std::size_t i0_, i1_;
    GalerkinState u0_;
    Eigen::VectorXd decay_, w_left_, w_right_;
    std::map<std::string, Process> cache_;
};

GalerkinState phi_numeric(STree const& t, SpectralModel const& m, PathRecord const& p, double t0,
                          double t1);
GalerkinState psi_numeric(SWood const& w, SpectralModel const& m, PathRecord const& p, double t0,
                          double t1);

struct IdentityResult
{
    double residual;        //!< ||Phi(w) - Phi(E_a w)||
    double quadrature_bound;  //!< change of both sides when the grid is halved
    double delta_u_norm;
};

IdentityResult identity_check(SWood const& w, NodeAddress a, SpectralModel const& m,
                              PathRecord const& p, double t0, double t1);
}  // namespace spdetaylor
