#include "spdetaylor/evaluator.hpp"

#include <cmath>

#include "spdetaylor/error.hpp"
#include "spdetaylor/expint.hpp"

namespace spdetaylor
{
namespace
{
std::string tree_key(STree const& t)
{
    std::string key;
    for (auto l : t.labels())
        key += to_string(l), key += ';';
    key += '|';
    for (auto p : t.parents())
        key += std::to_string(p) + ';';
    return key;
}

std::size_t grid_index(PathRecord const& rec, double t)
{
    double pos = (t - rec.t0) / rec.fine_h;
    double idx = std::round(pos);
    if (std::fabs(pos - idx) > 1e-6 || idx < 0 || idx > double(rec.substeps()))
        fail(ErrorCode::InvalidArgument, "time is not a grid point of the record");
    return std::size_t(idx);
}

double factorial(int n)
{
    double f = 1;
    for (int k = 2; k <= n; ++k)
        f *= k;
    return f;
}
}  // namespace

PathRecord make_record(SpectralModel const& m, GalerkinState const& u0, double t0, FineRecord fine)
{
    PathRecord rec;
    rec.t0 = t0;
    rec.fine_h = fine.fine_h;
    rec.fine = std::move(fine);
    auto n = Eigen::Index(m.dim());
    Eigen::VectorXd decay(n), phi(n);
    for (Eigen::Index k = 0; k < n; ++k)
    {
        decay[k] = expint::decay(m.lambda(std::size_t(k)), rec.fine_h);
        phi[k] = expint::phi1(m.lambda(std::size_t(k)), rec.fine_h);
    }
    rec.conv.push_back(GalerkinState::Zero(n));
    rec.solution.push_back(u0);
    for (auto const& b : rec.fine.steps)
    {
        rec.increments.push_back(b.increments);
        rec.conv.push_back(decay.cwiseProduct(rec.conv.back()) + b.conv);
        auto const& u = rec.solution.back();
        rec.solution.push_back(decay.cwiseProduct(u) + phi.cwiseProduct(m.F(u)) + b.conv);
    }
    return rec;
}

PathRecord make_record(SpectralModel const& m, GalerkinState const& u0, double t0, double h,
                       std::size_t substeps, NormalStream const& stream)
{
    return make_record(m, u0, t0, sample_record(m, h, substeps, {}, stream));
}

PathRecord coarsen_record(SpectralModel const& m, PathRecord const& rec, std::size_t factor)
{
    AggregationWeights w(m, rec.fine_h, {});
    FineRecord coarse{rec.fine_h * double(factor), coarsen(rec.fine, w, factor)};
    return make_record(m, rec.solution.front(), rec.t0, std::move(coarse));
}

//---------------------------------------------------------------------------//

TreeEvaluator::TreeEvaluator(SpectralModel const& m, PathRecord const& rec, double t0, double t1)
    : m_(m), rec_(rec), i0_(grid_index(rec, t0)), i1_(grid_index(rec, t1))
{
    if (i1_ <= i0_)
        fail(ErrorCode::InvalidArgument, "evaluation needs t0 < t1");
    u0_ = rec.solution[i0_];
    auto n = Eigen::Index(m.dim());
    double d = rec.fine_h;
    decay_.resize(n);
    w_left_.resize(n);
    w_right_.resize(n);
    for (Eigen::Index k = 0; k < n; ++k)
    {
        double l = m.lambda(std::size_t(k));
        decay_[k] = expint::decay(l, d);
        w_left_[k] = expint::moment(1, l, d) / d;
        w_right_[k] = expint::phi1(l, d) - w_left_[k];
    }
}

Process TreeEvaluator::exp_quadrature(Process const& f) const
{
    Process q(f.size());
    q[0] = GalerkinState::Zero(u0_.size());
    for (std::size_t s = 0; s + 1 < f.size(); ++s)
    {
        q[s + 1] = decay_.cwiseProduct(q[s]) + w_left_.cwiseProduct(f[s])
                   + w_right_.cwiseProduct(f[s + 1]);
    }
    return q;
}

Process TreeEvaluator::node_process(NodeLabel label, std::vector<Process const*> const& children) const
{
    auto n = children.size();
    std::size_t pts = points();
    Process f(pts);
    if (label == NodeLabel::One && n == 0)
    {
        GalerkinState fu = m_.F(u0_);
        for (std::size_t s = 0; s < pts; ++s)
        {
            GalerkinState v(fu.size());
            for (Eigen::Index k = 0; k < v.size(); ++k)
                v[k] = expint::phi1(m_.lambda(std::size_t(k)), rec_.fine_h * double(s)) * fu[k];
            f[s] = std::move(v);
        }
        return f;
    }
    if (label != NodeLabel::One && label != NodeLabel::OneStar)
        fail(ErrorCode::InvalidArgument, "only labels 1 and 1* carry time integrals");

    std::vector<GalerkinState> dirs(n);
    auto gather = [&](std::size_t s) {
        for (std::size_t c = 0; c < n; ++c)
            dirs[c] = (*children[c])[s];
    };
    if (n == 0)
    {
        for (std::size_t s = 0; s < pts; ++s)
            f[s] = m_.F(rec_.solution[i0_ + s]);
    }
    else if (label == NodeLabel::One || m_.nonlinearity().is_affine())
    {
        double scale = 1 / factorial(int(n));
        for (std::size_t s = 0; s < pts; ++s)
        {
            gather(s);
            f[s] = scale * m_.apply_F(int(n), u0_, dirs);
        }
    }
    else
    {
        static auto const rule = expint::gauss_legendre(16);
        double norm = 1 / factorial(int(n) - 1);
        for (std::size_t s = 0; s < pts; ++s)
        {
            gather(s);
            GalerkinState du = rec_.solution[i0_ + s] - u0_;
            GalerkinState acc = GalerkinState::Zero(u0_.size());
            for (auto const& node : rule)
            {
                double kern = node.w * norm * std::pow(1 - node.x, double(n) - 1);
                acc += kern * m_.apply_F(int(n), u0_ + node.x * du, dirs);
            }
            f[s] = std::move(acc);
        }
    }
    return exp_quadrature(f);
}

Process const& TreeEvaluator::phi_process(STree const& t)
{
    auto key = tree_key(t);
    if (auto it = cache_.find(key); it != cache_.end())
        return it->second;
    if (integral_depth(t) > max_integral_depth)
    {
        fail(ErrorCode::UnsupportedDepth,
             "tree nests " + std::to_string(integral_depth(t)) + " time integrals, limit "
                 + std::to_string(max_integral_depth));
    }
    std::size_t pts = points();
    auto n = u0_.size();
    Process p(pts);
    auto root = t.label(1);
    if (root == NodeLabel::Zero)
    {
        for (std::size_t s = 0; s < pts; ++s)
        {
            GalerkinState v(n);
            for (Eigen::Index k = 0; k < n; ++k)
                v[k] = std::expm1(-m_.lambda(std::size_t(k)) * rec_.fine_h * double(s)) * u0_[k];
            p[s] = std::move(v);
        }
    }
    else if (root == NodeLabel::Two)
    {
        auto const& x0 = rec_.conv[i0_];
        for (std::size_t s = 0; s < pts; ++s)
        {
            GalerkinState v = rec_.conv[i0_ + s];
            for (Eigen::Index k = 0; k < n; ++k)
                v[k] -= std::exp(-m_.lambda(std::size_t(k)) * rec_.fine_h * double(s)) * x0[k];
            p[s] = std::move(v);
        }
    }
    else
    {
        auto subs = subtrees(t);
        std::vector<Process const*> kids;
        for (auto const& sub : subs)
            kids.push_back(&phi_process(sub));
        p = node_process(root, kids);
    }
    return cache_.emplace(std::move(key), std::move(p)).first->second;
}

GalerkinState TreeEvaluator::phi(SWood const& w)
{
    GalerkinState sum = GalerkinState::Zero(u0_.size());
    for (auto const& t : w.trees())
        sum += phi(t);
    return sum;
}

GalerkinState TreeEvaluator::psi(SWood const& w)
{
    GalerkinState sum = GalerkinState::Zero(u0_.size());
    for (auto const& t : w.trees())
    {
        if (!t.is_active())
            sum += phi(t);
    }
    return sum;
}

GalerkinState TreeEvaluator::delta_u() const
{
    return rec_.solution[i1_] - rec_.solution[i0_];
}

GalerkinState phi_numeric(STree const& t, SpectralModel const& m, PathRecord const& p, double t0,
                          double t1)
{
    TreeEvaluator ev(m, p, t0, t1);
    return ev.phi(t);
}

GalerkinState psi_numeric(SWood const& w, SpectralModel const& m, PathRecord const& p, double t0,
                          double t1)
{
    TreeEvaluator ev(m, p, t0, t1);
    return ev.psi(w);
}

IdentityResult identity_check(SWood const& w, NodeAddress a, SpectralModel const& m,
                              PathRecord const& p, double t0, double t1)
{
    SWood expanded = expand(w, a);
    TreeEvaluator fine(m, p, t0, t1);
    GalerkinState lhs = fine.phi(w), rhs = fine.phi(expanded);
    IdentityResult r{(lhs - rhs).norm(), 0.0, fine.delta_u().norm()};
    if (p.substeps() % 2 == 0)
    {
        PathRecord half = coarsen_record(m, p, 2);
        TreeEvaluator coarse(m, half, t0, t1);
        r.quadrature_bound = (coarse.phi(w) - lhs).norm() + (coarse.phi(expanded) - rhs).norm();
    }
    return r;
}
}  // namespace spdetaylor
