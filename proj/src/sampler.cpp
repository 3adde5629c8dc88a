#include "spdetaylor/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "spdetaylor/error.hpp"

namespace spdetaylor
{
namespace
{
// Rates closer than link_gap / h share one expansion center.
constexpr double link_gap = 0.05;
constexpr double max_cluster_width = 1.0;
constexpr double tail_eps = 1e-18;

// One piece of a functional kernel: coef * tau^power * e^{-rate tau}, or, when
// two_rate is set, coef * (e^{-inner tau} - e^{-outer tau}) / (outer - inner).
struct Piece
{
    double coef;
    int power;
    double rate;
    bool two_rate = false;
    double outer = 0;
};

struct Cluster
{
    double lo, hi, center;
};

std::vector<Cluster> cluster_rates(std::vector<double> rates, double h)
{
    std::sort(rates.begin(), rates.end());
    rates.erase(std::unique(rates.begin(), rates.end()), rates.end());
    std::vector<std::vector<double>> groups;
    for (double r : rates)
    {
        if (groups.empty() || (r - groups.back().back()) * h > link_gap)
            groups.push_back({r});
        else
            groups.back().push_back(r);
    }
    std::vector<Cluster> out;
    // Split over-wide chains at their largest gap.
    std::vector<std::vector<double>> pending(groups.rbegin(), groups.rend());
    while (!pending.empty())
    {
        auto g = std::move(pending.back());
        pending.pop_back();
        if ((g.back() - g.front()) * h <= max_cluster_width || g.size() < 2)
        {
            out.push_back({g.front(), g.back(), 0.5 * (g.front() + g.back())});
            continue;
        }
        std::size_t cut = 1;
        for (std::size_t k = 1; k < g.size(); ++k)
        {
            if (g[k] - g[k - 1] > g[cut] - g[cut - 1])
                cut = k;
        }
        pending.emplace_back(g.begin() + std::ptrdiff_t(cut), g.end());
        pending.emplace_back(g.begin(), g.begin() + std::ptrdiff_t(cut));
    }
    std::sort(out.begin(), out.end(), [](auto const& a, auto const& b) { return a.lo < b.lo; });
    return out;
}

std::size_t find_cluster(std::vector<Cluster> const& cs, double rate)
{
    for (std::size_t c = 0; c < cs.size(); ++c)
    {
        if (rate >= cs[c].lo && rate <= cs[c].hi)
            return c;
    }
    fail(ErrorCode::InvalidArgument, "rate outside every cluster");
}

// Functional kernels of driving mode j, as pieces (b_j included).
std::vector<std::vector<Piece>> functional_pieces(std::vector<double> const& lambdas, double b,
                                                  std::size_t j, NoiseRequest const& req)
{
    double lj = lambdas[j];
    std::vector<std::vector<Piece>> f;
    f.push_back({{b, 0, 0.0}});
    f.push_back({{b, 0, lj}});
    if (req.shift)
        f.push_back({{b, 0, lj - *req.shift}});
    if (req.plain_integrals)
        f.push_back({{b, 0, lj, true, 0.0}});
    if (req.time_integrals == TimeIntegralMode::Diagonal)
        f.push_back({{b, 0, lj, true, lj}});
    else if (req.time_integrals == TimeIntegralMode::Full)
    {
        for (double lk : lambdas)
            f.push_back({{b, 0, lj, true, lk}});
    }
    return f;
}

Eigen::MatrixXd build_factor(std::vector<std::vector<Piece>> const& funcs, double h)
{
    std::vector<double> rates;
    for (auto const& f : funcs)
        for (auto const& p : f)
        {
            rates.push_back(p.rate);
            if (p.two_rate)
                rates.push_back(p.outer);
        }
    auto clusters = cluster_rates(rates, h);

    // atom (cluster, power) -> column
    std::map<std::pair<std::size_t, int>, Eigen::Index> atoms;
    std::vector<std::vector<std::pair<Eigen::Index, double>>> coefs(funcs.size());
    auto add = [&](std::size_t f, std::size_t c, int power, double coef) {
        auto [it, fresh] = atoms.try_emplace({c, power}, Eigen::Index(atoms.size()));
        coefs[f].emplace_back(it->second, coef);
    };
    auto add_exp = [&](std::size_t f, double coef, int power, double rate) {
        std::size_t c = find_cluster(clusters, rate);
        double x = clusters[c].center - rate;
        double term = coef;
        for (int m = 0; m < 60; ++m)
        {
            if (m)
                term *= x / m;
            if (term == 0)
                break;
            add(f, c, power + m, term);
            if (std::fabs(term) * std::pow(h, m) <= tail_eps * std::fabs(coef))
                break;
        }
    };
    for (std::size_t f = 0; f < funcs.size(); ++f)
    {
        for (auto const& p : funcs[f])
        {
            if (p.coef == 0)
                continue;
            if (!p.two_rate)
            {
                add_exp(f, p.coef, p.power, p.rate);
                continue;
            }
            std::size_t ci = find_cluster(clusters, p.rate);
            std::size_t co = find_cluster(clusters, p.outer);
            if (ci != co)
            {
                double d = p.outer - p.rate;
                add_exp(f, p.coef / d, 0, p.rate);
                add_exp(f, -p.coef / d, 0, p.outer);
                continue;
            }
            // Divided differences (x^m - y^m)/(x - y) about the shared center.
            double x = clusters[ci].center - p.rate, y = clusters[ci].center - p.outer;
            // |dd_m / m!| h^(m-1) <= (r h)^(m-1) / (m-1)!; dd_m itself vanishes for even m when x = -y
            double r = std::max(std::fabs(x), std::fabs(y));
            double dd = 1, ypow = 1, fact = 1, bound = 1;
            for (int m = 1; m < 60; ++m)
            {
                if (m > 1)
                {
                    ypow *= y;
                    dd = x * dd + ypow;
                    fact *= m;
                    bound *= r * h / (m - 1);
                }
                add(f, ci, m, p.coef * dd / fact);
                if (bound <= tail_eps)
                    break;
            }
        }
    }

    auto na = Eigen::Index(atoms.size());
    auto nf = Eigen::Index(funcs.size());
    if (na == 0)  // silent mode
        return Eigen::MatrixXd::Zero(nf, 0);
    std::vector<std::pair<double, int>> atom_info(static_cast<std::size_t>(na));
    for (auto const& [key, col] : atoms)
        atom_info[std::size_t(col)] = {clusters[key.first].center, key.second};

    Eigen::VectorXd scale(na);
    for (Eigen::Index a = 0; a < na; ++a)
    {
        auto [c, p] = atom_info[std::size_t(a)];
        scale[a] = std::sqrt(expint::moment(2 * p, 2 * c, h));
    }
    Eigen::MatrixXd gram = Eigen::MatrixXd::Identity(na, na);
    for (Eigen::Index a = 0; a < na; ++a)
        for (Eigen::Index b = 0; b < a; ++b)
        {
            if (scale[a] == 0 || scale[b] == 0)
                continue;
            auto [ca, pa] = atom_info[std::size_t(a)];
            auto [cb, pb] = atom_info[std::size_t(b)];
            gram(a, b) = gram(b, a) = expint::moment(pa + pb, ca + cb, h) / (scale[a] * scale[b]);
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXd atom_factor = eig.eigenvectors() * roots.asDiagonal();

    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(nf, na);
    for (Eigen::Index f = 0; f < nf; ++f)
        for (auto [a, v] : coefs[std::size_t(f)])
            c(f, a) += v * scale[a];
    Eigen::MatrixXd full = c * atom_factor;

    // Compress to at most nf columns: L = R^T Q^T with L L^T = R^T R.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(full.transpose());
    auto rank = std::min(nf, na);
    Eigen::MatrixXd r = qr.matrixQR().topRows(rank).triangularView<Eigen::Upper>();
    return r.transpose();
}
}  // namespace

NoiseRequest merge(NoiseRequest a, NoiseRequest const& b)
{
    a.time_integrals = std::max(a.time_integrals, b.time_integrals);
    a.plain_integrals = a.plain_integrals || b.plain_integrals;
    if (b.shift)
    {
        if (a.shift && *a.shift != *b.shift)
            fail(ErrorCode::InvalidArgument, "conflicting reference shifts");
        a.shift = b.shift;
    }
    return a;
}

double NoiseBundle::time_integral(Eigen::Index k, Eigen::Index j) const
{
    if (mode == TimeIntegralMode::Full)
        return integrals(k, j);
    if (mode == TimeIntegralMode::Diagonal && k == j)
        return integrals(j, 0);
    fail(ErrorCode::MissingTimeIntegrals,
         "time integral (" + std::to_string(k + 1) + "," + std::to_string(j + 1) + ") not sampled");
}

//---------------------------------------------------------------------------//

StepCovariance::StepCovariance(SpectralModel const& m, double h, NoiseRequest request)
    : h_(h), request_(std::move(request)), lambdas_(m.lambdas()), bs_(m.bs())
{
    if (!(h > 0))
        fail(ErrorCode::NonPositiveStep, "step size must be positive");
    Eigen::Index next = 2;
    if (request_.shift)
        shifted_ = next++;
    if (request_.plain_integrals)
        plain_ = next++;
    if (request_.time_integrals != TimeIntegralMode::None)
    {
        integrals_ = next;
        next += request_.time_integrals == TimeIntegralMode::Full ? Eigen::Index(dim()) : 1;
    }
    count_ = std::size_t(next);
    for (std::size_t j = 0; j < dim(); ++j)
    {
        decay_.push_back(expint::decay(lambdas_[j], h));
        factors_.push_back(build_factor(functional_pieces(lambdas_, bs_[j], j, request_), h));
    }
}

Eigen::MatrixXd StepCovariance::covariance(std::size_t j) const
{
    return factors_[j] * factors_[j].transpose();
}

std::vector<expint::Kernel> StepCovariance::kernels(std::size_t j) const
{
    std::vector<expint::Kernel> out;
    for (auto const& f : functional_pieces(lambdas_, bs_[j], j, request_))
    {
        expint::Kernel k;
        for (auto const& p : f)
        {
            auto part = p.two_rate ? expint::two_rate_kernel(p.outer, p.rate, h_)
                                   : expint::Kernel{{1.0, p.power, p.rate}};
            for (auto t : part)
            {
                t.coef *= p.coef;
                k.push_back(t);
            }
        }
        out.push_back(std::move(k));
    }
    return out;
}

Eigen::MatrixXd StepCovariance::closed_form(std::size_t j) const
{
    auto ks = kernels(j);
    auto n = Eigen::Index(ks.size());
    Eigen::MatrixXd c(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b <= a; ++b)
            c(a, b) = c(b, a) = expint::inner(ks[std::size_t(a)], ks[std::size_t(b)], h_);
    return c;
}

NoiseBundle sample_step(StepCovariance const& cov, NormalStream const& stream, std::uint32_t step,
                        Eigen::VectorXd const& carried)
{
    auto n = Eigen::Index(cov.dim());
    auto const& req = cov.request();
    NoiseBundle nb;
    nb.h = cov.h();
    nb.mode = req.time_integrals;
    nb.increments.resize(n);
    nb.conv.resize(n);
    if (req.shift)
        nb.shifted.resize(n);
    if (req.plain_integrals)
        nb.plain.resize(n);
    if (req.time_integrals == TimeIntegralMode::Full)
        nb.integrals.resize(n, n);
    else if (req.time_integrals == TimeIntegralMode::Diagonal)
        nb.integrals.resize(n, 1);
    nb.carried = carried.size() == n ? carried : Eigen::VectorXd::Zero(n);

    Eigen::VectorXd z, x;
    for (Eigen::Index j = 0; j < n; ++j)
    {
        auto const& l = cov.factor(std::size_t(j));
        z.resize(l.cols());
        stream.fill(step, std::uint32_t(j), {z.data(), std::size_t(z.size())});
        x.noalias() = l * z;
        nb.increments[j] = x[0];
        nb.conv[j] = x[cov.conv_index()];
        if (req.shift)
            nb.shifted[j] = x[cov.shifted_index()];
        if (req.plain_integrals)
            nb.plain[j] = x[cov.plain_index()];
        if (req.time_integrals == TimeIntegralMode::Full)
            nb.integrals.col(j) = x.segment(cov.integral_index(0), n);
        else if (req.time_integrals == TimeIntegralMode::Diagonal)
            nb.integrals(j, 0) = x[cov.integral_index(j)];
    }
    return nb;
}

Eigen::VectorXd advance_carried(StepCovariance const& cov, Eigen::VectorXd const& carried,
                                NoiseBundle const& nb)
{
    Eigen::VectorXd next = nb.conv;
    if (carried.size() == next.size())
    {
        for (Eigen::Index j = 0; j < next.size(); ++j)
            next[j] += cov.decay(std::size_t(j)) * carried[j];
    }
    return next;
}

//---------------------------------------------------------------------------//

AggregationWeights::AggregationWeights(SpectralModel const& m, double fine_h, NoiseRequest request)
    : h_(fine_h), request_(std::move(request))
{
    if (!(fine_h > 0))
        fail(ErrorCode::NonPositiveStep, "step size must be positive");
    auto n = Eigen::Index(m.dim());
    decay_.resize(n);
    phi_.resize(n);
    shifted_decay_.resize(n);
    for (Eigen::Index j = 0; j < n; ++j)
    {
        double l = m.lambda(std::size_t(j));
        decay_[j] = expint::decay(l, fine_h);
        phi_[j] = expint::phi1(l, fine_h);
        shifted_decay_[j] = request_.shift ? expint::decay(l - *request_.shift, fine_h) : 0.0;
    }
    if (request_.time_integrals == TimeIntegralMode::Full)
    {
        two_rate_.resize(n, n);
        for (Eigen::Index k = 0; k < n; ++k)
            for (Eigen::Index j = 0; j < n; ++j)
                two_rate_(k, j) = expint::two_rate(m.lambda(std::size_t(k)), m.lambda(std::size_t(j)), fine_h);
    }
    else if (request_.time_integrals == TimeIntegralMode::Diagonal)
    {
        two_rate_.resize(n, 1);
        for (Eigen::Index j = 0; j < n; ++j)
            two_rate_(j, 0) = expint::two_rate(m.lambda(std::size_t(j)), m.lambda(std::size_t(j)), fine_h);
    }
}

void Aggregator::absorb(NoiseBundle const& fine)
{
    if (count_++ == 0)
    {
        acc_ = fine;
        return;
    }
    auto const& w = *w_;
    auto const& x = acc_.conv;  // state before this fine step
    acc_.h += fine.h;
    acc_.increments += fine.increments;
    if (w.request_.time_integrals == TimeIntegralMode::Full)
    {
        // I_kj <- e^{-lk d} I_kj + K_kj(d) X_j + fine I_kj
        acc_.integrals = w.decay_.asDiagonal() * acc_.integrals;
        acc_.integrals += w.two_rate_ * x.asDiagonal();
        acc_.integrals += fine.integrals;
    }
    else if (w.request_.time_integrals == TimeIntegralMode::Diagonal)
    {
        acc_.integrals = w.decay_.cwiseProduct(acc_.integrals.col(0)) + w.two_rate_.col(0).cwiseProduct(x)
                         + fine.integrals.col(0);
    }
    if (w.request_.plain_integrals)
        acc_.plain += w.phi_.cwiseProduct(x) + fine.plain;
    if (w.request_.shift)
        acc_.shifted = w.shifted_decay_.cwiseProduct(acc_.shifted) + fine.shifted;
    acc_.conv = w.decay_.cwiseProduct(x) + fine.conv;
}

NoiseBundle Aggregator::take(Eigen::VectorXd carried)
{
    if (count_ == 0)
        fail(ErrorCode::InvalidArgument, "nothing aggregated");
    NoiseBundle out = std::move(acc_);
    out.carried = std::move(carried);
    acc_ = NoiseBundle{};
    count_ = 0;
    return out;
}

std::vector<NoiseBundle> coarsen(FineRecord const& record, AggregationWeights const& w,
                                 std::size_t factor)
{
    if (factor == 0 || record.steps.size() % factor != 0)
        fail(ErrorCode::InvalidArgument, "coarsening factor must divide the record length");
    std::vector<NoiseBundle> out;
    Aggregator agg(w);
    for (auto const& fine : record.steps)
    {
        agg.absorb(fine);
        if (agg.count() == factor)
            out.push_back(agg.take({}));
    }
    return out;
}

FineRecord sample_record(SpectralModel const& m, double h, std::size_t substeps,
                         NoiseRequest request, NormalStream const& stream, std::uint32_t first_step)
{
    if (substeps == 0)
        fail(ErrorCode::InvalidArgument, "substeps must be at least 1");
    FineRecord rec;
    rec.fine_h = h / double(substeps);
    StepCovariance cov(m, rec.fine_h, std::move(request));
    Eigen::VectorXd none;
    for (std::size_t i = 0; i < substeps; ++i)
        rec.steps.push_back(sample_step(cov, stream, first_step + std::uint32_t(i), none));
    return rec;
}

std::pair<NoiseBundle, FineRecord> aggregate_step(SpectralModel const& m, double h,
                                                  std::size_t substeps, TimeIntegralMode mode,
                                                  NormalStream const& stream, std::uint32_t step)
{
    auto rec = sample_record(m, h, substeps, {}, stream, step * std::uint32_t(substeps));
    double d = rec.fine_h;
    auto n = Eigen::Index(m.dim());
    Eigen::VectorXd decay(n), phi(n);
    for (Eigen::Index j = 0; j < n; ++j)
    {
        decay[j] = expint::decay(m.lambda(std::size_t(j)), d);
        phi[j] = expint::phi1(m.lambda(std::size_t(j)), d);
    }
    NoiseBundle out;
    out.h = h;
    out.mode = mode;
    out.increments = Eigen::VectorXd::Zero(n);
    out.conv = Eigen::VectorXd::Zero(n);
    out.plain = Eigen::VectorXd::Zero(n);
    out.carried = Eigen::VectorXd::Zero(n);
    if (mode == TimeIntegralMode::Full)
        out.integrals = Eigen::MatrixXd::Zero(n, n);
    else if (mode == TimeIntegralMode::Diagonal)
        out.integrals = Eigen::MatrixXd::Zero(n, 1);
    for (auto const& fine : rec.steps)
    {
        auto const& x = out.conv;  // left-endpoint value
        if (mode == TimeIntegralMode::Full)
            out.integrals = decay.asDiagonal() * out.integrals + phi * x.transpose();
        else if (mode == TimeIntegralMode::Diagonal)
            out.integrals.col(0) = decay.cwiseProduct(out.integrals.col(0)) + phi.cwiseProduct(x);
        out.plain += d * x;
        out.conv = decay.cwiseProduct(x) + fine.conv;
        out.increments += fine.increments;
    }
    return {std::move(out), std::move(rec)};
}
}  // namespace spdetaylor
