#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spdetaylor/error.hpp"
#include "spdetaylor/harness.hpp"

namespace spdetaylor
{
namespace
{
std::string num(double x, int digits = 17)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

std::string fixed(double x, int decimals = 3)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
    return buf;
}

std::string xml_escape(std::string_view s)
{
    std::string out;
    for (char c : s)
    {
        switch (c)
        {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

void write_file(std::filesystem::path const& path, std::string const& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    out << text;
    if (!out)
        fail(ErrorCode::Io, "write failed for " + path.string());
}

struct Window
{
    char const* scheme;
    double lo, hi;
};

ErrorReport const* find(std::vector<ErrorReport> const& reports, std::string_view name)
{
    for (auto const& r : reports)
    {
        if (r.consumer == name)
            return &r;
    }
    return nullptr;
}
}  // namespace

std::vector<SlopeCheck> acceptance_checks(SpectralModel const& m,
                                          std::vector<ErrorReport> const& reports)
{
    std::vector<SlopeCheck> out;
    if (!m.nonlinearity().is_constant_linear() || reports.empty())
        return out;
    auto mode = reports.front().mode;
    std::vector<Window> windows;
    if (mode == ExperimentMode::Local && m.family() == ModelFamily::Trace3D)
        windows = {{"exp_euler", 1.35, 1.55}, {"taylor_w3", 1.80, 2.05}};
    if (mode == ExperimentMode::Local && m.family() == ModelFamily::Heat1D)
        windows = {{"exp_euler", 1.10, 1.30}};
    for (auto const& w : windows)
    {
        if (auto const* r = find(reports, w.scheme))
        {
            double s = r->fit.slope;
            out.push_back({std::string(w.scheme) + " local slope",
                           s >= w.lo && s <= w.hi,
                           "slope " + fixed(s) + " in [" + fixed(w.lo, 2) + ", " + fixed(w.hi, 2) + "]"});
        }
    }
    if (mode == ExperimentMode::Global && m.family() == ModelFamily::Heat1D)
    {
        auto const* a = find(reports, "exp_euler");
        auto const* b = find(reports, "implicit_euler");
        if (a && b)
        {
            double gap = a->fit.slope - b->fit.slope;
            out.push_back({"exp_euler minus implicit_euler global slope", gap >= 0.3,
                           "gap " + fixed(gap) + " >= 0.30"});
        }
    }
    return out;
}

std::string csv_text(ErrorReport const& r)
{
    std::ostringstream os;
    os << "level,M,h,error,stderr,paths,seed\n";
    for (std::size_t l = 0; l < r.levels.size(); ++l)
    {
        auto const& s = r.levels[l];
        os << l << ',' << s.steps << ',' << num(s.h) << ',' << num(s.error) << ','
           << num(s.std_error) << ',' << s.paths << ',' << r.seed << '\n';
    }
    return os.str();
}

std::string summary_text(ExperimentResult const& result, std::vector<SlopeCheck> const& checks)
{
    std::ostringstream os;
    if (result.reports.empty())
        return "no reports\n";
    auto const& head = result.reports.front();
    os << "model: " << head.model << '\n'
       << "mode: " << to_string(head.mode) << '\n'
       << "seed: " << head.seed << '\n'
       << "config hash: " << (head.config_hash.empty() ? "-" : head.config_hash) << '\n'
       << "reference: " << result.reference << '\n'
       << "paths: " << (head.levels.empty() ? 0 : head.levels.front().paths) << '\n';
    if (!result.increment_hashes.empty())
    {
        os << "increment stream hashes:\n";
        for (auto const& [name, hash] : result.increment_hashes)
            os << "  " << name << ": " << hash << '\n';
        os << "coupling: " << (result.coupled() ? "identical increments" : "MISMATCH") << '\n';
    }
    for (auto const& r : result.reports)
    {
        os << "\n[" << r.consumer << "]\n";
        os << "  M        h             error         stderr\n";
        for (auto const& s : r.levels)
        {
            char line[160];
            std::snprintf(line, sizeof line, "  %-8zu %-13.6e %-13.6e %.3e\n", s.steps, s.h, s.error,
                          s.std_error);
            os << line;
        }
        os << "  slope: " << fixed(r.fit.slope) << " (95% CI " << fixed(r.fit.ci_low) << " .. "
           << fixed(r.fit.ci_high) << ")\n";
        os << "  half-ladder slopes: " << fixed(r.first_half_slope) << " / "
           << fixed(r.second_half_slope);
        bool stable = std::fabs(r.first_half_slope - r.second_half_slope) < 0.2;
        os << (stable ? " (stable)\n" : " (differ by >= 0.2, pre-asymptotic)\n");
        os << "  monotone refinement: " << (r.monotone ? "yes" : "no") << '\n';
        if (r.theoretical_order)
            os << "  theoretical order: " << fixed(*r.theoretical_order) << " (supremum)\n";
        std::string verdict;
        for (auto const& c : checks)
        {
            if (c.name.rfind(r.consumer + " ", 0) == 0)
                verdict = std::string(c.pass ? "PASS" : "FAIL") + ": " + c.detail;
        }
        if (verdict.empty())
        {
            if (!std::isfinite(r.fit.slope))
                verdict = "no slope (zero error at some level)";
            else if (r.theoretical_order)
                verdict = r.fit.slope >= *r.theoretical_order - 0.15 ? "consistent with theory"
                                                                    : "below theory";
            else
                verdict = "reported";
        }
        os << "  verdict: " << verdict << '\n';
    }
    if (!checks.empty())
    {
        os << "\nacceptance checks:\n";
        for (auto const& c : checks)
            os << "  " << (c.pass ? "PASS" : "FAIL") << "  " << c.name << ": " << c.detail << '\n';
    }
    return os.str();
}

std::string svg_plot(ErrorReport const& r)
{
    constexpr double width = 640, height = 480, left = 80, right = 30, top = 40, bottom = 60;
    std::vector<std::pair<double, double>> pts;
    for (auto const& s : r.levels)
    {
        if (s.error > 0)
            pts.emplace_back(std::log10(s.h), std::log10(s.error));
    }
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (!pts.empty())
    {
        x0 = x1 = pts.front().first;
        y0 = y1 = pts.front().second;
        for (auto [x, y] : pts)
        {
            x0 = std::min(x0, x), x1 = std::max(x1, x);
            y0 = std::min(y0, y), y1 = std::max(y1, y);
        }
    }
    x0 = std::floor(x0 * 2) / 2, x1 = std::ceil(x1 * 2) / 2;
    y0 = std::floor(y0 * 2) / 2, y1 = std::ceil(y1 * 2) / 2;
    if (x1 <= x0)
        x1 = x0 + 1;
    if (y1 <= y0)
        y1 = y0 + 1;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (width - left - right); };
    auto py = [&](double y) { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); };

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
       << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
       << "\" fill=\"white\"/>\n"
       << "<desc>seed " << r.seed << "</desc>\n"
       << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"16\">"
       << xml_escape(r.model + " " + to_string(r.mode) + " error: " + r.consumer) << "</text>\n";
    os << "<g stroke=\"#888\" stroke-width=\"1\">\n"
       << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right
       << "\" y2=\"" << height - bottom << "\"/>\n"
       << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
       << height - bottom << "\"/>\n</g>\n";
    os << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (double x = x0; x <= x1 + 1e-9; x += 0.5)
    {
        os << "<text x=\"" << fixed(px(x), 1) << "\" y=\"" << height - bottom + 16
           << "\" text-anchor=\"middle\">1e" << fixed(x, 1) << "</text>\n";
    }
    for (double y = y0; y <= y1 + 1e-9; y += 0.5)
    {
        os << "<text x=\"" << left - 6 << "\" y=\"" << fixed(py(y) + 4, 1)
           << "\" text-anchor=\"end\">1e" << fixed(y, 1) << "</text>\n";
    }
    os << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 16
       << "\" text-anchor=\"middle\">step size h</text>\n"
       << "<text x=\"18\" y=\"" << (top + height - bottom) / 2 << "\" text-anchor=\"middle\" "
       << "transform=\"rotate(-90 18 " << (top + height - bottom) / 2 << ")\">strong L2 error</text>\n"
       << "</g>\n";
    os << "<g fill=\"#1f77b4\">\n";
    for (auto [x, y] : pts)
        os << "<circle cx=\"" << fixed(px(x), 2) << "\" cy=\"" << fixed(py(y), 2) << "\" r=\"4\"/>\n";
    os << "</g>\n";
    if (std::isfinite(r.fit.slope) && !pts.empty())
    {
        double xbar = 0, ybar = 0;
        for (auto [x, y] : pts)
            xbar += x, ybar += y;
        xbar /= double(pts.size());
        ybar /= double(pts.size());
        double xa = pts.front().first, xb = pts.back().first;
        double ya = ybar + r.fit.slope * (xa - xbar), yb = ybar + r.fit.slope * (xb - xbar);
        os << "<line x1=\"" << fixed(px(xa), 2) << "\" y1=\"" << fixed(py(ya), 2) << "\" x2=\""
           << fixed(px(xb), 2) << "\" y2=\"" << fixed(py(yb), 2)
           << "\" stroke=\"#d62728\" stroke-width=\"1.5\"/>\n"
           << "<text x=\"" << width - right - 4 << "\" y=\"" << top + 16
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">slope "
           << fixed(r.fit.slope) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void emit(ExperimentResult const& result, std::vector<SlopeCheck> const& checks,
          std::filesystem::path const& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        fail(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
    for (auto const& r : result.reports)
    {
        std::string stem = std::string(to_string(r.mode)) + "_" + r.consumer;
        write_file(dir / (stem + ".csv"), csv_text(r));
        write_file(dir / (stem + ".svg"), svg_plot(r));
    }
    write_file(dir / "summary.txt", summary_text(result, checks));
}
}  // namespace spdetaylor
