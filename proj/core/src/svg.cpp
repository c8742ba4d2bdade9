#include "rsf/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "rsf/error.hpp"

namespace rsf::svg {

namespace {

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// Blue - white - red diverging map on [0, 1].
std::string colour(double s) {
    s = std::clamp(s, 0.0, 1.0);
    double r, g, b;
    if (s < 0.5) {
        const double a = s / 0.5;
        r = 0.23 + a * (0.97 - 0.23);
        g = 0.30 + a * (0.97 - 0.30);
        b = 0.75 + a * (0.97 - 0.75);
    } else {
        const double a = (s - 0.5) / 0.5;
        r = 0.97 + a * (0.71 - 0.97);
        g = 0.97 + a * (0.02 - 0.97);
        b = 0.97 + a * (0.15 - 0.97);
    }
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(r * 255), static_cast<int>(g * 255),
                  static_cast<int>(b * 255));
    return buf;
}

}  // namespace

std::string scatter(std::span<const double> truth, std::span<const double> pred, const std::string& title) {
    if (truth.size() != pred.size()) throw ConfigError("scatter plot needs equally many truths and predictions");
    const double W = 420, H = 420, m = 50;
    double lo = 0.0, hi = 1.0;
    if (!truth.empty()) {
        lo = std::min(*std::min_element(truth.begin(), truth.end()), *std::min_element(pred.begin(), pred.end()));
        hi = std::max(*std::max_element(truth.begin(), truth.end()), *std::max_element(pred.begin(), pred.end()));
    }
    if (!(hi > lo)) hi = lo + 1.0;
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    auto px = [&](double v) { return m + (v - lo) / (hi - lo) * (W - 2 * m); };
    auto py = [&](double v) { return H - m - (v - lo) / (hi - lo) * (H - 2 * m); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"13\">" << escape(title) << "</text>\n"
       << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << W - 2 * m << "\" height=\"" << H - 2 * m
       << "\" fill=\"none\" stroke=\"black\"/>\n"
       << "<line x1=\"" << px(lo) << "\" y1=\"" << py(lo) << "\" x2=\"" << px(hi) << "\" y2=\"" << py(hi)
       << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (std::isfinite(truth[i]) && std::isfinite(pred[i]))
            os << "<circle cx=\"" << fmt(px(truth[i])) << "\" cy=\"" << fmt(py(pred[i]))
               << "\" r=\"2\" fill=\"steelblue\" fill-opacity=\"0.7\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"11\">truth ["
       << fmt(lo) << ", " << fmt(hi) << "]</text>\n"
       << "<text x=\"14\" y=\"" << H / 2 << "\" font-size=\"11\" transform=\"rotate(-90 14 " << H / 2
       << ")\" text-anchor=\"middle\">prediction</text>\n"
       << "</svg>\n";
    return os.str();
}

std::string heatmap(const GridFunction& f, const std::string& title, std::optional<std::pair<double, double>> range,
                    int max_cells) {
    if (max_cells < 1) throw ConfigError("heat map needs at least one cell per axis");
    const int nt = f.nt(), nx = f.nx();
    const int bt = (nt + max_cells - 1) / max_cells, bx = (nx + max_cells - 1) / max_cells;
    const int ct = (nt + bt - 1) / bt, cx = (nx + bx - 1) / bx;
    std::vector<double> cells(static_cast<std::size_t>(ct) * cx, 0.0);
    for (int a = 0; a < ct; ++a)
        for (int b = 0; b < cx; ++b) {
            double s = 0.0;
            int c = 0;
            for (int k = a * bt; k < std::min(nt, (a + 1) * bt); ++k)
                for (int i = b * bx; i < std::min(nx, (b + 1) * bx); ++i, ++c) s += f(k, i);
            cells[static_cast<std::size_t>(a) * cx + b] = s / c;
        }
    double lo, hi;
    if (range) {
        std::tie(lo, hi) = *range;
    } else {
        lo = *std::min_element(cells.begin(), cells.end());
        hi = *std::max_element(cells.begin(), cells.end());
        // Symmetric scale around zero keeps the diverging map meaningful for signed fields.
        if (lo < 0.0 && hi > 0.0) {
            const double r = std::max(-lo, hi);
            lo = -r;
            hi = r;
        }
    }
    if (!(hi > lo)) hi = lo + 1.0;

    const double cw = 3.0, ch = 3.0, m = 40;
    const double W = 2 * m + cx * cw + 60, H = 2 * m + ct * ch;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">" << escape(title) << "</text>\n"
       << "<g shape-rendering=\"crispEdges\">\n";
    for (int a = 0; a < ct; ++a)
        for (int b = 0; b < cx; ++b)
            os << "<rect x=\"" << m + b * cw << "\" y=\"" << m + a * ch << "\" width=\"" << cw << "\" height=\"" << ch
               << "\" fill=\"" << colour((cells[static_cast<std::size_t>(a) * cx + b] - lo) / (hi - lo)) << "\"/>\n";
    os << "</g>\n";
    const double bxp = m + cx * cw + 15;
    for (int s = 0; s < 20; ++s)
        os << "<rect x=\"" << bxp << "\" y=\"" << m + s * (ct * ch / 20) << "\" width=\"12\" height=\""
           << ct * ch / 20 + 0.5 << "\" fill=\"" << colour(1.0 - (s + 0.5) / 20) << "\"/>\n";
    os << "<text x=\"" << bxp + 16 << "\" y=\"" << m + 8 << "\" font-size=\"10\">" << fmt(hi) << "</text>\n"
       << "<text x=\"" << bxp + 16 << "\" y=\"" << m + ct * ch << "\" font-size=\"10\">" << fmt(lo) << "</text>\n"
       << "<text x=\"" << m << "\" y=\"" << H - 12 << "\" font-size=\"11\">x: " << fmt(f.grid().x_min) << " .. "
       << fmt(f.grid().x_max) << ", t: " << fmt(f.grid().t0) << " (top) .. " << fmt(f.grid().T) << "</text>\n"
       << "</svg>\n";
    return os.str();
}

}  // namespace rsf::svg
