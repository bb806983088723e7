#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace inchsim {

// Minimal static line-plot writer; enough to render the model curves.
class SvgPlot {
public:
    SvgPlot(std::string title, std::string xlabel, std::string ylabel)
        : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

    void add_series(std::string name, std::vector<double> xs, std::vector<double> ys) {
        series_.push_back({std::move(name), std::move(xs), std::move(ys)});
    }

    void write(std::ostream& os) const {
        const double W = 720, H = 480, ml = 70, mr = 20, mt = 40, mb = 55;
        double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
        bool first = true;
        for (const auto& s : series_)
            for (size_t i = 0; i < s.xs.size(); ++i) {
                if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
                if (first) {
                    xmin = xmax = s.xs[i];
                    ymin = ymax = s.ys[i];
                    first = false;
                }
                xmin = std::min(xmin, s.xs[i]);
                xmax = std::max(xmax, s.xs[i]);
                ymin = std::min(ymin, s.ys[i]);
                ymax = std::max(ymax, s.ys[i]);
            }
        if (xmax - xmin < 1e-300) xmax = xmin + 1;
        if (ymax - ymin < 1e-300) ymax = ymin + 1;
        const double px = (W - ml - mr) / (xmax - xmin);
        const double py = (H - mt - mb) / (ymax - ymin);
        auto X = [&](double x) { return ml + (x - xmin) * px; };
        auto Y = [&](double y) { return H - mb - (y - ymin) * py; };
        static const char* colors[] = {"#1f6fb2", "#c23b22", "#2e8b57", "#8862b3", "#b8860b"};

        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
           << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
        os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr
           << "\" height=\"" << H - mt - mb << "\" fill=\"none\" stroke=\"#444\"/>\n";
        char buf[256];
        for (int i = 0; i <= 5; ++i) {
            const double xv = xmin + (xmax - xmin) * i / 5;
            const double yv = ymin + (ymax - ymin) * i / 5;
            std::snprintf(buf, sizeof buf,
                          "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" text-anchor=\"middle\">%g</text>\n",
                          X(xv), H - mb + 16, xv);
            os << buf;
            std::snprintf(buf, sizeof buf,
                          "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" text-anchor=\"end\">%g</text>\n",
                          ml - 6, Y(yv) + 4, yv);
            os << buf;
        }
        int ci = 0;
        for (const auto& s : series_) {
            os << "<polyline fill=\"none\" stroke=\"" << colors[ci % 5]
               << "\" stroke-width=\"1.6\" points=\"";
            for (size_t i = 0; i < s.xs.size(); ++i) {
                if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
                std::snprintf(buf, sizeof buf, "%.2f,%.2f ", X(s.xs[i]), Y(s.ys[i]));
                os << buf;
            }
            os << "\"/>\n";
            std::snprintf(buf, sizeof buf,
                          "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" fill=\"%s\">%s</text>\n",
                          ml + 10.0, mt + 16.0 + 15.0 * ci, colors[ci % 5], s.name.c_str());
            os << buf;
            ++ci;
        }
        os << "<text x=\"" << W / 2 << "\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">"
           << title_ << "</text>\n";
        os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
           << "\" font-size=\"12\" text-anchor=\"middle\">" << xlabel_ << "</text>\n";
        os << "<text x=\"16\" y=\"" << H / 2
           << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << H / 2
           << ")\">" << ylabel_ << "</text>\n";
        os << "</svg>\n";
    }

private:
    struct Series {
        std::string name;
        std::vector<double> xs, ys;
    };
    std::string title_, xlabel_, ylabel_;
    std::vector<Series> series_;
};

}  // namespace inchsim
