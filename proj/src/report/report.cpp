#include "stereocrawl/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "stereocrawl/csv.hpp"
#include "stereocrawl/error.hpp"

namespace stereocrawl {

namespace {

constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

std::string fmt2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s(buf);
    if (s == "-0.00") s = "0.00";
    return s;
}

/// Axis labels: three significant digits so small scores stay distinct.
std::string tick(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", std::fabs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

/// Value axis covering [lo, hi] with zero included.
struct Axis {
    double lo;
    double hi;
    double pixels;

    Axis(double min_v, double max_v, double length) : lo(std::min(0.0, min_v)), hi(std::max(0.0, max_v)), pixels(length) {
        if (hi - lo < 1e-12) hi = lo + 1.0;
    }
    double map(double v) const { return (v - lo) / (hi - lo) * pixels; }
};

class Svg {
public:
    Svg(double width, double height, std::string_view title) {
        out_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt2(width) + "\" height=\"" +
                fmt2(height) + "\" viewBox=\"0 0 " + fmt2(width) + " " + fmt2(height) +
                "\" font-family=\"sans-serif\" font-size=\"11\">\n";
        out_ += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        text(width / 2, 20, title, "middle", 14);
    }

    void rect(double x, double y, double w, double h, std::string_view fill, std::string_view tip = {}) {
        out_ += "<rect x=\"" + fmt2(x) + "\" y=\"" + fmt2(y) + "\" width=\"" + fmt2(w) + "\" height=\"" +
                fmt2(h) + "\" fill=\"" + std::string(fill) + "\"";
        if (tip.empty()) {
            out_ += "/>\n";
        } else {
            out_ += "><title>" + escape(tip) + "</title></rect>\n";
        }
    }

    void line(double x1, double y1, double x2, double y2, std::string_view stroke = "#333",
              double width = 1.0) {
        out_ += "<line x1=\"" + fmt2(x1) + "\" y1=\"" + fmt2(y1) + "\" x2=\"" + fmt2(x2) + "\" y2=\"" +
                fmt2(y2) + "\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"" + fmt2(width) +
                "\"/>\n";
    }

    void circle(double x, double y, double r, std::string_view fill, std::string_view tip) {
        out_ += "<circle cx=\"" + fmt2(x) + "\" cy=\"" + fmt2(y) + "\" r=\"" + fmt2(r) + "\" fill=\"" +
                std::string(fill) + "\"><title>" + escape(tip) + "</title></circle>\n";
    }

    void text(double x, double y, std::string_view s, std::string_view anchor = "start",
              int size = 11, double rotate = 0.0) {
        out_ += "<text x=\"" + fmt2(x) + "\" y=\"" + fmt2(y) + "\" text-anchor=\"" + std::string(anchor) +
                "\"";
        if (size != 11) out_ += " font-size=\"" + std::to_string(size) + "\"";
        if (rotate != 0.0) {
            out_ += " transform=\"rotate(" + fmt2(rotate) + " " + fmt2(x) + " " + fmt2(y) + ")\"";
        }
        out_ += ">" + escape(s) + "</text>\n";
    }

    std::string finish() {
        out_ += "</svg>\n";
        return std::move(out_);
    }

private:
    std::string out_;
};

constexpr double kLabelWidth = 170.0;
constexpr double kPlotWidth = 420.0;
constexpr double kRowHeight = 18.0;
constexpr double kTop = 40.0;

/// Vertical value axis ticks for horizontal bar layouts.
void value_ticks(Svg& svg, const Axis& axis, double x0, double y_top, double y_bottom) {
    for (int i = 0; i <= 4; ++i) {
        const double v = axis.lo + (axis.hi - axis.lo) * i / 4.0;
        const double x = x0 + axis.map(v);
        svg.line(x, y_top, x, y_bottom, "#ddd");
        svg.text(x, y_bottom + 14, tick(v), "middle");
    }
}

}  // namespace

std::string svg_bar_chart(std::string_view title, std::string_view value_label,
                          std::span<const BarDatum> bars) {
    double lo = 0.0;
    double hi = 0.0;
    for (const auto& b : bars) {
        lo = std::min(lo, b.value);
        hi = std::max(hi, b.value);
    }
    const Axis axis(lo, hi, kPlotWidth);
    const double plot_h = std::max<double>(1.0, static_cast<double>(bars.size())) * kRowHeight;
    Svg svg(kLabelWidth + kPlotWidth + 40, kTop + plot_h + 50, title);
    value_ticks(svg, axis, kLabelWidth, kTop, kTop + plot_h);
    const double zero_x = kLabelWidth + axis.map(0.0);
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const double y = kTop + static_cast<double>(i) * kRowHeight;
        const double x = kLabelWidth + axis.map(bars[i].value);
        svg.text(kLabelWidth - 6, y + kRowHeight * 0.7, bars[i].label, "end");
        svg.rect(std::min(x, zero_x), y + 2, std::fabs(x - zero_x), kRowHeight - 4,
                 bars[i].value < 0 ? kPalette[2] : kPalette[0],
                 bars[i].label + ": " + tick(bars[i].value));
    }
    svg.line(zero_x, kTop, zero_x, kTop + plot_h);
    svg.text(kLabelWidth + kPlotWidth / 2, kTop + plot_h + 34, value_label, "middle");
    return svg.finish();
}

std::string svg_box_chart(std::string_view title, std::string_view value_label,
                          std::span<const BoxDatum> boxes) {
    double hi = 0.0;
    for (const auto& b : boxes) hi = std::max(hi, b.q3);
    const Axis axis(0.0, std::max(hi, 1e-3), kPlotWidth);
    const double plot_h = std::max<double>(1.0, static_cast<double>(boxes.size())) * kRowHeight;
    Svg svg(kLabelWidth + kPlotWidth + 40, kTop + plot_h + 50, title);
    value_ticks(svg, axis, kLabelWidth, kTop, kTop + plot_h);
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const auto& b = boxes[i];
        const double y = kTop + static_cast<double>(i) * kRowHeight;
        svg.text(kLabelWidth - 6, y + kRowHeight * 0.7, b.label, "end");
        const double x1 = kLabelWidth + axis.map(b.q1);
        const double x3 = kLabelWidth + axis.map(b.q3);
        svg.rect(x1, y + 3, std::max(1.0, x3 - x1), kRowHeight - 6, kPalette[3],
                 b.label + ": q1 " + tick(b.q1) + ", median " + tick(b.median) + ", q3 " + tick(b.q3));
        const double xm = kLabelWidth + axis.map(b.median);
        svg.line(xm, y + 2, xm, y + kRowHeight - 2, "#000", 2.0);
    }
    svg.text(kLabelWidth + kPlotWidth / 2, kTop + plot_h + 34, value_label, "middle");
    return svg.finish();
}

std::string svg_scatter_chart(std::string_view title, std::string_view x_label,
                              std::string_view y_label, std::span<const ScatterDatum> points) {
    double x_lo = 0.0, x_hi = 0.0, y_lo = 0.0, y_hi = 0.0;
    for (const auto& p : points) {
        x_lo = std::min(x_lo, p.x);
        x_hi = std::max(x_hi, p.x);
        y_lo = std::min(y_lo, p.y);
        y_hi = std::max(y_hi, p.y);
    }
    constexpr double kSize = 360.0;
    constexpr double kLeft = 70.0;
    const Axis ax(x_lo, x_hi, kSize);
    const Axis ay(y_lo, y_hi, kSize);
    Svg svg(kLeft + kSize + 160, kTop + kSize + 60, title);
    const double bottom = kTop + kSize;
    for (int i = 0; i <= 4; ++i) {
        const double vx = ax.lo + (ax.hi - ax.lo) * i / 4.0;
        const double vy = ay.lo + (ay.hi - ay.lo) * i / 4.0;
        svg.line(kLeft + ax.map(vx), kTop, kLeft + ax.map(vx), bottom, "#ddd");
        svg.text(kLeft + ax.map(vx), bottom + 14, tick(vx), "middle");
        svg.line(kLeft, bottom - ay.map(vy), kLeft + kSize, bottom - ay.map(vy), "#ddd");
        svg.text(kLeft - 6, bottom - ay.map(vy) + 4, tick(vy), "end");
    }
    svg.line(kLeft + ax.map(0.0), kTop, kLeft + ax.map(0.0), bottom);
    svg.line(kLeft, bottom - ay.map(0.0), kLeft + kSize, bottom - ay.map(0.0));
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        const double x = kLeft + ax.map(p.x);
        const double y = bottom - ay.map(p.y);
        svg.circle(x, y, 4, kPalette[i % std::size(kPalette)],
                   p.label + " (" + tick(p.x) + ", " + tick(p.y) + ")");
        svg.text(x + 6, y + 4, p.label, "start", 9);
    }
    svg.text(kLeft + kSize / 2, bottom + 34, x_label, "middle");
    svg.text(18, kTop + kSize / 2, y_label, "middle", 11, -90.0);
    return svg.finish();
}

std::string svg_stacked_chart(std::string_view title, std::span<const TopicDistribution> rows) {
    const double plot_h = std::max<double>(1.0, static_cast<double>(rows.size())) * kRowHeight;
    Svg svg(kLabelWidth + kPlotWidth + 120, kTop + plot_h + 50, title);
    std::vector<int> topics;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double y = kTop + static_cast<double>(i) * kRowHeight;
        svg.text(kLabelWidth - 6, y + kRowHeight * 0.7, rows[i].subject, "end");
        double x = kLabelWidth;
        for (const auto& [topic, p] : rows[i].probabilities) {
            if (std::find(topics.begin(), topics.end(), topic) == topics.end()) topics.push_back(topic);
            const double w = p * kPlotWidth;
            if (w <= 0.0) continue;
            const auto colour = kPalette[static_cast<std::size_t>(std::max(topic, 0)) % std::size(kPalette)];
            svg.rect(x, y + 2, w, kRowHeight - 4, colour,
                     rows[i].subject + ", topic " + std::to_string(topic) + ": " + tick(p));
            x += w;
        }
    }
    std::sort(topics.begin(), topics.end());
    for (std::size_t k = 0; k < topics.size(); ++k) {
        const double y = kTop + static_cast<double>(k) * 14.0;
        const double x = kLabelWidth + kPlotWidth + 16;
        svg.rect(x, y, 10, 10, kPalette[static_cast<std::size_t>(std::max(topics[k], 0)) % std::size(kPalette)]);
        svg.text(x + 14, y + 9, "topic " + std::to_string(topics[k]));
    }
    svg.text(kLabelWidth + kPlotWidth / 2, kTop + plot_h + 34, "share of clustered triples", "middle");
    return svg.finish();
}

std::vector<TopicDistribution> parse_topic_distribution_csv(std::string_view text) {
    const auto rows = csv::parse(text);
    if (rows.empty() || rows.front() != std::vector<std::string>{"subject", "topic_id", "p_k"}) {
        throw Error(ErrorCode::InvalidConfig, "topic distribution CSV has an unexpected header");
    }
    std::vector<TopicDistribution> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 3) throw Error(ErrorCode::InvalidConfig, "topic distribution row " + std::to_string(r + 1) + " is malformed");
        if (out.empty() || out.back().subject != row[0]) out.push_back({row[0], {}});
        out.back().probabilities[static_cast<int>(csv::to_double(row[1]))] = csv::to_double(row[2]);
    }
    return out;
}

std::vector<SubjectEntropy> parse_entropy_csv(std::string_view text) {
    const auto rows = csv::parse(text);
    if (rows.empty() || rows.front() != std::vector<std::string>{"subject", "relative_entropy"}) {
        throw Error(ErrorCode::InvalidConfig, "entropy CSV has an unexpected header");
    }
    std::vector<SubjectEntropy> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != 2) throw Error(ErrorCode::InvalidConfig, "entropy row " + std::to_string(r + 1) + " is malformed");
        out.push_back({rows[r][0], csv::to_double(rows[r][1])});
    }
    return out;
}

std::string_view to_string(Figure f) {
    switch (f) {
        case Figure::Regard: return "regard";
        case Figure::Toxicity: return "toxicity";
        case Figure::Scatter: return "scatter";
        case Figure::Topics: return "topics";
        case Figure::Entropy: return "entropy";
    }
    return "?";
}

std::optional<Figure> figure_from_string(std::string_view name) {
    for (Figure f : {Figure::Regard, Figure::Toxicity, Figure::Scatter, Figure::Topics, Figure::Entropy}) {
        if (to_string(f) == name) return f;
    }
    return std::nullopt;
}

std::vector<ReportFile> build_report(const ReportInputs& in, std::span<const Figure> figures) {
    auto need = [](bool present, Figure f, std::string_view what) {
        if (!present) {
            throw Error(ErrorCode::EmptyInput,
                        "figure \"" + std::string(to_string(f)) + "\" needs " + std::string(what));
        }
    };
    const std::string prefix = in.title.empty() ? "" : in.title + ": ";
    std::vector<ReportFile> files;
    for (Figure f : figures) {
        switch (f) {
            case Figure::Regard: {
                need(in.harm.has_value(), f, "a harm CSV");
                std::vector<BarDatum> bars;
                std::string data = "subject,overall_regard\n";
                for (const auto& s : *in.harm) {
                    bars.push_back({s.subject, static_cast<double>(s.overall_regard)});
                    data += csv::field(s.subject) + ',' + std::to_string(s.overall_regard) + '\n';
                }
                files.push_back({"regard.csv", data});
                files.push_back({"regard.svg", svg_bar_chart(prefix + "overall regard", "N_positive - N_negative", bars)});
                break;
            }
            case Figure::Toxicity: {
                need(in.harm.has_value(), f, "a harm CSV");
                std::vector<BoxDatum> boxes;
                std::string data = "subject,tox_q1,tox_median,tox_q3\n";
                for (const auto& s : *in.harm) {
                    boxes.push_back({s.subject, s.toxicity_q1, s.toxicity_median, s.toxicity_q3});
                    data += csv::field(s.subject) + ',' + csv::number(s.toxicity_q1) + ',' +
                            csv::number(s.toxicity_median) + ',' + csv::number(s.toxicity_q3) + '\n';
                }
                files.push_back({"toxicity.csv", data});
                files.push_back({"toxicity.svg", svg_box_chart(prefix + "identity attack (IQR and median)", "identity attack score", boxes)});
                break;
            }
            case Figure::Scatter: {
                need(in.harm.has_value(), f, "a harm CSV");
                std::vector<ScatterDatum> points;
                std::string data = "subject,overall_regard,tox_mean\n";
                for (const auto& s : *in.harm) {
                    points.push_back({s.subject, static_cast<double>(s.overall_regard), s.toxicity_mean});
                    data += csv::field(s.subject) + ',' + std::to_string(s.overall_regard) + ',' +
                            csv::number(s.toxicity_mean) + '\n';
                }
                files.push_back({"scatter.csv", data});
                files.push_back({"scatter.svg", svg_scatter_chart(prefix + "overall regard vs identity attack", "overall regard", "mean identity attack score", points)});
                break;
            }
            case Figure::Topics: {
                need(in.distributions.has_value(), f, "a topic distribution CSV");
                std::string data = "subject,topic_id,p_k\n";
                for (const auto& d : *in.distributions) {
                    for (const auto& [t, p] : d.probabilities) {
                        data += csv::field(d.subject) + ',' + std::to_string(t) + ',' + csv::number(p) + '\n';
                    }
                }
                files.push_back({"topics.csv", data});
                files.push_back({"topics.svg", svg_stacked_chart(prefix + "topic distribution", *in.distributions)});
                break;
            }
            case Figure::Entropy: {
                need(in.entropies.has_value(), f, "an entropy CSV");
                std::vector<BarDatum> bars;
                std::string data = "subject,relative_entropy\n";
                for (const auto& e : *in.entropies) {
                    bars.push_back({e.subject, e.relative_entropy});
                    data += csv::field(e.subject) + ',' + csv::number(e.relative_entropy) + '\n';
                }
                files.push_back({"entropy.csv", data});
                files.push_back({"entropy.svg", svg_bar_chart(prefix + "relative entropy", "KL(p || q), nats", bars)});
                break;
            }
        }
    }
    return files;
}

}  // namespace stereocrawl
