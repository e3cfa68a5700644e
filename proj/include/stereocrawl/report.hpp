#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stereocrawl/harm.hpp"
#include "stereocrawl/topics.hpp"

namespace stereocrawl {

// Static SVG charts. Output depends only on the inputs: fixed layout, fixed
// palette, coordinates printed with two decimals.

struct BarDatum {
    std::string label;
    double value = 0.0;
};

std::string svg_bar_chart(std::string_view title, std::string_view value_label,
                          std::span<const BarDatum> bars);

struct BoxDatum {
    std::string label;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
};

std::string svg_box_chart(std::string_view title, std::string_view value_label,
                          std::span<const BoxDatum> boxes);

struct ScatterDatum {
    std::string label;
    double x = 0.0;
    double y = 0.0;
};

std::string svg_scatter_chart(std::string_view title, std::string_view x_label,
                              std::string_view y_label, std::span<const ScatterDatum> points);

/// One horizontal bar per distribution, split into topic segments.
std::string svg_stacked_chart(std::string_view title, std::span<const TopicDistribution> rows);

/// Reads the CSV written by topic_distribution_csv.
std::vector<TopicDistribution> parse_topic_distribution_csv(std::string_view csv);

/// Reads the CSV written by entropy_csv.
std::vector<SubjectEntropy> parse_entropy_csv(std::string_view csv);

enum class Figure { Regard, Toxicity, Scatter, Topics, Entropy };

std::string_view to_string(Figure f);
std::optional<Figure> figure_from_string(std::string_view name);

struct ReportInputs {
    std::string title;  // usually the protected class
    std::optional<std::vector<SubjectHarmSummary>> harm;
    std::optional<std::vector<TopicDistribution>> distributions;
    std::optional<std::vector<SubjectEntropy>> entropies;
};

struct ReportFile {
    std::string name;
    std::string contents;
};

/// Data CSV and SVG for each requested figure. Throws Error(EmptyInput) when
/// a figure's input is missing.
std::vector<ReportFile> build_report(const ReportInputs& inputs, std::span<const Figure> figures);

}  // namespace stereocrawl
