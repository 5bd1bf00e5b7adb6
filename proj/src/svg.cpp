#include "fuse/svg.hpp"

#include "csv.hpp"
#include "fuse/ena.hpp"
#include "fuse/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fuse::svg {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string num(double v) { return csv::format_double(std::round(v * 100.0) / 100.0); }

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

void write_profiles(const std::filesystem::path& path, const LcaModel& model, double threshold) {
    const auto profiles = binary_profiles(model, threshold);
    const std::size_t n_items = model.n_items();
    const std::size_t n_classes = profiles.size();
    if (n_items == 0 || n_classes == 0) raise(ErrorCode::InvalidConfig, "empty model");

    const int cols = n_classes > 1 ? 2 : 1;
    const int rows = static_cast<int>((n_classes + static_cast<std::size_t>(cols) - 1) /
                                      static_cast<std::size_t>(cols));
    const double panel_w = 420.0, panel_h = 150.0, margin = 50.0, label_h = 110.0;
    const double width = margin + cols * (panel_w + margin);
    const double height = margin + rows * (panel_h + label_h + margin);
    const double step = panel_w / static_cast<double>(n_items - 1 + (n_items == 1));

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
        << num(height) << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (std::size_t k = 0; k < n_classes; ++k) {
        const double x0 = margin + static_cast<double>(k % static_cast<std::size_t>(cols)) *
                                       (panel_w + margin);
        const double y0 = margin + static_cast<double>(k / static_cast<std::size_t>(cols)) *
                                       (panel_h + label_h + margin);

        out << "<text x=\"" << num(x0) << "\" y=\"" << num(y0 - 12) << "\" font-family=\"sans-serif\""
            << " font-size=\"14\" font-weight=\"bold\">class " << (k + 1) << " (weight "
            << num(model.weights[k]) << ")</text>\n";
        // axis lines and 0/1 guides
        out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x0 + panel_w)
            << "\" y2=\"" << num(y0) << "\" stroke=\"#dddddd\"/>\n";
        out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0 + panel_h) << "\" x2=\""
            << num(x0 + panel_w) << "\" y2=\"" << num(y0 + panel_h) << "\" stroke=\"#888888\"/>\n";
        out << "<text x=\"" << num(x0 - 14) << "\" y=\"" << num(y0 + 5)
            << "\" font-family=\"sans-serif\" font-size=\"11\">1</text>\n";
        out << "<text x=\"" << num(x0 - 14) << "\" y=\"" << num(y0 + panel_h + 5)
            << "\" font-family=\"sans-serif\" font-size=\"11\">0</text>\n";

        // item probabilities as faint dots, binarized profile as the line
        for (std::size_t j = 0; j < n_items; ++j) {
            const double x = x0 + static_cast<double>(j) * step;
            const double y = y0 + panel_h - model.item_probs[k][j] * panel_h;
            out << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y)
                << "\" r=\"2.5\" fill=\"#b0c4de\"/>\n";
        }
        out << "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"2\" points=\"";
        for (std::size_t j = 0; j < n_items; ++j) {
            const double x = x0 + static_cast<double>(j) * step;
            const double y = y0 + panel_h - static_cast<double>(profiles[k][j]) * panel_h;
            out << num(x) << "," << num(y) << " ";
        }
        out << "\"/>\n";
        for (std::size_t j = 0; j < n_items; ++j) {
            const double x = x0 + static_cast<double>(j) * step;
            out << "<text x=\"" << num(x) << "\" y=\"" << num(y0 + panel_h + 10)
                << "\" font-family=\"sans-serif\" font-size=\"9\" transform=\"rotate(60 " << num(x)
                << " " << num(y0 + panel_h + 10) << ")\">" << escape(model.code_names[j])
                << "</text>\n";
        }
    }
    out << "</svg>\n";

    std::ofstream file(path, std::ios::binary);
    if (!file) raise(ErrorCode::IoFailure, "cannot write " + path.string());
    file << out.str();
}

void write_network(const std::filesystem::path& path, const std::vector<std::string>& codes,
                   const std::vector<double>& edges, const std::string& positive_label,
                   const std::string& negative_label, double min_abs_weight) {
    const std::size_t n = codes.size();
    if (ena::pair_count(n) != edges.size()) {
        raise(ErrorCode::DimensionMismatch, "edge vector does not match code count");
    }
    const double size = 640.0, cx = size / 2.0, cy = size / 2.0 + 10.0, radius = 230.0;

    double max_abs = 0.0;
    for (double w : edges) max_abs = std::max(max_abs, std::abs(w));
    if (max_abs == 0.0) max_abs = 1.0;

    auto node_x = [&](std::size_t i) {
        return cx + radius * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n) -
                                      kPi / 2.0);
    };
    auto node_y = [&](std::size_t i) {
        return cy + radius * std::sin(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n) -
                                      kPi / 2.0);
    };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(size) << "\" height=\""
        << num(size + 40) << "\" viewBox=\"0 0 " << num(size) << " " << num(size + 40) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"20\" y=\"24\" font-family=\"sans-serif\" font-size=\"13\">"
        << "<tspan fill=\"#c0392b\">&#9632;</tspan> " << escape(positive_label)
        << "   <tspan fill=\"#2471a3\">&#9632;</tspan> " << escape(negative_label)
        << "</text>\n";

    for (std::size_t d = 0; d < edges.size(); ++d) {
        const double w = edges[d];
        if (std::abs(w) < min_abs_weight || w == 0.0) continue;
        const auto [i, j] = ena::pair_codes(d, n);
        const double stroke = 0.5 + 5.5 * std::abs(w) / max_abs;
        out << "<line x1=\"" << num(node_x(i)) << "\" y1=\"" << num(node_y(i)) << "\" x2=\""
            << num(node_x(j)) << "\" y2=\"" << num(node_y(j)) << "\" stroke=\""
            << (w > 0 ? "#c0392b" : "#2471a3") << "\" stroke-width=\"" << num(stroke)
            << "\" stroke-opacity=\"0.75\"/>\n";
    }
    for (std::size_t i = 0; i < n; ++i) {
        out << "<circle cx=\"" << num(node_x(i)) << "\" cy=\"" << num(node_y(i))
            << "\" r=\"4\" fill=\"#333333\"/>\n";
        const bool left = node_x(i) < cx;
        const double lx = node_x(i) + (left ? -8.0 : 8.0);
        out << "<text x=\"" << num(lx) << "\" y=\"" << num(node_y(i) + 4)
            << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\""
            << (left ? "end" : "start") << "\">" << escape(codes[i]) << "</text>\n";
    }
    out << "</svg>\n";

    std::ofstream file(path, std::ios::binary);
    if (!file) raise(ErrorCode::IoFailure, "cannot write " + path.string());
    file << out.str();
}

}  // namespace fuse::svg
