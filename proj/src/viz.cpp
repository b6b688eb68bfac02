#include "pt/viz.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pt/errors.hpp"

namespace pt {
namespace {

constexpr double kCell = 40.0;

std::string fmt(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << v;
  return out.str();
}

struct Frame {
  std::size_t rows;
  double px(double x) const { return x * kCell; }
  double py(double y) const { return (static_cast<double>(rows) - y) * kCell; }
};

std::string star_points(double cx, double cy, double outer, double inner) {
  std::ostringstream out;
  for (int i = 0; i < 10; ++i) {
    const double r = i % 2 == 0 ? outer : inner;
    const double a = -M_PI / 2 + i * M_PI / 5;
    out << (i ? " " : "") << fmt(cx + r * std::cos(a)) << ',' << fmt(cy + r * std::sin(a));
  }
  return out.str();
}

// Head-averaged [length, length] weights of one layer.
std::vector<double> layer_mean(const AttentionCapture& c, std::size_t layer, std::size_t b) {
  std::vector<double> out(c.length * c.length, 0.0);
  for (std::size_t h = 0; h < c.heads; ++h) {
    const auto m = c.matrix(layer, h, b);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += m[i];
  }
  for (double& v : out) v /= static_cast<double>(c.heads);
  return out;
}

int channel(double w) {
  const long v = std::lround(255.0 * w);
  return static_cast<int>(std::clamp(v, 0L, 255L));
}

char tag(Modality m) {
  switch (m) {
    case Modality::kGoal: return 'g';
    case Modality::kRtg: return 'r';
    case Modality::kState: return 's';
    case Modality::kPlan: return 'p';
    case Modality::kAction: return 'a';
  }
  return '?';
}

void check_capture(const AttentionCapture& c, std::span<const Modality> layout, std::size_t b) {
  if (c.weights.empty() || c.length == 0 || c.heads == 0) {
    throw ContractViolation("attention capture is empty");
  }
  if (b >= c.batch) throw ContractViolation("attention batch index out of range");
  if (layout.size() != c.length) {
    throw DimensionError("layout has " + std::to_string(layout.size()) +
                         " tokens, capture has " + std::to_string(c.length));
  }
}

}  // namespace

std::string render_plan_overlay(const RolloutRecord& rec, const MazeLayout& layout) {
  if (rec.state_dim < 2) throw ContractViolation("plan overlay needs 2-D states");
  if (!rec.plans.empty() &&
      (rec.plan_state_indices.size() < 2 || rec.plan_state_indices[0] != 0 ||
       rec.plan_state_indices[1] != 1)) {
    throw ContractViolation(
        "plan overlay needs (x, y) plan features; set plan_state_indices to [0, 1]");
  }
  const Frame f{layout.rows};
  const double w = layout.cols * kCell, h = layout.rows * kCell;
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w) << "\" height=\""
      << fmt(h) << "\" viewBox=\"0 0 " << fmt(w) << ' ' << fmt(h) << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << fmt(w) << "\" height=\"" << fmt(h)
      << "\" fill=\"white\"/>\n<g id=\"walls\">\n";
  for (std::size_t r = 0; r < layout.rows; ++r) {
    for (std::size_t c = 0; c < layout.cols; ++c) {
      if (!layout.is_wall(r, c)) continue;
      out << "<rect class=\"wall\" x=\"" << fmt(c * kCell) << "\" y=\"" << fmt(r * kCell)
          << "\" width=\"" << fmt(kCell) << "\" height=\"" << fmt(kCell)
          << "\" fill=\"#404040\"/>\n";
    }
  }
  out << "</g>\n";

  const std::size_t steps = rec.steps();
  const std::size_t sd = rec.state_dim;
  out << "<g id=\"path\" data-steps=\"" << steps << "\">\n";
  for (std::size_t t = 0; t < steps; ++t) {
    const double hue = steps > 1 ? 270.0 * t / (steps - 1) : 0.0;
    out << "<polyline class=\"path-segment\" points=\"" << fmt(f.px(rec.states[t * sd])) << ','
        << fmt(f.py(rec.states[t * sd + 1])) << ' ' << fmt(f.px(rec.states[(t + 1) * sd]))
        << ',' << fmt(f.py(rec.states[(t + 1) * sd + 1])) << "\" stroke=\"hsl(" << fmt(hue)
        << ",100%,45%)\" stroke-width=\"3\" fill=\"none\"/>\n";
  }
  out << "</g>\n<g id=\"plans\">\n";
  for (const auto& p : rec.plans) {
    out << "<g class=\"plan\" data-step=\"" << p.step << "\">\n<polyline class=\"plan-line\" points=\""
        << fmt(f.px(p.anchor[0])) << ',' << fmt(f.py(p.anchor[1]));
    for (const auto& q : p.points) out << ' ' << fmt(f.px(q[0])) << ',' << fmt(f.py(q[1]));
    out << "\" stroke=\"#1f77b4\" stroke-opacity=\"0.6\" stroke-width=\"1.5\" fill=\"none\"/>\n";
    for (const auto& q : p.points) {
      out << "<circle class=\"plan-point\" cx=\"" << fmt(f.px(q[0])) << "\" cy=\""
          << fmt(f.py(q[1])) << "\" r=\"2.5\" fill=\"#1f77b4\"/>\n";
    }
    out << "<circle class=\"plan-anchor\" cx=\"" << fmt(f.px(p.anchor[0])) << "\" cy=\""
        << fmt(f.py(p.anchor[1])) << "\" r=\"4\" fill=\"red\"/>\n</g>\n";
  }
  out << "</g>\n";
  const auto g = layout.center(layout.goal[0], layout.goal[1]);
  out << "<polygon id=\"goal\" class=\"goal-star\" points=\""
      << star_points(f.px(g[0]), f.py(g[1]), kCell * 0.35, kCell * 0.15)
      << "\" fill=\"gold\" stroke=\"black\" stroke-width=\"1\"/>\n</svg>\n";
  return out.str();
}

std::string render_attention(const AttentionCapture& c, std::span<const Modality> layout,
                             std::size_t b) {
  check_capture(c, layout, b);
  constexpr double cell = 12.0, margin = 20.0, gap = 16.0;
  const std::size_t L = c.length;
  const std::size_t panels = 1 + (c.layers > 3 ? c.layers - 3 : 0);
  const double panel = L * cell;
  const double w = margin + panels * panel + (panels - 1) * gap + 4;
  const double h = margin + panel + 4;

  std::vector<std::vector<double>> mean;
  for (std::size_t l = 0; l < c.layers; ++l) mean.push_back(layer_mean(c, l, b));

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w) << "\" height=\""
      << fmt(h) << "\" viewBox=\"0 0 " << fmt(w) << ' ' << fmt(h) << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << fmt(w) << "\" height=\"" << fmt(h)
      << "\" fill=\"white\"/>\n";
  for (std::size_t pnl = 0; pnl < panels; ++pnl) {
    const double x0 = margin + pnl * (panel + gap);
    out << "<g class=\"panel\" data-layers=\"";
    if (pnl == 0) {
      for (std::size_t l = 0; l < std::min<std::size_t>(3, c.layers); ++l) out << (l ? "," : "") << l;
    } else {
      out << pnl + 2;
    }
    out << "\">\n";
    for (std::size_t k = 0; k < L; ++k) {
      out << "<text class=\"col-label\" x=\"" << fmt(x0 + k * cell + cell / 2) << "\" y=\""
          << fmt(margin - 6) << "\" font-size=\"9\" text-anchor=\"middle\" data-modality=\""
          << to_string(layout[k]) << "\">" << tag(layout[k]) << "</text>\n";
    }
    for (std::size_t q = 0; q < L; ++q) {
      if (pnl == 0) {
        out << "<text class=\"row-label\" x=\"" << fmt(margin - 4) << "\" y=\""
            << fmt(margin + q * cell + cell * 0.75) << "\" font-size=\"9\" text-anchor=\"end\">"
            << tag(layout[q]) << "</text>\n";
      }
      for (std::size_t k = 0; k < L; ++k) {
        int rgb[3] = {0, 0, 0};
        if (pnl == 0) {
          for (std::size_t l = 0; l < std::min<std::size_t>(3, c.layers); ++l) {
            rgb[l] = channel(mean[l][q * L + k]);
          }
        } else {
          rgb[0] = rgb[1] = rgb[2] = channel(mean[pnl + 2][q * L + k]);
        }
        out << "<rect class=\"cell\" data-q=\"" << q << "\" data-k=\"" << k << "\" x=\""
            << fmt(x0 + k * cell) << "\" y=\"" << fmt(margin + q * cell) << "\" width=\""
            << fmt(cell) << "\" height=\"" << fmt(cell) << "\" fill=\"rgb(" << rgb[0] << ','
            << rgb[1] << ',' << rgb[2] << ")\"/>\n";
      }
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string attention_json(const AttentionCapture& c, std::span<const Modality> layout,
                           std::size_t b) {
  check_capture(c, layout, b);
  using nlohmann::json;
  const std::size_t L = c.length;
  json weights = json::array();
  std::vector<std::vector<double>> mean;
  for (std::size_t l = 0; l < c.layers; ++l) {
    mean.push_back(layer_mean(c, l, b));
    json rows = json::array();
    for (std::size_t q = 0; q < L; ++q) {
      rows.push_back(std::vector<double>(mean[l].begin() + q * L, mean[l].begin() + (q + 1) * L));
    }
    weights.push_back(std::move(rows));
  }
  json rgb = json::array();
  for (std::size_t q = 0; q < L; ++q) {
    json row = json::array();
    for (std::size_t k = 0; k < L; ++k) {
      int px[3] = {0, 0, 0};
      for (std::size_t l = 0; l < std::min<std::size_t>(3, c.layers); ++l) {
        px[l] = channel(mean[l][q * L + k]);
      }
      row.push_back({px[0], px[1], px[2]});
    }
    rgb.push_back(std::move(row));
  }
  json tags = json::array();
  for (Modality m : layout) tags.push_back(std::string(to_string(m)));
  json doc = {{"layers", c.layers}, {"heads", c.heads}, {"length", L},
              {"layout", tags},     {"weights", weights}, {"rgb", rgb}};
  return doc.dump();
}

}  // namespace pt
