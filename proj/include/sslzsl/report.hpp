#pragma once

// Serialization of evaluation results: JSON report, per-class PR CSVs and a
// bare-bones SVG line plot.

#include <string>
#include <vector>

#include "json.hpp"
#include "sslzsl/eval.hpp"
#include "sslzsl/io.hpp"

namespace sslzsl {

inline nlohmann::json to_json(const EvalReport& r, bool include_curves = true) {
  nlohmann::json j;
  j["per_class_accuracy"] = r.per_class_accuracy;
  j["mean_accuracy"] = r.mean_accuracy;
  j["per_class_ap"] = r.per_class_ap;
  j["map"] = r.map;
  j["confusion"] = r.confusion;
  if (include_curves) {
    auto curves = nlohmann::json::array();
    for (const auto& curve : r.pr_curves) {
      auto pts = nlohmann::json::array();
      for (const auto& p : curve) pts.push_back({p.recall, p.precision});
      curves.push_back(std::move(pts));
    }
    j["pr_curves"] = std::move(curves);
  }
  return j;
}

inline EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport r;
  if (j.contains("per_class_accuracy")) {
    r.per_class_accuracy = j.at("per_class_accuracy").get<std::vector<double>>();
    r.mean_accuracy = j.at("mean_accuracy").get<double>();
    r.confusion = j.at("confusion").get<std::vector<std::vector<std::size_t>>>();
  }
  r.per_class_ap = j.at("per_class_ap").get<std::vector<double>>();
  r.map = j.at("map").get<double>();
  if (j.contains("pr_curves")) {
    for (const auto& curve : j.at("pr_curves")) {
      std::vector<PrPoint> pts;
      for (const auto& p : curve) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      r.pr_curves.push_back(std::move(pts));
    }
  }
  return r;
}

/// Unweighted mean, summed in index order (the order the report itself uses).
inline double unweighted_mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Header: rank,recall,precision
inline std::string pr_curve_csv(const std::vector<PrPoint>& curve) {
  std::string out = "rank,recall,precision\n";
  for (std::size_t k = 0; k < curve.size(); ++k) {
    out += std::to_string(k + 1) + "," + format_double(curve[k].recall) + "," +
           format_double(curve[k].precision) + "\n";
  }
  return out;
}

/// Precision against recall on a unit square, 400x400 px.
inline std::string pr_curve_svg(const std::vector<PrPoint>& curve, const std::string& title) {
  constexpr double size = 400.0;
  constexpr double pad = 40.0;
  auto x = [&](double recall) { return pad + recall * (size - 2 * pad); };
  auto y = [&](double precision) { return size - pad - precision * (size - 2 * pad); };

  std::string pts;
  for (const auto& p : curve) {
    pts += format_double(x(p.recall)) + "," + format_double(y(p.precision)) + " ";
  }
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"400\" "
         "viewBox=\"0 0 400 400\">\n";
  out += "<rect width=\"400\" height=\"400\" fill=\"white\"/>\n";
  out += "<line x1=\"40\" y1=\"360\" x2=\"360\" y2=\"360\" stroke=\"black\"/>\n";
  out += "<line x1=\"40\" y1=\"40\" x2=\"40\" y2=\"360\" stroke=\"black\"/>\n";
  out += "<text x=\"200\" y=\"390\" text-anchor=\"middle\" font-size=\"12\">recall</text>\n";
  out += "<text x=\"12\" y=\"200\" text-anchor=\"middle\" font-size=\"12\" "
         "transform=\"rotate(-90 12 200)\">precision</text>\n";
  out += "<text x=\"200\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" + title + "</text>\n";
  out += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
  out += "</svg>\n";
  return out;
}

/// Header: class,distance
inline std::string distances_csv(const std::vector<double>& distances) {
  std::string out = "class,distance\n";
  for (std::size_t c = 0; c < distances.size(); ++c) {
    out += std::to_string(c) + "," + format_double(distances[c]) + "\n";
  }
  return out;
}

}  // namespace sslzsl
