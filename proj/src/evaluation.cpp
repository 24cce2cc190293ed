// spoofdet/evaluation.cpp
//
// Copyright 2026 The spoofdet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spoofdet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace spoofdet {

EvalResult ComputeEer(const std::vector<std::pair<double, Key>>& scored) {
  std::vector<double> bona, spoof;
  for (const auto& [score, key] : scored) {
    if (!std::isfinite(score)) throw NumericalError("non-finite trial score");
    (key == Key::kBonaFide ? bona : spoof).push_back(score);
  }
  if (bona.empty() || spoof.empty())
    throw DataError("EER needs at least one trial of each key");

  // Threshold set: midpoints between consecutive distinct scores, plus the
  // two infinities.
  std::vector<double> all;
  all.reserve(bona.size() + spoof.size());
  all.insert(all.end(), bona.begin(), bona.end());
  all.insert(all.end(), spoof.begin(), spoof.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  std::vector<double> thresholds;
  thresholds.push_back(-std::numeric_limits<double>::infinity());
  for (size_t i = 0; i + 1 < all.size(); ++i)
    thresholds.push_back(all[i] + (all[i + 1] - all[i]) / 2.0);
  thresholds.push_back(std::numeric_limits<double>::infinity());

  std::sort(bona.begin(), bona.end());
  std::sort(spoof.begin(), spoof.end());
  double nb = static_cast<double>(bona.size());
  double ns = static_cast<double>(spoof.size());
  auto far_at = [&](double t) {
    // fraction of spoof with score >= t
    auto it = std::lower_bound(spoof.begin(), spoof.end(), t);
    return static_cast<double>(spoof.end() - it) / ns;
  };
  auto frr_at = [&](double t) {
    // fraction of bona-fide with score < t
    auto it = std::lower_bound(bona.begin(), bona.end(), t);
    return static_cast<double>(it - bona.begin()) / nb;
  };

  EvalResult r;
  r.n_target = static_cast<int64_t>(bona.size());
  r.n_nontarget = static_cast<int64_t>(spoof.size());

  double prev_far = far_at(thresholds[0]);
  double prev_frr = frr_at(thresholds[0]);
  double prev_t = thresholds[0];
  for (size_t i = 1; i < thresholds.size(); ++i) {
    double far = far_at(thresholds[i]);
    double frr = frr_at(thresholds[i]);
    double d_prev = prev_far - prev_frr;
    double d_cur = far - frr;
    if (d_prev >= 0.0 && d_cur <= 0.0) {
      if (d_prev == d_cur) {  // both zero
        r.eer = prev_far;
        r.threshold = prev_t;
        return r;
      }
      double alpha = d_prev / (d_prev - d_cur);
      r.eer = prev_far + alpha * (far - prev_far);
      if (std::isfinite(prev_t) && std::isfinite(thresholds[i])) {
        r.threshold = prev_t + alpha * (thresholds[i] - prev_t);
      } else {
        r.threshold = std::isfinite(prev_t) ? prev_t : thresholds[i];
      }
      return r;
    }
    prev_far = far;
    prev_frr = frr;
    prev_t = thresholds[i];
  }
  // FAR - FRR goes from +1 at -inf to -1 at +inf, so a crossing always
  // exists; reaching here means no threshold was generated at all.
  throw NumericalError("no FAR/FRR crossing found");
}

void WriteScoreFile(const std::string& path, const std::vector<TrialScore>& scores) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write score file: " + path);
  f << std::fixed << std::setprecision(6);
  for (const auto& s : scores) f << s.utt_id << " " << s.score << "\n";
  if (!f) throw DataError("short write on score file: " + path);
}

std::vector<TrialScore> ReadScoreFile(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open score file: " + path);
  std::vector<TrialScore> out;
  std::string line;
  int line_number = 0;
  while (std::getline(f, line)) {
    ++line_number;
    if (Trim(line).empty()) continue;
    std::istringstream iss(line);
    TrialScore s;
    if (!(iss >> s.utt_id >> s.score))
      throw DataError("malformed score line " + std::to_string(line_number) +
                      " in " + path);
    out.push_back(std::move(s));
  }
  if (out.empty()) throw DataError("score file has no entries: " + path);
  return out;
}

void WriteEerSummary(const std::string& path, const EvalResult& r) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write EER summary: " + path);
  f << std::setprecision(10);
  f << "eer_percent = " << r.eer * 100.0 << "\n";
  f << "threshold = " << r.threshold << "\n";
  f << "n_bona_fide = " << r.n_target << "\n";
  f << "n_spoof = " << r.n_nontarget << "\n";
}

void WriteProbeReport(const std::string& path, const ProbeResult& r) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write probe report: " + path);
  f << std::setprecision(9);
  f << "step,loss\n";
  for (size_t i = 0; i < r.loss_curve.size(); ++i)
    f << i << "," << r.loss_curve[i] << "\n";
  f << "# category=" << CategoryName(r.category)
    << " n_classes=" << r.n_classes
    << " chance_level=" << r.chance_level
    << " heldout_accuracy=" << r.final_accuracy << "\n";
}

namespace {

struct CsvCurves {
  std::vector<double> step;
  std::vector<int> phase;
  // primary, subsidiary, ring, orth
  std::array<std::vector<double>, 4> series;
};

CsvCurves ReadLossCsv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open loss curve: " + path);
  CsvCurves c;
  std::string line;
  bool header = true;
  while (std::getline(f, line)) {
    if (Trim(line).empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::istringstream iss(line);
    std::string tok;
    std::vector<double> vals;
    while (std::getline(iss, tok, ',')) vals.push_back(std::stod(tok));
    if (vals.size() != 6) throw DataError("malformed loss row in " + path);
    c.step.push_back(vals[0]);
    c.phase.push_back(static_cast<int>(vals[1]));
    for (int k = 0; k < 4; ++k) c.series[static_cast<size_t>(k)].push_back(vals[static_cast<size_t>(k) + 2]);
  }
  if (c.step.empty()) throw DataError("loss curve has no rows: " + path);
  return c;
}

}  // namespace

void PlotCurvesSvg(const std::string& csv_path, const std::string& out_path) {
  CsvCurves c = ReadLossCsv(csv_path);
  const double W = 960, H = 360, ml = 60, mr = 160, mt = 20, mb = 40;
  const double pw = W - ml - mr, ph = H - mt - mb;

  double ymax = 0.0;
  for (const auto& s : c.series)
    for (double v : s) ymax = std::max(ymax, v);
  if (ymax <= 0.0) ymax = 1.0;
  ymax *= 1.05;
  double xmax = c.step.back() > 0 ? c.step.back() : 1.0;

  auto xpix = [&](double s) { return ml + pw * (s / xmax); };
  auto ypix = [&](double v) { return mt + ph * (1.0 - v / ymax); };

  std::ofstream f(out_path);
  if (!f) throw DataError("cannot write plot: " + out_path);
  f << std::setprecision(6);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
    << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  f << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";

  // Phase boundaries (adversarial runs).
  for (size_t i = 1; i < c.phase.size(); ++i) {
    if (c.phase[i] != c.phase[i - 1]) {
      double x = xpix(c.step[i]);
      f << "<line x1=\"" << x << "\" y1=\"" << mt << "\" x2=\"" << x
        << "\" y2=\"" << mt + ph
        << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4,3\"/>\n";
      f << "<text x=\"" << x + 3 << "\" y=\"" << mt + 12
        << "\" font-size=\"10\" fill=\"#888888\">phase " << c.phase[i]
        << "</text>\n";
    }
  }

  // Axes.
  f << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw
    << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
  f << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
    << mt + ph << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    double v = ymax * k / 4.0;
    f << "<text x=\"" << ml - 8 << "\" y=\"" << ypix(v) + 4
      << "\" font-size=\"11\" text-anchor=\"end\">" << std::fixed
      << std::setprecision(2) << v << "</text>\n"
      << std::defaultfloat << std::setprecision(6);
  }
  f << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 8
    << "\" font-size=\"12\" text-anchor=\"middle\">step</text>\n";
  f << "<text x=\"14\" y=\"" << mt + ph / 2
    << "\" font-size=\"12\" transform=\"rotate(-90 14 " << mt + ph / 2
    << ")\" text-anchor=\"middle\">loss</text>\n";

  const char* names[4] = {"primary", "subsidiary", "ring", "orthogonality"};
  const char* colors[4] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  for (int k = 0; k < 4; ++k) {
    const auto& s = c.series[static_cast<size_t>(k)];
    bool any = false;
    for (double v : s)
      if (v != 0.0) any = true;
    if (!any) continue;
    f << "<polyline fill=\"none\" stroke=\"" << colors[k]
      << "\" stroke-width=\"1.4\" points=\"";
    for (size_t i = 0; i < s.size(); ++i)
      f << xpix(c.step[i]) << "," << ypix(s[i]) << " ";
    f << "\"/>\n";
    f << "<text x=\"" << ml + pw + 10 << "\" y=\"" << mt + 16 + 18 * k
      << "\" font-size=\"12\" fill=\"" << colors[k] << "\">" << names[k]
      << "</text>\n";
  }
  f << "</svg>\n";
}

}  // namespace spoofdet
