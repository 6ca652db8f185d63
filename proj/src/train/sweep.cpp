#include "pmnet/train/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "pmnet/eval/predictors.hpp"

namespace pmnet::train {

std::vector<SweepRow> data_fraction_sweep(const model::PmnetConfig& model_cfg, const std::vector<SweepOption>& options,
                                          const dataset::SampleSet& train_set, const dataset::SampleSet& val_set,
                                          const std::vector<double>& fractions, const TrainConfig& cfg,
                                          const std::vector<std::uint64_t>& seeds,
                                          const std::vector<double>& thresholds, const ProgressFn& progress) {
  if (options.empty() || fractions.empty() || seeds.empty())
    throw std::invalid_argument("data_fraction_sweep: options, fractions and seeds must be nonempty");
  std::vector<SweepRow> rows;
  for (const auto& opt : options)
    for (double f : fractions)
      for (auto seed : seeds) {
        auto mcfg = model_cfg;
        mcfg.init_seed = seed;
        model::PmnetModel model(mcfg);
        auto tcfg = cfg;
        tcfg.seed = seed;
        const auto run = finetune(model, opt.pretrained, train_set, val_set, f, tcfg);
        SweepRow row;
        row.label = opt.label;
        row.fraction = f;
        row.seed = seed;
        row.n_train = dataset::subsample(train_set, f, seed).samples.size();
        row.report = eval::evaluate(eval::model_predictor(model), val_set.samples, opt.label, "val");
        row.report.per_sample.clear();
        row.steps = run.steps;
        row.steps_to = steps_to_threshold(run, thresholds);
        if (progress) {
          std::ostringstream os;
          os << opt.label << " fraction " << f << " seed " << seed << " n_train " << row.n_train << " rmse "
             << row.report.rmse;
          progress(os.str());
        }
        rows.push_back(std::move(row));
      }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::set<double> ts;
  for (const auto& r : rows)
    for (const auto& [t, _] : r.steps_to) ts.insert(t);
  std::ostringstream os;
  os.precision(10);
  os << "label,fraction,seed,n_train,rmse,roi_err,chan_err_db,steps";
  for (double t : ts) os << ",steps_to_" << t;
  os << "\n";
  for (const auto& r : rows) {
    os << r.label << ',' << r.fraction << ',' << r.seed << ',' << r.n_train << ',' << r.report.rmse << ','
       << r.report.roi_err << ',' << r.report.chan_err_db << ',' << r.steps;
    for (double t : ts) {
      os << ',';
      const auto it = r.steps_to.find(t);
      if (it != r.steps_to.end() && it->second) os << *it->second;
    }
    os << "\n";
  }
  return os.str();
}

std::string sweep_svg(const std::vector<SweepRow>& rows) {
  // label -> fraction -> (sum, count)
  std::map<std::string, std::map<double, std::pair<double, int>>> series;
  double ymax = 0.0;
  for (const auto& r : rows) {
    auto& cell = series[r.label][r.fraction];
    cell.first += r.report.rmse;
    ++cell.second;
  }
  for (const auto& [_, pts] : series)
    for (const auto& [f, c] : pts) ymax = std::max(ymax, c.first / c.second);
  if (!(ymax > 0.0)) ymax = 1.0;

  constexpr int W = 480, H = 320, L = 60, R = 140, T = 20, B = 40;
  auto px = [&](double f) { return L + f * (W - L - R); };
  auto py = [&](double v) { return H - B - v / ymax * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double f = i / 4.0, v = ymax * i / 4.0;
    os << "<text x=\"" << px(f) << "\" y=\"" << H - B + 16 << "\" font-size=\"11\" text-anchor=\"middle\">" << f
       << "</text>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << py(v) + 4 << "\" font-size=\"11\" text-anchor=\"end\">" << v
       << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 6
     << "\" font-size=\"12\" text-anchor=\"middle\">training fraction</text>\n";
  os << "<text x=\"14\" y=\"" << (T + H - B) / 2 << "\" font-size=\"12\" transform=\"rotate(-90 14 " << (T + H - B) / 2
     << ")\" text-anchor=\"middle\">val RMSE</text>\n";
  int k = 0;
  for (const auto& [label, pts] : series) {
    const char* c = colors[k % 5];
    os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"2\" points=\"";
    for (const auto& [f, s] : pts) os << px(f) << ',' << py(s.first / s.second) << ' ';
    os << "\"/>\n";
    for (const auto& [f, s] : pts)
      os << "<circle cx=\"" << px(f) << "\" cy=\"" << py(s.first / s.second) << "\" r=\"3\" fill=\"" << c << "\"/>\n";
    os << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (k + 1) << "\" font-size=\"12\" fill=\"" << c << "\">"
       << label << "</text>\n";
    ++k;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace pmnet::train
