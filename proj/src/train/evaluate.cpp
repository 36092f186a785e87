#include "surmr/train/evaluate.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "surmr/error.hpp"
#include "surmr/io/csv.hpp"

namespace surmr::train {

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

double SplitMetrics::combined(bool sur, bool smr) const {
  double v = 0.0;
  if (sur && mae_sur) v += *mae_sur;
  if (smr && mae_smr) v += *mae_smr;
  return v;
}

SplitMetrics summarize(std::vector<ItemPrediction> predictions, const std::string& split_name) {
  if (predictions.empty()) throw Error("cannot evaluate empty split '" + split_name + "'");
  SplitMetrics m;
  m.split = split_name;
  m.count = predictions.size();
  CompensatedSum sur, smr;
  std::size_t n_sur = 0, n_smr = 0;
  for (const auto& p : predictions) {
    if (p.target.sur) {
      sur.add(std::abs(p.pred.sur - *p.target.sur));
      ++n_sur;
    }
    if (p.target.smr) {
      smr.add(std::abs(p.pred.smr - *p.target.smr));
      ++n_smr;
    }
  }
  if (n_sur) m.mae_sur = sur.value() / static_cast<double>(n_sur);
  if (n_smr) m.mae_smr = smr.value() / static_cast<double>(n_smr);
  m.predictions = std::move(predictions);
  return m;
}

SplitMetrics evaluate(const model::Network& net, const Dataset& data, const std::string& split_name) {
  if (data.empty()) throw Error("cannot evaluate empty split '" + split_name + "'");
  std::vector<ItemPrediction> preds;
  preds.reserve(data.size());
  for (const auto& it : data.items) {
    preds.push_back({it.ladder_id, it.rung_index, net.predict(*it.original, *it.compressed), it.target});
  }
  return summarize(std::move(preds), split_name);
}

const SplitMetrics* MetricsReport::find(const std::string& split) const {
  for (const auto& s : splits)
    if (s.split == split) return &s;
  return nullptr;
}

std::string config_hash(const nlohmann::json& config) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

}  // namespace

nlohmann::json report_to_json(const MetricsReport& r, bool with_predictions) {
  nlohmann::json splits = nlohmann::json::array();
  for (const auto& s : r.splits) {
    nlohmann::json js{{"split", s.split}, {"count", s.count}, {"mae_sur", opt(s.mae_sur)}, {"mae_smr", opt(s.mae_smr)}};
    if (with_predictions) {
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& p : s.predictions) {
        rows.push_back({{"ladder_id", p.ladder_id},
                        {"rung_index", p.rung_index},
                        {"sur", p.pred.sur},
                        {"smr", p.pred.smr},
                        {"sur_true", opt(p.target.sur)},
                        {"smr_true", opt(p.target.smr)}});
      }
      js["predictions"] = std::move(rows);
    }
    splits.push_back(std::move(js));
  }
  return {{"variant", r.variant}, {"dataset", r.dataset}, {"seed", r.seed},       {"steps", r.steps},
          {"config_hash", r.config_hash}, {"config", r.config}, {"splits", splits}};
}

std::string format_summary(const std::vector<MetricsReport>& reports) {
  std::ostringstream ss;
  io::CsvWriter w(ss, {"variant", "dataset", "split", "mae_sur", "mae_smr", "seed", "steps"});
  for (const auto& r : reports) {
    for (const auto& s : r.splits) {
      w.row({r.variant, r.dataset, s.split, s.mae_sur ? io::format_real(*s.mae_sur) : "",
             s.mae_smr ? io::format_real(*s.mae_smr) : "", std::to_string(r.seed), std::to_string(r.steps)});
    }
  }
  return ss.str();
}

}  // namespace surmr::train
