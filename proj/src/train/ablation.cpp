#include "surmr/train/ablation.hpp"

#include <sstream>

#include "surmr/error.hpp"
#include "surmr/io/csv.hpp"

namespace surmr::train {

bool AblationTable::ok() const {
  for (const auto& r : rows)
    if (!r.error.empty()) return false;
  return true;
}

AblationTable run_ablation_matrix(const std::vector<model::Variant>& variants,
                                  const std::vector<AblationDataset>& datasets, const model::NetworkConfig& base,
                                  const TrainConfig& config, const std::function<void(const AblationRow&)>& on_row) {
  if (variants.empty()) throw Error("ablation needs at least one variant");
  if (datasets.empty()) throw Error("ablation needs at least one dataset");
  config.validate();
  AblationTable table;
  for (const auto& ds : datasets) {
    for (const auto v : variants) {
      AblationRow row;
      row.variant = std::string(model::to_string(v));
      row.dataset = ds.name;
      row.seed = config.seed;
      try {
        auto net = model::build_variant(v, base, config.seed);
        row.parameters = net.parameter_count();
        const auto result = train_model(net, ds.train, ds.val, config);
        row.steps = result.steps;
        const Dataset& eval = !ds.test.empty() ? ds.test : !ds.val.empty() ? ds.val : ds.train;
        row.split = !ds.test.empty() ? "test" : !ds.val.empty() ? "val" : "train";
        auto metrics = evaluate(net, eval, row.split);
        row.mae_sur = metrics.mae_sur;
        row.mae_smr = metrics.mae_smr;
        nlohmann::json cfg{{"network", net.config()}, {"train", config}};
        row.report.variant = row.variant;
        row.report.dataset = ds.name;
        row.report.seed = config.seed;
        row.report.steps = result.steps;
        row.report.config_hash = config_hash(cfg);
        row.report.config = std::move(cfg);
        row.report.splits.push_back(std::move(metrics));
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      if (on_row) on_row(row);
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

std::string format_ablation_table(const AblationTable& table) {
  std::ostringstream ss;
  io::CsvWriter w(ss, {"variant", "dataset", "split", "mae_sur", "mae_smr", "parameters", "seed", "steps", "status"});
  for (const auto& r : table.rows) {
    w.row({r.variant, r.dataset, r.split, r.mae_sur ? io::format_real(*r.mae_sur) : "",
           r.mae_smr ? io::format_real(*r.mae_smr) : "", std::to_string(r.parameters), std::to_string(r.seed),
           std::to_string(r.steps), r.error.empty() ? "ok" : "error: " + r.error});
  }
  return ss.str();
}

}  // namespace surmr::train
