#include "surmr/train/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "surmr/error.hpp"
#include "surmr/io/csv.hpp"

namespace surmr::train {

void SplitSpec::validate() const {
  for (double f : {train, val, test}) {
    if (!(f >= 0.0 && f <= 1.0)) throw Error("split fractions must lie in [0, 1]");
  }
  if (std::abs(train + val + test - 1.0) > 1e-9) throw Error("split fractions must sum to 1");
}

namespace {

std::size_t portion(double fraction, std::size_t n) {
  // The small slack keeps 0.1 * 10 from landing just under 1.
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

}  // namespace

Split split_dataset(std::vector<std::string> ids, const SplitSpec& spec) {
  spec.validate();
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw Error("duplicate ladder id in split input");
  const std::size_t n = ids.size();
  const std::size_t n_val = portion(spec.val, n), n_test = portion(spec.test, n);
  if (n_val + n_test > n) throw Error("split fractions leave no room for training");
  const std::size_t n_train = n - n_val - n_test;
  if ((spec.train > 0 && n_train == 0) || (spec.val > 0 && n_val == 0) || (spec.test > 0 && n_test == 0)) {
    throw Error("too few ladders (" + std::to_string(n) + ") to give every split at least one");
  }
  // Fisher-Yates with raw engine output so the order does not depend on the
  // standard library's distribution implementation.
  std::mt19937_64 rng(spec.seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(ids[i - 1], ids[j]);
  }
  Split s;
  s.test.assign(ids.begin(), ids.begin() + static_cast<long>(n_test));
  s.val.assign(ids.begin() + static_cast<long>(n_test), ids.begin() + static_cast<long>(n_test + n_val));
  s.train.assign(ids.begin() + static_cast<long>(n_test + n_val), ids.end());
  for (auto* part : {&s.train, &s.val, &s.test}) std::sort(part->begin(), part->end());
  return s;
}

std::string format_split(const Split& split) {
  std::map<std::string, std::string> rows;
  for (const auto& id : split.train) rows[id] = "train";
  for (const auto& id : split.val) rows[id] = "val";
  for (const auto& id : split.test) rows[id] = "test";
  std::ostringstream ss;
  io::CsvWriter w(ss, {"ladder_id", "split"});
  for (const auto& [id, part] : rows) w.row({id, part});
  return ss.str();
}

Split split_from_assignment(const std::map<std::string, std::string>& assignment) {
  Split s;
  for (const auto& [id, part] : assignment) {
    if (part == "train") s.train.push_back(id);
    else if (part == "val") s.val.push_back(id);
    else if (part == "test") s.test.push_back(id);
    else throw Error("unknown split '" + part + "'");
  }
  return s;
}

void to_json(nlohmann::json& j, const SplitSpec& s) {
  j = nlohmann::json{{"seed", s.seed}, {"train", s.train}, {"val", s.val}, {"test", s.test}};
}

void from_json(const nlohmann::json& j, SplitSpec& s) {
  SplitSpec d;
  s.seed = j.value("seed", d.seed);
  s.train = j.value("train", d.train);
  s.val = j.value("val", d.val);
  s.test = j.value("test", d.test);
}

}  // namespace surmr::train
