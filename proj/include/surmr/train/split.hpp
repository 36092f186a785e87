#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace surmr::train {

// Ladder-level split; every rung follows its ladder.
struct SplitSpec {
  std::uint64_t seed = 0;
  double train = 0.7;
  double val = 0.1;
  double test = 0.2;

  void validate() const;
};

struct Split {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
};

// Ids are sorted, shuffled with the seed, then cut into test, val, train.
// |val| = floor(val * n), |test| = floor(test * n), remainder to train.
Split split_dataset(std::vector<std::string> ladder_ids, const SplitSpec& spec);

std::string format_split(const Split& split);
Split split_from_assignment(const std::map<std::string, std::string>& assignment);

void to_json(nlohmann::json& j, const SplitSpec& s);
void from_json(const nlohmann::json& j, SplitSpec& s);

}  // namespace surmr::train
