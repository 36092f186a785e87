#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "surmr/io/formats.hpp"
#include "surmr/io/image.hpp"
#include "surmr/model/loss.hpp"

namespace surmr::train {

// One (original, rung) training pair, already preprocessed for the backbone.
struct Item {
  std::string ladder_id;
  int rung_index = 0;
  std::shared_ptr<const nn::Tensor> original;
  std::shared_ptr<const nn::Tensor> compressed;
  model::Target target;
};

struct Dataset {
  std::vector<Item> items;

  bool empty() const { return items.empty(); }
  std::size_t size() const { return items.size(); }
  std::vector<std::string> ladder_ids() const;
  // Items whose ladder is in `ids`, in the original order.
  Dataset subset(const std::vector<std::string>& ids) const;
};

// Supplies the image behind a manifest ref; the default reads the file.
using ImageSource = std::function<io::Image(const std::string& ref)>;

// Reads every image of the listed ladders (all when `ids` is empty) and
// attaches labels. A label map may be absent; a present map must cover every
// rung that is loaded.
Dataset load_dataset(const io::Manifest& manifest, const std::vector<std::string>& ids,
                     const std::optional<io::LabelMap>& sur, const std::optional<io::LabelMap>& smr,
                     const model::BackboneConfig& config, const ImageSource& source = {});

// Same-draw flips for both images of a pair.
struct FlipDraw {
  bool horizontal = false;
  bool vertical = false;
};

FlipDraw draw_flip(std::mt19937_64& rng, bool allow_horizontal = true, bool allow_vertical = true);
nn::Tensor flip(const nn::Tensor& chw, FlipDraw draw);
std::pair<nn::Tensor, nn::Tensor> augment(const nn::Tensor& original, const nn::Tensor& compressed,
                                          FlipDraw draw);

}  // namespace surmr::train
