#include "surmr/train/dataset.hpp"

#include <algorithm>
#include <set>

#include "surmr/error.hpp"
#include "surmr/io/image.hpp"

namespace surmr::train {

std::vector<std::string> Dataset::ladder_ids() const {
  std::set<std::string> ids;
  for (const auto& it : items) ids.insert(it.ladder_id);
  return {ids.begin(), ids.end()};
}

Dataset Dataset::subset(const std::vector<std::string>& ids) const {
  const std::set<std::string> keep(ids.begin(), ids.end());
  Dataset out;
  for (const auto& it : items)
    if (keep.count(it.ladder_id)) out.items.push_back(it);
  return out;
}

namespace {

std::shared_ptr<const nn::Tensor> load_tensor(const io::Manifest& m, const std::string& ref,
                                              const model::BackboneConfig& config, const ImageSource& source) {
  const auto img = source ? source(ref) : io::read_image(m.resolve(ref));
  return std::make_shared<const nn::Tensor>(model::preprocess(io::to_rgb_tensor(img), config));
}

std::optional<double> label_for(const std::optional<io::LabelMap>& labels, const std::string& what,
                                const std::string& ladder, int rung) {
  if (!labels) return std::nullopt;
  auto it = labels->find({ladder, rung});
  if (it == labels->end()) {
    throw Error("no " + what + " label for (ladder '" + ladder + "', rung " + std::to_string(rung) + ")");
  }
  return it->second;
}

}  // namespace

Dataset load_dataset(const io::Manifest& manifest, const std::vector<std::string>& ids,
                     const std::optional<io::LabelMap>& sur, const std::optional<io::LabelMap>& smr,
                     const model::BackboneConfig& config, const ImageSource& source) {
  const std::set<std::string> wanted(ids.begin(), ids.end());
  for (const auto& id : wanted) manifest.find(id);
  Dataset ds;
  for (const auto& ladder : manifest.ladders) {
    if (!wanted.empty() && !wanted.count(ladder.ladder_id)) continue;
    const auto original = load_tensor(manifest, ladder.original_ref, config, source);
    for (const auto& r : ladder.rungs) {
      Item it;
      it.ladder_id = ladder.ladder_id;
      it.rung_index = r.rung_index;
      it.original = original;
      it.compressed = load_tensor(manifest, r.image_ref, config, source);
      it.target.sur = label_for(sur, "SUR", ladder.ladder_id, r.rung_index);
      it.target.smr = label_for(smr, "SMR", ladder.ladder_id, r.rung_index);
      ds.items.push_back(std::move(it));
    }
  }
  return ds;
}

FlipDraw draw_flip(std::mt19937_64& rng, bool allow_horizontal, bool allow_vertical) {
  // Top bit of each draw; both draws are consumed regardless of the flags.
  const bool h = (rng() >> 63) != 0;
  const bool v = (rng() >> 63) != 0;
  return {allow_horizontal && h, allow_vertical && v};
}

nn::Tensor flip(const nn::Tensor& chw, FlipDraw draw) {
  if (chw.rank() != 3) throw Error("flip expects a (C, H, W) tensor, got " + nn::shape_string(chw.shape()));
  if (!draw.horizontal && !draw.vertical) return chw;
  const std::size_t c = chw.dim(0), h = chw.dim(1), w = chw.dim(2);
  nn::Tensor out(chw.shape());
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const std::size_t sy = draw.vertical ? h - 1 - y : y;
        const std::size_t sx = draw.horizontal ? w - 1 - x : x;
        out.at(ch, y, x) = chw.at(ch, sy, sx);
      }
  return out;
}

std::pair<nn::Tensor, nn::Tensor> augment(const nn::Tensor& original, const nn::Tensor& compressed,
                                          FlipDraw draw) {
  if (original.shape() != compressed.shape()) {
    throw Error("augment: pair shapes differ: " + nn::shape_string(original.shape()) + " vs " +
                nn::shape_string(compressed.shape()));
  }
  return {flip(original, draw), flip(compressed, draw)};
}

}  // namespace surmr::train
