// Writes a procedural ladder dataset (images, manifest.json, records.csv).
#include <iostream>

#include <CLI11.hpp>

#include "surmr/train/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic ladder dataset"};
  surmr::train::SyntheticSpec spec;
  std::string out;
  app.add_option("--out", out, "Output directory")->required();
  app.add_option("--ladders", spec.ladders, "Number of ladders");
  app.add_option("--rungs", spec.rungs, "Rungs per ladder");
  app.add_option("--size", spec.size, "Image side in pixels");
  app.add_option("--humans", spec.humans, "Simulated human subjects");
  app.add_option("--machines", spec.machines, "Simulated machine subjects");
  app.add_option("--flip-rate", spec.machine_flip_rate, "Machine verdict flip rate");
  app.add_option("--prefix", spec.prefix, "Ladder id prefix");
  app.add_option("--seed", spec.seed, "Seed")->required();
  CLI11_PARSE(app, argc, argv);
  try {
    const auto data = surmr::train::generate_synthetic(spec);
    surmr::train::write_synthetic(data, out);
    std::cout << "wrote " << data.manifest.ladders.size() << " ladders to " << out << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
