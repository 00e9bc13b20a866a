// Regenerates the toy world files shipped under data/toy.
#include <iostream>

#include <CLI11.hpp>

#include "toy_world.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write a synthetic thesaurus/embeddings/victim/dataset bundle"};
  std::string out = "data/toy";
  tampers::toy::WorldOptions opts;
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", opts.seed, "generator seed");
  app.add_option("--samples", opts.samples, "dataset size");
  CLI11_PARSE(app, argc, argv);

  auto world = tampers::toy::make_world(opts);
  tampers::toy::write_world(world, out);
  std::cout << "wrote " << world.thesaurus_size() << " thesaurus entries, " << world.dataset.size()
            << " samples to " << out << "\n";
  return 0;
}
