// Writes ponder_like.csv and ponder_like_layout.json into the given directory.

#include <iostream>

#include <swedge/io.hpp>

#include "fixture.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: generate_fixture <dir>\n";
    return 2;
  }
  const std::string dir = argv[1];
  const swedge::SimulationConfig cfg = fixture::config();
  const swedge::TrialDataset data = swedge::simulate(cfg, 0);
  swedge::write_file(dir + "/ponder_like.csv", swedge::dataset_to_csv(data));
  swedge::write_file(dir + "/ponder_like_layout.json", swedge::layout_to_json(cfg.layout));
  std::cout << data.observations() << " records\n";
  return 0;
}
