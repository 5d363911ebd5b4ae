// Regenerates the bundled fixtures: make_fixtures [DATA_DIR]
#include <filesystem>
#include <iostream>

#include "synthetic.hpp"

int main(int argc, char** argv) {
  const std::filesystem::path root = argc > 1 ? argv[1] : "data";
  try {
    geosent::testing::write_pipeline_fixture(root / "fixture");
    geosent::testing::write_vote_share_fixture(root / "vote_share");
    geosent::testing::write_symmetric_fixture(root / "symmetric");
    geosent::testing::write_posts50_fixture(root / "posts50.jsonl");
  } catch (const std::exception& e) {
    std::cerr << "error\tdata\t" << e.what() << '\n';
    return 2;
  }
  return 0;
}
