// Copyright 2026-present the linklab project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// Writes the synthetic toyland corpus: kb.jsonl, train.jsonl and eval.jsonl.
#include <iostream>

#include "CLI11.hpp"
#include "linklab/toyland.hpp"

int main(int argc, char** argv) {
  linklab::ToylandConfig cfg;
  std::string out;
  CLI::App app{"generate the toyland entity-linking fixture"};
  app.add_option("out_dir", out, "output directory")->required();
  app.add_option("--seed", cfg.seed, "generator seed");
  app.add_option("--entities", cfg.n_entities, "number of entities")->check(CLI::PositiveNumber);
  app.add_option("--mentions", cfg.mentions_per_entity, "mentions per entity")->check(CLI::PositiveNumber);
  app.add_option("--train", cfg.train_per_entity, "training mentions per entity");
  app.add_option("--inflected", cfg.inflected_fraction, "fraction of inflected surfaces")->check(CLI::Range(0.0, 1.0));
  app.add_option("--homonyms", cfg.homonym_pairs, "entity pairs sharing a label");
  app.add_option("--language", cfg.language, "language code");
  CLI11_PARSE(app, argc, argv);
  try {
    linklab::write_toyland(linklab::generate_toyland(cfg), out);
  } catch (const std::exception& e) {
    std::cerr << "linklab-toyland: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
