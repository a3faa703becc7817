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
#include "linklab/cli.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "linklab/alias_table.hpp"
#include "linklab/config.hpp"
#include "linklab/embedding_io.hpp"
#include "linklab/error.hpp"
#include "linklab/evaluator.hpp"
#include "linklab/io.hpp"
#include "linklab/kb.hpp"
#include "linklab/string_linker.hpp"
#include "linklab/tokenizer.hpp"
#include "linklab/trainer.hpp"
#include "linklab/vindex.hpp"
#include "linklab/windows.hpp"

namespace linklab {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::set<std::string> kPathKeys = {"kb", "train_mentions", "eval_mentions", "out_dir"};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Relative paths that do not exist are looked up under LINKLAB_DATA_DIR.
fs::path resolve(const std::string& p) {
  const fs::path path(p);
  if (path.is_absolute() || fs::exists(path)) return path;
  if (const char* root = std::getenv("LINKLAB_DATA_DIR"); root != nullptr && *root != '\0') {
    return fs::path(root) / path;
  }
  return path;
}

struct Globals {
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::size_t threads = 1;
  std::string config;
  std::vector<std::string> sets;
};

class Manifest {
 public:
  Manifest(const std::string& command, const Globals& g) : started_(utc_now()) {
    doc_["command"] = command;
    doc_["seed"] = g.seed;
    doc_["threads"] = g.threads;
    doc_["config"] = json::object();
    doc_["inputs"] = json::array();
    doc_["outputs"] = json::array();
  }
  void config(const ConfigMap& values) {
    for (const auto& [k, v] : values) doc_["config"][k] = v;
  }
  void set(const std::string& key, json value) { doc_[key] = std::move(value); }
  void input(const fs::path& p) { doc_["inputs"].push_back(p.string()); }
  void output(const fs::path& p) { doc_["outputs"].push_back(p.string()); }
  void write(const fs::path& path) {
    doc_["started"] = started_;
    doc_["finished"] = utc_now();
    io::write_file(path, doc_.dump(2) + "\n");
  }

 private:
  json doc_;
  std::string started_;
};

fs::path sidecar(const fs::path& output) { return fs::path(output.string() + ".manifest.json"); }

// A store is a directory written by `ingest`.
struct Store {
  fs::path dir;
  std::string language;
  std::map<Qid, Entity> entities;
  std::vector<Mention> mentions;
};

Store load_store(const std::string& where) {
  Store s;
  s.dir = resolve(where);
  if (!fs::is_directory(s.dir)) throw IoError("store directory not found: " + s.dir.string());
  const json manifest = json::parse(io::read_file(s.dir / "manifest.json"));
  if (!manifest.contains("store")) throw FormatError(s.dir.string() + " is not an ingested store");
  s.language = manifest["store"].at("language").get<std::string>();
  s.entities = load_kb(io::read_file(s.dir / "entities.jsonl"), s.language).entities;
  s.mentions = load_mentions(io::read_file(s.dir / "mentions.jsonl"));
  return s;
}

std::string format_rows(const std::string& language, const std::string& label,
                        const std::map<std::size_t, double>& recalls, std::size_t n) {
  std::string out;
  for (const auto& [k, r] : recalls) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", r);
    out += language + '\t' + label + '\t' + std::to_string(k) + '\t' + buf + '\t' + std::to_string(n) + '\n';
  }
  return out;
}

void emit(const std::string& text, const std::string& out, Manifest& manifest) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  const fs::path path(out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  io::write_file(path, text);
  manifest.output(path);
  manifest.write(sidecar(path));
}

std::vector<std::size_t> checked_ks(std::vector<std::size_t> ks) {
  if (ks.empty()) throw ArgumentError("no K values given");
  for (auto k : ks) {
    if (k == 0) throw ArgumentError("K must be >= 1");
  }
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  return ks;
}

AliasTable table_from(const Store& train, std::size_t k, bool cased) {
  std::vector<std::pair<std::string, Qid>> pairs;
  pairs.reserve(train.mentions.size());
  for (const auto& m : train.mentions) pairs.emplace_back(m.surface, m.gold_qid);
  return build_alias_table(pairs, k, cased);
}

// Aliases are embedded as a description with an empty body.
EmbeddingMatrix<double> embed_surfaces(const EncoderParams<double>& params,
                                       const std::vector<std::string>& surfaces, std::size_t window) {
  const Vocabulary vocab(static_cast<std::size_t>(params.vocab_size()));
  std::vector<std::vector<TokenId>> rows;
  rows.reserve(surfaces.size());
  for (const auto& s : surfaces) rows.push_back(compose_description(s, "", window, vocab));
  return embed(params, to_token_block(rows));
}

struct TrainSetup {
  TrainConfig cfg;
  ConfigMap paths;
  ConfigMap resolved;
};

TrainSetup resolve_train_config(const Globals& g) {
  ConfigMap values;
  if (!g.config.empty()) values = parse_config(io::read_file(resolve(g.config)));
  for (const auto& s : g.sets) {
    auto [k, v] = parse_override(s);
    values[k] = v;
  }
  if (g.seed_given) values["seed"] = std::to_string(g.seed);
  TrainSetup setup;
  apply_config(setup.cfg, values, kPathKeys);
  setup.cfg.validate();
  for (const auto& key : kPathKeys) {
    if (auto it = values.find(key); it != values.end()) setup.paths[key] = it->second;
  }
  setup.resolved = describe(setup.cfg);
  if (auto it = values.find("preset"); it != values.end()) setup.resolved["preset"] = it->second;
  for (const auto& [k, v] : setup.paths) setup.resolved[k] = v;
  return setup;
}

const std::string& require_key(const TrainSetup& s, const std::string& key) {
  const auto it = s.paths.find(key);
  if (it == s.paths.end()) throw ArgumentError("config key '" + key + "' is required");
  return it->second;
}

fs::path round_file(const fs::path& dir, const std::string& stem, std::size_t round,
                    const std::string& ext) {
  return dir / (stem + "_" + std::to_string(round) + ext);
}

struct Command {
  CLI::App* app;
  std::function<void()> run;
};

class Cli {
 public:
  Cli() : app_("linklab: entity linking with alias tables and a dense bi-encoder") {
    app_.require_subcommand(1);
    app_.fallthrough();
    app_.add_option("--seed", g_.seed, "random seed")
        ->each([this](const std::string&) { g_.seed_given = true; });
    app_.add_option("--threads", g_.threads, "worker cap")->check(CLI::PositiveNumber);
    app_.add_option("--config", g_.config, "flat key = value config file");
    app_.add_option("--set", g_.sets, "config override key=value (repeatable)")->allow_extra_args(false);
    add_ingest();
    add_table();
    add_link();
    add_baseline();
    add_embed_kb();
    add_index();
    add_epoch();
    add_train();
    add_eval();
    add_bound();
  }

  int run(int argc, const char* const* argv) {
    try {
      app_.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app_.exit(e);
      return code == 0 ? kExitOk : kExitUsage;
    }
    Eigen::setNbThreads(static_cast<int>(g_.threads));
    try {
      for (const auto& c : commands_) {
        if (c.app->parsed()) c.run();
      }
      return kExitOk;
    } catch (const NumericError& e) {
      std::cerr << "linklab: numeric failure: " << e.what() << '\n';
      return kExitNumeric;
    } catch (const ArgumentError& e) {
      std::cerr << "linklab: " << e.what() << '\n';
    } catch (const DomainError& e) {
      std::cerr << "linklab: " << e.what() << '\n';
    } catch (const FormatError& e) {
      std::cerr << "linklab: format error: " << e.what() << '\n';
    } catch (const IoError& e) {
      std::cerr << "linklab: " << e.what() << '\n';
    } catch (const InsufficientNegativesError& e) {
      std::cerr << "linklab: " << e.what() << '\n';
    } catch (const json::exception& e) {
      std::cerr << "linklab: format error: " << e.what() << '\n';
    } catch (const fs::filesystem_error& e) {
      std::cerr << "linklab: " << e.what() << '\n';
    }
    return kExitUsage;
  }

 private:
  CLI::App* add(const std::string& name, const std::string& help, std::function<void()> run) {
    auto* sub = app_.add_subcommand(name, help);
    commands_.push_back({sub, std::move(run)});
    return sub;
  }

  void add_ingest() {
    auto* c = add("ingest", "parse a KB JSONL dump into entity and mention stores", [this] {
      const fs::path in = resolve(ingest_.input);
      const std::string text = io::read_file(in);
      const KbPartition part = load_kb(text, ingest_.language);
      const MentionExtraction ex = extract_mentions(text, ingest_.language);
      fs::path out(ingest_.out);
      if (out.empty()) {
        const char* root = std::getenv("LINKLAB_DATA_DIR");
        if (root == nullptr || *root == '\0') throw ArgumentError("--out is required without LINKLAB_DATA_DIR");
        out = fs::path(root) / ingest_.language;
      }
      fs::create_directories(out);
      io::write_file(out / "entities.jsonl", dump_kb(part.entities));
      io::write_file(out / "mentions.jsonl", dump_mentions(ex.mentions));
      const json counts = {{"entities", part.entities.size()},
                           {"mentions", ex.mentions.size()},
                           {"dropped_empty", ex.dropped_empty},
                           {"skipped_out_of_bounds", ex.skipped_out_of_bounds},
                           {"skipped_lines", part.skipped_lines}};
      Manifest m("ingest", g_);
      m.input(in);
      m.output(out / "entities.jsonl");
      m.output(out / "mentions.jsonl");
      m.set("store", {{"language", ingest_.language}});
      m.set("counts", counts);
      m.write(out / "manifest.json");
      for (const auto& [k, v] : counts.items()) std::cout << k << '\t' << v.get<std::size_t>() << '\n';
    });
    c->add_option("input", ingest_.input, "JSONL dump (.gz/.xz accepted)")->required();
    c->add_option("-l,--language", ingest_.language, "language code")->required();
    c->add_option("-o,--out", ingest_.out, "store directory");
  }

  void add_table() {
    auto* c = add("table", "build an alias table from a mention store", [this] {
      const Store train = load_store(table_.mentions);
      const AliasTable table = table_from(train, table_.k, !table_.uncased);
      Manifest m("table", g_);
      m.input(train.dir);
      m.config({{"k", std::to_string(table_.k)}, {"cased", table_.uncased ? "false" : "true"}});
      emit(dump_alias_table(table), table_.out, m);
    });
    c->add_option("--mentions", table_.mentions, "mention store")->required();
    c->add_option("-k,--k", table_.k, "candidates kept per alias")->check(CLI::PositiveNumber);
    c->add_flag("--uncased", table_.uncased, "fold case in alias keys");
    c->add_option("-o,--out", table_.out, "output TSV (stdout when omitted)");
  }

  void add_link() {
    auto* c = add("link", "rank candidate entities for one mention string", [this] {
      const fs::path path = resolve(link_.table);
      const AliasTable table = load_alias_table(io::read_file(path), link_.k, !link_.uncased);
      std::string text;
      if (link_.mode == "alias") {
        const auto* cands = table.find(link_.mention);
        if (cands != nullptr) {
          for (std::size_t i = 0; i < cands->size(); ++i) {
            text += std::to_string(i + 1) + '\t' + to_string((*cands)[i].qid) + '\t' +
                    std::to_string((*cands)[i].count) + '\n';
          }
        }
      } else if (link_.mode == "string") {
        std::set<Qid> seen;
        for (const auto& hit : similarity_hits(table, link_.mention, link_.k)) {
          if (!seen.insert(hit.qid).second) continue;
          char buf[32];
          std::snprintf(buf, sizeof buf, "%.6f", hit.distance);
          text += std::to_string(seen.size()) + '\t' + to_string(hit.qid) + '\t' + hit.alias + '\t' + buf + '\n';
          if (seen.size() == link_.k) break;
        }
      } else {
        throw ArgumentError("link --mode must be alias or string");
      }
      Manifest m("link", g_);
      m.input(path);
      m.config({{"mode", link_.mode}, {"k", std::to_string(link_.k)}});
      emit(text, link_.out, m);
    });
    c->add_option("mention", link_.mention, "mention surface")->required();
    c->add_option("--table", link_.table, "alias table TSV")->required();
    c->add_option("--mode", link_.mode, "alias or string");
    c->add_option("-k,--k", link_.k, "candidates")->check(CLI::PositiveNumber);
    c->add_flag("--uncased", link_.uncased, "table was built uncased");
    c->add_option("-o,--out", link_.out, "output TSV");
  }

  void add_baseline() {
    auto* c = add("baseline", "evaluate the alias, string or dense alias baseline", [this] {
      auto& o = baseline_;
      const auto ks = checked_ks(o.ks);
      const std::size_t max_k = ks.back();
      const bool dense = o.mode == "dense";
      if (o.mode != "alias" && o.mode != "string" && !dense) {
        throw ArgumentError("baseline --mode must be alias, string or dense");
      }
      if (dense != !o.embeddings.empty() || dense != !o.params.empty()) {
        throw ArgumentError("--embeddings and --params are required by, and only valid for, dense mode");
      }
      if (dense && (!o.table.empty() || !o.train.empty())) {
        throw ArgumentError("dense mode reads aliases from --embeddings, not --table/--train");
      }
      if (!dense && o.table.empty() == o.train.empty()) {
        throw ArgumentError("alias and string modes need exactly one of --table or --train");
      }
      const Store eval = load_store(o.eval);
      if (eval.mentions.empty()) throw DomainError("evaluation store has no mentions");
      Manifest m("baseline", g_);
      m.input(eval.dir);
      m.config({{"mode", o.mode}, {"k", std::to_string(o.k)}, {"cased", o.uncased ? "false" : "true"}});

      std::vector<std::vector<Qid>> ranked;
      std::vector<Qid> golds;
      for (const auto& mention : eval.mentions) golds.push_back(mention.gold_qid);
      if (dense) {
        const EncoderParams<double> params = load_params(resolve(o.params));
        LabeledEmbeddings aliases = load_embeddings(resolve(o.embeddings));
        m.input(resolve(o.params));
        m.input(resolve(o.embeddings));
        std::vector<std::vector<TokenId>> no_tokens(aliases.qids.size());
        const auto index =
            SearchIndex::build(std::move(aliases.rows), aliases.qids, std::move(no_tokens), 1, g_.seed, 1);
        std::vector<std::string> surfaces;
        for (const auto& mention : eval.mentions) surfaces.push_back(mention.surface);
        const auto queries = embed_surfaces(params, surfaces, o.context_size);
        for (Eigen::Index i = 0; i < queries.rows(); ++i) {
          ranked.push_back(ranked_entities(index, queries.row(i), max_k, 1));
        }
      } else {
        AliasTable table(o.k, !o.uncased);
        if (!o.table.empty()) {
          m.input(resolve(o.table));
          table = load_alias_table(io::read_file(resolve(o.table)), o.k, !o.uncased);
        } else {
          const Store train = load_store(o.train);
          m.input(train.dir);
          table = table_from(train, o.k, !o.uncased);
        }
        for (const auto& mention : eval.mentions) {
          ranked.push_back(o.mode == "alias" ? link_alias(table, mention.surface)
                                             : link_by_similarity(table, mention.surface, max_k));
        }
      }
      std::map<std::size_t, double> recalls;
      for (auto k : ks) recalls[k] = recall_at_k(ranked, golds, k);
      emit(format_rows(eval.language, o.mode, recalls, golds.size()), o.out, m);
    });
    auto& o = baseline_;
    c->add_option("--mode", o.mode, "alias, string or dense")->required();
    c->add_option("--eval", o.eval, "held-out mention store")->required();
    c->add_option("--train", o.train, "mention store to build the alias table from");
    c->add_option("--table", o.table, "prebuilt alias table TSV");
    c->add_option("--embeddings", o.embeddings, "alias embedding TSV (dense)");
    c->add_option("--params", o.params, "encoder checkpoint (dense)");
    c->add_option("-k,--k", o.k, "alias table K")->check(CLI::PositiveNumber);
    c->add_flag("--uncased", o.uncased, "fold case in alias keys");
    c->add_option("--ks", o.ks, "recall cutoffs")->delimiter(',');
    c->add_option("--context-size", o.context_size, "token window")->check(CLI::Range(3, 1 << 20));
    c->add_option("-o,--out", o.out, "output TSV");
  }

  void add_embed_kb() {
    auto* c = add("embed-kb", "embed entity descriptions or alias table rows", [this] {
      auto& o = embed_;
      if (o.kb.empty() == o.table.empty()) throw ArgumentError("give exactly one of --kb or --table");
      const EncoderParams<double> params = load_params(resolve(o.params));
      Manifest m("embed-kb", g_);
      m.input(resolve(o.params));
      m.config({{"context_size", std::to_string(o.context_size)}});
      EmbeddingMatrix<double> rows;
      std::vector<Qid> qids;
      if (!o.kb.empty()) {
        const Store kb = load_store(o.kb);
        m.input(kb.dir);
        const Vocabulary vocab(static_cast<std::size_t>(params.vocab_size()));
        const auto prepared = prepare_descriptions(kb.entities, o.context_size, vocab);
        rows = embed(params, to_token_block(prepared.windows));
        qids = prepared.qids;
      } else {
        m.input(resolve(o.table));
        const AliasTable table = load_alias_table(io::read_file(resolve(o.table)), o.k, !o.uncased);
        std::vector<std::string> surfaces;
        for (const auto& [alias, cands] : table.entries()) {
          for (const auto& cand : cands) {
            surfaces.push_back(alias);
            qids.push_back(cand.qid);
          }
        }
        rows = embed_surfaces(params, surfaces, o.context_size);
      }
      emit(dump_embeddings(rows, qids), o.out, m);
    });
    auto& o = embed_;
    c->add_option("--params", o.params, "encoder checkpoint")->required();
    c->add_option("--kb", o.kb, "entity store");
    c->add_option("--table", o.table, "alias table TSV");
    c->add_option("-k,--k", o.k, "alias table K")->check(CLI::PositiveNumber);
    c->add_flag("--uncased", o.uncased, "alias table was built uncased");
    c->add_option("--context-size", o.context_size, "token window")->check(CLI::Range(3, 1 << 20));
    c->add_option("-o,--out", o.out, "output embedding TSV")->required();
  }

  void add_index() {
    auto* c = add("index", "embed a KB and persist its searchable rows", [this] {
      auto& o = index_;
      const EncoderParams<double> params = load_params(resolve(o.params));
      const Store kb = load_store(o.kb);
      const Vocabulary vocab(static_cast<std::size_t>(params.vocab_size()));
      const auto prepared = prepare_descriptions(kb.entities, o.context_size, vocab);
      const auto rows = embed(params, to_token_block(prepared.windows));
      const fs::path prefix(o.out_prefix);
      if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
      const fs::path emb(prefix.string() + ".emb.tsv");
      const fs::path tok(prefix.string() + ".tokens.tsv");
      save_embeddings(emb, rows, prepared.qids);
      io::write_file(tok, dump_token_rows(prepared.qids, prepared.windows));
      Manifest m("index", g_);
      m.input(resolve(o.params));
      m.input(kb.dir);
      m.output(emb);
      m.output(tok);
      m.config({{"context_size", std::to_string(o.context_size)}});
      m.write(fs::path(prefix.string() + ".manifest.json"));
    });
    auto& o = index_;
    c->add_option("--params", o.params, "encoder checkpoint")->required();
    c->add_option("--kb", o.kb, "entity store")->required();
    c->add_option("--context-size", o.context_size, "token window")->check(CLI::Range(3, 1 << 20));
    c->add_option("-o,--out-prefix", o.out_prefix, "writes PREFIX.emb.tsv and PREFIX.tokens.tsv")->required();
  }

  void add_epoch() {
    auto* c = add("epoch", "generate one round of training batches, or inspect an epoch file", [this] {
      auto& o = epoch_;
      if (!o.inspect.empty()) {
        const Epoch e = load_epoch(resolve(o.inspect));
        std::cout << "batch_size\t" << e.batch_size << "\nneg\t" << e.neg << "\nwindow\t" << e.window
                  << "\nbatches\t" << e.batches.size() << '\n';
        return;
      }
      if (o.out.empty()) throw ArgumentError("epoch needs --out or --inspect");
      if (o.round == 0) throw ArgumentError("--round must be >= 1");
      const TrainSetup setup = resolve_train_config(g_);
      const auto& cfg = setup.cfg;
      const Store kb = load_store(require_key(setup, "kb"));
      const Store train = load_store(require_key(setup, "train_mentions"));
      const EncoderParams<double> params =
          o.params.empty() ? initial_state(cfg).params : load_params(resolve(o.params));
      if (static_cast<std::size_t>(params.vocab_size()) != cfg.vocab_size) {
        throw ArgumentError("checkpoint vocabulary differs from vocab_size");
      }
      const Vocabulary vocab(cfg.vocab_size);
      const auto prepared = prepare_mentions(linkable_mentions(kb.entities, train.mentions), cfg.context_size, vocab);
      const auto descriptions = prepare_descriptions(kb.entities, cfg.context_size, vocab);
      const std::uint64_t seed = round_seed(cfg.seed, o.round);
      const auto index = build_round_index(params, descriptions, cfg, seed);
      const auto batches = generate_epoch(prepared, index, params, cfg, cfg.steps_for_round(o.round), seed);
      const fs::path out(o.out);
      if (out.has_parent_path()) fs::create_directories(out.parent_path());
      save_epoch(out, batches, cfg.batch_size, cfg.neg, cfg.context_size);
      Manifest m("epoch", g_);
      m.config(setup.resolved);
      m.set("seed", cfg.seed);
      m.set("round", o.round);
      m.input(kb.dir);
      m.input(train.dir);
      if (!o.params.empty()) m.input(resolve(o.params));
      m.output(out);
      m.write(sidecar(out));
    });
    auto& o = epoch_;
    c->add_option("--round", o.round, "round number (1-based)");
    c->add_option("--params", o.params, "encoder checkpoint (random init when omitted)");
    c->add_option("-o,--out", o.out, "epoch file (.bin.gz)");
    c->add_option("--inspect", o.inspect, "print the header of an epoch file");
  }

  void add_train() {
    add("train", "run the hard-negative fine-tuning rounds", [this] {
      const TrainSetup setup = resolve_train_config(g_);
      const auto& cfg = setup.cfg;
      const Store kb = load_store(require_key(setup, "kb"));
      const Store train = load_store(require_key(setup, "train_mentions"));
      const Store eval = load_store(require_key(setup, "eval_mentions"));
      const fs::path out(require_key(setup, "out_dir"));
      const fs::path ckpt = out / "checkpoints";
      const fs::path epochs = out / "epochs";
      const fs::path reports = out / "reports";
      for (const auto& d : {ckpt, epochs, reports}) fs::create_directories(d);

      // Extending `rounds` is the one change a resumed run tolerates.
      ConfigMap fingerprint = setup.resolved;
      fingerprint.erase("rounds");
      const json resolved_json(fingerprint);
      FinetuneState start = initial_state(cfg);
      const fs::path state_path = ckpt / "state.json";
      if (fs::exists(state_path)) {
        const json saved = json::parse(io::read_file(state_path));
        if (saved.at("config") != resolved_json) {
          throw ArgumentError(out.string() + " holds a run with a different config");
        }
        const auto done = saved.at("completed_rounds").get<std::size_t>();
        start.params = load_params(round_file(ckpt, "params_round", done, ".bin"));
        start.adam.m = load_params(round_file(ckpt, "adam_m_round", done, ".bin")).table;
        start.adam.v = load_params(round_file(ckpt, "adam_v_round", done, ".bin")).table;
        start.adam.t = saved.at("adam_t").get<std::uint64_t>();
        for (std::size_t r = 0; r <= done; ++r) {
          start.reports.push_back(parse_report(io::read_file(round_file(reports, "round", r, ".tsv"))));
        }
        start.completed_rounds = done;
        std::cerr << "linklab: resuming after round " << done << '\n';
      }

      Manifest m("train", g_);
      m.config(setup.resolved);
      m.set("seed", cfg.seed);
      m.input(kb.dir);
      m.input(train.dir);
      m.input(eval.dir);

      FinetuneHooks hooks;
      hooks.on_epoch = [&](std::size_t round, const std::vector<TrainingBatch>& batches) {
        const auto path = round_file(epochs, "round", round, ".bin.gz");
        save_epoch(path, batches, cfg.batch_size, cfg.neg, cfg.context_size);
        m.output(path);
      };
      hooks.on_step = [&](std::size_t round, std::size_t step, double loss) {
        if ((step + 1) % 1000 == 0) {
          std::cerr << "round " << round << " step " << step + 1 << " loss " << loss << '\n';
        }
      };
      hooks.on_round_end = [&](std::size_t round, const FinetuneState& state) {
        const auto report_path = round_file(reports, "round", round, ".tsv");
        io::write_file(report_path, format_report(state.reports[round]));
        save_params(round_file(ckpt, "params_round", round, ".bin"), state.params);
        save_params(round_file(ckpt, "adam_m_round", round, ".bin"), EncoderParams<double>{state.adam.m});
        save_params(round_file(ckpt, "adam_v_round", round, ".bin"), EncoderParams<double>{state.adam.v});
        const json saved = {{"completed_rounds", round}, {"adam_t", state.adam.t}, {"config", resolved_json}};
        // state.json is the commit point: write it last, atomically.
        const fs::path tmp = ckpt / "state.json.tmp";
        io::write_file(tmp, saved.dump(2) + "\n");
        fs::rename(tmp, state_path);
        m.output(report_path);
        std::cerr << format_report(state.reports[round]);
      };

      FinetuneResult result = run_finetuning(kb.entities, train.mentions, eval.mentions, cfg, std::move(start), hooks);
      m.set("completed_rounds", result.state.completed_rounds);
      m.set("status", result.failure ? "failed" : "ok");
      m.write(out / "manifest.json");
      if (result.failure) std::rethrow_exception(result.failure);
      if (!result.state.reports.empty()) std::cout << format_report(result.state.reports.back());
    });
  }

  void add_eval() {
    auto* c = add("eval", "evaluate a checkpoint with dense retrieval", [this] {
      auto& o = eval_;
      if (o.kb.empty() == o.index.empty()) throw ArgumentError("give exactly one of --kb or --index");
      const EncoderParams<double> params = load_params(resolve(o.params));
      const Store eval = load_store(o.eval);
      EvalConfig cfg;
      cfg.ks = checked_ks(o.ks);
      cfg.kb_mode = parse_kb_mode(o.kb_mode);
      cfg.context_size = o.context_size;
      cfg.n_partitions = o.partitions;
      cfg.probes = o.probes == 0 ? o.partitions : o.probes;
      cfg.seed = g_.seed;
      const Vocabulary vocab(static_cast<std::size_t>(params.vocab_size()));
      Manifest m("eval", g_);
      m.input(resolve(o.params));
      m.input(eval.dir);
      m.config({{"kb_mode", o.kb_mode},
                {"context_size", std::to_string(cfg.context_size)},
                {"n_partitions", std::to_string(cfg.n_partitions)},
                {"probes", std::to_string(cfg.probes)}});
      EvalReport report;
      if (!o.index.empty()) {
        if (cfg.kb_mode != KbMode::kDescriptions) throw ArgumentError("--index holds descriptions only");
        const fs::path prefix = resolve(o.index);
        LabeledEmbeddings rows = load_embeddings(fs::path(prefix.string() + ".emb.tsv"));
        std::vector<Qid> token_qids;
        std::vector<std::vector<TokenId>> tokens;
        parse_token_rows(io::read_file(fs::path(prefix.string() + ".tokens.tsv")), token_qids, tokens);
        if (token_qids != rows.qids) throw FormatError("index embedding and token rows disagree");
        m.input(prefix);
        const auto index = SearchIndex::build(std::move(rows.rows), std::move(rows.qids), std::move(tokens),
                                              cfg.n_partitions, cfg.seed, cfg.probes);
        report = evaluate_index(params, index, eval.mentions, cfg, vocab);
      } else {
        const Store kb = load_store(o.kb);
        m.input(kb.dir);
        std::optional<Store> train;
        if (!o.train.empty()) {
          train = load_store(o.train);
          m.input(train->dir);
        }
        if (cfg.kb_mode != KbMode::kDescriptions && !train) {
          throw ArgumentError("kb_mode " + o.kb_mode + " needs --train");
        }
        report = evaluate(params, kb.entities, eval.mentions, train ? &train->mentions : nullptr, cfg, vocab);
      }
      emit(format_report(report), o.out, m);
    });
    auto& o = eval_;
    c->add_option("--params", o.params, "encoder checkpoint")->required();
    c->add_option("--eval", o.eval, "evaluation mention store")->required();
    c->add_option("--kb", o.kb, "entity store");
    c->add_option("--index", o.index, "index prefix written by `index`");
    c->add_option("--train", o.train, "training mention store (contexts/both modes)");
    c->add_option("--kb-mode", o.kb_mode, "descriptions, contexts or both");
    c->add_option("--ks", o.ks, "recall cutoffs")->delimiter(',');
    c->add_option("--context-size", o.context_size, "token window")->check(CLI::Range(3, 1 << 20));
    c->add_option("--partitions", o.partitions, "index partitions")->check(CLI::PositiveNumber);
    c->add_option("--probes", o.probes, "partitions probed per query (default: all)");
    c->add_option("-o,--out", o.out, "output TSV");
  }

  void add_bound() {
    auto* c = add("bound", "recall upper bound and entity overlap of a KB", [this] {
      auto& o = bound_;
      const Store eval = load_store(o.eval);
      Manifest m("bound", g_);
      m.input(eval.dir);
      std::set<Qid> kb_qids;
      for (const auto& where : o.kbs) {
        const Store kb = load_store(where);
        m.input(kb.dir);
        for (const auto& [qid, _] : kb.entities) kb_qids.insert(qid);
      }
      std::set<Qid> eval_qids;
      for (const auto& mention : eval.mentions) eval_qids.insert(mention.gold_qid);
      char buf[128];
      std::snprintf(buf, sizeof buf, "recall_upper_bound\t%.6f\nentity_set_intersection\t%.6f\n",
                    recall_upper_bound(eval.mentions, kb_qids), entity_set_intersection(eval_qids, kb_qids));
      const std::string text = std::string(buf) + "n_mentions\t" + std::to_string(eval.mentions.size()) +
                               "\nkb_size\t" + std::to_string(kb_qids.size()) + '\n';
      emit(text, o.out, m);
    });
    c->add_option("--eval", bound_.eval, "evaluation mention store")->required();
    c->add_option("--kb", bound_.kbs, "entity store (repeatable; union)")->required();
    c->add_option("-o,--out", bound_.out, "output TSV");
  }

  CLI::App app_;
  Globals g_;
  std::vector<Command> commands_;

  struct {
    std::string input, language, out;
  } ingest_;
  struct {
    std::string mentions, out;
    std::size_t k = 10;
    bool uncased = false;
  } table_;
  struct {
    std::string mention, table, mode = "alias", out;
    std::size_t k = 10;
    bool uncased = false;
  } link_;
  struct {
    std::string mode, eval, train, table, embeddings, params, out;
    std::size_t k = 10;
    bool uncased = false;
    std::vector<std::size_t> ks{1, 10};
    std::size_t context_size = 64;
  } baseline_;
  struct {
    std::string params, kb, table, out;
    std::size_t k = 10;
    bool uncased = false;
    std::size_t context_size = 64;
  } embed_;
  struct {
    std::string params, kb, out_prefix;
    std::size_t context_size = 64;
  } index_;
  struct {
    std::size_t round = 1;
    std::string params, out, inspect;
  } epoch_;
  struct {
    std::string params, eval, kb, index, train, kb_mode = "descriptions", out;
    std::vector<std::size_t> ks{1, 10};
    std::size_t context_size = 64;
    std::size_t partitions = 1;
    std::size_t probes = 0;
  } eval_;
  struct {
    std::string eval, out;
    std::vector<std::string> kbs;
  } bound_;
};

}  // namespace

int run_cli(int argc, const char* const* argv) {
  Cli cli;
  return cli.run(argc, argv);
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"linklab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace linklab
