// ndv: command-line front end for the corpus, NER/masking, embedding,
// search, evaluation and service modules.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "ndv/common/error.hpp"
#include "ndv/corpus/corpus.hpp"
#include "ndv/embed/store.hpp"
#include "ndv/eval/annotation.hpp"
#include "ndv/eval/metrics.hpp"
#include "ndv/eval/pairs.hpp"
#include "ndv/index/flat_index.hpp"
#include "ndv/pipeline/pipeline.hpp"
#include "ndv/service/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// --config accepts TOML (CLI11's native reader) or a JSON object, chosen by
// the first non-blank character. Nested JSON objects address subcommands.
class JsonOrTomlConfig : public CLI::ConfigTOML {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || text[first] != '{') {
      std::istringstream toml(text);
      return CLI::ConfigTOML::from_config(toml);
    }
    const json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw CLI::ConversionError("--config", "invalid JSON config file");
    std::vector<CLI::ConfigItem> items;
    flatten(doc, {}, items);
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
  }

  static void flatten(const json& obj, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : obj.items()) {
      if (value.is_object()) {
        auto nested = parents;
        nested.push_back(key);
        flatten(value, nested, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string part;
  std::istringstream in(s);
  while (std::getline(in, part, ',')) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

std::vector<std::string> expand_lists(const std::vector<std::string>& values) {
  std::vector<std::string> out;
  for (const auto& v : values) {
    for (auto& p : split_list(v)) out.push_back(std::move(p));
  }
  return out;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ndv::IoError("cannot write '" + path.string() + "'");
  return out;
}

std::vector<json> read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ndv::IoError("cannot open '" + path.string() + "'");
  std::vector<json> rows;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json row = json::parse(line, nullptr, false);
    if (row.is_discarded()) {
      throw ndv::RecordError(path.string() + ":" + std::to_string(n) + ": invalid JSON");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ndv::embed::EmbeddingStore> read_stores(const std::vector<std::string>& paths) {
  std::vector<ndv::embed::EmbeddingStore> stores;
  for (const auto& p : paths) stores.push_back(ndv::embed::read_store(p));
  return stores;
}

std::vector<ndv::corpus::Article> read_corpora(const std::vector<std::string>& paths) {
  std::vector<ndv::corpus::Article> all;
  for (const auto& p : paths) {
    std::size_t invalid = 0;
    auto part = ndv::corpus::read_articles(p, &invalid);
    if (invalid) std::cerr << p << ": skipped " << invalid << " invalid lines\n";
    all.insert(all.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return all;
}

ndv::eval::Label parse_label(const json& v) {
  if (v.is_boolean()) return v.get<bool>() ? ndv::eval::Label::positive : ndv::eval::Label::negative;
  if (v.is_number_integer()) {
    return v.get<int>() != 0 ? ndv::eval::Label::positive : ndv::eval::Label::negative;
  }
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "positive" || s == "1" || s == "true") return ndv::eval::Label::positive;
    if (s == "negative" || s == "0" || s == "false") return ndv::eval::Label::negative;
  }
  throw ndv::RecordError("unrecognised pair label " + v.dump());
}

std::string pair_key(std::string a, std::string b) {
  if (b < a) std::swap(a, b);
  return a + '\x1f' + b;
}

// Options shared by every verb that builds a pipeline.
struct PipelineFlags {
  ndv::pipeline::PipelineConfig config;
  int retries = 3;
  int timeout_s = 30;
  std::size_t max_chars = 0;

  void add(CLI::App* app, bool ner, bool embed) {
    if (ner) {
      app->add_option("--ner-backend", config.ner_backend, "'stub' or http:// URL")
          ->capture_default_str();
      app->add_option("--ner-batch", config.ner_batch, "Texts per NER request")
          ->capture_default_str()
          ->check(CLI::PositiveNumber);
    }
    if (embed) {
      app->add_option("--embed-backend", config.embed_backend, "'stub' or http:// URL")
          ->capture_default_str();
      app->add_option("--model", config.model_name, "Embedding model name")->capture_default_str();
      app->add_option("--embed-batch", config.embed_batch, "Texts per embedding request")
          ->capture_default_str()
          ->check(CLI::PositiveNumber);
      app->add_option("--stub-dim", config.stub_dim, "Dimensionality of the stub embedder")
          ->capture_default_str()
          ->check(CLI::PositiveNumber);
      app->add_option("--max-chars", max_chars,
                      "Truncate texts to this many characters before embedding (0 = off)");
    }
    app->add_option("--workers", config.workers, "Concurrent batches per stage")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--retries", retries, "Attempts per backend request")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--timeout", timeout_s, "Backend request timeout in seconds")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  }

  ndv::pipeline::PipelineConfig resolved() const {
    auto c = config;
    c.retry.attempts = retries;
    c.retry.timeout = std::chrono::seconds(timeout_s);
    if (max_chars) c.max_chars = max_chars;
    return c;
  }
};

volatile std::sig_atomic_t g_stop = 0;
httplib::Server* g_server = nullptr;

void on_signal(int) {
  g_stop = 1;
  if (g_server) g_server->stop();
}

int serve_until_stopped(httplib::Server& server, const std::string& host, int port) {
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  if (!server.bind_to_port(host, port)) {
    std::cerr << "error: cannot bind " << host << ":" << port << "\n";
    return 1;
  }
  std::cerr << "listening on http://" << host << ":" << port << "\n";
  server.listen_after_bind();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entity-masked news retrieval toolkit"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonOrTomlConfig>());
  app.set_config("--config", "", "Read options from a TOML or JSON file");
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "Seed for randomized commands")->capture_default_str();

  // download
  auto* download = app.add_subcommand("download", "Materialize a corpus subset as JSONL");
  std::string spec, manifest_path, download_out;
  download->add_option("--spec", spec, "dataset[:year-or-range[:state,...]]")->required();
  download->add_option("--manifest", manifest_path, "Dataset manifest JSON")->required();
  download->add_option("--out", download_out, "Output directory")->required();
  download->callback([&] {
    const auto manifest = ndv::corpus::load_manifest(manifest_path);
    const auto result = ndv::pipeline::download(spec, manifest);
    const fs::path out = fs::path(download_out) / "corpus.jsonl";
    fs::create_directories(download_out);
    ndv::corpus::write_articles(out, result.articles);
    std::cerr << "files " << result.stats.files_matched << ", lines " << result.stats.lines
              << ", valid " << result.stats.valid << ", invalid " << result.stats.invalid << "\n";
    std::cout << out.string() << "\n";
  });

  // ner
  auto* ner = app.add_subcommand("ner", "Tag entities in a corpus file");
  std::string ner_in, ner_out;
  PipelineFlags ner_flags;
  ner->add_option("--in", ner_in, "Corpus JSONL")->required();
  ner->add_option("--out", ner_out, "Annotated JSONL")->required();
  ner->add_option("--backend", ner_flags.config.ner_backend, "'stub' or http:// URL")
      ->capture_default_str();
  ner_flags.add(ner, false, false);
  ner->add_option("--ner-batch", ner_flags.config.ner_batch, "Texts per NER request")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  ner->callback([&] {
    const ndv::pipeline::Pipeline p(ner_flags.resolved());
    const auto articles = read_corpora({ner_in});
    ndv::pipeline::write_annotated(ner_out, p.ner(articles));
  });

  // mask
  auto* mask = app.add_subcommand("mask", "Replace tagged entities with [MASK]");
  std::string mask_in, mask_out;
  mask->add_option("--in", mask_in, "Annotated JSONL")->required();
  mask->add_option("--out", mask_out, "Masked JSONL")->required();
  mask->callback([&] {
    const auto annotated = ndv::pipeline::read_annotated(mask_in);
    ndv::pipeline::write_masked(mask_out, ndv::pipeline::Pipeline::mask(annotated));
  });

  // embed
  auto* embed = app.add_subcommand("embed", "Embed masked texts into a store");
  std::string embed_in, embed_out;
  PipelineFlags embed_flags;
  embed->add_option("--in", embed_in, "Masked JSONL")->required();
  embed->add_option("--out", embed_out, "Output store (.ndjv)")->required();
  embed->add_option("--backend", embed_flags.config.embed_backend, "'stub' or http:// URL")
      ->capture_default_str();
  embed_flags.add(embed, false, true);
  embed->callback([&] {
    const ndv::pipeline::Pipeline p(embed_flags.resolved());
    const auto masked = ndv::pipeline::read_masked(embed_in);
    ndv::embed::write_store(p.embed(masked), embed_out);
  });

  // search
  auto* search = app.add_subcommand("search", "Exact top-k search of query vectors");
  std::vector<std::string> search_stores;
  std::string query_store, search_out;
  std::size_t search_k = 5;
  unsigned search_threads = 1;
  search->add_option("--store", search_stores, "Corpus stores (comma-separated or repeated)")
      ->required();
  search->add_option("--query-store", query_store, "Query store")->required();
  search->add_option("--k", search_k, "Hits per query")->capture_default_str()->check(
      CLI::PositiveNumber);
  search->add_option("--threads", search_threads, "Search threads")->capture_default_str()->check(
      CLI::PositiveNumber);
  search->add_option("--out", search_out, "Hits JSONL")->required();
  search->callback([&] {
    const auto index = ndv::index::FlatIndex::build(read_stores(expand_lists(search_stores)));
    const auto queries = ndv::embed::read_store(query_store);
    ndv::index::SearchOptions opts;
    opts.threads = search_threads;
    const auto hits = index.search_batch(queries, search_k, opts);
    ndv::pipeline::write_hits(search_out, queries.ids(), hits);
  });

  // mask-and-embed
  auto* fused = app.add_subcommand("mask-and-embed", "NER, mask and embed a corpus in one pass");
  std::vector<std::string> fused_in;
  std::string fused_out;
  PipelineFlags fused_flags;
  fused->add_option("--in", fused_in, "Corpus JSONL files")->required();
  fused->add_option("--out", fused_out, "Output store (.ndjv)")->required();
  fused_flags.add(fused, true, true);
  fused->callback([&] {
    const ndv::pipeline::Pipeline p(fused_flags.resolved());
    ndv::embed::write_store(p.mask_and_embed(read_corpora(expand_lists(fused_in))), fused_out);
  });

  // search-nearest-story
  auto* sns = app.add_subcommand("search-nearest-story",
                                 "Mask, embed and search query articles against corpus stores");
  std::vector<std::string> sns_queries, sns_stores;
  std::string sns_out;
  std::size_t sns_k = 5;
  PipelineFlags sns_flags;
  sns->add_option("--queries", sns_queries, "Query article JSONL files")->required();
  sns->add_option("--store", sns_stores, "Corpus stores (comma-separated or repeated)")->required();
  sns->add_option("--k", sns_k, "Hits per query")->capture_default_str()->check(CLI::PositiveNumber);
  sns->add_option("--out", sns_out, "Hits JSONL")->required();
  sns_flags.add(sns, true, true);
  sns->callback([&] {
    const ndv::pipeline::Pipeline p(sns_flags.resolved());
    const auto queries = read_corpora(expand_lists(sns_queries));
    const auto index = ndv::index::FlatIndex::build(read_stores(expand_lists(sns_stores)));
    const auto hits = p.search_nearest_story(queries, index, sns_k);
    std::vector<std::string> ids;
    for (const auto& q : queries) ids.push_back(q.id);
    ndv::pipeline::write_hits(sns_out, ids, hits);
  });

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluation arithmetic and protocols");
  eval->require_subcommand(1);

  auto* f1 = eval->add_subcommand("f1", "F1 from precision and recall");
  double p_val = 0, r_val = 0;
  f1->add_option("--p", p_val, "Precision (fraction or percent)")->required();
  f1->add_option("--r", r_val, "Recall (fraction or percent)")->required();
  f1->callback([&] { std::cout << ndv::eval::f1_from_pr(p_val, r_val) << "\n"; });

  auto* pairs = eval->add_subcommand("pairs", "Pairwise same-story P/R/F1");
  std::string pred_path, gold_path;
  pairs->add_option("--pred", pred_path, "Predicted pairs JSONL {a_id, b_id, label}")->required();
  pairs->add_option("--gold", gold_path, "Gold pairs JSONL {a_id, b_id, label}")->required();
  pairs->callback([&] {
    std::unordered_map<std::string, ndv::eval::Label> predicted;
    for (const auto& row : read_jsonl(pred_path)) {
      predicted[pair_key(row.at("a_id"), row.at("b_id"))] = parse_label(row.at("label"));
    }
    std::vector<ndv::eval::Label> pred, gold;
    for (const auto& row : read_jsonl(gold_path)) {
      const auto key = pair_key(row.at("a_id"), row.at("b_id"));
      const auto it = predicted.find(key);
      if (it == predicted.end()) {
        throw ndv::ShapeError("no prediction for gold pair (" + row.at("a_id").get<std::string>() +
                              ", " + row.at("b_id").get<std::string>() + ")");
      }
      gold.push_back(parse_label(row.at("label")));
      pred.push_back(it->second);
    }
    const auto prf = ndv::eval::pairwise_prf(pred, gold);
    std::cout << json{{"pairs", gold.size()},
                      {"precision", prf.precision},
                      {"recall", prf.recall},
                      {"f1", prf.f1}}
                     .dump()
              << "\n";
  });

  auto* mine = eval->add_subcommand("mine-negatives", "Hard-negative mining");
  std::string pool_path, meta_path, anchors_path, mine_out;
  mine->add_option("--pool", pool_path, "Pool store (.ndjv)")->required();
  mine->add_option("--meta", meta_path, "Pool metadata JSONL {id, source, story_ids, page_ids}")
      ->required();
  mine->add_option("--anchors", anchors_path, "Anchor ids, one per line")->required();
  mine->add_option("--out", mine_out, "Output JSONL (stdout when omitted)");
  mine->callback([&] {
    std::unordered_map<std::string, ndv::eval::PoolMember> meta;
    for (const auto& row : read_jsonl(meta_path)) {
      ndv::eval::PoolMember m;
      m.source = row.at("source").get<std::string>();
      m.story_ids = row.value("story_ids", std::vector<std::string>{});
      m.page_ids = row.value("page_ids", std::vector<std::string>{});
      meta.emplace(row.at("id").get<std::string>(), std::move(m));
    }
    const ndv::eval::NegativePool pool(ndv::embed::read_store(pool_path), meta);
    std::ifstream anchors(anchors_path);
    if (!anchors) throw ndv::IoError("cannot open '" + anchors_path + "'");
    std::ofstream file;
    if (!mine_out.empty()) file = open_out(mine_out);
    std::ostream& out = mine_out.empty() ? std::cout : file;
    std::string anchor;
    while (std::getline(anchors, anchor)) {
      if (anchor.empty()) continue;
      try {
        const auto neg = ndv::eval::mine_hard_negative(anchor, pool);
        out << json{{"anchor", anchor},
                    {"negative", neg.id},
                    {"cosine", neg.cosine},
                    {"cross_source", neg.cross_source}}
                   .dump()
            << "\n";
      } catch (const ndv::NoNegativeAvailable& e) {
        out << json{{"anchor", anchor}, {"negative", nullptr}, {"error", e.what()}}.dump() << "\n";
      }
    }
  });

  auto* topic = eval->add_subcommand("topic-rate", "Share of judged pairs on the same topic");
  std::string sheet_path;
  topic->add_option("--sheet", sheet_path, "Annotation sheet CSV")->required();
  topic->callback([&] {
    std::ifstream in(sheet_path, std::ios::binary);
    if (!in) throw ndv::IoError("cannot open '" + sheet_path + "'");
    const auto rows = ndv::eval::read_sheet_csv(in);
    const auto judged = ndv::eval::annotations_from_sheet(rows);
    std::cout << json{{"judged", judged.size()},
                      {"rate", ndv::eval::topic_match_rate(judged)}}
                     .dump()
              << "\n";
  });

  auto* sheet = eval->add_subcommand("export-sheet", "Write a blank annotation sheet from hits");
  std::string hits_path, sheet_out;
  std::vector<std::string> sheet_corpora;
  std::size_t sheet_k = ndv::eval::kDefaultSheetK;
  sheet->add_option("--hits", hits_path, "Hits JSONL")->required();
  sheet->add_option("--k", sheet_k, "Hits per query")->capture_default_str()->check(
      CLI::PositiveNumber);
  sheet->add_option("--out", sheet_out, "Output CSV")->required();
  sheet->add_option("--corpus", sheet_corpora, "Article JSONL files used for headlines");
  sheet->callback([&] {
    std::vector<std::string> query_ids;
    std::vector<std::vector<ndv::index::SearchHit>> hits;
    std::unordered_map<std::string, std::size_t> slot;
    for (const auto& row : ndv::pipeline::read_hits(hits_path)) {
      auto [it, fresh] = slot.emplace(row.query_id, query_ids.size());
      if (fresh) {
        query_ids.push_back(row.query_id);
        hits.emplace_back();
      }
      hits[it->second].push_back({row.id, 0, row.score});
    }
    std::unordered_map<std::string, std::string> headlines;
    for (const auto& a : read_corpora(expand_lists(sheet_corpora))) {
      if (a.headline) headlines.emplace(a.id, *a.headline);
    }
    const auto lookup = [&](const std::string& id) {
      const auto it = headlines.find(id);
      return it == headlines.end() ? std::string() : it->second;
    };
    const auto n = ndv::eval::export_annotation_sheet(sheet_out, query_ids, hits, sheet_k, lookup);
    std::cerr << n << " rows\n";
  });

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP query service");
  std::vector<std::string> serve_stores, serve_corpora;
  std::string host = "127.0.0.1", cors = "*";
  int port = 8080;
  PipelineFlags serve_flags;
  serve->add_option("--stores", serve_stores, "Corpus stores (comma-separated or repeated)")
      ->required();
  serve->add_option("--corpus", serve_corpora, "Article JSONL files for hit metadata")->required();
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  serve->add_option("--port", port, "Port")->capture_default_str();
  serve->add_option("--cors-origin", cors, "Access-Control-Allow-Origin value")
      ->capture_default_str();
  serve_flags.add(serve, true, true);
  serve->callback([&] {
    ndv::service::SearchService service(ndv::pipeline::Pipeline(serve_flags.resolved()), cors);
    httplib::Server server;
    service.mount(server);
    auto index = ndv::index::FlatIndex::build(read_stores(expand_lists(serve_stores)));
    std::cerr << "loaded " << index.total() << " vectors of dim " << index.dim() << "\n";
    service.load(std::move(index), read_corpora(expand_lists(serve_corpora)));
    if (serve_until_stopped(server, host, port) != 0) throw CLI::RuntimeError(1);
  });

  // stub-backend
  auto* stub = app.add_subcommand("stub-backend",
                                  "Serve the stub NER (/ner) and embedding (/embed) backends");
  std::string stub_host = "127.0.0.1";
  int stub_port = 8090;
  std::size_t stub_dim = ndv::embed::kStubDim;
  stub->add_option("--host", stub_host, "Bind address")->capture_default_str();
  stub->add_option("--port", stub_port, "Port")->capture_default_str();
  stub->add_option("--dim", stub_dim, "Embedding dimensionality")->capture_default_str()->check(
      CLI::PositiveNumber);
  stub->callback([&] {
    httplib::Server server;
    ndv::service::mount_stub_backends(server, stub_dim);
    if (serve_until_stopped(server, stub_host, stub_port) != 0) throw CLI::RuntimeError(1);
  });

  // bench
  auto* bench = app.add_subcommand("bench", "Time exact search on random unit vectors");
  std::size_t bench_rows = 100000, bench_dim = 256, bench_queries = 100, bench_k = 10;
  unsigned bench_threads = 1;
  bench->add_option("--rows", bench_rows)->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--dim", bench_dim)->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--queries", bench_queries)->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--k", bench_k)->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--threads", bench_threads)->capture_default_str()->check(CLI::PositiveNumber);
  bench->callback([&] {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> normal;
    const auto random_store = [&](std::size_t rows, const std::string& prefix) {
      std::vector<float> m(rows * bench_dim);
      std::vector<std::string> ids(rows);
      for (std::size_t i = 0; i < rows; ++i) {
        std::vector<float> v(bench_dim);
        for (auto& x : v) x = normal(rng);
        const auto u = ndv::embed::l2_normalize(std::span<const float>(v));
        std::copy(u.values.begin(), u.values.end(), m.begin() + std::ptrdiff_t(i * bench_dim));
        ids[i] = prefix + std::to_string(i);
      }
      return ndv::embed::EmbeddingStore::from_rows(bench_dim, std::move(m), std::move(ids));
    };
    const auto index = ndv::index::FlatIndex::build({random_store(bench_rows, "r")});
    const auto queries = random_store(bench_queries, "q");
    ndv::index::SearchOptions opts;
    opts.threads = bench_threads;
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    (void)index.search(queries.row(0), bench_k, opts);
    const auto t1 = clock::now();
    (void)index.search_batch(queries, bench_k, opts);
    const auto t2 = clock::now();
    const auto ms = [](auto d) { return std::chrono::duration<double, std::milli>(d).count(); };
    std::cout << json{{"rows", bench_rows},
                      {"dim", bench_dim},
                      {"single_query_ms", ms(t1 - t0)},
                      {"batch_queries", bench_queries},
                      {"batch_ms", ms(t2 - t1)}}
                     .dump()
              << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ndv::StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.backend_down() ? 3 : 2;
  } catch (const ndv::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
