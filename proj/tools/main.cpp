/*
 * Copyright 2026 The StreamGate Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "streamgate/bench.hpp"
#include "streamgate/errors.hpp"
#include "streamgate/net.hpp"

namespace fs = std::filesystem;
using namespace streamgate;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

Schema schema_from_json(const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text);
  Schema schema;
  schema.stream_name = doc.at("stream").get<std::string>();
  for (const auto& field : doc.at("fields")) {
    schema.fields.push_back(Field{field.at("name").get<std::string>(),
                                  field_type_from_string(field.at("type").get<std::string>())});
  }
  schema.validate();
  return schema;
}

struct WorkloadFlags {
  WorkloadSpec spec;
  std::string dist = "160:170:130:124:254:290:372";

  void attach(CLI::App* cmd) {
    cmd->add_option("--queries", spec.n_direct_queries, "direct query count");
    cmd->add_option("--dist", dist, "colon-separated 7-way operator-combination ratio");
    cmd->add_option("--policies", spec.n_policies, "policy count");
    cmd->add_option("--requests", spec.n_requests, "request count");
    cmd->add_option("--alpha", spec.zipf_alpha, "zipf skew");
    cmd->add_option("--max-rank", spec.max_rank, "zipf max rank");
    cmd->add_option("--seed", spec.seed, "workload RNG seed");
  }

  WorkloadSpec resolve() const {
    WorkloadSpec out = spec;
    std::istringstream in(dist);
    std::string token;
    std::size_t i = 0;
    while (std::getline(in, token, ':') && i < out.direct_query_dist.size()) {
      out.direct_query_dist[i++] = std::stoi(token);
    }
    if (i != out.direct_query_dist.size()) {
      throw ValidationError("--dist needs exactly 7 colon-separated counts");
    }
    return out;
  }
};

int cmd_serve(std::uint16_t port, bool strict_pr, bool no_guard,
              const std::vector<std::string>& schema_files,
              const std::vector<std::string>& policy_files, bool builtin) {
  StreamEngine engine;
  if (builtin) {
    for (Schema& s : builtin_schemas()) engine.register_stream(std::move(s));
  }
  for (const std::string& file : schema_files) {
    engine.register_stream(schema_from_json(read_file(file)));
  }
  PolicyStore store([&engine](const std::string& name) { return engine.find_stream(name); });
  GatewayConfig config;
  config.block_on_pr = strict_pr;
  config.single_access_guard = !no_guard;
  Gateway gateway(engine, store, config);
  for (const std::string& file : policy_files) {
    std::string id = store.load_policy(read_file(file));
    std::cout << "loaded policy " << id << "\n";
  }

  GatewayServer server(engine, store, gateway, port);
  std::cout << "serving on port " << server.port() << " (streams:";
  for (const std::string& name : engine.stream_names()) std::cout << ' ' << name;
  std::cout << ")\n";

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  return 0;
}

int cmd_proxy(std::uint16_t port, const std::string& upstream) {
  std::size_t colon = upstream.rfind(':');
  if (colon == std::string::npos) throw ValidationError("--upstream must be host:port");
  ProxyServer proxy(upstream.substr(0, colon),
                    static_cast<std::uint16_t>(std::stoi(upstream.substr(colon + 1))), port);
  std::cout << "proxying " << upstream << " on port " << proxy.port() << "\n";
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  proxy.stop();
  return 0;
}

int cmd_gen(const WorkloadFlags& flags, const std::string& out_dir) {
  Workload workload = generate_workload(flags.resolve());
  fs::path base(out_dir);
  fs::create_directories(base / "policies");
  fs::create_directories(base / "requests");
  fs::create_directories(base / "direct");

  nlohmann::json manifest;
  manifest["seed"] = workload.spec.seed;
  manifest["policies"] = workload.spec.n_policies;
  manifest["requests"] = workload.spec.n_requests;
  manifest["unique_sequence"] = workload.unique_sequence;
  manifest["zipf_sequence"] = workload.zipf_sequence;

  for (std::size_t i = 0; i < workload.triples.size(); ++i) {
    const QueryTriple& t = workload.triples[i];
    std::string n = std::to_string(i);
    write_file(base / "direct" / (n + ".sql"), t.streamsql);
    if (static_cast<int>(i) < workload.spec.n_policies) {
      write_file(base / "policies" / (n + ".xml"), t.policy_doc);
      write_file(base / "requests" / (n + ".xml"), t.request_doc);
    }
  }
  write_file(base / "manifest.json", manifest.dump(2));
  std::cout << "wrote " << workload.triples.size() << " direct queries, "
            << workload.spec.n_policies << " policies and requests to " << out_dir << "\n";
  return 0;
}

int cmd_run(const WorkloadFlags& flags, const std::string& mode_name,
            const std::string& sequence_name, const std::string& endpoint,
            const std::string& csv_path) {
  BenchMode mode;
  if (mode_name == "direct") {
    mode = BenchMode::Direct;
  } else if (mode_name == "gateway") {
    mode = BenchMode::Gateway;
  } else if (mode_name == "proxy" || mode_name == "gateway+proxy") {
    mode = BenchMode::GatewayProxy;
  } else {
    throw ValidationError("--mode must be direct, gateway or proxy");
  }
  SequenceKind sequence;
  if (sequence_name == "unique") {
    sequence = SequenceKind::Unique;
  } else if (sequence_name == "zipf") {
    sequence = SequenceKind::Zipf;
  } else {
    throw ValidationError("--sequence must be unique or zipf");
  }

  Workload workload = generate_workload(flags.resolve());
  std::unique_ptr<BenchBackend> backend;
  if (endpoint == "local") {
    backend = std::make_unique<LocalBackend>();
  } else {
    std::size_t colon = endpoint.rfind(':');
    if (colon == std::string::npos) {
      throw ValidationError("--endpoint must be 'local' or host:port");
    }
    backend = std::make_unique<RemoteBackend>(
        endpoint.substr(0, colon),
        static_cast<std::uint16_t>(std::stoi(endpoint.substr(colon + 1))));
  }

  BenchResult result = run_benchmark(workload, mode, sequence, *backend);
  if (!csv_path.empty()) {
    write_file(csv_path, records_to_csv(result));
    std::cout << "wrote " << result.records.size() << " records to " << csv_path << "\n";
  }
  std::cout << summary_to_text(result.summary);
  return 0;
}

int cmd_report(const std::string& csv_path, const std::string& aggregates_path) {
  std::string mode;
  std::vector<TimingRecord> records = records_from_csv(read_file(csv_path), &mode);
  BenchSummary summary = summarize(records);
  std::cout << "mode: " << mode << "\n" << summary_to_text(summary);
  if (!aggregates_path.empty()) {
    write_file(aggregates_path, summary_to_aggregate_csv(summary));
    std::cout << "wrote aggregates to " << aggregates_path << "\n";
  }
  return 0;
}

int cmd_render(const std::string& schema_file, const std::string& policy_file,
               const std::string& query_file) {
  StreamEngine engine;
  if (schema_file.empty()) {
    for (Schema& s : builtin_schemas()) engine.register_stream(std::move(s));
  } else {
    engine.register_stream(schema_from_json(read_file(schema_file)));
  }
  Policy policy = parse_policy_document(read_file(policy_file));
  const Schema* schema = engine.find_stream(policy.target.resource);
  if (!schema) throw ValidationError("policy targets unknown stream '" + policy.target.resource + "'");
  QueryGraph policy_graph = obligations_to_graph(policy.obligations, *schema);

  QueryGraph final_graph = policy_graph;
  if (!query_file.empty()) {
    QueryGraph user_graph = parse_user_query(read_file(query_file), *schema);
    MergeResult merged = merge_graphs(policy_graph, user_graph, *schema);
    final_graph = merged.graph;
    std::cout << "warning: " << to_string(merged.warning.kind);
    if (!merged.warning.explanation.empty()) std::cout << " (" << merged.warning.explanation << ")";
    std::cout << "\n\n";
  }
  std::cout << render_streamsql(final_graph, *schema);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stream access-control gateway tools"};
  app.require_subcommand(1);
  // Options may come from a key=value config file with [subcommand] sections,
  // e.g. `streamgate --config bench.conf run`.
  app.set_config("--config", "", "key=value config file ([serve]/[gen]/[run] sections)");

  // serve
  auto* serve = app.add_subcommand("serve", "run the gateway/engine server");
  std::uint16_t port = 7070;
  bool strict_pr = false;
  bool no_guard = false;
  bool builtin = true;
  std::vector<std::string> schema_files, policy_files;
  serve->add_option("--port", port, "listen port")->envname("STREAMGATE_PORT");
  serve->add_flag("--strict-pr", strict_pr, "block deployment on PR warnings");
  serve->add_flag("--no-single-access-guard", no_guard, "disable the leak guard (testing only)");
  serve->add_flag("!--no-builtin-streams", builtin, "skip registering the builtin streams");
  serve->add_option("--schema", schema_files, "stream schema JSON file (repeatable)");
  serve->add_option("--policy", policy_files, "policy XML to preload (repeatable)");

  // proxy
  auto* proxy_cmd = app.add_subcommand("proxy", "run a caching proxy in front of a gateway");
  std::uint16_t proxy_port = 7072;
  std::string upstream = "127.0.0.1:7070";
  proxy_cmd->add_option("--port", proxy_port, "listen port");
  proxy_cmd->add_option("--upstream", upstream, "gateway host:port")
      ->envname("STREAMGATE_UPSTREAM");

  // gen
  auto* gen = app.add_subcommand("gen", "emit workload files");
  WorkloadFlags gen_flags;
  gen_flags.attach(gen);
  std::string out_dir = "workload";
  gen->add_option("--out", out_dir, "output directory");

  // run
  auto* run = app.add_subcommand("run", "run a benchmark");
  WorkloadFlags run_flags;
  run_flags.attach(run);
  std::string mode_name = "gateway";
  std::string sequence_name = "unique";
  std::string endpoint = "local";
  std::string csv_path;
  run->add_option("--mode", mode_name, "direct | gateway | proxy");
  run->add_option("--sequence", sequence_name, "unique | zipf");
  run->add_option("--endpoint", endpoint, "'local' or host:port")->envname("STREAMGATE_ENDPOINT");
  run->add_option("--csv", csv_path, "write per-request records to this CSV");

  // report
  auto* report = app.add_subcommand("report", "summarize a benchmark CSV");
  std::string report_csv, aggregates_path;
  report->add_option("--csv", report_csv, "input CSV")->required();
  report->add_option("--aggregates", aggregates_path, "write plot-ready aggregates CSV");

  // render
  auto* render = app.add_subcommand("render", "render a policy (+ user query) as StreamSQL");
  std::string schema_file, policy_file, query_file;
  render->add_option("--schema", schema_file, "stream schema JSON (default: builtin streams)");
  render->add_option("--policy", policy_file, "policy XML")->required();
  render->add_option("--query", query_file, "user query XML");

  CLI11_PARSE(app, argc, argv);

  try {
    if (serve->parsed()) {
      return cmd_serve(port, strict_pr, no_guard, schema_files, policy_files, builtin);
    }
    if (proxy_cmd->parsed()) return cmd_proxy(proxy_port, upstream);
    if (gen->parsed()) return cmd_gen(gen_flags, out_dir);
    if (run->parsed()) {
      return cmd_run(run_flags, mode_name, sequence_name, endpoint, csv_path);
    }
    if (report->parsed()) return cmd_report(report_csv, aggregates_path);
    if (render->parsed()) return cmd_render(schema_file, policy_file, query_file);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
